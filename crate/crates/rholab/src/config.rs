//! TOML-backed configuration types for the command line, one section shape
//! per subcommand, plus the runners that turn a parsed config into reports
//! and CSV tables in an output directory.
//!
//! Every config may carry optional `expect_*` fields; a run exits with code
//! 0 when all stated expectations hold, 1 when one fails, 2 on configuration
//! errors.

use crate::dyadic::{cz_decompose, localized_mixed_check, ShiftedGrids};
use crate::error::{Error, Result};
use crate::kernels::{
    check_size_ls, check_size_pointwise, check_smoothness_ls, check_smoothness_pointwise,
    AnnulusSampling, Kernel, PairSampling, TripleSampling,
};
use crate::lattice::{average, maximal_ladder, Cube, CubeFamily, Lattice};
use crate::maximal::{dyadic_maximal, m_rho_sigma, minimal_m};
use crate::report;
use crate::rho::{critical_covering, shen_rho_report, verify_variation, ShenQuadrature, VariationSampling};
use crate::sweep::{negative_control, run_sweep, sigma_search, ExperimentConfig, FieldSpec, RhoSpec};
use crate::weights::{
    a1_constant, ainf_eps_check, ap_constant, relation_suite, rh_constant, RelationBench,
    SubsetScheme,
};
use crate::Point;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoxSpec {
    pub low: Vec<f64>,
    pub high: Vec<f64>,
    pub points_per_axis: usize,
    #[serde(default)]
    pub offset: bool,
}

impl BoxSpec {
    pub fn lattice(&self) -> Result<Lattice> {
        if self.offset {
            Lattice::midpoint_box(&self.low, &self.high, self.points_per_axis)
        } else {
            let h = (self.high[0] - self.low[0]) / self.points_per_axis as f64;
            Lattice::closed_box(&self.low, &self.high, h)
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyRhoConfig {
    pub rho: RhoSpec,
    pub low: Vec<f64>,
    pub high: Vec<f64>,
    #[serde(default = "d40")]
    pub grid_per_axis: usize,
    #[serde(default = "d10k")]
    pub random_pairs: usize,
    #[serde(default = "d7")]
    pub seed: u64,
    #[serde(default = "dcap")]
    pub c0_cap: f64,
    #[serde(default)]
    pub expect_satisfied: Option<bool>,
}

fn d40() -> usize {
    40
}
fn d10k() -> usize {
    10_000
}
fn d7() -> u64 {
    7
}
fn dcap() -> f64 {
    1e3
}

pub fn run_verify_rho(cfg: &VerifyRhoConfig, out: &Path) -> Result<bool> {
    let sampling = VariationSampling {
        grid_per_axis: cfg.grid_per_axis,
        random_pairs: cfg.random_pairs,
        seed: cfg.seed,
        c0_cap: cfg.c0_cap,
        ..Default::default()
    };
    let rep = verify_variation(&cfg.rho.build(), &cfg.low, &cfg.high, &sampling)?;
    report::write_json(&rep, &out.join("variation_report.json"))?;
    println!(
        "variation: C0 = {:.6}, N0 = {}, satisfied = {}",
        rep.c0_fit, rep.n0_fit, rep.satisfied
    );
    Ok(cfg.expect_satisfied.map_or(true, |e| e == rep.satisfied))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PotentialSpec {
    Constant { value: f64 },
    /// |x|^2
    Quadratic,
    /// |x|^exponent
    Power { exponent: f64 },
}

impl PotentialSpec {
    pub fn eval(&self, p: &Point) -> f64 {
        match self {
            PotentialSpec::Constant { value } => *value,
            PotentialSpec::Quadratic => p.norm() * p.norm(),
            PotentialSpec::Power { exponent } => p.norm().powf(*exponent),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShenRhoConfig {
    pub potential: PotentialSpec,
    /// Evaluation points in R^3.
    pub points: Vec<Vec<f64>>,
    #[serde(default)]
    pub expect_rho: Option<Vec<f64>>,
    #[serde(default = "dtol")]
    pub tolerance: f64,
}

fn dtol() -> f64 {
    1e-3
}

#[derive(Serialize)]
struct ShenRow {
    point: Vec<f64>,
    rho: f64,
    f_at_rho: f64,
    monotonicity_violations: usize,
}

pub fn run_shen_rho(cfg: &ShenRhoConfig, out: &Path) -> Result<bool> {
    let quad = ShenQuadrature::default();
    let mut rows = Vec::new();
    let mut ok = true;
    for (i, coords) in cfg.points.iter().enumerate() {
        let p = Point::new(coords)?;
        let diag = shen_rho_report(&|q: &Point| cfg.potential.eval(q), &p, 3, &quad)?;
        println!("rho({coords:?}) = {:.6}", diag.rho);
        if let Some(expect) = &cfg.expect_rho {
            if (diag.rho - expect[i]).abs() > cfg.tolerance {
                ok = false;
            }
        }
        rows.push(ShenRow {
            point: coords.clone(),
            rho: diag.rho,
            f_at_rho: diag.f_at_rho,
            monotonicity_violations: diag.monotonicity_violations,
        });
    }
    report::write_json(&rows, &out.join("shen_rho.json"))?;
    Ok(ok)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoveringConfig {
    pub rho: RhoSpec,
    #[serde(flatten)]
    pub domain: BoxSpec,
    #[serde(default = "dsigma")]
    pub sigma_ladder: Vec<f64>,
    #[serde(default)]
    pub expect_covered: Option<bool>,
}

fn dsigma() -> Vec<f64> {
    vec![1.0, 2.0, 4.0, 8.0]
}

pub fn run_covering(cfg: &CoveringConfig, out: &Path) -> Result<bool> {
    let lat = cfg.domain.lattice()?;
    let rep = critical_covering(&cfg.rho.build(), &lat, &cfg.sigma_ladder)?;
    println!(
        "covering: {} centers, covered = {}, N1 fit = {:.3}",
        rep.centers.len(),
        rep.covered,
        rep.n1_fit
    );
    for (s, c) in &rep.max_overlap {
        println!("  sigma = {s}: max overlap {c}");
    }
    let rows: Vec<Vec<f64>> = rep
        .max_overlap
        .iter()
        .map(|(s, c)| vec![*s, *c as f64])
        .collect();
    report::write_csv_rows(&out.join("overlap.csv"), &["sigma", "max_overlap"], &rows)?;
    report::write_json(&rep, &out.join("covering_report.json"))?;
    Ok(cfg.expect_covered.map_or(true, |e| e == rep.covered))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightConstantConfig {
    pub rho: RhoSpec,
    pub weight: FieldSpec,
    #[serde(default)]
    pub base: Option<FieldSpec>,
    /// one of "ap", "a1", "rh", "rh-inf", "ainf-eps"
    pub class: String,
    #[serde(default)]
    pub exponent: Option<f64>,
    #[serde(default)]
    pub theta: f64,
    #[serde(flatten)]
    pub domain: BoxSpec,
    /// extra refinement levels reported (spacing halves per level)
    #[serde(default)]
    pub refine: usize,
    #[serde(default)]
    pub expect_max: Option<f64>,
}

pub fn run_weight_constant(cfg: &WeightConstantConfig, out: &Path) -> Result<bool> {
    let rho = cfg.rho.build();
    let mut rows = Vec::new();
    let mut last = f64::NAN;
    for level in 0..=cfg.refine {
        let spec = BoxSpec {
            points_per_axis: cfg.domain.points_per_axis << level,
            ..cfg.domain.clone()
        };
        let lat = spec.lattice()?;
        let width = cfg.domain.high[0] - cfg.domain.low[0];
        let family = CubeFamily::exhaustive_lattice(&lat, &maximal_ladder(&lat, width))?;
        let w = cfg.weight.weight(&lat)?;
        let base = match &cfg.base {
            None => None,
            Some(b) => Some(b.weight(&lat)?),
        };
        let est = match cfg.class.as_str() {
            "ap" => ap_constant(
                &w,
                base.as_ref(),
                cfg.exponent.unwrap_or(2.0),
                cfg.theta,
                &rho,
                &family,
            )?,
            "a1" => a1_constant(&w, base.as_ref(), cfg.theta, &rho, &family)?,
            "rh" => rh_constant(&w, cfg.exponent.unwrap_or(2.0), cfg.theta, &rho, &family)?,
            "rh-inf" => rh_constant(&w, f64::INFINITY, cfg.theta, &rho, &family)?,
            "ainf-eps" => ainf_eps_check(
                &w,
                base.as_ref(),
                cfg.theta,
                cfg.exponent.unwrap_or(0.5),
                &rho,
                &family,
                &SubsetScheme::default(),
            )?,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown class {other:?}"
                )))
            }
        };
        println!("level {level}: {} constant = {:.6e}", est.class, est.value);
        rows.push(vec![level as f64, est.value]);
        last = est.value;
        if level == cfg.refine {
            report::write_json(&est, &out.join("constant.json"))?;
        }
    }
    report::write_csv_rows(&out.join("constants_by_level.csv"), &["level", "constant"], &rows)?;
    Ok(cfg.expect_max.map_or(true, |m| last <= m))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelationsConfig {
    #[serde(default = "d256")]
    pub points_per_axis: usize,
    #[serde(default)]
    pub expect_all_pass: Option<bool>,
}

fn d256() -> usize {
    256
}

pub fn run_relations(cfg: &RelationsConfig, out: &Path) -> Result<bool> {
    let bench = RelationBench::standard(cfg.points_per_axis);
    let rep = relation_suite(&bench)?;
    for c in &rep.checks {
        println!(
            "{:4} {:?}  lhs = {:.6e}  rhs = {:.6e}  {}",
            c.id, c.verdict, c.lhs_constant, c.rhs_constant, c.description
        );
    }
    report::write_json(&rep, &out.join("relations.json"))?;
    let mut rows = String::from("id,lhs,rhs,verdict\n");
    for c in &rep.checks {
        rows.push_str(&format!(
            "{},{},{},{:?}\n",
            c.id, c.lhs_constant, c.rhs_constant, c.verdict
        ));
    }
    std::fs::write(out.join("relations.csv"), rows)?;
    Ok(cfg
        .expect_all_pass
        .map_or(true, |e| e == rep.all_pass()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CzConfig {
    pub f: FieldSpec,
    pub v: FieldSpec,
    #[serde(flatten)]
    pub domain: BoxSpec,
    /// level = factor * weighted root average; must exceed one
    #[serde(default = "d2")]
    pub t_factor: f64,
    #[serde(default)]
    pub run_localized_check: bool,
}

fn d2() -> f64 {
    2.0
}

pub fn run_cz(cfg: &CzConfig, out: &Path) -> Result<bool> {
    let lat = cfg.domain.lattice()?;
    let root = lat.bounding_cube()?;
    let f = cfg.f.field(&lat)?;
    let f = f.map(|x| x.abs())?;
    let v = cfg.v.weight(&lat)?;
    let avg = average(&f, &root, Some(&v))?;
    let t = cfg.t_factor * avg;
    let dec = cz_decompose(&f, &root, &v, t)?;
    println!(
        "decomposition at t = {t:.6}: {} cubes, gamma = {:.3}, doubling = {:.3}",
        dec.selected.len(),
        dec.gamma_realized,
        dec.doubling_measured
    );
    std::fs::write(out.join("cz_cubes.csv"), dec.cube_csv())?;
    crate::lattice::io::write_file(dec.good(), &out.join("good.lattice.txt"))?;
    crate::lattice::io::write_file(dec.bad_total(), &out.join("bad.lattice.txt"))?;
    let mean_zero = dec.mean_zero_defect(&f, &v);
    println!("mean-zero defect: {mean_zero:.3e}");
    let mut ok = mean_zero <= 1e-10;
    if cfg.run_localized_check {
        let u = crate::lattice::WeightField::one(&lat)?;
        let rec = localized_mixed_check(&f, &root, &u, &v, None)?;
        println!("localized mixed sweep: sup ratio = {:.6}", rec.sup_ratio);
        report::sweep_rows_csv(&out.join("localized_sweep.csv"), &rec.rows)?;
        ok = ok && rec.sup_ratio.is_finite();
    }
    Ok(ok)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelCheckConfig {
    /// built-in kernel name (see `Kernel::by_name`)
    pub kernel: String,
    #[serde(default = "d4f")]
    pub n0: f64,
    pub rho: RhoSpec,
    pub low: Vec<f64>,
    pub high: Vec<f64>,
    #[serde(default = "dn")]
    pub decay_n: f64,
    #[serde(default = "d1f")]
    pub delta: f64,
    #[serde(default = "d2")]
    pub s: f64,
    #[serde(default = "d500")]
    pub samples: usize,
    #[serde(default = "d7")]
    pub seed: u64,
    #[serde(default)]
    pub expect_passed: Option<bool>,
}

fn d4f() -> f64 {
    4.0
}
fn dn() -> f64 {
    2.0
}
fn d1f() -> f64 {
    1.0
}
fn d500() -> usize {
    500
}

pub fn run_kernel_check(cfg: &KernelCheckConfig, out: &Path) -> Result<bool> {
    let dim = cfg.low.len();
    let kernel = Kernel::by_name(&cfg.kernel, dim, cfg.n0, cfg.rho.build())?;
    let pairs = PairSampling {
        low: cfg.low.clone(),
        high: cfg.high.clone(),
        count: cfg.samples,
        seed: cfg.seed,
        min_separation: 1e-3,
    };
    let triples = TripleSampling {
        low: cfg.low.clone(),
        high: cfg.high.clone(),
        count: cfg.samples,
        seed: cfg.seed.wrapping_add(1),
        min_scale: 1e-4,
    };
    let width = cfg.high[0] - cfg.low[0];
    let annuli = AnnulusSampling {
        low: cfg.low.clone(),
        high: cfg.high.clone(),
        r_ladder: vec![width / 16.0, width / 8.0, width / 4.0],
        centers: 4,
        tests_per_annulus: 3,
        grid_per_axis: if dim == 1 { 512 } else { 64 },
        seed: cfg.seed.wrapping_add(2),
    };
    let reports = vec![
        check_size_pointwise(&kernel, dim, cfg.decay_n, &pairs)?,
        check_smoothness_pointwise(&kernel, dim, cfg.delta, &triples)?,
        check_size_ls(&kernel, dim, cfg.s, cfg.decay_n, &annuli)?,
        check_smoothness_ls(&kernel, dim, cfg.s, cfg.delta, 0.0, &annuli)?,
    ];
    for r in &reports {
        println!(
            "{:24} fitted = {:.6e}  passed = {}",
            r.condition, r.fitted, r.passed
        );
    }
    report::write_json(&reports, &out.join("kernel_checks.json"))?;
    let all = reports.iter().all(|r| r.passed);
    Ok(cfg.expect_passed.map_or(true, |e| e == all))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MaximalConfig {
    pub f: FieldSpec,
    pub rho: RhoSpec,
    /// one of "maximal", "minimal", "dyadic"
    #[serde(default = "dmax")]
    pub operator: String,
    #[serde(default)]
    pub sigma: f64,
    #[serde(flatten)]
    pub domain: BoxSpec,
}

fn dmax() -> String {
    "maximal".into()
}

pub fn run_maximal(cfg: &MaximalConfig, out: &Path) -> Result<bool> {
    let lat = cfg.domain.lattice()?;
    let f = cfg.f.field(&lat)?;
    let rho = cfg.rho.build();
    let width = cfg.domain.high[0] - cfg.domain.low[0];
    let family = CubeFamily::exhaustive_lattice(&lat, &maximal_ladder(&lat, width))?;
    let result = match cfg.operator.as_str() {
        "maximal" => m_rho_sigma(&f, &rho, cfg.sigma, &family)?,
        "minimal" => minimal_m(&f, &rho, cfg.sigma, &family)?,
        "dyadic" => dyadic_maximal(&f, &lat.bounding_cube()?, None, None)?,
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown operator {other:?}"
            )))
        }
    };
    crate::lattice::io::write_file(&result.field()?, &out.join("maximal.lattice.txt"))?;
    std::fs::write(out.join("witness.csv"), result.witness_csv())?;
    println!(
        "{} operator written for {} lattice points",
        cfg.operator,
        lat.len()
    );
    Ok(true)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepFileConfig {
    #[serde(flatten)]
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub expect_stable: Option<bool>,
    #[serde(default)]
    pub expect_fired: Option<bool>,
    /// run as negative control (pre-checks reported, not enforced)
    #[serde(default)]
    pub control: bool,
}

pub fn run_sweep_cmd(cfg: &SweepFileConfig, out: &Path) -> Result<bool> {
    let (rec, fired) = if cfg.control {
        let (rec, fired) = negative_control(&cfg.experiment)?;
        (rec, Some(fired))
    } else {
        (run_sweep(&cfg.experiment)?, None)
    };
    println!(
        "sweep '{}': sup ratio by level {:?}, drift {:.3}, stable {}",
        rec.label, rec.sup_ratio_by_level, rec.refinement_drift, rec.stable
    );
    if let Some(f) = fired {
        println!("instability detector fired: {f}");
    }
    report::sweep_rows_csv(&out.join("sweep_rows.csv"), &rec.rows)?;
    report::write_json(&rec, &out.join("sweep_record.json"))?;
    let mut ok = true;
    if let Some(e) = cfg.expect_stable {
        ok &= e == rec.stable;
    }
    if let (Some(e), Some(f)) = (cfg.expect_fired, fired) {
        ok &= e == f;
    }
    Ok(ok)
}

pub fn run_sigma_search_cmd(cfg: &SweepFileConfig, out: &Path) -> Result<bool> {
    let (sigma, rec) = sigma_search(&cfg.experiment)?;
    println!(
        "sigma search: sigma* = {sigma:?}, sup ratio by level {:?}",
        rec.sup_ratio_by_level
    );
    report::write_json(&(sigma, &rec), &out.join("sigma_search.json"))?;
    report::sweep_rows_csv(&out.join("sweep_rows.csv"), &rec.rows)?;
    Ok(cfg.expect_stable.map_or(sigma.is_some(), |e| {
        e == (sigma.is_some() && rec.stable)
    }))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExponentsConfig {
    pub q: f64,
    pub d: u32,
    #[serde(default)]
    pub gamma: Option<f64>,
}

pub fn run_exponents(cfg: &ExponentsConfig, out: &Path) -> Result<bool> {
    let t = crate::kernels::exponent_table(cfg.q, cfg.d, cfg.gamma)?;
    println!("{}", report::to_json(&t));
    report::write_json(&t, &out.join("exponents.json"))?;
    Ok(true)
}

/// Smoke check used by the dyadic-grid subcommand of the examples; kept in
/// the library so the CLI and tests share it.
pub fn grids_self_check(dim: usize, cubes: usize, seed: u64) -> Result<(usize, f64)> {
    use rand::{Rng, SeedableRng};
    let grids = ShiftedGrids::new(dim)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..cubes {
        let center: Vec<f64> = (0..dim).map(|_| rng.gen_range(-20.0..20.0)).collect();
        let side = 2f64.powf(rng.gen_range(-6.0..4.0));
        let q = Cube::new(
            Point::new(&center)?,
            (dim as f64).sqrt() * side / 2.0,
        )?;
        let (_, q0) = grids.enclosing(&q)?;
        worst = worst.max(q0.side() / q.side());
    }
    Ok((cubes, worst))
}
