//! End-to-end mixed weak-type sweeps: build (rho, u, v, f, operator), sweep a
//! level ladder, measure uv-masses of the perturbed operator's level sets and
//! study refinement stability of the best constant.
//!
//! "The inequality holds" is operationalized as refinement stability of the
//! sup ratio (drift below 1.5x per refinement); the negative control detects
//! instability as growth by 3x or more across the study.

use crate::dyadic::ShiftedGrids;
use crate::error::{Error, Result};
use crate::kernels::{apply_kernel, Kernel};
use crate::lattice::{maximal_ladder, CubeFamily, Lattice, LatticeField, Point, WeightField};
use crate::maximal::{dyadic_maximal, m_rho_sigma};
use crate::numerics::pairwise_sum;
use crate::report::{dyadic_ladder, SweepRow};
use crate::rho::CriticalRadius;
use crate::weights::{ainf_membership, class_membership, ClassSpec, StabilityParams, StudyDomain, WeightExpr};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RhoSpec {
    Constant { value: f64 },
    InverseDistance,
    GaussianGrowth,
    Classical,
}

impl RhoSpec {
    pub fn build(&self) -> CriticalRadius {
        match self {
            RhoSpec::Constant { value } => CriticalRadius::constant(*value),
            RhoSpec::InverseDistance => CriticalRadius::inverse_distance(),
            RhoSpec::GaussianGrowth => CriticalRadius::gaussian_growth(),
            RhoSpec::Classical => CriticalRadius::classical(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FieldSpec {
    One,
    Constant { value: f64 },
    /// |x|^a
    PowerAbs { exponent: f64 },
    /// (1+|x|)^a
    PowerOnePlus { exponent: f64 },
    /// exp(|x|)
    ExpAbs,
    /// max(floor, |x|^a)
    ClampedPowerAbs { exponent: f64, floor: f64 },
    /// indicator of the coordinate box [lo, hi]^d
    Indicator { lo: f64, hi: f64 },
    /// indicator of [lo, hi]^d plus a positive floor (for weights)
    IndicatorPlus { lo: f64, hi: f64, floor: f64 },
    /// height * indicator of [lo, hi]^d
    ScaledIndicator { lo: f64, hi: f64, height: f64 },
    /// indicator of |x| <= radius
    IndicatorBall { radius: f64 },
    /// deterministic per-point noise in [floor, floor + amplitude), seeded
    /// by hashing the coordinates
    HashNoise { floor: f64, amplitude: f64, seed: u64 },
}

fn hash01(coords: &[f64], seed: u64) -> f64 {
    // splitmix64 over the coordinate bit patterns
    let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(0x12345);
    for &c in coords {
        state ^= c.to_bits();
        state = state.wrapping_mul(0xBF58476D1CE4E5B9);
        state ^= state >> 27;
    }
    state ^= state >> 31;
    state = state.wrapping_mul(0x94D049BB133111EB);
    state ^= state >> 30;
    (state >> 11) as f64 / (1u64 << 53) as f64
}

impl FieldSpec {
    pub fn eval(&self, p: &Point) -> f64 {
        match self {
            FieldSpec::One => 1.0,
            FieldSpec::Constant { value } => *value,
            FieldSpec::PowerAbs { exponent } => p.norm().powf(*exponent),
            FieldSpec::PowerOnePlus { exponent } => (1.0 + p.norm()).powf(*exponent),
            FieldSpec::ExpAbs => p.norm().exp(),
            FieldSpec::ClampedPowerAbs { exponent, floor } => p.norm().powf(*exponent).max(*floor),
            FieldSpec::Indicator { lo, hi } => {
                if p.coords().iter().all(|&c| c >= *lo && c <= *hi) {
                    1.0
                } else {
                    0.0
                }
            }
            FieldSpec::IndicatorPlus { lo, hi, floor } => {
                if p.coords().iter().all(|&c| c >= *lo && c <= *hi) {
                    1.0 + floor
                } else {
                    *floor
                }
            }
            FieldSpec::ScaledIndicator { lo, hi, height } => {
                if p.coords().iter().all(|&c| c >= *lo && c <= *hi) {
                    *height
                } else {
                    0.0
                }
            }
            FieldSpec::IndicatorBall { radius } => {
                if p.norm() <= *radius {
                    1.0
                } else {
                    0.0
                }
            }
            FieldSpec::HashNoise {
                floor,
                amplitude,
                seed,
            } => floor + amplitude * hash01(p.coords(), *seed),
        }
    }

    pub fn expr(&self, label: &str) -> WeightExpr {
        let spec = self.clone();
        WeightExpr::new(label, move |p| spec.eval(p))
    }

    pub fn field(&self, lat: &Lattice) -> Result<LatticeField> {
        LatticeField::from_fn(lat, |p| self.eval(p))
    }

    pub fn weight(&self, lat: &Lattice) -> Result<WeightField> {
        WeightField::from_fn(lat, |p| self.eval(p))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OperatorSpec {
    /// Penalized maximal operator over the standard lattice ladder family.
    MaximalRhoSigma { sigma: f64 },
    /// Truncated application of the built-in surrogate kernel.
    SurrogateKernel { n0: f64, eps_cells: f64 },
    /// Unweighted dyadic maximal operator over the box's halving tree.
    DyadicLocal,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HypothesisProfile {
    /// u in A_1, v in A_inf(u): the profile for maximal-type operators.
    Maximal,
    /// Same weight hypotheses, for kernels with pointwise bounds.
    PointwiseKernel,
    /// u^{s'} in A_1, v in A_inf(u^beta) with beta > s': the strengthened
    /// profile for kernels with annulus-integral bounds of order s.
    IntegralKernel { s: f64, beta: f64 },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum RefinementMode {
    /// Halve the lattice spacing per level (box fixed).
    HalveSpacing,
    /// Grow the box by 1.5x per level (spacing fixed): exposes weights whose
    /// constants live at large scales.
    ExtendBox,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub low: Vec<f64>,
    pub high: Vec<f64>,
    pub points_per_axis: usize,
    /// Midpoint (offset) lattice: avoids box endpoints and the origin.
    #[serde(default)]
    pub offset: bool,
}

impl LatticeSpec {
    pub fn build(&self, mode: RefinementMode, level: usize) -> Result<Lattice> {
        let (low, high, n) = match mode {
            RefinementMode::HalveSpacing => (
                self.low.clone(),
                self.high.clone(),
                self.points_per_axis << level,
            ),
            RefinementMode::ExtendBox => {
                let factor = 1.5f64.powi(level as i32);
                let low: Vec<f64> = self.low.iter().map(|&c| c * factor).collect();
                let high: Vec<f64> = self.high.iter().map(|&c| c * factor).collect();
                let n = (self.points_per_axis as f64 * factor).round() as usize;
                (low, high, n)
            }
        };
        if self.offset {
            Lattice::midpoint_box(&low, &high, n)
        } else {
            let h = (high[0] - low[0]) / n as f64;
            Lattice::closed_box(&low, &high, h)
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub label: String,
    pub rho: RhoSpec,
    pub u: FieldSpec,
    pub v: FieldSpec,
    pub f: FieldSpec,
    pub operator: OperatorSpec,
    pub lattice: LatticeSpec,
    #[serde(default = "default_t_steps")]
    pub t_steps: usize,
    pub profile: HypothesisProfile,
    /// Number of refinements on top of the base lattice.
    #[serde(default = "default_refine")]
    pub refine_levels: usize,
    #[serde(default = "default_mode")]
    pub refinement: RefinementMode,
    #[serde(default)]
    pub seed: u64,
    /// Run the sweep even when the hypothesis pre-check fails.
    #[serde(default)]
    pub override_precheck: bool,
}

fn default_t_steps() -> usize {
    24
}
fn default_refine() -> usize {
    2
}
fn default_mode() -> RefinementMode {
    RefinementMode::HalveSpacing
}

#[derive(Clone, Debug, Serialize)]
pub struct PrecheckItem {
    pub name: String,
    pub stable: bool,
    pub theta: Option<f64>,
    pub constants: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PrecheckReport {
    pub items: Vec<PrecheckItem>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRecord {
    pub label: String,
    /// Rows at the finest refinement level.
    pub rows: Vec<SweepRow>,
    pub sup_ratio_by_level: Vec<f64>,
    pub sup_ratio: f64,
    /// max over consecutive levels of max(r2/r1, r1/r2).
    pub refinement_drift: f64,
    /// sup ratio at the last level over the first.
    pub growth: f64,
    pub stable: bool,
    pub precheck: Option<PrecheckReport>,
}

/// Empirical hypothesis pre-check for the configured profile.
pub fn precheck(cfg: &ExperimentConfig) -> Result<PrecheckReport> {
    let rho = cfg.rho.build();
    // Hypothesis classes quantify over all cubes: the pre-check refines by
    // growing the box, which is what exposes weights whose constants live at
    // large scales (spacing refinement on a fixed box cannot see them).
    let domain = StudyDomain::growing_box(
        cfg.lattice.low.clone(),
        cfg.lattice.high.clone(),
        cfg.lattice.points_per_axis,
    );
    let params = StabilityParams {
        levels: 3,
        ..Default::default()
    };
    let u = cfg.u.expr("u");
    let v = cfg.v.expr("v");
    let mut items = Vec::new();
    match cfg.profile {
        HypothesisProfile::Maximal | HypothesisProfile::PointwiseKernel => {
            let m1 = class_membership(&domain, &rho, &u, None, ClassSpec::A1, &params)?;
            items.push(PrecheckItem {
                name: "u in A_1".into(),
                stable: m1.stable,
                theta: m1.theta,
                constants: m1.constants,
            });
            let m2 = ainf_membership(&domain, &rho, &v, Some(&u), &params)?;
            items.push(PrecheckItem {
                name: "v in A_inf(u)".into(),
                stable: m2.stable,
                theta: m2.theta,
                constants: m2.constants,
            });
        }
        HypothesisProfile::IntegralKernel { s, beta } => {
            let sp = s / (s - 1.0);
            if !(beta > sp) {
                return Err(Error::InvalidParameter(format!(
                    "beta = {beta} must exceed s' = {sp}"
                )));
            }
            let m1 = class_membership(&domain, &rho, &u.pow(sp), None, ClassSpec::A1, &params)?;
            items.push(PrecheckItem {
                name: format!("u^{sp} in A_1"),
                stable: m1.stable,
                theta: m1.theta,
                constants: m1.constants,
            });
            let m2 = ainf_membership(&domain, &rho, &v, Some(&u.pow(beta)), &params)?;
            items.push(PrecheckItem {
                name: format!("v in A_inf(u^{beta})"),
                stable: m2.stable,
                theta: m2.theta,
                constants: m2.constants,
            });
        }
    }
    let passed = items.iter().all(|i| i.stable);
    Ok(PrecheckReport { items, passed })
}

/// The perturbed operator values `Op(f v)/v` on the lattice.
fn operator_values(
    cfg: &ExperimentConfig,
    rho: &CriticalRadius,
    lat: &Lattice,
    f: &LatticeField,
    v: &WeightField,
) -> Result<Vec<f64>> {
    let fv = f.product(v.field())?;
    let vals: Vec<f64> = match &cfg.operator {
        OperatorSpec::MaximalRhoSigma { sigma } => {
            let width = lat.high()[0] - lat.low()[0];
            let family = CubeFamily::exhaustive_lattice(lat, &maximal_ladder(lat, width))?;
            let m = m_rho_sigma(&fv, rho, *sigma, &family)?;
            (0..lat.len()).map(|i| m.value_or(i, 0.0)).collect()
        }
        OperatorSpec::SurrogateKernel { n0, eps_cells } => {
            let k = Kernel::surrogate(lat.dim(), *n0, rho.clone());
            let t = apply_kernel(&k, &fv, eps_cells * lat.spacing())?;
            t.samples().iter().map(|x| x.abs()).collect()
        }
        OperatorSpec::DyadicLocal => {
            let root = lat.bounding_cube()?;
            let m = dyadic_maximal(&fv, &root, None, None)?;
            (0..lat.len()).map(|i| m.value_or(i, 0.0)).collect()
        }
    };
    Ok((0..lat.len()).map(|i| vals[i] / v.get(i)).collect())
}

fn sweep_one_level(
    cfg: &ExperimentConfig,
    rho: &CriticalRadius,
    lat: &Lattice,
) -> Result<Vec<SweepRow>> {
    let f = cfg.f.field(lat)?;
    let u = cfg.u.weight(lat)?;
    let v = cfg.v.weight(lat)?;
    let g = operator_values(cfg, rho, lat, &f, &v)?;
    let cellvol = lat.cell_volume();
    let uv: Vec<f64> = (0..lat.len()).map(|i| u.get(i) * v.get(i)).collect();
    let rhs_terms: Vec<f64> = (0..lat.len()).map(|i| f.get(i).abs() * uv[i]).collect();
    let rhs = cellvol * pairwise_sum(&rhs_terms);
    let uv_mass = cellvol * pairwise_sum(&uv);
    let max_g = g.iter().cloned().fold(0.0f64, f64::max);
    let ladder = if rhs > 0.0 && max_g > 0.0 {
        dyadic_ladder(2.0 * rhs / uv_mass, 2.0 * max_g, cfg.t_steps)
    } else {
        vec![1.0]
    };
    let mut rows = Vec::with_capacity(ladder.len());
    for &t in &ladder {
        let terms: Vec<f64> = (0..lat.len())
            .filter(|&i| g[i] > t)
            .map(|i| uv[i])
            .collect();
        let lhs = cellvol * pairwise_sum(&terms);
        rows.push(SweepRow::new(t, lhs, rhs));
    }
    Ok(rows)
}

/// Run the configured sweep across its refinement levels.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepRecord> {
    let pre = precheck(cfg)?;
    if !pre.passed && !cfg.override_precheck {
        let failing: Vec<&str> = pre
            .items
            .iter()
            .filter(|i| !i.stable)
            .map(|i| i.name.as_str())
            .collect();
        return Err(Error::PrecheckFailed(format!(
            "{} (set override_precheck to run anyway)",
            failing.join(", ")
        )));
    }
    run_sweep_with_precheck(cfg, Some(pre))
}

/// Run the sweep without re-running hypothesis pre-checks.
pub fn run_sweep_with_precheck(
    cfg: &ExperimentConfig,
    pre: Option<PrecheckReport>,
) -> Result<SweepRecord> {
    let rho = cfg.rho.build();
    let mut sup_by_level = Vec::new();
    let mut last_rows = Vec::new();
    for level in 0..=cfg.refine_levels {
        let lat = cfg.lattice.build(cfg.refinement, level)?;
        let rows = sweep_one_level(cfg, &rho, &lat)?;
        let sup = rows.iter().map(|r| r.ratio).fold(0.0f64, f64::max);
        sup_by_level.push(sup);
        last_rows = rows;
    }
    let mut drift = 1.0f64;
    for w in sup_by_level.windows(2) {
        if w[0] > 0.0 && w[1] > 0.0 {
            drift = drift.max((w[1] / w[0]).max(w[0] / w[1]));
        }
    }
    let growth = match (sup_by_level.first(), sup_by_level.last()) {
        (Some(&a), Some(&b)) if a > 0.0 => b / a,
        _ => 1.0,
    };
    Ok(SweepRecord {
        label: cfg.label.clone(),
        sup_ratio: *sup_by_level.last().unwrap(),
        rows: last_rows,
        sup_ratio_by_level: sup_by_level,
        refinement_drift: drift,
        growth,
        stable: drift < 1.5,
        precheck: pre,
    })
}

/// Search the dyadic sigma ladder for the smallest penalty exponent whose
/// sweep is refinement-stable.
pub fn sigma_search(cfg: &ExperimentConfig) -> Result<(Option<f64>, SweepRecord)> {
    let pre = precheck(cfg)?;
    if !pre.passed && !cfg.override_precheck {
        let failing: Vec<&str> = pre
            .items
            .iter()
            .filter(|i| !i.stable)
            .map(|i| i.name.as_str())
            .collect();
        return Err(Error::PrecheckFailed(failing.join(", ")));
    }
    let mut last: Option<SweepRecord> = None;
    for sigma in [0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0] {
        let mut c = cfg.clone();
        c.operator = OperatorSpec::MaximalRhoSigma { sigma };
        c.label = format!("{} [sigma = {sigma}]", cfg.label);
        let rec = run_sweep_with_precheck(&c, Some(pre.clone()))?;
        if rec.stable {
            return Ok((Some(sigma), rec));
        }
        last = Some(rec);
    }
    Ok((None, last.expect("sigma ladder is nonempty")))
}

/// Run a deliberately hypothesis-violating configuration (pre-checks are
/// reported, never enforced) and report whether the instability detector
/// fires: growth of the sup ratio by at least 3x across the refinements.
pub fn negative_control(cfg: &ExperimentConfig) -> Result<(SweepRecord, bool)> {
    let pre = precheck(cfg)?;
    let rec = run_sweep_with_precheck(cfg, Some(pre))?;
    let fired = rec.growth >= 3.0;
    Ok((rec, fired))
}

/// The grids are carried by dyadic-local experiments; exposed for examples.
pub fn shifted_grids_for(cfg: &ExperimentConfig) -> Result<ShiftedGrids> {
    ShiftedGrids::new(cfg.lattice.low.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classical_cfg(n: usize) -> ExperimentConfig {
        ExperimentConfig {
            label: "classical weak (1,1)".into(),
            rho: RhoSpec::Classical,
            u: FieldSpec::One,
            v: FieldSpec::One,
            f: FieldSpec::Indicator { lo: -1.0, hi: 1.0 },
            operator: OperatorSpec::MaximalRhoSigma { sigma: 0.0 },
            lattice: LatticeSpec {
                low: vec![-4.0],
                high: vec![4.0],
                points_per_axis: n,
                offset: false,
            },
            t_steps: 24,
            profile: HypothesisProfile::Maximal,
            refine_levels: 1,
            refinement: RefinementMode::HalveSpacing,
            seed: 1,
            override_precheck: false,
        }
    }

    #[test]
    fn zero_function_gives_zero_ratios() {
        let mut cfg = classical_cfg(64);
        cfg.f = FieldSpec::Constant { value: 0.0 };
        let rec = run_sweep(&cfg).unwrap();
        assert!(rec.rows.iter().all(|r| r.ratio == 0.0));
    }

    #[test]
    fn classical_weak_type_sweep() {
        let cfg = classical_cfg(128);
        let rec = run_sweep(&cfg).unwrap();
        assert!(rec.stable, "record: {:?}", rec.sup_ratio_by_level);
        assert!(rec.sup_ratio.is_finite() && rec.sup_ratio > 0.0);
        // level sets shrink along the ladder
        for w in rec.rows.windows(2) {
            assert!(w[1].lhs <= w[0].lhs + 1e-15);
        }
        // cross-check the finest level against a direct oracle at one t
        let lat = cfg.lattice.build(RefinementMode::HalveSpacing, 1).unwrap();
        let rho = cfg.rho.build();
        let f = cfg.f.field(&lat).unwrap();
        let width = lat.high()[0] - lat.low()[0];
        let fam = CubeFamily::exhaustive_lattice(&lat, &maximal_ladder(&lat, width)).unwrap();
        let m = m_rho_sigma(&f, &rho, 0.0, &fam).unwrap();
        let row = &rec.rows[rec.rows.len() / 2];
        let count = (0..lat.len())
            .filter(|&i| m.value(i).unwrap() > row.t)
            .count();
        let lhs_direct = count as f64 * lat.cell_volume();
        assert!((lhs_direct - row.lhs).abs() <= 1e-12 * (1.0 + lhs_direct));
    }

    #[test]
    fn v_equal_one_reduces_to_plain_sweep() {
        // with v = 1 the perturbed sweep must agree with the unperturbed one
        let cfg = classical_cfg(128);
        let rec = run_sweep(&cfg).unwrap();
        let mut cfg2 = cfg.clone();
        cfg2.v = FieldSpec::Constant { value: 1.0 };
        let rec2 = run_sweep(&cfg2).unwrap();
        assert_eq!(rec.rows.len(), rec2.rows.len());
        for (a, b) in rec.rows.iter().zip(&rec2.rows) {
            assert_eq!(a.t.to_bits(), b.t.to_bits());
            assert_eq!(a.lhs.to_bits(), b.lhs.to_bits());
            assert_eq!(a.ratio.to_bits(), b.ratio.to_bits());
        }
    }

    #[test]
    fn scaling_f_shifts_the_ladder() {
        // replacing f by 2f doubles every ladder level exactly (powers of
        // two are exact), leaves each level-set mass untouched and keeps the
        // ratios bitwise identical row by row
        let cfg = classical_cfg(64);
        let rec = run_sweep(&cfg).unwrap();
        let mut cfg2 = cfg.clone();
        cfg2.f = FieldSpec::ScaledIndicator {
            lo: -1.0,
            hi: 1.0,
            height: 2.0,
        };
        let rec2 = run_sweep(&cfg2).unwrap();
        assert_eq!(rec.rows.len(), rec2.rows.len());
        for (a, b) in rec.rows.iter().zip(&rec2.rows) {
            assert_eq!(b.t.to_bits(), (2.0 * a.t).to_bits());
            assert_eq!(b.lhs.to_bits(), a.lhs.to_bits());
            assert_eq!(b.ratio.to_bits(), a.ratio.to_bits());
        }
    }

    #[test]
    fn integral_kernel_profile_implies_pointwise_profile() {
        // hypotheses of the strengthened profile imply the plain ones
        let mut cfg = classical_cfg(64);
        cfg.rho = RhoSpec::InverseDistance;
        cfg.u = FieldSpec::PowerAbs { exponent: -0.25 };
        cfg.v = FieldSpec::PowerOnePlus { exponent: 0.2 };
        cfg.lattice.offset = true;
        cfg.profile = HypothesisProfile::IntegralKernel { s: 2.0, beta: 3.0 };
        let strong = precheck(&cfg).unwrap();
        assert!(strong.passed, "items: {:?}", strong.items);
        cfg.profile = HypothesisProfile::PointwiseKernel;
        let weak = precheck(&cfg).unwrap();
        assert!(weak.passed, "items: {:?}", weak.items);
    }

    #[test]
    fn precheck_blocks_bad_hypotheses() {
        let mut cfg = classical_cfg(64);
        cfg.v = FieldSpec::ExpAbs;
        cfg.lattice.low = vec![-8.0];
        cfg.lattice.high = vec![8.0];
        let err = run_sweep(&cfg);
        assert!(matches!(err, Err(Error::PrecheckFailed(_))), "{err:?}");
        cfg.override_precheck = true;
        let rec = run_sweep(&cfg).unwrap();
        assert!(!rec.precheck.as_ref().unwrap().passed);
    }

    #[test]
    fn sigma_search_classical_returns_zero() {
        let mut cfg = classical_cfg(64);
        cfg.refine_levels = 1;
        let (sigma, rec) = sigma_search(&cfg).unwrap();
        assert_eq!(sigma, Some(0.0));
        assert!(rec.stable);
    }

    #[test]
    fn sigma_star_nonincreasing_as_box_shrinks() {
        // fewer supercritical cubes on a smaller box can only lower the
        // stable penalty exponent
        let mut big = classical_cfg(64);
        big.rho = RhoSpec::InverseDistance;
        let mut small = big.clone();
        small.lattice.low = vec![-2.0];
        small.lattice.high = vec![2.0];
        let (s_big, _) = sigma_search(&big).unwrap();
        let (s_small, _) = sigma_search(&small).unwrap();
        assert!(s_small.unwrap() <= s_big.unwrap());
    }

    #[test]
    fn two_dimensional_sweep_runs_and_is_stable() {
        let cfg = ExperimentConfig {
            label: "planar weak (1,1)".into(),
            rho: RhoSpec::InverseDistance,
            u: FieldSpec::One,
            v: FieldSpec::PowerOnePlus { exponent: 0.2 },
            f: FieldSpec::IndicatorBall { radius: 1.0 },
            operator: OperatorSpec::MaximalRhoSigma { sigma: 1.0 },
            lattice: LatticeSpec {
                low: vec![-3.0, -3.0],
                high: vec![3.0, 3.0],
                points_per_axis: 32,
                offset: false,
            },
            t_steps: 16,
            profile: HypothesisProfile::Maximal,
            refine_levels: 1,
            refinement: RefinementMode::HalveSpacing,
            seed: 5,
            override_precheck: false,
        };
        let rec = run_sweep(&cfg).unwrap();
        assert!(rec.stable, "levels: {:?}", rec.sup_ratio_by_level);
        assert!(rec.sup_ratio.is_finite() && rec.sup_ratio > 0.0);
    }

    #[test]
    fn stable_control_does_not_fire() {
        let cfg = classical_cfg(64);
        let (rec, fired) = negative_control(&cfg).unwrap();
        assert!(!fired, "growth {}", rec.growth);
        assert!(rec.precheck.as_ref().unwrap().passed);
    }

    #[test]
    fn dyadic_local_operator_runs() {
        let mut cfg = classical_cfg(128);
        cfg.operator = OperatorSpec::DyadicLocal;
        let rec = run_sweep(&cfg).unwrap();
        // the dyadic weak (1,1) bound on the whole box
        assert!(rec.sup_ratio <= 1.0 + 1e-9, "sup = {}", rec.sup_ratio);
    }

    #[test]
    fn surrogate_kernel_operator_runs() {
        let mut cfg = classical_cfg(64);
        cfg.operator = OperatorSpec::SurrogateKernel {
            n0: 4.0,
            eps_cells: 1.0,
        };
        cfg.rho = RhoSpec::InverseDistance;
        cfg.u = FieldSpec::PowerAbs { exponent: -0.5 };
        cfg.v = FieldSpec::One;
        cfg.lattice.offset = true; // the singular weight must miss the origin
        cfg.refine_levels = 1;
        cfg.override_precheck = true;
        let rec = run_sweep(&cfg).unwrap();
        assert!(rec.sup_ratio.is_finite());
    }
}
