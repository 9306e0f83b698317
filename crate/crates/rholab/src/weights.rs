//! Empirical characteristic constants for the weight classes adapted to a
//! critical radius function, refinement-stability studies standing in for
//! class membership on a finite lattice, the relation suite between the
//! classes, and an iterative builder of weights with small adapted constant.
//!
//! Membership surrogate: the estimated constant is finite on every finite
//! lattice, so "w belongs to the class" is operationalized as the constant
//! staying within a growth factor across successive lattice refinements
//! (halving the spacing also extends the radius ladder). Negative tests use
//! a divergence detector with a larger configurable factor.

use crate::error::{Error, Result};
use crate::lattice::sums::CubeSums;
use crate::lattice::{maximal_ladder, Cube, CubeFamily, Lattice, LatticeField, Point, WeightField};
use crate::maximal::m_rho_sigma;
use crate::rho::CriticalRadius;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;
use std::sync::Arc;

pub type PointFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

pub fn point_fn<F: Fn(&Point) -> f64 + Send + Sync + 'static>(f: F) -> PointFn {
    Arc::new(f)
}

/// An estimated characteristic constant with its attaining cube.
#[derive(Clone, Debug, Serialize)]
pub struct ClassConstantEstimate {
    pub class: String,
    pub exponent: Option<f64>,
    pub theta: f64,
    pub value: f64,
    pub witness: Option<Cube>,
    /// Subset descriptor for the epsilon-condition.
    pub witness_detail: Option<String>,
}

fn penalty_bases(rho: &CriticalRadius, family: &CubeFamily) -> Vec<f64> {
    family
        .cubes
        .iter()
        .map(|q| 1.0 + q.radius / rho.value(&q.center))
        .collect()
}

fn fold_theta(raws: &[f64], penalties: &[f64], theta: f64) -> (f64, Option<usize>) {
    let mut best = 0.0f64;
    let mut witness = None;
    for (k, (&r, &p)) in raws.iter().zip(penalties).enumerate() {
        let v = if theta == 0.0 { r } else { r / p.powf(theta) };
        if v > best {
            best = v;
            witness = Some(k);
        }
    }
    (best, witness)
}

/// Per-cube raw A_p products `A^{1/p} B^{1/p'}` where `A`, `B` are the
/// u-weighted averages of `w` and `w^{1-p'}`.
fn ap_raws(
    w: &WeightField,
    u: Option<&WeightField>,
    p: f64,
    family: &CubeFamily,
) -> Result<Vec<f64>> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} must exceed 1")));
    }
    let lat = w.lattice().clone();
    let pp = p / (p - 1.0);
    let dual = w.field().map(|x| x.powf(1.0 - pp))?;
    let (wu, du, uu): (Vec<f64>, Vec<f64>, Vec<f64>) = match u {
        None => (
            w.field().samples().to_vec(),
            dual.samples().to_vec(),
            vec![1.0; lat.len()],
        ),
        Some(u) => (
            w.field()
                .samples()
                .iter()
                .zip(u.field().samples())
                .map(|(a, b)| a * b)
                .collect(),
            dual.samples()
                .iter()
                .zip(u.field().samples())
                .map(|(a, b)| a * b)
                .collect(),
            u.field().samples().to_vec(),
        ),
    };
    let t_wu = CubeSums::from_samples(&lat, &wu);
    let t_du = CubeSums::from_samples(&lat, &du);
    let t_u = CubeSums::from_samples(&lat, &uu);
    family
        .cubes
        .par_iter()
        .map(|q| {
            let (sw, _) = t_wu.cube_sum(q).ok_or_else(|| {
                Error::CubeOutsideLattice("family cube owns no lattice point".into())
            })?;
            let (sd, _) = t_du.cube_sum(q).unwrap();
            let (su, _) = t_u.cube_sum(q).unwrap();
            let a = sw / su;
            let b = sd / su;
            let v = a.powf(1.0 / p) * b.powf(1.0 - 1.0 / p);
            if !v.is_finite() {
                return Err(Error::NonFiniteSample(format!(
                    "A_p product on cube centered {:?}",
                    q.center.coords()
                )));
            }
            Ok(v)
        })
        .collect()
}

/// Per-cube raw A_1 ratios: u-weighted average of `w` over `inf_Q w`.
fn a1_raws(w: &WeightField, u: Option<&WeightField>, family: &CubeFamily) -> Result<Vec<f64>> {
    let lat = w.lattice().clone();
    let (wu, uu): (Vec<f64>, Vec<f64>) = match u {
        None => (w.field().samples().to_vec(), vec![1.0; lat.len()]),
        Some(u) => (
            w.field()
                .samples()
                .iter()
                .zip(u.field().samples())
                .map(|(a, b)| a * b)
                .collect(),
            u.field().samples().to_vec(),
        ),
    };
    let t_wu = CubeSums::from_samples(&lat, &wu);
    let t_u = CubeSums::from_samples(&lat, &uu);
    family
        .cubes
        .par_iter()
        .map(|q| {
            let idx = lat.owned_indices(q);
            if idx.is_empty() {
                return Err(Error::CubeOutsideLattice(
                    "family cube owns no lattice point".into(),
                ));
            }
            let (sw, _) = t_wu.cube_sum(q).unwrap();
            let (su, _) = t_u.cube_sum(q).unwrap();
            let inf = idx.iter().map(|&i| w.get(i)).fold(f64::INFINITY, f64::min);
            Ok((sw / su) / inf)
        })
        .collect()
}

/// Per-cube raw reverse-Holder ratios `(avg w^s)^{1/s} / avg w`
/// (`sup_Q w / avg w` for infinite s).
fn rh_raws(w: &WeightField, s: f64, family: &CubeFamily) -> Result<Vec<f64>> {
    if !(s > 1.0) {
        return Err(Error::InvalidParameter(format!("s = {s} must exceed 1")));
    }
    let lat = w.lattice().clone();
    let t_w = CubeSums::from_samples(&lat, w.field().samples());
    if s.is_finite() {
        let ws = w.field().map(|x| x.powf(s))?;
        let t_ws = CubeSums::from_samples(&lat, ws.samples());
        family
            .cubes
            .par_iter()
            .map(|q| {
                let (sw, n) = t_w.cube_sum(q).ok_or_else(|| {
                    Error::CubeOutsideLattice("family cube owns no lattice point".into())
                })?;
                let (sws, _) = t_ws.cube_sum(q).unwrap();
                let v = (sws / n as f64).powf(1.0 / s) / (sw / n as f64);
                if !v.is_finite() {
                    return Err(Error::NonFiniteSample(
                        "reverse-Holder power overflow".into(),
                    ));
                }
                Ok(v)
            })
            .collect()
    } else {
        family
            .cubes
            .par_iter()
            .map(|q| {
                let idx = lat.owned_indices(q);
                if idx.is_empty() {
                    return Err(Error::CubeOutsideLattice(
                        "family cube owns no lattice point".into(),
                    ));
                }
                let (sw, n) = t_w.cube_sum(q).unwrap();
                let sup = idx.iter().map(|&i| w.get(i)).fold(0.0f64, f64::max);
                Ok(sup / (sw / n as f64))
            })
            .collect()
    }
}

/// `sup_Q` of the A_p product divided by the penalty `(1 + r/rho)^theta`;
/// `u` defaults to Lebesgue measure.
pub fn ap_constant(
    w: &WeightField,
    u: Option<&WeightField>,
    p: f64,
    theta: f64,
    rho: &CriticalRadius,
    family: &CubeFamily,
) -> Result<ClassConstantEstimate> {
    let raws = ap_raws(w, u, p, family)?;
    let pen = penalty_bases(rho, family);
    let (value, wit) = fold_theta(&raws, &pen, theta);
    Ok(ClassConstantEstimate {
        class: if u.is_some() { "A_p(u)".into() } else { "A_p".into() },
        exponent: Some(p),
        theta,
        value,
        witness: wit.map(|k| family.cubes[k]),
        witness_detail: None,
    })
}

pub fn a1_constant(
    w: &WeightField,
    u: Option<&WeightField>,
    theta: f64,
    rho: &CriticalRadius,
    family: &CubeFamily,
) -> Result<ClassConstantEstimate> {
    let raws = a1_raws(w, u, family)?;
    let pen = penalty_bases(rho, family);
    let (value, wit) = fold_theta(&raws, &pen, theta);
    Ok(ClassConstantEstimate {
        class: if u.is_some() { "A_1(u)".into() } else { "A_1".into() },
        exponent: Some(1.0),
        theta,
        value,
        witness: wit.map(|k| family.cubes[k]),
        witness_detail: None,
    })
}

/// Reverse-Holder constant; pass `f64::INFINITY` for the sup form.
pub fn rh_constant(
    w: &WeightField,
    s: f64,
    theta: f64,
    rho: &CriticalRadius,
    family: &CubeFamily,
) -> Result<ClassConstantEstimate> {
    let raws = rh_raws(w, s, family)?;
    let pen = penalty_bases(rho, family);
    let (value, wit) = fold_theta(&raws, &pen, theta);
    Ok(ClassConstantEstimate {
        class: if s.is_finite() { "RH_s".into() } else { "RH_inf".into() },
        exponent: Some(s),
        theta,
        value,
        witness: wit.map(|k| family.cubes[k]),
        witness_detail: None,
    })
}

/// Subsets of a cube enumerated for the epsilon-condition.
#[derive(Clone, Copy, Debug)]
pub struct SubsetScheme {
    /// Dyadic descendants of the cube down to this depth.
    pub dyadic_depth: usize,
    /// Number of sublevel sets `{w <= quantile}` per cube.
    pub sublevels: usize,
}

impl Default for SubsetScheme {
    fn default() -> Self {
        SubsetScheme {
            dyadic_depth: 4,
            sublevels: 4,
        }
    }
}

/// The epsilon-condition constant:
/// `sup_{Q, E} [wu(E)/wu(Q)] / [(1+r/rho)^theta (u(E)/u(Q))^eps]`.
pub fn ainf_eps_check(
    w: &WeightField,
    u: Option<&WeightField>,
    theta: f64,
    eps: f64,
    rho: &CriticalRadius,
    family: &CubeFamily,
    scheme: &SubsetScheme,
) -> Result<ClassConstantEstimate> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps}")));
    }
    let lat = w.lattice().clone();
    let one;
    let u = match u {
        Some(u) => u,
        None => {
            one = WeightField::one(&lat)?;
            &one
        }
    };
    let wu: Vec<f64> = w
        .field()
        .samples()
        .iter()
        .zip(u.field().samples())
        .map(|(a, b)| a * b)
        .collect();
    let t_wu = CubeSums::from_samples(&lat, &wu);
    let t_u = CubeSums::from_samples(&lat, u.field().samples());
    let pen = penalty_bases(rho, family);

    let mut best = 0.0f64;
    let mut witness = None;
    let mut detail = None;
    for (k, q) in family.cubes.iter().enumerate() {
        let Some((wu_q, _)) = t_wu.cube_sum(q) else {
            continue;
        };
        let (u_q, _) = t_u.cube_sum(q).unwrap();
        let penalty = if theta == 0.0 { 1.0 } else { pen[k].powf(theta) };
        let mut consider = |wu_e: f64, u_e: f64, desc: &str| {
            if u_e <= 0.0 {
                return;
            }
            let v = (wu_e / wu_q) / (penalty * (u_e / u_q).powf(eps));
            if v > best {
                best = v;
                witness = Some(*q);
                detail = Some(desc.to_string());
            }
        };
        // dyadic sub-subsets
        let sub = CubeFamily::dyadic_of(q, scheme.dyadic_depth);
        for (j, e) in sub.cubes.iter().enumerate() {
            if let Some((wu_e, _)) = t_wu.cube_sum(e) {
                let (u_e, _) = t_u.cube_sum(e).unwrap();
                consider(wu_e, u_e, &format!("dyadic subcube {j}"));
            }
        }
        // sublevel sets of w within the cube
        if scheme.sublevels > 0 {
            let idx = lat.owned_indices(q);
            let mut vals: Vec<f64> = idx.iter().map(|&i| w.get(i)).collect();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for j in 1..=scheme.sublevels {
                let pos = (vals.len() * j) / (scheme.sublevels + 1);
                let tau = vals[pos.min(vals.len() - 1)];
                let mut wu_e = 0.0;
                let mut u_e = 0.0;
                for &i in &idx {
                    if w.get(i) <= tau {
                        wu_e += wu[i];
                        u_e += u.get(i);
                    }
                }
                consider(wu_e, u_e, &format!("sublevel w <= {tau}"));
            }
        }
    }
    Ok(ClassConstantEstimate {
        class: "A_inf_eps".into(),
        exponent: Some(eps),
        theta,
        value: best,
        witness,
        witness_detail: detail,
    })
}

/// Parameters of the refinement-stability membership surrogate.
#[derive(Clone, Debug)]
pub struct StabilityParams {
    pub theta_ladder: Vec<f64>,
    /// Number of lattices (each halves the spacing of the previous one).
    pub levels: usize,
    /// Constants must grow by less than this factor per refinement.
    pub growth_limit: f64,
    /// A constant growing by at least this factor across the whole study is
    /// reported as diverging.
    pub divergence_factor: f64,
}

impl Default for StabilityParams {
    fn default() -> Self {
        StabilityParams {
            theta_ladder: vec![0.0, 1.0, 2.0, 4.0, 8.0],
            levels: 3,
            growth_limit: 1.5,
            divergence_factor: 10.0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipReport {
    pub label: String,
    /// Constants per refinement level at the chosen theta.
    pub constants: Vec<f64>,
    /// Smallest theta from the ladder that is refinement-stable.
    pub theta: Option<f64>,
    pub stable: bool,
    /// Growth of the best-theta constant across the study.
    pub growth: f64,
    pub diverging: bool,
}

#[derive(Clone, Copy, Debug)]
pub enum ClassSpec {
    Ap(f64),
    A1,
    RHs(f64),
    RHInf,
}

impl ClassSpec {
    fn label(&self) -> String {
        match self {
            ClassSpec::Ap(p) => format!("A_{p}"),
            ClassSpec::A1 => "A_1".into(),
            ClassSpec::RHs(s) => format!("RH_{s}"),
            ClassSpec::RHInf => "RH_inf".into(),
        }
    }
}

/// A weight given as an evaluator so it can be resampled on refined lattices.
#[derive(Clone)]
pub struct WeightExpr {
    pub label: String,
    pub eval: PointFn,
}

impl WeightExpr {
    pub fn new<F: Fn(&Point) -> f64 + Send + Sync + 'static>(label: &str, f: F) -> Self {
        WeightExpr {
            label: label.into(),
            eval: point_fn(f),
        }
    }

    pub fn one() -> Self {
        Self::new("1", |_| 1.0)
    }

    /// Pointwise power.
    pub fn pow(&self, a: f64) -> Self {
        let inner = self.eval.clone();
        WeightExpr {
            label: format!("({})^{a}", self.label),
            eval: point_fn(move |p| inner(p).powf(a)),
        }
    }

    /// Pointwise product.
    pub fn times(&self, other: &WeightExpr) -> Self {
        let a = self.eval.clone();
        let b = other.eval.clone();
        WeightExpr {
            label: format!("{} * {}", self.label, other.label),
            eval: point_fn(move |p| a(p) * b(p)),
        }
    }
}

/// The box, base resolution and family ladder on which memberships are
/// studied.
///
/// Two refinement directions: halving the spacing on a fixed box (default;
/// probes local integrability) or growing the box at fixed spacing (probes
/// large-scale growth -- the direction that rejects weights whose constants
/// blow up on large cubes, invisible on a fixed box).
#[derive(Clone, Debug)]
pub struct StudyDomain {
    pub low: Vec<f64>,
    pub high: Vec<f64>,
    /// Points per axis at level zero (midpoint lattice).
    pub n0: usize,
    /// Grow the box by 1.5x per level instead of halving the spacing.
    pub grow_box: bool,
}

impl StudyDomain {
    pub fn fixed_box(low: Vec<f64>, high: Vec<f64>, n0: usize) -> Self {
        StudyDomain {
            low,
            high,
            n0,
            grow_box: false,
        }
    }

    pub fn growing_box(low: Vec<f64>, high: Vec<f64>, n0: usize) -> Self {
        StudyDomain {
            low,
            high,
            n0,
            grow_box: true,
        }
    }

    pub fn lattice(&self, level: usize) -> Result<Lattice> {
        if self.grow_box {
            let factor = 1.5f64.powi(level as i32);
            let low: Vec<f64> = self.low.iter().map(|&c| c * factor).collect();
            let high: Vec<f64> = self.high.iter().map(|&c| c * factor).collect();
            let n = (self.n0 as f64 * factor).round() as usize;
            Lattice::midpoint_box(&low, &high, n)
        } else {
            Lattice::midpoint_box(&self.low, &self.high, self.n0 << level)
        }
    }

    pub fn family(&self, lattice: &Lattice) -> Result<CubeFamily> {
        let width = lattice.high()[0] - lattice.low()[0];
        CubeFamily::exhaustive_lattice(lattice, &maximal_ladder(lattice, width))
    }
}

/// Refinement study of one class constant. The same per-cube raw values are
/// folded for every theta in the ladder, so the search over theta is cheap.
pub fn class_membership(
    domain: &StudyDomain,
    rho: &CriticalRadius,
    w: &WeightExpr,
    base: Option<&WeightExpr>,
    class: ClassSpec,
    params: &StabilityParams,
) -> Result<MembershipReport> {
    let mut per_theta: Vec<Vec<f64>> = vec![Vec::new(); params.theta_ladder.len()];
    for level in 0..params.levels {
        let lat = domain.lattice(level)?;
        let wf = WeightField::from_fn(&lat, |p| (w.eval)(p))?;
        let uf = match base {
            None => None,
            Some(u) => Some(WeightField::from_fn(&lat, |p| (u.eval)(p))?),
        };
        let family = domain.family(&lat)?;
        let raws = match class {
            ClassSpec::Ap(p) => ap_raws(&wf, uf.as_ref(), p, &family)?,
            ClassSpec::A1 => a1_raws(&wf, uf.as_ref(), &family)?,
            ClassSpec::RHs(s) => rh_raws(&wf, s, &family)?,
            ClassSpec::RHInf => rh_raws(&wf, f64::INFINITY, &family)?,
        };
        let pen = penalty_bases(rho, &family);
        for (ti, &theta) in params.theta_ladder.iter().enumerate() {
            let (v, _) = fold_theta(&raws, &pen, theta);
            per_theta[ti].push(v);
        }
    }
    let stable_at = |cs: &[f64]| -> bool {
        cs.windows(2).all(|w| w[1] < w[0] * params.growth_limit)
    };
    let mut chosen: Option<(f64, Vec<f64>)> = None;
    for (ti, &theta) in params.theta_ladder.iter().enumerate() {
        if stable_at(&per_theta[ti]) {
            chosen = Some((theta, per_theta[ti].clone()));
            break;
        }
    }
    let last = per_theta.last().unwrap().clone();
    let growth_of = |cs: &[f64]| cs.last().unwrap() / cs.first().unwrap().max(f64::MIN_POSITIVE);
    let (stable, theta, constants) = match chosen {
        Some((theta, cs)) => (true, Some(theta), cs),
        None => (false, None, last),
    };
    let growth = growth_of(&constants);
    Ok(MembershipReport {
        label: format!(
            "{} in {}{}",
            w.label,
            class.label(),
            base.map(|b| format!("({})", b.label)).unwrap_or_default()
        ),
        constants,
        theta,
        stable,
        growth,
        diverging: growth >= params.divergence_factor,
    })
}

/// Membership in the union-over-p class: tested at p in {2, 4, 8}, best
/// (first stable) reported.
pub fn ainf_membership(
    domain: &StudyDomain,
    rho: &CriticalRadius,
    w: &WeightExpr,
    base: Option<&WeightExpr>,
    params: &StabilityParams,
) -> Result<MembershipReport> {
    let mut last: Option<MembershipReport> = None;
    for p in [2.0, 4.0, 8.0] {
        let rep = class_membership(domain, rho, w, base, ClassSpec::Ap(p), params)?;
        if rep.stable {
            return Ok(MembershipReport {
                label: format!(
                    "{} in A_inf{} (via p = {p})",
                    w.label,
                    base.map(|b| format!("({})", b.label)).unwrap_or_default()
                ),
                ..rep
            });
        }
        last = Some(rep);
    }
    let mut rep = last.unwrap();
    rep.label = format!(
        "{} in A_inf{} (no stable p in ladder)",
        w.label,
        base.map(|b| format!("({})", b.label)).unwrap_or_default()
    );
    Ok(rep)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
    PrecondFail,
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationCheck {
    pub id: String,
    pub description: String,
    pub lhs_constant: f64,
    pub rhs_constant: f64,
    pub verdict: Verdict,
    pub note: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationReport {
    pub checks: Vec<RelationCheck>,
}

impl RelationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.verdict == Verdict::Pass)
    }
}

#[derive(Clone, Debug)]
pub struct RelationParams {
    pub p: f64,
    pub s: f64,
    /// Small exponent bump for the self-improvement check.
    pub eps_improve: f64,
    /// Base-measure power for the base-change check, in (0,1).
    pub alpha: f64,
    /// Exponent for the base of the engineered-membership check; must
    /// exceed the conjugate s'.
    pub beta: f64,
    /// Epsilon entering the engineered exponents.
    pub eps12: f64,
    pub stability: StabilityParams,
}

impl Default for RelationParams {
    fn default() -> Self {
        RelationParams {
            p: 2.0,
            s: 2.0,
            eps_improve: 0.1,
            alpha: 0.5,
            beta: 3.0,
            eps12: 0.25,
            stability: StabilityParams::default(),
        }
    }
}

/// The weights and domain on which the relation suite runs.
#[derive(Clone)]
pub struct RelationBench {
    pub rho: CriticalRadius,
    pub domain: StudyDomain,
    /// A weight of Muckenhoupt-1 type with a point singularity.
    pub u_sing: WeightExpr,
    /// Its positive-power companion (conjugate exemplar).
    pub w_root: WeightExpr,
    /// Slowly growing weight in the adapted (non-classical) class.
    pub u_slow: WeightExpr,
    /// Second slowly growing weight.
    pub v_slow: WeightExpr,
    pub params: RelationParams,
}

impl RelationBench {
    /// The standard one-dimensional bench: `rho = 1/(1+|x|)` on `[-10, 10]`,
    /// weights `|x|^{-1/2}`, `|x|^{1/2}`, `(1+|x|)^{0.3}`, `(1+|x|)^{0.2}`
    /// on an offset (midpoint) lattice.
    pub fn standard(n0: usize) -> Self {
        RelationBench {
            rho: CriticalRadius::inverse_distance(),
            domain: StudyDomain::fixed_box(vec![-10.0], vec![10.0], n0),
            u_sing: WeightExpr::new("|x|^-1/2", |p| p.norm().powf(-0.5)),
            w_root: WeightExpr::new("|x|^1/2", |p| p.norm().powf(0.5)),
            u_slow: WeightExpr::new("(1+|x|)^0.3", |p| (1.0 + p.norm()).powf(0.3)),
            v_slow: WeightExpr::new("(1+|x|)^0.2", |p| (1.0 + p.norm()).powf(0.2)),
            params: RelationParams::default(),
        }
    }
}

/// Direct per-cube two-sided constants for the product-of-averages and
/// reverse-Holder-product relations: `sup_Q lhs(Q) / (penalty^theta rhs(Q))`
/// studied across refinements.
fn product_relation_membership(
    domain: &StudyDomain,
    rho: &CriticalRadius,
    label: &str,
    u: &WeightExpr,
    v: &WeightExpr,
    p: f64,
    raw_integrals: bool,
    params: &StabilityParams,
) -> Result<MembershipReport> {
    let pp = p / (p - 1.0);
    let mut per_theta: Vec<Vec<f64>> = vec![Vec::new(); params.theta_ladder.len()];
    for level in 0..params.levels {
        let lat = domain.lattice(level)?;
        let uf = LatticeField::from_fn(&lat, |q| (u.eval)(q))?;
        let vf = LatticeField::from_fn(&lat, |q| (v.eval)(q))?;
        let family = domain.family(&lat)?;
        // raw_integrals: (int u^p)^{1/p} (int v^{p'})^{1/p'} <= C int uv
        // averages:      (avg u)^{1/p} (avg v)^{1/p'} <= C avg(u^{1/p} v^{1/p'})
        let (a_field, b_field, c_field) = if raw_integrals {
            (uf.map(|x| x.powf(p))?, vf.map(|x| x.powf(pp))?, uf.product(&vf)?)
        } else {
            (
                uf.clone(),
                vf.clone(),
                uf.map(|x| x.powf(1.0 / p))?
                    .product(&vf.map(|x| x.powf(1.0 / pp))?)?,
            )
        };
        let ta = CubeSums::from_samples(&lat, a_field.samples());
        let tb = CubeSums::from_samples(&lat, b_field.samples());
        let tc = CubeSums::from_samples(&lat, c_field.samples());
        let raws: Vec<f64> = family
            .cubes
            .iter()
            .map(|q| {
                let (sa, n) = ta.cube_sum(q).unwrap();
                let (sb, _) = tb.cube_sum(q).unwrap();
                let (sc, _) = tc.cube_sum(q).unwrap();
                if raw_integrals {
                    let h = lat.cell_volume();
                    (sa * h).powf(1.0 / p) * (sb * h).powf(1.0 / pp) / (sc * h)
                } else {
                    let n = n as f64;
                    (sa / n).powf(1.0 / p) * (sb / n).powf(1.0 / pp) / (sc / n)
                }
            })
            .collect();
        let pen = penalty_bases(rho, &family);
        for (ti, &theta) in params.theta_ladder.iter().enumerate() {
            let (v, _) = fold_theta(&raws, &pen, theta);
            per_theta[ti].push(v);
        }
    }
    let stable_at =
        |cs: &[f64]| -> bool { cs.windows(2).all(|w| w[1] < w[0] * params.growth_limit) };
    for (ti, &theta) in params.theta_ladder.iter().enumerate() {
        if stable_at(&per_theta[ti]) {
            let cs = per_theta[ti].clone();
            let growth = cs.last().unwrap() / cs.first().unwrap();
            return Ok(MembershipReport {
                label: label.into(),
                constants: cs,
                theta: Some(theta),
                stable: true,
                growth,
                diverging: false,
            });
        }
    }
    let cs = per_theta.last().unwrap().clone();
    let growth = cs.last().unwrap() / cs.first().unwrap();
    Ok(MembershipReport {
        label: label.into(),
        constants: cs.clone(),
        theta: None,
        stable: false,
        growth,
        diverging: growth >= params.divergence_factor,
    })
}

/// The fundamental-relation constant `sup_Q [uv(Q)/v(Q)] / (penalty^theta inf_Q u)`.
fn fundamental_membership(
    domain: &StudyDomain,
    rho: &CriticalRadius,
    u: &WeightExpr,
    v: &WeightExpr,
    params: &StabilityParams,
) -> Result<MembershipReport> {
    let mut per_theta: Vec<Vec<f64>> = vec![Vec::new(); params.theta_ladder.len()];
    for level in 0..params.levels {
        let lat = domain.lattice(level)?;
        let uf = WeightField::from_fn(&lat, |q| (u.eval)(q))?;
        let vf = WeightField::from_fn(&lat, |q| (v.eval)(q))?;
        let family = domain.family(&lat)?;
        let uv: Vec<f64> = uf
            .field()
            .samples()
            .iter()
            .zip(vf.field().samples())
            .map(|(a, b)| a * b)
            .collect();
        let t_uv = CubeSums::from_samples(&lat, &uv);
        let t_v = CubeSums::from_samples(&lat, vf.field().samples());
        let raws: Vec<f64> = family
            .cubes
            .iter()
            .map(|q| {
                let (suv, _) = t_uv.cube_sum(q).unwrap();
                let (sv, _) = t_v.cube_sum(q).unwrap();
                let inf = lat
                    .owned_indices(q)
                    .iter()
                    .map(|&i| uf.get(i))
                    .fold(f64::INFINITY, f64::min);
                (suv / sv) / inf
            })
            .collect();
        let pen = penalty_bases(rho, &family);
        for (ti, &theta) in params.theta_ladder.iter().enumerate() {
            let (val, _) = fold_theta(&raws, &pen, theta);
            per_theta[ti].push(val);
        }
    }
    for (ti, &theta) in params.theta_ladder.iter().enumerate() {
        let cs = &per_theta[ti];
        if cs.windows(2).all(|w| w[1] < w[0] * params.growth_limit) {
            return Ok(MembershipReport {
                label: format!("{} in A_1({})", u.label, v.label),
                constants: cs.clone(),
                theta: Some(theta),
                stable: true,
                growth: cs.last().unwrap() / cs.first().unwrap(),
                diverging: false,
            });
        }
    }
    let cs = per_theta.last().unwrap().clone();
    Ok(MembershipReport {
        label: format!("{} in A_1({})", u.label, v.label),
        constants: cs.clone(),
        theta: None,
        stable: false,
        growth: cs.last().unwrap() / cs.first().unwrap(),
        diverging: false,
    })
}

/// Run the full relation suite on a bench. Each sub-check reports the two
/// empirical constants it compares and a pass / fail / precondition-fail
/// verdict.
pub fn relation_suite(bench: &RelationBench) -> Result<RelationReport> {
    let d = &bench.domain;
    let rho = &bench.rho;
    let prm = &bench.params;
    let st = &prm.stability;
    let p = prm.p;
    let pp = p / (p - 1.0);
    let s = prm.s;
    let sp = s / (s - 1.0);

    let mut cache: HashMap<String, MembershipReport> = HashMap::new();
    let mut mem = |w: &WeightExpr,
                   base: Option<&WeightExpr>,
                   class: ClassSpec|
     -> Result<MembershipReport> {
        let key = format!(
            "{}|{}|{:?}",
            w.label,
            base.map(|b| b.label.clone()).unwrap_or_default(),
            class
        );
        if let Some(r) = cache.get(&key) {
            return Ok(r.clone());
        }
        let r = class_membership(d, rho, w, base, class, st)?;
        cache.insert(key, r.clone());
        Ok(r)
    };

    let mut checks: Vec<RelationCheck> = Vec::new();
    let mut push = |id: &str,
                    description: &str,
                    lhs: f64,
                    rhs: f64,
                    verdict: Verdict,
                    note: String| {
        checks.push(RelationCheck {
            id: id.into(),
            description: description.into(),
            lhs_constant: lhs,
            rhs_constant: rhs,
            verdict,
            note,
        });
    };

    // r1: conjugation is a per-cube identity between the A_p product of w
    // and the A_{p'} product of w^{1-p'}.
    {
        let w = &bench.w_root;
        let dual = w.pow(1.0 - pp);
        let mw = mem(w, None, ClassSpec::Ap(p))?;
        let md = mem(&dual, None, ClassSpec::Ap(pp))?;
        let lat = d.lattice(0)?;
        let fam = d.family(&lat)?;
        let wf = WeightField::from_fn(&lat, |q| (w.eval)(q))?;
        let df = WeightField::from_fn(&lat, |q| (dual.eval)(q))?;
        let cl = ap_constant(&wf, None, p, 0.0, rho, &fam)?.value;
        let cr = ap_constant(&df, None, pp, 0.0, rho, &fam)?.value;
        let identity_ok = (cl - cr).abs() <= 1e-9 * cl.max(1.0);
        let verdict = if mw.stable && md.stable && identity_ok {
            Verdict::Pass
        } else if !mw.stable {
            Verdict::PrecondFail
        } else {
            Verdict::Fail
        };
        push(
            "r1",
            "conjugate exponent: w in A_p iff w^{1-p'} in A_{p'}",
            cl,
            cr,
            verdict,
            format!("identity |lhs-rhs| <= 1e-9: {identity_ok}; both memberships stable"),
        );
    }

    // r2: two A_1 weights combine into an A_p weight, with the per-cube
    // Holder bound giving an exact constant inequality.
    {
        let u = &bench.u_sing;
        let v = &bench.u_slow;
        let mu = mem(u, None, ClassSpec::A1)?;
        let mv = mem(v, None, ClassSpec::A1)?;
        if !(mu.stable && mv.stable) {
            push(
                "r2",
                "u, v in A_1 implies u v^{1-p} in A_p",
                f64::NAN,
                f64::NAN,
                Verdict::PrecondFail,
                "A_1 precondition not stable".into(),
            );
        } else {
            let tu = mu.theta.unwrap();
            let tv = mv.theta.unwrap();
            let combined = u.times(&v.pow(1.0 - p));
            let mc = mem(&combined, None, ClassSpec::Ap(p))?;
            // exact per-cube bound at theta* = theta_u/p + theta_v/p'
            let theta_star = tu / p + tv / pp;
            let lat = d.lattice(0)?;
            let fam = d.family(&lat)?;
            let cf = WeightField::from_fn(&lat, |q| (combined.eval)(q))?;
            let uf = WeightField::from_fn(&lat, |q| (u.eval)(q))?;
            let vf = WeightField::from_fn(&lat, |q| (v.eval)(q))?;
            let lhs = ap_constant(&cf, None, p, theta_star, rho, &fam)?.value;
            let bound = a1_constant(&uf, None, tu, rho, &fam)?
                .value
                .powf(1.0 / p)
                * a1_constant(&vf, None, tv, rho, &fam)?.value.powf(1.0 / pp);
            let ok = mc.stable && lhs <= bound * (1.0 + 1e-9);
            push(
                "r2",
                "u, v in A_1 implies u v^{1-p} in A_p",
                lhs,
                bound,
                if ok { Verdict::Pass } else { Verdict::Fail },
                format!("stable: {}; bound [u]^(1/p) [v]^(1/p') holds: {}", mc.stable, lhs <= bound * (1.0 + 1e-9)),
            );
        }
    }

    // r3: w in A_p and RH_s iff w^s in A_q with q = s(p-1)+1, with the
    // exact exponent bookkeeping checked on the same family.
    {
        let q = s * (p - 1.0) + 1.0;
        let arith_ok = (q - (s * (p - 1.0) + 1.0)).abs() == 0.0;
        let w = &bench.w_root;
        let mwp = mem(w, None, ClassSpec::Ap(p))?;
        let mws = mem(w, None, ClassSpec::RHs(s))?;
        let ws = w.pow(s);
        let mq = mem(&ws, None, ClassSpec::Ap(q))?;
        if !(mwp.stable && mws.stable) {
            push(
                "r3",
                "w in A_p and RH_s iff w^s in A_q, q = s(p-1)+1",
                f64::NAN,
                f64::NAN,
                Verdict::PrecondFail,
                "A_p or RH_s precondition unstable".into(),
            );
        } else {
            let t1 = mws.theta.unwrap();
            let t2 = mwp.theta.unwrap();
            let lat = d.lattice(0)?;
            let fam = d.family(&lat)?;
            let wf = WeightField::from_fn(&lat, |x| (w.eval)(x))?;
            let wsf = WeightField::from_fn(&lat, |x| (ws.eval)(x))?;
            let rh_c = rh_constant(&wf, s, t1, rho, &fam)?.value;
            let ap_c = ap_constant(&wf, None, p, t2, rho, &fam)?.value;
            let theta0 = (s * t1 + p * s * t2) / q;
            let forward = ap_constant(&wsf, None, q, theta0, rho, &fam)?.value;
            let fwd_bound = rh_c.powf(s / q) * ap_c.powf(p * s / q);
            // converse at an arbitrary theta from the q-side
            let tq = mq.theta.unwrap_or(0.0);
            let cq = ap_constant(&wsf, None, q, tq, rho, &fam)?.value;
            let conv_ap = ap_constant(&wf, None, p, tq * q / (s * p), rho, &fam)?.value;
            let conv_rh = rh_constant(&wf, s, tq * q / s, rho, &fam)?.value;
            let ok = mq.stable
                && forward <= fwd_bound * (1.0 + 1e-9)
                && conv_ap <= cq.powf(q / (s * p)) * (1.0 + 1e-9)
                && conv_rh <= cq.powf(q / s) * (1.0 + 1e-9)
                && arith_ok;
            push(
                "r3",
                "w in A_p and RH_s iff w^s in A_q, q = s(p-1)+1",
                forward,
                fwd_bound,
                if ok { Verdict::Pass } else { Verdict::Fail },
                format!(
                    "q = {q}; forward bound ok: {}; converse A_p: {} <= {}; converse RH_s: {} <= {}",
                    forward <= fwd_bound * (1.0 + 1e-9),
                    conv_ap,
                    cq.powf(q / (s * p)),
                    conv_rh,
                    cq.powf(q / s)
                ),
            );
        }
    }

    // r4: small positive powers stay in A_1.
    {
        let u = &bench.u_sing;
        let mu = mem(u, None, ClassSpec::A1)?;
        let bumped = u.pow(1.0 + prm.eps_improve);
        let mb = mem(&bumped, None, ClassSpec::A1)?;
        let verdict = if !mu.stable {
            Verdict::PrecondFail
        } else if mb.stable {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        push(
            "r4",
            "u in A_1 implies u^{1+eps} in A_1 for small eps",
            *mu.constants.last().unwrap(),
            *mb.constants.last().unwrap(),
            verdict,
            format!("eps = {}", prm.eps_improve),
        );
    }

    // r5: negative powers of an A_1 weight: w^{1-p} in A_p and RH_inf,
    // and w^{-r} in RH_inf.
    {
        let w = &bench.u_sing;
        let mw = mem(w, None, ClassSpec::A1)?;
        let neg = w.pow(1.0 - p);
        let m_ap = mem(&neg, None, ClassSpec::Ap(p))?;
        let m_rh = mem(&neg, None, ClassSpec::RHInf)?;
        let m_r = mem(&w.pow(-0.7), None, ClassSpec::RHInf)?;
        let verdict = if !mw.stable {
            Verdict::PrecondFail
        } else if m_ap.stable && m_rh.stable && m_r.stable {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        push(
            "r5",
            "w in A_1 implies w^{1-p} in A_p and RH_inf; w^{-r} in RH_inf",
            *m_ap.constants.last().unwrap(),
            *m_rh.constants.last().unwrap(),
            verdict,
            format!("w^-0.7 RH_inf stable: {}", m_r.stable),
        );
    }

    // r6: product of averages controlled by the average of the product.
    {
        let u = &bench.u_sing;
        let v = &bench.w_root;
        let mu = mem(u, None, ClassSpec::Ap(p))?;
        let mv = mem(v, None, ClassSpec::Ap(pp))?;
        if !(mu.stable && mv.stable) {
            push(
                "r6",
                "avg(u)^{1/p} avg(v)^{1/p'} <= C penalty^theta avg(u^{1/p} v^{1/p'})",
                f64::NAN,
                f64::NAN,
                Verdict::PrecondFail,
                "A_p / A_{p'} preconditions unstable".into(),
            );
        } else {
            let rep = product_relation_membership(
                d,
                rho,
                "product of averages",
                u,
                v,
                p,
                false,
                st,
            )?;
            push(
                "r6",
                "avg(u)^{1/p} avg(v)^{1/p'} <= C penalty^theta avg(u^{1/p} v^{1/p'})",
                *rep.constants.last().unwrap(),
                rep.theta.unwrap_or(f64::NAN),
                if rep.stable { Verdict::Pass } else { Verdict::Fail },
                format!("constant stable at theta = {:?}", rep.theta),
            );
        }
    }

    // r7: RH_s membership matches the s-th power being in the union class.
    {
        let w = &bench.w_root;
        let mrh = mem(w, None, ClassSpec::RHs(s))?;
        let mainf = ainf_membership(d, rho, &w.pow(s), None, st)?;
        let agree = mrh.stable == mainf.stable;
        push(
            "r7",
            "w in RH_s iff w^s in A_inf",
            *mrh.constants.last().unwrap(),
            *mainf.constants.last().unwrap(),
            if agree { Verdict::Pass } else { Verdict::Fail },
            format!("RH side stable: {}, union side stable: {}", mrh.stable, mainf.stable),
        );
    }

    // r8: reverse-Holder product bound, plus closure of RH_inf under
    // products.
    {
        let u = &bench.u_slow;
        let v = &bench.v_slow;
        let mu = mem(u, None, ClassSpec::RHs(p))?;
        let mv = mem(v, None, ClassSpec::RHs(pp))?;
        if !(mu.stable && mv.stable) {
            push(
                "r8",
                "u in RH_p, v in RH_{p'}: integral product bound; RH_inf closed under products",
                f64::NAN,
                f64::NAN,
                Verdict::PrecondFail,
                "RH preconditions unstable".into(),
            );
        } else {
            let rep = product_relation_membership(
                d,
                rho,
                "reverse-Holder product",
                u,
                v,
                p,
                true,
                st,
            )?;
            let mui = mem(u, None, ClassSpec::RHInf)?;
            let mvi = mem(v, None, ClassSpec::RHInf)?;
            let muv = mem(&u.times(v), None, ClassSpec::RHInf)?;
            let ok = rep.stable && (!(mui.stable && mvi.stable) || muv.stable);
            push(
                "r8",
                "u in RH_p, v in RH_{p'}: integral product bound; RH_inf closed under products",
                *rep.constants.last().unwrap(),
                *muv.constants.last().unwrap(),
                if ok { Verdict::Pass } else { Verdict::Fail },
                format!("product bound stable: {}; uv in RH_inf stable: {}", rep.stable, muv.stable),
            );
        }
    }

    // r9: base-measure membership composes with an A_1 weight.
    {
        let u = &bench.u_sing;
        let v = &bench.v_slow;
        let mu = mem(u, None, ClassSpec::A1)?;
        let mv = mem(v, Some(u), ClassSpec::Ap(p))?;
        if !(mu.stable && mv.stable) {
            push(
                "r9",
                "u in A_1, v in A_p(u) implies uv in A_p",
                f64::NAN,
                f64::NAN,
                Verdict::PrecondFail,
                format!("u stable: {}, v in A_p(u) stable: {}", mu.stable, mv.stable),
            );
        } else {
            let muv = mem(&u.times(v), None, ClassSpec::Ap(p))?;
            push(
                "r9",
                "u in A_1, v in A_p(u) implies uv in A_p",
                *mv.constants.last().unwrap(),
                *muv.constants.last().unwrap(),
                if muv.stable { Verdict::Pass } else { Verdict::Fail },
                format!("uv in A_p stable: {}", muv.stable),
            );
        }
    }

    // r10: the fundamental relation: u in A_1 and uv in A_inf force
    // uv(Q)/v(Q) <= C penalty^theta inf_Q u.
    {
        let u = &bench.u_sing;
        let v = &bench.w_root; // uv = 1, trivially in the union class
        let mu = mem(u, None, ClassSpec::A1)?;
        let muv = ainf_membership(d, rho, &u.times(v), None, st)?;
        if !(mu.stable && muv.stable) {
            push(
                "r10",
                "u in A_1, uv in A_inf implies u in A_1(v)",
                f64::NAN,
                f64::NAN,
                Verdict::PrecondFail,
                format!("u stable: {}, uv stable: {}", mu.stable, muv.stable),
            );
        } else {
            let rep = fundamental_membership(d, rho, u, v, st)?;
            push(
                "r10",
                "u in A_1, uv in A_inf implies u in A_1(v)",
                *rep.constants.last().unwrap(),
                rep.theta.unwrap_or(f64::NAN),
                if rep.stable { Verdict::Pass } else { Verdict::Fail },
                format!("fundamental constant stable at theta = {:?}", rep.theta),
            );
        }
    }

    // r11: shrinking the base-measure power preserves membership.
    {
        let u = &bench.u_sing;
        let v = &bench.v_slow;
        let mv = mem(v, Some(u), ClassSpec::Ap(p))?;
        if !mv.stable {
            push(
                "r11",
                "v in A_p(u) implies v in A_p(u^alpha), 0 < alpha < 1",
                f64::NAN,
                f64::NAN,
                Verdict::PrecondFail,
                "v in A_p(u) unstable".into(),
            );
        } else {
            let ua = u.pow(prm.alpha);
            let mva = mem(v, Some(&ua), ClassSpec::Ap(p))?;
            push(
                "r11",
                "v in A_p(u) implies v in A_p(u^alpha), 0 < alpha < 1",
                *mv.constants.last().unwrap(),
                *mva.constants.last().unwrap(),
                if mva.stable { Verdict::Pass } else { Verdict::Fail },
                format!("alpha = {}", prm.alpha),
            );
        }
    }

    // r12: the engineered exponents: q' = (s'(1+eps)-1)/eps, alpha = s'(1+eps),
    // and the membership u^{1-q'} v in A_{q'/s'}.
    {
        let eps = prm.eps12;
        let qp = (sp * (1.0 + eps) - 1.0) / eps;
        let id1 = ((qp - sp) - (sp - 1.0) / eps).abs();
        let alpha = sp * (qp - 1.0) / (qp - sp);
        let id2 = (alpha - sp * (1.0 + eps)).abs();
        let qps = qp / sp;
        let id3 = (qps - (1.0 + 1.0 / (s * eps))).abs();
        let u12 = bench.u_sing.pow(1.0 / sp); // u with u^{s'} = u_sing
        let msp = mem(&u12.pow(sp), None, ClassSpec::A1)?;
        let base = u12.pow(prm.beta);
        let mv = ainf_membership(d, rho, &bench.v_slow, Some(&base), st)?;
        if !(msp.stable && mv.stable && prm.beta > sp) {
            push(
                "r12",
                "engineered exponents give u^{1-q'} v in A_{q'/s'}",
                f64::NAN,
                f64::NAN,
                Verdict::PrecondFail,
                format!(
                    "u^s' in A_1 stable: {}; v in A_inf(u^beta) stable: {}; beta > s': {}",
                    msp.stable,
                    mv.stable,
                    prm.beta > sp
                ),
            );
        } else {
            let engineered = u12.pow(1.0 - qp).times(&bench.v_slow);
            let me = mem(&engineered, None, ClassSpec::Ap(qps))?;
            let exact = id1 == 0.0 && id2 == 0.0 && id3 == 0.0;
            push(
                "r12",
                "engineered exponents give u^{1-q'} v in A_{q'/s'}",
                qp,
                alpha,
                if me.stable && exact { Verdict::Pass } else { Verdict::Fail },
                format!(
                    "q' = {qp}, alpha = {alpha}, q'/s' = {qps}; identities exact: {exact}; membership stable: {}",
                    me.stable
                ),
            );
        }
    }

    Ok(RelationReport { checks })
}

/// Iterative small-constant weight builder: `R(w) = sum_k M^k w / (2 L)^k`.
///
/// `L` is the measured ratio of successive iterates,
/// `max_{k >= 1} sup_x M^{k+1} w / M^k w`: on a finite lattice the iterates
/// approach a fixed profile of the maximal operator, so the tail ratio is
/// close to one and the built weight has adapted one-weight constant close
/// to two. The raw ratio `M w / w` is excluded -- it only reflects how
/// irregular the input was.
pub fn rubio_de_francia_a1(
    w: &WeightField,
    rho: &CriticalRadius,
    theta: f64,
    iterations: usize,
    family: &CubeFamily,
) -> Result<WeightField> {
    if iterations < 2 {
        return Err(Error::InvalidParameter(
            "need at least two iterations to measure the tail ratio".into(),
        ));
    }
    let lat = w.lattice().clone();
    let mut iterates: Vec<LatticeField> = vec![w.field().clone()];
    for _ in 0..iterations {
        let next = m_rho_sigma(iterates.last().unwrap(), rho, theta, family)?.field()?;
        iterates.push(next);
    }
    let step_ratio = |k: usize| {
        (0..lat.len())
            .map(|i| iterates[k + 1].get(i) / iterates[k].get(i))
            .fold(0.0f64, f64::max)
    };
    // ratios must settle: a growing tail means the series cannot converge
    let mid = step_ratio(iterates.len() / 2);
    let last = step_ratio(iterates.len() - 2);
    if !last.is_finite() || last > mid * 2.0 + 1.0 || last > 1e3 {
        return Err(Error::DivergentIteration(format!(
            "iterate ratios grow: mid {mid}, last {last}"
        )));
    }
    let lambda = last.max(1.0);
    let denom = 2.0 * lambda;
    let mut acc = vec![0.0f64; lat.len()];
    let mut scale = 1.0;
    for g in &iterates {
        for i in 0..lat.len() {
            acc[i] += scale * g.get(i);
        }
        scale /= denom;
    }
    WeightField::new(LatticeField::from_samples(&lat, acc)?)
}
