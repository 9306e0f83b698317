//! Maximal operators adapted to a critical radius function: the penalized
//! Hardy-Littlewood operator, its minimal counterpart, localized and dyadic
//! variants, the subcritical/supercritical split, and the domination of a
//! localized maximal function by shifted-grid dyadic maximal functions.
//!
//! Suprema are always over a finite enumerated [`CubeFamily`]; including the
//! singleton-scale cube in the family makes `f <= Mf` hold at lattice
//! resolution.

use crate::dyadic::ShiftedGrids;
use crate::error::{Error, Result};
use crate::lattice::sums::CubeSums;
use crate::lattice::{Cube, CubeFamily, LatticeField, WeightField};
use crate::numerics::pairwise_sum_by;
use crate::rho::CriticalRadius;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;

/// Pointwise values of a maximal (or minimal) operator together with the
/// argmax cube per lattice point. Points outside the operator's domain carry
/// no witness.
#[derive(Clone, Debug)]
pub struct MaximalResult {
    lattice: crate::lattice::Lattice,
    values: Vec<f64>,
    witness: Vec<Option<u32>>,
    witness_pool: Vec<Cube>,
}

impl MaximalResult {
    pub fn lattice(&self) -> &crate::lattice::Lattice {
        &self.lattice
    }

    #[inline]
    pub fn value(&self, idx: usize) -> Option<f64> {
        self.witness[idx].map(|_| self.values[idx])
    }

    #[inline]
    pub fn value_or(&self, idx: usize, default: f64) -> f64 {
        if self.witness[idx].is_some() {
            self.values[idx]
        } else {
            default
        }
    }

    pub fn witness_cube(&self, idx: usize) -> Option<&Cube> {
        self.witness[idx].map(|w| &self.witness_pool[w as usize])
    }

    pub fn witness_index(&self, idx: usize) -> Option<u32> {
        self.witness[idx]
    }

    pub fn defined_everywhere(&self) -> bool {
        self.witness.iter().all(|w| w.is_some())
    }

    /// Values as a lattice field; errors if any point is undefined.
    pub fn field(&self) -> Result<LatticeField> {
        if !self.defined_everywhere() {
            return Err(Error::FamilyDoesNotCover(
                "maximal result undefined at some lattice points".into(),
            ));
        }
        LatticeField::from_samples(&self.lattice, self.values.clone())
    }

    /// CSV rows `point_index,cube_index` for the defined points.
    pub fn witness_csv(&self) -> String {
        let mut s = String::from("point_index,cube_index\n");
        for (i, w) in self.witness.iter().enumerate() {
            if let Some(w) = w {
                let _ = writeln!(s, "{i},{w}");
            }
        }
        s
    }
}

fn cube_averages(f: &LatticeField, family: &CubeFamily) -> Result<Vec<f64>> {
    family
        .cubes
        .par_iter()
        .map(|q| {
            let lat = f.lattice();
            let idx = lat.owned_indices(q);
            if idx.is_empty() {
                return Err(Error::CubeOutsideLattice(format!(
                    "family cube centered {:?} radius {} owns no lattice point",
                    q.center.coords(),
                    q.radius
                )));
            }
            let s = pairwise_sum_by(idx.len(), &|k| f.get(idx[k]).abs());
            Ok(s / idx.len() as f64)
        })
        .collect()
}

fn extremal_scan(
    f: &LatticeField,
    family: &CubeFamily,
    terms: &[f64],
    take_max: bool,
) -> (Vec<f64>, Vec<Option<u32>>) {
    let lat = f.lattice();
    let pairs: Vec<(f64, Option<u32>)> = (0..lat.len())
        .into_par_iter()
        .map(|i| {
            let p = lat.point(i);
            let mut best: Option<(f64, u32)> = None;
            for (k, q) in family.cubes.iter().enumerate() {
                if !q.contains(&p) {
                    continue;
                }
                let t = terms[k];
                let better = match best {
                    None => true,
                    Some((b, _)) => {
                        if take_max {
                            t > b
                        } else {
                            t < b
                        }
                    }
                };
                if better {
                    best = Some((t, k as u32));
                }
            }
            match best {
                None => (0.0, None),
                Some((v, w)) => (v, Some(w)),
            }
        })
        .collect();
    let values = pairs.iter().map(|(v, _)| *v).collect();
    let witness = pairs.iter().map(|(_, w)| *w).collect();
    (values, witness)
}

/// `M^{rho,sigma} f(x)`: maximum over family cubes containing `x` of
/// `(1 + r/rho(center))^{-sigma} avg_Q |f|`. With `sigma = 0` this is the
/// classical maximal operator over the family.
pub fn m_rho_sigma(
    f: &LatticeField,
    rho: &CriticalRadius,
    sigma: f64,
    family: &CubeFamily,
) -> Result<MaximalResult> {
    if !(sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!("sigma = {sigma}")));
    }
    if family.is_empty() {
        return Err(Error::EmptyFamily("maximal operator family".into()));
    }
    let avgs = cube_averages(f, family)?;
    let terms: Vec<f64> = family
        .cubes
        .iter()
        .zip(&avgs)
        .map(|(q, a)| {
            let factor = if sigma == 0.0 {
                1.0
            } else {
                (1.0 + q.radius / rho.value(&q.center)).powf(-sigma)
            };
            factor * a
        })
        .collect();
    let (values, witness) = extremal_scan(f, family, &terms, true);
    if witness.iter().any(|w| w.is_none()) {
        return Err(Error::FamilyDoesNotCover(
            "some lattice point lies in no family cube".into(),
        ));
    }
    Ok(MaximalResult {
        lattice: f.lattice().clone(),
        values,
        witness,
        witness_pool: family.cubes.clone(),
    })
}

/// Minimal operator: infimum over family cubes containing `x` of
/// `(1 + r/rho(center))^{theta} avg_Q |f|`.
pub fn minimal_m(
    f: &LatticeField,
    rho: &CriticalRadius,
    theta: f64,
    family: &CubeFamily,
) -> Result<MaximalResult> {
    if !(theta >= 0.0) {
        return Err(Error::InvalidParameter(format!("theta = {theta}")));
    }
    if family.is_empty() {
        return Err(Error::EmptyFamily("minimal operator family".into()));
    }
    let avgs = cube_averages(f, family)?;
    let terms: Vec<f64> = family
        .cubes
        .iter()
        .zip(&avgs)
        .map(|(q, a)| {
            let factor = if theta == 0.0 {
                1.0
            } else {
                (1.0 + q.radius / rho.value(&q.center)).powf(theta)
            };
            factor * a
        })
        .collect();
    let (values, witness) = extremal_scan(f, family, &terms, false);
    if witness.iter().any(|w| w.is_none()) {
        return Err(Error::FamilyDoesNotCover(
            "some lattice point lies in no family cube".into(),
        ));
    }
    Ok(MaximalResult {
        lattice: f.lattice().clone(),
        values,
        witness,
        witness_pool: family.cubes.clone(),
    })
}

/// Localized maximal operator `M_R`: supremum over family cubes contained in
/// `R` and containing `x`, defined at lattice points of `R` only.
pub fn local_maximal(f: &LatticeField, r: &Cube, family: &CubeFamily) -> Result<MaximalResult> {
    let restricted: Vec<Cube> = family
        .cubes
        .iter()
        .filter(|q| q.contained_in(r))
        .copied()
        .collect();
    if restricted.is_empty() {
        return Err(Error::EmptyFamily(format!(
            "no family cube is contained in R (center {:?}, radius {})",
            r.center.coords(),
            r.radius
        )));
    }
    let sub = CubeFamily::custom(restricted, "restricted to R")?;
    let avgs = cube_averages(f, &sub)?;
    let lat = f.lattice();
    let pairs: Vec<(f64, Option<u32>)> = (0..lat.len())
        .into_par_iter()
        .map(|i| {
            let p = lat.point(i);
            if !r.contains(&p) {
                return (0.0, None);
            }
            let mut best: Option<(f64, u32)> = None;
            for (k, q) in sub.cubes.iter().enumerate() {
                if !q.contains(&p) {
                    continue;
                }
                let t = avgs[k];
                if best.map_or(true, |(b, _)| t > b) {
                    best = Some((t, k as u32));
                }
            }
            match best {
                None => (0.0, None),
                Some((v, w)) => (v, Some(w)),
            }
        })
        .collect();
    Ok(MaximalResult {
        lattice: lat.clone(),
        values: pairs.iter().map(|(v, _)| *v).collect(),
        witness: pairs.iter().map(|(_, w)| *w).collect(),
        witness_pool: sub.cubes,
    })
}

/// Weighted dyadic maximal operator over the halving tree of `R`: at each
/// point of `R`, the maximum of `(1/w(Q)) integral_Q |f| w` over the tower of
/// dyadic subcubes owning the point, down to `depth` (or to lattice
/// resolution when `depth` is `None`).
pub fn dyadic_maximal(
    f: &LatticeField,
    r: &Cube,
    w: Option<&WeightField>,
    depth: Option<usize>,
) -> Result<MaximalResult> {
    if let Some(w) = w {
        f.check_same_lattice(w.field())?;
    }
    let lat = f.lattice().clone();
    if lat.owned_count(r) == 0 {
        return Err(Error::CubeOutsideLattice("dyadic root owns no lattice point".into()));
    }
    let mut values = vec![0.0; lat.len()];
    let mut witness: Vec<Option<u32>> = vec![None; lat.len()];
    let mut pool: Vec<Cube> = Vec::new();

    struct Walk<'a> {
        f: &'a LatticeField,
        w: Option<&'a WeightField>,
        lat: &'a crate::lattice::Lattice,
        depth_limit: Option<usize>,
        values: &'a mut Vec<f64>,
        witness: &'a mut Vec<Option<u32>>,
        pool: &'a mut Vec<Cube>,
    }

    impl Walk<'_> {
        fn node_avg(&self, idx: &[usize]) -> f64 {
            match self.w {
                None => {
                    pairwise_sum_by(idx.len(), &|k| self.f.get(idx[k]).abs()) / idx.len() as f64
                }
                Some(w) => {
                    let num = pairwise_sum_by(idx.len(), &|k| {
                        self.f.get(idx[k]).abs() * w.get(idx[k])
                    });
                    let den = pairwise_sum_by(idx.len(), &|k| w.get(idx[k]));
                    num / den
                }
            }
        }

        fn visit(&mut self, q: &Cube, depth: usize, best: f64, best_w: Option<u32>) {
            let idx = self.lat.owned_indices(q);
            if idx.is_empty() {
                return;
            }
            let avg = self.node_avg(&idx);
            let id = self.pool.len() as u32;
            self.pool.push(*q);
            let (best, best_w) = if best_w.is_none() || avg > best {
                (avg, Some(id))
            } else {
                (best, best_w)
            };
            let at_limit = self.depth_limit.map_or(false, |dl| depth >= dl);
            let at_resolution = idx.len() == 1 || q.side() <= self.lat.spacing() * 1.000001;
            if at_limit || at_resolution {
                for &i in &idx {
                    self.values[i] = best;
                    self.witness[i] = best_w;
                }
                return;
            }
            for child in q.children() {
                self.visit(&child, depth + 1, best, best_w);
            }
        }
    }

    let mut walk = Walk {
        f,
        w,
        lat: &lat,
        depth_limit: depth,
        values: &mut values,
        witness: &mut witness,
        pool: &mut pool,
    };
    walk.visit(r, 0, 0.0, None);
    Ok(MaximalResult {
        lattice: lat,
        values,
        witness,
        witness_pool: pool,
    })
}

/// The subcritical / supercritical split of the penalized maximal operator.
#[derive(Debug)]
pub struct GlobLocSplit {
    pub loc: MaximalResult,
    pub glob: MaximalResult,
    pub loc_empty: bool,
    pub glob_empty: bool,
    /// sup over lattice points of `max(loc, glob) / M^{rho,sigma}`.
    pub comparability: f64,
    /// sup over lattice points of `M^{rho,sigma} / (loc + glob)`; bounded by
    /// one up to float noise.
    pub upper_slack: f64,
}

/// Split the family at `r <= rho(center)`: the local part takes plain
/// averages over subcritical cubes, the global part weights supercritical
/// averages by `(rho(center)/r)^sigma`.
pub fn glob_loc_split(
    f: &LatticeField,
    rho: &CriticalRadius,
    sigma: f64,
    family: &CubeFamily,
) -> Result<GlobLocSplit> {
    let lat = f.lattice();
    let mut sub = Vec::new();
    let mut sup = Vec::new();
    for q in &family.cubes {
        if q.radius <= rho.value(&q.center) * (1.0 + 1e-9) {
            sub.push(*q);
        } else {
            sup.push(*q);
        }
    }
    let loc_empty = sub.is_empty();
    let glob_empty = sup.is_empty();
    let empty_result = || MaximalResult {
        lattice: lat.clone(),
        values: vec![0.0; lat.len()],
        witness: vec![None; lat.len()],
        witness_pool: Vec::new(),
    };
    let loc = if loc_empty {
        empty_result()
    } else {
        let fam = CubeFamily::custom(sub, "subcritical")?;
        let avgs = cube_averages(f, &fam)?;
        let (values, witness) = extremal_scan(f, &fam, &avgs, true);
        MaximalResult {
            lattice: lat.clone(),
            values,
            witness,
            witness_pool: fam.cubes,
        }
    };
    let glob = if glob_empty {
        empty_result()
    } else {
        let fam = CubeFamily::custom(sup, "supercritical")?;
        let avgs = cube_averages(f, &fam)?;
        let terms: Vec<f64> = fam
            .cubes
            .iter()
            .zip(&avgs)
            .map(|(q, a)| (rho.value(&q.center) / q.radius).powf(sigma) * a)
            .collect();
        let (values, witness) = extremal_scan(f, &fam, &terms, true);
        MaximalResult {
            lattice: lat.clone(),
            values,
            witness,
            witness_pool: fam.cubes,
        }
    };
    let m = m_rho_sigma(f, rho, sigma, family)?;
    let mut comparability = 0.0f64;
    let mut upper_slack = 0.0f64;
    for i in 0..lat.len() {
        let lv = loc.value_or(i, 0.0);
        let gv = glob.value_or(i, 0.0);
        let mv = m.values[i];
        if mv > 0.0 {
            comparability = comparability.max(lv.max(gv) / mv);
        }
        if lv + gv > 0.0 {
            upper_slack = upper_slack.max(mv / (lv + gv));
        } else if mv > 0.0 {
            upper_slack = f64::INFINITY;
        }
    }
    Ok(GlobLocSplit {
        loc,
        glob,
        loc_empty,
        glob_empty,
        comparability,
        upper_slack,
    })
}

/// Result of dominating `M_Q` by shifted-grid dyadic maximal functions.
#[derive(Clone, Debug, Serialize)]
pub struct DominationReport {
    pub cubes: Vec<Cube>,
    /// Whether the grid cube encloses the dilated target per grid.
    pub encloses_target: Vec<bool>,
    pub fallback: Vec<bool>,
    /// max over checked lattice points of `M_Q f - 3^d sum_i M^D_{Q_i}(f chi_Q)`.
    pub max_violation: f64,
    pub all_contained_in_48d: bool,
    pub checked_points: usize,
}

/// Construct one dyadic cube per shifted grid around `8 sqrt(d) Q`, all inside
/// `48 d Q`, and verify pointwise on `Q`'s lattice points that
/// `M_Q f <= 3^d sum_i M^D_{Q_i}(f chi_Q)`.
pub fn local_to_dyadic_domination(
    f: &LatticeField,
    q: &Cube,
    grids: &ShiftedGrids,
) -> Result<DominationReport> {
    let lat = f.lattice();
    let d = lat.dim();
    let big = q.dilate(48.0 * d as f64)?;
    {
        let lo = big.min_corner();
        let hi = big.max_corner();
        let blo = lat.low();
        let bhi = lat.high();
        let tol = 1e-9 * big.side();
        for a in 0..d {
            if lo.coords()[a] < blo[a] - tol || hi.coords()[a] > bhi[a] + tol {
                return Err(Error::InsufficientMargin(format!(
                    "48dQ with side {} exceeds the lattice box on axis {a}",
                    big.side()
                )));
            }
        }
    }

    let target = q.dilate(8.0 * (d as f64).sqrt())?;
    let budget_side = 24.0 * d as f64 * q.side();
    let mut grid_cells = Vec::with_capacity(grids.count());
    let mut cubes = Vec::with_capacity(grids.count());
    let mut encloses = Vec::with_capacity(grids.count());
    let mut fallback = Vec::with_capacity(grids.count());
    for g in 0..grids.count() {
        match grids.smallest_enclosing_in_grid(g, &target, budget_side) {
            Some(gc) => {
                cubes.push(grids.geometry(&gc));
                grid_cells.push(gc);
                encloses.push(true);
                fallback.push(false);
            }
            None => {
                let gc = grids.largest_cell_at_point(g, &q.center, budget_side);
                cubes.push(grids.geometry(&gc));
                grid_cells.push(gc);
                encloses.push(false);
                fallback.push(true);
            }
        }
    }
    let all_contained = cubes.iter().all(|c| c.contained_in(&big));

    // Left side: localized maximal over subcubes of Q centred at Q's own
    // lattice points.
    let radii = crate::lattice::maximal_ladder(lat, q.radius);
    let mut lhs_cubes = Vec::new();
    for &i in &lat.owned_indices(q) {
        for &r in &radii {
            let c = Cube::new(lat.point(i), r)?;
            if lat.owned_count(&c) > 0 {
                lhs_cubes.push(c);
            }
        }
    }
    let base = CubeFamily::custom(lhs_cubes, "subcubes of Q")?;
    let lhs = local_maximal(f, q, &base)?;

    // Right side: f chi_Q masked to Q's owned points, summed-area accelerated.
    let owned: std::collections::HashSet<usize> = lat.owned_indices(q).into_iter().collect();
    let masked: Vec<f64> = (0..lat.len())
        .map(|i| if owned.contains(&i) { f.get(i).abs() } else { 0.0 })
        .collect();
    let sums = CubeSums::from_samples(lat, &masked);

    let three_d = 3usize.pow(d as u32) as f64;
    let resolution_level = lat.spacing().log2().floor() as i32 - 1;
    let mut max_violation = f64::NEG_INFINITY;
    let mut checked = 0usize;
    for &i in &lat.owned_indices(q) {
        let Some(lv) = lhs.value(i) else { continue };
        checked += 1;
        let p = lat.point(i);
        let mut rhs = 0.0;
        for g in 0..grids.count() {
            let top_level = grid_cells[g].level;
            if grids.cell_of(g, top_level, &p) != grid_cells[g] {
                continue; // point lies outside this grid's cube
            }
            let mut best: f64 = 0.0;
            let mut level = top_level;
            while level >= resolution_level {
                let cell = grids.cell_of(g, level, &p);
                if let Some((s, count)) = sums.cube_sum(&grids.geometry(&cell)) {
                    if count > 0 {
                        best = best.max(s / count as f64);
                    }
                }
                level -= 1;
            }
            rhs += best;
        }
        max_violation = max_violation.max(lv - three_d * rhs);
    }
    Ok(DominationReport {
        cubes,
        encloses_target: encloses,
        fallback,
        max_violation,
        all_contained_in_48d: all_contained,
        checked_points: checked,
    })
}
