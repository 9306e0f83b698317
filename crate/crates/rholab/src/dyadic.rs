//! Shifted dyadic grids (the one-third trick), the weighted stopping-time
//! decomposition on a fixed cube, and the localized dyadic mixed weak-type
//! check.
//!
//! Grid `g` with shift vector `t` consists of the cells
//! `2^k ([0,1)^d + m + (-1)^k t)`, `m` an integer vector. The alternating
//! sign keeps consecutive levels nested (3t is an integer for
//! t in {0, 1/3, 2/3}), and the one-third offsets guarantee that every cube
//! has an enclosing cell of side at most 3 times its own in some grid.

use crate::error::{Error, Result};
use crate::lattice::{Cube, LatticeField, Point, WeightField};
use crate::numerics::pairwise_sum_by;
use crate::report::{dyadic_ladder, SweepRow};
use serde::Serialize;
use std::fmt::Write as _;

#[derive(Clone, Debug)]
pub struct ShiftedGrids {
    dim: usize,
    shifts: Vec<[f64; 3]>,
}

/// A cell of one shifted grid: side `2^level`, lower corner
/// `2^level (index + (-1)^level t)` per axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridCube {
    pub grid: usize,
    pub level: i32,
    pub index: [i64; 3],
}

impl ShiftedGrids {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim > 3 {
            return Err(Error::InvalidParameter(format!("grid dimension {dim}")));
        }
        let mut shifts = Vec::with_capacity(3usize.pow(dim as u32));
        for code in 0..3usize.pow(dim as u32) {
            let mut t = [0.0; 3];
            let mut c = code;
            for ta in t.iter_mut().take(dim) {
                *ta = (c % 3) as f64 / 3.0;
                c /= 3;
            }
            shifts.push(t);
        }
        Ok(ShiftedGrids { dim, shifts })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of grids, 3^d.
    pub fn count(&self) -> usize {
        self.shifts.len()
    }

    pub fn shift(&self, grid: usize) -> &[f64] {
        &self.shifts[grid][..self.dim]
    }

    #[inline]
    fn signed_shift(&self, grid: usize, level: i32, axis: usize) -> f64 {
        let s = if level.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        s * self.shifts[grid][axis]
    }

    /// The unique level-`level` cell of `grid` containing `p`
    /// (cells are half-open `[lo, lo + 2^level)`).
    pub fn cell_of(&self, grid: usize, level: i32, p: &Point) -> GridCube {
        let side = (level as f64).exp2();
        let mut index = [0i64; 3];
        for a in 0..self.dim {
            let s = self.signed_shift(grid, level, a);
            index[a] = (p.coords()[a] / side - s).floor() as i64;
        }
        GridCube { grid, level, index }
    }

    pub fn lower_corner(&self, gc: &GridCube) -> [f64; 3] {
        let side = (gc.level as f64).exp2();
        let mut lo = [0.0; 3];
        for a in 0..self.dim {
            lo[a] = side * (gc.index[a] as f64 + self.signed_shift(gc.grid, gc.level, a));
        }
        lo
    }

    pub fn geometry(&self, gc: &GridCube) -> Cube {
        let side = (gc.level as f64).exp2();
        let lo = self.lower_corner(gc);
        let center: Vec<f64> = (0..self.dim).map(|a| lo[a] + 0.5 * side).collect();
        Cube::new(
            Point::new(&center).expect("finite cell center"),
            (self.dim as f64).sqrt() * side / 2.0,
        )
        .expect("positive cell side")
    }

    /// Parent cell one level up (nested by the alternating-shift construction).
    pub fn parent(&self, gc: &GridCube) -> GridCube {
        let c = self.geometry(gc);
        self.cell_of(gc.grid, gc.level + 1, &c.center)
    }

    fn cell_contains_box(&self, gc: &GridCube, lo: &[f64], hi: &[f64], tol: f64) -> bool {
        let side = (gc.level as f64).exp2();
        let clo = self.lower_corner(gc);
        for a in 0..self.dim {
            if lo[a] < clo[a] - tol || hi[a] > clo[a] + side + tol {
                return false;
            }
        }
        true
    }

    /// Smallest cell of `grid` containing `target`, searching levels upward
    /// while the cell side stays at most `max_side`.
    pub fn smallest_enclosing_in_grid(
        &self,
        grid: usize,
        target: &Cube,
        max_side: f64,
    ) -> Option<GridCube> {
        let l = target.side();
        let lo = target.min_corner();
        let hi = target.max_corner();
        let tol = 1e-9 * l;
        let mut level = l.log2().ceil() as i32;
        while ((level - 1) as f64).exp2() >= l {
            level -= 1;
        }
        loop {
            let side = (level as f64).exp2();
            if side > max_side * (1.0 + 1e-12) {
                return None;
            }
            if side >= l * (1.0 - 1e-12) {
                // nudge the anchor inward so an exact boundary hit resolves
                let mut anchor = [0.0; 3];
                for a in 0..self.dim {
                    anchor[a] = lo.coords()[a] + tol;
                }
                let p = Point::new(&anchor[..self.dim]).ok()?;
                let gc = self.cell_of(grid, level, &p);
                if self.cell_contains_box(&gc, lo.coords(), hi.coords(), tol) {
                    return Some(gc);
                }
            }
            level += 1;
        }
    }

    /// Largest cell containing `p` with side at most `max_side`.
    pub fn largest_cell_at_point(&self, grid: usize, p: &Point, max_side: f64) -> GridCube {
        let mut level = max_side.log2().floor() as i32;
        while (level as f64).exp2() > max_side * (1.0 + 1e-12) {
            level -= 1;
        }
        self.cell_of(grid, level, p)
    }

    /// Okikiolu enclosure: some grid holds a dyadic cell `Q0` with
    /// `Q <= Q0` and `side(Q0) <= 3 side(Q)`. Returns (grid index, cell).
    pub fn enclosing(&self, q: &Cube) -> Result<(usize, Cube)> {
        let l = q.side();
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidParameter(format!("cube side {l}")));
        }
        // unique level with 2^j in [1.5 l, 3 l)
        let mut level = (1.5 * l).log2().ceil() as i32;
        while ((level - 1) as f64).exp2() >= 1.5 * l {
            level -= 1;
        }
        while (level as f64).exp2() < 1.5 * l * (1.0 - 1e-12) {
            level += 1;
        }
        let lo = q.min_corner();
        let hi = q.max_corner();
        let tol = 1e-9 * l;
        for g in 0..self.count() {
            let mut anchor = [0.0; 3];
            for a in 0..self.dim {
                anchor[a] = lo.coords()[a] + tol;
            }
            let p = Point::new(&anchor[..self.dim])?;
            let gc = self.cell_of(g, level, &p);
            if self.cell_contains_box(&gc, lo.coords(), hi.coords(), tol) {
                return Ok((g, self.geometry(&gc)));
            }
        }
        Err(Error::Internal(format!(
            "no shifted grid encloses cube centered {:?} with side {l} at level {level}",
            q.center.coords()
        )))
    }
}

/// One selected stopping cube of a weighted decomposition.
#[derive(Clone, Debug, Serialize)]
pub struct CzSelected {
    pub cube: Cube,
    pub depth: u32,
    pub weighted_avg: f64,
    /// The cube could not have been subdivided further (single lattice cell).
    pub resolution_limited: bool,
}

/// Stopping-time decomposition `f = g + sum h_i` on a fixed cube at level `t`
/// with respect to the measure `v dx`.
#[derive(Clone, Debug)]
pub struct CzDecomposition {
    pub root: Cube,
    pub level_t: f64,
    pub selected: Vec<CzSelected>,
    good: LatticeField,
    bad: LatticeField,
    /// Per lattice index: id of the selected cube owning the point, or -1.
    assignment: Vec<i64>,
    pub gamma_realized: f64,
    pub doubling_measured: f64,
    pub root_average: f64,
}

impl CzDecomposition {
    pub fn good(&self) -> &LatticeField {
        &self.good
    }

    /// Sum of all bad parts.
    pub fn bad_total(&self) -> &LatticeField {
        &self.bad
    }

    pub fn assignment(&self) -> &[i64] {
        &self.assignment
    }

    /// The bad part supported on selected cube `i`.
    pub fn bad_part(&self, i: usize) -> Result<LatticeField> {
        if i >= self.selected.len() {
            return Err(Error::InvalidParameter(format!("bad part index {i}")));
        }
        let samples = self
            .assignment
            .iter()
            .zip(self.bad.samples())
            .map(|(&a, &b)| if a == i as i64 { b } else { 0.0 })
            .collect();
        LatticeField::from_samples(self.good.lattice(), samples)
    }

    /// max over selected cubes of |integral of h_i v| relative to the
    /// integral of |f| v it cancels.
    pub fn mean_zero_defect(&self, fv_scale: &LatticeField, v: &WeightField) -> f64 {
        let lat = self.good.lattice();
        let mut worst = 0.0f64;
        for i in 0..self.selected.len() {
            let idx: Vec<usize> = (0..lat.len())
                .filter(|&k| self.assignment[k] == i as i64)
                .collect();
            let s = pairwise_sum_by(idx.len(), &|k| self.bad.get(idx[k]) * v.get(idx[k]));
            let n = pairwise_sum_by(idx.len(), &|k| {
                fv_scale.get(idx[k]).abs() * v.get(idx[k])
            });
            if n > 0.0 {
                worst = worst.max(s.abs() / n);
            } else {
                worst = worst.max(s.abs());
            }
        }
        worst
    }

    /// CSV rows: depth, center coords, radius, weighted average, flag.
    pub fn cube_csv(&self) -> String {
        let mut s = String::from("depth,center,radius,weighted_avg,resolution_limited\n");
        for c in &self.selected {
            let center = c
                .cube
                .center
                .coords()
                .iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(" ");
            let _ = writeln!(
                s,
                "{},{center},{},{},{}",
                c.depth, c.cube.radius, c.weighted_avg, c.resolution_limited
            );
        }
        s
    }
}

/// Weighted stopping time on the halving tree of `root`: descend dyadic
/// children, selecting a cube the first time its `v`-weighted average of `f`
/// exceeds `t`. Requires `f >= 0` and `t` above the root average.
pub fn cz_decompose(
    f: &LatticeField,
    root: &Cube,
    v: &WeightField,
    t: f64,
) -> Result<CzDecomposition> {
    f.check_same_lattice(v.field())?;
    if f.samples().iter().any(|&x| x < 0.0) {
        return Err(Error::InvalidParameter(
            "decomposition requires a nonnegative function".into(),
        ));
    }
    let lat = f.lattice().clone();
    let root_idx = lat.owned_indices(root);
    if root_idx.is_empty() {
        return Err(Error::CubeOutsideLattice("root owns no lattice points".into()));
    }
    let wavg = |idx: &[usize]| -> (f64, f64) {
        let num = pairwise_sum_by(idx.len(), &|k| f.get(idx[k]) * v.get(idx[k]));
        let den = pairwise_sum_by(idx.len(), &|k| v.get(idx[k]));
        (num / den, den)
    };
    let (root_average, root_vmass) = wavg(&root_idx);
    if !(t > root_average) {
        return Err(Error::LevelBelowAverage {
            t,
            avg: root_average,
        });
    }

    let mut selected: Vec<CzSelected> = Vec::new();
    let mut assignment = vec![-1i64; lat.len()];
    let mut doubling = 1.0f64;
    let h = lat.spacing();

    // Iterative stack: cubes with average <= t still to be subdivided.
    let mut stack: Vec<(Cube, u32, f64)> = vec![(*root, 0, root_vmass)];
    while let Some((cube, depth, vmass)) = stack.pop() {
        for child in cube.children() {
            let idx = lat.owned_indices(&child);
            if idx.is_empty() {
                continue;
            }
            let (avg, child_vmass) = wavg(&idx);
            doubling = doubling.max(vmass / child_vmass);
            let at_resolution = idx.len() == 1 || child.side() <= h * 1.000001;
            if avg > t {
                let id = selected.len() as i64;
                for &k in &idx {
                    assignment[k] = id;
                }
                selected.push(CzSelected {
                    cube: child,
                    depth: depth + 1,
                    weighted_avg: avg,
                    resolution_limited: at_resolution,
                });
            } else if !at_resolution {
                stack.push((child, depth + 1, child_vmass));
            }
        }
    }

    let mut good = f.samples().to_vec();
    let mut bad = vec![0.0; lat.len()];
    for (k, &a) in assignment.iter().enumerate() {
        if a >= 0 {
            let avg = selected[a as usize].weighted_avg;
            good[k] = avg;
            bad[k] = f.get(k) - avg;
        }
    }
    let gamma_realized = selected
        .iter()
        .map(|c| c.weighted_avg / t)
        .fold(1.0f64, f64::max);
    Ok(CzDecomposition {
        root: *root,
        level_t: t,
        selected,
        good: LatticeField::from_samples(&lat, good)?,
        bad: LatticeField::from_samples(&lat, bad)?,
        assignment,
        gamma_realized,
        doubling_measured: doubling,
        root_average,
    })
}

/// Signed weighted dyadic maximal over the halving tower of `root`:
/// `sup_Q |(1/w(Q)) integral_Qphi w|` over the tower cubes owning each point.
/// Unlike the maximal operator this keeps cancellation, which is what makes
/// mean-zero bad parts invisible off their supports.
fn signed_tower_sup(
    phi: &LatticeField,
    root: &Cube,
    w: Option<&WeightField>,
    out: &mut [f64],
) {
    let lat = phi.lattice();
    let idx = lat.owned_indices(root);
    if idx.is_empty() {
        return;
    }
    let avg = {
        let num = pairwise_sum_by(idx.len(), &|k| {
            phi.get(idx[k]) * w.map_or(1.0, |w| w.get(idx[k]))
        });
        let den = match w {
            None => idx.len() as f64,
            Some(w) => pairwise_sum_by(idx.len(), &|k| w.get(idx[k])),
        };
        (num / den).abs()
    };
    for &i in &idx {
        out[i] = out[i].max(avg);
    }
    if idx.len() > 1 && root.side() > lat.spacing() * 1.000001 {
        for child in root.children() {
            signed_tower_sup(phi, &child, w, out);
        }
    }
}

/// Empirical vanishing of the bad part away from the selection: decompose
/// `f` at level `t` with respect to the product measure `u v dx`, form
/// `h v`, and take the signed u-weighted dyadic maximal at every lattice
/// point of `root` outside the selected cubes. The mean-zero property makes
/// every tower average cancel, so the returned maximum is zero up to
/// rounding.
pub fn bad_part_maximal_off_selection(
    f: &LatticeField,
    root: &Cube,
    u: &WeightField,
    v: &WeightField,
    t: f64,
) -> Result<f64> {
    let lat = f.lattice().clone();
    let uv = WeightField::new(u.field().product(v.field())?)?;
    let dec = cz_decompose(f, root, &uv, t)?;
    let hv = dec.bad_total().product(v.field())?;
    let mut sup = vec![0.0f64; lat.len()];
    signed_tower_sup(&hv, root, Some(u), &mut sup);
    let mut worst = 0.0f64;
    for &i in &lat.owned_indices(root) {
        if dec.assignment()[i] < 0 {
            worst = worst.max(sup[i]);
        }
    }
    Ok(worst)
}

/// Result of the localized dyadic mixed weak-type sweep on a fixed cube.
#[derive(Clone, Debug, Serialize)]
pub struct LocalizedMixedRecord {
    pub rows: Vec<SweepRow>,
    pub sup_ratio: f64,
}

/// For each `t`, the uv-measure of `{x in R : M^D_R(fv)(x)/v(x) > t}`
/// against `(1/t) integral_R |f| u v`.
pub fn localized_mixed_check(
    f: &LatticeField,
    root: &Cube,
    u: &WeightField,
    v: &WeightField,
    t_ladder: Option<&[f64]>,
) -> Result<LocalizedMixedRecord> {
    f.check_same_lattice(u.field())?;
    f.check_same_lattice(v.field())?;
    let lat = f.lattice();
    let idx = lat.owned_indices(root);
    if idx.is_empty() {
        return Err(Error::CubeOutsideLattice("root owns no lattice points".into()));
    }
    let fv = f.product(v.field())?;
    let m = crate::maximal::dyadic_maximal(&fv, root, None, None)?;
    let cellvol = lat.cell_volume();
    let rhs = cellvol * pairwise_sum_by(idx.len(), &|k| f.get(idx[k]).abs() * u.get(idx[k]) * v.get(idx[k]));
    let gvals: Vec<f64> = idx
        .iter()
        .map(|&i| m.value_or(i, 0.0) / v.get(i))
        .collect();
    let max_g = gvals.iter().cloned().fold(0.0f64, f64::max);
    let ladder: Vec<f64> = match t_ladder {
        Some(l) => l.to_vec(),
        None => {
            let uv_mass =
                cellvol * pairwise_sum_by(idx.len(), &|k| u.get(idx[k]) * v.get(idx[k]));
            if rhs > 0.0 && max_g > 0.0 {
                dyadic_ladder(2.0 * rhs / uv_mass, 2.0 * max_g, 24)
            } else {
                vec![1.0]
            }
        }
    };
    let mut rows = Vec::with_capacity(ladder.len());
    for &t in &ladder {
        let terms: Vec<f64> = idx
            .iter()
            .enumerate()
            .filter(|(k, _)| gvals[*k] > t)
            .map(|(_, &i)| u.get(i) * v.get(i))
            .collect();
        let lhs = cellvol * crate::numerics::pairwise_sum(&terms);
        rows.push(SweepRow::new(t, lhs, rhs));
    }
    let sup_ratio = rows.iter().map(|r| r.ratio).fold(0.0f64, f64::max);
    Ok(LocalizedMixedRecord { rows, sup_ratio })
}
