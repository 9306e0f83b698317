//! Discrete geometry and quadrature substrate: cubes, uniform lattices,
//! sampled fields, weighted averages and measures.
//!
//! Conventions used throughout the crate:
//!
//! * A cube is identified by its center and its *radius* `r = sqrt(d) l / 2`
//!   where `l` is the side length, so `l = 2 r / sqrt(d)`.
//! * Quadrature over a cube is the midpoint rule over the lattice points the
//!   cube *owns*. Ownership is half-open per axis, `(c - l/2, c + l/2]`:
//!   a point sitting on a shared face belongs to the face-sharing cube whose
//!   center is lexicographically smallest. This makes dyadic children an
//!   exact partition of the parent's owned points.
//! * Membership tests for maximal operators (`Q` containing `x`) use the
//!   closed cube with a small relative tolerance.

pub mod io;
pub mod sums;

use crate::error::{Error, Result};
use crate::numerics::{pairwise_sum, pairwise_sum_by};
use serde::{Deserialize, Serialize};

pub const MAX_DIM: usize = 3;

/// Relative geometric tolerance used in containment tests.
const GEOM_TOL: f64 = 1e-9;

/// A point in R^d, 1 <= d <= 3. Unused coordinates are zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    dim: u8,
    c: [f64; MAX_DIM],
}

impl Point {
    pub fn new(coords: &[f64]) -> Result<Self> {
        let d = coords.len();
        if d == 0 || d > MAX_DIM {
            return Err(Error::InvalidParameter(format!(
                "point dimension must be 1..={MAX_DIM}, got {d}"
            )));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteSample(format!("point coords {coords:?}")));
        }
        let mut c = [0.0; MAX_DIM];
        c[..d].copy_from_slice(coords);
        Ok(Point { dim: d as u8, c })
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[f64] {
        &self.c[..self.dim as usize]
    }

    /// Euclidean distance.
    pub fn dist(&self, other: &Point) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim() {
            let d = self.c[i] - other.c[i];
            s += d * d;
        }
        s.sqrt()
    }

    pub fn norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim() {
            s += self.c[i] * self.c[i];
        }
        s.sqrt()
    }
}

/// Axis-parallel cube; `radius` follows the `r = sqrt(d) l / 2` convention.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub center: Point,
    pub radius: f64,
}

impl Cube {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cube radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Cube { center, radius })
    }

    /// Cube from an axis-parallel box `[lo, hi]^d` (equal extents per axis
    /// are not required of callers; the side is taken per axis from `lo`/`hi`
    /// only when they agree -- otherwise this is a programming error).
    pub fn from_corners(lo: &[f64], hi: &[f64]) -> Result<Self> {
        let d = lo.len();
        let side = hi[0] - lo[0];
        for i in 0..d {
            if ((hi[i] - lo[i]) - side).abs() > GEOM_TOL * side.abs() {
                return Err(Error::InvalidParameter(
                    "from_corners requires equal extents per axis".into(),
                ));
            }
        }
        let center: Vec<f64> = (0..d).map(|i| 0.5 * (lo[i] + hi[i])).collect();
        Cube::new(Point::new(&center)?, (d as f64).sqrt() * side / 2.0)
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    /// Side length `l = 2 r / sqrt(d)`.
    pub fn side(&self) -> f64 {
        2.0 * self.radius / (self.dim() as f64).sqrt()
    }

    pub fn min_corner(&self) -> Point {
        let h = 0.5 * self.side();
        let mut c = self.center;
        for i in 0..self.dim() {
            c.c[i] -= h;
        }
        c
    }

    pub fn max_corner(&self) -> Point {
        let h = 0.5 * self.side();
        let mut c = self.center;
        for i in 0..self.dim() {
            c.c[i] += h;
        }
        c
    }

    /// Same center, radius scaled by `lambda`.
    pub fn dilate(&self, lambda: f64) -> Result<Cube> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dilation factor must be positive, got {lambda}"
            )));
        }
        Cube::new(self.center, lambda * self.radius)
    }

    /// Closed membership with a small relative slack; used for "Q contains x"
    /// in maximal operators and coverings.
    pub fn contains(&self, p: &Point) -> bool {
        let half = 0.5 * self.side();
        let tol = GEOM_TOL * self.side().max(1e-300);
        for i in 0..self.dim() {
            if (p.c[i] - self.center.c[i]).abs() > half + tol {
                return false;
            }
        }
        true
    }

    /// Whether `self` is geometrically contained in `other` (closed, slack).
    pub fn contained_in(&self, other: &Cube) -> bool {
        let a = self.min_corner();
        let b = self.max_corner();
        let lo = other.min_corner();
        let hi = other.max_corner();
        let tol = GEOM_TOL * other.side();
        for i in 0..self.dim() {
            if a.c[i] < lo.c[i] - tol || b.c[i] > hi.c[i] + tol {
                return false;
            }
        }
        true
    }

    /// The 2^d congruent half-side children tiling this cube.
    pub fn children(&self) -> Vec<Cube> {
        let d = self.dim();
        let q = self.side() / 4.0;
        let mut out = Vec::with_capacity(1 << d);
        for mask in 0..(1usize << d) {
            let mut c = self.center;
            for i in 0..d {
                c.c[i] += if mask & (1 << i) != 0 { q } else { -q };
            }
            out.push(Cube {
                center: c,
                radius: 0.5 * self.radius,
            });
        }
        out
    }
}

/// Uniform lattice over an axis-parallel box. Points are
/// `low + i * h` per axis, row-major indexing, trailing axes of size one for
/// d < 3 so all loops can be written dimension-agnostically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    dim: u8,
    low: [f64; MAX_DIM],
    n: [usize; MAX_DIM],
    h: f64,
}

impl Lattice {
    /// Lattice including both endpoints: n_i = round((high - low)/h) + 1.
    pub fn closed_box(low: &[f64], high: &[f64], h: f64) -> Result<Self> {
        let d = low.len();
        if d == 0 || d > MAX_DIM || high.len() != d {
            return Err(Error::InvalidParameter("bad box dimensions".into()));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidParameter(format!("spacing h = {h}")));
        }
        let mut n = [1usize; MAX_DIM];
        let mut lo = [0.0; MAX_DIM];
        for i in 0..d {
            if !(high[i] > low[i]) {
                return Err(Error::InvalidParameter("box must have positive extent".into()));
            }
            n[i] = ((high[i] - low[i]) / h).round() as usize + 1;
            lo[i] = low[i];
        }
        Ok(Lattice {
            dim: d as u8,
            low: lo,
            n,
            h,
        })
    }

    /// Midpoint lattice: n points per axis at `low + (i + 1/2) h` with
    /// `h = (high - low)/n`. Never samples the box endpoints or (for even n
    /// on a symmetric box) the center -- the offset convention for weights
    /// with a point singularity.
    pub fn midpoint_box(low: &[f64], high: &[f64], n_per_axis: usize) -> Result<Self> {
        let d = low.len();
        if d == 0 || d > MAX_DIM || high.len() != d {
            return Err(Error::InvalidParameter("bad box dimensions".into()));
        }
        if n_per_axis == 0 {
            return Err(Error::InvalidParameter("n_per_axis must be positive".into()));
        }
        let width = high[0] - low[0];
        for i in 0..d {
            if ((high[i] - low[i]) - width).abs() > GEOM_TOL * width {
                return Err(Error::InvalidParameter(
                    "midpoint_box requires equal extents per axis".into(),
                ));
            }
        }
        let h = width / n_per_axis as f64;
        let mut n = [1usize; MAX_DIM];
        let mut lo = [0.0; MAX_DIM];
        for i in 0..d {
            n[i] = n_per_axis;
            lo[i] = low[i] + 0.5 * h;
        }
        Ok(Lattice {
            dim: d as u8,
            low: lo,
            n,
            h,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn counts(&self) -> &[usize] {
        &self.n[..self.dim()]
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn low(&self) -> &[f64] {
        &self.low[..self.dim()]
    }

    pub fn high(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.low[i] + (self.n[i] - 1) as f64 * self.h)
            .collect()
    }

    /// Cell volume h^d.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim() as i32)
    }

    /// The cube hull of the sampled box (side = extent per axis); requires a
    /// square box.
    pub fn bounding_cube(&self) -> Result<Cube> {
        let lo: Vec<f64> = self.low().to_vec();
        let hi = self.high();
        Cube::from_corners(&lo, &hi)
    }

    #[inline]
    pub fn multi_index(&self, idx: usize) -> [usize; MAX_DIM] {
        let i2 = idx % self.n[2];
        let rest = idx / self.n[2];
        let i1 = rest % self.n[1];
        let i0 = rest / self.n[1];
        [i0, i1, i2]
    }

    #[inline]
    pub fn flat_index(&self, mi: [usize; MAX_DIM]) -> usize {
        (mi[0] * self.n[1] + mi[1]) * self.n[2] + mi[2]
    }

    #[inline]
    pub fn point(&self, idx: usize) -> Point {
        let mi = self.multi_index(idx);
        let mut c = [0.0; MAX_DIM];
        for a in 0..self.dim() {
            c[a] = self.low[a] + mi[a] as f64 * self.h;
        }
        Point { dim: self.dim, c }
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    /// Half-open index range per axis for the points the cube owns
    /// (`coordinate in (lo, hi]`). Returns `None` if empty. Axes beyond the
    /// lattice dimension return the full `[0, 1)` range.
    pub fn owned_ranges(&self, q: &Cube) -> Option<[(usize, usize); MAX_DIM]> {
        let half = 0.5 * q.side();
        let mut out = [(0usize, 1usize); MAX_DIM];
        for a in 0..self.dim() {
            let lo = q.center.c[a] - half;
            let hi = q.center.c[a] + half;
            // indices i with low + i h in (lo, hi]
            let a_lo = (lo - self.low[a]) / self.h;
            let a_hi = (hi - self.low[a]) / self.h;
            let i_lo = (a_lo + GEOM_TOL).ceil().max(0.0) as isize;
            let mut i_lo = i_lo as usize;
            // ceil returns a_lo itself when integral: ownership is strict
            // on the lower face, so bump exact hits.
            if (i_lo as f64 - a_lo).abs() <= GEOM_TOL {
                i_lo += 1;
            }
            let i_hi = (a_hi + GEOM_TOL).floor() as isize;
            if i_hi < i_lo as isize {
                return None;
            }
            let i_hi = (i_hi as usize).min(self.n[a] - 1);
            if i_lo > i_hi {
                return None;
            }
            out[a] = (i_lo, i_hi + 1);
        }
        Some(out)
    }

    /// Number of lattice points owned by the cube.
    pub fn owned_count(&self, q: &Cube) -> usize {
        match self.owned_ranges(q) {
            None => 0,
            Some(r) => r.iter().map(|(a, b)| b - a).product(),
        }
    }

    /// Flat indices owned by the cube, in row-major order.
    pub fn owned_indices(&self, q: &Cube) -> Vec<usize> {
        let Some(r) = self.owned_ranges(q) else {
            return Vec::new();
        };
        let mut out = Vec::with_capacity(r.iter().map(|(a, b)| b - a).product());
        for i0 in r[0].0..r[0].1 {
            for i1 in r[1].0..r[1].1 {
                for i2 in r[2].0..r[2].1 {
                    out.push(self.flat_index([i0, i1, i2]));
                }
            }
        }
        out
    }
}

/// A function sampled on a lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeField {
    lattice: Lattice,
    samples: Vec<f64>,
}

impl LatticeField {
    pub fn from_fn<F: Fn(&Point) -> f64>(lattice: &Lattice, f: F) -> Result<Self> {
        let samples: Vec<f64> = (0..lattice.len()).map(|i| f(&lattice.point(i))).collect();
        Self::from_samples(lattice, samples)
    }

    pub fn from_samples(lattice: &Lattice, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != lattice.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} samples, got {}",
                lattice.len(),
                samples.len()
            )));
        }
        if let Some(bad) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteSample(format!(
                "sample {bad} = {} at {:?}",
                samples[bad],
                lattice.point(bad).coords()
            )));
        }
        Ok(LatticeField {
            lattice: lattice.clone(),
            samples,
        })
    }

    pub fn constant(lattice: &Lattice, c: f64) -> Result<Self> {
        Self::from_samples(lattice, vec![c; lattice.len()])
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    #[inline]
    pub fn get(&self, idx: usize) -> f64 {
        self.samples[idx]
    }

    /// Pointwise map producing a new field; errors if the image is non-finite.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<LatticeField> {
        LatticeField::from_samples(&self.lattice, self.samples.iter().map(|&x| f(x)).collect())
    }

    /// Pointwise product with another field on the same lattice.
    pub fn product(&self, other: &LatticeField) -> Result<LatticeField> {
        self.check_same_lattice(other)?;
        LatticeField::from_samples(
            &self.lattice,
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a * b)
                .collect(),
        )
    }

    pub fn check_same_lattice(&self, other: &LatticeField) -> Result<()> {
        if self.lattice != other.lattice {
            return Err(Error::InvalidParameter("lattice mismatch".into()));
        }
        Ok(())
    }
}

/// A strictly positive sampled weight.
#[derive(Clone, Debug)]
pub struct WeightField(LatticeField);

impl WeightField {
    pub fn new(field: LatticeField) -> Result<Self> {
        if let Some(bad) = field.samples.iter().position(|&x| x <= 0.0) {
            return Err(Error::NonPositiveWeight(format!(
                "sample {bad} = {} at {:?}",
                field.samples[bad],
                field.lattice.point(bad).coords()
            )));
        }
        Ok(WeightField(field))
    }

    pub fn from_fn<F: Fn(&Point) -> f64>(lattice: &Lattice, f: F) -> Result<Self> {
        WeightField::new(LatticeField::from_fn(lattice, f)?)
    }

    pub fn one(lattice: &Lattice) -> Result<Self> {
        WeightField::new(LatticeField::constant(lattice, 1.0)?)
    }

    pub fn field(&self) -> &LatticeField {
        &self.0
    }

    #[inline]
    pub fn get(&self, idx: usize) -> f64 {
        self.0.samples[idx]
    }

    pub fn lattice(&self) -> &Lattice {
        self.0.lattice()
    }
}

/// Weighted average of `f` over the lattice points owned by `Q`:
/// `sum f w h^d / sum w h^d` (plain average when `w` is absent).
pub fn average(f: &LatticeField, q: &Cube, w: Option<&WeightField>) -> Result<f64> {
    if let Some(w) = w {
        f.check_same_lattice(w.field())?;
    }
    let lat = f.lattice();
    let idx = lat.owned_indices(q);
    if idx.is_empty() {
        return Err(Error::CubeOutsideLattice(format!(
            "cube centered {:?} radius {} owns no lattice points",
            q.center.coords(),
            q.radius
        )));
    }
    match w {
        None => {
            let s = pairwise_sum_by(idx.len(), &|k| f.get(idx[k]));
            Ok(s / idx.len() as f64)
        }
        Some(w) => {
            let num = pairwise_sum_by(idx.len(), &|k| f.get(idx[k]) * w.get(idx[k]));
            let den = pairwise_sum_by(idx.len(), &|k| w.get(idx[k]));
            Ok(num / den)
        }
    }
}

/// `h^d * sum_{E(x)} w(x)` over lattice points satisfying the predicate.
pub fn measure<P: Fn(&Point) -> bool>(w: &WeightField, pred: P) -> f64 {
    let lat = w.lattice();
    let terms: Vec<f64> = (0..lat.len())
        .filter(|&i| pred(&lat.point(i)))
        .map(|i| w.get(i))
        .collect();
    lat.cell_volume() * pairwise_sum(&terms)
}

/// Measure of a set given by a per-index mask.
pub fn measure_mask(w: &WeightField, mask: &[bool]) -> f64 {
    let lat = w.lattice();
    let terms: Vec<f64> = (0..lat.len()).filter(|&i| mask[i]).map(|i| w.get(i)).collect();
    lat.cell_volume() * pairwise_sum(&terms)
}

/// Total `h^d sum w` over the whole lattice.
pub fn total_mass(w: &WeightField) -> f64 {
    w.lattice().cell_volume() * pairwise_sum(w.field().samples())
}

/// How a finite cube family was enumerated.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum FamilyDescriptor {
    /// Centers on every lattice point, radii from an explicit ladder.
    ExhaustiveLattice { radii: Vec<f64> },
    /// All dyadic subcubes of a root down to `depth`.
    DyadicOf { root: Cube, depth: usize },
    /// Subset of another family with `r <= rho(center)`.
    Subcritical { base: String },
    Custom { label: String },
}

/// Finite, explicitly enumerated cube family. All suprema and infima in the
/// crate are taken over such families.
#[derive(Clone, Debug)]
pub struct CubeFamily {
    pub cubes: Vec<Cube>,
    pub descriptor: FamilyDescriptor,
}

impl CubeFamily {
    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    /// Every lattice point as a center, crossed with the given radius ladder;
    /// cubes owning no lattice point are dropped. Deterministic order:
    /// radii ascending (outer), center index ascending (inner).
    pub fn exhaustive_lattice(lattice: &Lattice, radii: &[f64]) -> Result<CubeFamily> {
        if radii.is_empty() {
            return Err(Error::EmptyFamily("empty radius ladder".into()));
        }
        let mut radii = radii.to_vec();
        radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut cubes = Vec::new();
        for &r in &radii {
            for i in 0..lattice.len() {
                let q = Cube::new(lattice.point(i), r)?;
                if lattice.owned_count(&q) > 0 {
                    cubes.push(q);
                }
            }
        }
        if cubes.is_empty() {
            return Err(Error::EmptyFamily("no cube owns a lattice point".into()));
        }
        Ok(CubeFamily {
            cubes,
            descriptor: FamilyDescriptor::ExhaustiveLattice { radii },
        })
    }

    /// All dyadic subcubes of `root` down to the given depth (breadth-first:
    /// depth 0 first).
    pub fn dyadic_of(root: &Cube, depth: usize) -> CubeFamily {
        let mut cubes = vec![*root];
        let mut level = vec![*root];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(level.len() * (1 << root.dim()));
            for q in &level {
                next.extend(q.children());
            }
            cubes.extend(next.iter().copied());
            level = next;
        }
        CubeFamily {
            cubes,
            descriptor: FamilyDescriptor::DyadicOf {
                root: *root,
                depth,
            },
        }
    }

    /// Keep the subcritical cubes `r <= rho(center)`.
    pub fn subcritical<R: Fn(&Point) -> f64>(&self, rho: R) -> Result<CubeFamily> {
        let cubes: Vec<Cube> = self
            .cubes
            .iter()
            .filter(|q| q.radius <= rho(&q.center) * (1.0 + GEOM_TOL))
            .copied()
            .collect();
        if cubes.is_empty() {
            return Err(Error::EmptyFamily("subcritical filter removed every cube".into()));
        }
        Ok(CubeFamily {
            cubes,
            descriptor: FamilyDescriptor::Subcritical {
                base: format!("{:?}", self.descriptor),
            },
        })
    }

    pub fn custom(cubes: Vec<Cube>, label: &str) -> Result<CubeFamily> {
        if cubes.is_empty() {
            return Err(Error::EmptyFamily(label.into()));
        }
        Ok(CubeFamily {
            cubes,
            descriptor: FamilyDescriptor::Custom {
                label: label.into(),
            },
        })
    }
}

/// Radius ladder for maximal-operator families: the singleton-scale radius
/// `h sqrt(d) / 2` (so Lebesgue differentiation `f <= Mf` holds at lattice
/// resolution) followed by `h 2^j` up to `max_radius`.
pub fn maximal_ladder(lattice: &Lattice, max_radius: f64) -> Vec<f64> {
    let h = lattice.spacing();
    let d = lattice.dim() as f64;
    let mut radii = vec![h * d.sqrt() / 2.0];
    let mut r = h;
    while r <= max_radius {
        radii.push(r);
        r *= 2.0;
    }
    radii
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat1(h: f64) -> Lattice {
        Lattice::closed_box(&[0.0], &[1.0], h).unwrap()
    }

    #[test]
    fn average_of_constant_is_exact() {
        let lat = lat1(0.25);
        let f = LatticeField::constant(&lat, 3.25).unwrap();
        let q = Cube::from_corners(&[0.0], &[1.0]).unwrap();
        assert_eq!(average(&f, &q, None).unwrap(), 3.25);
    }

    #[test]
    fn average_of_identity_on_unit_interval() {
        let h = 1.0 / 1024.0;
        let lat = lat1(h);
        let f = LatticeField::from_fn(&lat, |p| p.coords()[0]).unwrap();
        let q = Cube::from_corners(&[0.0], &[1.0]).unwrap();
        let a = average(&f, &q, None).unwrap();
        assert!((a - 0.5).abs() <= h, "avg = {a}");
    }

    #[test]
    fn weighted_average_closed_form() {
        // f = x^2 with weight w = x on [0,1]: integral x^3 / integral x = 1/2.
        let h = 1.0 / 1024.0;
        let lat = Lattice::midpoint_box(&[0.0], &[1.0], 1024).unwrap();
        let f = LatticeField::from_fn(&lat, |p| p.coords()[0] * p.coords()[0]).unwrap();
        let w = WeightField::from_fn(&lat, |p| p.coords()[0]).unwrap();
        let q = Cube::from_corners(&[0.0], &[1.0]).unwrap();
        let a = average(&f, &q, Some(&w)).unwrap();
        assert!((a - 0.5).abs() <= 2.0 * h, "avg = {a}");
    }

    #[test]
    fn average_errors_outside_lattice() {
        let lat = lat1(0.25);
        let f = LatticeField::constant(&lat, 1.0).unwrap();
        let q = Cube::new(Point::new(&[10.0]).unwrap(), 0.1).unwrap();
        assert!(matches!(
            average(&f, &q, None),
            Err(Error::CubeOutsideLattice(_))
        ));
    }

    #[test]
    fn measure_of_unit_box() {
        let lat = lat1(1.0 / 64.0);
        let w = WeightField::one(&lat).unwrap();
        let m = measure(&w, |_| true);
        assert!((m - 1.0).abs() <= 1.0 / 64.0 + 1e-12, "m = {m}");
        let w2 = WeightField::from_fn(&lat, |_| 2.0).unwrap();
        let m2 = measure(&w2, |_| true);
        assert!((m2 - 2.0).abs() <= 2.0 / 64.0 + 1e-12);
    }

    #[test]
    fn measure_of_singular_weight() {
        // integral of |x|^{-1/2} over [-1,1] = 4; midpoint lattice avoids 0.
        let lat = Lattice::midpoint_box(&[-1.0], &[1.0], 1024).unwrap();
        let w = WeightField::from_fn(&lat, |p| p.coords()[0].abs().powf(-0.5)).unwrap();
        let m = measure(&w, |_| true);
        assert!((m - 4.0).abs() / 4.0 < 0.05, "m = {m}");
    }

    #[test]
    fn dilate_group_law() {
        let q = Cube::new(Point::new(&[1.0, 1.0]).unwrap(), 0.5).unwrap();
        let q3 = q.dilate(3.0).unwrap();
        assert_eq!(q3.center, q.center);
        assert_eq!(q3.radius, 1.5);
        let back = q.dilate(2.0).unwrap().dilate(0.5).unwrap();
        assert_eq!(back.radius, q.radius);
        assert_eq!(q.dilate(1.0).unwrap(), q);
    }

    #[test]
    fn children_tile_exactly() {
        let q = Cube::from_corners(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let kids = q.children();
        assert_eq!(kids.len(), 4);
        let vol: f64 = kids.iter().map(|c| c.side().powi(2)).sum();
        assert!((vol - q.side().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn children_partition_owned_points() {
        let lat = Lattice::closed_box(&[0.0, 0.0], &[1.0, 1.0], 1.0 / 16.0).unwrap();
        let q = Cube::from_corners(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let kids = q.children();
        let parent_owned = lat.owned_indices(&q);
        for &i in &parent_owned {
            let p = lat.point(i);
            let owners = kids
                .iter()
                .filter(|k| lat.owned_indices(k).contains(&i))
                .count();
            assert_eq!(owners, 1, "point {:?} owned by {owners} children", p.coords());
        }
        let total: usize = kids.iter().map(|k| lat.owned_count(k)).sum();
        assert_eq!(total, parent_owned.len());
    }

    #[test]
    fn enumerate_ladder_counts() {
        // 1-d lattice on [0,1], h = 1/4, ladder {1/4, 1/2}: 5 centers x 2 radii.
        let lat = lat1(0.25);
        let fam = CubeFamily::exhaustive_lattice(&lat, &[0.25, 0.5]).unwrap();
        assert_eq!(fam.len(), 10);
    }

    #[test]
    fn enumerate_dyadic_counts() {
        let root = Cube::from_corners(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let fam = CubeFamily::dyadic_of(&root, 2);
        assert_eq!(fam.len(), 1 + 4 + 16);
    }

    #[test]
    fn subcritical_filter_removes_large_cubes() {
        let lat = lat1(0.25);
        let fam = CubeFamily::exhaustive_lattice(&lat, &[0.25, 0.5]).unwrap();
        let sub = fam.subcritical(|_| 0.3).unwrap();
        assert!(sub.cubes.iter().all(|q| q.radius <= 0.3));
        assert_eq!(sub.len(), 5);
    }

    #[test]
    fn singleton_cube_owns_exactly_its_center() {
        let lat = Lattice::closed_box(&[0.0, 0.0], &[1.0, 1.0], 0.125).unwrap();
        let d = 2f64;
        for i in [0, 5, 37, lat.len() - 1] {
            let q = Cube::new(lat.point(i), lat.spacing() * d.sqrt() / 2.0).unwrap();
            assert_eq!(lat.owned_indices(&q), vec![i]);
        }
    }

    #[test]
    fn three_dimensional_partition_and_quadrature() {
        let lat = Lattice::midpoint_box(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0], 8).unwrap();
        let q = Cube::from_corners(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(lat.owned_count(&q), 512);
        let kids = q.children();
        assert_eq!(kids.len(), 8);
        let total: usize = kids.iter().map(|k| lat.owned_count(k)).sum();
        assert_eq!(total, 512);
        // quadrature of a separable function: avg of x y z over the unit cube
        let f = LatticeField::from_fn(&lat, |p| {
            p.coords()[0] * p.coords()[1] * p.coords()[2]
        })
        .unwrap();
        let a = average(&f, &q, None).unwrap();
        assert!((a - 0.125).abs() < 1e-12, "avg = {a}");
        let sums = sums::CubeSums::from_samples(&lat, f.samples());
        let (s, n) = sums.cube_sum(&kids[7]).unwrap();
        let direct: f64 = lat.owned_indices(&kids[7]).iter().map(|&i| f.get(i)).sum();
        assert_eq!(n, 64);
        assert!((s - direct).abs() < 1e-12);
    }

    #[test]
    fn average_monotone_in_f() {
        let lat = lat1(1.0 / 32.0);
        let f = LatticeField::from_fn(&lat, |p| p.coords()[0]).unwrap();
        let g = LatticeField::from_fn(&lat, |p| p.coords()[0] + 0.5).unwrap();
        let fam = CubeFamily::exhaustive_lattice(&lat, &maximal_ladder(&lat, 1.0)).unwrap();
        for q in &fam.cubes {
            assert!(average(&f, q, None).unwrap() <= average(&g, q, None).unwrap() + 1e-12);
        }
    }
}
