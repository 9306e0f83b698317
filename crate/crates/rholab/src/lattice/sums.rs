//! Summed-area tables for O(1) box sums over lattice fields.
//!
//! Weight-class constants take suprema over tens of thousands of cubes; a
//! prefix table turns each cube average into a handful of table lookups.
//! Tables are built in a fixed pass order so results are deterministic.

use super::{Cube, Lattice, MAX_DIM};

/// Inclusive prefix sums with a zero border, one entry per lattice cell.
#[derive(Clone, Debug)]
pub struct CubeSums {
    lattice: Lattice,
    n: [usize; MAX_DIM],
    table: Vec<f64>,
}

impl CubeSums {
    pub fn new<F: Fn(usize) -> f64>(lattice: &Lattice, value: F) -> Self {
        let mut n = [1usize; MAX_DIM];
        n[..].copy_from_slice(&{
            let mut full = [1usize; MAX_DIM];
            for (i, c) in lattice_counts(lattice).iter().enumerate() {
                full[i] = *c;
            }
            full
        });
        let (n0, n1, n2) = (n[0], n[1], n[2]);
        let stride1 = (n1 + 1) * (n2 + 1);
        let stride2 = n2 + 1;
        let mut table = vec![0.0; (n0 + 1) * stride1];
        for i0 in 0..n0 {
            for i1 in 0..n1 {
                for i2 in 0..n2 {
                    let v = value((i0 * n1 + i1) * n2 + i2);
                    let at = |a: usize, b: usize, c: usize| a * stride1 + b * stride2 + c;
                    table[at(i0 + 1, i1 + 1, i2 + 1)] = v
                        + table[at(i0, i1 + 1, i2 + 1)]
                        + table[at(i0 + 1, i1, i2 + 1)]
                        + table[at(i0 + 1, i1 + 1, i2)]
                        - table[at(i0, i1, i2 + 1)]
                        - table[at(i0, i1 + 1, i2)]
                        - table[at(i0 + 1, i1, i2)]
                        + table[at(i0, i1, i2)];
                }
            }
        }
        CubeSums {
            lattice: lattice.clone(),
            n,
            table,
        }
    }

    pub fn from_samples(lattice: &Lattice, samples: &[f64]) -> Self {
        Self::new(lattice, |i| samples[i])
    }

    #[inline]
    fn at(&self, a: usize, b: usize, c: usize) -> f64 {
        let stride1 = (self.n[1] + 1) * (self.n[2] + 1);
        let stride2 = self.n[2] + 1;
        self.table[a * stride1 + b * stride2 + c]
    }

    /// Sum over half-open index ranges `[lo, hi)` per axis.
    pub fn range_sum(&self, r: &[(usize, usize); MAX_DIM]) -> f64 {
        let (a0, b0) = r[0];
        let (a1, b1) = r[1];
        let (a2, b2) = r[2];
        self.at(b0, b1, b2) - self.at(a0, b1, b2) - self.at(b0, a1, b2) - self.at(b0, b1, a2)
            + self.at(a0, a1, b2)
            + self.at(a0, b1, a2)
            + self.at(b0, a1, a2)
            - self.at(a0, a1, a2)
    }

    /// Sum of the tabulated values over the lattice points owned by `q`,
    /// together with the point count. `None` when the cube owns nothing.
    pub fn cube_sum(&self, q: &Cube) -> Option<(f64, usize)> {
        let ranges = self.lattice.owned_ranges(q)?;
        let count: usize = ranges.iter().map(|(a, b)| b - a).product();
        Some((self.range_sum(&ranges), count))
    }
}

fn lattice_counts(lattice: &Lattice) -> Vec<usize> {
    lattice.counts().to_vec()
}
