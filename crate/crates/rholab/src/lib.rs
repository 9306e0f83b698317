//! rholab is a numerical laboratory for harmonic analysis adapted to a
//! critical radius function on lattices of dimension one to three.
//!
//! The crate builds, on a common lattice/quadrature substrate:
//!
//! * critical radius functions (analytic families and the sup-formula from a
//!   Schrodinger potential), variation checks and greedy critical coverings;
//! * penalized maximal and minimal operators, localized and dyadic maximal
//!   functions, and the subcritical/supercritical split;
//! * empirical characteristic constants for the adapted Muckenhoupt and
//!   reverse-Holder classes, with refinement-stability as the desk-scale
//!   membership surrogate, and a suite of relations between those classes;
//! * shifted dyadic grids (one-third trick), a weighted stopping-time
//!   decomposition on a fixed cube, and a localized dyadic mixed weak-type
//!   check;
//! * kernel-side condition checkers for singular integrals with critical
//!   radius decay, discrete truncated kernel application, and the exponent
//!   bookkeeping for the associated operator families;
//! * an experiment harness sweeping mixed weak-type inequalities over level
//!   ladders with seeded reproducibility and refinement-stability studies.
//!
//! See the `examples/` directory for one runnable example per capability and
//! the `rholab` binary for the config-driven command line.

pub mod error;
pub mod numerics;
pub mod lattice;
pub mod report;
pub mod rho;
pub mod dyadic;
pub mod maximal;
pub mod weights;
pub mod kernels;
pub mod sweep;
pub mod config;

pub use error::{Error, Result};
pub use lattice::{average, measure, Cube, CubeFamily, Lattice, LatticeField, Point, WeightField};
pub use rho::CriticalRadius;
