//! Lattice points under area-preserving stretches of concave curves.
//!
//! A concave, strictly decreasing curve `Γ` in the first quadrant is scaled by
//! a radius `r` and stretched by `diag(1/s, s)`. This crate counts the integer
//! points under the resulting curve `rΓ(s)`, finds the stretch factors that
//! maximise (open quadrant) or minimise (closed quadrant) that count with an
//! exact event sweep, evaluates explicit two-term counting bounds, and
//! translates everything into Dirichlet, Neumann and harmonic-oscillator
//! eigenvalue problems on rectangles.
//!
//! Module map:
//!
//! * [`curves`]: the curve abstraction and the `p`-circle family.
//! * [`counting`]: `N(r,s)` and `𝒩(r,s)`, closed forms, exact rational counts.
//! * [`sweep`]: per-point membership intervals and the optimal-stretch sweep.
//! * [`estimates`]: sawtooth sums, the van der Corput bound and the counting
//!   inequalities, reported as [`estimates::BoundReport`]s.
//! * [`spectral`]: eigenvalues of rectangles and their optimisation over `s`.
//! * [`experiments`]: batch drivers used by the command-line tool.
//! * [`parallel`]: ordered data-parallel maps, sequential without the
//!   `parallel` feature.

pub mod counting;
pub mod curves;
mod error;
pub mod estimates;
pub mod experiments;
pub mod parallel;
pub mod quadrature;
pub mod spectral;
pub mod sweep;

pub use counting::{count, Quadrant};
pub use curves::Curve;
pub use error::{Error, Result};
pub use sweep::{maximize_count, minimize_count_nonneg, Interval, StretchResult};
