//! Numerical thresholds shared across the crate.
//!
//! Everything that decides a discrete outcome from floating point data reads
//! its threshold from here, so a higher-precision backend only has to revisit
//! this file.

/// Allowed drift of `ad - bc` from 1 for a normalized matrix.
pub const DET_TOL: f64 = 1e-12;

/// `|tr² - 4|` below this declares a map parabolic (or the identity).
pub const PARABOLIC_TOL: f64 = 1e-9;

/// Imaginary part of a trace below this counts as real.
pub const REAL_TRACE_TOL: f64 = 1e-9;

/// Commutator-trace drift allowed for a punctured-torus representation.
pub const COMMUTATOR_TOL: f64 = 1e-9;

/// Markov residual allowed for a consistent trace triple.
pub const MARKOV_TOL: f64 = 1e-9;

/// Relative size under which a matrix entry is treated as zero.
pub const ENTRY_ZERO_TOL: f64 = 1e-13;

/// Residual target for Newton cusp solves.
pub const NEWTON_RESIDUAL: f64 = 1e-12;

/// Iteration cap for a single Newton solve.
pub const NEWTON_MAX_ITER: usize = 200;

/// Default pruning threshold on `|g'|` for limit-set rendering.
pub const RENDER_CONTRACTION: f64 = 1e-4;
