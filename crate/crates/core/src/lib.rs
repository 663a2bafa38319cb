//! Numerical toolkit for once-punctured torus Kleinian groups.
//!
//! The crate is organised bottom-up:
//!
//! * [`moebius`]: projective 2×2 complex matrices, classification, fixed
//!   points, complex translation length and upper-half-plane distance.
//! * [`farey`] and [`rep`]: Farey slopes and words, generator pairs with
//!   parabolic commutator, the trace recursion over the Farey tree.
//! * [`bowditch`]: trace-based discreteness screening.
//! * [`maskit`]: the Maskit embedding `μ ↦ (T₂, U_μ)`, cusp solving by
//!   Newton continuation and boundary tracing.
//! * [`limit`]: symbolic Dehn-twist sequences and their convergence verdicts.
//! * [`geom`]: power limits and geometric convergence of cyclic groups.
//! * [`slices`]: parameter clouds for bumping sets and Bers geometric limits.
//! * [`render`]: limit-set point enumeration.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bowditch;
pub mod farey;
pub mod geom;
pub mod limit;
pub mod maskit;
pub mod moebius;
pub mod render;
pub mod rep;
pub mod slices;
pub mod tolerance;

pub use num_complex::Complex64 as Complex;

pub use bowditch::{bowditch_test, BowditchConfig, BowditchVerdict};
pub use farey::{FareySlope, FareyWord, Letter};
pub use geom::{GeomConvergenceReport, GroupBallSnapshot, SyntheticFamily};
pub use limit::{ConvergenceVerdict, IntegerSequenceSpec, SideSpec, TwistSequenceSpec};
pub use maskit::{BoundaryTrace, CuspPoint, Membership};
pub use moebius::{IsometryClass, MoebiusError, MoebiusMap, RiemannPoint};
pub use rep::{Representation, TraceTriple};
pub use slices::{RegionCloud, RegionTag, SlopeChart};
