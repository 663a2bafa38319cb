//! The Maskit embedding `μ ↦ ⟨T₂, U_μ⟩`, cusp solving and boundary tracing.
//!
//! With `U_μ = [[iμ, i], [i, 0]]` the base traces are `tr W(1/0) = 2`,
//! `tr W(0/1) = iμ`, `tr W(1/1) = i(μ − 2)`, and every slope trace is a
//! polynomial of degree `q` in `μ`. A cusp for `p/q` is a root of
//! `tr W(p/q)(μ) = ±2` on the boundary of the slice.
//!
//! Cusps are found by continuation along the pleating ray: far up the slice
//! the trace of `W(p/q)` is real and huge near `Re μ = 2p/q`; following the
//! curve `tr W(p/q)(μ) = σT` while the real level `T` decreases to 2 lands on
//! the boundary cusp rather than on one of the other roots of the polynomial.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bowditch::{bowditch_test, BowditchConfig, BowditchVerdict};
use crate::farey::{slopes_in_range, FareySlope};
use crate::moebius::MoebiusMap;
use crate::rep::{trace_with_derivative, Dual, Representation, TraceTriple};
use crate::tolerance::{NEWTON_MAX_ITER, NEWTON_RESIDUAL};
use crate::Complex;

/// Accepted residual for a solved cusp.
pub const CUSP_RESIDUAL: f64 = 1e-10;

/// Height of the starting point on the pleating ray.
const RAY_START_HEIGHT: f64 = 4.0;

/// Largest denominator the ray start can handle in double precision.
pub const MAX_DENOMINATOR: i64 = 400;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaskitError {
    #[error("Newton iteration diverged for slope {slope} (residual {residual:e})")]
    NewtonDiverged { slope: FareySlope, residual: f64 },
    #[error("no root in the upper half plane for slope {0}")]
    NoUpperHalfPlaneRoot(FareySlope),
    #[error("slope 1/0 is parabolic for every μ and has no cusp")]
    InfiniteSlope,
    #[error("denominator of {0} exceeds {MAX_DENOMINATOR}")]
    SlopeTooDeep(FareySlope),
    #[error("q_max must be at least 1 (got {0})")]
    InvalidQmax(i64),
}

fn i() -> Complex {
    Complex::new(0.0, 1.0)
}

pub fn t2() -> MoebiusMap {
    MoebiusMap::translation(Complex::new(2.0, 0.0))
}

/// `U_μ = [[iμ, i], [i, 0]]`.
pub fn u_map(mu: Complex) -> MoebiusMap {
    MoebiusMap::from_normalized(i() * mu, i(), i(), Complex::new(0.0, 0.0))
}

/// `(α, β) ↦ (T₂, U_μ)`.
pub fn maskit_rep(mu: Complex) -> Representation {
    Representation::pair(t2(), u_map(mu))
}

/// `(2, iμ, i(μ − 2))`.
pub fn maskit_base_triple(mu: Complex) -> TraceTriple {
    TraceTriple::new(Complex::new(2.0, 0.0), i() * mu, i() * (mu - 2.0))
}

fn base_derivative() -> TraceTriple {
    TraceTriple::new(Complex::new(0.0, 0.0), i(), i())
}

/// `tr W(s)` at `μ` and its `μ`-derivative.
pub fn slope_trace(s: FareySlope, mu: Complex) -> Dual {
    trace_with_derivative(&maskit_base_triple(mu), &base_derivative(), s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceSign {
    Minus,
    Plus,
}

impl TraceSign {
    pub fn value(self) -> f64 {
        match self {
            TraceSign::Minus => -2.0,
            TraceSign::Plus => 2.0,
        }
    }
}

/// A solved boundary point where `W(slope)` becomes parabolic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CuspPoint {
    pub slope: FareySlope,
    pub mu: Complex,
    pub trace_sign: TraceSign,
    /// `|tr W(slope)(μ) − (±2)|`.
    pub residual: f64,
}

struct NewtonResult {
    root: Complex,
    residual: f64,
    converged: bool,
}

/// Damped Newton for `tr W(s)(μ) = target`.
fn newton(s: FareySlope, target: Complex, guess: Complex, max_iter: usize) -> NewtonResult {
    let mut mu = guess;
    let mut f = slope_trace(s, mu);
    let mut res = (f.value - target).norm();
    let scale = target.norm().max(1.0);
    for _ in 0..max_iter {
        if res <= NEWTON_RESIDUAL * scale {
            return NewtonResult { root: mu, residual: res, converged: true };
        }
        if f.deriv.norm() == 0.0 || !f.deriv.is_finite() {
            break;
        }
        let mut step = (f.value - target) / f.deriv;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = mu - step;
            let fc = slope_trace(s, cand);
            let rc = (fc.value - target).norm();
            if rc.is_finite() && rc < res {
                mu = cand;
                f = fc;
                res = rc;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // no descent: either converged to machine precision or stuck
            let tiny = step.norm() <= 1e-15 * (1.0 + mu.norm());
            return NewtonResult { root: mu, residual: res, converged: tiny && res <= CUSP_RESIDUAL * scale };
        }
        if step.norm() <= 1e-16 * (1.0 + mu.norm()) {
            break;
        }
    }
    let converged = res <= CUSP_RESIDUAL * scale;
    NewtonResult { root: mu, residual: res, converged }
}

/// Newton from `guess` on `tr W(s)(μ) = ∓2`, trying −2 first. Among roots in
/// the upper half plane the one closest to the guess wins.
pub fn cusp_solve(s: FareySlope, guess: Complex) -> Result<CuspPoint, MaskitError> {
    if s.is_infinity() {
        return Err(MaskitError::InfiniteSlope);
    }
    let mut best: Option<CuspPoint> = None;
    let mut worst_residual = 0.0f64;
    let mut any_converged = false;
    for sign in [TraceSign::Minus, TraceSign::Plus] {
        let r = newton(s, Complex::new(sign.value(), 0.0), guess, NEWTON_MAX_ITER);
        if !r.converged {
            worst_residual = worst_residual.max(r.residual);
            continue;
        }
        any_converged = true;
        if r.root.im <= 0.0 {
            continue;
        }
        let cand = CuspPoint { slope: s, mu: r.root, trace_sign: sign, residual: r.residual };
        let closer = best.is_none_or(|b| (cand.mu - guess).norm() < (b.mu - guess).norm());
        if closer {
            best = Some(cand);
        }
    }
    match best {
        Some(c) => Ok(c),
        None if any_converged => Err(MaskitError::NoUpperHalfPlaneRoot(s)),
        None => Err(MaskitError::NewtonDiverged { slope: s, residual: worst_residual }),
    }
}

/// Boundary cusp of slope `s` by continuation down its pleating ray.
pub fn cusp_by_continuation(s: FareySlope) -> Result<CuspPoint, MaskitError> {
    if s.is_infinity() {
        return Err(MaskitError::InfiniteSlope);
    }
    if s.q() > MAX_DENOMINATOR {
        return Err(MaskitError::SlopeTooDeep(s));
    }
    let start = Complex::new(2.0 * s.value(), RAY_START_HEIGHT);
    let t0 = slope_trace(s, start).value;
    let sign = if t0.re < 0.0 { TraceSign::Minus } else { TraceSign::Plus };
    let sigma = sign.value() / 2.0;
    let diverged = |residual| MaskitError::NewtonDiverged { slope: s, residual };

    // Land on the ray at the real level |t0|.
    let mut level = t0.norm().max(2.0);
    let r = newton(s, Complex::new(sigma * level, 0.0), start, NEWTON_MAX_ITER);
    if !r.converged {
        return Err(diverged(r.residual));
    }
    let mut mu = r.root;

    // March `level` down to 2 in log(level - 2), shrinking steps on trouble.
    let mut h = std::f64::consts::LN_2;
    let mut failures = 0;
    while level > 2.0 {
        let excess = level - 2.0;
        let next = if excess < 1e-6 { 2.0 } else { 2.0 + excess * (-h).exp() };
        let d = slope_trace(s, mu);
        let predicted =
            if d.deriv.norm() > 0.0 { mu + Complex::new(sigma * (next - level), 0.0) / d.deriv } else { mu };
        let r = newton(s, Complex::new(sigma * next, 0.0), predicted, 30);
        let jump = (r.root - predicted).norm();
        let stride = (predicted - mu).norm();
        let ok = r.converged && r.root.im > 0.0 && jump <= 0.5 * stride + 1e-9 * (1.0 + mu.norm());
        if ok {
            mu = r.root;
            level = next;
            h = (h * 1.5).min(3.0);
            failures = 0;
        } else {
            h *= 0.5;
            failures += 1;
            if failures > 60 {
                return Err(diverged(r.residual));
            }
        }
    }
    // Polish at the exact target.
    let r = newton(s, Complex::new(sign.value(), 0.0), mu, NEWTON_MAX_ITER);
    if r.root.im <= 0.0 {
        return Err(MaskitError::NoUpperHalfPlaneRoot(s));
    }
    if !(r.residual <= CUSP_RESIDUAL) {
        return Err(diverged(r.residual));
    }
    Ok(CuspPoint { slope: s, mu: r.root, trace_sign: sign, residual: r.residual })
}

/// Computable part of the end-invariant map: the cusp where curve `x` is pinched.
pub fn rational_end_invariant(x: FareySlope) -> Result<CuspPoint, MaskitError> {
    cusp_by_continuation(x)
}

/// Cusps of one period of the slice boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTrace {
    pub q_max: i64,
    /// Sorted by slope, covering `0 ≤ p/q < 1`.
    pub cusps: Vec<CuspPoint>,
    pub min_im: f64,
}

impl BoundaryTrace {
    /// Largest `Im μ` among cusps whose real part lies within `half_width` of
    /// `re` modulo the period 2.
    pub fn column_max_im(&self, re: f64, half_width: f64) -> Option<f64> {
        let x = re.rem_euclid(2.0);
        self.cusps
            .iter()
            .filter(|c| {
                let d = (c.mu.re - x).rem_euclid(2.0);
                d.min(2.0 - d) <= half_width
            })
            .map(|c| c.mu.im)
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
    }

    pub fn max_residual(&self) -> f64 {
        self.cusps.iter().map(|c| c.residual).fold(0.0, f64::max)
    }
}

/// Solves every cusp `p/q` with `0 ≤ p/q < 1`, `q ≤ q_max`.
///
/// Rays are independent, so all slopes are solved in parallel.
pub fn trace_boundary(q_max: i64) -> Result<BoundaryTrace, MaskitError> {
    if q_max < 1 {
        return Err(MaskitError::InvalidQmax(q_max));
    }
    let slopes = slopes_in_range(0, 1, q_max);
    let cusps: Vec<CuspPoint> = slopes.par_iter().map(|&s| cusp_by_continuation(s)).collect::<Result<_, _>>()?;
    let min_im = cusps.iter().map(|c| c.mu.im).fold(f64::INFINITY, f64::min);
    Ok(BoundaryTrace { q_max, cusps, min_im })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    Inside,
    Outside,
    Unknown,
}

/// Denominator bound of the boundary used by [`membership`].
pub const MEMBERSHIP_QMAX: i64 = 40;
/// Half-width of the real column compared against the traced boundary.
pub const MEMBERSHIP_COLUMN: f64 = 0.1;
/// Height above the column's highest cusp required for `Inside`.
pub const MEMBERSHIP_MARGIN: f64 = 0.05;

/// Boundary trace shared by membership queries.
pub fn reference_boundary() -> &'static BoundaryTrace {
    static BOUNDARY: OnceLock<BoundaryTrace> = OnceLock::new();
    BOUNDARY.get_or_init(|| trace_boundary(MEMBERSHIP_QMAX).expect("reference boundary solves"))
}

/// Three-valued membership in the Maskit slice.
pub fn membership(mu: Complex, depth: usize) -> Membership {
    if !(mu.im > 0.0) {
        return Membership::Outside;
    }
    let verdict = bowditch_test(&maskit_rep(mu), &BowditchConfig::with_depth(depth));
    match verdict {
        BowditchVerdict::Rejected(_) => Membership::Outside,
        BowditchVerdict::Inconclusive { .. } => Membership::Unknown,
        BowditchVerdict::NotRejected { .. } => {
            let top = reference_boundary().column_max_im(mu.re, MEMBERSHIP_COLUMN).unwrap_or(2.0);
            if mu.im > top + MEMBERSHIP_MARGIN {
                Membership::Inside
            } else {
                Membership::Unknown
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rep::{commutator_trace, markov_residual};

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn sl(p: i64, q: i64) -> FareySlope {
        FareySlope::new(p, q).unwrap()
    }

    #[test]
    fn normalization_fixed_points() {
        let r = maskit_rep(c(0.7, 1.9));
        let fa = r.a.fixed_points().unwrap();
        assert_eq!(fa, vec![crate::RiemannPoint::Infinity]);
        let h = r.b.inverse() * r.a * r.b;
        let fh = h.fixed_points().unwrap();
        assert_eq!(fh.len(), 1);
        assert!(fh[0].approx_eq(crate::RiemannPoint::Finite(c(0.0, 0.0)), 1e-12));
        let k = r.a.inverse() * r.b.inverse() * r.a * r.b;
        let fk = k.fixed_points().unwrap();
        assert!(fk[0].approx_eq(crate::RiemannPoint::Finite(c(-1.0, 0.0)), 1e-12));
    }

    #[test]
    fn base_triple_values() {
        let t = maskit_base_triple(c(0.0, 2.0));
        assert_eq!(t.y, c(-2.0, 0.0));
        assert_eq!(t.z, c(-2.0, -2.0));
        let mu = c(-0.3, 1.4);
        assert!(markov_residual(&maskit_base_triple(mu)).norm() < 1e-13);
        assert!((commutator_trace(&maskit_rep(mu)) + 2.0).norm() < 1e-12);
        assert!((maskit_rep(mu).b.trace() - i() * mu).norm() < 1e-15);
        let t = maskit_base_triple(mu);
        assert!((t.z - (t.x * t.y - maskit_rep(mu).a.compose(&maskit_rep(mu).b).trace())).norm() < 1e-13);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let mu = c(0.37, 1.81);
        let h = 1e-6;
        for s in [sl(1, 2), sl(2, 5), sl(-3, 7), sl(5, 8)] {
            let d = slope_trace(s, mu);
            let fd = (slope_trace(s, mu + h).value - slope_trace(s, mu - h).value) / (2.0 * h);
            assert!((d.deriv - fd).norm() < 1e-5 * (1.0 + fd.norm()), "{s}");
        }
    }

    #[test]
    fn low_cusps_exact() {
        let c01 = cusp_solve(sl(0, 1), c(0.1, 1.5)).unwrap();
        assert!((c01.mu - c(0.0, 2.0)).norm() < 1e-12);
        assert_eq!(c01.trace_sign, TraceSign::Minus);
        let c11 = cusp_solve(sl(1, 1), c(2.2, 1.7)).unwrap();
        assert!((c11.mu - c(2.0, 2.0)).norm() < 1e-12);
        let c12 = cusp_solve(sl(1, 2), c(1.0, 2.0)).unwrap();
        assert!((c12.mu - c(1.0, 3f64.sqrt())).norm() < 1e-10);
        assert_eq!(c12.trace_sign, TraceSign::Plus);
    }

    #[test]
    fn continuation_agrees_on_low_cusps() {
        assert!((cusp_by_continuation(sl(0, 1)).unwrap().mu - c(0.0, 2.0)).norm() < 1e-12);
        assert!((cusp_by_continuation(sl(1, 1)).unwrap().mu - c(2.0, 2.0)).norm() < 1e-12);
        assert!((cusp_by_continuation(sl(1, 2)).unwrap().mu - c(1.0, 3f64.sqrt())).norm() < 1e-10);
    }

    #[test]
    fn end_invariant_is_twist_equivariant() {
        for s in [sl(1, 3), sl(2, 5), sl(-1, 4)] {
            let a = rational_end_invariant(s).unwrap().mu;
            let b = rational_end_invariant(s.shifted(1)).unwrap().mu;
            assert!((b - a - 2.0).norm() < 1e-10, "{s}");
        }
        assert_eq!(rational_end_invariant(FareySlope::INFINITY), Err(MaskitError::InfiniteSlope));
    }

    #[test]
    fn small_boundary() {
        let b = trace_boundary(2).unwrap();
        assert_eq!(b.cusps.len(), 2);
        assert!((b.min_im - 3f64.sqrt()).abs() < 1e-10);
        assert_eq!(trace_boundary(0), Err(MaskitError::InvalidQmax(0)));
    }

    #[test]
    fn membership_examples() {
        assert_eq!(membership(c(0.0, 3.0), 20), Membership::Inside);
        assert_eq!(membership(c(0.0, 0.5), 20), Membership::Outside);
        assert_ne!(membership(c(0.0, 2.0), 20), Membership::Outside);
        assert_ne!(membership(c(0.0, 2.0), 20), Membership::Inside);
        assert_eq!(membership(c(0.3, -1.0), 20), Membership::Outside);
    }
}
