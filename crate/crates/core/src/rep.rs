//! Generator pairs with parabolic commutator and their trace coordinates.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::farey::{self, FareySlope, FareyWord, Letter, VertexValue};
use crate::moebius::{IsometryClass, MoebiusMap, RiemannPoint};
use crate::tolerance::{COMMUTATOR_TOL, MARKOV_TOL};
use crate::Complex;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RepError {
    #[error("commutator trace {0} is not -2")]
    CommutatorNotParabolic(Complex),
    #[error("trace triple is off the Markov cubic (residual {0})")]
    InconsistentBase(Complex),
    #[error("generators share a fixed point")]
    ElementaryPair,
}

/// Images `(A, B)` of the generators `α, β`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Representation {
    pub a: MoebiusMap,
    pub b: MoebiusMap,
}

/// Traces of the three base slopes: `x = tr W(1/0) = tr A`,
/// `y = tr W(0/1) = tr B`, `z = tr W(1/1) = tr A⁻¹B`.
///
/// Swapping `z` for `tr AB = xy − z` stays on the same cubic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceTriple {
    pub x: Complex,
    pub y: Complex,
    pub z: Complex,
}

impl TraceTriple {
    pub fn new(x: Complex, y: Complex, z: Complex) -> Self {
        TraceTriple { x, y, z }
    }

    /// From `(tr A, tr B, tr AB)`.
    pub fn from_ab(tr_a: Complex, tr_b: Complex, tr_ab: Complex) -> Self {
        TraceTriple { x: tr_a, y: tr_b, z: tr_a * tr_b - tr_ab }
    }

    /// `tr AB`.
    pub fn tr_ab(&self) -> Complex {
        self.x * self.y - self.z
    }

    fn scale(&self) -> f64 {
        1.0 + self.x.norm_sqr() + self.y.norm_sqr() + self.z.norm_sqr() + (self.x * self.y * self.z).norm()
    }

    pub fn is_consistent(&self, tol: f64) -> bool {
        markov_residual(self).norm() <= tol * self.scale()
    }
}

/// `x² + y² + z² − xyz`.
pub fn markov_residual(t: &TraceTriple) -> Complex {
    t.x * t.x + t.y * t.y + t.z * t.z - t.x * t.y * t.z
}

impl Representation {
    /// A punctured-torus representation; the commutator must have trace −2.
    pub fn new(a: MoebiusMap, b: MoebiusMap) -> Result<Self, RepError> {
        let r = Representation { a, b };
        let t = commutator_trace(&r);
        if (t + 2.0).norm() > COMMUTATOR_TOL * (1.0 + a.trace().norm_sqr() + b.trace().norm_sqr()) {
            return Err(RepError::CommutatorNotParabolic(t));
        }
        Ok(r)
    }

    /// An arbitrary generator pair, used for filters that accept any two maps.
    pub fn pair(a: MoebiusMap, b: MoebiusMap) -> Self {
        Representation { a, b }
    }

    pub fn trace_triple(&self) -> TraceTriple {
        TraceTriple::new(self.a.trace(), self.b.trace(), self.a.inverse().compose(&self.b).trace())
    }

    pub fn conjugate_by(&self, g: &MoebiusMap) -> Representation {
        Representation { a: self.a.conjugate_by(g), b: self.b.conjugate_by(g) }
    }

    fn letter(&self, l: Letter) -> MoebiusMap {
        match l {
            Letter::A => self.a,
            Letter::AInv => self.a.inverse(),
            Letter::B => self.b,
            Letter::BInv => self.b.inverse(),
        }
    }

    pub fn evaluate(&self, w: &FareyWord) -> MoebiusMap {
        w.letters().iter().fold(MoebiusMap::identity(), |acc, &l| acc.compose(&self.letter(l)))
    }

    /// Image of the word attached to `s`.
    pub fn slope_element(&self, s: FareySlope) -> MoebiusMap {
        self.evaluate(&farey::farey_word(s))
    }
}

/// `tr(ABA⁻¹B⁻¹)`.
pub fn commutator_trace(r: &Representation) -> Complex {
    r.a.commutator(&r.b).trace()
}

/// `(A, B) ↦ (A, AᵏB)`, the k-th power of the Dehn twist about `α`.
pub fn twist_action(r: &Representation, k: i64) -> Representation {
    Representation { a: r.a, b: r.a.pow(k).compose(&r.b) }
}

impl VertexValue for Complex {
    fn vertex(left: Self, right: Self, opposite: Self) -> Self {
        left * right - opposite
    }
}

/// A trace together with its derivative along a one-parameter family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub value: Complex,
    pub deriv: Complex,
}

impl VertexValue for Dual {
    fn vertex(l: Self, r: Self, o: Self) -> Self {
        Dual { value: l.value * r.value - o.value, deriv: l.deriv * r.value + l.value * r.deriv - o.deriv }
    }
}

/// Trace of `W(s)` from the base triple, by the Farey vertex relation.
pub fn trace_of_slope(base: &TraceTriple, s: FareySlope) -> Result<Complex, RepError> {
    if !base.is_consistent(MARKOV_TOL) {
        return Err(RepError::InconsistentBase(markov_residual(base)));
    }
    Ok(farey::evaluate(s, base.x, base.y, base.z))
}

/// Trace and derivative of `W(s)` for a family whose base triple and its
/// derivative are given.
pub fn trace_with_derivative(base: &TraceTriple, dbase: &TraceTriple, s: FareySlope) -> Dual {
    farey::evaluate(
        s,
        Dual { value: base.x, deriv: dbase.x },
        Dual { value: base.y, deriv: dbase.y },
        Dual { value: base.z, deriv: dbase.z },
    )
}

/// Memoized slope traces for one representation.
///
/// Slopes reached in Stern–Brocot order reuse their parents' entries, so a
/// level-by-level sweep costs one vertex relation per slope.
#[derive(Debug, Clone)]
pub struct SlopeTraceTable {
    base: TraceTriple,
    cache: HashMap<FareySlope, Complex>,
}

impl SlopeTraceTable {
    pub fn new(base: TraceTriple) -> Result<Self, RepError> {
        if !base.is_consistent(MARKOV_TOL) {
            return Err(RepError::InconsistentBase(markov_residual(&base)));
        }
        let mut cache = HashMap::new();
        cache.insert(FareySlope::INFINITY, base.x);
        cache.insert(FareySlope::ZERO, base.y);
        cache.insert(FareySlope::ONE, base.z);
        cache.insert(FareySlope::new(-1, 1).unwrap(), base.tr_ab());
        Ok(SlopeTraceTable { base, cache })
    }

    pub fn get(&mut self, s: FareySlope) -> Complex {
        if let Some(&t) = self.cache.get(&s) {
            return t;
        }
        let mut last = None;
        farey::descend(s, |t| last = Some(*t));
        let tri = last.expect("base slopes are cached");
        let value = self.get(tri.left) * self.get(tri.right) - self.get(tri.opposite);
        self.cache.insert(s, value);
        value
    }

    pub fn base(&self) -> &TraceTriple {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.cache.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cache.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JorgensenOutcome {
    Pass(f64),
    Fail(f64),
}

impl JorgensenOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, JorgensenOutcome::Pass(_))
    }
}

/// `|tr²A − 4| + |tr[A,B] − 2|`.
pub fn jorgensen_quantity(a: &MoebiusMap, b: &MoebiusMap) -> f64 {
    (a.trace_squared() - 4.0).norm() + (a.commutator(b).trace() - 2.0).norm()
}

fn share_fixed_point(a: &MoebiusMap, b: &MoebiusMap) -> bool {
    let (Ok(fa), Ok(fb)) = (a.fixed_points(), b.fixed_points()) else {
        return true;
    };
    let close = |p: &RiemannPoint, q: &RiemannPoint| match (p, q) {
        (RiemannPoint::Infinity, RiemannPoint::Infinity) => true,
        (RiemannPoint::Finite(x), RiemannPoint::Finite(y)) => (x - y).norm() <= 1e-9 * (1.0 + x.norm().max(y.norm())),
        _ => false,
    };
    fa.iter().any(|p| fb.iter().any(|q| close(p, q)))
}

/// Jørgensen's necessary condition for a discrete non-elementary pair.
pub fn jorgensen_filter(r: &Representation) -> Result<JorgensenOutcome, RepError> {
    if r.a.class() == IsometryClass::Identity || r.b.class() == IsometryClass::Identity || share_fixed_point(&r.a, &r.b)
    {
        return Err(RepError::ElementaryPair);
    }
    let j = jorgensen_quantity(&r.a, &r.b);
    Ok(if j >= 1.0 { JorgensenOutcome::Pass(j) } else { JorgensenOutcome::Fail(j) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn maskit(mu: Complex) -> Representation {
        let i = c(0.0, 1.0);
        Representation::new(
            MoebiusMap::translation(c(2.0, 0.0)),
            MoebiusMap::from_normalized(i * mu, i, i, c(0.0, 0.0)),
        )
        .unwrap()
    }

    #[test]
    fn commutator_of_maskit_pair() {
        assert!((commutator_trace(&maskit(c(1.0, 1.0))) + 2.0).norm() < 1e-12);
    }

    #[test]
    fn non_parabolic_commutator_rejected() {
        let r = Representation::new(MoebiusMap::diagonal(c(2.0, 0.0)), MoebiusMap::translation(c(1.0, 0.0)));
        assert!(matches!(r, Err(RepError::CommutatorNotParabolic(_))));
    }

    #[test]
    fn markov_examples() {
        let mu = c(0.3, 1.9);
        let i = c(0.0, 1.0);
        let t = TraceTriple::new(c(2.0, 0.0), i * mu, i * (mu + 2.0));
        assert!(markov_residual(&t).norm() < 1e-13);
        assert_eq!(markov_residual(&TraceTriple::new(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0))), c(0.0, 0.0));
        let three = c(3.0, 0.0);
        assert_eq!(markov_residual(&TraceTriple::new(three, three, three)), c(0.0, 0.0));
    }

    #[test]
    fn twist_examples() {
        let r = maskit(c(0.4, 1.3));
        let same = twist_action(&r, 0);
        assert!(same.b.projective_eq(&r.b, 0.0));
        let t1 = twist_action(&r, 1);
        assert!((t1.b.trace() - c(0.0, 1.0) * (c(0.4, 1.3) + 2.0)).norm() < 1e-13);
    }

    #[test]
    fn twist_fixes_h_subgroup() {
        let r = maskit(c(-0.7, 2.2));
        for k in [-3, -1, 1, 4] {
            let t = twist_action(&r, k);
            assert!(t.a.projective_eq(&r.a, 0.0));
            let h = r.b.inverse() * r.a * r.b;
            let h_t = t.b.inverse() * t.a * t.b;
            assert!(h.projective_eq(&h_t, 1e-10), "k = {k}");
        }
    }

    #[test]
    fn one_half_trace_polynomial() {
        let mu = c(0.25, 1.75);
        let i = c(0.0, 1.0);
        let base = TraceTriple::new(c(2.0, 0.0), i * mu, i * (mu - 2.0));
        let t = trace_of_slope(&base, FareySlope::new(1, 2).unwrap()).unwrap();
        assert!((t - (-mu * mu + 2.0 * mu - 2.0)).norm() < 1e-13);
        assert_eq!(trace_of_slope(&base, FareySlope::INFINITY).unwrap(), c(2.0, 0.0));
    }

    #[test]
    fn inconsistent_base_rejected() {
        let base = TraceTriple::new(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0));
        assert!(matches!(trace_of_slope(&base, FareySlope::ONE), Err(RepError::InconsistentBase(_))));
    }

    #[test]
    fn memo_table_matches_descent() {
        let r = maskit(c(0.1, 1.8));
        let base = r.trace_triple();
        let mut table = SlopeTraceTable::new(base).unwrap();
        for s in farey::slopes_in_range(-2, 2, 9) {
            let a = table.get(s);
            let b = trace_of_slope(&base, s).unwrap();
            assert!((a - b).norm() <= 1e-9 * (1.0 + b.norm()), "{s}");
        }
    }

    #[test]
    fn jorgensen_examples() {
        let r = maskit(c(0.5, 1.5));
        match jorgensen_filter(&r).unwrap() {
            JorgensenOutcome::Pass(j) => assert!((j - 4.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }

        let eps = 1e-3;
        let near = Representation::pair(
            MoebiusMap::translation(c(eps, 0.0)),
            MoebiusMap::from_normalized(c(1.0, 0.0), c(0.0, 0.0), c(eps, 0.0), c(1.0, 0.0)),
        );
        assert!(!jorgensen_filter(&near).unwrap().passed());

        let diag = Representation::pair(MoebiusMap::diagonal(c(2.0, 0.0)), MoebiusMap::diagonal(c(3.0, 0.0)));
        assert_eq!(jorgensen_filter(&diag), Err(RepError::ElementaryPair));
    }
}
