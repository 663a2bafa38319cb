//! Dehn-twist sequences approaching the diagonal at `(∞, ∞)` and the verdict
//! on whether their quasi-Fuchsian images converge.
//!
//! Integer sequences are symbolic quasi-polynomials: a polynomial in `n`
//! plus a periodic offset, optionally preceded by a finite table. Every
//! statement of the form "for all `n` large enough" is then decided exactly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::farey::FareySlope;
use crate::maskit::{rational_end_invariant, MaskitError};
use crate::moebius::{hyperbolic_distance, MoebiusError, RiemannPoint};
use crate::Complex;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LimitError {
    #[error("sequence spec: {0}")]
    InvalidSequence(String),
    #[error("sequence does not converge to infinity")]
    NotConvergingToInfinity,
    #[error("multiplier is zero")]
    ZeroMultiplier,
    #[error(transparent)]
    Moebius(#[from] MoebiusError),
    #[error(transparent)]
    Maskit(#[from] MaskitError),
}

/// `n ↦ head[n]` for `n < head.len()`, else `Σ poly[i]·nⁱ + periodic[n mod len]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSequence", into = "RawSequence")]
pub struct IntegerSequenceSpec {
    head: Vec<i64>,
    poly: Vec<i64>,
    periodic: Vec<i64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSequence {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    affine: Option<(i64, i64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    poly: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    periodic: Vec<i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    head: Vec<i64>,
}

impl TryFrom<RawSequence> for IntegerSequenceSpec {
    type Error = LimitError;

    fn try_from(raw: RawSequence) -> Result<Self, LimitError> {
        let poly = match (raw.affine, raw.poly) {
            (Some((a, b)), None) => vec![b, a],
            (None, Some(p)) => p,
            (None, None) if !raw.periodic.is_empty() => vec![],
            (None, None) => {
                return Err(LimitError::InvalidSequence("one of `affine`, `poly`, `periodic` is required".into()))
            }
            (Some(_), Some(_)) => return Err(LimitError::InvalidSequence("`affine` and `poly` are exclusive".into())),
        };
        Ok(IntegerSequenceSpec::quasi_polynomial(poly, raw.periodic).with_head(raw.head))
    }
}

impl From<IntegerSequenceSpec> for RawSequence {
    fn from(s: IntegerSequenceSpec) -> Self {
        RawSequence { affine: None, poly: Some(s.poly), periodic: s.periodic, head: s.head }
    }
}

fn trim(mut v: Vec<i64>) -> Vec<i64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    match (a, b) {
        (0, x) | (x, 0) => x,
        _ => a / gcd(a, b) * b,
    }
}

impl IntegerSequenceSpec {
    /// `n ↦ a·n + b`.
    pub fn affine(a: i64, b: i64) -> Self {
        Self::quasi_polynomial(vec![b, a], vec![])
    }

    /// `n ↦ Σ coeffs[i]·nⁱ`.
    pub fn polynomial(coeffs: Vec<i64>) -> Self {
        Self::quasi_polynomial(coeffs, vec![])
    }

    /// Polynomial plus `periodic[n mod periodic.len()]`. A constant periodic
    /// part is folded into the polynomial.
    pub fn quasi_polynomial(poly: Vec<i64>, periodic: Vec<i64>) -> Self {
        let mut poly = poly;
        let mut periodic = periodic;
        if !periodic.is_empty() && periodic.iter().all(|&o| o == periodic[0]) {
            if poly.is_empty() {
                poly.push(0);
            }
            poly[0] += periodic[0];
            periodic.clear();
        }
        IntegerSequenceSpec { head: vec![], poly: trim(poly), periodic }
    }

    /// Explicit leading values overriding the formula for `n < head.len()`.
    pub fn with_head(mut self, head: Vec<i64>) -> Self {
        self.head = head;
        self
    }

    pub fn eval(&self, n: u64) -> i128 {
        if let Some(&h) = self.head.get(n as usize) {
            return h as i128;
        }
        let n128 = n as i128;
        let mut acc: i128 = 0;
        for &c in self.poly.iter().rev() {
            acc = acc * n128 + c as i128;
        }
        if !self.periodic.is_empty() {
            acc += self.periodic[(n as usize) % self.periodic.len()] as i128;
        }
        acc
    }

    /// Degree of the polynomial part; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.poly.len().checked_sub(1)
    }

    /// `|a_n| → ∞`.
    pub fn diverges(&self) -> bool {
        self.degree().is_some_and(|d| d >= 1)
    }

    fn coeff(&self, i: usize) -> i64 {
        self.poly.get(i).copied().unwrap_or(0)
    }

    fn offset(&self, n: usize) -> i64 {
        if self.periodic.is_empty() {
            0
        } else {
            self.periodic[n % self.periodic.len()]
        }
    }

    /// Value of the eventual formula's constant part at residue `n`.
    fn constant_at(&self, n: usize) -> i64 {
        self.coeff(0) + self.offset(n)
    }

    /// First index from which the formula holds.
    pub fn tail_start(&self) -> usize {
        self.head.len()
    }
}

/// Linear data `a + p·b = 0` that `(p+1)k − pl` must satisfy to be eventually
/// constant: polynomial coefficients of degree ≥ 1 first, then the variation
/// of the periodic parts across one common period.
struct ResidualSystem {
    poly_a: Vec<i64>,
    poly_b: Vec<i64>,
    per_a: Vec<i64>,
    per_b: Vec<i64>,
}

impl ResidualSystem {
    fn new(k: &IntegerSequenceSpec, l: &IntegerSequenceSpec) -> Self {
        let deg = k.poly.len().max(l.poly.len());
        let poly_a: Vec<i64> = (1..deg).map(|i| k.coeff(i)).collect();
        let poly_b: Vec<i64> = (1..deg).map(|i| k.coeff(i) - l.coeff(i)).collect();
        let period = lcm(k.periodic.len(), l.periodic.len());
        let per_a: Vec<i64> = (0..period).map(|r| k.offset(r) - k.offset(0)).collect();
        let per_b: Vec<i64> = (0..period).map(|r| (k.offset(r) - k.offset(0)) - (l.offset(r) - l.offset(0))).collect();
        ResidualSystem { poly_a, poly_b, per_a, per_b }
    }
}

enum PSolution {
    Unique(i64),
    Any,
    None,
}

/// Integer `p` with `a + p·b = 0` componentwise.
fn solve_linear(a: &[i64], b: &[i64]) -> PSolution {
    let pivot = a.iter().zip(b).find(|(_, &bi)| bi != 0);
    match pivot {
        None if a.iter().all(|&x| x == 0) => PSolution::Any,
        None => PSolution::None,
        Some((&ai, &bi)) => {
            if ai % bi != 0 {
                return PSolution::None;
            }
            let p = -ai / bi;
            let ok = a.iter().zip(b).all(|(&x, &y)| x as i128 + p as i128 * y as i128 == 0);
            if ok {
                PSolution::Unique(p)
            } else {
                PSolution::None
            }
        }
    }
}

/// The unique `(p, q)` with `(p+1)k_n − p·l_n + q = 0` for all large `n`.
///
/// `None` when no pair exists or when every `p` works (both sequences
/// eventually constant), since then the pair is not determined.
pub fn solve_pq(k: &IntegerSequenceSpec, l: &IntegerSequenceSpec) -> Option<(i64, i64)> {
    let sys = ResidualSystem::new(k, l);
    let a: Vec<i64> = sys.poly_a.iter().chain(&sys.per_a).copied().collect();
    let b: Vec<i64> = sys.poly_b.iter().chain(&sys.per_b).copied().collect();
    let p = match solve_linear(&a, &b) {
        PSolution::Unique(p) => p,
        PSolution::Any | PSolution::None => return None,
    };
    let q = -((p + 1) * k.constant_at(0) - p * l.constant_at(0));
    // Exact check on the tail, one full period past both heads.
    let start = k.tail_start().max(l.tail_start());
    let span = lcm(k.periodic.len(), l.periodic.len()).max(1) + k.poly.len().max(l.poly.len()) + 1;
    let holds = (start..start + span).all(|n| {
        let n = n as u64;
        (p as i128 + 1) * k.eval(n) - p as i128 * l.eval(n) + q as i128 == 0
    });
    holds.then_some((p, q))
}

/// Whether some integer `p` makes `(p+1)k_n − p·l_n` bounded.
fn bounded_residual_exists(k: &IntegerSequenceSpec, l: &IntegerSequenceSpec) -> bool {
    let sys = ResidualSystem::new(k, l);
    !matches!(solve_linear(&sys.poly_a, &sys.poly_b), PSolution::None)
}

/// `ξ = (p+1)μ − p·ν̄ + 2q`.
pub fn predict_limit(mu: Complex, nu: Complex, p: i64, q: i64) -> Complex {
    (p as f64 + 1.0) * mu - p as f64 * nu.conj() + 2.0 * q as f64
}

/// Recomputes `ξ` after the shifts `μ → μ + 2u`, `ν → ν + 2v`,
/// `q → q − (p+1)u + p·v` and returns the absolute difference.
pub fn reindex_discrepancy(mu: Complex, nu: Complex, p: i64, q: i64, u_shift: i64, v_shift: i64) -> f64 {
    let mu2 = mu + 2.0 * u_shift as f64;
    let nu2 = nu + 2.0 * v_shift as f64;
    let q2 = q - (p + 1) * u_shift + p * v_shift;
    (predict_limit(mu2, nu2, p, q2) - predict_limit(mu, nu, p, q)).norm()
}

/// Re-indexing leaves `ξ` unchanged to `1e-14` relative.
pub fn reindex_invariance_check(mu: Complex, nu: Complex, p: i64, q: i64, u_shift: i64, v_shift: i64) -> bool {
    let scale = predict_limit(mu, nu, p, q).norm().max(1.0);
    reindex_discrepancy(mu, nu, p, q, u_shift, v_shift) <= 1e-14 * scale
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Approach {
    Horocyclic,
    Tangential,
    Mixed,
}

fn im_of(p: RiemannPoint) -> f64 {
    match p {
        RiemannPoint::Infinity => f64::INFINITY,
        RiemannPoint::Finite(z) => z.im,
    }
}

fn abs_of(p: RiemannPoint) -> f64 {
    match p {
        RiemannPoint::Infinity => f64::INFINITY,
        RiemannPoint::Finite(z) => z.norm(),
    }
}

/// Minimum number of samples for [`classify_boundary_approach`].
pub const MIN_SAMPLES: usize = 8;

/// Decides how sampled points approach `∞` from the behaviour of the last
/// quarter against the first quarter.
///
/// * converging to `∞`: the last quarter's smallest modulus is at least twice
///   the first quarter's largest (or all points are `∞`);
/// * horocyclic: the same doubling holds for `Im`;
/// * tangential: `Im` over the second half stays within 10% of its maximum
///   over the first half;
/// * mixed otherwise.
pub fn classify_boundary_approach(seq: &[RiemannPoint]) -> Result<Approach, LimitError> {
    if seq.len() < MIN_SAMPLES {
        return Err(LimitError::InvalidSequence(format!("need at least {MIN_SAMPLES} samples")));
    }
    let n = seq.len();
    let quarter = n / 4;
    let first = &seq[..quarter];
    let last = &seq[n - quarter..];
    let max_of =
        |s: &[RiemannPoint], f: fn(RiemannPoint) -> f64| s.iter().map(|&p| f(p)).fold(f64::NEG_INFINITY, f64::max);
    let min_of = |s: &[RiemannPoint], f: fn(RiemannPoint) -> f64| s.iter().map(|&p| f(p)).fold(f64::INFINITY, f64::min);

    if seq.iter().all(|p| p.is_infinity()) {
        return Ok(Approach::Horocyclic);
    }
    if seq.iter().any(|&p| im_of(p) < 0.0) {
        return Err(LimitError::InvalidSequence("points must lie in the closed upper half plane".into()));
    }
    if min_of(last, abs_of) < 2.0 * max_of(first, abs_of).max(1.0) {
        return Err(LimitError::NotConvergingToInfinity);
    }
    if min_of(last, im_of) >= 2.0 * max_of(first, im_of).max(1.0) {
        return Ok(Approach::Horocyclic);
    }
    let (head, tail) = seq.split_at(n / 2);
    if max_of(tail, im_of) <= 1.1 * max_of(head, im_of).max(f64::MIN_POSITIVE) {
        return Ok(Approach::Tangential);
    }
    Ok(Approach::Mixed)
}

/// Limit point of `u_n = τ^{k_n} x_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EndPoint {
    /// A rational boundary point, written `"p/q"`.
    Slope(#[serde(with = "slope_str")] FareySlope),
    Point(Complex),
}

mod slope_str {
    use super::FareySlope;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: &FareySlope, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&s.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<FareySlope, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One side `x_n` of the sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SideSpec {
    /// `x_n = τ^{−k_n} u`, i.e. `u − k_n` in the upper half plane.
    TwistOrbit { u: EndPoint, k: IntegerSequenceSpec },
    /// `x_n = start + n·step`.
    Affine { start: Complex, step: Complex },
    /// `x_n ≡ ∞`.
    ConstantInfinity,
    /// The sequence tends to an irrational boundary point.
    Irrational { value: f64 },
    /// Explicit samples, classified numerically.
    Sampled { points: Vec<Complex> },
}

enum SideShape {
    Horocyclic,
    Irrational,
    Twist { u: EndPoint, k: IntegerSequenceSpec },
    Other(&'static str),
}

impl SideSpec {
    fn shape(&self) -> SideShape {
        match self {
            SideSpec::ConstantInfinity => SideShape::Horocyclic,
            SideSpec::Irrational { .. } => SideShape::Irrational,
            SideSpec::TwistOrbit { u, k } => {
                if k.diverges() {
                    SideShape::Twist { u: *u, k: k.clone() }
                } else {
                    SideShape::Other("twist exponents are bounded, so the side does not tend to ∞")
                }
            }
            SideSpec::Affine { start, step } => {
                if step.im > 0.0 {
                    SideShape::Horocyclic
                } else if step.im < 0.0 || start.im < 0.0 {
                    SideShape::Other("affine side leaves the closed upper half plane")
                } else if step.re == 0.0 {
                    SideShape::Other("constant side does not tend to ∞")
                } else if step.re.fract() == 0.0 && step.re.abs() < 9.0e15 {
                    // start + n·s = τ^{−k_n}(start) with k_n = −s·n
                    let k = IntegerSequenceSpec::affine(-(step.re as i64), 0);
                    SideShape::Twist { u: EndPoint::Point(*start), k }
                } else {
                    SideShape::Other("tangential but not a twist orbit of a fixed point")
                }
            }
            SideSpec::Sampled { points } => {
                let pts: Vec<RiemannPoint> = points.iter().map(|&z| RiemannPoint::Finite(z)).collect();
                match classify_boundary_approach(&pts) {
                    Ok(Approach::Horocyclic) => SideShape::Horocyclic,
                    Ok(Approach::Tangential) => SideShape::Other("tangential samples without twist exponents"),
                    Ok(Approach::Mixed) => SideShape::Other("mixed approach"),
                    Err(_) => SideShape::Other("samples do not tend to ∞"),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwistSequenceSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub x: SideSpec,
    pub y: SideSpec,
    /// `m(u_∞)`; computed from the cusp when `u_∞` is rational.
    #[serde(default)]
    pub mu: Option<Complex>,
    /// `m(v_∞)`; computed from the cusp when `v_∞` is rational.
    #[serde(default)]
    pub nu: Option<Complex>,
}

impl TwistSequenceSpec {
    /// `x_n = τ^{pn} x`, `y_n = τ^{(p+1)n} y` with supplied `μ = m(x)`, `ν = m(y)`.
    pub fn anderson_canary(p: i64, x: Complex, y: Complex, mu: Complex, nu: Complex) -> Self {
        TwistSequenceSpec {
            name: Some(format!("anderson-canary p={p}")),
            x: SideSpec::TwistOrbit { u: EndPoint::Point(x), k: IntegerSequenceSpec::affine(-p, 0) },
            y: SideSpec::TwistOrbit { u: EndPoint::Point(y), k: IntegerSequenceSpec::affine(-(p + 1), 0) },
            mu: Some(mu),
            nu: Some(nu),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DivergenceReason {
    /// One side approaches `∞` horocyclically.
    Horocyclic,
    /// Both sides tangential and `(p+1)k_n − p·l_n` diverges for every `p`.
    Tandiv,
    /// The common limit is irrational.
    IrrationalLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ConvergenceVerdict {
    ConvergesStandard,
    /// `xi` is absent when `μ` or `ν` is not known.
    ConvergesExotic {
        p: i64,
        q: i64,
        xi: Option<Complex>,
    },
    Diverges {
        reason: DivergenceReason,
    },
    SplitsBySubsequence,
    Unknown {
        reason: String,
    },
}

impl ConvergenceVerdict {
    pub fn tag(&self) -> &'static str {
        match self {
            ConvergenceVerdict::ConvergesStandard => "converges_standard",
            ConvergenceVerdict::ConvergesExotic { .. } => "converges_exotic",
            ConvergenceVerdict::Diverges { .. } => "diverges",
            ConvergenceVerdict::SplitsBySubsequence => "splits_by_subsequence",
            ConvergenceVerdict::Unknown { .. } => "unknown",
        }
    }
}

fn end_invariant(supplied: Option<Complex>, u: EndPoint) -> Option<Complex> {
    supplied.or(match u {
        EndPoint::Slope(s) => rational_end_invariant(s).ok().map(|c| c.mu),
        EndPoint::Point(_) => None,
    })
}

/// Verdict for the sequence `Q(x_n, y_n)`.
pub fn classify_sequence(spec: &TwistSequenceSpec) -> ConvergenceVerdict {
    let unknown = |r: &str| ConvergenceVerdict::Unknown { reason: r.to_string() };
    let (sx, sy) = (spec.x.shape(), spec.y.shape());
    if matches!(sx, SideShape::Irrational) && matches!(sy, SideShape::Irrational) {
        return ConvergenceVerdict::Diverges { reason: DivergenceReason::IrrationalLimit };
    }
    if matches!(sx, SideShape::Horocyclic) || matches!(sy, SideShape::Horocyclic) {
        return ConvergenceVerdict::Diverges { reason: DivergenceReason::Horocyclic };
    }
    let ((u, k), (v, l)) = match (sx, sy) {
        (SideShape::Twist { u, k }, SideShape::Twist { u: v, k: l }) => ((u, k), (v, l)),
        (SideShape::Other(r), _) | (_, SideShape::Other(r)) => return unknown(r),
        _ => return unknown("sides approach different boundary points"),
    };
    match solve_pq(&k, &l) {
        Some((p, _)) if p == 0 || p == -1 => ConvergenceVerdict::ConvergesStandard,
        Some((p, q)) => {
            let xi = match (end_invariant(spec.mu, u), end_invariant(spec.nu, v)) {
                (Some(mu), Some(nu)) => Some(predict_limit(mu, nu, p, q)),
                _ => None,
            };
            ConvergenceVerdict::ConvergesExotic { p, q, xi }
        }
        None if bounded_residual_exists(&k, &l) => ConvergenceVerdict::SplitsBySubsequence,
        None => ConvergenceVerdict::Diverges { reason: DivergenceReason::Tandiv },
    }
}

/// `2πi/λ − i`, the predicted value of `x − ȳ`.
pub fn pivot_estimate(lambda: Complex) -> Result<Complex, LimitError> {
    if lambda == Complex::new(0.0, 0.0) {
        return Err(LimitError::ZeroMultiplier);
    }
    Ok(Complex::new(0.0, 2.0 * std::f64::consts::PI) / lambda - Complex::new(0.0, 1.0))
}

/// `d_H(2πi/λ, x − ȳ + i)`.
pub fn pivot_distance(lambda: Complex, x: Complex, y: Complex) -> Result<f64, LimitError> {
    let est = pivot_estimate(lambda)? + Complex::new(0.0, 1.0);
    Ok(hyperbolic_distance(est, x - y.conj() + Complex::new(0.0, 1.0))?)
}

/// Whether the second half of `lambdas` lies in the disk `|z − ε| ≤ ε`.
pub fn multiplier_horocyclic_check(lambdas: &[Complex], eps: f64) -> bool {
    let tail = &lambdas[lambdas.len() / 2..];
    !tail.is_empty() && tail.iter().all(|&z| (z - eps).norm() <= eps * (1.0 + 1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn quasi_polynomial_eval() {
        let s = IntegerSequenceSpec::quasi_polynomial(vec![0, 2], vec![1, -1]);
        assert_eq!((0..4).map(|n| s.eval(n)).collect::<Vec<_>>(), vec![1, 1, 5, 5]);
        let t = IntegerSequenceSpec::affine(1, 0).with_head(vec![7, 7]);
        assert_eq!((0..4).map(|n| t.eval(n)).collect::<Vec<_>>(), vec![7, 7, 2, 3]);
        assert_eq!(IntegerSequenceSpec::quasi_polynomial(vec![], vec![3, 3]), IntegerSequenceSpec::affine(0, 3));
    }

    #[test]
    fn solve_pq_examples() {
        assert_eq!(solve_pq(&IntegerSequenceSpec::affine(-3, 0), &IntegerSequenceSpec::affine(-4, 0)), Some((3, 0)));
        assert_eq!(solve_pq(&IntegerSequenceSpec::affine(2, 1), &IntegerSequenceSpec::affine(3, 5)), Some((2, 7)));
        assert_eq!(solve_pq(&IntegerSequenceSpec::affine(1, 0), &IntegerSequenceSpec::affine(1, 0)), None);
        assert_eq!(solve_pq(&IntegerSequenceSpec::affine(1, 0), &IntegerSequenceSpec::affine(3, 0)), None);
    }

    #[test]
    fn solve_pq_sees_the_head_only_through_the_tail() {
        let k = IntegerSequenceSpec::affine(-2, 0).with_head(vec![100, -100]);
        assert_eq!(solve_pq(&k, &IntegerSequenceSpec::affine(-3, 0)), Some((2, 0)));
    }

    #[test]
    fn predict_limit_examples() {
        let (mu, nu) = (c(0.3, 2.1), c(-0.7, 1.9));
        assert_eq!(predict_limit(mu, nu, 1, 0), 2.0 * mu - nu.conj());
        assert_eq!(predict_limit(mu, nu, 0, 0), mu);
        assert_eq!(predict_limit(c(0.0, 2.0), c(0.0, 2.0), 2, 1), c(2.0, 10.0));
        assert!(reindex_invariance_check(mu, nu, 3, -2, 1, 0));
        assert!(reindex_invariance_check(mu, nu, 3, -2, 0, 0));
    }

    #[test]
    fn boundary_approach_examples() {
        let horo: Vec<RiemannPoint> = (1..=64).map(|n| RiemannPoint::Finite(c(n as f64, n as f64))).collect();
        assert_eq!(classify_boundary_approach(&horo), Ok(Approach::Horocyclic));
        let tan: Vec<RiemannPoint> = (1..=64).map(|n| RiemannPoint::Finite(c(n as f64, 1.0))).collect();
        assert_eq!(classify_boundary_approach(&tan), Ok(Approach::Tangential));
        let inf = vec![RiemannPoint::Infinity; 8];
        assert_eq!(classify_boundary_approach(&inf), Ok(Approach::Horocyclic));
        let bounded: Vec<RiemannPoint> = (1..=64).map(|n| RiemannPoint::Finite(c(1.0 / n as f64, 1.0))).collect();
        assert_eq!(classify_boundary_approach(&bounded), Err(LimitError::NotConvergingToInfinity));
    }

    #[test]
    fn classifier_examples() {
        let (mu, nu) = (c(0.2, 2.5), c(-0.4, 3.0));
        let ac = TwistSequenceSpec::anderson_canary(3, c(0.0, 1.0), c(0.5, 2.0), mu, nu);
        assert_eq!(
            classify_sequence(&ac),
            ConvergenceVerdict::ConvergesExotic { p: 3, q: 0, xi: Some(4.0 * mu - 3.0 * nu.conj()) }
        );
        let horo = TwistSequenceSpec {
            name: None,
            x: SideSpec::Affine { start: c(0.0, 0.0), step: c(1.0, 1.0) },
            y: SideSpec::TwistOrbit { u: EndPoint::Point(c(0.0, 1.0)), k: IntegerSequenceSpec::affine(-1, 0) },
            mu: None,
            nu: None,
        };
        assert_eq!(classify_sequence(&horo), ConvergenceVerdict::Diverges { reason: DivergenceReason::Horocyclic });
        let twist = |k, l| TwistSequenceSpec {
            name: None,
            x: SideSpec::TwistOrbit { u: EndPoint::Point(c(0.0, 1.0)), k },
            y: SideSpec::TwistOrbit { u: EndPoint::Point(c(0.0, 2.0)), k: l },
            mu: None,
            nu: None,
        };
        let sq = twist(IntegerSequenceSpec::affine(1, 0), IntegerSequenceSpec::polynomial(vec![0, 0, 1]));
        assert_eq!(classify_sequence(&sq), ConvergenceVerdict::Diverges { reason: DivergenceReason::Tandiv });
        let osc =
            twist(IntegerSequenceSpec::affine(1, 0), IntegerSequenceSpec::quasi_polynomial(vec![0, 2], vec![1, -1]));
        assert_eq!(classify_sequence(&osc), ConvergenceVerdict::SplitsBySubsequence);
    }

    #[test]
    fn rational_endpoints_use_cusps() {
        let spec = TwistSequenceSpec {
            name: None,
            x: SideSpec::TwistOrbit { u: EndPoint::Slope(FareySlope::ZERO), k: IntegerSequenceSpec::affine(-1, 0) },
            y: SideSpec::TwistOrbit { u: EndPoint::Slope(FareySlope::ZERO), k: IntegerSequenceSpec::affine(-2, 0) },
            mu: None,
            nu: None,
        };
        match classify_sequence(&spec) {
            ConvergenceVerdict::ConvergesExotic { p: 1, q: 0, xi: Some(xi) } => {
                assert!((xi - c(0.0, 6.0)).norm() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pivot_examples() {
        let w = 5.0;
        let lambda = c(0.0, 2.0 * std::f64::consts::PI) / c(w, 1.0);
        assert!(pivot_distance(lambda, c(5.0, 0.0), c(0.0, 0.0)).unwrap().abs() < 1e-12);
        let lambda = c(0.0, -2.0 * std::f64::consts::PI / 100.0);
        assert!((pivot_estimate(lambda).unwrap() - c(-100.0, -1.0)).norm() < 1e-10);
        assert_eq!(pivot_estimate(c(0.0, 0.0)), Err(LimitError::ZeroMultiplier));
    }

    #[test]
    fn horocyclic_multiplier_examples() {
        let real: Vec<Complex> = (1..=100).map(|n| c(1.0 / n as f64, 0.0)).collect();
        assert!(multiplier_horocyclic_check(&real, 0.1));
        let imag: Vec<Complex> = (1..=100).map(|n| c(0.0, 2.0 * std::f64::consts::PI / n as f64)).collect();
        assert!(!multiplier_horocyclic_check(&imag, 0.1));
        assert!(multiplier_horocyclic_check(&[c(0.05, 0.0); 4], 0.1));
    }

    #[test]
    fn spec_round_trips_through_toml() {
        let text = r#"
            mu = [0.0, 2.0]
            [x]
            kind = "twist_orbit"
            u = "0/1"
            k = { affine = [-2, 0] }
            [y]
            kind = "twist_orbit"
            u = [0.5, 1.5]
            k = { poly = [0, 2], periodic = [1, -1] }
        "#;
        let spec: TwistSequenceSpec = toml::from_str(text).unwrap();
        assert_eq!(
            spec.x,
            SideSpec::TwistOrbit { u: EndPoint::Slope(FareySlope::ZERO), k: IntegerSequenceSpec::affine(-2, 0) }
        );
        let back: TwistSequenceSpec = toml::from_str(&toml::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }
}
