//! Projective 2×2 complex matrices acting on the Riemann sphere.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tolerance::{DET_TOL, ENTRY_ZERO_TOL, PARABOLIC_TOL, REAL_TRACE_TOL};
use crate::Complex;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MoebiusError {
    #[error("matrix is singular (det = {0})")]
    Degenerate(Complex),
    #[error("map is not loxodromic (class {0:?})")]
    NotLoxodromic(IsometryClass),
    #[error("identity map has no isolated fixed points")]
    IdentityMap,
    #[error("point {0} is not in the upper half plane")]
    NotInUpperHalfPlane(Complex),
}

/// A point of the Riemann sphere.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum RiemannPoint {
    Finite(Complex),
    Infinity,
}

impl RiemannPoint {
    pub fn finite(self) -> Option<Complex> {
        match self {
            RiemannPoint::Finite(z) => Some(z),
            RiemannPoint::Infinity => None,
        }
    }

    pub fn is_infinity(self) -> bool {
        matches!(self, RiemannPoint::Infinity)
    }

    /// Equality with an absolute tolerance on finite points.
    pub fn approx_eq(self, other: RiemannPoint, tol: f64) -> bool {
        match (self, other) {
            (RiemannPoint::Infinity, RiemannPoint::Infinity) => true,
            (RiemannPoint::Finite(a), RiemannPoint::Finite(b)) => (a - b).norm() <= tol,
            _ => false,
        }
    }
}

impl PartialEq for RiemannPoint {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (RiemannPoint::Infinity, RiemannPoint::Infinity) => true,
            (RiemannPoint::Finite(a), RiemannPoint::Finite(b)) => a == b,
            _ => false,
        }
    }
}

impl From<Complex> for RiemannPoint {
    fn from(z: Complex) -> Self {
        RiemannPoint::Finite(z)
    }
}

impl fmt::Display for RiemannPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RiemannPoint::Finite(z) => write!(f, "{z}"),
            RiemannPoint::Infinity => write!(f, "∞"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IsometryClass {
    Identity,
    Parabolic,
    Elliptic,
    Loxodromic,
}

/// An element of PSL₂(ℂ), stored as a determinant-one representative.
///
/// `M` and `-M` describe the same map; every comparison in this module is
/// projective.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MoebiusMap {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub d: Complex,
}

impl MoebiusMap {
    /// Builds a map from arbitrary non-singular entries, scaling to `det = 1`.
    pub fn new(a: Complex, b: Complex, c: Complex, d: Complex) -> Result<Self, MoebiusError> {
        let det = a * d - b * c;
        let scale = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        if det.norm() <= ENTRY_ZERO_TOL * scale * scale || !det.is_finite() {
            return Err(MoebiusError::Degenerate(det));
        }
        let s = det.sqrt();
        Ok(MoebiusMap { a: a / s, b: b / s, c: c / s, d: d / s })
    }

    /// Wraps entries that are already normalized. Debug builds check the determinant.
    pub fn from_normalized(a: Complex, b: Complex, c: Complex, d: Complex) -> Self {
        let m = MoebiusMap { a, b, c, d };
        debug_assert!(
            (m.det() - 1.0).norm() < 1e-9 * (1.0 + m.max_entry().powi(2)),
            "determinant {} is not 1",
            m.det()
        );
        m
    }

    pub fn identity() -> Self {
        let one = Complex::new(1.0, 0.0);
        let zero = Complex::new(0.0, 0.0);
        MoebiusMap { a: one, b: zero, c: zero, d: one }
    }

    /// `z ↦ z + t`.
    pub fn translation(t: Complex) -> Self {
        let one = Complex::new(1.0, 0.0);
        MoebiusMap { a: one, b: t, c: Complex::new(0.0, 0.0), d: one }
    }

    /// `diag(k, 1/k)`, i.e. `z ↦ k² z`.
    pub fn diagonal(k: Complex) -> Self {
        let zero = Complex::new(0.0, 0.0);
        MoebiusMap { a: k, b: zero, c: zero, d: k.inv() }
    }

    pub fn det(&self) -> Complex {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex {
        self.a + self.d
    }

    pub fn trace_squared(&self) -> Complex {
        let t = self.trace();
        t * t
    }

    fn max_entry(&self) -> f64 {
        self.a.norm().max(self.b.norm()).max(self.c.norm()).max(self.d.norm())
    }

    /// Rescales by `sqrt(det)` to undo rounding drift.
    pub fn renormalized(self) -> Self {
        let det = self.det();
        if (det - 1.0).norm() <= DET_TOL {
            return self;
        }
        let s = det.sqrt();
        MoebiusMap { a: self.a / s, b: self.b / s, c: self.c / s, d: self.d / s }
    }

    /// Matrix product `self · other`, i.e. apply `other` first.
    pub fn compose(&self, other: &MoebiusMap) -> MoebiusMap {
        MoebiusMap {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
        .renormalized()
    }

    pub fn inverse(&self) -> MoebiusMap {
        MoebiusMap { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// `selfⁿ` by repeated squaring; negative exponents use the inverse.
    pub fn pow(&self, n: i64) -> MoebiusMap {
        let mut base = if n < 0 { self.inverse() } else { *self };
        let mut e = n.unsigned_abs();
        let mut acc = MoebiusMap::identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.compose(&base);
            }
        }
        acc
    }

    /// `ABA⁻¹B⁻¹`.
    pub fn commutator(&self, other: &MoebiusMap) -> MoebiusMap {
        self.compose(other).compose(&self.inverse()).compose(&other.inverse())
    }

    pub fn conjugate_by(&self, g: &MoebiusMap) -> MoebiusMap {
        g.compose(self).compose(&g.inverse())
    }

    /// Representative with `Re tr ≥ 0`.
    pub fn sign_normalized(&self) -> MoebiusMap {
        if self.trace().re < 0.0 {
            MoebiusMap { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
        } else {
            *self
        }
    }

    /// Frobenius distance between the closest representatives of the two maps.
    pub fn distance(&self, other: &MoebiusMap) -> f64 {
        let minus = ((self.a - other.a).norm_sqr()
            + (self.b - other.b).norm_sqr()
            + (self.c - other.c).norm_sqr()
            + (self.d - other.d).norm_sqr())
        .sqrt();
        let plus = ((self.a + other.a).norm_sqr()
            + (self.b + other.b).norm_sqr()
            + (self.c + other.c).norm_sqr()
            + (self.d + other.d).norm_sqr())
        .sqrt();
        minus.min(plus)
    }

    pub fn distance_from_identity(&self) -> f64 {
        self.distance(&MoebiusMap::identity())
    }

    pub fn projective_eq(&self, other: &MoebiusMap, tol: f64) -> bool {
        self.distance(other) <= tol
    }

    fn is_zero_entry(&self, z: Complex) -> bool {
        z.norm() <= ENTRY_ZERO_TOL * self.max_entry().max(1.0)
    }

    pub fn apply(&self, p: RiemannPoint) -> RiemannPoint {
        match p {
            RiemannPoint::Infinity => {
                if self.is_zero_entry(self.c) {
                    RiemannPoint::Infinity
                } else {
                    RiemannPoint::Finite(self.a / self.c)
                }
            }
            RiemannPoint::Finite(z) => {
                let den = self.c * z + self.d;
                if den.norm() <= ENTRY_ZERO_TOL * (self.c.norm() * z.norm() + self.d.norm()) {
                    RiemannPoint::Infinity
                } else {
                    RiemannPoint::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// `g'(z) = (cz + d)⁻²`; `None` at the pole.
    pub fn derivative_at(&self, z: Complex) -> Option<Complex> {
        let den = self.c * z + self.d;
        if den.norm() == 0.0 {
            None
        } else {
            Some((den * den).inv())
        }
    }

    pub fn classify(&self, tol: f64) -> IsometryClass {
        let t2 = self.trace_squared();
        if (t2 - 4.0).norm() < tol {
            let off = self.b.norm().max(self.c.norm()).max((self.a - self.d).norm());
            if off < tol {
                IsometryClass::Identity
            } else {
                IsometryClass::Parabolic
            }
        } else if t2.im.abs() < REAL_TRACE_TOL.max(tol) && t2.re >= 0.0 && t2.re < 4.0 {
            IsometryClass::Elliptic
        } else {
            IsometryClass::Loxodromic
        }
    }

    /// Classification with the crate-wide parabolic tolerance.
    pub fn class(&self) -> IsometryClass {
        self.classify(PARABOLIC_TOL)
    }

    /// Roots of `cz² + (d − a)z − b = 0` on the sphere; one point for parabolics.
    pub fn fixed_points(&self) -> Result<Vec<RiemannPoint>, MoebiusError> {
        let class = self.class();
        if class == IsometryClass::Identity {
            return Err(MoebiusError::IdentityMap);
        }
        let parabolic = class == IsometryClass::Parabolic;
        if self.is_zero_entry(self.c) {
            let diff = self.d - self.a;
            if parabolic || self.is_zero_entry(diff) {
                return Ok(vec![RiemannPoint::Infinity]);
            }
            return Ok(vec![RiemannPoint::Finite(self.b / diff), RiemannPoint::Infinity]);
        }
        let two_c = self.c * 2.0;
        let amd = self.a - self.d;
        if parabolic {
            return Ok(vec![RiemannPoint::Finite(amd / two_c)]);
        }
        let disc = (self.trace_squared() - 4.0).sqrt();
        Ok(vec![RiemannPoint::Finite((amd - disc) / two_c), RiemannPoint::Finite((amd + disc) / two_c)])
    }

    /// Eigenvalue `k` of largest modulus; `k²` is the derivative at the repelling point.
    fn dominant_eigenvalue(&self) -> Complex {
        let t = self.trace();
        let s = (t * t - 4.0).sqrt();
        let k1 = (t + s) / 2.0;
        let k2 = (t - s) / 2.0;
        if k1.norm() >= k2.norm() {
            k1
        } else {
            k2
        }
    }

    /// `λ = l + iθ`, the log of the derivative at the repelling fixed point,
    /// with `l > 0` and `θ ∈ (−π, π]`.
    pub fn complex_translation_length(&self) -> Result<Complex, MoebiusError> {
        match self.class() {
            IsometryClass::Loxodromic => {}
            other => return Err(MoebiusError::NotLoxodromic(other)),
        }
        let k = self.dominant_eigenvalue();
        let lam = (k * k).ln();
        let mut theta = lam.im;
        if theta <= -PI {
            theta += 2.0 * PI;
        }
        Ok(Complex::new(lam.re, theta))
    }

    /// Multiplier `k²` read off the eigenvalue ratio.
    pub fn multiplier(&self) -> Complex {
        let k = self.dominant_eigenvalue();
        k / k.inv()
    }
}

impl Mul for MoebiusMap {
    type Output = MoebiusMap;

    fn mul(self, rhs: MoebiusMap) -> MoebiusMap {
        self.compose(&rhs)
    }
}

impl Mul for &MoebiusMap {
    type Output = MoebiusMap;

    fn mul(self, rhs: &MoebiusMap) -> MoebiusMap {
        self.compose(rhs)
    }
}

impl fmt::Display for MoebiusMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// `compose` as a free function.
pub fn compose(f: &MoebiusMap, g: &MoebiusMap) -> MoebiusMap {
    f.compose(g)
}

/// Hyperbolic distance in the upper half plane.
pub fn hyperbolic_distance(z: Complex, w: Complex) -> Result<f64, MoebiusError> {
    if !(z.im > 0.0) {
        return Err(MoebiusError::NotInUpperHalfPlane(z));
    }
    if !(w.im > 0.0) {
        return Err(MoebiusError::NotInUpperHalfPlane(w));
    }
    // 2 asinh(|z-w| / (2 sqrt(Im z Im w))) == acosh(1 + |z-w|²/(2 Im z Im w)),
    // without the cancellation near zero.
    let half = (z - w).norm() / (2.0 * (z.im * w.im).sqrt());
    Ok(2.0 * half.asinh())
}
