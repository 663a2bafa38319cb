//! Power limits of loxodromic maps and geometric convergence of the cyclic
//! groups they generate.
//!
//! The model family is `A_m(z) = e^{λ}z + 2` with `λ = (2πi + πi·w/m)/m`.
//! Its `m`-th power is `e^{mλ}z + 2(e^{mλ} − 1)/(e^{λ} − 1)`, which tends to
//! the translation `T_w` while `A_m` itself tends to `T₂`; so `⟨A_m⟩`
//! accumulates on the rank-2 lattice `⟨T₂, T_w⟩`.
//!
//! Distances between maps are Frobenius distances minimised over the sign of
//! the `SL₂` representative; for a translation `T_s` the distance from the
//! identity is `|s|`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::limit::IntegerSequenceSpec;
use crate::maskit::{t2, u_map};
use crate::moebius::MoebiusMap;
use crate::tolerance::PARABOLIC_TOL;
use crate::Complex;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("target translation w must be nonzero")]
    DegenerateTarget,
    #[error("power m_n = {0} must be positive")]
    NonPositivePower(i128),
    #[error("generators do not commute")]
    NonCommuting,
    #[error("generator is not a parabolic fixing ∞")]
    NotParabolic,
    #[error("translations are linearly dependent over ℝ")]
    RankDeficient,
    #[error("snapshots have different radii ({0} vs {1})")]
    RadiusMismatch(f64, f64),
}

fn translation(s: Complex) -> MoebiusMap {
    MoebiusMap::translation(s)
}

/// `Γ̂ = ⟨T₂, U_μ, U_ν̄⟩` with its rank-2 cusp `⟨T₂, T_{μ−ν̄}⟩`.
#[derive(Debug, Clone, Copy)]
pub struct DrilledGroup {
    pub generators: [MoebiusMap; 3],
    pub cusp: (MoebiusMap, MoebiusMap),
}

impl DrilledGroup {
    /// `U_μ·U_ν̄⁻¹`, which equals the second cusp generator.
    pub fn cusp_product(&self) -> MoebiusMap {
        self.generators[1] * self.generators[2].inverse()
    }
}

pub fn drilled_group(mu: Complex, nu: Complex) -> DrilledGroup {
    DrilledGroup { generators: [t2(), u_map(mu), u_map(nu.conj())], cusp: (t2(), translation(mu - nu.conj())) }
}

/// `e^z − 1` without cancellation for small `z`.
fn expm1(z: Complex) -> Complex {
    let half_sin = (z.im / 2.0).sin();
    let cos_m1 = -2.0 * half_sin * half_sin;
    Complex::new(z.re.exp_m1() * z.im.cos() + cos_m1, z.re.exp() * z.im.sin())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticFamily {
    pub w: Complex,
    pub m: IntegerSequenceSpec,
}

impl SyntheticFamily {
    pub fn new(w: Complex, m: IntegerSequenceSpec) -> Result<Self, GeomError> {
        if w == Complex::new(0.0, 0.0) {
            return Err(GeomError::DegenerateTarget);
        }
        Ok(SyntheticFamily { w, m })
    }

    /// Family indexed by an explicit list of powers.
    pub fn from_powers(w: Complex, powers: &[i64]) -> Result<Self, GeomError> {
        Self::new(w, IntegerSequenceSpec::polynomial(vec![]).with_head(powers.to_vec()))
    }

    pub fn power(&self, n: u64) -> Result<i64, GeomError> {
        let m = self.m.eval(n);
        if m <= 0 || m > i64::MAX as i128 {
            return Err(GeomError::NonPositivePower(m));
        }
        Ok(m as i64)
    }

    /// `λ = (2πi + πi·w/m)/m`.
    pub fn multiplier(&self, m: i64) -> Complex {
        let pi_i = Complex::new(0.0, std::f64::consts::PI);
        let m = m as f64;
        (2.0 * pi_i + pi_i * self.w / m) / m
    }

    /// `[[e^{λ/2}, 2e^{−λ/2}], [0, e^{−λ/2}]]`.
    pub fn member(&self, m: i64) -> MoebiusMap {
        let h = (self.multiplier(m) / 2.0).exp();
        let zero = Complex::new(0.0, 0.0);
        MoebiusMap::from_normalized(h, 2.0 / h, zero, 1.0 / h)
    }

    /// `jλ` reduced by the multiple of `2πi` hidden in `j·2πi/m`, with the
    /// parity of that multiple.
    fn reduced_log(&self, m: i64, j: i64) -> (Complex, bool) {
        let (q, r) = (j.div_euclid(m), j.rem_euclid(m));
        let pi_i = Complex::new(0.0, std::f64::consts::PI);
        let mf = m as f64;
        let arg = (2.0 * pi_i * r as f64 + pi_i * self.w * (j as f64 / mf)) / mf;
        (arg, q.rem_euclid(2) == 1)
    }

    /// `e^{jλ}`.
    fn exp_multiple(&self, m: i64, j: i64) -> Complex {
        self.reduced_log(m, j).0.exp()
    }

    /// Matrix of the map `z ↦ e^{jλ}z + shift` with diagonal `±e^{±jλ/2}`.
    fn affine_matrix(&self, m: i64, j: i64, shift: Complex) -> MoebiusMap {
        let (arg, odd) = self.reduced_log(m, j);
        let half = if odd { -(arg / 2.0).exp() } else { (arg / 2.0).exp() };
        MoebiusMap::from_normalized(half, shift / half, Complex::new(0.0, 0.0), 1.0 / half)
    }

    /// `A^j` from the closed form `e^{jλ}z + 2(e^{jλ} − 1)/(e^{λ} − 1)`.
    pub fn closed_form_power(&self, m: i64, j: i64) -> MoebiusMap {
        let shift = 2.0 * expm1(self.reduced_log(m, j).0) / expm1(self.multiplier(m));
        self.affine_matrix(m, j, shift)
    }

    /// `A^j` by repeated squaring on the pair `(exponent, translation)`.
    ///
    /// Squaring the matrix of `A` loses about `j²·ε`, because the translation
    /// of `A^j` is ill-conditioned in the rounded entries; carrying the
    /// exponent as an integer keeps every multiplier exact to `ε`.
    pub fn power_by_squaring(&self, m: i64, j: i64) -> MoebiusMap {
        let sign = j.signum();
        // A⁻¹(z) = e^{−λ}z − 2e^{−λ}
        let (mut base_count, mut base_shift) =
            if sign < 0 { (-1i64, -2.0 * self.exp_multiple(m, -1)) } else { (1i64, Complex::new(2.0, 0.0)) };
        let (mut acc_count, mut acc_shift) = (0i64, Complex::new(0.0, 0.0));
        let mut e = j.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                // acc ∘ base
                acc_shift += self.exp_multiple(m, acc_count) * base_shift;
                acc_count += base_count;
            }
            e >>= 1;
            if e > 0 {
                base_shift *= self.exp_multiple(m, base_count) + 1.0;
                base_count *= 2;
            }
        }
        self.affine_matrix(m, j, acc_shift)
    }

    pub fn target(&self) -> MoebiusMap {
        translation(self.w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLimitRow {
    pub n: u64,
    pub m: i64,
    /// `‖A^m − T_w‖`.
    pub residual: f64,
    /// Gap between repeated squaring and the closed form.
    pub closed_form_gap: f64,
}

pub fn power_limit_check(fam: &SyntheticFamily, n_list: &[u64]) -> Result<Vec<PowerLimitRow>, GeomError> {
    n_list
        .par_iter()
        .map(|&n| {
            let m = fam.power(n)?;
            let pw = fam.power_by_squaring(m, m);
            Ok(PowerLimitRow {
                n,
                m,
                residual: pw.distance(&fam.target()),
                closed_form_gap: pw.distance(&fam.closed_form_power(m, m)),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BallLabel {
    /// `δ̂^a δ^b`.
    Lattice { a: i64, b: i64 },
    /// `A^j`.
    Power { j: i64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupBallSnapshot {
    pub radius: f64,
    pub elements: Vec<(MoebiusMap, BallLabel)>,
}

fn translation_part(g: &MoebiusMap) -> Result<Complex, GeomError> {
    let tol = PARABOLIC_TOL * (1.0 + g.b.norm());
    let fixes_infinity = g.c.norm() <= tol;
    let unipotent = (g.a - g.d).norm() <= tol && (g.a * g.a - 1.0).norm() <= tol;
    if !fixes_infinity || !unipotent {
        return Err(GeomError::NotParabolic);
    }
    Ok(g.b / g.d)
}

/// Elements `δ̂^a δ^b` with distance from the identity at most `radius`,
/// restricted to `|a|, |b| ≤ index_bound` when given.
pub fn lattice_ball(
    delta: &MoebiusMap,
    delta_hat: &MoebiusMap,
    radius: f64,
    index_bound: Option<i64>,
) -> Result<GroupBallSnapshot, GeomError> {
    let t = translation_part(delta)?;
    let t_hat = translation_part(delta_hat)?;
    if !delta.commutator(delta_hat).projective_eq(&MoebiusMap::identity(), 1e-9) {
        return Err(GeomError::NonCommuting);
    }
    let area = (t_hat * t.conj()).im.abs();
    if area <= 1e-12 * t.norm() * t_hat.norm() {
        return Err(GeomError::RankDeficient);
    }
    // |a t̂ + b t| ≥ |a|·area/|t| and likewise for b.
    let cap = |len: f64| (radius.max(0.0) * len / area).floor() as i64;
    let mut a_max = cap(t.norm());
    let mut b_max = cap(t_hat.norm());
    if let Some(k) = index_bound {
        a_max = a_max.min(k);
        b_max = b_max.min(k);
    }
    let mut elements = Vec::new();
    for a in -a_max..=a_max {
        for b in -b_max..=b_max {
            let g = translation(a as f64 * t_hat + b as f64 * t);
            if g.distance_from_identity() <= radius {
                elements.push((g, BallLabel::Lattice { a, b }));
            }
        }
    }
    Ok(GroupBallSnapshot { radius, elements })
}

fn one_sided(from: &GroupBallSnapshot, to: &GroupBallSnapshot) -> f64 {
    from.elements
        .iter()
        .map(|(g, _)| to.elements.iter().map(|(h, _)| g.distance(h)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Symmetric max–min distance between two element lists of equal radius.
pub fn hausdorff_distance_ball(s1: &GroupBallSnapshot, s2: &GroupBallSnapshot) -> Result<f64, GeomError> {
    if s1.radius != s2.radius {
        return Err(GeomError::RadiusMismatch(s1.radius, s2.radius));
    }
    if s1.elements.is_empty() && s2.elements.is_empty() {
        return Ok(0.0);
    }
    Ok(one_sided(s1, s2).max(one_sided(s2, s1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LimitTarget {
    /// `⟨T₂, T_w⟩`.
    RankTwo,
    /// `⟨T₂⟩` alone.
    RankOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeomCheckOptions {
    pub radius: f64,
    /// Lattice indices probed by the first condition.
    pub index_bound: Option<i64>,
    /// Half-width of the exponent window around `a·m + b`.
    pub window: i64,
    pub target: LimitTarget,
}

impl GeomCheckOptions {
    /// Ball covering `|a|, |b| ≤ k` for the lattice `⟨T₂, T_w⟩`.
    pub fn covering(w: Complex, k: i64) -> Self {
        let radius = (k as f64 * w.norm() + 2.0 * k as f64) * (1.0 + 1e-9);
        GeomCheckOptions { radius, index_bound: Some(k), window: 2, target: LimitTarget::RankTwo }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeomRow {
    pub n: u64,
    pub m: i64,
    /// Worst distance from a target element to the closest power (first condition).
    pub sup_residual: f64,
    /// Worst distance from a power inside the ball to the target (second condition).
    pub spurious_margin: f64,
    /// The exponent window had to be widened.
    pub widened: bool,
}

/// Per-row shrink factor required for [`Trend::Decreasing`].
pub const TREND_FACTOR: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trend {
    /// Both quantities at least halve at every step.
    Decreasing,
    NotDecreasing,
    /// Fewer than two rows.
    Insufficient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeomConvergenceReport {
    pub rows: Vec<GeomRow>,
    pub trend: Trend,
}

impl GeomConvergenceReport {
    pub fn both_conditions_trend_to_zero(&self) -> bool {
        self.trend == Trend::Decreasing
    }
}

fn target_ball(
    fam: &SyntheticFamily,
    radius: f64,
    index_bound: Option<i64>,
    target: LimitTarget,
) -> Result<GroupBallSnapshot, GeomError> {
    match target {
        LimitTarget::RankTwo => lattice_ball(&t2(), &fam.target(), radius, index_bound),
        LimitTarget::RankOne => {
            let b_max = (radius / 2.0).floor() as i64;
            let b_max = index_bound.map_or(b_max, |k| b_max.min(k));
            let elements = (-b_max..=b_max)
                .map(|b| (translation(Complex::new(2.0 * b as f64, 0.0)), BallLabel::Lattice { a: 0, b }))
                .collect();
            Ok(GroupBallSnapshot { radius, elements })
        }
    }
}

fn nearest(g: &MoebiusMap, ball: &GroupBallSnapshot) -> f64 {
    ball.elements.iter().map(|(h, _)| g.distance(h)).fold(f64::INFINITY, f64::min)
}

fn check_one(fam: &SyntheticFamily, n: u64, opts: &GeomCheckOptions) -> Result<GeomRow, GeomError> {
    let m = fam.power(n)?;
    let probe = target_ball(fam, opts.radius, opts.index_bound, opts.target)?;
    let enlarged = target_ball(fam, opts.radius + 1.0, None, opts.target)?;

    let mut sup_residual: f64 = 0.0;
    let mut widened = false;
    for (g, label) in &probe.elements {
        let BallLabel::Lattice { a, b } = *label else { continue };
        let centre = a * m + b;
        let best_in = |half: i64| {
            (centre - half..=centre + half)
                .map(|j| (j, fam.closed_form_power(m, j).distance(g)))
                .fold((centre, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc })
        };
        let (mut j, mut d) = best_in(opts.window);
        if (j - centre).abs() == opts.window {
            widened = true;
            (j, d) = best_in(opts.window * 8);
        }
        let _ = j;
        sup_residual = sup_residual.max(d);
    }

    // Every power in the ball lies within (a_max + 1)·m of the identity exponent.
    let t_norm = fam.w.norm().max(2.0);
    let span = ((opts.radius + 1.0) / t_norm.min(2.0)).ceil() as i64 + 1;
    let j_max = span * m + span;
    let step = fam.member(m);
    let mut spurious_margin: f64 = 0.0;
    let mut walk = |gen: MoebiusMap| {
        let mut g = MoebiusMap::identity();
        for j in 1..=j_max {
            g = g * gen;
            if j % 4096 == 0 {
                g = g.renormalized();
            }
            if g.distance_from_identity() <= opts.radius {
                spurious_margin = spurious_margin.max(nearest(&g, &enlarged));
            }
        }
    };
    walk(step);
    walk(step.inverse());
    Ok(GeomRow { n, m, sup_residual, spurious_margin, widened })
}

/// Both Hausdorff conditions for `⟨A_{m_n}⟩` against the target lattice.
pub fn cyclic_geom_limit_check(
    fam: &SyntheticFamily,
    n_list: &[u64],
    opts: &GeomCheckOptions,
) -> Result<GeomConvergenceReport, GeomError> {
    let rows: Vec<GeomRow> = n_list.par_iter().map(|&n| check_one(fam, n, opts)).collect::<Result<_, _>>()?;
    let trend = if rows.len() < 2 {
        Trend::Insufficient
    } else if rows.windows(2).all(|w| {
        w[1].sup_residual <= TREND_FACTOR * w[0].sup_residual
            && w[1].spurious_margin <= TREND_FACTOR * w[0].spurious_margin
    }) {
        Trend::Decreasing
    } else {
        Trend::NotDecreasing
    };
    Ok(GeomConvergenceReport { rows, trend })
}

/// Whether every member is loxodromic, read off `Re λ ≠ 0`. The trace test
/// cannot see this once `|λ|²` drops below the parabolic tolerance.
pub fn members_loxodromic(fam: &SyntheticFamily, n_list: &[u64]) -> Result<bool, GeomError> {
    for &n in n_list {
        if fam.multiplier(fam.power(n)?).re == 0.0 {
            return Ok(false);
        }
    }
    Ok(true)
}
