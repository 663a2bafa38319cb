//! Finite parameter clouds for `M(p) = {(p+1)μ − pν̄ | μ, ν ∈ M}`, for the
//! two-branch geometric limit of Bers slices, and the slope charts that label
//! the bumping sets `B_y(1)`.
//!
//! A cloud is a sample with provenance, never the full set.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::farey::FareySlope;
use crate::limit::predict_limit;
use crate::maskit::{membership, Membership};
use crate::Complex;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SliceError {
    #[error("expected a cloud tagged {expected}, found {found}")]
    WrongTag { expected: &'static str, found: String },
    #[error("p must be nonnegative (got {0})")]
    NegativeP(i64),
    #[error("p must be at least 2 (got {0})")]
    PTooSmall(i64),
    #[error("sample {index} at {z} is outside the Maskit slice")]
    OutsideSample { index: usize, z: Complex },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionTag {
    M,
    MStar,
    Mp { p: i64 },
    BersGeom { nu: Complex },
    BumpSet { y: FareySlope },
}

impl std::fmt::Display for RegionTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegionTag::M => write!(f, "M"),
            RegionTag::MStar => write!(f, "M*"),
            RegionTag::Mp { p } => write!(f, "M({p})"),
            RegionTag::BersGeom { nu } => write!(f, "B_G(nu={nu})"),
            RegionTag::BumpSet { y } => write!(f, "B_{y}(1)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// A point of `M`.
    Slice,
    /// A point of `M* + 2ν̄`.
    Shifted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CloudPoint {
    pub z: Complex,
    /// Index of `μ` in the source samples.
    pub mu_index: Option<usize>,
    /// Index of `ν` in the source samples.
    pub nu_index: Option<usize>,
    pub branch: Option<Branch>,
}

impl CloudPoint {
    pub fn sample(z: Complex, index: usize) -> Self {
        CloudPoint { z, mu_index: Some(index), nu_index: None, branch: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionCloud {
    pub tag: RegionTag,
    pub points: Vec<CloudPoint>,
}

impl RegionCloud {
    /// Samples of `M` that membership does not rule out.
    pub fn from_samples(points: &[Complex], depth: usize) -> Result<Self, SliceError> {
        let verdicts: Vec<Membership> = points.par_iter().map(|&z| membership(z, depth)).collect();
        if let Some(index) = verdicts.iter().position(|&v| v == Membership::Outside) {
            return Err(SliceError::OutsideSample { index, z: points[index] });
        }
        Ok(Self::trusted_samples(points))
    }

    /// Samples of `M` accepted without a membership check.
    pub fn trusted_samples(points: &[Complex]) -> Self {
        RegionCloud {
            tag: RegionTag::M,
            points: points.iter().enumerate().map(|(i, &z)| CloudPoint::sample(z, i)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn min_im(&self) -> f64 {
        self.points.iter().map(|p| p.z.im).fold(f64::INFINITY, f64::min)
    }

    fn values(&self) -> Vec<Complex> {
        self.points.iter().map(|p| p.z).collect()
    }

    fn require_m(&self) -> Result<(), SliceError> {
        match self.tag {
            RegionTag::M => Ok(()),
            other => Err(SliceError::WrongTag { expected: "M", found: other.to_string() }),
        }
    }
}

/// Grid of `nx × ny` points over `0 ≤ Re μ < 2`, `im_lo ≤ Im μ ≤ im_hi`,
/// keeping those classified `Inside`.
pub fn interior_grid(nx: usize, ny: usize, im_lo: f64, im_hi: f64, depth: usize) -> RegionCloud {
    let grid: Vec<Complex> = (0..ny)
        .flat_map(|j| {
            (0..nx).map(move |i| {
                let t = if ny > 1 { j as f64 / (ny - 1) as f64 } else { 0.0 };
                Complex::new(2.0 * i as f64 / nx as f64, im_lo + t * (im_hi - im_lo))
            })
        })
        .collect();
    let keep: Vec<bool> = grid.par_iter().map(|&z| membership(z, depth) == Membership::Inside).collect();
    let inside: Vec<Complex> = grid.into_iter().zip(keep).filter_map(|(z, k)| k.then_some(z)).collect();
    RegionCloud::trusted_samples(&inside)
}

/// All combinations `(p+1)μ − pν̄` over ordered pairs of samples.
pub fn bump_set(p: i64, samples: &RegionCloud) -> Result<RegionCloud, SliceError> {
    samples.require_m()?;
    if p < 0 {
        return Err(SliceError::NegativeP(p));
    }
    if p == 0 {
        return Ok(RegionCloud { tag: RegionTag::Mp { p }, points: samples.points.clone() });
    }
    let z = samples.values();
    let points = (0..z.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let z = &z;
            (0..z.len()).map(move |j| CloudPoint {
                z: predict_limit(z[i], z[j], p, 0),
                mu_index: Some(i),
                nu_index: Some(j),
                branch: None,
            })
        })
        .collect();
    Ok(RegionCloud { tag: RegionTag::Mp { p }, points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsetWitness {
    pub p: i64,
    pub mu_prime: Complex,
    /// `(k+1)ν̄ − kμ` with `k = p − 1`.
    pub nu_bar_prime: Complex,
    /// `(k+1)ν − kμ̄`, which must lie in `M`.
    pub m_side_candidate: Complex,
    pub membership: Membership,
    /// `|(p+1)μ − pν̄ − (2μ' − ν̄')|`.
    pub identity_gap: f64,
}

/// Rewrites a point of `M(p)` as a point `2μ' − ν̄'` of `M(1)`.
pub fn subset_witness(mu: Complex, nu: Complex, p: i64, depth: usize) -> Result<SubsetWitness, SliceError> {
    if p < 2 {
        return Err(SliceError::PTooSmall(p));
    }
    let k = (p - 1) as f64;
    let nu_bar_prime = (k + 1.0) * nu.conj() - k * mu;
    let m_side_candidate = nu_bar_prime.conj();
    let lhs = predict_limit(mu, nu, p, 0);
    let rhs = 2.0 * mu - nu_bar_prime;
    Ok(SubsetWitness {
        p,
        mu_prime: mu,
        nu_bar_prime,
        m_side_candidate,
        membership: membership(m_side_candidate, depth),
        identity_gap: (lhs - rhs).norm(),
    })
}

/// `M ⊔ (M* + 2ν̄)` sampled from `samples`.
pub fn bers_geom_limit_cloud(nu: Complex, samples: &RegionCloud) -> Result<RegionCloud, SliceError> {
    samples.require_m()?;
    let first = samples.points.iter().map(|p| CloudPoint { branch: Some(Branch::Slice), ..*p });
    let second = samples.points.iter().map(|p| CloudPoint {
        z: p.z.conj() + 2.0 * nu.conj(),
        branch: Some(Branch::Shifted),
        ..*p
    });
    Ok(RegionCloud { tag: RegionTag::BersGeom { nu }, points: first.chain(second).collect() })
}

/// Integer matrix `[[p, r], [q, s]]` of determinant 1 sending `1/0` to `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlopeChart {
    pub y: FareySlope,
    pub sigma: [[i64; 2]; 2],
}

impl SlopeChart {
    pub fn det(&self) -> i64 {
        let [[a, b], [c, d]] = self.sigma;
        a * d - b * c
    }

    /// Action on slopes by `x/z ↦ (ax + bz)/(cx + dz)`.
    pub fn act(&self, s: FareySlope) -> FareySlope {
        let [[a, b], [c, d]] = self.sigma;
        FareySlope::new(a * s.p() + b * s.q(), c * s.p() + d * s.q()).expect("unimodular image is a slope")
    }

    /// `σ_y ∘ τᵏ`, another chart for the same slope.
    pub fn twisted(&self, k: i64) -> SlopeChart {
        let [[a, b], [c, d]] = self.sigma;
        SlopeChart { y: self.y, sigma: [[a, a * k + b], [c, c * k + d]] }
    }
}

/// `(g, x, y)` with `a·x + b·y = g = gcd(a, b)`.
fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Canonical chart: the second column is the left Stern–Brocot parent `r/s`
/// of `y = p/q`, i.e. `ps − rq = 1` with `0 ≤ s < q`.
pub fn sigma_chart(y: FareySlope) -> SlopeChart {
    let (p, q) = (y.p(), y.q());
    if q == 0 {
        return SlopeChart { y, sigma: [[1, 0], [0, 1]] };
    }
    // p·s ≡ 1 (mod q)
    let (_, x, _) = ext_gcd(p.rem_euclid(q), q);
    let s = if q == 1 { 0 } else { x.rem_euclid(q) };
    let r = (p * s - 1) / q;
    SlopeChart { y, sigma: [[p, r], [q, s]] }
}

/// The `μ`-plane cloud of `B_y(1)`: `M(1)` relabelled by the chart of `y`.
pub fn bump_boundary_set(y: FareySlope, samples: &RegionCloud) -> Result<(SlopeChart, RegionCloud), SliceError> {
    let cloud = bump_set(1, samples)?;
    Ok((sigma_chart(y), RegionCloud { tag: RegionTag::BumpSet { y }, points: cloud.points }))
}
