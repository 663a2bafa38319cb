//! Farey slopes, the Stern–Brocot descent, and the words attached to slopes.
//!
//! Slope `p/q` names the simple closed curve with homology class
//! `±(−p[α] + q[β])`: `1/0 ↔ α`, `0/1 ↔ β`, `1/1 ↔ α⁻¹β`.
//!
//! Word convention. The tree of Farey triangles is rooted at the edge
//! `(0/1, 1/0)`. Positive slopes descend from the oriented pair `β, α⁻¹`,
//! negative slopes from `α, β`, and every mediant of a left/right pair gets
//! `W(l ⊕ r) = W(r) · W(l)`. With this rule `W(r)⁻¹ W(l)` is always conjugate
//! to the word of the third vertex (or its inverse), which is what makes the
//! trace recursion `t(l ⊕ r) = t(l) t(r) − t(opposite)` exact. Other standard
//! conventions produce conjugate or inverse words; traces do not see the
//! difference.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FareyError {
    #[error("0/0 is not a slope")]
    ZeroOverZero,
    #[error("cannot parse slope {0:?}")]
    Parse(String),
}

/// A reduced fraction `p/q` with `q ≥ 0`; `1/0` is the slope at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "(i64, i64)", into = "(i64, i64)")]
pub struct FareySlope {
    p: i64,
    q: i64,
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl FareySlope {
    pub const INFINITY: FareySlope = FareySlope { p: 1, q: 0 };
    pub const ZERO: FareySlope = FareySlope { p: 0, q: 1 };
    pub const ONE: FareySlope = FareySlope { p: 1, q: 1 };

    /// Reduces `p/q`; signs are moved onto the numerator.
    pub fn new(p: i64, q: i64) -> Result<Self, FareyError> {
        if p == 0 && q == 0 {
            return Err(FareyError::ZeroOverZero);
        }
        if q == 0 {
            return Ok(Self::INFINITY);
        }
        let g = gcd(p, q);
        let (mut p, mut q) = (p / g, q / g);
        if q < 0 {
            p = -p;
            q = -q;
        }
        Ok(FareySlope { p, q })
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn is_infinity(&self) -> bool {
        self.q == 0
    }

    pub fn value(&self) -> f64 {
        if self.q == 0 {
            f64::INFINITY
        } else {
            self.p as f64 / self.q as f64
        }
    }

    /// Image under the Dehn twist `z ↦ z + k`.
    pub fn shifted(&self, k: i64) -> FareySlope {
        if self.is_infinity() {
            *self
        } else {
            FareySlope { p: self.p + k * self.q, q: self.q }
        }
    }

    /// `|ps − qr| = 1`.
    pub fn is_neighbor(&self, other: &FareySlope) -> bool {
        (self.p * other.q - self.q * other.p).abs() == 1
    }

    /// Stern–Brocot steps needed to reach this slope from the root edge.
    pub fn depth(&self) -> usize {
        let mut n = 0;
        descend(*self, |_| n += 1);
        n
    }
}

impl Ord for FareySlope {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.q, other.q) {
            (0, 0) => Ordering::Equal,
            (0, _) => Ordering::Greater,
            (_, 0) => Ordering::Less,
            _ => (self.p * other.q).cmp(&(other.p * self.q)),
        }
    }
}

impl PartialOrd for FareySlope {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FareySlope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for FareySlope {
    type Err = FareyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FareyError::Parse(s.to_string());
        let s = s.trim();
        match s.split_once('/') {
            Some((p, q)) => {
                let p = p.trim().parse().map_err(|_| bad())?;
                let q = q.trim().parse().map_err(|_| bad())?;
                FareySlope::new(p, q)
            }
            None => FareySlope::new(s.parse().map_err(|_| bad())?, 1),
        }
    }
}

impl TryFrom<(i64, i64)> for FareySlope {
    type Error = FareyError;

    fn try_from((p, q): (i64, i64)) -> Result<Self, Self::Error> {
        FareySlope::new(p, q)
    }
}

impl From<FareySlope> for (i64, i64) {
    fn from(s: FareySlope) -> Self {
        (s.p, s.q)
    }
}

/// Vertices of a Farey triangle seen from the edge `(left, right)`:
/// `opposite` is the vertex already visited, the mediant is the next one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FareyTriangle {
    pub left: FareySlope,
    pub right: FareySlope,
    pub opposite: FareySlope,
}

impl FareyTriangle {
    /// Root triangle whose mediant is `1/1`.
    pub const POSITIVE_ROOT: FareyTriangle =
        FareyTriangle { left: FareySlope::ZERO, right: FareySlope::INFINITY, opposite: FareySlope { p: -1, q: 1 } };

    /// Root triangle whose mediant is `-1/1`; its left vertex is `-1/0 = 1/0`.
    pub const NEGATIVE_ROOT: FareyTriangle =
        FareyTriangle { left: FareySlope::INFINITY, right: FareySlope::ZERO, opposite: FareySlope::ONE };

    fn signed_num(s: FareySlope, negative_side: bool) -> i64 {
        if s.is_infinity() && negative_side {
            -1
        } else {
            s.p
        }
    }

    pub fn mediant(&self) -> FareySlope {
        // a left vertex at infinity only occurs on the negative side, as -1/0
        let lp = Self::signed_num(self.left, self.left.is_infinity());
        FareySlope { p: lp + self.right.p, q: self.left.q + self.right.q }
    }

    pub fn left_child(&self) -> FareyTriangle {
        FareyTriangle { left: self.left, right: self.mediant(), opposite: self.right }
    }

    pub fn right_child(&self) -> FareyTriangle {
        FareyTriangle { left: self.mediant(), right: self.right, opposite: self.left }
    }
}

/// Walks the Stern–Brocot tree towards `target`, calling `visit` on every
/// triangle whose mediant is generated on the way (the last one has the
/// target as mediant). Base slopes `1/0`, `0/1` visit nothing.
pub fn descend(target: FareySlope, mut visit: impl FnMut(&FareyTriangle)) {
    if target.is_infinity() || target == FareySlope::ZERO {
        return;
    }
    let mut tri = if target.p > 0 { FareyTriangle::POSITIVE_ROOT } else { FareyTriangle::NEGATIVE_ROOT };
    loop {
        visit(&tri);
        let m = tri.mediant();
        match target.cmp(&m) {
            Ordering::Equal => return,
            Ordering::Less => tri = tri.left_child(),
            Ordering::Greater => tri = tri.right_child(),
        }
    }
}

/// Values carried through the Farey vertex relation.
pub trait VertexValue: Copy {
    /// Value at the mediant given the two edge vertices and the opposite one.
    fn vertex(left: Self, right: Self, opposite: Self) -> Self;
}

/// Evaluates a vertex-relation quantity at `target` from its values on the
/// three base slopes `1/0`, `0/1`, `1/1`.
pub fn evaluate<T: VertexValue>(target: FareySlope, at_inf: T, at_zero: T, at_one: T) -> T {
    if target.is_infinity() {
        return at_inf;
    }
    if target == FareySlope::ZERO {
        return at_zero;
    }
    if target == FareySlope::ONE {
        return at_one;
    }
    let at_minus_one = T::vertex(at_inf, at_zero, at_one);
    let (mut left, mut right, mut opp, mut tri) = if target.p > 0 {
        (at_zero, at_inf, at_minus_one, FareyTriangle::POSITIVE_ROOT)
    } else {
        (at_inf, at_zero, at_one, FareyTriangle::NEGATIVE_ROOT)
    };
    loop {
        let mid = T::vertex(left, right, opp);
        let m = tri.mediant();
        match target.cmp(&m) {
            Ordering::Equal => return mid,
            Ordering::Less => {
                opp = right;
                right = mid;
                tri = tri.left_child();
            }
            Ordering::Greater => {
                opp = left;
                left = mid;
                tri = tri.right_child();
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Letter {
    A,
    AInv,
    B,
    BInv,
}

impl Letter {
    pub fn inverse(self) -> Letter {
        match self {
            Letter::A => Letter::AInv,
            Letter::AInv => Letter::A,
            Letter::B => Letter::BInv,
            Letter::BInv => Letter::B,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Letter::A => "a",
            Letter::AInv => "A",
            Letter::B => "b",
            Letter::BInv => "B",
        };
        f.write_str(s)
    }
}

/// A cyclically reduced word in `α^{±1}, β^{±1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FareyWord(pub Vec<Letter>);

impl FareyWord {
    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Exponent sums `(s, t)` of `α` and `β`.
    pub fn abelianization(&self) -> (i64, i64) {
        self.0.iter().fold((0, 0), |(s, t), l| match l {
            Letter::A => (s + 1, t),
            Letter::AInv => (s - 1, t),
            Letter::B => (s, t + 1),
            Letter::BInv => (s, t - 1),
        })
    }

    /// Slope `−s/t` of the homology class.
    pub fn slope(&self) -> Result<FareySlope, FareyError> {
        let (s, t) = self.abelianization();
        FareySlope::new(-s, t)
    }

    pub fn inverse(&self) -> FareyWord {
        FareyWord(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        let w = &self.0;
        let n = w.len();
        (0..n).all(|i| w[(i + 1) % n] != w[i].inverse() || n == 1)
    }

    fn concat(right: &FareyWord, left: &FareyWord) -> FareyWord {
        let mut v = right.0.clone();
        v.extend_from_slice(&left.0);
        FareyWord(v)
    }
}

impl fmt::Display for FareyWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// The word attached to a slope.
pub fn farey_word(s: FareySlope) -> FareyWord {
    if s.is_infinity() {
        return FareyWord(vec![Letter::A]);
    }
    if s == FareySlope::ZERO {
        return FareyWord(vec![Letter::B]);
    }
    let (mut left, mut right, mut tri) = if s.p > 0 {
        (FareyWord(vec![Letter::B]), FareyWord(vec![Letter::AInv]), FareyTriangle::POSITIVE_ROOT)
    } else {
        (FareyWord(vec![Letter::A]), FareyWord(vec![Letter::B]), FareyTriangle::NEGATIVE_ROOT)
    };
    loop {
        let mid = FareyWord::concat(&right, &left);
        let m = tri.mediant();
        match s.cmp(&m) {
            Ordering::Equal => return mid,
            Ordering::Less => {
                right = mid;
                tri = tri.left_child();
            }
            Ordering::Greater => {
                left = mid;
                tri = tri.right_child();
            }
        }
    }
}

/// All reduced slopes `p/q` with `lo ≤ p/q < hi` (integers) and `q ≤ q_max`,
/// sorted by value.
pub fn slopes_in_range(lo: i64, hi: i64, q_max: i64) -> Vec<FareySlope> {
    let mut out = Vec::new();
    for q in 1..=q_max.max(0) {
        for p in lo * q..hi * q {
            if gcd(p, q) == 1 {
                out.push(FareySlope { p, q });
            }
        }
    }
    out.sort();
    out
}

/// Stern–Brocot parents `(left, right)` of a finite slope other than `0/1`.
/// On the negative side the left parent `1/0` stands for `-1/0`.
pub fn parents(s: FareySlope) -> Option<(FareySlope, FareySlope)> {
    let mut last = None;
    descend(s, |t| last = Some((t.left, t.right)));
    last
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sl(p: i64, q: i64) -> FareySlope {
        FareySlope::new(p, q).unwrap()
    }

    #[test]
    fn reduction_and_order() {
        assert_eq!(sl(2, 4), sl(1, 2));
        assert_eq!(sl(-3, -6), sl(1, 2));
        assert_eq!(sl(3, -6), sl(-1, 2));
        assert_eq!(sl(-5, 0), FareySlope::INFINITY);
        assert!(FareySlope::new(0, 0).is_err());
        assert!(sl(1, 3) < sl(1, 2));
        assert!(sl(100, 1) < FareySlope::INFINITY);
        assert_eq!("3/7".parse::<FareySlope>().unwrap(), sl(3, 7));
        assert_eq!("-2".parse::<FareySlope>().unwrap(), sl(-2, 1));
    }

    #[test]
    fn base_words() {
        assert_eq!(farey_word(FareySlope::INFINITY), FareyWord(vec![Letter::A]));
        assert_eq!(farey_word(FareySlope::ZERO), FareyWord(vec![Letter::B]));
        assert_eq!(farey_word(FareySlope::ONE), FareyWord(vec![Letter::AInv, Letter::B]));
    }

    #[test]
    fn one_half_word_has_expected_class() {
        let w = farey_word(sl(1, 2));
        let (s, t) = w.abelianization();
        assert!((s, t) == (-1, 2) || (s, t) == (1, -2));
        assert_eq!(w.slope().unwrap(), sl(1, 2));
    }

    #[test]
    fn words_match_slopes_and_are_reduced() {
        for q in 1..=12 {
            for p in -3 * q..=3 * q {
                let Ok(s) = FareySlope::new(p, q) else { continue };
                if s.q() != q {
                    continue;
                }
                let w = farey_word(s);
                assert_eq!(w.slope().unwrap(), s, "word {w} for {s}");
                assert!(w.is_cyclically_reduced(), "{w}");
                assert_eq!(w.len() as i64, p.abs() + q);
            }
        }
    }

    #[test]
    fn descent_depth_counts_triangles() {
        assert_eq!(FareySlope::ONE.depth(), 1);
        assert_eq!(sl(1, 2).depth(), 2);
        assert_eq!(sl(-1, 1).depth(), 1);
        assert_eq!(sl(1, 5).depth(), 5);
        assert_eq!(FareySlope::ZERO.depth(), 0);
    }

    #[test]
    fn parents_are_neighbors() {
        for s in slopes_in_range(-2, 2, 9) {
            if s == FareySlope::ZERO {
                continue;
            }
            let (l, r) = parents(s).unwrap();
            assert!(l.is_neighbor(&s) && r.is_neighbor(&s), "{s}: {l} {r}");
        }
    }

    #[test]
    fn slope_listing() {
        let v = slopes_in_range(0, 1, 3);
        assert_eq!(v, vec![sl(0, 1), sl(1, 3), sl(1, 2), sl(2, 3)]);
    }
}
