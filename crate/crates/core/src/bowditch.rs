//! Trace-only discreteness screening over the Farey tree.
//!
//! The search walks Farey triangles from the root edge `(0/1, 1/0)` in both
//! directions. A triangle `(l, r | o)` is not expanded once its edge points
//! back up the tree: if `|t_l|, |t_r| ≥ 2` and the new vertex satisfies
//! `|t_m| ≥ |t_o|`, every trace below it is at least `|t_m| ≥ 2` and keeps
//! growing, so that subtree holds no elliptic simple curve.
//!
//! Two certificates of non-discreteness (or non-faithfulness) are checked on
//! every visited region and edge:
//!
//! * a simple curve with real trace strictly inside `(−2, 2)` (elliptic);
//! * Jørgensen's inequality for `(W_l, W_rⁿ)`, whose commutator trace is
//!   `2 − 4 F_n(t_r)²` with `F_n` the Chebyshev-type sequence
//!   `F_0 = 0, F_1 = 1, F_{n+1} = t F_n − F_{n−1}`.
//!
//! Everything is computed from the base trace triple, so verdicts do not
//! depend on the conjugacy representative.

use serde::{Deserialize, Serialize};

use crate::farey::{FareySlope, FareyTriangle};
use crate::rep::{Representation, TraceTriple};
use crate::tolerance::REAL_TRACE_TOL;
use crate::Complex;

const TWO_TOL: f64 = 1e-9;
const JORGENSEN_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BowditchConfig {
    /// Maximum Stern–Brocot depth of visited triangles.
    pub depth: usize,
    /// Frontier regions with all traces above this count as escaping.
    pub bound: f64,
    /// Largest power used in the Jørgensen edge checks.
    pub max_power: usize,
    /// Cap on the number of visited triangles.
    pub max_nodes: usize,
}

impl Default for BowditchConfig {
    fn default() -> Self {
        BowditchConfig { depth: 24, bound: 10.0, max_power: 32, max_nodes: 200_000 }
    }
}

impl BowditchConfig {
    pub fn with_depth(depth: usize) -> Self {
        BowditchConfig { depth, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RejectReason {
    /// `W(slope)` is elliptic.
    Elliptic { slope: FareySlope, trace: Complex },
    /// `(W(slope), W(power_of)^power)` violates Jørgensen's inequality.
    Jorgensen { slope: FareySlope, power_of: FareySlope, power: usize, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub reason: RejectReason,
    /// Mediants generated on the way down to the offending triangle.
    pub path: Vec<FareySlope>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BowditchVerdict {
    NotRejected { visited: usize },
    Rejected(Witness),
    Inconclusive { visited: usize, active_frontier: usize },
}

impl BowditchVerdict {
    pub fn is_rejected(&self) -> bool {
        matches!(self, BowditchVerdict::Rejected(_))
    }

    /// Tag without payload, for comparisons.
    pub fn kind(&self) -> &'static str {
        match self {
            BowditchVerdict::NotRejected { .. } => "not_rejected",
            BowditchVerdict::Rejected(_) => "rejected",
            BowditchVerdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

fn is_elliptic(t: Complex) -> bool {
    t.im.abs() <= REAL_TRACE_TOL * (1.0 + t.norm()) && t.re.abs() < 2.0 - TWO_TOL
}

/// Smallest Jørgensen sum over `(X, Yⁿ)`, `2 ≤ n ≤ max_power`, with the power.
fn worst_jorgensen(tx: Complex, ty: Complex, max_power: usize) -> (f64, usize) {
    let head = (tx * tx - 4.0).norm();
    let mut prev = Complex::new(0.0, 0.0);
    let mut cur = Complex::new(1.0, 0.0);
    let mut worst = (f64::INFINITY, 1);
    for n in 2..=max_power {
        let next = ty * cur - prev;
        prev = cur;
        cur = next;
        let j = head + 4.0 * cur.norm_sqr();
        if j < worst.0 {
            worst = (j, n);
        }
    }
    worst
}

struct Node {
    tri: FareyTriangle,
    left: Complex,
    right: Complex,
    opp: Complex,
    depth: usize,
    path: Vec<FareySlope>,
}

struct Search<'a> {
    cfg: &'a BowditchConfig,
    visited: usize,
    active_frontier: usize,
    bounded_frontier: usize,
}

impl Search<'_> {
    fn check_edge(
        &self,
        (sx, tx): (FareySlope, Complex),
        (sy, ty): (FareySlope, Complex),
        path: &[FareySlope],
    ) -> Option<Witness> {
        for ((s1, t1), (s2, t2)) in [((sx, tx), (sy, ty)), ((sy, ty), (sx, tx))] {
            let (j, n) = worst_jorgensen(t1, t2, self.cfg.max_power);
            if j < 1.0 - JORGENSEN_SLACK {
                return Some(Witness {
                    reason: RejectReason::Jorgensen { slope: s1, power_of: s2, power: n, value: j },
                    path: path.to_vec(),
                });
            }
        }
        None
    }

    fn run(&mut self, base: &TraceTriple) -> Option<Witness> {
        let (x, y, z) = (base.x, base.y, base.z);
        let w = base.tr_ab();
        let minus_one = FareySlope::new(-1, 1).expect("valid slope");
        for (s, t) in [(FareySlope::INFINITY, x), (FareySlope::ZERO, y), (FareySlope::ONE, z), (minus_one, w)] {
            if is_elliptic(t) {
                return Some(Witness { reason: RejectReason::Elliptic { slope: s, trace: t }, path: vec![] });
            }
        }
        if let Some(wit) = self.check_edge((FareySlope::ZERO, y), (FareySlope::INFINITY, x), &[]) {
            return Some(wit);
        }

        let mut stack = vec![
            Node { tri: FareyTriangle::NEGATIVE_ROOT, left: x, right: y, opp: z, depth: 1, path: vec![] },
            Node { tri: FareyTriangle::POSITIVE_ROOT, left: y, right: x, opp: w, depth: 1, path: vec![] },
        ];
        while let Some(node) = stack.pop() {
            self.visited += 1;
            let m = node.tri.mediant();
            let tm = node.left * node.right - node.opp;
            let mut path = node.path;
            path.push(m);

            if is_elliptic(tm) {
                return Some(Witness { reason: RejectReason::Elliptic { slope: m, trace: tm }, path });
            }
            let (l, r) = (node.tri.left, node.tri.right);
            if let Some(wit) = self.check_edge((l, node.left), (m, tm), &path) {
                return Some(wit);
            }
            if let Some(wit) = self.check_edge((m, tm), (r, node.right), &path) {
                return Some(wit);
            }

            let escaping =
                node.left.norm() >= 2.0 - TWO_TOL && node.right.norm() >= 2.0 - TWO_TOL && tm.norm() >= node.opp.norm();
            if escaping {
                continue;
            }
            if node.depth >= self.cfg.depth || self.visited >= self.cfg.max_nodes {
                let lowest = node.left.norm().min(node.right.norm()).min(tm.norm());
                if lowest > self.cfg.bound {
                    self.bounded_frontier += 1;
                } else {
                    self.active_frontier += 1;
                }
                continue;
            }
            stack.push(Node {
                tri: node.tri.right_child(),
                left: tm,
                right: node.right,
                opp: node.left,
                depth: node.depth + 1,
                path: path.clone(),
            });
            stack.push(Node {
                tri: node.tri.left_child(),
                left: node.left,
                right: tm,
                opp: node.right,
                depth: node.depth + 1,
                path,
            });
        }
        None
    }
}

/// Screens a trace triple.
pub fn bowditch_test_traces(base: &TraceTriple, cfg: &BowditchConfig) -> BowditchVerdict {
    let mut search = Search { cfg, visited: 0, active_frontier: 0, bounded_frontier: 0 };
    match search.run(base) {
        Some(w) => BowditchVerdict::Rejected(w),
        None if search.active_frontier > 0 => {
            BowditchVerdict::Inconclusive { visited: search.visited, active_frontier: search.active_frontier }
        }
        None => BowditchVerdict::NotRejected { visited: search.visited },
    }
}

/// Screens a representation through its trace triple.
pub fn bowditch_test(r: &Representation, cfg: &BowditchConfig) -> BowditchVerdict {
    bowditch_test_traces(&r.trace_triple(), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn maskit_triple(mu: Complex) -> TraceTriple {
        let i = Complex::new(0.0, 1.0);
        TraceTriple::new(Complex::new(2.0, 0.0), i * mu, i * (mu - 2.0))
    }

    #[test]
    fn jorgensen_sequence_matches_matrix_powers() {
        use crate::moebius::MoebiusMap;
        let i = Complex::new(0.0, 1.0);
        let x = MoebiusMap::translation(Complex::new(2.0, 0.0));
        let y = MoebiusMap::from_normalized(i * Complex::new(0.3, 0.6), i, i, Complex::new(0.0, 0.0));
        let mut prev = Complex::new(0.0, 0.0);
        let mut cur = Complex::new(1.0, 0.0);
        for n in 2..8 {
            let next = y.trace() * cur - prev;
            prev = cur;
            cur = next;
            let direct = x.commutator(&y.pow(n)).trace() - 2.0;
            let via = -4.0 * cur * cur;
            assert!((direct - via).norm() < 1e-10 * (1.0 + via.norm()), "n = {n}");
        }
    }

    #[test]
    fn deep_interior_not_rejected() {
        let v = bowditch_test_traces(&maskit_triple(Complex::new(0.0, 4.0)), &BowditchConfig::with_depth(20));
        assert!(matches!(v, BowditchVerdict::NotRejected { .. }), "{v:?}");
    }

    #[test]
    fn elliptic_generator_rejected() {
        let v = bowditch_test_traces(&maskit_triple(Complex::new(0.0, 0.5)), &BowditchConfig::default());
        match v {
            BowditchVerdict::Rejected(Witness { reason: RejectReason::Elliptic { slope, .. }, .. }) => {
                assert_eq!(slope, FareySlope::ZERO)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cusp_not_rejected() {
        let v = bowditch_test_traces(&maskit_triple(Complex::new(0.0, 2.0)), &BowditchConfig::default());
        assert!(!v.is_rejected(), "{v:?}");
    }

    #[test]
    fn small_parameters_rejected() {
        for mu in [Complex::new(0.1, 0.5), Complex::new(1.0, 0.3), Complex::new(0.5, 1.0)] {
            let v = bowditch_test_traces(&maskit_triple(mu), &BowditchConfig::default());
            assert!(v.is_rejected(), "{mu}: {v:?}");
        }
    }
}
