//! Limit-set points by depth-first enumeration of reduced words.
//!
//! Seeds are the finite fixed points of the generators, of their pairwise
//! products and of their commutators. Each reduced word `g` contributes the
//! images `g(x)` of the seeds; a branch stops growing once `|g'(x)|` at every
//! seed falls below the contraction threshold, since deeper images move less
//! than that. The word tree is split by first letter across workers and
//! merged in letter order, so output does not depend on scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::moebius::{IsometryClass, MoebiusMap, RiemannPoint};
use crate::tolerance::RENDER_CONTRACTION;
use crate::Complex;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenderError {
    #[error("no generators")]
    NoGenerators,
    #[error("point budget must be at least 1")]
    ZeroBudget,
    #[error("bounding box is empty")]
    EmptyBox,
    #[error("no limit-set points inside the bounding box")]
    EmptyOutput,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl BoundingBox {
    pub fn contains(&self, z: Complex) -> bool {
        (self.re_min..=self.re_max).contains(&z.re) && (self.im_min..=self.im_max).contains(&z.im)
    }

    fn is_empty(&self) -> bool {
        !(self.re_min < self.re_max && self.im_min < self.im_max)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RenderTarget {
    pub generators: Vec<MoebiusMap>,
    pub max_depth: usize,
    pub bbox: BoundingBox,
    pub point_budget: usize,
    pub contraction: f64,
}

impl RenderTarget {
    pub fn new(generators: Vec<MoebiusMap>, max_depth: usize, bbox: BoundingBox, point_budget: usize) -> Self {
        RenderTarget { generators, max_depth, bbox, point_budget, contraction: RENDER_CONTRACTION }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSetPoints {
    /// Points inside the box, deduplicated at `1e-12`, in enumeration order.
    pub points: Vec<Complex>,
    /// The group is a single parabolic; its only limit point is its fixed point.
    pub degenerate: bool,
    pub words_visited: usize,
}

fn seeds(gens: &[MoebiusMap]) -> Vec<Complex> {
    let mut maps: Vec<MoebiusMap> = gens.to_vec();
    for (i, g) in gens.iter().enumerate() {
        for h in &gens[i + 1..] {
            maps.push(*g * *h);
            maps.push(*g * h.inverse());
            maps.push(g.commutator(h));
        }
    }
    let mut out: Vec<Complex> = Vec::new();
    for m in maps {
        if m.projective_eq(&MoebiusMap::identity(), 1e-12) {
            continue;
        }
        if let Ok(fps) = m.fixed_points() {
            for p in fps.into_iter().filter_map(RiemannPoint::finite) {
                if !out.iter().any(|q| (q - p).norm() < 1e-12) {
                    out.push(p);
                }
            }
        }
    }
    out
}

struct Walker<'a> {
    letters: &'a [MoebiusMap],
    seeds: &'a [Complex],
    target: &'a RenderTarget,
    budget: usize,
    points: Vec<Complex>,
    visited: usize,
}

impl Walker<'_> {
    fn visit(&mut self, g: &MoebiusMap, last: usize, depth: usize) {
        if self.points.len() >= self.budget {
            return;
        }
        self.visited += 1;
        let mut max_deriv: f64 = 0.0;
        for &x in self.seeds {
            if let RiemannPoint::Finite(z) = g.apply(RiemannPoint::Finite(x)) {
                if self.target.bbox.contains(z) && self.points.len() < self.budget {
                    self.points.push(z);
                }
            }
            let d = g.derivative_at(x).map_or(f64::INFINITY, |d| d.norm());
            max_deriv = max_deriv.max(d);
        }
        if depth >= self.target.max_depth || max_deriv < self.target.contraction {
            return;
        }
        let n = self.letters.len();
        for k in 0..n {
            // letters 2i and 2i+1 are inverse to each other
            if k == last ^ 1 {
                continue;
            }
            let h = (*g * self.letters[k]).renormalized();
            self.visit(&h, k, depth + 1);
        }
    }
}

fn dedup(points: Vec<Complex>) -> Vec<Complex> {
    let key = |z: &Complex| ((z.re * 1e12).round() as i64, (z.im * 1e12).round() as i64);
    let mut seen = std::collections::HashSet::new();
    points.into_iter().filter(|z| seen.insert(key(z))).collect()
}

/// Enumerates limit-set points of the group generated by `target.generators`.
pub fn limit_set_points(target: &RenderTarget) -> Result<LimitSetPoints, RenderError> {
    if target.generators.is_empty() {
        return Err(RenderError::NoGenerators);
    }
    if target.point_budget == 0 {
        return Err(RenderError::ZeroBudget);
    }
    if target.bbox.is_empty() {
        return Err(RenderError::EmptyBox);
    }
    if target.generators.len() == 1 && target.generators[0].class() == IsometryClass::Parabolic {
        let points = target.generators[0]
            .fixed_points()
            .unwrap_or_default()
            .into_iter()
            .filter_map(RiemannPoint::finite)
            .filter(|&z| target.bbox.contains(z))
            .collect();
        return Ok(LimitSetPoints { points, degenerate: true, words_visited: 0 });
    }

    let letters: Vec<MoebiusMap> = target.generators.iter().flat_map(|g| [*g, g.inverse()]).collect();
    let seeds = seeds(&target.generators);
    let per_branch = target.point_budget.div_ceil(letters.len());
    let branches: Vec<(Vec<Complex>, usize)> = (0..letters.len())
        .into_par_iter()
        .map(|k| {
            let mut w =
                Walker { letters: &letters, seeds: &seeds, target, budget: per_branch, points: vec![], visited: 0 };
            w.visit(&letters[k], k, 1);
            (w.points, w.visited)
        })
        .collect();
    let mut points: Vec<Complex> = seeds.iter().copied().filter(|&z| target.bbox.contains(z)).collect();
    let mut words_visited = 0;
    for (p, v) in branches {
        points.extend(p);
        words_visited += v;
    }
    let mut points = dedup(points);
    points.truncate(target.point_budget);
    if points.is_empty() {
        return Err(RenderError::EmptyOutput);
    }
    Ok(LimitSetPoints { points, degenerate: false, words_visited })
}

/// Plain-text PPM (`P3`) of the points, black on white.
pub fn to_ppm(points: &[Complex], bbox: &BoundingBox, width: usize, height: usize) -> String {
    let mut pix = vec![false; width * height];
    for z in points {
        if !bbox.contains(*z) {
            continue;
        }
        let x = ((z.re - bbox.re_min) / (bbox.re_max - bbox.re_min) * (width as f64 - 1.0)).round() as usize;
        let y = ((bbox.im_max - z.im) / (bbox.im_max - bbox.im_min) * (height as f64 - 1.0)).round() as usize;
        pix[y.min(height - 1) * width + x.min(width - 1)] = true;
    }
    let mut out = format!("P3\n{width} {height}\n255\n");
    for row in pix.chunks(width) {
        let line: Vec<&str> = row.iter().map(|&on| if on { "0 0 0" } else { "255 255 255" }).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}
