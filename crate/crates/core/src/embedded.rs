//! Self-intersections of closed polylines and the classification of product
//! tori: a product is embedded exactly when both factors are, and the only
//! embedded shrinking curve is the unit circle.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{circle_constant, ShrinkerCurve};
use crate::error::{Error, Result};
use crate::registry::{Named, Registry};
use crate::surface::{derivative_schemes, shrinker_residual_surface, JetField, ProductTorus, ANALYTIC, ISOTHERMAL_TOL};

/// Crossings whose direction determinant is at most this are reported as
/// non-transversal and do not count against embeddedness.
pub const TRANSVERSAL_DET: f64 = 1e-12;

/// Minimum vertex count of a polyline accepted by the finders.
pub const MIN_VERTICES: usize = 8;

/// Shrinker residual a torus must meet before it is classified.
pub const CLASSIFY_SHRINKER_TOL: f64 = 1e-6;

/// How far an embedded factor's constant may be from `e^{-1/2}`.
pub const CIRCLE_CONSTANT_TOL: f64 = 1e-6;

/// A proper crossing of segments `i` (vertex `i` to `i+1`) and `j > i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntersectionRecord {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
    pub transversal: bool,
}

pub trait IntersectionFinder: Named + Send + Sync {
    /// All crossings of non-adjacent segments, sorted by `(i, j)`.
    fn find(&self, pts: &[[f64; 2]]) -> Result<Vec<IntersectionRecord>>;
}

/// Every pair of segments; the reference implementation.
struct BruteForce;

/// Sweep over segments sorted by their left end, testing only pairs whose
/// x-extents overlap.
struct Sweep;

impl Named for BruteForce {
    fn name(&self) -> &'static str {
        "brute-force"
    }
}

impl Named for Sweep {
    fn name(&self) -> &'static str {
        "sweep"
    }
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn validate(pts: &[[f64; 2]]) -> Result<()> {
    if pts.len() < MIN_VERTICES {
        return Err(Error::domain(format!(
            "closed polyline needs at least {MIN_VERTICES} vertices, got {}",
            pts.len()
        )));
    }
    let n = pts.len();
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        if !(a[0].is_finite() && a[1].is_finite()) {
            return Err(Error::domain(format!("non-finite vertex {i}")));
        }
        if a == b {
            return Err(Error::domain(format!("zero-length segment {i}")));
        }
    }
    Ok(())
}

fn adjacent(i: usize, j: usize, n: usize) -> bool {
    let d = i.abs_diff(j);
    d <= 1 || d == n - 1
}

/// Strict crossing test: the endpoints of each segment lie strictly on
/// opposite sides of the other's line.
fn crossing(pts: &[[f64; 2]], i: usize, j: usize) -> Option<IntersectionRecord> {
    let n = pts.len();
    let (a, b) = (pts[i], pts[(i + 1) % n]);
    let (c, d) = (pts[j], pts[(j + 1) % n]);
    let (d1, d2) = (orient(a, b, c), orient(a, b, d));
    let (d3, d4) = (orient(c, d, a), orient(c, d, b));
    if !(d1 * d2 < 0.0 && d3 * d4 < 0.0) {
        return None;
    }
    let r = [b[0] - a[0], b[1] - a[1]];
    let s = [d[0] - c[0], d[1] - c[1]];
    let det = r[0] * s[1] - r[1] * s[0];
    // d3 = cross(s, a - c); the crossing is at a + t r with t = d3 / (d3 - d4)
    let t = d3 / (d3 - d4);
    Some(IntersectionRecord {
        i,
        j,
        x: a[0] + t * r[0],
        y: a[1] + t * r[1],
        transversal: det.abs() > TRANSVERSAL_DET,
    })
}

impl IntersectionFinder for BruteForce {
    fn find(&self, pts: &[[f64; 2]]) -> Result<Vec<IntersectionRecord>> {
        validate(pts)?;
        let n = pts.len();
        Ok((0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                (i + 1..n)
                    .filter(move |&j| !adjacent(i, j, n))
                    .filter_map(move |j| crossing(pts, i, j))
            })
            .collect())
    }
}

impl IntersectionFinder for Sweep {
    fn find(&self, pts: &[[f64; 2]]) -> Result<Vec<IntersectionRecord>> {
        validate(pts)?;
        let n = pts.len();
        let bounds: Vec<[f64; 4]> = (0..n)
            .map(|i| {
                let (a, b) = (pts[i], pts[(i + 1) % n]);
                [a[0].min(b[0]), a[0].max(b[0]), a[1].min(b[1]), a[1].max(b[1])]
            })
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&p, &q| bounds[p][0].total_cmp(&bounds[q][0]).then(p.cmp(&q)));
        let mut active: Vec<usize> = Vec::new();
        let mut out = Vec::new();
        for &seg in &order {
            let bs = bounds[seg];
            active.retain(|&o| bounds[o][1] >= bs[0]);
            for &o in &active {
                let bo = bounds[o];
                if bo[3] < bs[2] || bs[3] < bo[2] || adjacent(seg, o, n) {
                    continue;
                }
                if let Some(rec) = crossing(pts, seg.min(o), seg.max(o)) {
                    out.push(rec);
                }
            }
            active.push(seg);
        }
        out.sort_by_key(|r| (r.i, r.j));
        Ok(out)
    }
}

/// Intersection finders, reference first.
pub fn intersection_finders() -> Registry<dyn IntersectionFinder> {
    let mut r: Registry<dyn IntersectionFinder> = Registry::new("intersection finder");
    r.register(Box::new(BruteForce));
    r.register(Box::new(Sweep));
    r
}

/// Self-intersections of the curve's sample polyline with the reference
/// finder.
pub fn curve_self_intersections(curve: &ShrinkerCurve) -> Result<Vec<IntersectionRecord>> {
    BruteForce.find(&curve.points())
}

pub fn curve_self_intersections_with(curve: &ShrinkerCurve, finder: &str) -> Result<Vec<IntersectionRecord>> {
    intersection_finders().get(finder)?.find(&curve.points())
}

/// Rotation index and half-period count of a factor curve, and how often
/// it crosses itself. The circle has no `q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorLabel {
    pub p: u32,
    pub q: Option<u32>,
    pub crossings: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    CliffordTorus,
    ImmersedProductTorus { factor1: FactorLabel, factor2: FactorLabel },
}

/// Classifies a product shrinker. The torus must pass the shrinker
/// certificate first; embedded factors must then be unit circles.
pub fn classify_torus(t: &ProductTorus) -> Result<Classification> {
    let jets = JetField::compute(t, derivative_schemes().get(ANALYTIC)?)?;
    let cert = shrinker_residual_surface(&jets, CLASSIFY_SHRINKER_TOL, ISOTHERMAL_TOL);
    if !cert.pass {
        return Err(Error::NotAShrinker {
            residual: cert.max_residual,
            tol: CLASSIFY_SHRINKER_TOL,
        });
    }
    let label = |c: &ShrinkerCurve| -> Result<FactorLabel> {
        let crossings = Sweep.find(&c.points())?.iter().filter(|r| r.transversal).count();
        Ok(FactorLabel {
            p: c.p,
            q: c.q,
            crossings,
        })
    };
    let (f1, f2) = (label(&t.curve1)?, label(&t.curve2)?);
    if f1.crossings == 0 && f2.crossings == 0 {
        for c in [&t.curve1, &t.curve2] {
            if (c.c_gamma - circle_constant()).abs() > CIRCLE_CONSTANT_TOL {
                return Err(Error::EmbeddedNonCircle { c_gamma: c.c_gamma });
            }
        }
        return Ok(Classification::CliffordTorus);
    }
    Ok(Classification::ImmersedProductTorus {
        factor1: f1,
        factor2: f2,
    })
}
