//! Checks on a computed curve: the transcendental relation, the shrinker
//! equation by finite differences, critical curvatures, radius bounds and
//! reflection symmetry.

use std::f64::consts::FRAC_PI_2;

use kiddo::{ImmutableKdTree, SquaredEuclidean};
use rayon::prelude::*;

use super::{dist, wrap_angle, ShrinkerCurve};
use crate::error::{Error, Result};
use crate::roots::bisect;

/// Symmetry residual accepted by [`align_symmetry_axis`], relative to
/// `max(1, r_max)`.
pub const SYMMETRY_TOL: f64 = 1e-6;

/// `k = c e^{r²/2}`.
pub fn curvature_from_radius(c: f64, r: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::domain(format!("c must be positive, got {c}")));
    }
    if !(r >= 0.0) {
        return Err(Error::domain(format!("r must be non-negative, got {r}")));
    }
    Ok(c * (0.5 * r * r).exp())
}

/// `max |k e^{-r²/2} - c_gamma|` over the samples.
pub fn verify_transcendental(curve: &ShrinkerCurve) -> f64 {
    curve
        .samples
        .iter()
        .map(|s| (s.k * (-0.5 * s.r * s.r).exp() - curve.c_gamma).abs())
        .fold(0.0, f64::max)
}

/// Per-vertex `|κ + F^⊥|` on a closed polyline, with `κ` the curvature
/// vector from periodic three-point differences in chord length.
pub fn shrinker_residual_field(points: &[[f64; 2]]) -> Result<Vec<f64>> {
    let n = points.len();
    let params: Vec<f64> = (0..n).map(|i| dist(points[i], points[(i + 1) % n])).collect();
    residual_field(points, &params)
}

// `gaps[i]` is the parameter distance from vertex i to vertex i + 1.
fn residual_field(points: &[[f64; 2]], gaps: &[f64]) -> Result<Vec<f64>> {
    let n = points.len();
    if n < 5 {
        return Err(Error::domain(format!(
            "shrinker residual needs at least 5 samples, got {n}"
        )));
    }
    (0..n)
        .map(|i| {
            let pm = points[(i + n - 1) % n];
            let pc = points[i];
            let pp = points[(i + 1) % n];
            let (hm, hp) = (gaps[(i + n - 1) % n], gaps[i]);
            if !(hm > 0.0 && hp > 0.0) || pm == pc || pc == pp {
                return Err(Error::domain(format!("repeated vertex at index {i}")));
            }
            let den = hm * hp * (hm + hp);
            let d1: [f64; 2] = std::array::from_fn(|c| (hm * hm * (pp[c] - pc[c]) + hp * hp * (pc[c] - pm[c])) / den);
            let d2: [f64; 2] = std::array::from_fn(|c| 2.0 * (hm * (pp[c] - pc[c]) - hp * (pc[c] - pm[c])) / den);
            let sp2 = d1[0] * d1[0] + d1[1] * d1[1];
            let d12 = d1[0] * d2[0] + d1[1] * d2[1];
            let fd = (pc[0] * d1[0] + pc[1] * d1[1]) / sp2;
            let res: [f64; 2] = std::array::from_fn(|c| (d2[c] * sp2 - d12 * d1[c]) / (sp2 * sp2) + pc[c] - fd * d1[c]);
            Ok(res[0].hypot(res[1]))
        })
        .collect()
}

/// `max |κ + F^⊥|` over a closed polyline.
pub fn shrinker_residual_points(points: &[[f64; 2]]) -> Result<f64> {
    Ok(shrinker_residual_field(points)?.into_iter().fold(0.0, f64::max))
}

/// `max |k N + F^⊥|` with `k N` from centered differences of the sample
/// positions in the curve's own arclength parameter.
pub fn shrinker_residual_curve(curve: &ShrinkerCurve) -> Result<f64> {
    let n = curve.samples.len();
    let gaps: Vec<f64> = (0..n)
        .map(|i| {
            let next = if i + 1 < n {
                curve.samples[i + 1].s
            } else {
                curve.length
            };
            next - curve.samples[i].s
        })
        .collect();
    Ok(residual_field(&curve.points(), &gaps)?.into_iter().fold(0.0, f64::max))
}

/// `∮ k ds` measured as the sum of wrapped tangent-angle increments.
pub fn total_turning(curve: &ShrinkerCurve) -> f64 {
    let n = curve.samples.len();
    (0..n)
        .map(|i| wrap_angle(curve.samples[(i + 1) % n].phi - curve.samples[i].phi))
        .sum()
}

/// Values of `k` at its local extrema along the curve, each refined by a
/// parabola through the neighbouring samples. A curve of constant
/// curvature returns every sample.
pub fn critical_curvatures(curve: &ShrinkerCurve) -> Vec<f64> {
    let ks: Vec<f64> = curve.samples.iter().map(|s| s.k).collect();
    let (lo, hi) = ks
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &k| (a.min(k), b.max(k)));
    if hi - lo <= 1e-12 * hi.abs().max(1.0) {
        return ks;
    }
    let n = ks.len();
    let mut out = Vec::new();
    for i in 0..n {
        let (km, k0, kp) = (ks[(i + n - 1) % n], ks[i], ks[(i + 1) % n]);
        let is_max = k0 > km && k0 >= kp;
        let is_min = k0 < km && k0 <= kp;
        if is_max || is_min {
            let curv = km - 2.0 * k0 + kp;
            let refined = if curv != 0.0 {
                k0 - (kp - km).powi(2) / (8.0 * curv)
            } else {
                k0
            };
            out.push(refined);
        }
    }
    out
}

/// The two solutions of `r² = C e^{r²}`, `r_min ≤ 1 ≤ r_max`.
pub fn radius_bounds(c: f64) -> Result<(f64, f64)> {
    if !(c > 0.0) {
        return Err(Error::domain(format!("C must be positive, got {c}")));
    }
    let inv_e = (-1.0f64).exp();
    if c > inv_e * (1.0 + 1e-12) {
        return Err(Error::NoSolution(format!(
            "C = {c} exceeds 1/e; r² = C e^(r²) has no solution"
        )));
    }
    if c >= inv_e * (1.0 - 1e-12) {
        return Ok((1.0, 1.0));
    }
    // in t = r²: ln t - t = ln C, increasing below t = 1 and decreasing above
    let lc = c.ln();
    let h = |t: f64| Ok(t.ln() - t - lc);
    let lower = bisect(h, c, 1.0, 0.0, 0.0, 2000)?;
    let upper = bisect(h, 1.0, 1.0 - 2.0 * lc, 0.0, 0.0, 2000)?;
    Ok((lower.x.sqrt(), upper.x.sqrt()))
}

/// Distance from points to a curve, using the Hermite interpolant between
/// samples rather than the chord polyline.
pub(crate) struct CurveDistance<'a> {
    curve: &'a ShrinkerCurve,
    tree: ImmutableKdTree<f64, 2>,
}

impl<'a> CurveDistance<'a> {
    pub(crate) fn new(curve: &'a ShrinkerCurve) -> Result<Self> {
        let tree = ImmutableKdTree::new_from_slice(&curve.points())
            .map_err(|e| Error::numeric(format!("k-d tree construction failed: {e:?}")))?;
        Ok(Self { curve, tree })
    }

    pub(crate) fn distance(&self, x: [f64; 2]) -> f64 {
        let n = self.curve.samples.len();
        let nearest = self
            .tree
            .query(&x)
            .nearest_n::<SquaredEuclidean<f64>>(std::num::NonZero::new(4.min(n)).expect("n > 0"))
            .execute();
        let mut best = f64::INFINITY;
        for hit in nearest {
            let i = hit.item as usize;
            for (a, b) in [((i + n - 1) % n, i), (i, (i + 1) % n)] {
                best = best.min(self.segment_distance(a, b, x));
            }
        }
        best
    }

    // Minimizes |P(s) - x| over the sample interval [a, b] by projecting on
    // the chord and polishing with Newton steps on the interpolant.
    fn segment_distance(&self, a: usize, b: usize, x: [f64; 2]) -> f64 {
        let c = self.curve;
        let (pa, pb) = (c.samples[a].pos(), c.samples[b].pos());
        let sa = c.samples[a].s;
        let sb = if b == 0 { c.length } else { c.samples[b].s };
        let chord = [pb[0] - pa[0], pb[1] - pa[1]];
        let len2 = chord[0] * chord[0] + chord[1] * chord[1];
        let mut u = if len2 > 0.0 {
            (((x[0] - pa[0]) * chord[0] + (x[1] - pa[1]) * chord[1]) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let h = sb - sa;
        for _ in 0..4 {
            let jet = c.eval(sa + u * h);
            let e = [jet.pos[0] - x[0], jet.pos[1] - x[1]];
            let g = e[0] * jet.d1[0] + e[1] * jet.d1[1];
            let dg = jet.d1[0] * jet.d1[0] + jet.d1[1] * jet.d1[1] + e[0] * jet.d2[0] + e[1] * jet.d2[1];
            if dg <= 0.0 {
                break;
            }
            u = (u - g / dg / h).clamp(0.0, 1.0);
        }
        let p = c.eval(sa + u * h).pos;
        dist(p, x)
    }
}

/// Max distance from the mirror image `(x, y) ↦ (-x, y)` of each sample to
/// the curve. The mirror is an isometry, so this is the symmetric
/// Hausdorff-style residual.
pub fn symmetry_residual(curve: &ShrinkerCurve) -> Result<f64> {
    let d = CurveDistance::new(curve)?;
    Ok(curve
        .samples
        .par_iter()
        .map(|s| d.distance([-s.x, s.y]))
        .reduce(|| 0.0, f64::max))
}

#[derive(Clone, Debug)]
pub struct SymmetryAlignment {
    pub curve: ShrinkerCurve,
    /// Rotation applied to the input.
    pub rotation: f64,
    pub residual: f64,
}

/// Rotates the curve so that a reflection axis through an r-critical point
/// becomes the y-axis.
pub fn align_symmetry_axis(curve: &ShrinkerCurve) -> Result<SymmetryAlignment> {
    let candidates = axis_candidates(curve);
    if candidates.is_empty() {
        return Err(Error::SymmetryNotFound {
            residual: f64::INFINITY,
        });
    }
    let residual_at = |rot: f64| symmetry_residual(&curve.rotated(rot));
    let mut best: Option<(f64, f64)> = None;
    for alpha in candidates {
        let rot = FRAC_PI_2 - alpha;
        let res = residual_at(rot)?;
        if best.is_none_or(|(_, b)| res < b) {
            best = Some((rot, res));
        }
    }
    let (mut rot, mut res) = best.expect("candidates are non-empty");
    let tol = SYMMETRY_TOL * curve.r_max.max(1.0);
    if res > 1e-12 {
        // the residual is V-shaped in the rotation; polish with golden section
        let width = 1e-3;
        let (refined, r_res) = golden_min(&residual_at, rot - width, rot + width, 1e-13)?;
        if r_res < res {
            rot = refined;
            res = r_res;
        }
    }
    if !(res <= tol) {
        return Err(Error::SymmetryNotFound { residual: res });
    }
    let rot = wrap_angle(rot);
    Ok(SymmetryAlignment {
        curve: curve.rotated(rot),
        rotation: rot,
        residual: res,
    })
}

// Polar angles of the r-critical points, refined to sub-sample accuracy.
fn axis_candidates(curve: &ShrinkerCurve) -> Vec<f64> {
    let pts = curve.points();
    let n = pts.len();
    let r2: Vec<f64> = pts.iter().map(|p| p[0] * p[0] + p[1] * p[1]).collect();
    if curve.r_max - curve.r_min < 1e-12 {
        return vec![pts[0][1].atan2(pts[0][0])];
    }
    let mut out = Vec::new();
    for i in 0..n {
        let (a, b, c) = (r2[(i + n - 1) % n], r2[i], r2[(i + 1) % n]);
        if (b > a && b >= c) || (b < a && b <= c) {
            let curv = a - 2.0 * b + c;
            let t = if curv != 0.0 {
                (0.5 * (a - c) / curv).clamp(-1.0, 1.0)
            } else {
                0.0
            };
            let p = catmull_rom(&pts, i, t);
            out.push(p[1].atan2(p[0]));
        }
    }
    out
}

// Catmull–Rom position at fractional offset t ∈ [-1, 1] from vertex i.
fn catmull_rom(pts: &[[f64; 2]], i: usize, t: f64) -> [f64; 2] {
    let n = pts.len();
    let (base, u) = if t >= 0.0 { (i, t) } else { ((i + n - 1) % n, 1.0 + t) };
    let p0 = pts[(base + n - 1) % n];
    let p1 = pts[base];
    let p2 = pts[(base + 1) % n];
    let p3 = pts[(base + 2) % n];
    let (u2, u3) = (u * u, u * u * u);
    std::array::from_fn(|c| {
        0.5 * (2.0 * p1[c]
            + (p2[c] - p0[c]) * u
            + (2.0 * p0[c] - 5.0 * p1[c] + 4.0 * p2[c] - p3[c]) * u2
            + (3.0 * p1[c] - p0[c] - 3.0 * p2[c] + p3[c]) * u3)
    })
}

pub(crate) fn golden_min<F>(f: &F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}
