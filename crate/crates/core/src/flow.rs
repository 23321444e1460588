//! Curve-shortening flow `∂F/∂t = κ` and its Gaussian rescaling
//! `∂F/∂τ = κ + F^⊥`, whose fixed points are the self-shrinkers.
//!
//! Explicit Euler on a closed polyline, resampled to uniform arclength
//! after every step.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{dist, golden_min, shrinker_residual_points, CurveDistance, ShrinkerCurve};
use crate::error::{Error, Result};
use crate::registry::{Named, Registry};

/// Explicit stability bound: `dt < STABILITY · (min segment)²`.
pub const STABILITY: f64 = 0.4;

/// Segments shorter than this mean the polyline has collapsed.
pub const COLLAPSE_LENGTH: f64 = 1e-10;

pub const MIN_VERTICES: usize = 8;

pub trait FlowScheme: Named + Send + Sync {
    /// Velocity of a vertex at `p` with unit tangent `t` and curvature
    /// vector `kappa`.
    fn velocity(&self, p: [f64; 2], t: [f64; 2], kappa: [f64; 2]) -> [f64; 2];
}

struct Csf;
struct Rescaled;

impl Named for Csf {
    fn name(&self) -> &'static str {
        "csf"
    }
}

impl Named for Rescaled {
    fn name(&self) -> &'static str {
        "rescaled"
    }
}

impl FlowScheme for Csf {
    fn velocity(&self, _p: [f64; 2], _t: [f64; 2], kappa: [f64; 2]) -> [f64; 2] {
        kappa
    }
}

impl FlowScheme for Rescaled {
    fn velocity(&self, p: [f64; 2], t: [f64; 2], kappa: [f64; 2]) -> [f64; 2] {
        let pt = p[0] * t[0] + p[1] * t[1];
        [kappa[0] + p[0] - pt * t[0], kappa[1] + p[1] - pt * t[1]]
    }
}

pub fn flow_schemes() -> Registry<dyn FlowScheme> {
    let mut r: Registry<dyn FlowScheme> = Registry::new("flow scheme");
    r.register(Box::new(Csf));
    r.register(Box::new(Rescaled));
    r
}

/// One row of the flow time series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub tau: f64,
    pub length: f64,
    /// Signed (shoelace) area; positive for counter-clockwise loops.
    pub area: f64,
    /// `L² / (4π|A|)`.
    pub isoperimetric: f64,
    pub shrinker_residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    pub points: Vec<[f64; 2]>,
    pub tau: f64,
}

impl FlowState {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.len() < MIN_VERTICES {
            return Err(Error::domain(format!(
                "flow needs at least {MIN_VERTICES} vertices, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(Error::domain("non-finite vertex"));
        }
        let state = Self { points, tau: 0.0 };
        if state.min_segment() == 0.0 {
            return Err(Error::domain("repeated vertex"));
        }
        Ok(state)
    }

    pub fn from_curve(c: &ShrinkerCurve) -> Result<Self> {
        Self::new(c.points())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn min_segment(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| dist(self.points[i], self.points[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn length(&self) -> f64 {
        let n = self.points.len();
        (0..n).map(|i| dist(self.points[i], self.points[(i + 1) % n])).sum()
    }

    pub fn area(&self) -> f64 {
        let n = self.points.len();
        0.5 * (0..n)
            .map(|i| {
                let (a, b) = (self.points[i], self.points[(i + 1) % n]);
                a[0] * b[1] - a[1] * b[0]
            })
            .sum::<f64>()
    }

    pub fn diagnostics(&self) -> Result<Diagnostics> {
        let (length, area) = (self.length(), self.area());
        Ok(Diagnostics {
            tau: self.tau,
            length,
            area,
            isoperimetric: length * length / (4.0 * PI * area.abs()),
            shrinker_residual: shrinker_residual_points(&self.points)?,
        })
    }

    /// The polyline as a curve (chord-length parametrized) carrying `c_gamma`.
    pub fn to_curve(&self, c_gamma: f64) -> Result<ShrinkerCurve> {
        ShrinkerCurve::from_points(&self.points, c_gamma)
    }
}

/// Unit tangent and curvature vector at every vertex, from periodic
/// three-point differences in chord length.
fn tangents_and_curvature(pts: &[[f64; 2]]) -> Vec<([f64; 2], [f64; 2])> {
    let n = pts.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let (pm, pc, pp) = (pts[(i + n - 1) % n], pts[i], pts[(i + 1) % n]);
            let (hm, hp) = (dist(pm, pc), dist(pc, pp));
            let den = hm * hp * (hm + hp);
            let d1: [f64; 2] = std::array::from_fn(|c| (hm * hm * (pp[c] - pc[c]) + hp * hp * (pc[c] - pm[c])) / den);
            let d2: [f64; 2] = std::array::from_fn(|c| 2.0 * (hm * (pp[c] - pc[c]) - hp * (pc[c] - pm[c])) / den);
            let sp = d1[0].hypot(d1[1]);
            let t = [d1[0] / sp, d1[1] / sp];
            let tang = d2[0] * t[0] + d2[1] * t[1];
            // no division by |F'|²: in chord length that factor is 1 + O(h²)
            // anyway, and without it a regular polygon has curvature exactly
            // 1/R, so round circles are exact discrete fixed points
            let kappa = [d2[0] - tang * t[0], d2[1] - tang * t[1]];
            (t, kappa)
        })
        .collect()
}

/// Resamples a closed polyline at `n` points equally spaced in chord
/// length, starting at vertex 0, by periodic Catmull–Rom interpolation.
pub fn resample_uniform(pts: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let n = pts.len();
    let mut cum = Vec::with_capacity(n + 1);
    cum.push(0.0);
    for i in 0..n {
        cum.push(cum[i] + dist(pts[i], pts[(i + 1) % n]));
    }
    let total = cum[n];
    (0..n)
        .map(|k| {
            let target = total * k as f64 / n as f64;
            let i = (cum.partition_point(|&c| c <= target) - 1).min(n - 1);
            let u = (target - cum[i]) / (cum[i + 1] - cum[i]);
            let p0 = pts[(i + n - 1) % n];
            let (p1, p2, p3) = (pts[i], pts[(i + 1) % n], pts[(i + 2) % n]);
            std::array::from_fn(|c| {
                0.5 * (2.0 * p1[c]
                    + (p2[c] - p0[c]) * u
                    + (2.0 * p0[c] - 5.0 * p1[c] + 4.0 * p2[c] - p3[c]) * u * u
                    + (3.0 * (p1[c] - p2[c]) + p3[c] - p0[c]) * u * u * u)
            })
        })
        .collect()
}

/// One explicit Euler step followed by uniform resampling.
pub fn step(state: &FlowState, dt: f64, scheme: &dyn FlowScheme) -> Result<FlowState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain(format!("time step must be positive, got {dt}")));
    }
    let h = state.min_segment();
    if !(h >= COLLAPSE_LENGTH) {
        return Err(Error::numeric(format!("polyline collapsed (segment length {h:e})")));
    }
    if !(dt < STABILITY * h * h) {
        return Err(Error::domain(format!(
            "time step {dt:e} violates the stability bound {:e} = {STABILITY}·(min segment)²",
            STABILITY * h * h
        )));
    }
    let frames = tangents_and_curvature(&state.points);
    let moved: Vec<[f64; 2]> = state
        .points
        .par_iter()
        .zip(frames.par_iter())
        .map(|(&p, &(t, kappa))| {
            let v = scheme.velocity(p, t, kappa);
            [p[0] + dt * v[0], p[1] + dt * v[1]]
        })
        .collect();
    if moved.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
        return Err(Error::numeric("non-finite vertex after step"));
    }
    let next = FlowState {
        points: resample_uniform(&moved),
        tau: state.tau + dt,
    };
    let h = next.min_segment();
    if !(h >= COLLAPSE_LENGTH) {
        return Err(Error::numeric(format!("polyline collapsed (segment length {h:e})")));
    }
    Ok(next)
}

pub fn step_csf(state: &FlowState, dt: f64) -> Result<FlowState> {
    step(state, dt, &Csf)
}

pub fn step_rescaled(state: &FlowState, dt: f64) -> Result<FlowState> {
    step(state, dt, &Rescaled)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveOptions {
    pub t_end: f64,
    pub dt: f64,
    /// Diagnostics are recorded whenever τ crosses a multiple of this
    /// (plus at the start and the end).
    pub sample_interval: f64,
    /// When set, each step uses `min(dt, adaptive · (min segment)²)` so the
    /// flow can be followed into a collapse.
    #[serde(default)]
    pub adaptive: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct FlowRun {
    pub state: FlowState,
    pub series: Vec<Diagnostics>,
    pub steps: usize,
}

/// Steps until `t_end`. Step errors come back as [`Error::FlowFailure`]
/// with the τ reached; a stability violation after the first step means
/// the curve is collapsing and is reported as a numeric failure.
pub fn evolve(initial: &FlowState, opts: &EvolveOptions, scheme: &dyn FlowScheme) -> Result<FlowRun> {
    if !(opts.t_end > 0.0 && opts.t_end.is_finite()) {
        return Err(Error::domain(format!(
            "final time must be positive, got {}",
            opts.t_end
        )));
    }
    if !(opts.dt > 0.0) || !(opts.sample_interval > 0.0) {
        return Err(Error::domain("time step and sample interval must be positive"));
    }
    if let Some(c) = opts.adaptive {
        if !(c > 0.0 && c < STABILITY) {
            return Err(Error::domain(format!("adaptive factor must lie in (0, {STABILITY})")));
        }
    }
    let fail = |tau: f64, source: Error| Error::FlowFailure {
        tau,
        source: Box::new(source),
    };
    let mut state = initial.clone();
    let mut series = vec![state.diagnostics().map_err(|e| fail(state.tau, e))?];
    let end = initial.tau + opts.t_end;
    let mut next_sample = initial.tau + opts.sample_interval;
    let mut steps = 0;
    while end - state.tau > 1e-12 * end.abs().max(1.0) {
        let mut dt = opts.dt.min(end - state.tau);
        if let Some(c) = opts.adaptive {
            let h = state.min_segment();
            dt = dt.min(c * h * h);
        }
        state = match step(&state, dt, scheme) {
            Ok(s) => s,
            Err(Error::InputDomain(msg)) if steps > 0 => {
                return Err(fail(state.tau, Error::numeric(format!("curve collapsing: {msg}"))));
            }
            Err(e) => return Err(fail(state.tau, e)),
        };
        steps += 1;
        if state.tau >= next_sample - 1e-12 {
            series.push(state.diagnostics().map_err(|e| fail(state.tau, e))?);
            while next_sample <= state.tau + 1e-12 {
                next_sample += opts.sample_interval;
            }
        }
    }
    if series.last().map(|d| d.tau) != Some(state.tau) {
        series.push(state.diagnostics().map_err(|e| fail(state.tau, e))?);
    }
    Ok(FlowRun { state, series, steps })
}

/// Hausdorff distance between two closed polylines after the rotation
/// about the origin that minimizes it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub distance: f64,
    pub rotation: f64,
}

pub fn shape_drift(reference: &[[f64; 2]], current: &[[f64; 2]]) -> Result<Drift> {
    let a = ShrinkerCurve::from_points(reference, 0.0)?;
    let b = ShrinkerCurve::from_points(current, 0.0)?;
    let (da, db) = (CurveDistance::new(&a)?, CurveDistance::new(&b)?);
    let rot = |p: [f64; 2], th: f64| {
        let (s, c) = th.sin_cos();
        [c * p[0] - s * p[1], s * p[0] + c * p[1]]
    };
    let hausdorff = |th: f64| -> Result<f64> {
        let fwd = current
            .par_iter()
            .map(|&p| da.distance(rot(p, th)))
            .reduce(|| 0.0, f64::max);
        let back = reference
            .par_iter()
            .map(|&p| db.distance(rot(p, -th)))
            .reduce(|| 0.0, f64::max);
        Ok(fwd.max(back))
    };
    const SCAN: usize = 36;
    let step = TAU / SCAN as f64;
    let mut best = (0.0, hausdorff(0.0)?);
    for k in 1..SCAN {
        let th = -PI + k as f64 * step;
        let v = hausdorff(th)?;
        if v < best.1 {
            best = (th, v);
        }
    }
    let (th, v) = golden_min(&hausdorff, best.0 - step, best.0 + step, 1e-10)?;
    let (rotation, distance) = if v < best.1 { (th, v) } else { best };
    Ok(Drift { distance, rotation })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(n: usize, r: f64) -> Vec<[f64; 2]> {
        (0..n)
            .map(|i| {
                let t = TAU * i as f64 / n as f64;
                [r * t.cos(), r * t.sin()]
            })
            .collect()
    }

    #[test]
    fn resampling_keeps_uniform_circle() {
        let c = circle(64, 1.3);
        let r = resample_uniform(&c);
        for (a, b) in c.iter().zip(&r) {
            assert!(dist(*a, *b) < 1e-12);
        }
    }

    #[test]
    fn curvature_of_regular_polygon_is_exact() {
        for (p, (t, k)) in circle(256, 2.0).iter().zip(tangents_and_curvature(&circle(256, 2.0))) {
            assert!((k[0] + p[0] / 4.0).abs() < 1e-12 && (k[1] + p[1] / 4.0).abs() < 1e-12);
            assert!((t[0] * p[0] + t[1] * p[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn stability_bound_enforced() {
        let s = FlowState::new(circle(64, 1.0)).unwrap();
        let h = s.min_segment();
        assert!(matches!(step_csf(&s, 0.41 * h * h), Err(Error::InputDomain(_))));
        assert!(step_csf(&s, 0.39 * h * h).is_ok());
    }

    #[test]
    fn rescaled_velocity_vanishes_on_unit_circle() {
        let p = [0.6, 0.8];
        let t = [-0.8, 0.6];
        let v = Rescaled.velocity(p, t, [-0.6, -0.8]);
        assert!(v[0].abs() < 1e-15 && v[1].abs() < 1e-15);
    }
}
