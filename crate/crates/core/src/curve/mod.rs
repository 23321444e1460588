//! Closed planar self-shrinking curves.
//!
//! A [`ShrinkerCurve`] is a closed loop of arclength samples carrying
//! position, tangent angle and curvature. Between samples the position is a
//! quintic Hermite interpolant and the tangent angle another one (with
//! `φ' = k`, `φ'' = k'`); product tori use these as their "analytic"
//! derivatives.

mod certify;
mod shooting;

pub use certify::{
    align_symmetry_axis, critical_curvatures, curvature_from_radius, radius_bounds, shrinker_residual_curve,
    shrinker_residual_field, shrinker_residual_points, symmetry_residual, total_turning, verify_transcendental,
    SymmetryAlignment,
};
pub use shooting::{
    integrate_half_period, lower_endpoint_limit, solve_curve, solve_curve_with, sweep_delta_theta,
    upper_endpoint_limit, EndpointEstimate, HalfArc, HalfPeriod, ShootingMap, ShootingResult, SolveOptions, SweepRow,
    FALLBACK_SCAN_POINTS,
};

pub(crate) use certify::{golden_min, CurveDistance};

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Default number of samples per curve.
pub const DEFAULT_SAMPLES: usize = 2048;

/// `c_Gamma` of the unit circle, `e^{-1/2}`.
pub fn circle_constant() -> f64 {
    (-0.5f64).exp()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveSample {
    pub s: f64,
    pub x: f64,
    pub y: f64,
    /// Tangent angle.
    pub phi: f64,
    /// Signed curvature, positive when turning counterclockwise.
    pub k: f64,
    pub r: f64,
    /// Polar angle, lifted continuously along the curve.
    pub theta: f64,
}

impl CurveSample {
    pub fn pos(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn tangent(&self) -> [f64; 2] {
        [self.phi.cos(), self.phi.sin()]
    }

    /// Curvature vector `k N` with `N` the left normal.
    pub fn curvature_vector(&self) -> [f64; 2] {
        [-self.k * self.phi.sin(), self.k * self.phi.cos()]
    }
}

/// Position and first two arclength derivatives at one parameter value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveJet {
    pub pos: [f64; 2],
    pub d1: [f64; 2],
    pub d2: [f64; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShrinkerCurve {
    /// One period, `samples[0].s == 0`, without a repeated endpoint.
    pub samples: Vec<CurveSample>,
    /// Period length.
    pub length: f64,
    pub c_gamma: f64,
    /// Rotation index.
    pub p: u32,
    /// Half-period count; `None` for the circle (and for curves that are not
    /// labelled by a closure ratio).
    pub q: Option<u32>,
    /// Minimal radius used as shooting parameter.
    pub r0: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub closure_error: f64,
}

impl ShrinkerCurve {
    /// Builds a curve from samples with `s`, position, `phi` and `k` filled
    /// in; `r` and `theta` are recomputed, `theta` lifted continuously.
    pub fn from_samples(
        mut samples: Vec<CurveSample>,
        length: f64,
        c_gamma: f64,
        p: u32,
        q: Option<u32>,
        r0: f64,
        closure_error: f64,
    ) -> Result<Self> {
        if samples.len() < 3 {
            return Err(Error::domain("a closed curve needs at least 3 samples"));
        }
        if !(length > 0.0) || samples[0].s != 0.0 {
            return Err(Error::domain(
                "samples must start at s = 0 and the length must be positive",
            ));
        }
        if samples.windows(2).any(|w| !(w[1].s > w[0].s)) || samples.last().map(|l| l.s >= length) == Some(true) {
            return Err(Error::domain(
                "sample arclengths must increase strictly within [0, length)",
            ));
        }
        let mut prev: Option<f64> = None;
        for smp in &mut samples {
            smp.r = smp.x.hypot(smp.y);
            let raw = smp.y.atan2(smp.x);
            smp.theta = match prev {
                None => raw,
                Some(p) => p + wrap_angle(raw - p),
            };
            prev = Some(smp.theta);
        }
        let (r_min, r_max) = samples
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), s| (lo.min(s.r), hi.max(s.r)));
        Ok(Self {
            samples,
            length,
            c_gamma,
            p,
            q,
            r0,
            r_min,
            r_max,
            closure_error,
        })
    }

    /// A closed curve from an arbitrary closed polyline (vertices in order,
    /// no repeated endpoint). Tangent and curvature come from periodic
    /// centered differences; arclength from chord lengths. Used for control
    /// curves and flow snapshots.
    pub fn from_points(points: &[[f64; 2]], c_gamma: f64) -> Result<Self> {
        let n = points.len();
        if n < 5 {
            return Err(Error::domain("a polyline curve needs at least 5 points"));
        }
        let mut s = vec![0.0; n];
        for i in 1..n {
            s[i] = s[i - 1] + dist(points[i - 1], points[i]);
        }
        let length = s[n - 1] + dist(points[n - 1], points[0]);
        let mut samples = Vec::with_capacity(n);
        let mut prev_phi: Option<f64> = None;
        for i in 0..n {
            let pm = points[(i + n - 1) % n];
            let pc = points[i];
            let pp = points[(i + 1) % n];
            let hm = dist(pm, pc);
            let hp = dist(pc, pp);
            if hm == 0.0 || hp == 0.0 {
                return Err(Error::domain(format!("repeated vertex at index {i}")));
            }
            // non-uniform three-point derivatives in chord length
            let d1: [f64; 2] = std::array::from_fn(|c| {
                (hm * hm * (pp[c] - pc[c]) + hp * hp * (pc[c] - pm[c])) / (hm * hp * (hm + hp))
            });
            let d2: [f64; 2] =
                std::array::from_fn(|c| 2.0 * (hm * (pp[c] - pc[c]) - hp * (pc[c] - pm[c])) / (hm * hp * (hm + hp)));
            let speed = d1[0].hypot(d1[1]);
            let raw = d1[1].atan2(d1[0]);
            let phi = match prev_phi {
                None => raw,
                Some(p) => p + wrap_angle(raw - p),
            };
            prev_phi = Some(phi);
            let k = (d1[0] * d2[1] - d1[1] * d2[0]) / speed.powi(3);
            samples.push(CurveSample {
                s: s[i],
                x: pc[0],
                y: pc[1],
                phi,
                k,
                r: 0.0,
                theta: 0.0,
            });
        }
        let mut curve = Self::from_samples(samples, length, c_gamma, 0, None, 0.0, 0.0)?;
        let turning = total_turning(&curve);
        curve.p = (turning / TAU).round().abs() as u32;
        curve.closure_error = (turning.abs() - TAU * curve.p as f64).abs();
        curve.r0 = curve.r_min;
        Ok(curve)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_circle(&self) -> bool {
        self.q.is_none() && self.p == 1 && (self.c_gamma - circle_constant()).abs() < 1e-12
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        self.samples.iter().map(|s| s.pos()).collect()
    }

    /// Position, tangent and curvature vector at arclength `s` (periodic).
    pub fn eval(&self, s: f64) -> CurveJet {
        let n = self.samples.len();
        let s = s.rem_euclid(self.length);
        let idx = self.samples.partition_point(|smp| smp.s <= s).saturating_sub(1);
        let a = &self.samples[idx];
        let (b, s_b) = if idx + 1 < n {
            (&self.samples[idx + 1], self.samples[idx + 1].s)
        } else {
            (&self.samples[0], self.length)
        };
        let h = s_b - a.s;
        let u = (s - a.s) / h;
        let dk = [self.dk_ds(idx), self.dk_ds((idx + 1) % n)];
        quintic_hermite(a, b, dk, h, u)
    }

    /// `dk/ds` at sample `i` from the five-point Lagrange derivative over
    /// the periodic neighbours (fourth order, non-uniform spacing allowed).
    fn dk_ds(&self, i: usize) -> f64 {
        let n = self.samples.len() as isize;
        let node = |o: isize| {
            let m = i as isize + o;
            let wraps = m.div_euclid(n) as f64;
            let smp = &self.samples[m.rem_euclid(n) as usize];
            (smp.s + wraps * self.length, smp.k)
        };
        let pts: Vec<(f64, f64)> = (-2..=2).map(node).collect();
        let x0 = pts[2].0;
        let mut d = 0.0;
        for (j, &(xj, kj)) in pts.iter().enumerate() {
            let w = if j == 2 {
                pts.iter()
                    .enumerate()
                    .filter(|&(m, _)| m != 2)
                    .map(|(_, p)| 1.0 / (x0 - p.0))
                    .sum::<f64>()
            } else {
                let mut num = 1.0;
                let mut den = 1.0;
                for (m, p) in pts.iter().enumerate() {
                    if m != j {
                        den *= xj - p.0;
                        if m != 2 {
                            num *= x0 - p.0;
                        }
                    }
                }
                num / den
            };
            d += w * kj;
        }
        d
    }

    /// Uniformly scaled copy: arclength and position scale by `f`, curvature
    /// by `1/f`. The constant `c_gamma` is kept as is.
    pub fn scaled(&self, f: f64) -> Self {
        let samples = self
            .samples
            .iter()
            .map(|s| CurveSample {
                s: s.s * f,
                x: s.x * f,
                y: s.y * f,
                phi: s.phi,
                k: s.k / f,
                r: s.r * f,
                theta: s.theta,
            })
            .collect();
        Self {
            samples,
            length: self.length * f,
            r0: self.r0 * f,
            r_min: self.r_min * f,
            r_max: self.r_max * f,
            closure_error: self.closure_error * f,
            ..self.clone()
        }
    }

    /// Copy rotated about the origin by `angle`.
    pub fn rotated(&self, angle: f64) -> Self {
        let (sn, cs) = angle.sin_cos();
        let samples = self
            .samples
            .iter()
            .map(|s| CurveSample {
                x: cs * s.x - sn * s.y,
                y: sn * s.x + cs * s.y,
                phi: s.phi + angle,
                theta: s.theta + angle,
                ..*s
            })
            .collect();
        Self {
            samples,
            ..self.clone()
        }
    }

    /// Copy translated by `(dx, dy)`.
    pub fn translated(&self, dx: f64, dy: f64) -> Result<Self> {
        let samples = self
            .samples
            .iter()
            .map(|s| CurveSample {
                x: s.x + dx,
                y: s.y + dy,
                ..*s
            })
            .collect();
        Self::from_samples(
            samples,
            self.length,
            self.c_gamma,
            self.p,
            self.q,
            self.r0,
            self.closure_error,
        )
    }
}

/// The unit circle with `n` uniform samples starting at `(1, 0)`.
pub fn make_circle_with(n: usize) -> Result<ShrinkerCurve> {
    if n < 8 {
        return Err(Error::domain("circle needs at least 8 samples"));
    }
    let samples = (0..n)
        .map(|i| {
            let t = TAU * i as f64 / n as f64;
            let (y, x) = t.sin_cos();
            CurveSample {
                s: t,
                x,
                y,
                phi: t + 0.5 * PI,
                k: 1.0,
                r: 1.0,
                theta: t,
            }
        })
        .collect();
    ShrinkerCurve::from_samples(samples, TAU, circle_constant(), 1, None, 1.0, 0.0)
}

/// The unit circle at the default sample count.
pub fn make_circle() -> ShrinkerCurve {
    make_circle_with(DEFAULT_SAMPLES).expect("default sample count is valid")
}

pub(crate) fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

// Quintic Hermite basis: value, first and second derivative in u.
// Order: p0, h*v0, h^2*a0, h^2*a1, h*v1, p1.
fn hermite_basis(u: f64) -> [[f64; 6]; 3] {
    const COEF: [[f64; 6]; 6] = [
        [1.0, 0.0, 0.0, -10.0, 15.0, -6.0],
        [0.0, 1.0, 0.0, -6.0, 8.0, -3.0],
        [0.0, 0.0, 0.5, -1.5, 1.5, -0.5],
        [0.0, 0.0, 0.0, 0.5, -1.0, 0.5],
        [0.0, 0.0, 0.0, -4.0, 7.0, -3.0],
        [0.0, 0.0, 0.0, 10.0, -15.0, 6.0],
    ];
    let mut out = [[0.0; 6]; 3];
    for (b, c) in COEF.iter().enumerate() {
        let mut v = 0.0;
        let mut d = 0.0;
        let mut dd = 0.0;
        for p in (0..6).rev() {
            v = v * u + c[p];
        }
        for p in (1..6).rev() {
            d = d * u + p as f64 * c[p];
        }
        for p in (2..6).rev() {
            dd = dd * u + (p * (p - 1)) as f64 * c[p];
        }
        out[0][b] = v;
        out[1][b] = d;
        out[2][b] = dd;
    }
    out
}

fn quintic_hermite(a: &CurveSample, b: &CurveSample, dk: [f64; 2], h: f64, u: f64) -> CurveJet {
    let basis = hermite_basis(u);
    let (ta, na) = (a.tangent(), a.curvature_vector());
    let (tb, nb) = (b.tangent(), b.curvature_vector());
    let pa = a.pos();
    let pb = b.pos();
    let combine = |w: &[f64; 6], c: usize| {
        w[0] * pa[c] + w[1] * h * ta[c] + w[2] * h * h * na[c] + w[3] * h * h * nb[c] + w[4] * h * tb[c] + w[5] * pb[c]
    };
    // The parametrization is by arclength, so the tangent comes from the
    // turning angle (φ' = k, φ'' = k') and is exactly unit length.
    let phi_b = a.phi + wrap_angle(b.phi - a.phi);
    let angle = |w: &[f64; 6]| {
        w[0] * a.phi + w[1] * h * a.k + w[2] * h * h * dk[0] + w[3] * h * h * dk[1] + w[4] * h * b.k + w[5] * phi_b
    };
    let phi = angle(&basis[0]);
    let k = angle(&basis[1]) / h;
    let (sn, cs) = phi.sin_cos();
    CurveJet {
        pos: std::array::from_fn(|c| combine(&basis[0], c)),
        d1: [cs, sn],
        d2: [-k * sn, k * cs],
    }
}
