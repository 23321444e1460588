//! Shooting on the minimal radius.
//!
//! Starting at an r-critical point `(r0, 0)` with vertical tangent, the arc
//! solves `x' = cos φ, y' = sin φ, φ' = c e^{r²/2}` until `⟨F, T⟩` changes
//! sign again. The polar angle swept, `Δθ(r0)`, decides closure: the curve
//! built from `2q` alternating copies closes with rotation index `p` exactly
//! when `Δθ = πp/q`.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use rayon::prelude::*;

use super::{CurveSample, ShrinkerCurve, DEFAULT_SAMPLES};
use crate::error::{Error, Result};
use crate::ode::{integrate_to_event, EventSearch, StepControl, Trajectory};
use crate::roots::{bisect, scan_bracket};

/// Points in the logistic-spaced bracket scan used when the default bracket
/// does not contain a sign change.
pub const FALLBACK_SCAN_POINTS: usize = 64;

const DEFAULT_BRACKET: (f64, f64) = (1e-3, 1.0 - 1e-4);

/// The arclength ODE for one value of the constant `c = e^{log_c}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShootingMap {
    log_c: f64,
    r0: f64,
}

impl ShootingMap {
    pub fn from_r0(r0: f64) -> Result<Self> {
        if !(r0 > 0.0 && r0 < 1.0) {
            return Err(Error::domain(format!("r0 must lie in (0, 1), got {r0}")));
        }
        Ok(Self {
            log_c: r0.ln() - 0.5 * r0 * r0,
            r0,
        })
    }

    /// Parametrizes by `ln c` directly, which reaches constants far below
    /// the smallest positive double. `r0` is the small root of
    /// `r e^{-r²/2} = c` and may underflow to zero.
    pub fn from_log_c(log_c: f64) -> Result<Self> {
        if !(log_c < -0.5) || !log_c.is_finite() {
            return Err(Error::domain(format!(
                "ln c must be finite and below -1/2, got {log_c}"
            )));
        }
        let mut r = log_c.exp();
        for _ in 0..200 {
            let next = (log_c + 0.5 * r * r).exp();
            if (next - r).abs() <= 1e-16 * r {
                r = next;
                break;
            }
            r = next;
        }
        Ok(Self { log_c, r0: r })
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn log_c(&self) -> f64 {
        self.log_c
    }

    pub fn c_gamma(&self) -> f64 {
        self.log_c.exp()
    }

    pub fn rhs(&self, y: &[f64; 3]) -> [f64; 3] {
        let (sn, cs) = y[2].sin_cos();
        [cs, sn, (self.log_c + 0.5 * (y[0] * y[0] + y[1] * y[1])).exp()]
    }

    fn initial(&self) -> [f64; 3] {
        [self.r0, 0.0, FRAC_PI_2]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShootingResult {
    pub r0: f64,
    pub delta_theta: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// One arc between consecutive r-critical points: from `(r0, 0)` at the
/// minimal radius to the maximal radius.
#[derive(Clone, Debug)]
pub struct HalfArc {
    pub map: ShootingMap,
    traj: Trajectory<3>,
    pub length: f64,
    pub end: [f64; 3],
    pub delta_theta: f64,
    pub r_max: f64,
}

impl HalfArc {
    /// State `(x, y, φ)` at arclength `sigma ∈ [0, length]`.
    pub fn eval(&self, sigma: f64) -> [f64; 3] {
        let map = self.map;
        let f = move |_t: f64, y: &[f64; 3]| map.rhs(y);
        self.traj.eval(&f, sigma.clamp(0.0, self.length))
    }

    /// `n + 1` uniformly spaced samples including both endpoints.
    pub fn samples(&self, n: usize) -> Vec<(f64, [f64; 3])> {
        (0..=n)
            .map(|i| {
                let s = self.length * i as f64 / n as f64;
                (s, self.eval(s))
            })
            .collect()
    }

    pub fn steps(&self) -> usize {
        self.traj.nodes().len() - 1
    }
}

#[derive(Clone, Debug)]
pub enum HalfPeriod {
    /// `r0 = 1`: every point is critical; the curve is the unit circle.
    Circle,
    Arc(HalfArc, ShootingResult),
}

fn shoot(map: ShootingMap, control: StepControl) -> Result<HalfArc> {
    let search = EventSearch {
        t_budget: if map.r0 > 0.0 {
            10.0 * std::f64::consts::TAU / map.r0
        } else {
            f64::INFINITY
        },
        ..Default::default()
    };
    let f = move |_t: f64, y: &[f64; 3]| map.rhs(y);
    let (traj, hit) = integrate_to_event(&f, map.initial(), control, search, |y| {
        y[0] * y[2].cos() + y[1] * y[2].sin()
    })?;
    let end = hit.y;
    Ok(HalfArc {
        map,
        traj,
        length: hit.t,
        end,
        delta_theta: end[1].atan2(end[0]),
        r_max: end[0].hypot(end[1]),
    })
}

/// Integrates one half period from minimal radius `r0`.
pub fn integrate_half_period(r0: f64, control: StepControl) -> Result<HalfPeriod> {
    if r0 == 1.0 {
        return Ok(HalfPeriod::Circle);
    }
    let arc = shoot(ShootingMap::from_r0(r0)?, control)?;
    let result = ShootingResult {
        r0,
        delta_theta: arc.delta_theta,
        iterations: arc.steps(),
        converged: true,
    };
    Ok(HalfPeriod::Arc(arc, result))
}

fn delta_theta(r0: f64, control: StepControl) -> Result<f64> {
    Ok(shoot(ShootingMap::from_r0(r0)?, control)?.delta_theta)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub samples: usize,
    pub control: StepControl,
    /// Required accuracy of `Δθ = πp/q`.
    pub tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            control: StepControl::default(),
            tol: 1e-10,
        }
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The closed shrinker with rotation index `p` made of `2q` half periods.
pub fn solve_curve(p: u32, q: u32, tol: f64) -> Result<(ShrinkerCurve, ShootingResult)> {
    solve_curve_with(
        p,
        q,
        &SolveOptions {
            tol,
            ..Default::default()
        },
    )
}

pub fn solve_curve_with(p: u32, q: u32, opts: &SolveOptions) -> Result<(ShrinkerCurve, ShootingResult)> {
    if p == 0 || q == 0 {
        return Err(Error::domain("p and q must be positive"));
    }
    if gcd(p, q) != 1 {
        return Err(Error::domain(format!("p = {p} and q = {q} are not coprime")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    if opts.samples < 8 {
        return Err(Error::domain("a curve needs at least 8 samples"));
    }
    let ratio = p as f64 / q as f64;
    if 2 * p == q {
        return Err(Error::NoSolution(format!(
            "ratio outside admissible range (1/2, 1/sqrt 2): p/q = {p}/{q} is the boundary; use make-circle for the circle"
        )));
    }
    if !(ratio > 0.5 && ratio < 1.0 / SQRT_2) {
        return Err(Error::NoSolution(format!(
            "ratio outside admissible range (1/2, 1/sqrt 2): p/q = {p}/{q}"
        )));
    }
    let target = PI * ratio;
    let control = opts.control;
    let f = |r0: f64| delta_theta(r0, control).map(|d| d - target);

    let (lo, hi) = DEFAULT_BRACKET;
    let (flo, fhi) = (f(lo)?, f(hi)?);
    let (lo, hi) = if flo.signum() != fhi.signum() {
        (lo, hi)
    } else {
        let zs = logistic_grid(FALLBACK_SCAN_POINTS);
        scan_bracket(f, &zs)?
            .ok_or_else(|| Error::numeric(format!("no sign change of Δθ - π{p}/{q} found on the r0 scan")))?
    };
    let root = if lo == hi {
        crate::roots::Root {
            x: lo,
            fx: 0.0,
            iterations: 0,
        }
    } else {
        bisect(f, lo, hi, opts.tol, 1e-16, 200)?
    };
    if !(root.fx.abs() < opts.tol) {
        return Err(Error::NonConvergence(format!(
            "shooting stalled at r0 = {} with |Δθ - πp/q| = {:e}",
            root.x,
            root.fx.abs()
        )));
    }
    let arc = shoot(ShootingMap::from_r0(root.x)?, control)?;
    let result = ShootingResult {
        r0: root.x,
        delta_theta: arc.delta_theta,
        iterations: root.iterations,
        converged: true,
    };
    Ok((assemble(&arc, p, q, opts.samples)?, result))
}

/// r0 = 1/(1 + e^{-z}) for z spaced uniformly from ln(1e-12) to ln(1e6).
fn logistic_grid(n: usize) -> Vec<f64> {
    let (z0, z1) = (1e-12f64.ln(), 1e6f64.ln());
    (0..n)
        .map(|i| {
            let z = z0 + (z1 - z0) * i as f64 / (n - 1) as f64;
            1.0 / (1.0 + (-z).exp())
        })
        .collect()
}

/// Copies `m = 0..2q`: even copies are the arc rotated by `mΔθ`, odd ones
/// its mirror image in the x-axis, traversed backwards and rotated by
/// `(m+1)Δθ`.
fn assemble(arc: &HalfArc, p: u32, q: u32, n: usize) -> Result<ShrinkerCurve> {
    let lh = arc.length;
    let dt = arc.delta_theta;
    let copies = 2 * q as usize;
    let length = lh * copies as f64;
    let r0 = arc.map.r0();
    let samples: Vec<CurveSample> = (0..n)
        .into_par_iter()
        .map(|i| {
            let s = length * i as f64 / n as f64;
            let m = ((s / lh).floor() as usize).min(copies - 1);
            let sigma = s - m as f64 * lh;
            let (x, y, phi, theta);
            if m.is_multiple_of(2) {
                let [lx, ly, lphi] = arc.eval(sigma);
                let rot = m as f64 * dt;
                let (sn, cs) = rot.sin_cos();
                x = cs * lx - sn * ly;
                y = sn * lx + cs * ly;
                phi = lphi + rot;
                theta = rot + ly.atan2(lx);
            } else {
                let [lx, ly, lphi] = arc.eval(lh - sigma);
                let rot = (m + 1) as f64 * dt;
                let (sn, cs) = rot.sin_cos();
                x = cs * lx + sn * ly;
                y = sn * lx - cs * ly;
                phi = PI - lphi + rot;
                theta = rot - ly.atan2(lx);
            }
            CurveSample {
                s,
                x,
                y,
                phi,
                k: x * phi.sin() - y * phi.cos(),
                r: x.hypot(y),
                theta,
            }
        })
        .collect();
    let total = copies as f64 * dt;
    let closure_error = r0 * 2.0 * (0.5 * total).sin().abs() + (total - 2.0 * PI * p as f64).abs();
    let mut curve = ShrinkerCurve::from_samples(samples, length, arc.map.c_gamma(), p, Some(q), r0, closure_error)?;
    curve.r_min = r0;
    curve.r_max = arc.r_max;
    Ok(curve)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub r0: f64,
    pub delta_theta: f64,
    pub c_gamma: f64,
}

/// `Δθ` on `count` uniformly spaced `r0` in `[r0_min, r0_max]`, evaluated in
/// parallel; row order follows `r0`.
pub fn sweep_delta_theta(r0_min: f64, r0_max: f64, count: usize, control: StepControl) -> Result<Vec<SweepRow>> {
    if !(r0_min > 0.0 && r0_min < r0_max && r0_max < 1.0) {
        return Err(Error::domain(format!(
            "sweep range must satisfy 0 < r0_min < r0_max < 1, got [{r0_min}, {r0_max}]"
        )));
    }
    if count < 2 {
        return Err(Error::domain("a sweep needs at least 2 points"));
    }
    (0..count)
        .into_par_iter()
        .map(|i| {
            let r0 = r0_min + (r0_max - r0_min) * i as f64 / (count - 1) as f64;
            let map = ShootingMap::from_r0(r0)?;
            Ok(SweepRow {
                r0,
                delta_theta: shoot(map, control)?.delta_theta,
                c_gamma: map.c_gamma(),
            })
        })
        .collect()
}

/// Limit of `Δθ` at one end of the shooting range, from a polynomial fit in
/// a variable `u` that vanishes at the endpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct EndpointEstimate {
    pub limit: f64,
    /// `(u, Δθ)` pairs used by the fit.
    pub samples: Vec<(f64, f64)>,
}

/// `Δθ → π/2` as `r0 → 0`, approached like `1/r_max²`. Shooting is run at
/// `ln c ∈ {-100, -200, -400, -800}` (far below representable `r0`) and
/// `Δθ` is fitted quadratically in `u = 1/r_max²`.
pub fn lower_endpoint_limit(control: StepControl) -> Result<EndpointEstimate> {
    let samples = [-100.0, -200.0, -400.0, -800.0]
        .par_iter()
        .map(|&lc| {
            let arc = shoot(ShootingMap::from_log_c(lc)?, control)?;
            Ok((1.0 / (arc.r_max * arc.r_max), arc.delta_theta))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EndpointEstimate {
        limit: quadratic_fit_intercept(&samples)?,
        samples,
    })
}

/// `Δθ → π/√2` as `r0 → 1`, approached like `(1 - r0)²`.
pub fn upper_endpoint_limit(control: StepControl) -> Result<EndpointEstimate> {
    let samples = [0.99, 0.995, 0.998]
        .par_iter()
        .map(|&r0| Ok(((1.0 - r0) * (1.0 - r0), delta_theta(r0, control)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(EndpointEstimate {
        limit: quadratic_fit_intercept(&samples)?,
        samples,
    })
}

/// Least-squares `a + b u + c u²`, returning `a`.
fn quadratic_fit_intercept(pts: &[(f64, f64)]) -> Result<f64> {
    if pts.len() < 3 {
        return Err(Error::domain("quadratic fit needs three points"));
    }
    // normal equations, scaled by the largest |u| for conditioning
    let scale = pts.iter().fold(0.0f64, |m, p| m.max(p.0.abs()));
    let mut m = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for &(u, v) in pts {
        let w = u / scale;
        let basis = [1.0, w, w * w];
        for i in 0..3 {
            rhs[i] += basis[i] * v;
            for j in 0..3 {
                m[i][j] += basis[i] * basis[j];
            }
        }
    }
    let sol = solve3(m, rhs).ok_or_else(|| Error::numeric("singular quadratic fit"))?;
    Ok(sol[0])
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &c| m[a][col].abs().total_cmp(&m[c][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in row + 1..3 {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_period_circle_sentinel() {
        assert!(matches!(
            integrate_half_period(1.0, StepControl::default()),
            Ok(HalfPeriod::Circle)
        ));
        assert!(matches!(
            integrate_half_period(1.2, StepControl::default()),
            Err(Error::InputDomain(_))
        ));
    }

    #[test]
    fn half_period_event_is_r_critical() {
        let HalfPeriod::Arc(arc, res) = integrate_half_period(0.3, StepControl::default()).unwrap() else {
            panic!("expected an arc");
        };
        let [x, y, phi] = arc.end;
        assert!((x * phi.cos() + y * phi.sin()).abs() < 1e-10);
        assert!(res.delta_theta > FRAC_PI_2 && res.delta_theta < PI / SQRT_2);
        // transcendental relation along the arc
        for (_, [x, y, phi]) in arc.samples(50) {
            let k = arc.map.rhs(&[x, y, phi])[2];
            assert!((k * (-(x * x + y * y) / 2.0).exp() - arc.map.c_gamma()).abs() < 1e-15);
        }
    }

    #[test]
    fn log_c_matches_r0_parametrization() {
        let a = ShootingMap::from_r0(0.2).unwrap();
        let b = ShootingMap::from_log_c(a.log_c()).unwrap();
        assert!((a.r0() - b.r0()).abs() < 1e-15);
        assert!(ShootingMap::from_log_c(-0.4).is_err());
        assert_eq!(ShootingMap::from_log_c(-1000.0).unwrap().r0(), 0.0);
    }

    #[test]
    fn quadratic_fit_recovers_intercept() {
        let pts: Vec<(f64, f64)> = [0.1, 0.2, 0.3, 0.5]
            .iter()
            .map(|&u| (u, 2.0 - u + 3.0 * u * u))
            .collect();
        assert!((quadratic_fit_intercept(&pts).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_ratios() {
        assert!(matches!(solve_curve(3, 4, 1e-10), Err(Error::NoSolution(_))));
        let err = solve_curve(1, 2, 1e-10).unwrap_err();
        assert!(err.to_string().contains("make-circle"));
        assert!(matches!(solve_curve(2, 4, 1e-10), Err(Error::InputDomain(_))));
    }
}
