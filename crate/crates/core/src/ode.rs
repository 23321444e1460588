//! Explicit Dormand–Prince 5(4) integration for small fixed-size systems,
//! with a sign-change event located by bisection on the step length.

use crate::error::{Error, Result};

/// Step-size policy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepControl {
    Adaptive {
        rtol: f64,
        atol: f64,
    },
    /// Constant step, used for convergence-order studies.
    Fixed {
        h: f64,
    },
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl::Adaptive {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

impl StepControl {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            StepControl::Adaptive { rtol, atol } => rtol > 0.0 && atol > 0.0,
            StepControl::Fixed { h } => h > 0.0 && h.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid step control {self:?}")))
        }
    }
}

// Dormand–Prince tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince step. Returns the fifth-order solution and the
/// embedded error estimate.
pub fn dopri_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], h: f64) -> ([f64; N], [f64; N])
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut k = [[0.0; N]; 7];
    for stage in 0..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(stage) {
            let a = A[stage][j];
            if a != 0.0 {
                for n in 0..N {
                    ys[n] += h * a * kj[n];
                }
            }
        }
        k[stage] = f(t + C[stage] * h, &ys);
    }
    let mut y5 = *y;
    let mut err = [0.0; N];
    for n in 0..N {
        let mut s5 = 0.0;
        let mut s4 = 0.0;
        for stage in 0..7 {
            s5 += B5[stage] * k[stage][n];
            s4 += B4[stage] * k[stage][n];
        }
        y5[n] += h * s5;
        err[n] = h * (s5 - s4);
    }
    (y5, err)
}

/// Accepted step nodes of an integration. Evaluation between nodes re-takes
/// a single step from the preceding node, so interpolated values carry the
/// integrator's own local accuracy.
#[derive(Clone, Debug)]
pub struct Trajectory<const N: usize> {
    nodes: Vec<(f64, [f64; N])>,
}

impl<const N: usize> Trajectory<N> {
    pub fn nodes(&self) -> &[(f64, [f64; N])] {
        &self.nodes
    }

    pub fn end(&self) -> f64 {
        self.nodes.last().map(|n| n.0).unwrap_or(0.0)
    }

    pub fn eval<F>(&self, f: &F, t: f64) -> [f64; N]
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let idx = self.nodes.partition_point(|n| n.0 <= t).saturating_sub(1);
        let (t0, y0) = &self.nodes[idx];
        if t == *t0 {
            return *y0;
        }
        dopri_step(f, *t0, y0, t - t0).0
    }
}

/// Where the event function changed sign.
#[derive(Clone, Copy, Debug)]
pub struct EventHit<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub steps: usize,
}

/// Integration limits for [`integrate_to_event`].
#[derive(Clone, Copy, Debug)]
pub struct EventSearch {
    /// Give up once `t` exceeds this.
    pub t_budget: f64,
    /// Bisection stops when the bracket on `t` is narrower than this.
    pub t_tol: f64,
    pub max_steps: usize,
}

impl Default for EventSearch {
    fn default() -> Self {
        Self {
            t_budget: f64::INFINITY,
            t_tol: 1e-12,
            max_steps: 2_000_000,
        }
    }
}

/// Integrates from `(0, y0)` until `event` goes from positive to non-positive.
///
/// The event is ignored at `t = 0` (the initial state may sit on the event
/// surface). The final node of the returned trajectory is the event point.
pub fn integrate_to_event<const N: usize, F, G>(
    f: &F,
    y0: [f64; N],
    control: StepControl,
    search: EventSearch,
    event: G,
) -> Result<(Trajectory<N>, EventHit<N>)>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    G: Fn(&[f64; N]) -> f64,
{
    control.validate()?;
    let mut nodes = vec![(0.0, y0)];
    let mut t = 0.0;
    let mut y = y0;
    let mut h = match control {
        StepControl::Adaptive { .. } => 1e-3,
        StepControl::Fixed { h } => h,
    };
    let mut steps = 0usize;

    loop {
        if steps >= search.max_steps {
            return Err(Error::NonConvergence(format!(
                "event not found within {} steps (t = {t})",
                search.max_steps
            )));
        }
        if t > search.t_budget {
            return Err(Error::NonConvergence(format!(
                "event not found within integration budget {}",
                search.t_budget
            )));
        }
        let (y_new, err) = dopri_step(f, t, &y, h);
        if y_new.iter().chain(err.iter()).any(|v| !v.is_finite()) {
            // an overlong trial step can overflow the right-hand side
            match control {
                StepControl::Fixed { .. } => return Err(Error::numeric(format!("non-finite state at t = {t}"))),
                StepControl::Adaptive { .. } => {
                    h *= 0.2;
                    if h < 1e-14 * t.abs().max(1.0) {
                        return Err(Error::numeric(format!("non-finite state at t = {t}")));
                    }
                    continue;
                }
            }
        }
        let h_next = match control {
            StepControl::Fixed { h } => h,
            StepControl::Adaptive { rtol, atol } => {
                let mut acc = 0.0;
                for n in 0..N {
                    let scale = atol + rtol * y[n].abs().max(y_new[n].abs());
                    acc += (err[n] / scale).powi(2);
                }
                let norm = (acc / N as f64).sqrt();
                let factor = if norm == 0.0 {
                    5.0
                } else {
                    (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
                };
                if norm > 1.0 {
                    h *= factor;
                    if h < 1e-14 * t.abs().max(1.0) {
                        return Err(Error::numeric(format!("step size underflow at t = {t}")));
                    }
                    continue;
                }
                h * factor
            }
        };
        steps += 1;
        if event(&y_new) <= 0.0 {
            let hit = locate_event(f, t, &y, h, &event, search.t_tol, steps);
            nodes.push((hit.t, hit.y));
            return Ok((Trajectory { nodes }, hit));
        }
        t += h;
        y = y_new;
        nodes.push((t, y));
        h = h_next;
    }
}

fn locate_event<const N: usize, F, G>(
    f: &F,
    t0: f64,
    y0: &[f64; N],
    h: f64,
    event: &G,
    t_tol: f64,
    steps: usize,
) -> EventHit<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    G: Fn(&[f64; N]) -> f64,
{
    // event(y0) > 0 and event(step(h)) <= 0
    let (mut lo, mut hi) = (0.0, h);
    while hi - lo > t_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if event(&dopri_step(f, t0, y0, mid).0) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let dt = 0.5 * (lo + hi);
    EventHit {
        t: t0 + dt,
        y: dopri_step(f, t0, y0, dt).0,
        steps,
    }
}
