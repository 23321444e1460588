use std::f64::consts::{PI, TAU};

use lagshrink_core::curve::*;
use lagshrink_core::flow::*;
use lagshrink_core::Error;
use proptest::prelude::*;

fn circle(n: usize, r: f64) -> FlowState {
    FlowState::new(make_circle_with(n).unwrap().scaled(r).points()).unwrap()
}

fn opts(t_end: f64, dt: f64, sample_interval: f64) -> EvolveOptions {
    EvolveOptions {
        t_end,
        dt,
        sample_interval,
        adaptive: None,
    }
}

fn scheme(name: &str) -> &'static dyn FlowScheme {
    Box::leak(Box::new(flow_schemes())).get(name).unwrap()
}

/// Least-squares slope of area against time.
fn area_slope(states: &[FlowState]) -> f64 {
    let n = states.len() as f64;
    let (mt, ma) = states
        .iter()
        .fold((0.0, 0.0), |(t, a), s| (t + s.tau / n, a + s.area() / n));
    let num: f64 = states.iter().map(|s| (s.tau - mt) * (s.area() - ma)).sum();
    let den: f64 = states.iter().map(|s| (s.tau - mt).powi(2)).sum();
    num / den
}

fn first_steps(mut s: FlowState, steps: usize) -> Vec<FlowState> {
    let h = s.min_segment();
    let dt = 0.2 * h * h;
    let mut out = vec![s.clone()];
    for _ in 0..steps {
        s = step_csf(&s, dt).unwrap();
        out.push(s.clone());
    }
    out
}

#[test]
fn round_circle_follows_radius_law() {
    let run = evolve(&circle(512, 1.0), &opts(0.25, 2e-5, 0.05), scheme("csf")).unwrap();
    let r = run.state.length() / TAU;
    assert!((r - 0.5f64.sqrt()).abs() < 1e-3, "{r}");
    assert_eq!(run.state.len(), 512);
    assert!((run.state.tau - 0.25).abs() < 1e-12);
    for w in run.series.windows(2) {
        let expect = (1.0 - 2.0 * w[1].tau).sqrt() * TAU;
        assert!((w[1].length - expect).abs() < 1e-3);
    }
}

#[test]
fn area_decays_at_two_pi_times_rotation_index() {
    let (g23, _) = solve_curve(2, 3, 1e-10).unwrap();
    for (state, p) in [(circle(512, 1.0), 1.0), (FlowState::from_curve(&g23).unwrap(), 2.0)] {
        let slope = area_slope(&first_steps(state, 50));
        assert!((slope + TAU * p).abs() < 0.01 * TAU * p, "{slope}");
    }
    // over a fixed time window as well
    let run = evolve(
        &FlowState::from_curve(&g23).unwrap(),
        &opts(0.01, 1e-5, 0.001),
        scheme("csf"),
    )
    .unwrap();
    let slope = (run.series.last().unwrap().area - run.series[0].area) / 0.01;
    assert!((slope + 4.0 * PI).abs() < 0.04 * PI, "{slope}");
}

#[test]
fn unit_circle_is_stationary_under_rescaled_flow() {
    let s = circle(512, 1.0);
    let next = step_rescaled(&s, 1e-5).unwrap();
    let disp = s
        .points
        .iter()
        .zip(&next.points)
        .map(|(a, b)| (a[0] - b[0]).hypot(a[1] - b[1]))
        .fold(0.0, f64::max);
    assert!(disp / 1e-5 < 1e-4);

    let run = evolve(&circle(256, 1.0), &opts(5.0, 2e-4, 0.5), scheme("rescaled")).unwrap();
    assert!(run.series.iter().all(|d| d.shrinker_residual < 1e-3));
}

#[test]
fn dilated_circles_leave_monotonically() {
    for (r0, sign) in [(1.05, 1.0), (0.95, -1.0)] {
        let run = evolve(&circle(256, r0), &opts(0.2, 1e-4, 0.01), scheme("rescaled")).unwrap();
        let radii: Vec<f64> = run.series.iter().map(|d| d.length / TAU).collect();
        for w in radii.windows(2) {
            assert!(sign * (w[1] - w[0]) > 0.0, "{radii:?}");
        }
        // dR/dτ = R - 1/R for a round circle
        let r = radii[0];
        let rate = (radii[1] - radii[0]) / 0.01;
        assert!((rate - (r - 1.0 / r)).abs() < 0.01 * (r - 1.0 / r).abs() + 1e-3);
    }
}

#[test]
fn shrinking_curve_is_stationary_under_rescaled_flow() {
    let opts_curve = SolveOptions {
        samples: 1024,
        ..SolveOptions::default()
    };
    let (g, _) = solve_curve_with(2, 3, &opts_curve).unwrap();
    let s0 = FlowState::from_curve(&g).unwrap();
    let run = evolve(&s0, &opts(0.02, 4e-5, 0.01), scheme("rescaled")).unwrap();
    let drift = shape_drift(&s0.points, &run.state.points).unwrap();
    assert!(drift.distance < 5e-3, "{drift:?}");
    // the polyline gets no rotation from the flow
    assert!(drift.rotation.abs() < 1e-3);
}

#[test]
fn circle_goes_extinct_at_one_half() {
    let o = EvolveOptions {
        adaptive: Some(0.2),
        ..opts(1.0, 1e-3, 0.1)
    };
    match evolve(&circle(128, 1.0), &o, scheme("csf")) {
        Err(Error::FlowFailure { tau, source }) => {
            assert!((tau - 0.5).abs() < 1e-3, "{tau}");
            assert!(matches!(*source, Error::NumericFailure(_)));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn ellipse_becomes_rounder() {
    let ell: Vec<[f64; 2]> = (0..256)
        .map(|i| {
            let t = TAU * i as f64 / 256.0;
            [2.0 * t.cos(), t.sin()]
        })
        .collect();
    let s = FlowState::new(resample_uniform(&ell)).unwrap();
    let o = EvolveOptions {
        adaptive: Some(0.2),
        ..opts(0.7, 1e-3, 0.05)
    };
    let run = evolve(&s, &o, scheme("csf")).unwrap();
    let iso: Vec<f64> = run.series.iter().map(|d| d.isoperimetric).collect();
    assert!(iso.windows(2).all(|w| w[1] < w[0]), "{iso:?}");
    assert!(iso[0] > 1.15 && *iso.last().unwrap() < 1.03);
}

#[test]
fn invalid_runs_are_rejected() {
    let s = circle(64, 1.0);
    assert!(matches!(
        evolve(&s, &opts(0.0, 1e-4, 0.1), scheme("csf")),
        Err(Error::InputDomain(_))
    ));
    match evolve(&s, &opts(1.0, 1.0, 0.1), scheme("csf")) {
        Err(e @ Error::FlowFailure { .. }) => assert!(e.is_input_error()),
        other => panic!("{other:?}"),
    }
    assert!(FlowState::new(vec![[0.0, 0.0]; 4]).is_err());
    assert!(flow_schemes().get("mcf").is_err());
}

#[test]
fn evolution_is_deterministic() {
    let (g, _) = solve_curve(2, 3, 1e-10).unwrap();
    let s = FlowState::from_curve(&g).unwrap();
    let a = evolve(&s, &opts(1e-3, 1e-5, 2e-4), scheme("rescaled")).unwrap();
    let b = evolve(&s, &opts(1e-3, 1e-5, 2e-4), scheme("rescaled")).unwrap();
    assert_eq!(a.state, b.state);
    assert_eq!(a.series, b.series);
    assert_eq!(a.steps, 100);
}

fn wobbly(n: usize, amp: f64, freq: f64) -> Vec<[f64; 2]> {
    (0..n)
        .map(|i| {
            let t = TAU * i as f64 / n as f64;
            let r = 1.0 + amp * (freq * t).sin();
            [r * t.cos(), r * t.sin()]
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn resampling_stays_within_a_segment(n in 16usize..256, amp in 0.0f64..0.3, freq in 1.0f64..5.0) {
        let pts = wobbly(n, amp, freq.round());
        let s = FlowState::new(pts.clone()).unwrap();
        let longest = (0..n).map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            (a[0] - b[0]).hypot(a[1] - b[1])
        }).fold(0.0, f64::max);
        let r = resample_uniform(&s.points);
        prop_assert_eq!(r.len(), n);
        for q in &r {
            let d = pts.iter().map(|p| (p[0] - q[0]).hypot(p[1] - q[1])).fold(f64::INFINITY, f64::min);
            prop_assert!(d <= longest);
        }
    }

    // Both flows commute with rotations about the origin.
    #[test]
    fn steps_are_rotation_equivariant(angle in -3.0f64..3.0, amp in 0.0f64..0.3) {
        let pts = wobbly(128, amp, 3.0);
        let (sn, cs) = angle.sin_cos();
        let rot = |p: [f64; 2]| [cs * p[0] - sn * p[1], sn * p[0] + cs * p[1]];
        let a = FlowState::new(pts.clone()).unwrap();
        let b = FlowState::new(pts.iter().map(|&p| rot(p)).collect()).unwrap();
        let dt = 0.1 * a.min_segment().powi(2);
        for name in ["csf", "rescaled"] {
            let f = scheme(name);
            let (na, nb) = (step(&a, dt, f).unwrap(), step(&b, dt, f).unwrap());
            for (p, q) in na.points.iter().zip(&nb.points) {
                let p = rot(*p);
                prop_assert!((p[0] - q[0]).hypot(p[1] - q[1]) < 1e-12);
            }
        }
    }
}
