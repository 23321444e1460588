use lagshrink_core::curve::*;
use lagshrink_core::surface::controls::*;
use lagshrink_core::surface::*;
use lagshrink_core::Error;
use proptest::prelude::*;

fn jets(surf: &dyn Surface, scheme: &str) -> JetField {
    JetField::compute(surf, derivative_schemes().get(scheme).unwrap()).unwrap()
}

fn al(p: u32, q: u32) -> ShrinkerCurve {
    solve_curve(p, q, 1e-10).unwrap().0
}

#[test]
fn clifford_invariants() {
    let c = make_circle();
    let t = build_torus(&c, &c, GridSpec::square(128).unwrap()).unwrap();
    for (_, _, jet) in jets(&t, ANALYTIC).iter() {
        assert!((mean_curvature(jet).unwrap().norm_sq() - 2.0).abs() < 1e-6);
        assert!((sigma_sq(jet) - 2.0).abs() < 1e-4);
    }
    assert!(gauss_curvature(&t).unwrap().0 < 1e-6);
    let report = full_report(&t);
    assert!(report.pass, "{:?}", report.failing());
}

#[test]
fn sphere_controls() {
    let s = mercator_sphere(2.0, 1.0, 256).unwrap();
    for (_, _, jet) in jets(&s, FINITE_DIFFERENCE).iter() {
        let h = mean_curvature_with(jet, 1e-3).unwrap().norm();
        assert!((h - 1.0).abs() < 1e-3, "{h}");
    }
    let unit = mercator_sphere(1.0, 1.0, 256).unwrap();
    for (_, _, k) in gauss_curvature_field(&unit).unwrap() {
        assert!((k - 1.0).abs() < 1e-3, "{k}");
    }
}

#[test]
fn product_tori_pass_full_report() {
    let c = make_circle();
    let (g23, g35) = (al(2, 3), al(3, 5));
    for (a, b) in [(&g23, &c), (&c, &g23), (&g23, &g35)] {
        let t = build_torus(a, b, GridSpec::for_spacing(a, b, 0.05).unwrap()).unwrap();
        let report = full_report(&t);
        assert!(report.pass, "{:?}", report.failing());
    }
}

#[test]
fn fd_shrinker_residual_is_second_order() {
    let c = make_circle();
    let res: Vec<f64> = [128, 256, 512]
        .iter()
        .map(|&n| {
            let t = build_torus(&c, &c, GridSpec::square(n).unwrap()).unwrap();
            shrinker_residual_surface(&jets(&t, FINITE_DIFFERENCE), 1e-4, 1e-2).max_residual
        })
        .collect();
    for w in res.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..4.5).contains(&ratio), "{res:?}");
    }
    assert!(res[2] < 1e-4);
}

#[test]
fn fd_laplacian_items_at_fixed_spacing() {
    let c = make_circle();
    for g in [al(2, 3), al(3, 5)] {
        let t = build_torus(&g, &c, GridSpec::for_spacing(&g, &c, 0.02).unwrap()).unwrap();
        let entries = local_identity_residuals(&jets(&t, FD_LAPLACIAN), 1e-10, 1e-4);
        for e in &entries {
            assert!(e.pass, "{} {:e}", e.name, e.max_residual);
        }
    }
}

#[test]
fn global_relation_on_two_three_times_circle() {
    let (g, c) = (al(2, 3), make_circle());
    let t = build_torus(&g, &c, GridSpec::square(512).unwrap()).unwrap();
    let pf = polar_fields(&jets(&t, ANALYTIC)).unwrap();
    let rel = global_relation_constants(&pf, [g.c_gamma, c.c_gamma], 1e-4, 1e-6, 1e-10);
    for e in &rel.entries {
        assert!(e.pass, "{} {:e}", e.name, e.max_residual);
    }
    let cg = g.c_gamma * g.c_gamma;
    assert!(rel.c1.iter().all(|v| (v - cg).abs() < 1e-4 * cg));

    // the extremes of r₁ sit on the rows of the curve's radius extremes
    let (imax, _) = pf
        .r1
        .iter()
        .enumerate()
        .fold((0, 0.0), |b, (k, &r)| if r > b.1 { (k, r) } else { b });
    let row = pf.coords(imax)[0];
    let s_far = g.samples.iter().max_by(|a, b| a.r.total_cmp(&b.r)).unwrap().s;
    let expected = g
        .samples
        .iter()
        .filter(|s| (s.r - g.r_max).abs() < 1e-9)
        .map(|s| t.s_index(s.s));
    let near = |a: usize, b: usize| a.abs_diff(b).min(t.grid.ns - a.abs_diff(b)) <= 1;
    assert!(near(row, t.s_index(s_far)) || expected.clone().any(|e| near(row, e)));
}

#[test]
fn tilted_control_breaks_every_local_identity() {
    let s = tilted_clifford(1.1, 0.3, 128).unwrap();
    let j = jets(&s, ANALYTIC);
    for e in local_identity_residuals(&j, 1e-10, 1e-4)
        .into_iter()
        .chain(lagrangian_residual(&j, 1e-10))
    {
        assert!(e.max_residual > 1e-2, "{} {:e}", e.name, e.max_residual);
        assert!(!e.pass);
    }
}

#[test]
fn graph_is_not_lagrangian() {
    let g = graph_surface(32).unwrap();
    let entries = lagrangian_residual(&jets(&g, ANALYTIC), 1e-10);
    assert!((entries[0].max_residual - 1.0).abs() < 1e-14);
    assert!(entries.iter().all(|e| !e.pass));
}

#[test]
fn scaled_clifford_fails_laplacian_items() {
    let c = make_circle().scaled(1.2);
    let t = build_torus(&c, &c, GridSpec::square(64).unwrap()).unwrap();
    let report = full_report(&t);
    for name in ["shrinker_residual", "laplace_a_s", "laplace_b_t"] {
        let e = report.entry(name).unwrap();
        assert!(e.max_residual > 1e-2 && !e.pass, "{name}");
    }
    // products are Lagrangian at any scale
    assert!(report.entry("lagrangian_omega").unwrap().pass);
}

#[test]
fn reparametrized_product_is_flat_but_not_isothermal() {
    let (g, c) = (al(2, 3), make_circle());
    let s = reparametrized_product(&g, &c, 0.3, 256).unwrap();
    assert!(gauss_curvature(&s).unwrap().0 < 1e-6);
    let j = jets(&s, FINITE_DIFFERENCE);
    let (_, _, jet) = j.iter().nth(1000).unwrap();
    assert!(matches!(mean_curvature(jet), Err(Error::NotIsothermal { .. })));
}

#[test]
fn translated_factor_fails_global_relation() {
    let (g, c) = (al(2, 3), make_circle());
    let t = build_torus(&g.translated(0.05, 0.0).unwrap(), &c, GridSpec::square(128).unwrap()).unwrap();
    let report = full_report(&t);
    assert!(!report.pass);
    for name in ["shrinker_residual", "c1_constancy", "r1_radius_bounds"] {
        assert!(!report.entry(name).unwrap().pass, "{name}");
    }
}

#[test]
fn report_is_deterministic_and_ordered() {
    let c = make_circle_with(256).unwrap();
    let t = build_torus(&c, &c, GridSpec::square(32).unwrap()).unwrap();
    let (a, b) = (full_report(&t), full_report(&t));
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let names: Vec<&str> = a.checks.iter().map(|e| e.name.as_str()).collect();
    assert_eq!(names.first(), Some(&"shrinker_residual"));
    assert_eq!(names.last(), Some(&"reflection_symmetry"));
    assert_eq!(names.len(), 26);
    assert_eq!(report_checks().names().len(), 6);
}

#[test]
fn unevaluable_checks_become_failed_entries() {
    let c = make_circle_with(256).unwrap();
    let t = build_torus(&c, &c, GridSpec::square(16).unwrap()).unwrap();
    let cfg = ReportConfig {
        scheme: "spectral".into(),
        ..ReportConfig::default()
    };
    let report = full_report_with(&t, &cfg, &report_checks());
    assert!(!report.pass);
    assert!(report.checks[0].note.as_deref().unwrap().contains("spectral"));

    // a non-isothermal FD jet cannot give a mean curvature
    let s = reparametrized_product(&c, &c, 0.5, 32).unwrap();
    let e = shrinker_residual_surface(&jets(&s, FINITE_DIFFERENCE), 1e-6, 1e-6);
    assert!(!e.pass && e.note.is_some());
}

#[test]
fn degenerate_radius_reported() {
    let c = make_circle_with(256).unwrap();
    let off = c.translated(1.0, 0.0).unwrap();
    let t = build_torus(&off, &c, GridSpec::square(32).unwrap()).unwrap();
    assert!(matches!(
        polar_fields(&jets(&t, ANALYTIC)),
        Err(Error::DegenerateRadius { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    // Rotating a factor is a unitary change of coordinates: the product
    // stays Lagrangian and the symmetry check re-aligns it.
    #[test]
    fn rotated_factors_keep_invariants(angle in -3.0f64..3.0, scale in 0.5f64..2.0) {
        let c = make_circle_with(256).unwrap();
        let a = c.rotated(angle);
        let b = c.scaled(scale);
        let t = build_torus(&a, &b, GridSpec::square(32).unwrap()).unwrap();
        let report = full_report(&t);
        for name in ["lagrangian_omega", "lagrangian_jft", "hermitian_sum", "grad_theta_orthogonal", "reflection_symmetry"] {
            prop_assert!(report.entry(name).unwrap().pass, "{}", name);
        }
    }

    #[test]
    fn reflection_residual_is_zero_for_coordinate_planes(k in 0usize..4) {
        let c = make_circle_with(256).unwrap();
        let t = build_torus(&c, &c, GridSpec::square(32).unwrap()).unwrap();
        let mut nu = [0.0; 4];
        nu[k] = 1.0;
        let h = lagshrink_core::geometry::Hyperplane::new(lagshrink_core::geometry::Point4(nu)).unwrap();
        prop_assert!(reflection_symmetry_residual(&t, &h).unwrap() < 1e-12);
    }
}
