use std::path::{Path, PathBuf};

use lagshrink_core::curve::{make_circle_with, solve_curve_with, sweep_delta_theta, ShrinkerCurve, SolveOptions};
use lagshrink_core::embedded::{classify_torus, intersection_finders, Classification, FactorLabel};
use lagshrink_core::flow::{evolve, flow_schemes, shape_drift, EvolveOptions, FlowState};
use lagshrink_core::geometry::{normalize_hyperplane, Hyperplane, Point4, ALGEBRAIC_TOL};
use lagshrink_core::io::{self, CurveDoc, TorusDoc, UnitaryDoc};
use lagshrink_core::ode::StepControl;
use lagshrink_core::surface::{build_torus, full_report_with, report_checks, GridSpec, ProductTorus, ReportConfig};
use lagshrink_core::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Settings;

/// What a successful run concluded.
#[derive(Debug, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    /// Ran to completion, but a check failed (exit 1).
    Failed,
}

fn out_path(s: &Settings, name: &str) -> PathBuf {
    s.out.join(name)
}

fn save_curve(s: &Settings, c: &ShrinkerCurve, stem: &str) -> Result<()> {
    io::write_json(
        &out_path(s, &format!("{stem}.json")),
        &CurveDoc::from_curve(c),
        s.json_indent,
    )?;
    io::write_text(&out_path(s, &format!("{stem}.csv")), &io::samples_csv(c)?)
}

fn print_curve(c: &ShrinkerCurve) {
    println!("c_gamma = {:.16e}", c.c_gamma);
    println!("r_min = {:.16e}", c.r_min);
    println!("r_max = {:.16e}", c.r_max);
    println!("closure_error = {:.3e}", c.closure_error);
}

pub fn solve_curve(s: &Settings, p: u32, q: u32, n: Option<usize>) -> Result<Verdict> {
    let opts = SolveOptions {
        samples: n.unwrap_or(s.samples),
        tol: s.integration_tol,
        control: StepControl::default(),
    };
    let (c, _) = solve_curve_with(p, q, &opts)?;
    save_curve(s, &c, &format!("al_{p}_{q}"))?;
    print_curve(&c);
    Ok(Verdict::Ok)
}

pub fn make_circle(s: &Settings, n: Option<usize>) -> Result<Verdict> {
    let c = make_circle_with(n.unwrap_or(s.samples))?;
    save_curve(s, &c, "circle")?;
    print_curve(&c);
    Ok(Verdict::Ok)
}

pub fn sweep(s: &Settings, r0_min: f64, r0_max: f64, count: usize) -> Result<Verdict> {
    let rows = sweep_delta_theta(r0_min, r0_max, count, StepControl::default())?;
    io::write_text(&out_path(s, "sweep_deltatheta.csv"), &io::sweep_csv(&rows)?)?;
    let mono = rows.windows(2).all(|w| w[1].delta_theta > w[0].delta_theta);
    let first = rows.first().expect("count ≥ 2");
    let last = rows.last().expect("count ≥ 2");
    println!("delta_theta = [{:.10}, {:.10}]", first.delta_theta, last.delta_theta);
    println!("monotone = {mono}");
    Ok(if mono { Verdict::Ok } else { Verdict::Failed })
}

/// Grid from `--grid NS[,NT]` or `--spacing H`, else from the settings.
pub fn grid_for(
    s: &Settings,
    c1: &ShrinkerCurve,
    c2: &ShrinkerCurve,
    grid: &[usize],
    spacing: Option<f64>,
) -> Result<GridSpec> {
    match (grid, spacing) {
        ([], None) => GridSpec::new(s.ns, s.nt),
        ([], Some(h)) => GridSpec::for_spacing(c1, c2, h),
        ([n], None) => GridSpec::square(*n),
        ([ns, nt], None) => GridSpec::new(*ns, *nt),
        (_, Some(_)) => Err(Error::InputDomain("give either --grid or --spacing, not both".into())),
        _ => Err(Error::InputDomain("--grid takes NS or NS,NT".into())),
    }
}

pub struct TorusInput<'a> {
    pub torus: Option<&'a Path>,
    pub curve1: Option<&'a Path>,
    pub curve2: Option<&'a Path>,
    pub grid: &'a [usize],
    pub spacing: Option<f64>,
}

fn load_torus(s: &Settings, input: &TorusInput) -> Result<ProductTorus> {
    match (input.torus, input.curve1, input.curve2) {
        (Some(t), None, None) => {
            let doc: TorusDoc = io::read_json(t)?;
            if input.grid.is_empty() && input.spacing.is_none() {
                return doc.to_torus();
            }
            let (c1, c2) = (doc.curve1.to_curve()?, doc.curve2.to_curve()?);
            build_torus(&c1, &c2, grid_for(s, &c1, &c2, input.grid, input.spacing)?)
        }
        (None, Some(a), Some(b)) => {
            let (c1, c2) = (io::load_curve(a)?, io::load_curve(b)?);
            build_torus(&c1, &c2, grid_for(s, &c1, &c2, input.grid, input.spacing)?)
        }
        _ => Err(Error::InputDomain(
            "give either --torus FILE or both --curve1 FILE and --curve2 FILE".into(),
        )),
    }
}

pub fn build(s: &Settings, input: &TorusInput) -> Result<Verdict> {
    let t = load_torus(s, input)?;
    io::write_json(&out_path(s, "torus.json"), &TorusDoc::from_torus(&t), s.json_indent)?;
    println!("grid = {}x{}", t.grid.ns, t.grid.nt);
    Ok(Verdict::Ok)
}

pub fn verify(s: &Settings, input: &TorusInput, scheme: Option<&str>) -> Result<Verdict> {
    let t = load_torus(s, input)?;
    let mut cfg: ReportConfig = s.report.clone();
    if let Some(tol) = s.verification_tol {
        cfg.shrinker_tol = tol;
    }
    if let Some(name) = scheme {
        cfg.scheme = name.to_string();
    }
    let report = full_report_with(&t, &cfg, &report_checks());
    io::write_json(&out_path(s, "report.json"), &report, s.json_indent)?;
    for e in &report.checks {
        println!(
            "{:<24} {:.3e} (tol {:.1e}) {}",
            e.name,
            e.max_residual,
            e.tol,
            if e.pass { "pass" } else { "FAIL" }
        );
    }
    if report.pass {
        Ok(Verdict::Ok)
    } else {
        eprintln!("failing checks: {}", report.failing().join(", "));
        Ok(Verdict::Failed)
    }
}

fn label(f: &FactorLabel) -> String {
    match f.q {
        Some(q) => format!("({},{}) with {} crossings", f.p, q, f.crossings),
        None => format!("p = {} with {} crossings", f.p, f.crossings),
    }
}

pub fn classify(s: &Settings, input: &TorusInput) -> Result<Verdict> {
    let t = load_torus(s, input)?;
    let class = classify_torus(&t)?;
    io::write_json(&out_path(s, "classification.json"), &class, s.json_indent)?;
    match &class {
        Classification::CliffordTorus => println!("CliffordTorus"),
        Classification::ImmersedProductTorus { factor1, factor2 } => {
            println!("ImmersedProductTorus: {} x {}", label(factor1), label(factor2))
        }
    }
    Ok(Verdict::Ok)
}

pub fn check_embedded(s: &Settings, curve: Option<&Path>, finder: &str, random: Option<usize>) -> Result<Verdict> {
    let finders = intersection_finders();
    let f = finders.get(finder)?;
    match (curve, random) {
        (Some(path), None) => {
            let c = io::load_curve(path)?;
            let recs = f.find(&c.points())?;
            io::write_json(&out_path(s, "intersections.json"), &recs, s.json_indent)?;
            let transversal = recs.iter().filter(|r| r.transversal).count();
            println!("crossings = {} ({transversal} transversal)", recs.len());
            println!("embedded = {}", transversal == 0);
            Ok(Verdict::Ok)
        }
        (None, Some(count)) => {
            // every finder against every other on seeded random polylines
            let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
            let mut disagree = 0;
            for _ in 0..count {
                let pts = random_polyline(&mut rng);
                let results = finders.iter().map(|g| g.find(&pts)).collect::<Result<Vec<_>>>()?;
                disagree += results.windows(2).any(|w| w[0] != w[1]) as usize;
            }
            println!("polylines = {count}");
            println!("disagreements = {disagree}");
            Ok(if disagree == 0 { Verdict::Ok } else { Verdict::Failed })
        }
        _ => Err(Error::InputDomain("give either --curve FILE or --random COUNT".into())),
    }
}

/// A noisy loop wound one to three times.
fn random_polyline(rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    let n = rng.gen_range(8..=512);
    let turns = rng.gen_range(1..=3) as f64;
    let noise = rng.gen_range(0.0..0.5);
    (0..n)
        .map(|i| {
            let a = turns * std::f64::consts::TAU * i as f64 / n as f64;
            let r = 1.0 + 0.3 * (a / 2.0).sin() + noise * rng.gen_range(-1.0..1.0);
            [r * a.cos(), r * a.sin()]
        })
        .collect()
}

pub struct FlowArgs<'a> {
    pub curve: &'a Path,
    pub scheme: &'a str,
    pub t_end: f64,
    pub dt: f64,
    pub sample_interval: Option<f64>,
    pub adaptive: Option<f64>,
}

pub fn flow(s: &Settings, a: &FlowArgs) -> Result<Verdict> {
    let schemes = flow_schemes();
    let scheme = schemes.get(a.scheme)?;
    let c = io::load_curve(a.curve)?;
    let s0 = FlowState::from_curve(&c)?;
    let opts = EvolveOptions {
        t_end: a.t_end,
        dt: a.dt,
        sample_interval: a.sample_interval.unwrap_or(a.t_end / 100.0),
        adaptive: a.adaptive,
    };
    let run = evolve(&s0, &opts, scheme)?;
    io::write_text(&out_path(s, "flow_series.csv"), &io::series_csv(&run.series)?)?;
    io::write_json(
        &out_path(s, "flow_snapshot.json"),
        &CurveDoc::snapshot(&run.state, &c)?,
        s.json_indent,
    )?;
    let last = run.series.last().expect("series holds the initial state");
    println!("steps = {}", run.steps);
    println!("tau = {:.16e}", run.state.tau);
    println!("length = {:.16e}", last.length);
    println!("area = {:.16e}", last.area);
    if a.scheme == "rescaled" {
        let d = shape_drift(&s0.points, &run.state.points)?;
        io::write_text(
            &out_path(s, "flow_drift.csv"),
            &format!(
                "tau,drift,rotation\n{},{},{}\n",
                io::fmt_f64(run.state.tau),
                io::fmt_f64(d.distance),
                io::fmt_f64(d.rotation)
            ),
        )?;
        println!("drift = {:.3e}", d.distance);
    }
    Ok(Verdict::Ok)
}

pub fn normalize(s: &Settings, nu: &[f64]) -> Result<Verdict> {
    let nu: [f64; 4] = nu
        .try_into()
        .map_err(|_| Error::InputDomain(format!("--nu needs 4 components, got {}", nu.len())))?;
    let h = Hyperplane::from_normal(Point4(nu))?;
    let g = normalize_hyperplane(&h)?;
    let doc = UnitaryDoc::new(h.normal(), &g);
    io::write_json(&out_path(s, "hyperplane.json"), &doc, s.json_indent)?;
    println!("G =");
    for row in &doc.g {
        println!(
            "  {}",
            row.iter()
                .map(|z| format!("{:+.12} {:+.12}i", z[0], z[1]))
                .collect::<Vec<_>>()
                .join("   ")
        );
    }
    println!("G~ =");
    for row in &doc.g_real {
        println!(
            "  {}",
            row.iter().map(|v| format!("{v:+.12}")).collect::<Vec<_>>().join(" ")
        );
    }
    let tol = s.verification_tol.unwrap_or(ALGEBRAIC_TOL);
    let checks = [
        ("|G nu - (1,0)|", doc.image_error),
        ("|G~^T G~ - I|", doc.orthogonality_defect),
        ("|G~ J - J G~|", doc.j_commutator),
    ];
    let mut ok = true;
    for (name, v) in checks {
        let pass = v <= tol;
        ok &= pass;
        println!("{name} = {v:.3e} {}", if pass { "pass" } else { "FAIL" });
    }
    Ok(if ok { Verdict::Ok } else { Verdict::Failed })
}

pub fn export_mesh(s: &Settings, input: &TorusInput, projection: &str, viewpoint: Option<&[f64]>) -> Result<Verdict> {
    let eye = match viewpoint {
        None => io::DEFAULT_VIEWPOINT,
        Some(v) => Point4(
            v.try_into()
                .map_err(|_| Error::InputDomain(format!("--viewpoint needs 4 components, got {}", v.len())))?,
        ),
    };
    let projections = io::mesh_projections(eye)?;
    let t = load_torus(s, input)?;
    let obj = io::torus_obj(&t, projections.get(projection)?)?;
    io::write_text(&out_path(s, "torus.obj"), &obj)?;
    let (v, f) = io::obj_counts(&obj);
    println!("vertices = {v}");
    println!("faces = {f}");
    Ok(Verdict::Ok)
}
