//! Residual checks and their aggregation into a [`VerificationReport`].

use kiddo::{ImmutableKdTree, SquaredEuclidean};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::operators::{gauss_curvature, mean_curvature_with, normal_part, ISOTHERMAL_TOL};
use super::polar::{global_relation_constants, polar_fields};
use super::scheme::{derivative_schemes, JetField, ANALYTIC};
use super::{build_torus, ProductTorus, Surface, SurfaceJet};
use crate::curve::align_symmetry_axis;
use crate::error::{Error, Result};
use crate::geometry::{apply_j, kahler_form, Hyperplane, Point4};
use crate::registry::{Named, Registry};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    #[serde(deserialize_with = "crate::io::f64_or_nan")]
    pub max_residual: f64,
    /// Grid location of the maximum.
    pub at: [usize; 2],
    pub tol: f64,
    pub pass: bool,
    /// Why a check could not be evaluated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckEntry {
    /// Passes when `residual ≤ tol` (NaN fails).
    pub fn at_most(name: impl Into<String>, residual: f64, at: [usize; 2], tol: f64) -> Self {
        Self {
            name: name.into(),
            max_residual: residual,
            at,
            tol,
            pass: residual <= tol,
            note: None,
        }
    }

    /// A check that could not run; reported as failed, never dropped.
    pub fn failed(name: impl Into<String>, tol: f64, err: &Error) -> Self {
        Self {
            name: name.into(),
            max_residual: f64::MAX,
            at: [0, 0],
            tol,
            pass: false,
            note: Some(err.to_string()),
        }
    }
}

/// First maximum in iteration order; NaN counts as larger than anything.
pub(crate) fn argmax(values: impl Iterator<Item = ([usize; 2], f64)>) -> (f64, [usize; 2]) {
    let mut best = (f64::NEG_INFINITY, [0, 0]);
    for (at, v) in values {
        if best.0.is_nan() {
            break;
        }
        if v.is_nan() || v > best.0 {
            best = (v, at);
        }
    }
    best
}

fn entry_from<T: Fn(&SurfaceJet) -> f64 + Sync>(jets: &JetField, name: &str, tol: f64, f: T) -> CheckEntry {
    let vals = jets.par_map(|_, _, jet| f(jet));
    let (v, at) = argmax(vals.into_iter().map(|(i, j, v)| ([i, j], v)));
    CheckEntry::at_most(name, v, at, tol)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckEntry>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(checks: Vec<CheckEntry>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self { checks, pass }
    }

    pub fn entry(&self, name: &str) -> Option<&CheckEntry> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }
}

/// `max |H + F^⊥|`. Jets must be isothermal within `iso_tol`.
pub fn shrinker_residual_surface(jets: &JetField, tol: f64, iso_tol: f64) -> CheckEntry {
    // H is normal, so H + F^⊥ is the normal part of H + F
    let vals = jets.par_map(|_, _, jet| mean_curvature_with(jet, iso_tol).map(|h| normal_part(h + jet.f, jet).norm()));
    let mut flat = Vec::with_capacity(vals.len());
    for (i, j, res) in vals {
        match res {
            Ok(r) => flat.push(([i, j], r)),
            Err(e) => return CheckEntry::failed("shrinker_residual", tol, &e),
        }
    }
    let (v, at) = argmax(flat.into_iter());
    CheckEntry::at_most("shrinker_residual", v, at, tol)
}

/// `max |ω(F_s, F_t)|` and `max |J F_s · F_t|`.
pub fn lagrangian_residual(jets: &JetField, tol: f64) -> Vec<CheckEntry> {
    vec![
        entry_from(jets, "lagrangian_omega", tol, |j| kahler_form(j.fs, j.ft).abs()),
        entry_from(jets, "lagrangian_jft", tol, |j| apply_j(j.fs).dot(j.ft).abs()),
    ]
}

/// The local identities of a symmetric Lagrangian shrinker in isothermal
/// coordinates: `|A_s| = |B_t|`, `|A_t| = |B_s|`, `A_s Ā_t + B_s B̄_t = 0`
/// with both products real, and `(ΔA + A)Ā_x`, `(ΔB + B)B̄_x` real.
/// The first five are algebraic in first derivatives; the last four
/// involve the Laplacian and get `laplace_tol`.
pub fn local_identity_residuals(jets: &JetField, algebraic_tol: f64, laplace_tol: f64) -> Vec<CheckEntry> {
    struct Cx {
        a: Complex64,
        a_s: Complex64,
        a_t: Complex64,
        b: Complex64,
        b_s: Complex64,
        b_t: Complex64,
        lap_a: Complex64,
        lap_b: Complex64,
    }
    fn cx(j: &SurfaceJet) -> Cx {
        let lambda = 0.5 * (j.fs.norm_sq() + j.ft.norm_sq());
        let lap = (j.fss + j.ftt) * (1.0 / lambda);
        Cx {
            a: j.f.a(),
            a_s: j.fs.a(),
            a_t: j.ft.a(),
            b: j.f.b(),
            b_s: j.fs.b(),
            b_t: j.ft.b(),
            lap_a: lap.a(),
            lap_b: lap.b(),
        }
    }
    type Item = (&'static str, bool, fn(&Cx) -> f64);
    let items: [Item; 9] = [
        ("abs_as_bt", true, |c| (c.a_s.norm() - c.b_t.norm()).abs()),
        ("abs_at_bs", true, |c| (c.a_t.norm() - c.b_s.norm()).abs()),
        ("hermitian_sum", true, |c| {
            (c.a_s * c.a_t.conj() + c.b_s * c.b_t.conj()).norm()
        }),
        ("im_as_at", true, |c| (c.a_s * c.a_t.conj()).im.abs()),
        ("im_bs_bt", true, |c| (c.b_s * c.b_t.conj()).im.abs()),
        ("laplace_a_s", false, |c| ((c.lap_a + c.a) * c.a_s.conj()).im.abs()),
        ("laplace_a_t", false, |c| ((c.lap_a + c.a) * c.a_t.conj()).im.abs()),
        ("laplace_b_s", false, |c| ((c.lap_b + c.b) * c.b_s.conj()).im.abs()),
        ("laplace_b_t", false, |c| ((c.lap_b + c.b) * c.b_t.conj()).im.abs()),
    ];
    let vals = jets.par_map(|_, _, jet| {
        let c = cx(jet);
        items.map(|(_, _, f)| f(&c))
    });
    items
        .iter()
        .enumerate()
        .map(|(k, &(name, algebraic, _))| {
            let (v, at) = argmax(vals.iter().map(|(i, j, r)| ([*i, *j], r[k])));
            CheckEntry::at_most(name, v, at, if algebraic { algebraic_tol } else { laplace_tol })
        })
        .collect()
}

/// Largest distance from a reflected grid point to the nearest grid point.
/// The reflection is an isometric involution, so the reverse direction
/// (original points against the reflected set) gives the same value.
pub fn reflection_symmetry_residual(surf: &dyn Surface, h: &Hyperplane) -> Result<f64> {
    let g = surf.grid();
    let pts: Vec<[f64; 4]> = (0..g.len())
        .map(|k| {
            let (i, j) = g.coords(k);
            surf.point(i, j).0
        })
        .collect();
    let tree = ImmutableKdTree::<f64, 4>::new_from_slice(&pts)
        .map_err(|e| Error::numeric(format!("k-d tree construction failed: {e:?}")))?;
    Ok(pts
        .par_iter()
        .map(|p| {
            let q = h.reflect(Point4(*p)).0;
            tree.query(&q)
                .nearest_one::<SquaredEuclidean<f64>>()
                .execute()
                .distance
                .sqrt()
        })
        .reduce(|| 0.0, f64::max))
}

/// Tolerances and scheme for [`full_report_with`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportConfig {
    pub scheme: String,
    pub shrinker_tol: f64,
    pub isothermal_tol: f64,
    pub algebraic_tol: f64,
    pub laplace_tol: f64,
    pub relation_tol: f64,
    pub radius_tol: f64,
    pub gauss_tol: f64,
    /// Reflection residual allowed, in units of the larger grid spacing.
    pub symmetry_spacings: f64,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            scheme: ANALYTIC.to_string(),
            shrinker_tol: 1e-6,
            isothermal_tol: ISOTHERMAL_TOL,
            algebraic_tol: 1e-10,
            laplace_tol: 1e-4,
            relation_tol: 1e-4,
            radius_tol: 1e-6,
            gauss_tol: 1e-6,
            symmetry_spacings: 2.0,
        }
    }
}

/// Shared inputs of the report checks.
pub struct ReportContext<'a> {
    pub torus: &'a ProductTorus,
    pub jets: JetField,
    pub config: &'a ReportConfig,
}

pub trait TorusCheck: Named + Send + Sync {
    fn run(&self, ctx: &ReportContext) -> Vec<CheckEntry>;
}

struct ShrinkerCheck;
struct LagrangianCheck;
struct LocalIdentityCheck;
struct GlobalRelationCheck;
struct FlatnessCheck;
struct SymmetryCheck;

impl Named for ShrinkerCheck {
    fn name(&self) -> &'static str {
        "shrinker"
    }
}

impl TorusCheck for ShrinkerCheck {
    fn run(&self, ctx: &ReportContext) -> Vec<CheckEntry> {
        vec![shrinker_residual_surface(
            &ctx.jets,
            ctx.config.shrinker_tol,
            ctx.config.isothermal_tol,
        )]
    }
}

impl Named for LagrangianCheck {
    fn name(&self) -> &'static str {
        "lagrangian"
    }
}

impl TorusCheck for LagrangianCheck {
    fn run(&self, ctx: &ReportContext) -> Vec<CheckEntry> {
        lagrangian_residual(&ctx.jets, ctx.config.algebraic_tol)
    }
}

impl Named for LocalIdentityCheck {
    fn name(&self) -> &'static str {
        "local-identities"
    }
}

impl TorusCheck for LocalIdentityCheck {
    fn run(&self, ctx: &ReportContext) -> Vec<CheckEntry> {
        local_identity_residuals(&ctx.jets, ctx.config.algebraic_tol, ctx.config.laplace_tol)
    }
}

impl Named for GlobalRelationCheck {
    fn name(&self) -> &'static str {
        "global-relation"
    }
}

impl TorusCheck for GlobalRelationCheck {
    fn run(&self, ctx: &ReportContext) -> Vec<CheckEntry> {
        match polar_fields(&ctx.jets) {
            Ok(pf) => {
                let cg = [ctx.torus.curve1.c_gamma, ctx.torus.curve2.c_gamma];
                let c = ctx.config;
                global_relation_constants(&pf, cg, c.relation_tol, c.radius_tol, c.algebraic_tol).entries
            }
            Err(e) => vec![CheckEntry::failed("polar_fields", DEGENERATE, &e)],
        }
    }
}

const DEGENERATE: f64 = super::polar::DEGENERATE_RADIUS;

impl Named for FlatnessCheck {
    fn name(&self) -> &'static str {
        "flatness"
    }
}

impl TorusCheck for FlatnessCheck {
    fn run(&self, ctx: &ReportContext) -> Vec<CheckEntry> {
        let tol = ctx.config.gauss_tol;
        vec![match gauss_curvature(ctx.torus) {
            Ok((k, (i, j))) => CheckEntry::at_most("gauss_curvature", k, [i, j], tol),
            Err(e) => CheckEntry::failed("gauss_curvature", tol, &e),
        }]
    }
}

impl Named for SymmetryCheck {
    fn name(&self) -> &'static str {
        "symmetry"
    }
}

impl TorusCheck for SymmetryCheck {
    /// Aligns factor 1 so its reflection axis is the imaginary axis (a
    /// unitary change of the first complex coordinate), then measures the
    /// reflection residual against `{x₁ = 0}`.
    fn run(&self, ctx: &ReportContext) -> Vec<CheckEntry> {
        let t = ctx.torus;
        let (hs, ht) = t.spacing();
        let tol = ctx.config.symmetry_spacings * hs.max(ht);
        let res = align_symmetry_axis(&t.curve1)
            .and_then(|al| build_torus(&al.curve, &t.curve2, t.grid))
            .and_then(|aligned| reflection_symmetry_residual(&aligned, &Hyperplane::x1_zero()));
        vec![match res {
            Ok(r) => CheckEntry::at_most("reflection_symmetry", r, [0, 0], tol),
            Err(e) => CheckEntry::failed("reflection_symmetry", tol, &e),
        }]
    }
}

/// The standard checks in report order.
pub fn report_checks() -> Registry<dyn TorusCheck> {
    let mut r: Registry<dyn TorusCheck> = Registry::new("report check");
    r.register(Box::new(ShrinkerCheck));
    r.register(Box::new(LagrangianCheck));
    r.register(Box::new(LocalIdentityCheck));
    r.register(Box::new(GlobalRelationCheck));
    r.register(Box::new(FlatnessCheck));
    r.register(Box::new(SymmetryCheck));
    r
}

pub fn full_report(t: &ProductTorus) -> VerificationReport {
    full_report_with(t, &ReportConfig::default(), &report_checks())
}

/// Runs every check in `checks`; failures to evaluate become failed entries.
pub fn full_report_with(
    t: &ProductTorus,
    config: &ReportConfig,
    checks: &Registry<dyn TorusCheck>,
) -> VerificationReport {
    let schemes = derivative_schemes();
    let jets = schemes.get(&config.scheme).and_then(|s| JetField::compute(t, s));
    match jets {
        Ok(jets) => {
            let ctx = ReportContext { torus: t, jets, config };
            VerificationReport::new(checks.iter().flat_map(|c| c.run(&ctx)).collect())
        }
        Err(e) => VerificationReport::new(vec![CheckEntry::failed("derivatives", 0.0, &e)]),
    }
}
