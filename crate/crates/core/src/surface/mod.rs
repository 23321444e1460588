//! Surfaces in `R^4` sampled on a grid: product tori of shrinking curves,
//! plus a few analytic control surfaces, and everything measured on them.

mod operators;
mod polar;
mod report;
mod scheme;

pub use operators::{
    gauss_curvature, gauss_curvature_field, isothermal_defect, mean_curvature, mean_curvature_with, normal_part,
    sigma_sq, ISOTHERMAL_TOL,
};
pub use polar::{global_relation_constants, polar_fields, GlobalRelation, PolarField, DEGENERATE_RADIUS};
pub use report::{
    full_report, full_report_with, lagrangian_residual, local_identity_residuals, reflection_symmetry_residual,
    report_checks, shrinker_residual_surface, CheckEntry, ReportConfig, ReportContext, TorusCheck, VerificationReport,
};
pub use scheme::{derivative_schemes, DerivativeScheme, JetField, ANALYTIC, FD_LAPLACIAN, FINITE_DIFFERENCE};

use std::f64::consts::TAU;

use crate::curve::{CurveJet, ShrinkerCurve};
use crate::error::{Error, Result};
use crate::geometry::Point4;

/// Smallest grid accepted in either direction (room for five-point
/// stencils plus a margin).
pub const MIN_GRID: usize = 8;

/// Closure error above which a factor curve counts as open.
pub const CLOSURE_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridSpec {
    pub ns: usize,
    pub nt: usize,
}

impl GridSpec {
    pub fn new(ns: usize, nt: usize) -> Result<Self> {
        if ns < MIN_GRID || nt < MIN_GRID {
            return Err(Error::domain(format!(
                "grid ({ns}, {nt}) below the minimum {MIN_GRID}x{MIN_GRID}"
            )));
        }
        Ok(Self { ns, nt })
    }

    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    /// Grid with arclength spacing at most `h` on both factors, so that
    /// stencil errors are comparable across curves of different length.
    pub fn for_spacing(c1: &ShrinkerCurve, c2: &ShrinkerCurve, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::domain(format!("grid spacing must be positive, got {h}")));
        }
        let n = |c: &ShrinkerCurve| ((c.length / h).ceil() as usize).max(MIN_GRID);
        Self::new(n(c1), n(c2))
    }

    pub fn len(&self) -> usize {
        self.ns * self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.nt + j
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx / self.nt, idx % self.nt)
    }
}

/// Derivatives of the immersion at one grid point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SurfaceJet {
    pub f: Point4,
    pub fs: Point4,
    pub ft: Point4,
    pub fss: Point4,
    pub fst: Point4,
    pub ftt: Point4,
}

/// A grid-sampled immersion `F(s_i, t_j)`.
pub trait Surface: Sync {
    fn grid(&self) -> GridSpec;
    /// Whether each direction wraps around.
    fn periodic(&self) -> (bool, bool);
    fn spacing(&self) -> (f64, f64);
    fn point(&self, i: usize, j: usize) -> Point4;
    /// Exact derivatives, where the surface knows them.
    fn analytic_jet(&self, _i: usize, _j: usize) -> Option<SurfaceJet> {
        None
    }
}

/// Grid-point lookup with periodic wrap; non-periodic directions must stay
/// in range.
pub(crate) fn point_at(surf: &dyn Surface, i: isize, j: isize) -> Point4 {
    let g = surf.grid();
    let wrap = |k: isize, n: usize| k.rem_euclid(n as isize) as usize;
    surf.point(wrap(i, g.ns), wrap(j, g.nt))
}

/// Half-open index ranges whose stencils of half-width `margin` stay inside
/// the grid.
pub(crate) fn interior(surf: &dyn Surface, margin: usize) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
    let g = surf.grid();
    let (ps, pt) = surf.periodic();
    let range = |n: usize, periodic: bool| {
        if periodic {
            0..n
        } else {
            margin..n.saturating_sub(margin)
        }
    };
    (range(g.ns, ps), range(g.nt, pt))
}

/// `F(s, t) = (γ₁(s), γ₂(t))`, sampled uniformly in arclength.
#[derive(Clone, Debug)]
pub struct ProductTorus {
    pub curve1: ShrinkerCurve,
    pub curve2: ShrinkerCurve,
    pub grid: GridSpec,
    pub points: Vec<Point4>,
    factor1: Vec<CurveJet>,
    factor2: Vec<CurveJet>,
}

/// Resamples both factors to the grid and forms the product immersion.
pub fn build_torus(c1: &ShrinkerCurve, c2: &ShrinkerCurve, grid: GridSpec) -> Result<ProductTorus> {
    let grid = GridSpec::new(grid.ns, grid.nt)?;
    for (name, c) in [("curve1", c1), ("curve2", c2)] {
        if !(c.closure_error < CLOSURE_TOL) {
            return Err(Error::domain(format!(
                "{name} is not closed (closure error {:e})",
                c.closure_error
            )));
        }
    }
    let sample = |c: &ShrinkerCurve, n: usize| -> Vec<CurveJet> {
        (0..n).map(|i| c.eval(c.length * i as f64 / n as f64)).collect()
    };
    let factor1 = sample(c1, grid.ns);
    let factor2 = sample(c2, grid.nt);
    let mut points = Vec::with_capacity(grid.len());
    for a in &factor1 {
        for b in &factor2 {
            points.push(Point4::new(a.pos[0], a.pos[1], b.pos[0], b.pos[1]));
        }
    }
    Ok(ProductTorus {
        curve1: c1.clone(),
        curve2: c2.clone(),
        grid,
        points,
        factor1,
        factor2,
    })
}

impl ProductTorus {
    /// Grid index of the sample nearest to arclength `s` on curve 1.
    pub fn s_index(&self, s: f64) -> usize {
        let h = self.curve1.length / self.grid.ns as f64;
        ((s.rem_euclid(self.curve1.length) / h).round() as usize) % self.grid.ns
    }

    pub fn factor1(&self) -> &[CurveJet] {
        &self.factor1
    }

    pub fn factor2(&self) -> &[CurveJet] {
        &self.factor2
    }
}

impl Surface for ProductTorus {
    fn grid(&self) -> GridSpec {
        self.grid
    }

    fn periodic(&self) -> (bool, bool) {
        (true, true)
    }

    fn spacing(&self) -> (f64, f64) {
        (
            self.curve1.length / self.grid.ns as f64,
            self.curve2.length / self.grid.nt as f64,
        )
    }

    fn point(&self, i: usize, j: usize) -> Point4 {
        self.points[self.grid.index(i, j)]
    }

    fn analytic_jet(&self, i: usize, j: usize) -> Option<SurfaceJet> {
        let (a, b) = (&self.factor1[i], &self.factor2[j]);
        Some(SurfaceJet {
            f: Point4::new(a.pos[0], a.pos[1], b.pos[0], b.pos[1]),
            fs: Point4::new(a.d1[0], a.d1[1], 0.0, 0.0),
            ft: Point4::new(0.0, 0.0, b.d1[0], b.d1[1]),
            fss: Point4::new(a.d2[0], a.d2[1], 0.0, 0.0),
            fst: Point4::ZERO,
            ftt: Point4::new(0.0, 0.0, b.d2[0], b.d2[1]),
        })
    }
}

type PointFn = dyn Fn(f64, f64) -> Point4 + Send + Sync;
type JetFn = dyn Fn(f64, f64) -> SurfaceJet + Send + Sync;

/// A surface given by a closed-form parametrization over a rectangle.
/// Periodic directions sample `[a, b)`, the others `[a, b]` inclusive.
pub struct ParametricSurface {
    pub name: String,
    grid: GridSpec,
    s_range: (f64, f64),
    t_range: (f64, f64),
    periodic: (bool, bool),
    f: Box<PointFn>,
    jet: Option<Box<JetFn>>,
}

impl ParametricSurface {
    pub fn new(
        name: impl Into<String>,
        grid: GridSpec,
        s_range: (f64, f64),
        t_range: (f64, f64),
        periodic: (bool, bool),
        f: impl Fn(f64, f64) -> Point4 + Send + Sync + 'static,
    ) -> Result<Self> {
        let grid = GridSpec::new(grid.ns, grid.nt)?;
        if !(s_range.1 > s_range.0 && t_range.1 > t_range.0) {
            return Err(Error::domain("parameter ranges must be non-empty"));
        }
        Ok(Self {
            name: name.into(),
            grid,
            s_range,
            t_range,
            periodic,
            f: Box::new(f),
            jet: None,
        })
    }

    pub fn with_jet(mut self, jet: impl Fn(f64, f64) -> SurfaceJet + Send + Sync + 'static) -> Self {
        self.jet = Some(Box::new(jet));
        self
    }

    pub fn params(&self, i: usize, j: usize) -> (f64, f64) {
        let (hs, ht) = self.spacing();
        (self.s_range.0 + hs * i as f64, self.t_range.0 + ht * j as f64)
    }
}

impl Surface for ParametricSurface {
    fn grid(&self) -> GridSpec {
        self.grid
    }

    fn periodic(&self) -> (bool, bool) {
        self.periodic
    }

    fn spacing(&self) -> (f64, f64) {
        let step =
            |(a, b): (f64, f64), n: usize, periodic: bool| (b - a) / if periodic { n as f64 } else { (n - 1) as f64 };
        (
            step(self.s_range, self.grid.ns, self.periodic.0),
            step(self.t_range, self.grid.nt, self.periodic.1),
        )
    }

    fn point(&self, i: usize, j: usize) -> Point4 {
        let (s, t) = self.params(i, j);
        (self.f)(s, t)
    }

    fn analytic_jet(&self, i: usize, j: usize) -> Option<SurfaceJet> {
        let (s, t) = self.params(i, j);
        self.jet.as_ref().map(|jet| jet(s, t))
    }
}

/// Control surfaces with known geometry.
pub mod controls {
    use super::*;

    /// The graph `(s, t, s t, 0)` over `[-1, 1]²`; `ω(F_s, F_t) = 1`.
    pub fn graph_surface(n: usize) -> Result<ParametricSurface> {
        Ok(ParametricSurface::new(
            "graph",
            GridSpec::square(n)?,
            (-1.0, 1.0),
            (-1.0, 1.0),
            (false, false),
            |s, t| Point4::new(s, t, s * t, 0.0),
        )?
        .with_jet(|s, t| SurfaceJet {
            f: Point4::new(s, t, s * t, 0.0),
            fs: Point4::new(1.0, 0.0, t, 0.0),
            ft: Point4::new(0.0, 1.0, s, 0.0),
            fss: Point4::ZERO,
            fst: Point4::new(0.0, 0.0, 1.0, 0.0),
            ftt: Point4::ZERO,
        }))
    }

    /// Round sphere of radius `radius` in the `x₁x₂x₃` space, in the
    /// conformal Mercator chart `R(sech u cos v, sech u sin v, tanh u, 0)`,
    /// `u ∈ [-u_max, u_max]`.
    pub fn mercator_sphere(radius: f64, u_max: f64, n: usize) -> Result<ParametricSurface> {
        ParametricSurface::new(
            "sphere",
            GridSpec::square(n)?,
            (-u_max, u_max),
            (0.0, TAU),
            (false, true),
            move |u, v| {
                let sech = 1.0 / u.cosh();
                Point4::new(radius * sech * v.cos(), radius * sech * v.sin(), radius * u.tanh(), 0.0)
            },
        )
    }

    /// The Clifford torus scaled by `scale` and then rotated by `angle` in
    /// the `x₂x₃` plane. For `angle ≠ 0` the complex coordinates mix, so
    /// the local identities of a Lagrangian shrinker all fail.
    pub fn tilted_clifford(scale: f64, angle: f64, n: usize) -> Result<ParametricSurface> {
        let (sa, ca) = angle.sin_cos();
        let rot = move |p: Point4| Point4::new(p[0], ca * p[1] - sa * p[2], sa * p[1] + ca * p[2], p[3]);
        let f = move |s: f64, t: f64| rot(Point4::new(s.cos(), s.sin(), t.cos(), t.sin()) * scale);
        Ok(ParametricSurface::new(
            "tilted-clifford",
            GridSpec::square(n)?,
            (0.0, TAU),
            (0.0, TAU),
            (true, true),
            f,
        )?
        .with_jet(move |s, t| {
            let (ss, cs) = s.sin_cos();
            let (st, ct) = t.sin_cos();
            SurfaceJet {
                f: f(s, t),
                fs: rot(Point4::new(-ss, cs, 0.0, 0.0) * scale),
                ft: rot(Point4::new(0.0, 0.0, -st, ct) * scale),
                fss: rot(Point4::new(-cs, -ss, 0.0, 0.0) * scale),
                fst: Point4::ZERO,
                ftt: rot(Point4::new(0.0, 0.0, -ct, -st) * scale),
            }
        }))
    }

    /// A product of two curves traversed at non-uniform speed
    /// `σ(u) = u + a (L/2π) sin(2πu/L)`.
    pub fn reparametrized_product(
        c1: &ShrinkerCurve,
        c2: &ShrinkerCurve,
        a: f64,
        n: usize,
    ) -> Result<ParametricSurface> {
        if !(a.abs() < 1.0) {
            return Err(Error::domain("reparametrization amplitude must be below 1"));
        }
        let (c1, c2) = (c1.clone(), c2.clone());
        let (l1, l2) = (c1.length, c2.length);
        let warp = move |u: f64, l: f64| u + a * l / TAU * (TAU * u / l).sin();
        ParametricSurface::new(
            "reparametrized-product",
            GridSpec::square(n)?,
            (0.0, l1),
            (0.0, l2),
            (true, true),
            move |u, v| {
                let p = c1.eval(warp(u, l1)).pos;
                let q = c2.eval(warp(v, l2)).pos;
                Point4::new(p[0], p[1], q[0], q[1])
            },
        )
    }
}
