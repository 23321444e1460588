//! How surface derivatives are obtained: exactly from the factor curves, or
//! by finite differences of the sampled points.

use std::ops::Range;

use rayon::prelude::*;

use super::{interior, point_at, GridSpec, Surface, SurfaceJet};
use crate::error::{Error, Result};
use crate::geometry::Point4;
use crate::registry::{Named, Registry};

pub const ANALYTIC: &str = "analytic";
pub const FINITE_DIFFERENCE: &str = "finite-difference";
pub const FD_LAPLACIAN: &str = "fd-laplacian";

/// Stencil half-width used for every jet field, so that schemes are
/// compared on the same points.
const MARGIN: usize = 2;

pub trait DerivativeScheme: Named + Send + Sync {
    fn jet(&self, surf: &dyn Surface, i: usize, j: usize) -> Result<SurfaceJet>;
}

/// Exact derivatives provided by the surface.
struct Analytic;

/// Centered differences: three-point first derivatives (second order),
/// five-point second derivatives (fourth order), four-point mixed.
struct FiniteDifference;

/// Exact first derivatives with five-point second derivatives: isolates the
/// discretization error of the Laplacian.
struct FdLaplacian;

impl Named for Analytic {
    fn name(&self) -> &'static str {
        ANALYTIC
    }
}

impl Named for FiniteDifference {
    fn name(&self) -> &'static str {
        FINITE_DIFFERENCE
    }
}

impl Named for FdLaplacian {
    fn name(&self) -> &'static str {
        FD_LAPLACIAN
    }
}

fn analytic(surf: &dyn Surface, i: usize, j: usize) -> Result<SurfaceJet> {
    surf.analytic_jet(i, j)
        .ok_or_else(|| Error::domain("surface has no analytic derivatives; use the finite-difference scheme"))
}

impl DerivativeScheme for Analytic {
    fn jet(&self, surf: &dyn Surface, i: usize, j: usize) -> Result<SurfaceJet> {
        analytic(surf, i, j)
    }
}

struct Stencil<'a> {
    surf: &'a dyn Surface,
    i: isize,
    j: isize,
    hs: f64,
    ht: f64,
}

impl Stencil<'_> {
    fn new(surf: &dyn Surface, i: usize, j: usize) -> Stencil<'_> {
        let (hs, ht) = surf.spacing();
        Stencil {
            surf,
            i: i as isize,
            j: j as isize,
            hs,
            ht,
        }
    }

    fn at(&self, di: isize, dj: isize) -> Point4 {
        point_at(self.surf, self.i + di, self.j + dj)
    }

    fn first(&self, dir: usize) -> Point4 {
        let (a, b, h) = self.pair(dir, 1);
        (a - b) * (0.5 / h)
    }

    fn second(&self, dir: usize) -> Point4 {
        let (p1, m1, h) = self.pair(dir, 1);
        let (p2, m2, _) = self.pair(dir, 2);
        let c = self.at(0, 0);
        ((p1 + m1) * 16.0 - (p2 + m2) - c * 30.0) * (1.0 / (12.0 * h * h))
    }

    fn mixed(&self) -> Point4 {
        (self.at(1, 1) - self.at(1, -1) - self.at(-1, 1) + self.at(-1, -1)) * (0.25 / (self.hs * self.ht))
    }

    fn pair(&self, dir: usize, k: isize) -> (Point4, Point4, f64) {
        if dir == 0 {
            (self.at(k, 0), self.at(-k, 0), self.hs)
        } else {
            (self.at(0, k), self.at(0, -k), self.ht)
        }
    }
}

impl DerivativeScheme for FiniteDifference {
    fn jet(&self, surf: &dyn Surface, i: usize, j: usize) -> Result<SurfaceJet> {
        let st = Stencil::new(surf, i, j);
        Ok(SurfaceJet {
            f: st.at(0, 0),
            fs: st.first(0),
            ft: st.first(1),
            fss: st.second(0),
            fst: st.mixed(),
            ftt: st.second(1),
        })
    }
}

impl DerivativeScheme for FdLaplacian {
    fn jet(&self, surf: &dyn Surface, i: usize, j: usize) -> Result<SurfaceJet> {
        let exact = analytic(surf, i, j)?;
        let st = Stencil::new(surf, i, j);
        Ok(SurfaceJet {
            fss: st.second(0),
            ftt: st.second(1),
            fst: st.mixed(),
            ..exact
        })
    }
}

/// All derivative schemes, `analytic` first.
pub fn derivative_schemes() -> Registry<dyn DerivativeScheme> {
    let mut r: Registry<dyn DerivativeScheme> = Registry::new("derivative scheme");
    r.register(Box::new(Analytic));
    r.register(Box::new(FiniteDifference));
    r.register(Box::new(FdLaplacian));
    r
}

/// Jets on every grid point whose stencil fits inside the grid (all points
/// in periodic directions).
pub struct JetField {
    pub grid: GridSpec,
    pub rows: Range<usize>,
    pub cols: Range<usize>,
    pub scheme: &'static str,
    jets: Vec<SurfaceJet>,
}

impl JetField {
    pub fn compute(surf: &dyn Surface, scheme: &dyn DerivativeScheme) -> Result<Self> {
        let (rows, cols) = interior(surf, MARGIN);
        if rows.is_empty() || cols.is_empty() {
            return Err(Error::domain("grid too small for the derivative stencils"));
        }
        let per_row: Vec<Vec<SurfaceJet>> = rows
            .clone()
            .into_par_iter()
            .map(|i| cols.clone().map(|j| scheme.jet(surf, i, j)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        Ok(Self {
            grid: surf.grid(),
            rows,
            cols,
            scheme: scheme.name(),
            jets: per_row.concat(),
        })
    }

    pub fn get(&self, i: usize, j: usize) -> &SurfaceJet {
        let w = self.cols.len();
        &self.jets[(i - self.rows.start) * w + (j - self.cols.start)]
    }

    /// `(i, j, jet)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &SurfaceJet)> + '_ {
        let w = self.cols.len();
        let (r0, c0) = (self.rows.start, self.cols.start);
        self.jets
            .iter()
            .enumerate()
            .map(move |(k, jet)| (r0 + k / w, c0 + k % w, jet))
    }

    pub fn par_map<T, F>(&self, f: F) -> Vec<(usize, usize, T)>
    where
        T: Send,
        F: Fn(usize, usize, &SurfaceJet) -> T + Sync,
    {
        let w = self.cols.len();
        let (r0, c0) = (self.rows.start, self.cols.start);
        self.jets
            .par_iter()
            .enumerate()
            .map(|(k, jet)| {
                let (i, j) = (r0 + k / w, c0 + k % w);
                (i, j, f(i, j, jet))
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.jets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jets.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::controls::tilted_clifford;

    #[test]
    fn fd_matches_analytic_on_smooth_surface() {
        let surf = tilted_clifford(1.1, 0.4, 256).unwrap();
        let schemes = derivative_schemes();
        let exact = schemes.get(ANALYTIC).unwrap().jet(&surf, 17, 200).unwrap();
        let fd = schemes.get(FINITE_DIFFERENCE).unwrap().jet(&surf, 17, 200).unwrap();
        let h = surf.spacing().0;
        assert!((exact.fs - fd.fs).norm() < h * h);
        assert!((exact.fss - fd.fss).norm() < h.powi(4));
        assert!((exact.fst - fd.fst).norm() < 1e-12);
    }

    #[test]
    fn unknown_scheme_lists_known() {
        let msg = derivative_schemes().get("spectral").err().unwrap().to_string();
        assert!(msg.contains("analytic") && msg.contains("finite-difference"));
    }

    #[test]
    fn sphere_has_no_analytic_jet() {
        let s = crate::surface::controls::mercator_sphere(1.0, 1.0, 16).unwrap();
        assert!(derivative_schemes().get(ANALYTIC).unwrap().jet(&s, 5, 5).is_err());
        let f = JetField::compute(&s, derivative_schemes().get(FINITE_DIFFERENCE).unwrap()).unwrap();
        assert_eq!(f.rows, 2..14);
        assert_eq!(f.cols, 0..16);
    }
}
