//! Pointwise curvature operators on jets, and intrinsic curvature from the
//! sampled metric.

use rayon::prelude::*;

use super::{interior, point_at, Surface, SurfaceJet};
use crate::error::{Error, Result};
use crate::geometry::Point4;

/// Isothermal tolerance of [`mean_curvature`].
pub const ISOTHERMAL_TOL: f64 = 1e-6;

/// `max(||F_s| - |F_t|| / √λ, |F_s·F_t| / λ)` with `λ = (|F_s|² + |F_t|²)/2`.
pub fn isothermal_defect(jet: &SurfaceJet) -> f64 {
    let lambda = conformal_factor(jet);
    let len_gap = (jet.fs.norm() - jet.ft.norm()).abs() / lambda.sqrt();
    len_gap.max(jet.fs.dot(jet.ft).abs() / lambda)
}

fn conformal_factor(jet: &SurfaceJet) -> f64 {
    0.5 * (jet.fs.norm_sq() + jet.ft.norm_sq())
}

/// Component of `v` normal to the tangent plane spanned by `F_s, F_t`.
pub fn normal_part(v: Point4, jet: &SurfaceJet) -> Point4 {
    let (e, f, g) = (jet.fs.norm_sq(), jet.fs.dot(jet.ft), jet.ft.norm_sq());
    let det = e * g - f * f;
    let (bs, bt) = (v.dot(jet.fs), v.dot(jet.ft));
    let a = (g * bs - f * bt) / det;
    let b = (e * bt - f * bs) / det;
    v - jet.fs * a - jet.ft * b
}

/// `H = (ΔF)^⊥`, `Δ = (∂_ss + ∂_tt)/λ`, for an isothermal jet.
pub fn mean_curvature(jet: &SurfaceJet) -> Result<Point4> {
    mean_curvature_with(jet, ISOTHERMAL_TOL)
}

pub fn mean_curvature_with(jet: &SurfaceJet, iso_tol: f64) -> Result<Point4> {
    let defect = isothermal_defect(jet);
    if !(defect <= iso_tol) {
        return Err(Error::NotIsothermal { defect });
    }
    let lap = (jet.fss + jet.ftt) * (1.0 / conformal_factor(jet));
    Ok(normal_part(lap, jet))
}

/// `|σ|² = (|F_ss^⊥|² + 2|F_st^⊥|² + |F_tt^⊥|²)/λ²` for an isothermal jet.
pub fn sigma_sq(jet: &SurfaceJet) -> f64 {
    let lambda = conformal_factor(jet);
    let n = |v| normal_part(v, jet).norm_sq();
    (n(jet.fss) + 2.0 * n(jet.fst) + n(jet.ftt)) / (lambda * lambda)
}

// Fourth-order centered first-derivative weights at offsets -2..=2.
const D1: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
const D2: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];

/// Gauss curvature from the Brioschi formula applied to the metric
/// `E, F, G` of the sampled points, all derivatives by five-point
/// differences. Returns `(i, j, K)` in row-major order on the points whose
/// stencils fit.
pub fn gauss_curvature_field(surf: &dyn Surface) -> Result<Vec<(usize, usize, f64)>> {
    let g = surf.grid();
    let (hs, ht) = surf.spacing();
    let (mrows, mcols) = interior(surf, 2);
    let (krows, kcols) = interior(surf, 4);
    if krows.is_empty() || kcols.is_empty() {
        return Err(Error::domain("grid too small for the metric stencils"));
    }
    let metric: Vec<[f64; 3]> = (0..g.len())
        .into_par_iter()
        .map(|idx| {
            let (i, j) = g.coords(idx);
            if !mrows.contains(&i) || !mcols.contains(&j) {
                return [f64::NAN; 3];
            }
            let (i, j) = (i as isize, j as isize);
            let mut fs = Point4::ZERO;
            let mut ft = Point4::ZERO;
            for (k, w) in D1.iter().enumerate() {
                let o = k as isize - 2;
                fs += point_at(surf, i + o, j) * (w / hs);
                ft += point_at(surf, i, j + o) * (w / ht);
            }
            [fs.norm_sq(), fs.dot(ft), ft.norm_sq()]
        })
        .collect();
    let m = |i: isize, j: isize, c: usize| {
        let wrap = |k: isize, n: usize| k.rem_euclid(n as isize) as usize;
        metric[g.index(wrap(i, g.ns), wrap(j, g.nt))][c]
    };
    let pts: Vec<(usize, usize)> = krows.flat_map(|i| kcols.clone().map(move |j| (i, j))).collect();
    Ok(pts
        .into_par_iter()
        .map(|(i, j)| {
            let (ii, jj) = (i as isize, j as isize);
            let d_s = |c| (0..5).map(|k| D1[k] * m(ii + k as isize - 2, jj, c)).sum::<f64>() / hs;
            let d_t = |c| (0..5).map(|k| D1[k] * m(ii, jj + k as isize - 2, c)).sum::<f64>() / ht;
            let d_ss = |c| (0..5).map(|k| D2[k] * m(ii + k as isize - 2, jj, c)).sum::<f64>() / (hs * hs);
            let d_tt = |c| (0..5).map(|k| D2[k] * m(ii, jj + k as isize - 2, c)).sum::<f64>() / (ht * ht);
            let d_st = |c| {
                let mut acc = 0.0;
                for a in 0..5 {
                    for b in 0..5 {
                        acc += D1[a] * D1[b] * m(ii + a as isize - 2, jj + b as isize - 2, c);
                    }
                }
                acc / (hs * ht)
            };
            let (e, f, gg) = (m(ii, jj, 0), m(ii, jj, 1), m(ii, jj, 2));
            let (e_s, e_t, f_s, f_t, g_s, g_t) = (d_s(0), d_t(0), d_s(1), d_t(1), d_s(2), d_t(2));
            let a11 = -0.5 * d_tt(0) + d_st(1) - 0.5 * d_ss(2);
            let m1 = [
                [a11, 0.5 * e_s, f_s - 0.5 * e_t],
                [f_t - 0.5 * g_s, e, f],
                [0.5 * g_t, f, gg],
            ];
            let m2 = [[0.0, 0.5 * e_t, 0.5 * g_s], [0.5 * e_t, e, f], [0.5 * g_s, f, gg]];
            let den = e * gg - f * f;
            (i, j, (det3(&m1) - det3(&m2)) / (den * den))
        })
        .collect())
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// `max |K|` and where it occurs (lowest index on ties).
pub fn gauss_curvature(surf: &dyn Surface) -> Result<(f64, (usize, usize))> {
    let field = gauss_curvature_field(surf)?;
    Ok(field.iter().fold((0.0, (field[0].0, field[0].1)), |best, &(i, j, k)| {
        if k.abs() > best.0 || k.is_nan() {
            (k.abs(), (i, j))
        } else {
            best
        }
    }))
}
