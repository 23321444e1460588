//! Polar coordinates of the two complex components, `A = r₁e^{iθ₁}` and
//! `B = r₂e^{iθ₂}`, and the constants `C_i = r_i⁴|∇θ_i|²e^{-r_i²}` which
//! are constant on a Lagrangian shrinker and equal `c_Γᵢ²` on a product.

use std::ops::Range;

use super::report::{argmax, CheckEntry};
use super::JetField;
use crate::curve::{radius_bounds, wrap_angle};
use crate::error::{Error, Result};

/// Radii below this are treated as hitting the origin.
pub const DEGENERATE_RADIUS: f64 = 1e-9;

/// Polar data on the points of a jet field, row-major.
#[derive(Clone, Debug)]
pub struct PolarField {
    pub rows: Range<usize>,
    pub cols: Range<usize>,
    pub r1: Vec<f64>,
    pub theta1: Vec<f64>,
    pub r2: Vec<f64>,
    pub theta2: Vec<f64>,
    pub grad_r1: Vec<[f64; 2]>,
    pub grad_theta1: Vec<[f64; 2]>,
    pub grad_r2: Vec<[f64; 2]>,
    pub grad_theta2: Vec<[f64; 2]>,
}

impl PolarField {
    pub fn len(&self) -> usize {
        self.r1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r1.is_empty()
    }

    pub fn coords(&self, k: usize) -> [usize; 2] {
        let w = self.cols.len();
        [self.rows.start + k / w, self.cols.start + k % w]
    }
}

/// Polar coordinates and their gradients in the `(s, t)` chart, by the
/// chain rule on the jets: `r_s = Re(Ā A_s)/r`, `θ_s = Im(Ā A_s)/r²`.
/// `θ₁` is unwrapped along `s`, `θ₂` along `t`.
pub fn polar_fields(jets: &JetField) -> Result<PolarField> {
    let n = jets.len();
    let mut pf = PolarField {
        rows: jets.rows.clone(),
        cols: jets.cols.clone(),
        r1: Vec::with_capacity(n),
        theta1: Vec::with_capacity(n),
        r2: Vec::with_capacity(n),
        theta2: Vec::with_capacity(n),
        grad_r1: Vec::with_capacity(n),
        grad_theta1: Vec::with_capacity(n),
        grad_r2: Vec::with_capacity(n),
        grad_theta2: Vec::with_capacity(n),
    };
    for (i, j, jet) in jets.iter() {
        let (a, b) = jet.f.to_complex();
        for r in [a.norm(), b.norm()] {
            if !(r >= DEGENERATE_RADIUS) {
                return Err(Error::DegenerateRadius { i, j, value: r });
            }
        }
        let (as_, at) = (jet.fs.a(), jet.ft.a());
        let (bs, bt) = (jet.fs.b(), jet.ft.b());
        let polar = |z: num_complex::Complex64, zs: num_complex::Complex64, zt: num_complex::Complex64| {
            let r = z.norm();
            let (ps, pt) = (z.conj() * zs, z.conj() * zt);
            (r, z.arg(), [ps.re / r, pt.re / r], [ps.im / (r * r), pt.im / (r * r)])
        };
        let (r1, th1, gr1, gt1) = polar(a, as_, at);
        let (r2, th2, gr2, gt2) = polar(b, bs, bt);
        pf.r1.push(r1);
        pf.theta1.push(th1);
        pf.grad_r1.push(gr1);
        pf.grad_theta1.push(gt1);
        pf.r2.push(r2);
        pf.theta2.push(th2);
        pf.grad_r2.push(gr2);
        pf.grad_theta2.push(gt2);
    }
    let (h, w) = (pf.rows.len(), pf.cols.len());
    // θ₁ along s (down each column), θ₂ along t (across each row)
    for j in 0..w {
        for i in 1..h {
            let (prev, cur) = ((i - 1) * w + j, i * w + j);
            pf.theta1[cur] = pf.theta1[prev] + wrap_angle(pf.theta1[cur] - pf.theta1[prev]);
        }
    }
    for i in 0..h {
        for j in 1..w {
            let (prev, cur) = (i * w + j - 1, i * w + j);
            pf.theta2[cur] = pf.theta2[prev] + wrap_angle(pf.theta2[cur] - pf.theta2[prev]);
        }
    }
    Ok(pf)
}

#[derive(Clone, Debug)]
pub struct GlobalRelation {
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub entries: Vec<CheckEntry>,
}

/// Evaluates `C_i` pointwise and checks constancy, agreement with
/// `c_Γᵢ²`, positivity, `C_i ≤ 1/e`, the radius range `r² = C e^{r²}`,
/// and the gradient structure `∇θ₁·∇θ₂ = 0`, `∇r_i ∥ ∇θ_i`.
///
/// `rel_tol` bounds the relative spread and mismatch of `C_i`,
/// `radius_tol` the excursion outside the radius range, `algebraic_tol`
/// the gradient structure.
pub fn global_relation_constants(
    pf: &PolarField,
    c_gamma: [f64; 2],
    rel_tol: f64,
    radius_tol: f64,
    algebraic_tol: f64,
) -> GlobalRelation {
    let constant = |r: &[f64], g: &[[f64; 2]]| -> Vec<f64> {
        r.iter()
            .zip(g)
            .map(|(&r, g)| r.powi(4) * (g[0] * g[0] + g[1] * g[1]) * (-r * r).exp())
            .collect()
    };
    let c1 = constant(&pf.r1, &pf.grad_theta1);
    let c2 = constant(&pf.r2, &pf.grad_theta2);
    let mut entries = Vec::new();
    for (idx, (c, r, cg)) in [(&c1, &pf.r1, c_gamma[0]), (&c2, &pf.r2, c_gamma[1])]
        .into_iter()
        .enumerate()
    {
        let k = idx + 1;
        let mean = c.iter().sum::<f64>() / c.len() as f64;
        let (max, at_max) = argmax(c.iter().enumerate().map(|(n, &v)| (pf.coords(n), v)));
        let (neg_min, at_min) = argmax(c.iter().enumerate().map(|(n, &v)| (pf.coords(n), -v)));
        let min = -neg_min;
        entries.push(CheckEntry::at_most(
            format!("c{k}_constancy"),
            (max - min) / mean.abs(),
            at_max,
            rel_tol,
        ));
        entries.push(CheckEntry::at_most(
            format!("c{k}_matches_c_gamma"),
            (mean - cg * cg).abs() / (cg * cg),
            at_max,
            rel_tol,
        ));
        entries.push(CheckEntry {
            name: format!("c{k}_positive"),
            max_residual: min,
            at: at_min,
            tol: 0.0,
            pass: min > 0.0,
            note: None,
        });
        let inv_e = (-1.0f64).exp();
        entries.push(CheckEntry::at_most(
            format!("c{k}_upper_bound"),
            max - inv_e,
            at_max,
            rel_tol * inv_e,
        ));
        let name = format!("r{k}_radius_bounds");
        entries.push(match radius_bounds(mean.min(inv_e)) {
            Ok((lo, hi)) => {
                let (out, at) = argmax(
                    r.iter()
                        .enumerate()
                        .map(|(n, &v)| (pf.coords(n), (lo - v).max(v - hi).max(0.0))),
                );
                CheckEntry::at_most(name, out, at, radius_tol)
            }
            Err(e) => CheckEntry::failed(name, radius_tol, &e),
        });
    }
    let (orth, at) = argmax(
        pf.grad_theta1
            .iter()
            .zip(&pf.grad_theta2)
            .enumerate()
            .map(|(n, (a, b))| (pf.coords(n), (a[0] * b[0] + a[1] * b[1]).abs())),
    );
    entries.push(CheckEntry::at_most("grad_theta_orthogonal", orth, at, algebraic_tol));
    let cross = |r: &[[f64; 2]], t: &[[f64; 2]]| {
        argmax(
            r.iter()
                .zip(t)
                .enumerate()
                .map(|(n, (a, b))| (pf.coords(n), (a[0] * b[1] - a[1] * b[0]).abs())),
        )
    };
    let (p1, at1) = cross(&pf.grad_r1, &pf.grad_theta1);
    let (p2, at2) = cross(&pf.grad_r2, &pf.grad_theta2);
    let (p, at) = if p2 > p1 { (p2, at2) } else { (p1, at1) };
    entries.push(CheckEntry::at_most("grad_r_parallel_theta", p, at, algebraic_tol));
    GlobalRelation { c1, c2, entries }
}
