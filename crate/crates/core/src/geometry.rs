//! The `R^4 = C^2` dictionary: complex structure, Kähler form, hermitian
//! product, reflections through hyperplanes, and the unitary maps that move a
//! symmetry hyperplane onto `{x1 = 0}`.
//!
//! Coordinates are identified as `(x1, x2, x3, x4) <-> (x1 + i x2, x3 + i x4)`.
//! All matrices are row-major and closed-form; nothing here needs a general
//! linear-algebra library.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for algebraic identities of closed-form constructions.
pub const ALGEBRAIC_TOL: f64 = 1e-12;

/// `Im <u, v> = HERMITIAN_IM_SIGN * omega(u, v)` for every `u, v`.
///
/// Fixed by evaluating the hermitian product on `(e1, e2)`: `<e1, e2> = 1 * conj(i) = -i`
/// while `omega(e1, e2) = 1`.
pub const HERMITIAN_IM_SIGN: f64 = -1.0;

pub type Mat4 = [[f64; 4]; 4];
pub type CMat2 = [[Complex64; 2]; 2];

/// Matrix of the complex structure `J` (multiplication by `i`).
pub const J_MATRIX: Mat4 = [
    [0.0, -1.0, 0.0, 0.0],
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, -1.0],
    [0.0, 0.0, 1.0, 0.0],
];

pub const IDENTITY4: Mat4 = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

/// A point (or vector) of `R^4`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point4(pub [f64; 4]);

impl Point4 {
    pub const ZERO: Point4 = Point4([0.0; 4]);

    pub const fn new(x1: f64, x2: f64, x3: f64, x4: f64) -> Self {
        Point4([x1, x2, x3, x4])
    }

    /// Standard basis vector `e_{k+1}`.
    pub fn basis(k: usize) -> Self {
        let mut v = [0.0; 4];
        v[k] = 1.0;
        Point4(v)
    }

    pub fn from_complex(a: Complex64, b: Complex64) -> Self {
        Point4([a.re, a.im, b.re, b.im])
    }

    /// Complex view `(A, B)`.
    pub fn to_complex(self) -> (Complex64, Complex64) {
        (self.a(), self.b())
    }

    pub fn a(self) -> Complex64 {
        Complex64::new(self.0[0], self.0[1])
    }

    pub fn b(self) -> Complex64 {
        Complex64::new(self.0[2], self.0[3])
    }

    pub fn dot(self, other: Point4) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl Index<usize> for Point4 {
    type Output = f64;
    fn index(&self, idx: usize) -> &f64 {
        &self.0[idx]
    }
}

impl Add for Point4 {
    type Output = Point4;
    fn add(self, rhs: Point4) -> Point4 {
        Point4(std::array::from_fn(|k| self.0[k] + rhs.0[k]))
    }
}

impl AddAssign for Point4 {
    fn add_assign(&mut self, rhs: Point4) {
        *self = *self + rhs;
    }
}

impl Sub for Point4 {
    type Output = Point4;
    fn sub(self, rhs: Point4) -> Point4 {
        Point4(std::array::from_fn(|k| self.0[k] - rhs.0[k]))
    }
}

impl Mul<f64> for Point4 {
    type Output = Point4;
    fn mul(self, rhs: f64) -> Point4 {
        Point4(self.0.map(|x| x * rhs))
    }
}

impl Mul<Point4> for f64 {
    type Output = Point4;
    fn mul(self, rhs: Point4) -> Point4 {
        rhs * self
    }
}

impl Neg for Point4 {
    type Output = Point4;
    fn neg(self) -> Point4 {
        self * -1.0
    }
}

/// A hyperplane through the origin, stored by its unit normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hyperplane {
    nu: Point4,
}

impl Hyperplane {
    pub fn new(nu: Point4) -> Result<Self> {
        let n = nu.norm();
        if !n.is_finite() || (n - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(Error::domain(format!("hyperplane normal has norm {n}, expected 1")));
        }
        Ok(Self { nu })
    }

    /// Normalizes a nonzero vector first.
    pub fn from_normal(v: Point4) -> Result<Self> {
        let n = v.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::domain("hyperplane normal must be a finite nonzero vector"));
        }
        Self::new(v * (1.0 / n))
    }

    /// The coordinate hyperplane `{x1 = 0}`.
    pub fn x1_zero() -> Self {
        Self { nu: Point4::basis(0) }
    }

    pub fn normal(&self) -> Point4 {
        self.nu
    }

    pub fn contains(&self, v: Point4, tol: f64) -> bool {
        v.dot(self.nu).abs() <= tol
    }

    /// Householder reflection `v - 2 (v . nu) nu`.
    pub fn reflect(&self, v: Point4) -> Point4 {
        v - self.nu * (2.0 * v.dot(self.nu))
    }
}

/// `J v`, i.e. the complex view multiplied by `i`.
pub fn apply_j(v: Point4) -> Point4 {
    let [x1, x2, x3, x4] = v.0;
    Point4([-x2, x1, -x4, x3])
}

/// `omega = dx1 ^ dx2 + dx3 ^ dx4`.
pub fn kahler_form(u: Point4, v: Point4) -> f64 {
    u[0] * v[1] - u[1] * v[0] + u[2] * v[3] - u[3] * v[2]
}

/// Standard hermitian product `A_u conj(A_v) + B_u conj(B_v)`.
pub fn hermitian(u: Point4, v: Point4) -> Complex64 {
    u.a() * v.a().conj() + u.b() * v.b().conj()
}

/// Reflection through `h`. Fails on a non-unit normal.
pub fn reflect(h: &Hyperplane, v: Point4) -> Result<Point4> {
    let n = h.nu.norm();
    if (n - 1.0).abs() > ALGEBRAIC_TOL {
        return Err(Error::domain(format!("reflection normal has norm {n}")));
    }
    Ok(h.reflect(v))
}

/// A 2x2 unitary matrix together with its real 4x4 form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitaryMap {
    pub entries: CMat2,
    pub real_form: Mat4,
}

impl UnitaryMap {
    pub fn new(entries: CMat2) -> Result<Self> {
        let real_form = unitary_to_orthogonal(&entries)?;
        Ok(Self { entries, real_form })
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self {
            entries: [[one, zero], [zero, one]],
            real_form: IDENTITY4,
        }
    }

    /// Complex action on `(A, B)`.
    pub fn apply_complex(&self, a: Complex64, b: Complex64) -> (Complex64, Complex64) {
        let g = &self.entries;
        (g[0][0] * a + g[0][1] * b, g[1][0] * a + g[1][1] * b)
    }

    /// Real action through `real_form`.
    pub fn apply(&self, v: Point4) -> Point4 {
        mat4_apply(&self.real_form, v)
    }
}

/// `G = [[conj a, conj b], [-b, a]]` for `nu = (a, b)` in complex view, so that
/// `G nu = (1, 0)`. The real form sends the hyperplane `nu^perp` to `{x1 = 0}`
/// and commutes with `J`.
pub fn normalize_hyperplane(h: &Hyperplane) -> Result<UnitaryMap> {
    let (a, b) = h.normal().to_complex();
    UnitaryMap::new([[a.conj(), b.conj()], [-b, a]])
}

/// Real 4x4 form of a complex 2x2 matrix: each entry `z` becomes the block
/// `[[Re z, -Im z], [Im z, Re z]]`. Rejects non-unitary input.
pub fn unitary_to_orthogonal(g: &CMat2) -> Result<Mat4> {
    let defect = unitary_defect(g);
    if !(defect <= ALGEBRAIC_TOL) {
        return Err(Error::domain(format!(
            "matrix is not unitary (|G G* - I| = {defect:e})"
        )));
    }
    Ok(complex_to_real(g))
}

pub(crate) fn complex_to_real(g: &CMat2) -> Mat4 {
    let mut m = [[0.0; 4]; 4];
    for (r, row) in g.iter().enumerate() {
        for (c, z) in row.iter().enumerate() {
            m[2 * r][2 * c] = z.re;
            m[2 * r][2 * c + 1] = -z.im;
            m[2 * r + 1][2 * c] = z.im;
            m[2 * r + 1][2 * c + 1] = z.re;
        }
    }
    m
}

/// Max-entry norm of `G G* - I`.
pub fn unitary_defect(g: &CMat2) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            let z = g[r][0] * g[c][0].conj() + g[r][1] * g[c][1].conj();
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((z - target).norm());
        }
    }
    worst
}

pub fn cmat2_mul(a: &CMat2, b: &CMat2) -> CMat2 {
    std::array::from_fn(|r| std::array::from_fn(|c| a[r][0] * b[0][c] + a[r][1] * b[1][c]))
}

pub fn mat4_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    std::array::from_fn(|r| std::array::from_fn(|c| (0..4).map(|k| a[r][k] * b[k][c]).sum()))
}

pub fn mat4_transpose(a: &Mat4) -> Mat4 {
    std::array::from_fn(|r| std::array::from_fn(|c| a[c][r]))
}

pub fn mat4_apply(a: &Mat4, v: Point4) -> Point4 {
    Point4(std::array::from_fn(|r| (0..4).map(|k| a[r][k] * v[k]).sum()))
}

/// Max-entry distance between two 4x4 matrices.
pub fn mat4_dist(a: &Mat4, b: &Mat4) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            worst = worst.max((a[r][c] - b[r][c]).abs());
        }
    }
    worst
}

/// Max-entry norm of `M^T M - I`.
pub fn orthogonality_defect(m: &Mat4) -> f64 {
    mat4_dist(&mat4_mul(&mat4_transpose(m), m), &IDENTITY4)
}

/// Max-entry norm of `M J - J M`.
pub fn j_commutator(m: &Mat4) -> f64 {
    mat4_dist(&mat4_mul(m, &J_MATRIX), &mat4_mul(&J_MATRIX, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(k: usize) -> Point4 {
        Point4::basis(k)
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn j_on_basis() {
        assert_eq!(apply_j(e(0)), e(1));
        assert_eq!(apply_j(e(2)), e(3));
        let v = Point4::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(apply_j(apply_j(v)), -v);
        assert_eq!(mat4_apply(&J_MATRIX, v), apply_j(v));
    }

    #[test]
    fn j_is_multiplication_by_i() {
        let v = Point4::new(0.3, -1.2, 2.5, 0.7);
        let (a, b) = v.to_complex();
        let i = c(0.0, 1.0);
        assert_eq!(apply_j(v), Point4::from_complex(i * a, i * b));
    }

    #[test]
    fn kahler_form_examples() {
        assert_eq!(kahler_form(e(0), e(1)), 1.0);
        assert_eq!(kahler_form(e(0), e(2)), 0.0);
        let v = Point4::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(kahler_form(v, v), 0.0);
    }

    #[test]
    fn hermitian_examples_and_sign_convention() {
        assert_eq!(hermitian(e(0), e(0)), c(1.0, 0.0));
        let h12 = hermitian(e(0), e(1));
        assert_eq!(h12.re, 0.0);
        // the sign is fixed once here and asserted globally below
        assert_eq!(h12.im, HERMITIAN_IM_SIGN * kahler_form(e(0), e(1)));
    }

    #[test]
    fn reflection_examples() {
        let h = Hyperplane::x1_zero();
        let v = Point4::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(reflect(&h, v).unwrap(), Point4::new(-1.0, 2.0, 3.0, 4.0));
        assert_eq!(h.reflect(h.reflect(v)), v);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = Hyperplane::new(Point4::new(s, s, 0.0, 0.0)).unwrap();
        let r = h.reflect(e(0));
        // v - 2 (v.nu) nu = (1,0,0,0) - 2 (1/sqrt2)(1/sqrt2, 1/sqrt2, 0, 0) = (0, -1, 0, 0)
        assert!((r - Point4::new(0.0, -1.0, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn non_unit_normal_rejected() {
        assert!(matches!(
            Hyperplane::new(Point4::new(1.0, 1.0, 0.0, 0.0)),
            Err(Error::InputDomain(_))
        ));
        assert!(Hyperplane::from_normal(Point4::ZERO).is_err());
    }

    #[test]
    fn normalize_examples() {
        let g = normalize_hyperplane(&Hyperplane::x1_zero()).unwrap();
        assert_eq!(g.entries, UnitaryMap::identity().entries);

        let g = normalize_hyperplane(&Hyperplane::new(e(2)).unwrap()).unwrap();
        assert_eq!(g.entries, [[c(0.0, 0.0), c(1.0, 0.0)], [c(-1.0, 0.0), c(0.0, 0.0)]]);
        let (a, b) = g.apply_complex(c(0.0, 0.0), c(1.0, 0.0));
        assert_eq!((a, b), (c(1.0, 0.0), c(0.0, 0.0)));

        let g = normalize_hyperplane(&Hyperplane::new(e(1)).unwrap()).unwrap();
        assert_eq!(g.entries[0][0], c(0.0, -1.0));
        let (a, b) = g.apply_complex(c(0.0, 1.0), c(0.0, 0.0));
        assert!((a - c(1.0, 0.0)).norm() < 1e-15 && b.norm() < 1e-15);
        assert!(unitary_defect(&g.entries) < 1e-15);
    }

    #[test]
    fn unitary_to_orthogonal_examples() {
        assert_eq!(
            unitary_to_orthogonal(&UnitaryMap::identity().entries).unwrap(),
            IDENTITY4
        );
        let i = c(0.0, 1.0);
        let zero = c(0.0, 0.0);
        assert_eq!(unitary_to_orthogonal(&[[i, zero], [zero, i]]).unwrap(), J_MATRIX);
        let bad = [[c(2.0, 0.0), zero], [zero, c(1.0, 0.0)]];
        assert!(matches!(unitary_to_orthogonal(&bad), Err(Error::InputDomain(_))));
    }

    #[test]
    fn x1_reflection_is_antisymplectic_on_first_line_only() {
        let h = Hyperplane::x1_zero();
        let v = Point4::new(0.4, -1.1, 0.0, 0.0);
        let w = Point4::new(1.3, 0.2, 0.0, 0.0);
        assert_eq!(kahler_form(h.reflect(v), h.reflect(w)), -kahler_form(v, w));
        let v = Point4::new(0.0, 0.0, 0.5, 0.9);
        let w = Point4::new(0.0, 0.0, -0.3, 0.8);
        assert_eq!(kahler_form(h.reflect(v), h.reflect(w)), kahler_form(v, w));
    }

    fn point4() -> impl Strategy<Value = Point4> {
        prop::array::uniform4(-10.0f64..10.0).prop_map(Point4)
    }

    /// Unitary matrix from Gram-Schmidt on a random complex 2x2 matrix.
    fn unitary() -> impl Strategy<Value = CMat2> {
        prop::array::uniform4(-1.0f64..1.0)
            .prop_flat_map(|a| (Just(a), prop::array::uniform4(-1.0f64..1.0)))
            .prop_filter_map("degenerate", |(a, b)| {
                let c1 = [c(a[0], a[1]), c(a[2], a[3])];
                let c2 = [c(b[0], b[1]), c(b[2], b[3])];
                let n1 = (c1[0].norm_sqr() + c1[1].norm_sqr()).sqrt();
                if n1 < 1e-3 {
                    return None;
                }
                let u1 = [c1[0] / n1, c1[1] / n1];
                let proj = u1[0].conj() * c2[0] + u1[1].conj() * c2[1];
                let w = [c2[0] - proj * u1[0], c2[1] - proj * u1[1]];
                let n2 = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
                if n2 < 1e-3 {
                    return None;
                }
                Some([[u1[0], w[0] / n2], [u1[1], w[1] / n2]])
            })
    }

    proptest! {
        #[test]
        fn omega_is_j_then_dot(u in point4(), v in point4()) {
            prop_assert!((kahler_form(u, v) - apply_j(u).dot(v)).abs() < 1e-12);
        }

        #[test]
        fn hermitian_parts(u in point4(), v in point4()) {
            let h = hermitian(u, v);
            let dot: f64 = (0..4).map(|k| u[k] * v[k]).sum();
            prop_assert!((h.re - dot).abs() < 1e-12);
            prop_assert!((h.im - HERMITIAN_IM_SIGN * kahler_form(u, v)).abs() < 1e-12);
        }

        #[test]
        fn reflection_involution_fixes_plane(n in point4(), v in point4()) {
            prop_assume!(n.norm() > 1e-3);
            let h = Hyperplane::from_normal(n).unwrap();
            let r = h.reflect(v);
            prop_assert!((h.reflect(r) - v).norm() < 1e-11);
            let on_plane = v - h.normal() * v.dot(h.normal());
            prop_assert!((h.reflect(on_plane) - on_plane).norm() < 1e-11);
        }

        #[test]
        fn real_form_orthogonal_and_j_linear(g in unitary()) {
            let m = unitary_to_orthogonal(&g).unwrap();
            prop_assert!(orthogonality_defect(&m) < 1e-12);
            prop_assert!(j_commutator(&m) < 1e-12);
        }

        #[test]
        fn real_form_homomorphism(g1 in unitary(), g2 in unitary()) {
            let lhs = unitary_to_orthogonal(&cmat2_mul(&g1, &g2)).unwrap();
            let rhs = mat4_mul(&unitary_to_orthogonal(&g1).unwrap(), &unitary_to_orthogonal(&g2).unwrap());
            prop_assert!(mat4_dist(&lhs, &rhs) < 1e-12);
        }

        #[test]
        fn normalization_sends_plane_to_x1_zero(n in point4(), v in point4()) {
            prop_assume!(n.norm() > 1e-3);
            let h = Hyperplane::from_normal(n).unwrap();
            let g = normalize_hyperplane(&h).unwrap();
            prop_assert!((g.apply(h.normal()) - Point4::basis(0)).norm() < 1e-12);
            let on_plane = v - h.normal() * v.dot(h.normal());
            prop_assert!(g.apply(on_plane)[0].abs() < 1e-11);
            // real and complex actions agree
            let (a, b) = g.apply_complex(v.a(), v.b());
            prop_assert!((g.apply(v) - Point4::from_complex(a, b)).norm() < 1e-12);
        }
    }
}
