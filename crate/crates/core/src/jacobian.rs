//! The angle Jacobian `d(alpha_1, alpha_2, alpha_3) / d(u_1, u_2, u_3)`.
//!
//! Both geometries factor it as a scalar times a symmetric matrix:
//!
//! ```text
//! Euclidean:   J = -1 / (sin a_i  l_j  l_k)            N
//! hyperbolic:  J = -1 / (sin a_i  sinh l_j  sinh l_k)  M
//! ```
//!
//! The scalar does not depend on `i` (sine law). `N` is positive
//! semi-definite with kernel `(1, 1, 1)`; `M` is positive definite.

use nalgebra::Matrix3;
use num_rational::Rational64;

use crate::geometry::{
    satisfies_triangle_inequality, Geometry, GeometryError, LengthTriple, RadiusTriple, Result, TriangleWeights,
};
use crate::inversion::HYPERBOLIC_INVERSION_LIMIT;

pub type Jacobian3 = Matrix3<f64>;

#[inline]
fn others(i: usize) -> (usize, usize) {
    ((i + 1) % 3, (i + 2) % 3)
}

fn cosine_matrix(c: [f64; 3]) -> Matrix3<f64> {
    Matrix3::new(-1.0, c[2], c[1], c[2], -1.0, c[0], c[1], c[0], -1.0)
}

/// `N = diag(l) C D diag(r)` with `C` the cosine matrix and
/// `D_ij = dl_i/dr_j = (l_i^2 + r_j^2 - r_k^2) / (2 l_i r_j)`.
pub fn matrix_n(l: &LengthTriple, r: &RadiusTriple) -> Result<Matrix3<f64>> {
    let c = Geometry::Euclidean.cosines(l)?;
    let mut d = Matrix3::zeros();
    for i in 0..3 {
        let (j, k) = others(i);
        d[(i, j)] = (l[i] * l[i] + r[j] * r[j] - r[k] * r[k]) / (2.0 * l[i] * r[j]);
        d[(i, k)] = (l[i] * l[i] + r[k] * r[k] - r[j] * r[j]) / (2.0 * l[i] * r[k]);
    }
    let dl = Matrix3::from_diagonal(&l.0.into());
    let dr = Matrix3::from_diagonal(&r.0.into());
    Ok(dl * cosine_matrix(c) * d * dr)
}

/// `N` through the substitution `a = l_1^2, ..., x = (r_2^2 - r_3^2) / a, ...`:
/// `4N = A(a, b, c) B(x, y, z)`.
pub fn matrix_n_reduced(l: &LengthTriple, r: &RadiusTriple) -> Matrix3<f64> {
    let (a, b, c) = (l[0] * l[0], l[1] * l[1], l[2] * l[2]);
    let [x, y, z] = reduced_xyz(l, r);
    let lhs = Matrix3::new(
        -2.0 * a, a + b - c, c + a - b,
        a + b - c, -2.0 * b, b + c - a,
        c + a - b, b + c - a, -2.0 * c,
    );
    let rhs = Matrix3::new(
        0.0, 1.0 + x, 1.0 - x,
        1.0 - y, 0.0, 1.0 + y,
        1.0 + z, 1.0 - z, 0.0,
    );
    lhs * rhs * 0.25
}

/// `(x, y, z) = ((r_2^2 - r_3^2)/l_1^2, (r_3^2 - r_1^2)/l_2^2, (r_1^2 - r_2^2)/l_3^2)`.
pub fn reduced_xyz(l: &LengthTriple, r: &RadiusTriple) -> [f64; 3] {
    let sq = r.0.map(|v| v * v);
    [
        (sq[1] - sq[2]) / (l[0] * l[0]),
        (sq[2] - sq[0]) / (l[1] * l[1]),
        (sq[0] - sq[1]) / (l[2] * l[2]),
    ]
}

/// Off-diagonal coefficients `(B_1, B_2, B_3) = 4 (N_23, N_31, N_12)` in closed form.
pub fn b_coefficients(l: &LengthTriple, r: &RadiusTriple) -> [f64; 3] {
    let (a, b, c) = (l[0] * l[0], l[1] * l[1], l[2] * l[2]);
    let [x, y, z] = reduced_xyz(l, r);
    [
        a - b - c - 2.0 * b * y - (a + b - c) * x,
        b - c - a - 2.0 * c * z - (b + c - a) * y,
        c - a - b - 2.0 * a * x - (c + a - b) * z,
    ]
}

/// Exact `N` from squared lengths and squared radii.
pub fn matrix_n_exact(l_sq: [Rational64; 3], r_sq: [Rational64; 3]) -> [[Rational64; 3]; 3] {
    let [a, b, c] = l_sq;
    let one = Rational64::from_integer(1);
    let two = Rational64::from_integer(2);
    let x = (r_sq[1] - r_sq[2]) / a;
    let y = (r_sq[2] - r_sq[0]) / b;
    let z = (r_sq[0] - r_sq[1]) / c;
    let lhs = [
        [-two * a, a + b - c, c + a - b],
        [a + b - c, -two * b, b + c - a],
        [c + a - b, b + c - a, -two * c],
    ];
    let rhs = [
        [Rational64::from_integer(0), one + x, one - x],
        [one - y, Rational64::from_integer(0), one + y],
        [one + z, one - z, Rational64::from_integer(0)],
    ];
    let quarter = Rational64::new(1, 4);
    let mut out = [[Rational64::from_integer(0); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = (0..3).map(|m| lhs[i][m] * rhs[m][j]).sum::<Rational64>() * quarter;
        }
    }
    out
}

/// `M = diag(sinh l) C D diag(sinh r)` with
/// `D_ij = dl_i/dr_j = (cosh l_i cosh r_j - cosh r_k) / (sinh l_i sinh r_j)`.
pub fn matrix_m(l: &LengthTriple, r: &RadiusTriple) -> Result<Matrix3<f64>> {
    let c = Geometry::Hyperbolic.cosines(l)?;
    let mut d = Matrix3::zeros();
    for i in 0..3 {
        let (j, k) = others(i);
        d[(i, j)] = (l[i].cosh() * r[j].cosh() - r[k].cosh()) / (l[i].sinh() * r[j].sinh());
        d[(i, k)] = (l[i].cosh() * r[k].cosh() - r[j].cosh()) / (l[i].sinh() * r[k].sinh());
    }
    let dl = Matrix3::from_diagonal(&l.0.map(f64::sinh).into());
    let dr = Matrix3::from_diagonal(&r.0.map(f64::sinh).into());
    Ok(dl * cosine_matrix(c) * d * dr)
}

/// `M` in the Gram form with `a = cosh l_1, ..., x = cosh r_1, ...`.
pub fn matrix_m_gram(l: &LengthTriple, r: &RadiusTriple) -> Matrix3<f64> {
    let [a, b, c] = l.0.map(f64::cosh);
    let [x, y, z] = r.0.map(f64::cosh);
    let gram = Matrix3::new(
        1.0 - a * a, a * b - c, c * a - b,
        a * b - c, 1.0 - b * b, b * c - a,
        c * a - b, b * c - a, 1.0 - c * c,
    );
    let scale = Matrix3::from_diagonal(&[1.0 / (a * a - 1.0), 1.0 / (b * b - 1.0), 1.0 / (c * c - 1.0)].into());
    let rhs = Matrix3::new(
        0.0, a * y - z, a * z - y,
        b * x - z, 0.0, b * z - x,
        c * x - y, c * y - x, 0.0,
    );
    gram * scale * rhs
}

/// `M_12 = z - (ac - b)/(c^2 - 1) x - (bc - a)/(c^2 - 1) y`.
pub fn m12_closed_form(l: &LengthTriple, r: &RadiusTriple) -> f64 {
    let [a, b, c] = l.0.map(f64::cosh);
    let [x, y, z] = r.0.map(f64::cosh);
    let denom = c * c - 1.0;
    z - (a * c - b) / denom * x - (b * c - a) / denom * y
}

impl Geometry {
    /// `sin a_i S(l_j) S(l_k)` for each row `i`, with `S` the identity or
    /// `sinh`. All three agree by the sine law.
    pub fn jacobian_row_scales(self, l: &LengthTriple) -> Result<[f64; 3]> {
        let cs = self.cos_sin(l)?;
        let s = |x: f64| match self {
            Geometry::Euclidean => x,
            Geometry::Hyperbolic => x.sinh(),
        };
        Ok(std::array::from_fn(|i| {
            let (j, k) = others(i);
            cs[i].1 * s(l[j]) * s(l[k])
        }))
    }

    /// `d alpha / d u` at radii `r`.
    pub fn angle_jacobian(self, r: &RadiusTriple, w: &TriangleWeights) -> Result<Jacobian3> {
        let l = self.lengths_of_triangle(r, w)?;
        if !satisfies_triangle_inequality(&l, 0.0) {
            return Err(GeometryError::Inadmissible { radii: r.0, weights: w.0 });
        }
        let (scale, core) = match self {
            Geometry::Euclidean => (self.jacobian_row_scales(&l)?[0], matrix_n(&l, r)?),
            Geometry::Hyperbolic => {
                let longest = l.0.iter().cloned().fold(0.0, f64::max);
                if longest > HYPERBOLIC_INVERSION_LIMIT {
                    return Err(GeometryError::Range { radius: r.0.iter().cloned().fold(0.0, f64::max) });
                }
                (self.jacobian_row_scales(&l)?[0], matrix_m(&l, r)?)
            }
        };
        Ok(core * (-1.0 / scale))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::LogRadiusTriple;
    use approx::assert_relative_eq;

    fn worked() -> (LengthTriple, RadiusTriple) {
        (LengthTriple::new(2.0, 2.0, 3.0), RadiusTriple::splat(1.0))
    }

    #[test]
    fn worked_n_matrix() {
        let (l, r) = worked();
        let n = matrix_n(&l, &r).unwrap();
        let expected = Matrix3::new(2.0, 0.25, -2.25, 0.25, 2.0, -2.25, -2.25, -2.25, 4.5);
        assert!((n - expected).abs().max() < 1e-14, "{n}");
        assert!((matrix_n_reduced(&l, &r) - expected).abs().max() < 1e-14);
    }

    #[test]
    fn worked_n_matrix_exact() {
        let i = Rational64::from_integer;
        let n = matrix_n_exact([i(4), i(4), i(9)], [i(1); 3]);
        let q = Rational64::new;
        let expected = [
            [q(2, 1), q(1, 4), q(-9, 4)],
            [q(1, 4), q(2, 1), q(-9, 4)],
            [q(-9, 4), q(-9, 4), q(9, 2)],
        ];
        assert_eq!(n, expected);
    }

    #[test]
    fn worked_m_matrix() {
        let (l, r) = worked();
        let m = matrix_m(&l, &r).unwrap();
        let expected = Matrix3::new(6.08, 0.49, -2.94, 0.49, 6.08, -2.94, -2.94, -2.94, 22.11);
        assert!((m - expected).abs().max() <= 0.005, "{m}");
        assert!((matrix_m_gram(&l, &r) - m).abs().max() < 1e-10);
        assert_relative_eq!(m12_closed_form(&l, &r), m[(0, 1)], max_relative = 1e-10);
        assert_relative_eq!(m[(1, 0)], m[(0, 1)], max_relative = 1e-12);
    }

    #[test]
    fn b_coefficients_match_off_diagonal_entries() {
        let l = LengthTriple::new(2.2, 1.9, 3.1);
        let r = RadiusTriple::new(0.7, 1.2, 1.5);
        let n = matrix_n(&l, &r).unwrap();
        let b = b_coefficients(&l, &r);
        assert_relative_eq!(b[0], 4.0 * n[(1, 2)], max_relative = 1e-12);
        assert_relative_eq!(b[1], 4.0 * n[(2, 0)], max_relative = 1e-12);
        assert_relative_eq!(b[2], 4.0 * n[(0, 1)], max_relative = 1e-12);
    }

    #[test]
    fn worked_jacobian_is_scaled_n() {
        // r = (1,1,1) with l = (2,2,3) corresponds to weights (1, 1, 3.5).
        let g = Geometry::Euclidean;
        let (l, r) = worked();
        let w = TriangleWeights::new(
            g.inversive_distance(r[1], r[2], l[0]).unwrap(),
            g.inversive_distance(r[2], r[0], l[1]).unwrap(),
            g.inversive_distance(r[0], r[1], l[2]).unwrap(),
        );
        assert_eq!(w, TriangleWeights::new(1.0, 1.0, 3.5));
        let j = g.angle_jacobian(&r, &w).unwrap();
        let a = g.angles(&l).unwrap();
        let expected = matrix_n(&l, &r).unwrap() * (-1.0 / (a[0].sin() * l[1] * l[2]));
        assert!((j - expected).abs().max() < 1e-14);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let h = 1e-5;
        let w = TriangleWeights::new(0.4, 1.5, 2.2);
        for g in [Geometry::Euclidean, Geometry::Hyperbolic] {
            let r = RadiusTriple::new(0.8, 1.1, 0.6);
            let u = g.u_from_r(&r).unwrap();
            let j = g.angle_jacobian(&r, &w).unwrap();
            for q in 0..3 {
                let mut up = u;
                let mut dn = u;
                up.0[q] += h;
                dn.0[q] -= h;
                let ap = g.angles_at(&up, &w).unwrap();
                let am = g.angles_at(&dn, &w).unwrap();
                for p in 0..3 {
                    let fd = (ap[p] - am[p]) / (2.0 * h);
                    assert!((fd - j[(p, q)]).abs() < 1e-8, "{g} ({p},{q}) {fd} vs {}", j[(p, q)]);
                }
            }
        }
    }

    #[test]
    fn euclidean_jacobian_kills_constant_vector() {
        let g = Geometry::Euclidean;
        let w = TriangleWeights::new(2.0, 0.0, 1.0);
        let r = g.r_from_u(&LogRadiusTriple::new(0.1, -0.4, 0.3)).unwrap();
        let j = g.angle_jacobian(&r, &w).unwrap();
        let v = j * nalgebra::Vector3::repeat(1.0);
        assert!(v.abs().max() < 1e-12);
    }

    #[test]
    fn row_scales_agree() {
        let l = LengthTriple::new(1.3, 2.1, 2.9);
        for g in [Geometry::Euclidean, Geometry::Hyperbolic] {
            let s = g.jacobian_row_scales(&l).unwrap();
            assert_relative_eq!(s[0], s[1], max_relative = 1e-12);
            assert_relative_eq!(s[0], s[2], max_relative = 1e-12);
        }
    }

    #[test]
    fn inadmissible_radii_are_rejected() {
        // One widely separated pair: l_jk = sqrt(22) > 2 sqrt(2).
        let g = Geometry::Euclidean;
        let r = RadiusTriple::splat(1.0);
        let w = TriangleWeights::new(10.0, 0.0, 0.0);
        assert!(!g.is_admissible(&r, &w));
        assert!(matches!(g.angle_jacobian(&r, &w), Err(GeometryError::Inadmissible { .. })));
    }
}
