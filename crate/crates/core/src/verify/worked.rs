//! Regression of the two worked matrices at `l = (2, 2, 3)`, `r = (1, 1, 1)`.

use nalgebra::{Matrix3, SymmetricEigen};
use num_rational::Rational64;

use super::{reduce, CertificateReport, Check, Trial};
use crate::geometry::{Geometry, LengthTriple, RadiusTriple};
use crate::jacobian::{matrix_m, matrix_n, matrix_n_exact};

/// Published entries of `M`, two decimals.
pub const WORKED_M: [[f64; 3]; 3] = [[6.08, 0.49, -2.94], [0.49, 6.08, -2.94], [-2.94, -2.94, 22.11]];
/// Published eigenvalues of `M`, two decimals, descending.
pub const WORKED_M_EIGENVALUES: [f64; 3] = [23.15, 5.59, 5.53];

fn worked_point() -> (LengthTriple, RadiusTriple) {
    (LengthTriple::new(2.0, 2.0, 3.0), RadiusTriple::splat(1.0))
}

fn rational(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn sorted_eigenvalues(m: Matrix3<f64>) -> [f64; 3] {
    let mut ev: [f64; 3] = SymmetricEigen::new(m).eigenvalues.into();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `N` exactly in rationals, its characteristic polynomial, and the
/// floating-point spectrum `{0, 7/4, 27/4}`.
pub fn worked_n_regression() -> CertificateReport {
    let expected = [
        [rational(2, 1), rational(1, 4), rational(-9, 4)],
        [rational(1, 4), rational(2, 1), rational(-9, 4)],
        [rational(-9, 4), rational(-9, 4), rational(9, 2)],
    ];
    let exact = matrix_n_exact([4, 4, 9].map(Rational64::from_integer), [Rational64::from_integer(1); 3]);
    let entry_mismatches = (0..9).filter(|k| exact[k / 3][k % 3] != expected[k / 3][k % 3]).count();

    // det(lambda I - N) = lambda^3 - c2 lambda^2 + c1 lambda - c0
    let m = |i: usize, j: usize| exact[i][j];
    let c2 = m(0, 0) + m(1, 1) + m(2, 2);
    let c1 = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) + m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1) + m(0, 0) * m(2, 2)
        - m(0, 2) * m(2, 0);
    let c0 = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
        + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    let roots = [rational(0, 1), rational(7, 4), rational(27, 4)];
    let nonroots = roots
        .iter()
        .filter(|&&x| x * x * x - c2 * x * x + c1 * x - c0 != Rational64::from_integer(0))
        .count();
    // the three roots are distinct, so they exhaust the cubic
    let coefficient_match = c2 == rational(17, 2) && c1 == rational(189, 16) && c0 == rational(0, 1);

    let (l, r) = worked_point();
    let float = matrix_n(&l, &r).map(sorted_eigenvalues);
    let eig_err = match float {
        Ok(ev) => (0..3).map(|i| (ev[i] - to_f64(roots[i])).abs()).fold(0.0, f64::max),
        Err(_) => f64::NAN,
    };
    let float_entries = matrix_n(&l, &r)
        .map(|n| (0..9).map(|k| (n[(k / 3, k % 3)] - to_f64(expected[k / 3][k % 3])).abs()).fold(0.0, f64::max))
        .unwrap_or(f64::NAN);

    let checks = [
        Check::at_most("exact entry mismatches", 0.0),
        Check::at_most("characteristic polynomial non-roots", 0.0),
        Check::at_most("characteristic coefficients differ", 0.0),
        Check::at_most("floating eigenvalue error", 1e-12),
        Check::at_most("floating entry error", 1e-12),
    ];
    let values = vec![
        entry_mismatches as f64,
        nonroots as f64,
        if coefficient_match { 0.0 } else { 1.0 },
        eig_err,
        float_entries,
    ];
    let inputs = l.0.iter().chain(&r.0).copied().collect();
    reduce(
        "worked-N",
        Some(Geometry::Euclidean),
        &checks,
        &[("lengths", 3), ("radii", 3)],
        vec![Trial::Tested { values, inputs, rejected: 0 }],
    )
}

fn to_f64(x: Rational64) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// `M` against the published two-decimal table and spectrum.
pub fn worked_m_regression() -> CertificateReport {
    let (l, r) = worked_point();
    let (entry_err, eig_err) = match matrix_m(&l, &r) {
        Ok(m) => {
            let entry = (0..9).map(|k| (m[(k / 3, k % 3)] - WORKED_M[k / 3][k % 3]).abs()).fold(0.0, f64::max);
            let mut ev = sorted_eigenvalues(m);
            ev.reverse();
            let eig = (0..3).map(|i| (ev[i] - WORKED_M_EIGENVALUES[i]).abs()).fold(0.0, f64::max);
            (entry, eig)
        }
        Err(_) => (f64::NAN, f64::NAN),
    };
    let checks = [Check::at_most("entry deviation", 0.005), Check::at_most("eigenvalue deviation", 0.01)];
    let inputs = l.0.iter().chain(&r.0).copied().collect();
    reduce(
        "worked-M",
        Some(Geometry::Hyperbolic),
        &checks,
        &[("lengths", 3), ("radii", 3)],
        vec![Trial::Tested { values: vec![entry_err, eig_err], inputs, rejected: 0 }],
    )
}
