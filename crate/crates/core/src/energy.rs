//! The per-triangle energy `w(u) = int_base^u sum_i alpha_i du_i`.
//!
//! The 1-form is closed on the admissible domain, so the integral only
//! depends on the endpoints as long as the path stays admissible. We
//! integrate along straight segments; a segment that leaves the domain is
//! reported and the caller may pick another base point.

use crate::geometry::{Geometry, GeometryError, LogRadiusTriple, Result, TriangleWeights};
use crate::quadrature::{self, DEFAULT_TOLERANCE};

impl Geometry {
    /// `int_0^1 sum_i alpha_i(from + s (to - from)) (to_i - from_i) ds`.
    pub fn one_form_on_segment(
        self,
        w: &TriangleWeights,
        from: &LogRadiusTriple,
        to: &LogRadiusTriple,
        tol: f64,
    ) -> Result<f64> {
        let delta: [f64; 3] = std::array::from_fn(|i| to[i] - from[i]);
        if delta.iter().all(|d| *d == 0.0) {
            return Ok(0.0);
        }
        quadrature::integrate(
            |s| {
                let point = LogRadiusTriple(std::array::from_fn(|i| from[i] + s * delta[i]));
                let angles = self.angles_at(&point, w).map_err(|e| match e {
                    GeometryError::Inadmissible { .. } | GeometryError::LogRadiusDomain(_) => {
                        GeometryError::PathExits { point: point.0 }
                    }
                    other => other,
                })?;
                Ok((0..3).map(|i| angles[i] * delta[i]).sum())
            },
            0.0,
            1.0,
            tol,
        )
    }

    /// Integral of the 1-form along a polyline through `points`.
    pub fn one_form_on_path(self, w: &TriangleWeights, points: &[LogRadiusTriple], tol: f64) -> Result<f64> {
        let per_segment = tol / points.len().max(1) as f64;
        points
            .windows(2)
            .map(|pair| self.one_form_on_segment(w, &pair[0], &pair[1], per_segment))
            .sum()
    }

    /// Energy of one triangle relative to `base`, along the straight segment.
    pub fn triangle_energy(self, u: &LogRadiusTriple, w: &TriangleWeights, base: &LogRadiusTriple) -> Result<f64> {
        self.one_form_on_segment(w, base, u, DEFAULT_TOLERANCE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn energy_vanishes_at_base() {
        let u = LogRadiusTriple::new(0.2, -0.1, 0.4);
        assert_eq!(Geometry::Euclidean.triangle_energy(&u, &TriangleWeights::splat(1.0), &u).unwrap(), 0.0);
        let uh = LogRadiusTriple::splat(-0.8);
        assert_eq!(Geometry::Hyperbolic.triangle_energy(&uh, &TriangleWeights::splat(1.0), &uh).unwrap(), 0.0);
    }

    #[test]
    fn euclidean_energy_grows_by_pi_along_constant_direction() {
        let g = Geometry::Euclidean;
        let w = TriangleWeights::new(0.3, 1.2, 2.0);
        let base = LogRadiusTriple::new(0.0, 0.1, -0.2);
        let u = LogRadiusTriple::new(0.3, -0.2, 0.1);
        let t = 0.7;
        let shifted = LogRadiusTriple(u.0.map(|x| x + t));
        let gain = g.triangle_energy(&shifted, &w, &base).unwrap() - g.triangle_energy(&u, &w, &base).unwrap();
        assert!((gain - t * PI).abs() < 1e-9, "{gain}");
    }

    #[test]
    fn gradient_is_the_angle_vector() {
        let h = 1e-5;
        let w = TriangleWeights::new(0.5, 1.5, 0.9);
        for (g, base, u) in [
            (Geometry::Euclidean, [0.0; 3], [0.2, -0.3, 0.1]),
            (Geometry::Hyperbolic, [-0.9; 3], [-0.7, -1.1, -0.8]),
        ] {
            let base = LogRadiusTriple(base);
            let u = LogRadiusTriple(u);
            let angles = g.angles_at(&u, &w).unwrap();
            for i in 0..3 {
                let mut up = u;
                let mut dn = u;
                up.0[i] += h;
                dn.0[i] -= h;
                let fd = (g.triangle_energy(&up, &w, &base).unwrap() - g.triangle_energy(&dn, &w, &base).unwrap())
                    / (2.0 * h);
                assert!((fd - angles[i]).abs() < 1e-6, "{g} {i}: {fd} vs {}", angles[i]);
            }
        }
    }

    #[test]
    fn path_leaving_domain_is_reported() {
        // With I = 10 on edge jk the triangle inequality fails once r_i is small
        // relative to r_j, r_k.
        let g = Geometry::Euclidean;
        let w = TriangleWeights::new(10.0, 0.0, 0.0);
        let base = LogRadiusTriple::new(3.0, 0.0, 0.0);
        assert!(g.is_admissible(&g.r_from_u(&base).unwrap(), &w));
        let u = LogRadiusTriple::new(-3.0, 0.0, 0.0);
        assert!(matches!(g.triangle_energy(&u, &w, &base), Err(GeometryError::PathExits { .. })));
    }
}
