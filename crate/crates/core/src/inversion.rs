//! Recovering radii from edge lengths.
//!
//! Fixing `t = r_k`, the equations for edges `jk` and `ki` determine `r_j`
//! and `r_i` uniquely and both are strictly decreasing in `t`. The remaining
//! equation for edge `ij` then has a strictly decreasing residual with a
//! single root on `(0, min(l_jk, l_ki))`.

use crate::geometry::{Geometry, GeometryError, LengthTriple, RadiusTriple, Result, TriangleWeights};
use crate::roots::bracketed_root;

/// Longest hyperbolic edge accepted by the inversion (`sinh(2 l)` must be finite).
pub const HYPERBOLIC_INVERSION_LIMIT: f64 = 350.0;

/// Euclidean substitution `r_j(t)`, `r_i(t)` and the residual
/// `f(t) = r_i^2 + r_j^2 + 2 I_ij r_i r_j - l_ij^2`.
#[derive(Debug, Clone, Copy)]
pub struct EuclideanSubstitution {
    pub lengths: LengthTriple,
    pub weights: TriangleWeights,
}

impl EuclideanSubstitution {
    pub fn new(lengths: LengthTriple, weights: TriangleWeights) -> Self {
        Self { lengths, weights }
    }

    /// `-I t + sqrt((I^2 - 1) t^2 + l^2)` in the cancellation-free form
    /// `(l^2 - t^2) / (I t + sqrt(...))`, and its derivative in `t`.
    fn side(l: f64, w: f64, t: f64) -> (f64, f64) {
        let radicand = (l - t) * (l + t) + (w * t) * (w * t);
        let root = radicand.sqrt();
        let r = (l - t) * (l + t) / (w * t + root);
        let dr = -w + (w * w - 1.0) * t / root;
        (r, dr)
    }

    pub fn radius_j(&self, t: f64) -> f64 {
        Self::side(self.lengths[0], self.weights[0], t).0
    }

    pub fn radius_i(&self, t: f64) -> f64 {
        Self::side(self.lengths[1], self.weights[1], t).0
    }

    /// Open interval of `t` on which both substituted radii are positive.
    pub fn bracket(&self) -> (f64, f64) {
        (0.0, self.lengths[0].min(self.lengths[1]))
    }

    pub fn residual(&self, t: f64) -> f64 {
        self.residual_with_derivative(t).0
    }

    pub fn residual_with_derivative(&self, t: f64) -> (f64, f64) {
        let (rj, drj) = Self::side(self.lengths[0], self.weights[0], t);
        let (ri, dri) = Self::side(self.lengths[1], self.weights[1], t);
        let w = self.weights[2];
        let l = self.lengths[2];
        let f = ri * ri + rj * rj + 2.0 * w * ri * rj - l * l;
        let df = (2.0 * ri + 2.0 * w * rj) * dri + (2.0 * rj + 2.0 * w * ri) * drj;
        (f, df)
    }
}

/// Hyperbolic analogue: `r_j(t)` solves `cosh l_jk = cosh r_j cosh t + I_jk sinh r_j sinh t`
/// in closed form; the residual is the length mismatch on edge `ij`.
#[derive(Debug, Clone, Copy)]
pub struct HyperbolicSubstitution {
    pub lengths: LengthTriple,
    pub weights: TriangleWeights,
}

impl HyperbolicSubstitution {
    pub fn new(lengths: LengthTriple, weights: TriangleWeights) -> Self {
        Self { lengths, weights }
    }

    fn side(l: f64, w: f64, t: f64) -> (f64, f64) {
        let (st, ct) = (t.sinh(), t.cosh());
        let (sl, b) = (l.sinh(), w * st);
        let c_minus_a = 2.0 * (0.5 * (l + t)).sinh() * (0.5 * (l - t)).sinh();
        let d = (sl - st) * (sl + st) + b * b;
        let excess = (c_minus_a + (l + t).sinh() * (l - t).sinh() / (d.sqrt() + b)) / (ct + b);
        let x = excess.ln_1p();
        let (sx, cx) = (x.sinh(), x.cosh());
        let dx = -(st * cx + w * ct * sx) / (ct * sx + w * st * cx);
        (x, dx)
    }

    pub fn radius_j(&self, t: f64) -> f64 {
        Self::side(self.lengths[0], self.weights[0], t).0
    }

    pub fn radius_i(&self, t: f64) -> f64 {
        Self::side(self.lengths[1], self.weights[1], t).0
    }

    pub fn bracket(&self) -> (f64, f64) {
        (0.0, self.lengths[0].min(self.lengths[1]))
    }

    pub fn residual(&self, t: f64) -> f64 {
        self.residual_with_derivative(t).0
    }

    pub fn residual_with_derivative(&self, t: f64) -> (f64, f64) {
        let (rj, drj) = Self::side(self.lengths[0], self.weights[0], t);
        let (ri, dri) = Self::side(self.lengths[1], self.weights[1], t);
        let w = self.weights[2];
        let len = raw_hyperbolic_length(ri, rj, w);
        let (si, ci, sj, cj) = (ri.sinh(), ri.cosh(), rj.sinh(), rj.cosh());
        let dcosh = (si * cj + w * ci * sj) * dri + (ci * sj + w * si * cj) * drj;
        (len - self.lengths[2], dcosh / len.sinh())
    }
}

fn raw_hyperbolic_length(ra: f64, rb: f64, w: f64) -> f64 {
    let h = (0.5 * (ra - rb)).sinh();
    let excess = 2.0 * h * h + (1.0 + w) * ra.sinh() * rb.sinh();
    2.0 * (0.5 * excess).sqrt().asinh()
}

impl Geometry {
    /// Inverse of [`Geometry::lengths_of_triangle`] for fixed weights.
    pub fn radii_from_lengths(self, l: &LengthTriple, w: &TriangleWeights) -> Result<RadiusTriple> {
        if let Some(index) = self.realizability_violation(l, w)? {
            return Err(GeometryError::NotRealizable { lengths: l.0, index });
        }
        let (t, ri, rj) = match self {
            Geometry::Euclidean => {
                let sub = EuclideanSubstitution::new(*l, *w);
                let (lo, hi) = sub.bracket();
                let t = bracketed_root(|t| sub.residual_with_derivative(t), lo, hi)
                    .map_err(|e| GeometryError::Bracket(format!("euclidean {l:?} {w:?}: {e}")))?;
                (t, sub.radius_i(t), sub.radius_j(t))
            }
            Geometry::Hyperbolic => {
                let longest = l.0.iter().cloned().fold(0.0, f64::max);
                if longest > HYPERBOLIC_INVERSION_LIMIT {
                    return Err(GeometryError::Range { radius: longest });
                }
                let sub = HyperbolicSubstitution::new(*l, *w);
                let (lo, hi) = sub.bracket();
                let t = bracketed_root(|t| sub.residual_with_derivative(t), lo, hi)
                    .map_err(|e| GeometryError::Bracket(format!("hyperbolic {l:?} {w:?}: {e}")))?;
                (t, sub.radius_i(t), sub.radius_j(t))
            }
        };
        let r = RadiusTriple([ri, rj, t]);
        if r.0.iter().all(|x| x.is_finite() && *x > 0.0) {
            Ok(r)
        } else {
            Err(GeometryError::Bracket(format!("root t = {t:e} gives non-positive radii {:?}", r.0)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn recovers_tangent_unit_circles() {
        for g in [Geometry::Euclidean, Geometry::Hyperbolic] {
            let r = g.radii_from_lengths(&LengthTriple::splat(2.0), &TriangleWeights::splat(1.0)).unwrap();
            for x in r.0 {
                assert_relative_eq!(x, 1.0, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn boundary_lengths_are_rejected() {
        let err = Geometry::Euclidean
            .radii_from_lengths(&LengthTriple::new(2.0, 1.0, 1.0), &TriangleWeights::splat(1.0))
            .unwrap_err();
        assert!(matches!(err, GeometryError::NotRealizable { index: 0, .. }));
        assert!(err.to_string().contains("I_jk"));
    }

    #[test]
    fn substitution_endpoints() {
        let l = LengthTriple::new(2.0, 3.0, 2.5);
        let w = TriangleWeights::new(0.5, 2.0, 1.0);
        let e = EuclideanSubstitution::new(l, w);
        assert_relative_eq!(e.radius_j(0.0), 2.0);
        assert_relative_eq!(e.radius_i(0.0), 3.0);
        assert_eq!(e.radius_j(2.0), 0.0);
        let h = HyperbolicSubstitution::new(l, w);
        assert_relative_eq!(h.radius_j(0.0), 2.0, max_relative = 1e-14);
        assert_relative_eq!(h.radius_i(0.0), 3.0, max_relative = 1e-14);
        assert_eq!(h.radius_j(2.0), 0.0);
    }

    #[test]
    fn hyperbolic_side_solves_its_equation() {
        let (l, w) = (2.3, 1.7);
        for &t in &[0.1, 0.9, 2.0] {
            let (x, _) = HyperbolicSubstitution::side(l, w, t);
            let lhs = x.cosh() * t.cosh() + w * x.sinh() * t.sinh();
            assert_relative_eq!(lhs, l.cosh(), max_relative = 1e-13);
        }
    }

    #[test]
    fn substitution_derivatives_match_finite_differences() {
        let l = LengthTriple::new(2.0, 3.0, 2.5);
        let w = TriangleWeights::new(0.5, 2.0, 1.0);
        let h = 1e-6;
        let e = EuclideanSubstitution::new(l, w);
        let hy = HyperbolicSubstitution::new(l, w);
        for &t in &[0.3, 1.0, 1.7] {
            let fd = (e.residual(t + h) - e.residual(t - h)) / (2.0 * h);
            assert_relative_eq!(e.residual_with_derivative(t).1, fd, max_relative = 1e-6);
            let fd = (hy.residual(t + h) - hy.residual(t - h)) / (2.0 * h);
            assert_relative_eq!(hy.residual_with_derivative(t).1, fd, max_relative = 1e-6);
        }
    }
}
