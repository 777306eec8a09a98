//! Per-triangle geometry: lengths from radii, angles from lengths, the
//! log-radius coordinates and the admissibility predicates.
//!
//! Every triple is indexed by the vertices `(i, j, k)` of one triangle.
//! Edge quantities (weights, lengths) use the opposite-vertex convention:
//! slot `0` holds the value for edge `jk`, slot `1` for `ki`, slot `2` for
//! `ij`.

use std::f64::consts::LN_2;
use std::ops::Index;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hyperbolic lengths above this make `cosh` overflow in the Jacobian.
pub const HYPERBOLIC_LENGTH_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid {what}: {value}")]
    InvalidInput { what: &'static str, value: f64 },
    #[error("value out of floating-point range for radius {radius}")]
    Range { radius: f64 },
    #[error("hyperbolic log-radius must be negative, got {0}")]
    LogRadiusDomain(f64),
    #[error("edge lengths {0:?} violate the strict triangle inequality")]
    TriangleInequality([f64; 3]),
    #[error("edge lengths {lengths:?} are not realizable: {}", realizability_label(*.index))]
    NotRealizable { lengths: [f64; 3], index: usize },
    #[error("radii {radii:?} with weights {weights:?} are not admissible")]
    Inadmissible { radii: [f64; 3], weights: [f64; 3] },
    #[error("root bracket failed: {0}")]
    Bracket(String),
    #[error("integration path leaves the admissible domain at u = {point:?}")]
    PathExits { point: [f64; 3] },
}

pub type Result<T> = std::result::Result<T, GeometryError>;

/// Human readable form of the cyclic realizability inequality with the
/// given opposite-vertex index.
pub fn realizability_label(index: usize) -> &'static str {
    match index {
        0 => "l_jk^2 < l_ij^2 + l_ki^2 + 2 I_jk l_ij l_ki",
        1 => "l_ki^2 < l_jk^2 + l_ij^2 + 2 I_ki l_jk l_ij",
        _ => "l_ij^2 < l_ki^2 + l_jk^2 + 2 I_ij l_ki l_jk",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Euclidean,
    Hyperbolic,
}

impl std::fmt::Display for Geometry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Geometry::Euclidean => f.write_str("euclidean"),
            Geometry::Hyperbolic => f.write_str("hyperbolic"),
        }
    }
}

impl std::str::FromStr for Geometry {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "e" => Ok(Geometry::Euclidean),
            "hyperbolic" | "h" => Ok(Geometry::Hyperbolic),
            other => Err(format!("unknown geometry `{other}`")),
        }
    }
}

macro_rules! triple {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
        pub struct $name(pub [f64; 3]);

        impl $name {
            pub const fn new(a: f64, b: f64, c: f64) -> Self {
                Self([a, b, c])
            }

            pub const fn splat(v: f64) -> Self {
                Self([v, v, v])
            }
        }

        impl Index<usize> for $name {
            type Output = f64;

            fn index(&self, i: usize) -> &f64 {
                &self.0[i]
            }
        }

        impl From<[f64; 3]> for $name {
            fn from(v: [f64; 3]) -> Self {
                Self(v)
            }
        }
    };
}

triple!(
    /// Inversive distances `(I_jk, I_ki, I_ij)`, each finite and `>= 0`.
    TriangleWeights
);
triple!(
    /// Circle radii `(r_i, r_j, r_k)`.
    RadiusTriple
);
triple!(
    /// Log-radius coordinates. Euclidean: `u = ln r`. Hyperbolic:
    /// `u = ln tanh(r / 2)`, always negative.
    LogRadiusTriple
);
triple!(
    /// Edge lengths `(l_jk, l_ki, l_ij)`; `l_i` is opposite vertex `i`.
    LengthTriple
);
triple!(
    /// Inner angles `(alpha_i, alpha_j, alpha_k)` in radians.
    AngleTriple
);

impl AngleTriple {
    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// `ln(sinh x)` for `x > 0`, without overflow.
pub(crate) fn ln_sinh(x: f64) -> f64 {
    if x > 20.0 {
        x - LN_2 + (-(-2.0 * x).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}

fn check_positive(what: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(GeometryError::InvalidInput { what, value })
    }
}

fn check_weight(value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(GeometryError::InvalidInput { what: "weight", value })
    }
}

#[inline]
fn others(i: usize) -> (usize, usize) {
    ((i + 1) % 3, (i + 2) % 3)
}

/// Strict triangle inequality with a margin relative to the perimeter.
pub fn satisfies_triangle_inequality(l: &LengthTriple, margin: f64) -> bool {
    let perimeter = l.0.iter().sum::<f64>();
    (0..3).all(|i| {
        let (j, k) = others(i);
        l[j] + l[k] - l[i] > margin * perimeter
    })
}

/// Smallest of `l_j + l_k - l_i` divided by the perimeter. Positive iff the
/// lengths form a non-degenerate triangle.
pub fn triangle_margin(l: &LengthTriple) -> f64 {
    let perimeter = l.0.iter().sum::<f64>();
    (0..3)
        .map(|i| {
            let (j, k) = others(i);
            (l[j] + l[k] - l[i]) / perimeter
        })
        .fold(f64::INFINITY, f64::min)
}

/// Index of the (unique) violated triangle inequality `l_i < l_j + l_k`.
pub fn violated_triangle_inequality(l: &LengthTriple) -> Option<usize> {
    (0..3).find(|&i| {
        let (j, k) = others(i);
        l[i] >= l[j] + l[k]
    })
}

/// Six-term Euclidean admissibility expression in `u`; positive exactly on
/// the admissible domain.
pub fn euclidean_inequality2(u: &LogRadiusTriple, w: &TriangleWeights) -> f64 {
    let [i_jk, i_ki, i_ij] = w.0;
    let [ui, uj, uk] = u.0;
    let e = |x: f64| (-x).exp();
    (1.0 - i_jk * i_jk) * e(2.0 * ui)
        + (1.0 - i_ki * i_ki) * e(2.0 * uj)
        + (1.0 - i_ij * i_ij) * e(2.0 * uk)
        + 2.0 * (i_jk * i_ki + i_ij) * e(ui + uj)
        + 2.0 * (i_ki * i_ij + i_jk) * e(uj + uk)
        + 2.0 * (i_ij * i_jk + i_ki) * e(uk + ui)
}

/// Heron-style product `(l1+l2+l3)(-l1+l2+l3)(l1-l2+l3)(l1+l2-l3)`, the
/// left side of the product form of the triangle inequality.
pub fn heron_product(l: &LengthTriple) -> f64 {
    let [a, b, c] = l.0;
    (a + b + c) * (-a + b + c) * (a - b + c) * (a + b - c)
}

impl Geometry {
    /// Distance between the centres of two circles with radii `ra`, `rb`
    /// and inversive distance `weight`.
    pub fn edge_length(self, ra: f64, rb: f64, weight: f64) -> Result<f64> {
        check_positive("radius", ra)?;
        check_positive("radius", rb)?;
        check_weight(weight)?;
        let l = match self {
            Geometry::Euclidean => (ra * ra + rb * rb + 2.0 * ra * rb * weight).sqrt(),
            Geometry::Hyperbolic => hyperbolic_edge_length(ra, rb, weight),
        };
        if l.is_finite() {
            Ok(l)
        } else {
            Err(GeometryError::Range { radius: ra.max(rb) })
        }
    }

    /// Inverse of [`Geometry::edge_length`] in the weight argument.
    pub fn inversive_distance(self, ra: f64, rb: f64, l: f64) -> Result<f64> {
        check_positive("radius", ra)?;
        check_positive("radius", rb)?;
        check_positive("length", l)?;
        let value = match self {
            Geometry::Euclidean => (l * l - ra * ra - rb * rb) / (2.0 * ra * rb),
            Geometry::Hyperbolic => {
                // cosh l - cosh ra cosh rb = (cosh l - cosh(ra - rb)) - sinh ra sinh rb
                let d = ra - rb;
                let p = 0.5 * (l + d);
                let q = 0.5 * (l - d);
                if p == 0.0 || q == 0.0 {
                    -1.0
                } else {
                    let sign = p.signum() * q.signum();
                    let ln_ratio = LN_2 + ln_sinh(p.abs()) + ln_sinh(q.abs()) - ln_sinh(ra) - ln_sinh(rb);
                    sign * ln_ratio.exp() - 1.0
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(GeometryError::Range { radius: ra.max(rb) })
        }
    }

    pub fn u_from_r_scalar(self, r: f64) -> Result<f64> {
        check_positive("radius", r)?;
        Ok(match self {
            Geometry::Euclidean => r.ln(),
            // ln tanh(r/2) = ln(1 - e^-r) - ln(1 + e^-r); the first term
            // goes through expm1 when e^-r is near 1 and ln_1p when it is small
            Geometry::Hyperbolic => {
                let e = (-r).exp();
                let head = if r < std::f64::consts::LN_2 { (-(-r).exp_m1()).ln() } else { (-e).ln_1p() };
                head - e.ln_1p()
            }
        })
    }

    pub fn r_from_u_scalar(self, u: f64) -> Result<f64> {
        if !u.is_finite() {
            return Err(GeometryError::InvalidInput { what: "log-radius", value: u });
        }
        let r = match self {
            Geometry::Euclidean => u.exp(),
            Geometry::Hyperbolic => {
                if u >= 0.0 {
                    return Err(GeometryError::LogRadiusDomain(u));
                }
                // ln((1 + e^u) / (1 - e^u))
                u.exp().ln_1p() - (-u.exp_m1()).ln()
            }
        };
        if r.is_finite() && r > 0.0 {
            Ok(r)
        } else {
            Err(GeometryError::Range { radius: r })
        }
    }

    pub fn u_from_r(self, r: &RadiusTriple) -> Result<LogRadiusTriple> {
        Ok(LogRadiusTriple([
            self.u_from_r_scalar(r[0])?,
            self.u_from_r_scalar(r[1])?,
            self.u_from_r_scalar(r[2])?,
        ]))
    }

    pub fn r_from_u(self, u: &LogRadiusTriple) -> Result<RadiusTriple> {
        Ok(RadiusTriple([
            self.r_from_u_scalar(u[0])?,
            self.r_from_u_scalar(u[1])?,
            self.r_from_u_scalar(u[2])?,
        ]))
    }

    /// `dr/du` at radius `r`: `r` (Euclidean) or `sinh r` (hyperbolic).
    pub fn dr_du(self, r: f64) -> f64 {
        match self {
            Geometry::Euclidean => r,
            Geometry::Hyperbolic => r.sinh(),
        }
    }

    /// Edge lengths of the triangle spanned by three circles; `l_i` pairs
    /// `r_j`, `r_k` with weight `I_jk`.
    pub fn lengths_of_triangle(self, r: &RadiusTriple, w: &TriangleWeights) -> Result<LengthTriple> {
        let mut l = [0.0; 3];
        for (i, li) in l.iter_mut().enumerate() {
            let (j, k) = others(i);
            *li = self.edge_length(r[j], r[k], w[i])?;
        }
        Ok(LengthTriple(l))
    }

    /// Membership of `r` in the admissible domain: the three edge lengths
    /// satisfy the strict triangle inequality.
    pub fn is_admissible(self, r: &RadiusTriple, w: &TriangleWeights) -> bool {
        self.is_admissible_with_margin(r, w, 0.0)
    }

    pub fn is_admissible_with_margin(self, r: &RadiusTriple, w: &TriangleWeights, margin: f64) -> bool {
        match self.lengths_of_triangle(r, w) {
            Ok(l) => satisfies_triangle_inequality(&l, margin),
            Err(_) => false,
        }
    }

    /// Index of the first cyclic realizability inequality that fails, if any.
    ///
    /// `l_i` is realizable against `l_j, l_k` iff `l_i` is shorter than the
    /// centre distance of two circles with radii `l_j, l_k` and weight `I_i`;
    /// this is the same comparison as the squared (resp. `cosh`) form but is
    /// evaluated without overflow.
    pub fn realizability_violation(self, l: &LengthTriple, w: &TriangleWeights) -> Result<Option<usize>> {
        for i in 0..3 {
            check_positive("length", l[i])?;
            check_weight(w[i])?;
        }
        for i in 0..3 {
            let (j, k) = others(i);
            let bound = match self {
                Geometry::Euclidean => l[j] * l[j] + l[k] * l[k] + 2.0 * w[i] * l[j] * l[k],
                Geometry::Hyperbolic => self.edge_length(l[j], l[k], w[i])?,
            };
            let value = match self {
                Geometry::Euclidean => l[i] * l[i],
                Geometry::Hyperbolic => l[i],
            };
            if !(value < bound) {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// Whether `l` lies in the image of the length map for weights `w`.
    pub fn lengths_realizable(self, l: &LengthTriple, w: &TriangleWeights) -> bool {
        matches!(self.realizability_violation(l, w), Ok(None))
    }

    /// Cosines of the inner angles by the cosine law.
    pub fn cosines(self, l: &LengthTriple) -> Result<[f64; 3]> {
        Ok(self.cos_sin(l)?.map(|(c, _)| c))
    }

    /// Inner angles of the triangle with edge lengths `l`.
    pub fn angles(self, l: &LengthTriple) -> Result<AngleTriple> {
        let cs = self.cos_sin(l)?;
        Ok(AngleTriple(cs.map(|(c, s)| s.atan2(c))))
    }

    /// `(cos alpha_i, sin alpha_i)` for each corner. Both are evaluated from
    /// half-perimeter products so neither loses accuracy near 0 or pi.
    pub(crate) fn cos_sin(self, l: &LengthTriple) -> Result<[(f64, f64); 3]> {
        for i in 0..3 {
            check_positive("length", l[i])?;
        }
        if !satisfies_triangle_inequality(l, 0.0) {
            return Err(GeometryError::TriangleInequality(l.0));
        }
        let s = 0.5 * (l[0] + l[1] + l[2]);
        let mut out = [(0.0, 0.0); 3];
        match self {
            Geometry::Euclidean => {
                let area4 = (s * (s - l[0]) * (s - l[1]) * (s - l[2])).sqrt() * 4.0;
                for (i, o) in out.iter_mut().enumerate() {
                    let (j, k) = others(i);
                    let p = 0.5 * (l[i] + l[j] - l[k]);
                    let q = 0.5 * (l[i] - l[j] + l[k]);
                    let denom = l[j] * l[k];
                    *o = (1.0 - 2.0 * p * q / denom, 0.5 * area4 / denom);
                }
            }
            Geometry::Hyperbolic => {
                let ln_area = 0.5 * (ln_sinh(s) + ln_sinh(s - l[0]) + ln_sinh(s - l[1]) + ln_sinh(s - l[2]));
                for (i, o) in out.iter_mut().enumerate() {
                    let (j, k) = others(i);
                    let p = 0.5 * (l[i] + l[j] - l[k]);
                    let q = 0.5 * (l[i] - l[j] + l[k]);
                    let ln_denom = ln_sinh(l[j]) + ln_sinh(l[k]);
                    let cos = 1.0 - 2.0 * (ln_sinh(p) + ln_sinh(q) - ln_denom).exp();
                    let sin = 2.0 * (ln_area - ln_denom).exp();
                    *o = (cos, sin);
                }
            }
        }
        Ok(out)
    }

    /// Angles as functions of log-radii: `u -> r -> l -> alpha`.
    pub fn angles_at(self, u: &LogRadiusTriple, w: &TriangleWeights) -> Result<AngleTriple> {
        let r = self.r_from_u(u)?;
        let l = self.lengths_of_triangle(&r, w)?;
        if !satisfies_triangle_inequality(&l, 0.0) {
            return Err(GeometryError::Inadmissible { radii: r.0, weights: w.0 });
        }
        self.angles(&l)
    }
}

fn hyperbolic_edge_length(ra: f64, rb: f64, w: f64) -> f64 {
    if ra.max(rb) <= 30.0 {
        // cosh l - 1 = 2 sinh^2((ra - rb)/2) + (1 + w) sinh ra sinh rb, all terms >= 0
        let h = (0.5 * (ra - rb)).sinh();
        let excess = 2.0 * h * h + (1.0 + w) * ra.sinh() * rb.sinh();
        2.0 * (0.5 * excess).sqrt().asinh()
    } else {
        let ea = (-2.0 * ra).exp();
        let eb = (-2.0 * rb).exp();
        let bracket = (1.0 + w) + (1.0 - w) * (ea + eb) + (1.0 + w) * ea * eb;
        let ln_cosh_l = ra + rb + bracket.ln() - 2.0 * LN_2;
        // acosh X = ln X + ln(1 + sqrt(1 - X^-2))
        ln_cosh_l + (1.0 + (-(-2.0 * ln_cosh_l).exp_m1()).sqrt()).ln()
    }
}
