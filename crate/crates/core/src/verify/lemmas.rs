use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{inf_norm, run_sampled, CertificateReport, Check, CriterionResult, SampleSpec, Trial, Witness, WitnessField};
use crate::geometry::{
    euclidean_inequality2, satisfies_triangle_inequality, triangle_margin, Geometry, LengthTriple, LogRadiusTriple,
    RadiusTriple, TriangleWeights,
};
use crate::jacobian::{b_coefficients, m12_closed_form, matrix_m, matrix_m_gram, matrix_n, matrix_n_reduced, reduced_xyz};
use crate::quadrature::DEFAULT_TOLERANCE;

const TRIANGLE_FIELDS: &[(&str, usize)] = &[("radii", 3), ("weights", 3)];

fn triangle_inputs(r: &RadiusTriple, w: &TriangleWeights) -> Vec<f64> {
    r.0.iter().chain(&w.0).copied().collect()
}

/// Runs `eval` on one admissible triangle per sample. `eval` returns one
/// value per check; `None` counts as a violation of every check.
fn per_triangle<F>(name: &str, spec: &SampleSpec, checks: &[Check], eval: F) -> CertificateReport
where
    F: Fn(&RadiusTriple, &TriangleWeights) -> Option<Vec<f64>> + Sync,
{
    run_sampled(name, Some(spec.geometry), spec, checks, TRIANGLE_FIELDS, |_, rng| {
        match spec.draw_admissible(rng) {
            (Some((r, w)), rejected) => {
                let values = eval(&r, &w).unwrap_or_else(|| vec![f64::NAN; checks.len()]);
                Trial::Tested { values, inputs: triangle_inputs(&r, &w), rejected }
            }
            (None, rejected) => Trial::Skipped { rejected },
        }
    })
}

fn max_abs(m: &Matrix3<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// The Jacobian is symmetric and its prefactor does not depend on the row.
pub fn certify_symmetry(spec: &SampleSpec) -> CertificateReport {
    let g = spec.geometry;
    let mut checks = vec![
        Check::at_most("relative asymmetry |J - J^T| / |J|", 1e-9),
        Check::at_most("row prefactor spread (sine law)", 1e-10),
    ];
    match g {
        Geometry::Euclidean => checks.push(Check::at_most("N direct vs reduced a,b,c,x,y,z form", 1e-10)),
        Geometry::Hyperbolic => {
            checks.push(Check::at_most("M direct vs Gram product form", 1e-10));
            checks.push(Check::at_most("M_12 closed form vs product", 1e-10));
        }
    }
    per_triangle("symmetry", spec, &checks, |r, w| {
        let j = g.angle_jacobian(r, w).ok()?;
        let l = g.lengths_of_triangle(r, w).ok()?;
        let scales = g.jacobian_row_scales(&l).ok()?;
        let spread = scales.iter().map(|s| (s - scales[0]).abs()).fold(0.0, f64::max) / scales[0].abs();
        let mut values = vec![inf_norm(&(j - j.transpose())) / inf_norm(&j), spread];
        match g {
            Geometry::Euclidean => {
                let n = matrix_n(&l, r).ok()?;
                values.push(max_abs(&(n - matrix_n_reduced(&l, r))) / max_abs(&n));
            }
            Geometry::Hyperbolic => {
                let m = matrix_m(&l, r).ok()?;
                values.push(max_abs(&(m - matrix_m_gram(&l, r))) / max_abs(&m));
                values.push((m[(0, 1)] - m12_closed_form(&l, r)).abs() / max_abs(&m));
            }
        }
        Some(values)
    })
}

/// `(e1, e2, e3, e4, 8 r1^2 r2^2 r3^2)`: the Euclidean lower-bound chain for
/// `l1^2 l2^2 l3^2 (xy + yz + zx + 1)`, each step replacing one `l_i^2` by
/// `r_j^2 + r_k^2`.
pub fn euclidean_chain(l: &LengthTriple, r: &RadiusTriple) -> [f64; 5] {
    let [p, q, s] = r.0.map(|x| x * x);
    let [a, b, c] = l.0.map(|x| x * x);
    let e = |a: f64, b: f64, c: f64| (p - q) * (s - p) * a + (q - s) * (p - q) * b + (s - p) * (q - s) * c + a * b * c;
    [e(a, b, c), e(q + s, b, c), e(q + s, p + s, c), e(q + s, p + s, p + q), 8.0 * p * q * s]
}

/// Eigen-structure of the Jacobian and the inequalities behind it.
pub fn certify_spectrum(spec: &SampleSpec) -> CertificateReport {
    let g = spec.geometry;
    let checks: Vec<Check> = match g {
        Geometry::Euclidean => vec![
            Check::below("larger nonzero eigenvalue / |J|", 0.0),
            Check::at_most("|zero eigenvalue| / |J|", 1e-8),
            Check::at_most("1 - |cos(kernel vector, (1,1,1))|", 1e-8),
            Check::at_most("4N vs B-coefficient form", 1e-10),
            Check::below("(B1 + B2 + B3) / (a + b + c)", 0.0),
            Check::below("-(B1B2 + B2B3 + B3B1) / (a + b + c)^2", 0.0),
            Check::at_most("B-product identity relative error", 1e-9),
            Check::below("-(xy + yz + zx + 1)", 0.0),
            Check::at_most("chain e1 >= e2 >= e3 >= e4 (relative excess)", 1e-10),
            Check::at_most("chain endpoint vs 8 r1^2 r2^2 r3^2", 1e-10),
        ],
        Geometry::Hyperbolic => vec![
            Check::below("largest eigenvalue / |J|", 0.0),
            Check::below("-(smallest eigenvalue of M) / |M|", 0.0),
            Check::below("-det M / |M|^3", 0.0),
        ],
    };
    per_triangle("spectrum", spec, &checks, |r, w| {
        let j = g.angle_jacobian(r, w).ok()?;
        let l = g.lengths_of_triangle(r, w).ok()?;
        let norm = inf_norm(&j);
        let eig = SymmetricEigen::new((j + j.transpose()) * 0.5);
        let mut order = [0, 1, 2];
        order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
        let lambda = order.map(|k| eig.eigenvalues[k]);
        match g {
            Geometry::Euclidean => {
                let kernel = eig.eigenvectors.column(order[2]).into_owned();
                let ones = Vector3::repeat(1.0 / 3f64.sqrt());
                let alignment = 1.0 - kernel.dot(&ones).abs() / kernel.norm();
                let n = matrix_n(&l, r).ok()?;
                let [b1, b2, b3] = b_coefficients(&l, r);
                let b_form = Matrix3::new(-b2 - b3, b3, b2, b3, -b3 - b1, b1, b2, b1, -b1 - b2);
                let (a, b, c) = (l[0] * l[0], l[1] * l[1], l[2] * l[2]);
                let [x, y, z] = reduced_xyz(&l, r);
                let products = b1 * b2 + b2 * b3 + b3 * b1;
                let heron = 2.0 * (a * b + b * c + c * a) - a * a - b * b - c * c;
                let pairs = x * y + y * z + z * x + 1.0;
                let identity = heron * pairs;
                let scale = a + b + c;
                let chain = euclidean_chain(&l, r);
                let chain_scale = chain[0].abs().max(chain[4]);
                let excess = (0..3).map(|k| (chain[k + 1] - chain[k]) / chain_scale).fold(f64::NEG_INFINITY, f64::max);
                Some(vec![
                    lambda[1] / norm,
                    lambda[2].abs() / norm,
                    alignment,
                    max_abs(&(n * 4.0 - b_form)) / max_abs(&(n * 4.0)),
                    (b1 + b2 + b3) / scale,
                    -products / (scale * scale),
                    (products - identity).abs() / products.abs().max(identity.abs()),
                    -pairs,
                    excess,
                    (chain[3] - chain[4]).abs() / chain[4],
                ])
            }
            Geometry::Hyperbolic => {
                let m = matrix_m(&l, r).ok()?;
                let m_eig = SymmetricEigen::new((m + m.transpose()) * 0.5);
                let m_min = m_eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
                let m_norm = inf_norm(&m);
                Some(vec![lambda[2] / norm, -m_min / m_norm, -m.determinant() / m_norm.powi(3)])
            }
        }
    })
}

/// Attempts per loop before the sample is skipped.
pub const CLOSEDNESS_RETRIES: usize = 50;
/// Half-width of the box around the first corner in which the other two
/// corners of a loop are drawn.
const LOOP_SPREAD: f64 = 0.5;

fn loop_integral(g: Geometry, w: &TriangleWeights, corners: &[LogRadiusTriple; 3]) -> Option<f64> {
    let path = [corners[0], corners[1], corners[2], corners[0]];
    g.one_form_on_path(w, &path, DEFAULT_TOLERANCE).ok()
}

/// The 1-form `sum alpha_i du_i` integrates to zero around closed
/// triangular loops that stay in the admissible domain.
pub fn certify_closedness(spec: &SampleSpec) -> CertificateReport {
    let g = spec.geometry;
    let checks = [Check::at_most("|loop integral|", 1e-8)];
    let fields = [("u_a", 3), ("u_b", 3), ("u_c", 3), ("weights", 3)];
    run_sampled("closedness", Some(g), spec, &checks, &fields, |_, rng: &mut ChaCha8Rng| {
        let mut rejected = 0;
        for _ in 0..CLOSEDNESS_RETRIES {
            let (drawn, r_rejected) = spec.draw_admissible(rng);
            rejected += r_rejected;
            let Some((r, w)) = drawn else { break };
            let Ok(a) = g.u_from_r(&r) else {
                rejected += 1;
                continue;
            };
            let mut corner = || LogRadiusTriple(a.0.map(|x| x + rng.gen_range(-LOOP_SPREAD..LOOP_SPREAD)));
            let corners = [a, corner(), corner()];
            match loop_integral(g, &w, &corners) {
                Some(v) => {
                    let inputs = corners.iter().flat_map(|c| c.0).chain(w.0).collect();
                    return Trial::Tested { values: vec![v.abs()], inputs, rejected };
                }
                None => rejected += 1,
            }
        }
        Trial::Skipped { rejected }
    })
}

/// Relative slack of the cyclic image inequalities; positive iff `l` is in
/// the image of the length map.
fn image_margin(g: Geometry, l: &LengthTriple, w: &TriangleWeights) -> Option<f64> {
    let mut worst = f64::INFINITY;
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let m = match g {
            Geometry::Euclidean => {
                let bound = l[j] * l[j] + l[k] * l[k] + 2.0 * w[i] * l[j] * l[k];
                (bound - l[i] * l[i]) / bound
            }
            Geometry::Hyperbolic => {
                let bound = g.edge_length(l[j], l[k], w[i]).ok()?;
                (bound - l[i]) / bound
            }
        };
        worst = worst.min(m);
    }
    Some(worst)
}

/// Length-space separation below which two samples count as colliding.
const COLLISION_LENGTH: f64 = 1e-9;
/// Radius-space separation above which colliding samples are distinct.
const COLLISION_RADIUS: f64 = 1e-6;

/// Pairs of radius triples that are farther apart than `COLLISION_RADIUS`
/// but whose lengths are within `COLLISION_LENGTH` (max-norm).
fn collisions(points: &[(RadiusTriple, LengthTriple)]) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].1[0].total_cmp(&points[b].1[0]).then(a.cmp(&b)));
    let dist = |x: &[f64; 3], y: &[f64; 3]| (0..3).map(|k| (x[k] - y[k]).abs()).fold(0.0, f64::max);
    let mut out = Vec::new();
    for (pos, &a) in order.iter().enumerate() {
        for &b in &order[pos + 1..] {
            if points[b].1[0] - points[a].1[0] > COLLISION_LENGTH {
                break;
            }
            if dist(&points[a].1 .0, &points[b].1 .0) <= COLLISION_LENGTH
                && dist(&points[a].0 .0, &points[b].0 .0) > COLLISION_RADIUS
            {
                out.push((a.min(b), a.max(b)));
            }
        }
    }
    out.sort_unstable();
    out
}

/// The length map is injective: lengths of admissible samples lie in the
/// image, invert back to the radii, and a cloud with one fixed weight
/// triple has no length collisions.
pub fn certify_injectivity(spec: &SampleSpec) -> CertificateReport {
    let g = spec.geometry;
    let checks = [
        Check::at_most("round-trip relative radius error", 1e-10),
        Check::below("-(image inequality slack)", 0.0),
    ];
    let mut report = per_triangle("injectivity", spec, &checks, |r, w| {
        let l = g.lengths_of_triangle(r, w).ok()?;
        let margin = image_margin(g, &l, w)?;
        let back = g.radii_from_lengths(&l, w).map(|b| b.0);
        let err = match back {
            Ok(b) => (0..3).map(|i| (b[i] - r[i]).abs() / r[i]).fold(0.0, f64::max),
            Err(_) => f64::NAN,
        };
        Some(vec![err, -margin])
    });

    let mut weight_rng = spec.rng(spec.count);
    let w = TriangleWeights(std::array::from_fn(|_| spec.draw_weight(&mut weight_rng)));
    let cloud: Vec<(RadiusTriple, LengthTriple)> = (0..spec.count)
        .filter_map(|i| {
            let mut rng = spec.rng(spec.count + 1 + i);
            let r = RadiusTriple(std::array::from_fn(|_| spec.draw_radius(&mut rng)));
            g.lengths_of_triangle(&r, &w).ok().map(|l| (r, l))
        })
        .collect();
    let hits = collisions(&cloud);
    report.criteria.push(CriterionResult {
        label: "length collisions in fixed-weight cloud".into(),
        bound: 0.0,
        strict: false,
        worst: hits.len() as f64,
        violations: hits.len(),
    });
    if let Some(&(a, b)) = hits.first() {
        report.passed = false;
        if report.witness.is_none() || report.violations() == hits.len() {
            let field = |name: &str, v: &[f64; 3]| WitnessField { name: name.into(), values: v.to_vec() };
            report.witness = Some(Witness {
                sample: a,
                fields: vec![
                    field("radii_a", &cloud[a].0 .0),
                    field("radii_b", &cloud[b].0 .0),
                    field("lengths_a", &cloud[a].1 .0),
                    field("weights", &w.0),
                ],
            });
        }
    }
    report
}

/// Width of the band around the boundary inside which the two admissibility
/// predicates may disagree through rounding.
const BOUNDARY_BAND: f64 = 1e-12;

/// The triangle inequality on lengths agrees with the sign of the six-term
/// expression in `u` (Euclidean only; radii are drawn without rejection).
pub fn certify_inequality2_equivalence(spec: &SampleSpec) -> CertificateReport {
    let g = Geometry::Euclidean;
    let checks = [Check::at_most("disagreements outside the boundary band", 0.0)];
    run_sampled("inequality2-equivalence", Some(g), spec, &checks, TRIANGLE_FIELDS, |_, rng| {
        let (r, w) = spec.draw(rng);
        let value = match (g.lengths_of_triangle(&r, &w), g.u_from_r(&r)) {
            (Ok(l), Ok(u)) => {
                let by_lengths = satisfies_triangle_inequality(&l, 0.0);
                let by_u = euclidean_inequality2(&u, &w) > 0.0;
                if by_lengths == by_u || triangle_margin(&l).abs() <= BOUNDARY_BAND {
                    0.0
                } else {
                    1.0
                }
            }
            _ => f64::NAN,
        };
        Trial::Tested { values: vec![value], inputs: triangle_inputs(&r, &w), rejected: 0 }
    })
}

/// `(expanded, factored)` forms of the polynomial obtained by squaring the
/// `cosh l_1` bound, in `a = cosh l_2`, `b = cosh l_3`, and the sum of the
/// absolute values of the expanded terms.
pub(crate) fn squared_bound_polynomial(a: f64, b: f64) -> (f64, f64, f64) {
    let terms = [
        a * b.powi(4),
        a.powi(4) * b,
        -a.powi(3) * b * b,
        -a * a * b.powi(3),
        a.powi(4),
        b.powi(4),
        -2.0 * a * a * b * b,
        a.powi(3),
        b.powi(3),
        -a * b * b,
        -a * a * b,
    ];
    let expanded: f64 = terms.iter().sum();
    let factored = (a * b + 1.0) * (a + b) * (a - b).powi(2) + (a * a - b * b).powi(2);
    let scale = terms.iter().map(|t| t.abs()).sum();
    (expanded, factored, scale)
}

/// Leading principal minors of the triangle part `M_1` of the hyperbolic
/// matrix are positive, with the inequalities used to prove it.
pub fn certify_minor_inequalities(spec: &SampleSpec) -> CertificateReport {
    let g = Geometry::Hyperbolic;
    let spec = SampleSpec { geometry: g, ..*spec };
    let checks = [
        Check::below("-(1x1 minor of M_1) / scale", 0.0),
        Check::below("cosh l_1 lower bound: bound / cosh l_1 - 1", 0.0),
        Check::at_most("squared polynomial expanded vs factored", 1e-12),
        Check::at_most("-(squared polynomial) / scale", 0.0),
        Check::below("-(2x2 minor of M_1) / scale", 0.0),
        Check::at_most("2x2 minor determinant vs expanded form", 1e-10),
        Check::below("-(2x2 minor endpoint in cosh l)", 0.0),
        Check::below("-det M / |M|^3", 0.0),
    ];
    per_triangle("minor-inequalities", &spec, &checks, |r, w| {
        let l = g.lengths_of_triangle(r, w).ok()?;
        let m = matrix_m(&l, r).ok()?;
        Some(minor_values(&l, &m)?.to_vec())
    })
}

pub(crate) fn minor_values(l: &LengthTriple, m: &Matrix3<f64>) -> Option<[f64; 8]> {
    let [c1, c2, c3] = Geometry::Hyperbolic.cosines(l).ok()?;
    let [ch1, ch2, ch3] = l.0.map(f64::cosh);
    let t = l.0.map(|x| (x * 0.5).tanh());
    let [t1, t2, t3] = t;
    let cosine = Matrix3::new(-1.0, c3, c2, c3, -1.0, c1, c2, c1, -1.0);
    let tmat = Matrix3::new(0.0, t1, t1, t2, 0.0, t2, t3, t3, 0.0);
    let ct = cosine * tmat;
    let minor1 = ct[(0, 0)];
    let minor1_scale = c3.abs() * t2 + c2.abs() * t3;
    let bound = (ch2 * ch2 + ch3 * ch3 + ch2 + ch3) / (2.0 * ch2 * ch3 + ch2 + ch3);
    let (expanded, factored, poly_scale) = squared_bound_polynomial(ch2, ch3);
    let det2 = ct[(0, 0)] * ct[(1, 1)] - ct[(0, 1)] * ct[(1, 0)];
    let terms = [(c3 * c3 - 1.0) * t1 * t2, (c1 * c3 + c2) * t2 * t3, (c2 * c3 + c1) * t1 * t3];
    let det2_expanded: f64 = terms.iter().sum();
    let det2_scale = terms.iter().map(|x| x.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    let endpoint = (ch1 + ch2 - 1.0) + (2.0 * ch1 * ch2 - ch3);
    let m_norm = inf_norm(m);
    Some([
        -minor1 / minor1_scale,
        bound / ch1 - 1.0,
        (expanded - factored).abs() / poly_scale,
        -factored / poly_scale,
        -det2 / det2_scale,
        (det2 - det2_expanded).abs() / det2_scale,
        -endpoint,
        -m.determinant() / m_norm.powi(3),
    ])
}
