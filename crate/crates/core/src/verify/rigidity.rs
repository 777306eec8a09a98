//! Whole-mesh certificates: round-trip solves near random packings and the
//! Euclidean scaling gauge.
//!
//! Every sample draws its own edge weights and base log-radii on a fixed
//! triangulation, so a run covers many weighted surfaces with one
//! combinatorics.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{run_sampled, CertificateReport, Check, SampleSpec, Trial, MAX_ATTEMPTS};
use crate::geometry::Geometry;
use crate::mesh::{LogRadiusVector, Triangulation, WeightedTriangulation};
use crate::solver::{solve, SolverOptions, TargetAngles};

/// Shifts applied by [`certify_scaling_gauge`].
pub const GAUGE_SHIFTS: [f64; 3] = [-1.0, 0.5, 3.0];

/// How weighted packings are drawn on a fixed triangulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshSampling {
    pub geometry: Geometry,
    /// Each edge weight is uniform on this range.
    pub weight_range: (f64, f64),
    /// Base radii are `exp(U(-spread, spread))`; for Euclidean this is
    /// `u` uniform on `[-spread, spread]`.
    pub spread: f64,
    /// Exact max-norm of the start perturbation in `u`.
    pub perturbation: f64,
    pub count: usize,
    pub seed: u64,
}

impl MeshSampling {
    pub fn new(geometry: Geometry, count: usize, seed: u64) -> Self {
        Self { geometry, weight_range: (0.0, 2.0), spread: 0.3, perturbation: 0.05, count, seed }
    }

    fn spec(&self) -> SampleSpec {
        SampleSpec::new(self.geometry, self.count, self.seed)
    }
}

struct Instance {
    wt: WeightedTriangulation,
    base: LogRadiusVector,
    inputs: Vec<f64>,
}

/// Random weights and base radii, redrawn until every face is admissible.
fn draw_instance(t: &Triangulation, s: &MeshSampling, rng: &mut ChaCha8Rng) -> (Option<Instance>, usize) {
    let g = s.geometry;
    let edges = t.edges();
    let (lo, hi) = s.weight_range;
    for rejected in 0..MAX_ATTEMPTS {
        let weights: Vec<f64> = edges.iter().map(|_| if lo == hi { lo } else { rng.gen_range(lo..=hi) }).collect();
        let radii: Vec<f64> = (0..t.vertex_count).map(|_| rng.gen_range(-s.spread..=s.spread).exp()).collect();
        let Ok(wt) = WeightedTriangulation::new(t.clone(), edges.iter().zip(&weights).map(|(e, w)| (e.0, e.1, *w)))
        else {
            return (None, rejected);
        };
        let Ok(base) = LogRadiusVector::from_radii(g, &radii) else { continue };
        if wt.first_inadmissible_face(g, &base).is_none() {
            let inputs = weights.iter().chain(&base.0).copied().collect();
            return (Some(Instance { wt, base, inputs }), rejected);
        }
    }
    (None, MAX_ATTEMPTS)
}

/// `base` plus a random offset of max-norm exactly `size`, redrawn until
/// every face is admissible.
fn perturbed_start(
    g: Geometry,
    inst: &Instance,
    size: f64,
    rng: &mut ChaCha8Rng,
) -> (Option<LogRadiusVector>, usize) {
    for rejected in 0..MAX_ATTEMPTS {
        let offset: Vec<f64> = inst.base.0.iter().map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let norm = offset.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if norm == 0.0 {
            continue;
        }
        let u0 = LogRadiusVector(inst.base.0.iter().zip(&offset).map(|(b, o)| b + size * o / norm).collect());
        if inst.wt.first_inadmissible_face(g, &u0).is_none() {
            return (Some(u0), rejected);
        }
    }
    (None, MAX_ATTEMPTS)
}

/// Max-norm distance of `a - b` from `span(1)` (Euclidean) or from 0.
fn distance(g: Geometry, a: &LogRadiusVector, b: &LogRadiusVector) -> f64 {
    let d = a.0.iter().zip(&b.0).map(|(x, y)| x - y);
    match g {
        Geometry::Euclidean => {
            let (lo, hi) = d.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
            0.5 * (hi - lo)
        }
        Geometry::Hyperbolic => d.fold(0.0, |m, x| m.max(x.abs())),
    }
}

fn fields(t: &Triangulation) -> [(&'static str, usize); 2] {
    [("weights", t.edges().len()), ("u_base", t.vertex_count)]
}

/// Takes `a* = cone_angles(base)`, starts Newton at a perturbed `base` and
/// asks for `base` back: to within the gauge direction for Euclidean,
/// exactly for hyperbolic.
pub fn certify_local_rigidity(
    name: &str,
    t: &Triangulation,
    s: &MeshSampling,
    opts: &SolverOptions,
    tolerance: f64,
    max_iterations: usize,
) -> CertificateReport {
    let g = s.geometry;
    let checks = [
        Check::at_most("recovery error", tolerance),
        Check::at_most("Newton iterations", max_iterations as f64),
    ];
    run_sampled(name, Some(g), &s.spec(), &checks, &fields(t), |_, rng| {
        let (inst, mut rejected) = draw_instance(t, s, rng);
        let Some(inst) = inst else { return Trial::Skipped { rejected } };
        let (u0, r) = perturbed_start(g, &inst, s.perturbation, rng);
        rejected += r;
        let Some(u0) = u0 else { return Trial::Skipped { rejected } };
        let values = match inst.wt.cone_angles(g, &inst.base) {
            Ok(a) => match solve(g, &inst.wt, &TargetAngles(a.0), &u0, opts) {
                Ok((u, report)) => vec![distance(g, &u, &inst.base), report.iterations as f64],
                Err(_) => vec![f64::NAN; 2],
            },
            Err(_) => vec![f64::NAN; 2],
        };
        Trial::Tested { values, inputs: inst.inputs, rejected }
    })
}

/// Two solves for the same target from independent perturbed starts must
/// agree: coordinate by coordinate for hyperbolic, modulo `1` for Euclidean.
pub fn certify_start_independence(
    name: &str,
    t: &Triangulation,
    s: &MeshSampling,
    opts: &SolverOptions,
    tolerance: f64,
) -> CertificateReport {
    let g = s.geometry;
    let checks = [Check::at_most("distance between the two solutions", tolerance)];
    run_sampled(name, Some(g), &s.spec(), &checks, &fields(t), |_, rng| {
        let (inst, mut rejected) = draw_instance(t, s, rng);
        let Some(inst) = inst else { return Trial::Skipped { rejected } };
        let (first, r1) = perturbed_start(g, &inst, s.perturbation, rng);
        let (second, r2) = perturbed_start(g, &inst, s.perturbation, rng);
        rejected += r1 + r2;
        let (Some(first), Some(second)) = (first, second) else { return Trial::Skipped { rejected } };
        let value = (|| {
            let target = TargetAngles(inst.wt.cone_angles(g, &inst.base).ok()?.0);
            let (a, _) = solve(g, &inst.wt, &target, &first, opts).ok()?;
            let (b, _) = solve(g, &inst.wt, &target, &second, opts).ok()?;
            Some(distance(g, &a, &b))
        })()
        .unwrap_or(f64::NAN);
        Trial::Tested { values: vec![value], inputs: inst.inputs, rejected }
    })
}

/// Euclidean cone angles are unchanged by `u -> u + c 1` for every `c` in
/// [`GAUGE_SHIFTS`].
pub fn certify_scaling_gauge(name: &str, t: &Triangulation, s: &MeshSampling, tolerance: f64) -> CertificateReport {
    let g = Geometry::Euclidean;
    let s = MeshSampling { geometry: g, ..*s };
    let checks = [Check::at_most("max |a(u + c1) - a(u)|", tolerance)];
    run_sampled(name, Some(g), &s.spec(), &checks, &fields(t), |_, rng| {
        let (inst, rejected) = draw_instance(t, &s, rng);
        let Some(inst) = inst else { return Trial::Skipped { rejected } };
        let value = (|| {
            let a = inst.wt.cone_angles(g, &inst.base).ok()?;
            let mut worst: f64 = 0.0;
            for c in GAUGE_SHIFTS {
                let b = inst.wt.cone_angles(g, &inst.base.shifted(c)).ok()?;
                worst = a.0.iter().zip(&b.0).fold(worst, |m, (x, y)| m.max((x - y).abs()));
            }
            Some(worst)
        })()
        .unwrap_or(f64::NAN);
        Trial::Tested { values: vec![value], inputs: inst.inputs, rejected }
    })
}
