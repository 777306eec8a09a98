//! Sampling certificates for the per-triangle identities and inequalities.
//!
//! A certificate draws seeded random triangles, evaluates one or more
//! criteria per sample and reports the worst value of each together with
//! the inputs of a witness sample. Sample `k` draws from its own ChaCha
//! stream, so reports do not depend on thread scheduling.

mod finite_diff;
mod lemmas;
mod rigidity;
mod witness;
mod worked;

use std::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{Geometry, RadiusTriple, TriangleWeights};

pub use finite_diff::{certify_hessian_fd, certify_jacobian_fd, HessianSampling, FD_MARGIN, FD_STEP};
pub use lemmas::{
    certify_closedness, certify_injectivity, certify_inequality2_equivalence, certify_minor_inequalities,
    certify_spectrum, certify_symmetry, euclidean_chain, CLOSEDNESS_RETRIES,
};
pub use rigidity::{
    certify_local_rigidity, certify_scaling_gauge, certify_start_independence, MeshSampling, GAUGE_SHIFTS,
};
pub use witness::{find_nonconvexity_witness, NonconvexityReport, NonconvexityWitness, SEARCH_BOX};
pub use worked::{worked_m_regression, worked_n_regression, WORKED_M, WORKED_M_EIGENVALUES};

/// Attempts per sample before an admissible draw is given up.
pub const MAX_ATTEMPTS: usize = 10_000;

/// Where and how many triangles to draw. Radii are log-uniform and weights
/// uniform on their ranges. `margin` is the relative triangle-inequality
/// slack an admissible draw must exceed (zero: plain admissibility).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub geometry: Geometry,
    pub radius_range: (f64, f64),
    pub weight_range: (f64, f64),
    #[serde(default)]
    pub margin: f64,
    pub count: usize,
    pub seed: u64,
}

impl SampleSpec {
    pub fn new(geometry: Geometry, count: usize, seed: u64) -> Self {
        Self { geometry, radius_range: (0.1, 10.0), weight_range: (0.0, 3.0), margin: 0.0, count, seed }
    }

    pub fn with_radii(mut self, lo: f64, hi: f64) -> Self {
        self.radius_range = (lo, hi);
        self
    }

    pub fn with_weights(mut self, lo: f64, hi: f64) -> Self {
        self.weight_range = (lo, hi);
        self
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn is_valid(&self) -> bool {
        let (r0, r1) = self.radius_range;
        let (w0, w1) = self.weight_range;
        self.count >= 1 && r0 > 0.0 && r0 <= r1 && r1.is_finite() && w0 >= 0.0 && w0 <= w1 && w1.is_finite()
            && (0.0..1.0).contains(&self.margin)
    }

    /// Generator for sample `index`.
    pub fn rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }

    pub fn draw_radius(&self, rng: &mut ChaCha8Rng) -> f64 {
        let (lo, hi) = self.radius_range;
        if lo == hi {
            return lo;
        }
        rng.gen_range(lo.ln()..hi.ln()).exp()
    }

    pub fn draw_weight(&self, rng: &mut ChaCha8Rng) -> f64 {
        let (lo, hi) = self.weight_range;
        if lo == hi {
            return lo;
        }
        rng.gen_range(lo..=hi)
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng) -> (RadiusTriple, TriangleWeights) {
        let r = RadiusTriple(std::array::from_fn(|_| self.draw_radius(rng)));
        let w = TriangleWeights(std::array::from_fn(|_| self.draw_weight(rng)));
        (r, w)
    }

    /// Rejection sampling of an admissible pair; also returns the number
    /// of rejected draws.
    pub fn draw_admissible(&self, rng: &mut ChaCha8Rng) -> (Option<(RadiusTriple, TriangleWeights)>, usize) {
        for rejected in 0..MAX_ATTEMPTS {
            let (r, w) = self.draw(rng);
            if self.geometry.is_admissible_with_margin(&r, &w, self.margin) {
                return (Some((r, w)), rejected);
            }
        }
        (None, MAX_ATTEMPTS)
    }
}

/// Named input values of one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessField {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub sample: usize,
    pub fields: Vec<WitnessField>,
}

/// One criterion: every sample value must be `<= bound` (`< bound` when
/// strict). NaN always violates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub label: String,
    pub bound: f64,
    pub strict: bool,
    pub worst: f64,
    pub violations: usize,
}

impl CriterionResult {
    fn violates(&self, value: f64) -> bool {
        if self.strict {
            !(value < self.bound)
        } else {
            !(value <= self.bound)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub name: String,
    pub geometry: Option<Geometry>,
    pub samples: usize,
    /// Draws rejected while looking for admissible samples.
    pub rejected: usize,
    /// Samples abandoned after exhausting retries.
    pub skipped: usize,
    pub criteria: Vec<CriterionResult>,
    pub passed: bool,
    /// First violating sample, else the sample attaining the worst value of
    /// the first criterion.
    pub witness: Option<Witness>,
}

impl CertificateReport {
    pub fn violations(&self) -> usize {
        self.criteria.iter().map(|c| c.violations).sum()
    }

    pub fn rejection_rate(&self) -> f64 {
        let draws = self.samples + self.skipped + self.rejected;
        if draws == 0 {
            0.0
        } else {
            self.rejected as f64 / draws as f64
        }
    }

    pub fn criterion(&self, label: &str) -> Option<&CriterionResult> {
        self.criteria.iter().find(|c| c.label == label)
    }
}

impl fmt::Display for CertificateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let geometry = self.geometry.map(|g| format!(" [{g}]")).unwrap_or_default();
        writeln!(
            f,
            "{} {}{}: samples {}, rejected {}, skipped {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            geometry,
            self.samples,
            self.rejected,
            self.skipped
        )?;
        for c in &self.criteria {
            writeln!(
                f,
                "  {:<44} worst {:>13.6e} {} {:.1e}  violations {}",
                c.label,
                c.worst,
                if c.strict { "< " } else { "<=" },
                c.bound,
                c.violations
            )?;
        }
        if let Some(w) = &self.witness {
            write!(f, "  witness #{}:", w.sample)?;
            for field in &w.fields {
                write!(f, " {}=[", field.name)?;
                for (k, v) in field.values.iter().enumerate() {
                    write!(f, "{}{v:.17e}", if k == 0 { "" } else { ", " })?;
                }
                write!(f, "]")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

pub(crate) struct Check {
    pub label: &'static str,
    pub bound: f64,
    pub strict: bool,
}

impl Check {
    pub const fn at_most(label: &'static str, bound: f64) -> Self {
        Self { label, bound, strict: false }
    }

    pub const fn below(label: &'static str, bound: f64) -> Self {
        Self { label, bound, strict: true }
    }
}

pub(crate) enum Trial {
    Tested { values: Vec<f64>, inputs: Vec<f64>, rejected: usize },
    Skipped { rejected: usize },
}

/// Runs `trial` on every sample index in parallel and reduces in index
/// order. `inputs` of a trial are split into witness fields of the given
/// names and lengths.
pub(crate) fn run_sampled<F>(
    name: &str,
    geometry: Option<Geometry>,
    spec: &SampleSpec,
    checks: &[Check],
    fields: &[(&str, usize)],
    trial: F,
) -> CertificateReport
where
    F: Fn(usize, &mut ChaCha8Rng) -> Trial + Sync,
{
    let trials: Vec<Trial> = (0..spec.count)
        .into_par_iter()
        .map(|i| {
            let mut rng = spec.rng(i);
            trial(i, &mut rng)
        })
        .collect();
    reduce(name, geometry, checks, fields, trials)
}

pub(crate) fn reduce(
    name: &str,
    geometry: Option<Geometry>,
    checks: &[Check],
    fields: &[(&str, usize)],
    trials: Vec<Trial>,
) -> CertificateReport {
    let mut criteria: Vec<CriterionResult> = checks
        .iter()
        .map(|c| CriterionResult {
            label: c.label.to_string(),
            bound: c.bound,
            strict: c.strict,
            worst: f64::NEG_INFINITY,
            violations: 0,
        })
        .collect();
    let (mut samples, mut rejected, mut skipped) = (0, 0, 0);
    let mut first_violation: Option<(usize, &Vec<f64>)> = None;
    let mut worst_first: Option<(usize, &Vec<f64>)> = None;
    for (index, trial) in trials.iter().enumerate() {
        match trial {
            Trial::Skipped { rejected: r } => {
                rejected += r;
                skipped += 1;
            }
            Trial::Tested { values, inputs, rejected: r } => {
                rejected += r;
                samples += 1;
                for (k, (c, &v)) in criteria.iter_mut().zip(values).enumerate() {
                    if c.violates(v) {
                        c.violations += 1;
                        if first_violation.is_none() {
                            first_violation = Some((index, inputs));
                        }
                    }
                    let is_worse = v.is_nan() && !c.worst.is_nan() || v > c.worst;
                    if is_worse {
                        c.worst = v;
                        if k == 0 {
                            worst_first = Some((index, inputs));
                        }
                    }
                }
            }
        }
    }
    let passed = samples > 0 && criteria.iter().all(|c| c.violations == 0);
    let witness = first_violation.or(worst_first).map(|(sample, inputs)| {
        let mut offset = 0;
        let fields = fields
            .iter()
            .map(|(name, len)| {
                let end = (offset + len).min(inputs.len());
                let values = inputs[offset.min(end)..end].to_vec();
                offset = end;
                WitnessField { name: name.to_string(), values }
            })
            .collect();
        Witness { sample, fields }
    });
    CertificateReport { name: name.to_string(), geometry, samples, rejected, skipped, criteria, passed, witness }
}

/// Max-abs row sum.
pub(crate) fn inf_norm(m: &nalgebra::Matrix3<f64>) -> f64 {
    (0..3).map(|i| (0..3).map(|j| m[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max)
}
