//! Randomized search for two admissible log-radius points whose midpoint is
//! not admissible, showing the Euclidean domain is not convex.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{
    euclidean_inequality2, triangle_margin, violated_triangle_inequality, Geometry, LogRadiusTriple, TriangleWeights,
};

/// Coordinates are drawn uniformly from `[-SEARCH_BOX, SEARCH_BOX]`.
pub const SEARCH_BOX: f64 = 3.0;
const CHUNK: usize = 10_000;
const REFINE_STEPS: usize = 400;
const REFINE_STEP: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonconvexityWitness {
    pub u: [f64; 3],
    pub u_prime: [f64; 3],
    pub midpoint: [f64; 3],
    /// Six-term expression at `u`, `u_prime`, `midpoint`.
    pub inequality2: [f64; 3],
    /// Relative triangle-inequality slack at the three points.
    pub margins: [f64; 3],
    /// Opposite-vertex index of the violated inequality at the midpoint.
    pub violated: usize,
    pub violated_label: String,
    /// Direct re-evaluation: `u`, `u_prime` admissible and midpoint not.
    pub reverified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonconvexityReport {
    pub weights: [f64; 3],
    pub budget: usize,
    pub seed: u64,
    /// Pairs drawn up to and including the first hit (the whole budget on
    /// absence).
    pub samples_used: usize,
    pub witness: Option<NonconvexityWitness>,
}

impl NonconvexityReport {
    pub fn found(&self) -> bool {
        self.witness.is_some()
    }
}

impl std::fmt::Display for NonconvexityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.witness {
            Some(w) => {
                writeln!(f, "non-convexity witness for I = {:?} after {} pairs", self.weights, self.samples_used)?;
                writeln!(f, "  u        = {:?}  (ineq2 {:.6e})", w.u, w.inequality2[0])?;
                writeln!(f, "  u'       = {:?}  (ineq2 {:.6e})", w.u_prime, w.inequality2[1])?;
                writeln!(f, "  midpoint = {:?}  (ineq2 {:.6e})", w.midpoint, w.inequality2[2])?;
                writeln!(f, "  midpoint violates {}; reverified: {}", w.violated_label, w.reverified)
            }
            None => writeln!(
                f,
                "no non-convexity witness for I = {:?} in {} pairs (absence is not a proof)",
                self.weights, self.budget
            ),
        }
    }
}

fn margin_at(w: &TriangleWeights, u: &LogRadiusTriple) -> f64 {
    let g = Geometry::Euclidean;
    match g.r_from_u(u).and_then(|r| g.lengths_of_triangle(&r, w)) {
        Ok(l) => triangle_margin(&l),
        Err(_) => f64::NEG_INFINITY,
    }
}

fn midpoint(a: &LogRadiusTriple, b: &LogRadiusTriple) -> LogRadiusTriple {
    LogRadiusTriple(std::array::from_fn(|i| 0.5 * (a[i] + b[i])))
}

/// How robustly `(a, b)` witnesses non-convexity: positive iff both ends are
/// admissible and the midpoint is not.
fn score(w: &TriangleWeights, a: &LogRadiusTriple, b: &LogRadiusTriple) -> f64 {
    margin_at(w, a).min(margin_at(w, b)).min(-margin_at(w, &midpoint(a, b)))
}

fn draw(rng: &mut ChaCha8Rng) -> LogRadiusTriple {
    LogRadiusTriple(std::array::from_fn(|_| rng.gen_range(-SEARCH_BOX..=SEARCH_BOX)))
}

/// Hill-climbs the score so the witness is not within rounding of the
/// boundary.
fn refine(w: &TriangleWeights, mut a: LogRadiusTriple, mut b: LogRadiusTriple, rng: &mut ChaCha8Rng) -> (LogRadiusTriple, LogRadiusTriple) {
    let mut best = score(w, &a, &b);
    for _ in 0..REFINE_STEPS {
        let mut jitter = |p: &LogRadiusTriple| LogRadiusTriple(p.0.map(|x| x + rng.gen_range(-REFINE_STEP..REFINE_STEP)));
        let (na, nb) = (jitter(&a), jitter(&b));
        let s = score(w, &na, &nb);
        if s > best {
            (a, b, best) = (na, nb, s);
        }
    }
    (a, b)
}

fn build_witness(w: &TriangleWeights, a: LogRadiusTriple, b: LogRadiusTriple) -> NonconvexityWitness {
    let g = Geometry::Euclidean;
    let mid = midpoint(&a, &b);
    let admissible = |u: &LogRadiusTriple| g.r_from_u(u).map(|r| g.is_admissible(&r, w)).unwrap_or(false);
    let violated = g
        .r_from_u(&mid)
        .and_then(|r| g.lengths_of_triangle(&r, w))
        .ok()
        .and_then(|l| violated_triangle_inequality(&l))
        .unwrap_or(usize::MAX);
    let violated_label = match violated {
        0 => "l_jk < l_ki + l_ij",
        1 => "l_ki < l_ij + l_jk",
        2 => "l_ij < l_jk + l_ki",
        _ => "none",
    }
    .to_string();
    NonconvexityWitness {
        u: a.0,
        u_prime: b.0,
        midpoint: mid.0,
        inequality2: [euclidean_inequality2(&a, w), euclidean_inequality2(&b, w), euclidean_inequality2(&mid, w)],
        margins: [margin_at(w, &a), margin_at(w, &b), margin_at(w, &mid)],
        violated,
        violated_label,
        reverified: admissible(&a) && admissible(&b) && !admissible(&mid) && violated < 3,
    }
}

/// Searches up to `budget` random pairs in `[-3, 3]^3` for a Euclidean
/// non-convexity witness. Chunks of pairs use their own streams and the
/// first hit in chunk order wins, so the result is deterministic.
pub fn find_nonconvexity_witness(weights: &TriangleWeights, budget: usize, seed: u64) -> NonconvexityReport {
    let chunks = budget.div_ceil(CHUNK);
    let hit = (0..chunks).into_par_iter().find_map_first(|chunk| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk as u64);
        let size = CHUNK.min(budget - chunk * CHUNK);
        (0..size).find_map(|k| {
            let (a, b) = (draw(&mut rng), draw(&mut rng));
            (score(weights, &a, &b) > 0.0).then(|| (chunk * CHUNK + k + 1, a, b, rng.clone()))
        })
    });
    match hit {
        Some((used, a, b, mut rng)) => {
            let (a, b) = refine(weights, a, b, &mut rng);
            NonconvexityReport {
                weights: weights.0,
                budget,
                seed,
                samples_used: used,
                witness: Some(build_witness(weights, a, b)),
            }
        }
        None => NonconvexityReport { weights: weights.0, budget, seed, samples_used: budget, witness: None },
    }
}
