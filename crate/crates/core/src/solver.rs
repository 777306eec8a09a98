//! Damped Newton iteration for prescribed cone angles.
//!
//! The cone-angle map is the gradient of the concave total energy, so its
//! Jacobian `H` is negative semidefinite (Euclidean, kernel spanned by the
//! all-ones vector) or negative definite (hyperbolic). Euclidean solves pin
//! one coordinate and work on the reduced system. Steps are halved until
//! every face stays admissible and the max-norm residual drops. Convergence
//! is local only; the start point is the caller's responsibility.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Geometry;
use crate::mesh::{ConeAngles, LogRadiusVector, MeshError, WeightedTriangulation};

/// Prescribed cone angle `a*_i` per vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetAngles(pub Vec<f64>);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Stop once `max_i |a_i - a*_i|` is at most this.
    pub residual_tolerance: f64,
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
    /// Allowed `|sum a* - pi |F||` for Euclidean targets.
    pub feasibility_tolerance: f64,
    /// Euclidean gauge vertex; `None` pins the last vertex.
    pub pin: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            residual_tolerance: 1e-10,
            backtrack_factor: 0.5,
            max_backtracks: 60,
            feasibility_tolerance: 1e-8,
            pin: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// Residual after the accepted step.
    pub residual: f64,
    /// Max-norm of the accepted step.
    pub step_norm: f64,
    /// Fraction of the full Newton step taken.
    pub damping: f64,
    pub backtracks: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
    StepCollapse,
    NotNegativeDefinite,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::Converged => "converged",
            Termination::MaxIterations => "iteration limit reached",
            Termination::StepCollapse => "backtracking exhausted",
            Termination::NotNegativeDefinite => "reduced Hessian is not negative definite",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    pub initial_residual: f64,
    pub residual: f64,
    pub trace: Vec<IterationRecord>,
    pub termination: Termination,
    pub pin: Option<usize>,
}

impl SolveReport {
    /// `r_{n+1} / r_n^2` over consecutive accepted steps.
    pub fn quadratic_ratios(&self) -> Vec<f64> {
        let residuals: Vec<f64> =
            std::iter::once(self.initial_residual).chain(self.trace.iter().map(|t| t.residual)).collect();
        residuals.windows(2).filter(|w| w[0] > 0.0).map(|w| w[1] / (w[0] * w[0])).collect()
    }
}

/// Outcome of [`feasibility_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    pub feasible: bool,
    pub angle_sum: f64,
    /// `pi |F|`.
    pub face_bound: f64,
    /// `angle_sum - face_bound`.
    pub deficit: f64,
    pub issues: Vec<String>,
}

impl fmt::Display for Feasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "sum of targets {:.17e}, pi|F| = {:.17e}, deficit {:.3e}",
            self.angle_sum, self.face_bound, self.deficit
        )?;
        for issue in &self.issues {
            write!(f, "; {issue}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("infeasible target: {0}")]
    Infeasible(Feasibility),
    #[error("start point rejected: {0}")]
    Start(#[from] MeshError),
    #[error("no convergence: {}, residual {:.3e} after {} iterations", .report.termination, .report.residual, .report.iterations)]
    NotConverged { best: LogRadiusVector, report: SolveReport },
}

impl SolveError {
    pub fn report(&self) -> Option<&SolveReport> {
        match self {
            SolveError::NotConverged { report, .. } => Some(report),
            _ => None,
        }
    }
}

pub fn feasibility_check(g: Geometry, wt: &WeightedTriangulation, target: &TargetAngles, tol: f64) -> Feasibility {
    let mut issues = Vec::new();
    if target.0.len() != wt.vertex_count() {
        issues.push(format!("{} targets for {} vertices", target.0.len(), wt.vertex_count()));
    }
    for (v, a) in target.0.iter().enumerate() {
        if !(a.is_finite() && *a > 0.0) {
            issues.push(format!("target at vertex {v} is {a}, expected a positive angle"));
        }
    }
    let angle_sum = ConeAngles(target.0.clone()).sum();
    let face_bound = PI * wt.face_count() as f64;
    let deficit = angle_sum - face_bound;
    match g {
        Geometry::Euclidean if deficit.abs() > tol => {
            issues.push(format!("Euclidean targets must sum to pi|F| within {tol:e}"))
        }
        Geometry::Hyperbolic if !(deficit < 0.0) => issues.push("hyperbolic targets must sum to less than pi|F|".into()),
        _ => {}
    }
    Feasibility { feasible: issues.is_empty(), angle_sum, face_bound, deficit, issues }
}

/// `u = 0` (Euclidean) or all radii 1 (hyperbolic).
pub fn default_start(g: Geometry, vertex_count: usize) -> LogRadiusVector {
    let u = g.u_from_r_scalar(1.0).expect("radius 1 is valid");
    LogRadiusVector::constant(vertex_count, u)
}

fn residual(a: &ConeAngles, target: &TargetAngles) -> f64 {
    a.0.iter().zip(&target.0).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Newton direction `delta` with `H delta = a* - a`; the pinned entry is 0.
fn newton_direction(h: DMatrix<f64>, rhs: DVector<f64>, pin: Option<usize>) -> Option<DVector<f64>> {
    let (neg_h, rhs) = match pin {
        Some(p) => (-h.remove_row(p).remove_column(p), rhs.remove_row(p)),
        None => (-h, rhs),
    };
    let delta = neg_h.cholesky()?.solve(&(-rhs));
    Some(match pin {
        Some(p) => delta.insert_row(p, 0.0),
        None => delta,
    })
}

/// Solves `cone_angles(u) = target` from `u0`.
pub fn solve(
    g: Geometry,
    wt: &WeightedTriangulation,
    target: &TargetAngles,
    u0: &LogRadiusVector,
    opts: &SolverOptions,
) -> Result<(LogRadiusVector, SolveReport), SolveError> {
    let feasibility = feasibility_check(g, wt, target, opts.feasibility_tolerance);
    if !feasibility.feasible {
        return Err(SolveError::Infeasible(feasibility));
    }
    let n = wt.vertex_count();
    let pin = match g {
        Geometry::Euclidean => Some(opts.pin.unwrap_or(n - 1).min(n - 1)),
        Geometry::Hyperbolic => None,
    };
    let mut u = u0.clone();
    let mut angles = wt.cone_angles(g, &u)?;
    let mut res = residual(&angles, target);
    let mut report = SolveReport {
        converged: false,
        iterations: 0,
        initial_residual: res,
        residual: res,
        trace: Vec::new(),
        termination: Termination::MaxIterations,
        pin,
    };
    loop {
        if res <= opts.residual_tolerance {
            report.converged = true;
            report.termination = Termination::Converged;
            return Ok((u, report));
        }
        if report.iterations >= opts.max_iterations {
            report.termination = Termination::MaxIterations;
            return Err(SolveError::NotConverged { best: u, report });
        }
        let h = wt.global_hessian(g, &u)?.to_dense();
        let rhs = DVector::from_iterator(n, target.0.iter().zip(&angles.0).map(|(t, a)| t - a));
        let Some(delta) = newton_direction(h, rhs, pin) else {
            report.termination = Termination::NotNegativeDefinite;
            return Err(SolveError::NotConverged { best: u, report });
        };
        let mut step = 1.0;
        let mut accepted = None;
        for backtracks in 0..=opts.max_backtracks {
            let trial = LogRadiusVector(u.0.iter().zip(delta.iter()).map(|(x, d)| x + step * d).collect());
            if let Ok(a) = wt.cone_angles(g, &trial) {
                let r = residual(&a, target);
                if r < res {
                    accepted = Some((trial, a, r, backtracks));
                    break;
                }
            }
            step *= opts.backtrack_factor;
        }
        let Some((trial, a, r, backtracks)) = accepted else {
            report.termination = Termination::StepCollapse;
            return Err(SolveError::NotConverged { best: u, report });
        };
        report.trace.push(IterationRecord { residual: r, step_norm: step * delta.amax(), damping: step, backtracks });
        report.iterations += 1;
        report.residual = r;
        u = trial;
        angles = a;
        res = r;
    }
}
