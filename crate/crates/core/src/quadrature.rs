//! Adaptive composite Gauss–Legendre quadrature.

use std::sync::OnceLock;

pub const GAUSS_POINTS: usize = 16;
/// Default bound on the estimated absolute error of an adaptive integral.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
const MAX_DEPTH: u32 = 40;

/// Nodes and weights on `[-1, 1]`, from Newton's method on `P_16`.
pub fn gauss_legendre() -> &'static ([f64; GAUSS_POINTS], [f64; GAUSS_POINTS]) {
    static RULE: OnceLock<([f64; GAUSS_POINTS], [f64; GAUSS_POINTS])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GAUSS_POINTS;
        let mut nodes = [0.0; GAUSS_POINTS];
        let mut weights = [0.0; GAUSS_POINTS];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn panel<F, E>(f: &mut F, a: f64, b: f64) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let (nodes, weights) = gauss_legendre();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        sum += w * f(mid + half * x)?;
    }
    Ok(sum * half)
}

/// Integrates `f` over `[a, b]`, halving panels until the difference between
/// a panel and its two halves is below the panel's share of `tol`. Errors
/// from `f` abort the integration.
pub fn integrate<F, E>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    if a == b {
        return Ok(0.0);
    }
    let whole = panel(&mut f, a, b)?;
    refine(&mut f, a, b, whole, tol, 0)
}

fn refine<F, E>(f: &mut F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let mid = 0.5 * (a + b);
    let left = panel(f, a, mid)?;
    let right = panel(f, mid, b)?;
    let split = left + right;
    if (split - whole).abs() <= tol || depth >= MAX_DEPTH {
        return Ok(split);
    }
    Ok(refine(f, a, mid, left, 0.5 * tol, depth + 1)? + refine(f, mid, b, right, 0.5 * tol, depth + 1)?)
}
