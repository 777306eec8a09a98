//! Analytic derivatives against central differences.

use super::{run_sampled, CertificateReport, Check, SampleSpec, Trial};
use crate::geometry::{Geometry, LogRadiusTriple, TriangleWeights};
use crate::mesh::{LogRadiusVector, WeightedTriangulation};

/// Step in `u` for both certificates.
pub const FD_STEP: f64 = 1e-5;

/// Relative triangle margin below which a step-`FD_STEP` central difference
/// of the angles is itself off by more than `1e-6`: its truncation error
/// grows like the third derivative, which blows up as an angle tends to
/// `pi` or `0`.
pub const FD_MARGIN: f64 = 1e-2;

fn central_difference(g: Geometry, u: &LogRadiusTriple, w: &TriangleWeights, h: f64) -> Option<[[f64; 3]; 3]> {
    let mut d = [[0.0; 3]; 3];
    for q in 0..3 {
        let mut up = *u;
        let mut dn = *u;
        up.0[q] += h;
        dn.0[q] -= h;
        let (a, b) = (g.angles_at(&up, w).ok()?, g.angles_at(&dn, w).ok()?);
        for (p, row) in d.iter_mut().enumerate() {
            row[q] = (a[p] - b[p]) / (2.0 * h);
        }
    }
    Some(d)
}

/// `angle_jacobian` entries against central differences of
/// `u -> angles`, absolute error per entry. Two criteria per sample: the
/// plain step-`FD_STEP` difference, and its Richardson extrapolation with
/// step `FD_STEP / 2`, which cancels the `h^2` truncation term and so stays
/// meaningful next to degenerate triangles. Pair the first with
/// `spec.margin >= FD_MARGIN`.
pub fn certify_jacobian_fd(spec: &SampleSpec) -> CertificateReport {
    let g = spec.geometry;
    let checks = [
        Check::at_most("max |J - central difference|", 1e-6),
        Check::at_most("max |J - Richardson extrapolated difference|", 1e-6),
    ];
    run_sampled("jacobian-fd", Some(g), spec, &checks, &[("radii", 3), ("weights", 3)], |_, rng| {
        let (drawn, rejected) = spec.draw_admissible(rng);
        let Some((r, w)) = drawn else { return Trial::Skipped { rejected } };
        let inputs = r.0.iter().chain(&w.0).copied().collect();
        let values = (|| {
            let j = g.angle_jacobian(&r, &w).ok()?;
            let u = g.u_from_r(&r).ok()?;
            let coarse = central_difference(g, &u, &w, FD_STEP)?;
            let fine = central_difference(g, &u, &w, 0.5 * FD_STEP)?;
            let (mut plain, mut extrapolated): (f64, f64) = (0.0, 0.0);
            for p in 0..3 {
                for q in 0..3 {
                    plain = plain.max((j[(p, q)] - coarse[p][q]).abs());
                    let richardson = (4.0 * fine[p][q] - coarse[p][q]) / 3.0;
                    extrapolated = extrapolated.max((j[(p, q)] - richardson).abs());
                }
            }
            Some(vec![plain, extrapolated])
        })()
        .unwrap_or_else(|| vec![f64::NAN; 2]);
        Trial::Tested { values, inputs, rejected }
    })
}

/// How base points for [`certify_hessian_fd`] are drawn: each vertex radius
/// log-uniform in `radius_range`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessianSampling {
    pub geometry: Geometry,
    pub radius_range: (f64, f64),
    pub count: usize,
    pub seed: u64,
}

/// `global_hessian` against central differences of `cone_angles`.
pub fn certify_hessian_fd(name: &str, wt: &WeightedTriangulation, sampling: &HessianSampling) -> CertificateReport {
    let g = sampling.geometry;
    let n = wt.vertex_count();
    let spec = SampleSpec::new(g, sampling.count, sampling.seed)
        .with_radii(sampling.radius_range.0, sampling.radius_range.1);
    let checks = [Check::at_most("max |H - central difference|", 1e-5)];
    run_sampled(name, Some(g), &spec, &checks, &[("u", n)], |_, rng| {
        let mut rejected = 0;
        for _ in 0..super::MAX_ATTEMPTS {
            let radii: Vec<f64> = (0..n).map(|_| spec.draw_radius(rng)).collect();
            let Ok(u) = LogRadiusVector::from_radii(g, &radii) else {
                rejected += 1;
                continue;
            };
            if wt.first_inadmissible_face(g, &u).is_some() {
                rejected += 1;
                continue;
            }
            let value = hessian_fd_error(g, wt, &u).unwrap_or(f64::NAN);
            return Trial::Tested { values: vec![value], inputs: u.0, rejected };
        }
        Trial::Skipped { rejected }
    })
}

fn hessian_fd_error(g: Geometry, wt: &WeightedTriangulation, u: &LogRadiusVector) -> Option<f64> {
    let h = wt.global_hessian(g, u).ok()?;
    let mut worst: f64 = 0.0;
    for q in 0..u.len() {
        let mut up = u.clone();
        let mut dn = u.clone();
        up.0[q] += FD_STEP;
        dn.0[q] -= FD_STEP;
        let (a, b) = (wt.cone_angles(g, &up).ok()?, wt.cone_angles(g, &dn).ok()?);
        for p in 0..u.len() {
            worst = worst.max((h.get(p, q) - (a.0[p] - b.0[p]) / (2.0 * FD_STEP)).abs());
        }
    }
    Some(worst)
}
