use circpack::mesh::{LogRadiusVector, Triangulation, WeightedTriangulation};
use circpack::solver::{default_start, solve, SolveError, SolverOptions, TargetAngles, Termination};
use circpack::Geometry;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Random weights in `[0, 2]` and an admissible `u_true` near the unit
/// packing, with `a* = cone_angles(u_true)`.
fn instance(
    g: Geometry,
    t: &Triangulation,
    rng: &mut ChaCha8Rng,
) -> (WeightedTriangulation, LogRadiusVector, TargetAngles) {
    let weights: Vec<_> = t.edges().into_iter().map(|e| (e.0, e.1, rng.gen_range(0.0..2.0))).collect();
    let wt = WeightedTriangulation::new(t.clone(), weights).unwrap();
    loop {
        let radii: Vec<f64> = (0..t.vertex_count).map(|_| rng.gen_range(-0.3f64..0.3).exp()).collect();
        let u = LogRadiusVector::from_radii(g, &radii).unwrap();
        if let Ok(a) = wt.cone_angles(g, &u) {
            return (wt, u, TargetAngles(a.0));
        }
    }
}

fn perturbed(u: &LogRadiusVector, size: f64, rng: &mut ChaCha8Rng) -> LogRadiusVector {
    LogRadiusVector(u.0.iter().map(|x| x + rng.gen_range(-size..size)).collect())
}

fn max_diff(a: &LogRadiusVector, b: &LogRadiusVector, shift: f64) -> f64 {
    a.0.iter().zip(&b.0).map(|(x, y)| (x - y - shift).abs()).fold(0.0, f64::max)
}

#[test]
fn symmetric_tetrahedron_reaches_equal_radii() {
    let wt = WeightedTriangulation::uniform(Triangulation::tetrahedron(), 1.0).unwrap();
    let u0 = LogRadiusVector(vec![0.3, -0.1, 0.2, 0.0]);
    let (u, report) =
        solve(Geometry::Euclidean, &wt, &TargetAngles(vec![PI; 4]), &u0, &SolverOptions::default()).unwrap();
    assert!(report.converged && report.residual <= 1e-10);
    assert_eq!(report.pin, Some(3));
    // the pinned coordinate keeps its start value
    assert_eq!(u.0[3], u0.0[3]);
    assert!(u.0.iter().all(|x| x.abs() < 1e-9), "{:?}", u.0);
}

#[test]
fn octahedron_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let t = Triangulation::octahedron();
    for g in [Geometry::Euclidean, Geometry::Hyperbolic] {
        for _ in 0..10 {
            let (wt, u_true, target) = instance(g, &t, &mut rng);
            let u0 = perturbed(&u_true, 0.05, &mut rng);
            let (u, report) = solve(g, &wt, &target, &u0, &SolverOptions::default()).unwrap();
            let shift = match g {
                Geometry::Euclidean => u.0[5] - u_true.0[5],
                Geometry::Hyperbolic => 0.0,
            };
            assert!(max_diff(&u, &u_true, shift) < 1e-8, "{g}: {report:?}");
        }
    }
}

#[test]
fn euclidean_solutions_shift_with_the_start() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let t = Triangulation::icosahedron();
    let g = Geometry::Euclidean;
    for _ in 0..5 {
        let (wt, u_true, target) = instance(g, &t, &mut rng);
        let u0 = perturbed(&u_true, 0.05, &mut rng);
        let (a, _) = solve(g, &wt, &target, &u0, &SolverOptions::default()).unwrap();
        for c in [-1.0, 0.5, 3.0] {
            let (b, _) = solve(g, &wt, &target, &u0.shifted(c), &SolverOptions::default()).unwrap();
            assert!(max_diff(&b, &a, c) <= 1e-9, "c = {c}");
        }
    }
}

#[test]
fn residual_decreases_and_tail_is_quadratic() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let t = Triangulation::icosahedron();
    let mut worst_constant: f64 = 0.0;
    let (mut solved, mut tail_steps) = (0, 0);
    for g in [Geometry::Euclidean, Geometry::Hyperbolic] {
        for _ in 0..10 {
            let (wt, u_true, target) = instance(g, &t, &mut rng);
            let u0 = perturbed(&u_true, 0.2, &mut rng);
            let opts = SolverOptions { residual_tolerance: 1e-13, ..SolverOptions::default() };
            let Ok((_, report)) = solve(g, &wt, &target, &u0, &opts) else { continue };
            solved += 1;
            assert_eq!(report.trace.len(), report.iterations);
            let mut prev = report.initial_residual;
            for rec in &report.trace {
                assert!(rec.residual < prev);
                assert!(rec.damping > 0.0 && rec.damping <= 1.0);
                prev = rec.residual;
            }
            let residuals: Vec<f64> =
                std::iter::once(report.initial_residual).chain(report.trace.iter().map(|r| r.residual)).collect();
            for (pair, ratio) in residuals.windows(2).zip(report.quadratic_ratios()) {
                // residuals near 1e-15 are rounding noise, not Newton progress
                if pair[0] < 1e-4 && pair[1] > 1e-13 {
                    worst_constant = worst_constant.max(ratio);
                    tail_steps += 1;
                }
            }
        }
    }
    assert!(solved >= 15 && tail_steps >= 10, "{solved} solves, {tail_steps} tail steps");
    assert!(worst_constant < 10.0, "quadratic constant {worst_constant}");
    eprintln!("observed quadratic constant {worst_constant:.3e} over {tail_steps} steps");
}

#[test]
fn infeasible_targets_are_rejected_before_iterating() {
    let wt = WeightedTriangulation::uniform(Triangulation::tetrahedron(), 1.0).unwrap();
    let u0 = default_start(Geometry::Euclidean, 4);
    let target = TargetAngles(vec![PI, PI, PI, PI + 0.1]);
    match solve(Geometry::Euclidean, &wt, &target, &u0, &SolverOptions::default()) {
        Err(SolveError::Infeasible(f)) => assert!((f.deficit - 0.1).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
    let hyper = TargetAngles(vec![PI; 4]);
    let u0 = default_start(Geometry::Hyperbolic, 4);
    assert!(matches!(
        solve(Geometry::Hyperbolic, &wt, &hyper, &u0, &SolverOptions::default()),
        Err(SolveError::Infeasible(_))
    ));
}

#[test]
fn iteration_limit_returns_the_best_iterate() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let (wt, u_true, target) = instance(Geometry::Hyperbolic, &Triangulation::octahedron(), &mut rng);
    let u0 = perturbed(&u_true, 0.1, &mut rng);
    let opts = SolverOptions { max_iterations: 1, ..SolverOptions::default() };
    match solve(Geometry::Hyperbolic, &wt, &target, &u0, &opts) {
        Err(SolveError::NotConverged { best, report }) => {
            assert_eq!(report.termination, Termination::MaxIterations);
            assert_eq!(report.iterations, 1);
            assert!(report.residual < report.initial_residual);
            assert!(wt.first_inadmissible_face(Geometry::Hyperbolic, &best).is_none());
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn inadmissible_start_is_reported() {
    let t = Triangulation::tetrahedron();
    let w = t.edges().into_iter().map(|e| (e.0, e.1, if (e.0, e.1) == (2, 3) { 10.0 } else { 0.5 }));
    let wt = WeightedTriangulation::new(t, w).unwrap();
    let err = solve(
        Geometry::Euclidean,
        &wt,
        &TargetAngles(vec![PI; 4]),
        &default_start(Geometry::Euclidean, 4),
        &SolverOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(err, SolveError::Start(_)), "{err}");
}

#[test]
fn unreachable_target_stops_inside_the_domain() {
    // feasible by angle sum, but one vertex cannot carry almost everything
    let wt = WeightedTriangulation::uniform(Triangulation::tetrahedron(), 1.0).unwrap();
    let target = TargetAngles(vec![0.01, 0.01, 0.01, 4.0 * PI - 0.03]);
    let u0 = default_start(Geometry::Euclidean, 4);
    match solve(Geometry::Euclidean, &wt, &target, &u0, &SolverOptions::default()) {
        Err(SolveError::NotConverged { best, report }) => {
            assert!(!report.converged);
            assert!(report.residual <= report.initial_residual);
            assert!(wt.first_inadmissible_face(Geometry::Euclidean, &best).is_none());
        }
        other => panic!("{other:?}"),
    }
}
