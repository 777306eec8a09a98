use circpack::mesh::{EdgeKey, LogRadiusVector, MeshError, Triangulation, ValidationIssue, WeightedTriangulation};
use circpack::verify::{certify_hessian_fd, HessianSampling};
use circpack::{Geometry, GeometryError};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

// 3 arccos(cosh 2 / (cosh 2 + 1)), evaluated to 30 digits
const UNIT_HYPERBOLIC_CONE: f64 = 1.979_899_212_647_398_1;

fn solids() -> Vec<(&'static str, Triangulation)> {
    vec![
        ("tetrahedron", Triangulation::tetrahedron()),
        ("octahedron", Triangulation::octahedron()),
        ("icosahedron", Triangulation::icosahedron()),
    ]
}

/// Weights in `[0, 2]` per edge.
fn random_weights(t: &Triangulation, rng: &mut ChaCha8Rng) -> WeightedTriangulation {
    let weights: Vec<_> = t.edges().into_iter().map(|e| (e.0, e.1, rng.gen_range(0.0..2.0))).collect();
    WeightedTriangulation::new(t.clone(), weights).unwrap()
}

/// Log-radii of `exp(U(-0.3, 0.3))` radii, redrawn until admissible.
fn random_u(g: Geometry, wt: &WeightedTriangulation, rng: &mut ChaCha8Rng) -> LogRadiusVector {
    loop {
        let radii: Vec<f64> = (0..wt.vertex_count()).map(|_| rng.gen_range(-0.3f64..0.3).exp()).collect();
        let u = LogRadiusVector::from_radii(g, &radii).unwrap();
        if wt.first_inadmissible_face(g, &u).is_none() {
            return u;
        }
    }
}

#[test]
fn platonic_solids_validate() {
    for (name, t) in solids() {
        let report = t.validate();
        assert!(report.is_valid(), "{name}: {:?}", report.issues);
        assert_eq!(report.euler_characteristic, 2, "{name}");
        assert_eq!(report.vertices as i64 - report.edges as i64 + report.faces as i64, 2);
    }
    let t = Triangulation::octahedron();
    assert_eq!((t.vertex_count, t.edges().len(), t.faces.len()), (6, 12, 8));
}

#[test]
fn open_tetrahedron_names_its_boundary_edges() {
    let mut t = Triangulation::tetrahedron();
    let removed = t.faces.pop().unwrap();
    let report = t.validate();
    assert!(!report.is_valid());
    let mut expected: Vec<EdgeKey> = circpack::mesh::face_edges(removed).to_vec();
    expected.sort();
    assert_eq!(report.bad_edges(), expected);
    assert!(report.issues.iter().any(|i| matches!(i, ValidationIssue::EdgeDegree { faces, .. } if faces.len() == 1)));
}

#[test]
fn euclidean_angle_sum_is_pi_per_face() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (name, t) in solids() {
        for _ in 0..20 {
            let wt = random_weights(&t, &mut rng);
            let u = random_u(Geometry::Euclidean, &wt, &mut rng);
            let a = wt.cone_angles(Geometry::Euclidean, &u).unwrap();
            assert!((a.sum() - PI * wt.face_count() as f64).abs() <= 1e-9, "{name}");
            let h = wt.cone_angles(Geometry::Hyperbolic, &random_u(Geometry::Hyperbolic, &wt, &mut rng)).unwrap();
            assert!(h.sum() < PI * wt.face_count() as f64);
        }
    }
}

#[test]
fn unit_hyperbolic_tetrahedron() {
    let g = Geometry::Hyperbolic;
    let wt = WeightedTriangulation::uniform(Triangulation::tetrahedron(), 1.0).unwrap();
    let u = LogRadiusVector::from_radii(g, &[1.0; 4]).unwrap();
    for a in wt.cone_angles(g, &u).unwrap().0 {
        assert!((a - UNIT_HYPERBOLIC_CONE).abs() < 1e-13, "{a}");
    }
    let h = wt.global_hessian(g, &u).unwrap().to_dense();
    assert!(SymmetricEigen::new(h).eigenvalues.max() < 0.0);
}

#[test]
fn euclidean_kernel_is_exactly_the_constants() {
    let g = Geometry::Euclidean;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (name, t) in solids() {
        for _ in 0..10 {
            let wt = random_weights(&t, &mut rng);
            let u = random_u(g, &wt, &mut rng);
            let h = wt.global_hessian(g, &u).unwrap();
            let ones = vec![1.0; wt.vertex_count()];
            assert!(h.mul_vec(&ones).iter().all(|x| x.abs() <= 1e-9), "{name}");
            let ev = SymmetricEigen::new(h.to_dense()).eigenvalues;
            assert_eq!(ev.iter().filter(|x| x.abs() <= 1e-8).count(), 1, "{name}: {ev}");
            assert!(ev.max() <= 1e-8, "{name}: {ev}");
        }
    }
}

#[test]
fn hessian_matches_differenced_cone_angles() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (name, t) in solids().into_iter().take(2) {
        let wt = random_weights(&t, &mut rng);
        for g in [Geometry::Euclidean, Geometry::Hyperbolic] {
            let sampling = HessianSampling { geometry: g, radius_range: (0.5, 2.0), count: 100, seed: 9 };
            let report = certify_hessian_fd(name, &wt, &sampling);
            assert!(report.passed, "{report}");
        }
    }
}

#[test]
fn disjoint_union_assembles_block_diagonally() {
    let g = Geometry::Euclidean;
    let a = Triangulation::tetrahedron();
    let shifted: Vec<[usize; 3]> = a.faces.iter().map(|f| f.map(|v| v + 4)).collect();
    let union = Triangulation::new(8, a.faces.iter().copied().chain(shifted).collect());
    assert!(union.validate().issues.iter().any(|i| matches!(i, ValidationIssue::Disconnected { .. })));
    let weight = |e: &EdgeKey| 0.5 + 0.1 * (e.0 % 4 + e.1 % 4) as f64;
    let edges = union.edges();
    assert!(matches!(
        WeightedTriangulation::new(union.clone(), edges.iter().map(|e| (e.0, e.1, weight(e)))),
        Err(MeshError::Topology(_))
    ));
    let whole =
        WeightedTriangulation::with_unchecked_topology(union, edges.iter().map(|e| (e.0, e.1, weight(e)))).unwrap();
    let part = WeightedTriangulation::new(a.clone(), a.edges().iter().map(|e| (e.0, e.1, weight(e)))).unwrap();

    let (u1, u2) = (vec![0.1, -0.2, 0.3, 0.0], vec![-0.4, 0.2, 0.1, 0.25]);
    let u = LogRadiusVector(u1.iter().chain(&u2).copied().collect());
    let h = whole.global_hessian(g, &u).unwrap().to_dense();
    let h1 = part.global_hessian(g, &LogRadiusVector(u1)).unwrap().to_dense();
    let h2 = part.global_hessian(g, &LogRadiusVector(u2)).unwrap().to_dense();
    let mut expected = DMatrix::zeros(8, 8);
    expected.view_mut((0, 0), (4, 4)).copy_from(&h1);
    expected.view_mut((4, 4), (4, 4)).copy_from(&h2);
    assert!((h - expected).amax() <= 1e-14);
}

#[test]
fn relabeling_permutes_angles_and_conjugates_hessian() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (name, t) in solids() {
        let n = t.vertex_count;
        let wt = random_weights(&t, &mut rng);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let moved = wt.relabeled(&perm);
        for g in [Geometry::Euclidean, Geometry::Hyperbolic] {
            let u = random_u(g, &wt, &mut rng);
            let mut v = vec![0.0; n];
            for i in 0..n {
                v[perm[i]] = u.0[i];
            }
            let v = LogRadiusVector(v);
            let (a, b) = (wt.cone_angles(g, &u).unwrap(), moved.cone_angles(g, &v).unwrap());
            let (h, k) = (wt.global_hessian(g, &u).unwrap(), moved.global_hessian(g, &v).unwrap());
            for i in 0..n {
                assert!((a.0[i] - b.0[perm[i]]).abs() <= 1e-14, "{name}");
                for j in 0..n {
                    assert!((h.get(i, j) - k.get(perm[i], perm[j])).abs() <= 1e-13, "{name}");
                }
            }
        }
    }
}

#[test]
fn first_inadmissible_face_is_named_in_face_order() {
    let g = Geometry::Euclidean;
    let t = Triangulation::tetrahedron();
    // one huge weight on edge 23 breaks faces 2 = [0, 2, 3] and 3 = [1, 2, 3]
    let w = t.edges().into_iter().map(|e| (e.0, e.1, if e == EdgeKey(2, 3) { 10.0 } else { 0.5 }));
    let wt = WeightedTriangulation::new(t, w).unwrap();
    let u = LogRadiusVector::constant(4, 0.0);
    let err = wt.first_inadmissible_face(g, &u).expect("inadmissible");
    let MeshError::Face { face: 2, vertices: [0, 2, 3], source } = &err else { panic!("{err}") };
    assert!(matches!(source, GeometryError::Inadmissible { .. }), "{source}");
    assert!(matches!(wt.cone_angles(g, &u), Err(MeshError::Face { face: 2, .. })));
    assert!(matches!(wt.global_hessian(g, &u), Err(MeshError::Face { face: 2, .. })));
}

#[test]
fn energy_vanishes_at_base_and_differentiates_to_cone_angles() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let t = Triangulation::tetrahedron();
    for g in [Geometry::Euclidean, Geometry::Hyperbolic] {
        let wt = random_weights(&t, &mut rng);
        let base = random_u(g, &wt, &mut rng);
        let u = random_u(g, &wt, &mut rng);
        assert_eq!(wt.total_energy(g, &base, &base).unwrap(), 0.0);
        let a = wt.cone_angles(g, &u).unwrap();
        let h = 1e-4;
        for i in 0..4 {
            let (mut up, mut dn) = (u.clone(), u.clone());
            up.0[i] += h;
            dn.0[i] -= h;
            let d = (wt.total_energy(g, &up, &base).unwrap() - wt.total_energy(g, &dn, &base).unwrap()) / (2.0 * h);
            assert!((d - a.0[i]).abs() <= 1e-6, "{g} vertex {i}: {d} vs {}", a.0[i]);
        }
    }
}

#[test]
fn euclidean_energy_grows_linearly_along_constants() {
    let g = Geometry::Euclidean;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for (name, t) in solids() {
        let wt = random_weights(&t, &mut rng);
        let base = random_u(g, &wt, &mut rng);
        let u = random_u(g, &wt, &mut rng);
        let w0 = wt.total_energy(g, &u, &base).unwrap();
        for s in [-0.7, 0.25, 1.5] {
            let w1 = wt.total_energy(g, &u.shifted(s), &base).unwrap();
            let expected = s * PI * wt.face_count() as f64;
            assert!((w1 - w0 - expected).abs() <= 1e-8, "{name} t={s}: {}", w1 - w0 - expected);
        }
    }
}
