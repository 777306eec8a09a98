use approx::assert_relative_eq;
use circpack::geometry::{satisfies_triangle_inequality, triangle_margin};
use circpack::{Geometry, LengthTriple, RadiusTriple, TriangleWeights};
use nalgebra::{SymmetricEigen, Vector3};
use proptest::prelude::*;
use std::f64::consts::PI;

fn geometry() -> impl Strategy<Value = Geometry> {
    prop_oneof![Just(Geometry::Euclidean), Just(Geometry::Hyperbolic)]
}

fn radii() -> impl Strategy<Value = RadiusTriple> {
    prop::array::uniform3(-2.3f64..2.3).prop_map(|x| RadiusTriple(x.map(f64::exp)))
}

fn weights() -> impl Strategy<Value = TriangleWeights> {
    prop::array::uniform3(0.0f64..3.0).prop_map(TriangleWeights)
}

/// Admissible triangles only; everything else is filtered out.
fn admissible() -> impl Strategy<Value = (Geometry, RadiusTriple, TriangleWeights)> {
    (geometry(), radii(), weights()).prop_filter("admissible", |(g, r, w)| g.is_admissible(r, w))
}

/// `cos alpha_i` from the textbook cosine laws.
fn textbook_cosines(g: Geometry, l: &LengthTriple) -> [f64; 3] {
    std::array::from_fn(|i| {
        let (a, b, c) = (l[i], l[(i + 1) % 3], l[(i + 2) % 3]);
        match g {
            Geometry::Euclidean => (b * b + c * c - a * a) / (2.0 * b * c),
            Geometry::Hyperbolic => (b.cosh() * c.cosh() - a.cosh()) / (b.sinh() * c.sinh()),
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn log_radius_round_trip(g in geometry(), r in 1e-3f64..30.0) {
        let u = g.u_from_r_scalar(r).unwrap();
        prop_assert!(g == Geometry::Euclidean || u < 0.0);
        assert_relative_eq!(g.r_from_u_scalar(u).unwrap(), r, max_relative = 1e-12);
    }

    #[test]
    fn inversive_distance_inverts_edge_length(g in geometry(), a in 0.1f64..5.0, b in 0.1f64..5.0, w in 0.0f64..3.0) {
        let l = g.edge_length(a, b, w).unwrap();
        prop_assert!(l > 0.0);
        assert_relative_eq!(g.edge_length(b, a, w).unwrap(), l, max_relative = 1e-15);
        assert_relative_eq!(g.inversive_distance(a, b, l).unwrap(), w, epsilon = 1e-9, max_relative = 1e-9);
    }

    #[test]
    fn angle_sum_matches_geometry((g, r, w) in admissible()) {
        let a = g.angles_at(&g.u_from_r(&r).unwrap(), &w).unwrap();
        prop_assert!(a.0.iter().all(|x| *x > 0.0 && *x < PI));
        match g {
            Geometry::Euclidean => prop_assert!((a.sum() - PI).abs() < 1e-12),
            Geometry::Hyperbolic => prop_assert!(a.sum() < PI),
        }
    }

    #[test]
    fn angles_agree_with_cosine_law((g, r, w) in admissible()) {
        let l = g.lengths_of_triangle(&r, &w).unwrap();
        prop_assume!(triangle_margin(&l) > 1e-3);
        let a = g.angles(&l).unwrap();
        let cos = textbook_cosines(g, &l);
        for i in 0..3 {
            // arccos loses accuracy near 0 and pi, so compare cosines
            prop_assert!((a[i].cos() - cos[i]).abs() < 1e-10, "{i}: {} vs {}", a[i].cos(), cos[i]);
        }
    }

    #[test]
    fn jacobian_is_symmetric((g, r, w) in admissible()) {
        let j = g.angle_jacobian(&r, &w).unwrap();
        let scale = j.amax();
        prop_assert!((j - j.transpose()).amax() <= 1e-9 * scale);
    }

    #[test]
    fn euclidean_jacobian_kills_constants(r in radii(), w in weights()) {
        let g = Geometry::Euclidean;
        prop_assume!(g.is_admissible(&r, &w));
        let j = g.angle_jacobian(&r, &w).unwrap();
        prop_assert!((j * Vector3::repeat(1.0)).amax() <= 1e-9 * j.amax());
        // negative semidefinite with a one-dimensional kernel
        let ev = SymmetricEigen::new(j).eigenvalues;
        let positive = ev.iter().filter(|x| **x > 1e-9 * j.amax()).count();
        let zero = ev.iter().filter(|x| x.abs() <= 1e-9 * j.amax()).count();
        prop_assert_eq!((positive, zero), (0, 1));
    }

    #[test]
    fn hyperbolic_jacobian_is_negative_definite(r in radii(), w in weights()) {
        let g = Geometry::Hyperbolic;
        prop_assume!(g.is_admissible(&r, &w));
        let j = g.angle_jacobian(&r, &w).unwrap();
        prop_assert!(SymmetricEigen::new(j).eigenvalues.max() < 0.0);
    }

    #[test]
    fn radii_are_recovered_from_lengths((g, r, w) in admissible()) {
        let l = g.lengths_of_triangle(&r, &w).unwrap();
        let back = g.radii_from_lengths(&l, &w).unwrap();
        for i in 0..3 {
            assert_relative_eq!(back[i], r[i], max_relative = 1e-10);
        }
    }

    #[test]
    fn margin_predicate_is_monotone((g, r, w) in admissible(), m in 0.0f64..0.3) {
        let l = g.lengths_of_triangle(&r, &w).unwrap();
        prop_assert_eq!(satisfies_triangle_inequality(&l, m), triangle_margin(&l) > m);
        prop_assert_eq!(g.is_admissible_with_margin(&r, &w, m), triangle_margin(&l) > m);
    }
}

#[test]
fn tangent_weights_are_always_admissible() {
    // weights at most 1 keep every Euclidean triangle non-degenerate
    let g = Geometry::Euclidean;
    for r in [[1e-3, 1.0, 1e3], [1.0, 1.0, 1.0], [5.0, 1e-2, 7.0]] {
        for w in [[0.0, 0.0, 0.0], [1.0, 1.0, 1.0], [0.3, 1.0, 0.0]] {
            assert!(g.is_admissible(&RadiusTriple(r), &TriangleWeights(w)), "{r:?} {w:?}");
        }
    }
}
