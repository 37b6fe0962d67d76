mod common;

use common::*;
use funkvol::santalo::{santalo_at_radius_from, santalo_infinity, weighted_dual_centroid};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn stationarity_and_positive_hessian(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=3);
        let k = rng.gen_range(n + 2..=10);
        let p = random_polytope(&mut rng, n, k);
        let tol = 1e-9;
        let s = santalo_infinity(&p, tol).unwrap();
        prop_assert!(s.residual <= tol);
        prop_assert!(s.min_hessian_eigenvalue > 0.0);
        let wdc = weighted_dual_centroid(&p, &DVector::from_vec(s.point.clone())).unwrap();
        prop_assert!(wdc.norm() <= 10.0 * tol);
    }

    #[test]
    fn point_is_linearly_equivariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=3);
        let k = rng.gen_range(n + 2..=10);
        let p = random_polytope(&mut rng, n, k);
        let a = random_gl(&mut rng, n);
        let s = DVector::from_vec(santalo_infinity(&p, 1e-11).unwrap().point);
        let t = DVector::from_vec(santalo_infinity(&p.linear_image(&a).unwrap(), 1e-11).unwrap().point);
        prop_assert!((&a * &s - &t).norm() <= 1e-6);
    }

    #[test]
    fn triangles_have_the_centroid(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_polytope(&mut rng, 2, 3);
        let s = santalo_infinity(&p, 1e-11).unwrap();
        let c = p.vertex_centroid();
        prop_assert!((DVector::from_vec(s.point) - c).norm() <= 1e-9);
    }
}

#[test]
fn symmetric_bodies_return_the_origin() {
    for p in [square(), cube(), octahedron(), funkvol::families::regular_polygon(6, 1.0)] {
        let s = santalo_infinity(&p, 1e-10).unwrap();
        assert!(DVector::from_vec(s.point).norm() <= 1e-8);
    }
}

#[test]
fn finite_radius_points_approach_the_limit_monotonically() {
    // The triangle stays at its centroid for every radius; the quadrilateral approaches from afar.
    let grid = [2.0, 5.0, 10.0, 20.0];
    for (p, strict) in [(asymmetric_triangle(), false), (quadrilateral(), true)] {
        let s_inf = DVector::from_vec(santalo_infinity(&p, 1e-10).unwrap().point);
        let mut prev = f64::INFINITY;
        let mut start = s_inf.clone();
        for r in grid {
            let s = santalo_at_radius_from(&p, r, 1e-5, Some(start.clone())).unwrap();
            let x = DVector::from_vec(s.point);
            let d = (&x - &s_inf).norm();
            if strict {
                assert!(d < prev, "R={r}: {d} not below {prev}");
            } else {
                assert!(d <= 1e-5, "R={r}: {d}");
            }
            prev = d;
            start = x;
        }
        assert!(prev <= 1e-2);
    }
}
