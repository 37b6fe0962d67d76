mod common;

use approx::assert_relative_eq;
use common::*;
use funkvol::families::{hanner_ball_volume, hanner_build, HannerSpec};
use funkvol::funk::{ball_volume, funk_ball, funk_distance, ht_volume_of_subset};
use funkvol::geometry::apply_collineation;
use funkvol::{omega, Error};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn volume_increases_with_radius(seed in any::<u64>(), m in 3usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_polygon(&mut rng, m);
        let x = DVector::from_fn(2, |_, _| rng.gen_range(-0.1..0.1));
        prop_assume!(p.is_interior(&x));
        let mut prev = 0.0;
        for r in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
            let v = ball_volume(&p, &x, r, 1e-8).unwrap().value;
            prop_assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn ball_boundary_is_at_funk_distance_r(seed in any::<u64>(), r in 0.1f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_polytope(&mut rng, 3, 8);
        let o = DVector::zeros(3);
        let b = funk_ball(&p, &o, r).unwrap();
        for w in b.vertices() {
            let d = funk_distance(&p, &o, w).unwrap();
            prop_assert!((d - r).abs() <= 1e-9 * r.max(1.0));
        }
    }

    #[test]
    fn projective_invariance(seed in any::<u64>(), which in 0usize..2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = if which == 0 { square() } else { asymmetric_triangle().translate(&v(&[-2.0 / 3.0, -1.0 / 6.0])) };
        let r = rng.gen_range(0.3..2.0);
        let tol = 1e-8;
        let ball = funk_ball(&p, &DVector::zeros(2), r).unwrap();
        let mut m = DMatrix::identity(3, 3);
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] += rng.gen_range(-0.3..0.3);
            }
            m[(2, i)] = rng.gen_range(-0.15..0.15);
            m[(i, 2)] = rng.gen_range(-0.2..0.2);
        }
        let (Ok(gp), Ok(gb)) = (apply_collineation(&p, &m), apply_collineation(&ball, &m)) else {
            return Ok(());
        };
        let direct = ball_volume(&p, &DVector::zeros(2), r, tol).unwrap().value;
        let image = ht_volume_of_subset(&gp, &gb, tol).unwrap().value;
        prop_assert!((direct - image).abs() <= 2.0 * tol, "{} vs {}", direct, image);
    }
}

#[test]
fn duality_in_two_and_three_dimensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (p, tol) in [(pentagon(), 1e-8), (random_polytope(&mut rng, 3, 7), 1e-5)] {
        let o = DVector::zeros(p.dim());
        for r in [0.5, 1.5] {
            let ball = funk_ball(&p, &o, r).unwrap();
            let direct = ball_volume(&p, &o, r, tol).unwrap().value;
            let dual = ht_volume_of_subset(&ball.polar_dual(&o).unwrap(), &p.polar_dual(&o).unwrap(), tol).unwrap().value;
            assert!((direct - dual).abs() <= 2.0 * tol, "n={} R={r}: {direct} vs {dual}", p.dim());
        }
    }
}

#[test]
fn multiplicativity_of_products() {
    let seg = poly(&[&[-1.0], &[1.0]]);
    let sq = square();
    let cube = cube();
    for r in [0.5, 2.0] {
        let s1 = omega(1) * ball_volume(&seg, &DVector::zeros(1), r, 1e-12).unwrap().value;
        let s2 = 2.0 * omega(2) * ball_volume(&sq, &DVector::zeros(2), r, 1e-9).unwrap().value;
        let s3 = 6.0 * omega(3) * ball_volume(&cube, &DVector::zeros(3), r, 1e-6).unwrap().value;
        assert_relative_eq!(s2, s1 * s1, max_relative = 1e-8);
        assert_relative_eq!(s3, s1 * s1 * s1, max_relative = 1e-6);
        let prism = sq.product(&seg).unwrap();
        let p3 = 6.0 * omega(3) * ball_volume(&prism, &DVector::zeros(3), r, 1e-6).unwrap().value;
        assert_relative_eq!(p3, s2 * s1, max_relative = 1e-6);
    }
}

#[test]
fn hanner_polytopes_match_closed_form() {
    for spec in ["segment", "product(segment,segment)", "polar(product(segment,segment))",
                 "product(segment,segment,segment)", "polar(product(segment,segment,segment))",
                 "product(polar(product(segment,segment)),segment)",
                 "polar(product(polar(product(segment,segment)),segment))"] {
        let s: HannerSpec = spec.parse().unwrap();
        let p = hanner_build(&s).unwrap();
        let n = p.dim();
        for r in [0.5, 1.0, 2.0, 4.0] {
            let exact = hanner_ball_volume(n, r);
            let v = ball_volume(&p, &DVector::zeros(n), r, 1e-7 * exact).unwrap().value;
            assert_relative_eq!(v, exact, max_relative = 1e-6);
        }
    }
}

#[test]
fn argument_errors() {
    let sq = square();
    assert!(matches!(ball_volume(&sq, &v(&[1.0, 0.0]), 1.0, 1e-6), Err(Error::PointNotInterior)));
    assert!(matches!(ball_volume(&sq, &v(&[0.0, 0.0]), 0.0, 1e-6), Err(Error::NonpositiveRadius(_))));
    assert!(matches!(ball_volume(&sq, &v(&[0.0, 0.0, 0.0]), 1.0, 1e-6), Err(Error::DimensionMismatch { .. })));
}
