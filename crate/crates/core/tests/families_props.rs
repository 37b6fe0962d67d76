mod common;

use common::*;
use funkvol::asymptotics::c1_flip;
use funkvol::families::{
    gradient_norm, hanner_ball_volume, hanner_build, polygon_c1, polygon_c1_gradient, polygon_dv_dlambda,
    polygon_dv_dlambda_pole_form, unconditional_hull, HannerSpec, Polygon,
};
use funkvol::funk::ball_volume;
use nalgebra::{DVector, Matrix2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn hanner_spec() -> impl Strategy<Value = HannerSpec> {
    let leaf = Just(HannerSpec::Segment);
    leaf.prop_recursive(3, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| HannerSpec::product(a, b)),
            inner.prop_map(HannerSpec::polar),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polygon_c1_matches_flag_formula(seed in any::<u64>(), m in 3usize..=9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_polygon(&mut rng, m);
        let q = Polygon::from_polytope(&p).unwrap();
        prop_assert!((polygon_c1(&q).unwrap() - c1_flip(&p).unwrap().c1).abs() <= 1e-10);
    }

    #[test]
    fn both_derivative_forms_agree(seed in any::<u64>(), m in 3usize..=9, lambda in 0.01f64..0.99) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = Polygon::from_polytope(&random_polygon(&mut rng, m)).unwrap();
        let a = polygon_dv_dlambda(&q, lambda).unwrap();
        let b = polygon_dv_dlambda_pole_form(&q, lambda).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{} vs {}", a, b);
        prop_assert!(a > 0.0);
    }

    #[test]
    fn hanner_expressions_round_trip(spec in hanner_spec()) {
        let text = spec.to_string();
        let back: HannerSpec = text.parse().unwrap();
        prop_assert_eq!(back.dim(), spec.dim());
        prop_assert_eq!(back.to_string(), text);
        if spec.dim() <= 4 {
            let p = hanner_build(&spec).unwrap();
            let n = p.dim();
            let expected: usize = (1usize << n) * (1..=n).product::<usize>();
            prop_assert_eq!(p.num_flags(), expected);
            prop_assert!(p.is_unconditional(1e-12));
        }
    }
}

#[test]
fn derivative_vanishes_linearly_at_zero() {
    let q = Polygon::from_polytope(&heptagon()).unwrap();
    let r1 = polygon_dv_dlambda(&q, 1e-3).unwrap() / 1e-3;
    let r2 = polygon_dv_dlambda(&q, 1e-4).unwrap() / 1e-4;
    assert!((r1 - r2).abs() <= 2e-3 * r2, "{r1} vs {r2}");
}

#[test]
fn linear_image_of_regular_pentagon_is_stationary() {
    let a = Matrix2::new(1.3, 0.4, -0.2, 0.8);
    let pts: Vec<[f64; 2]> = funkvol::families::regular_polygon_points(5, 1.0)
        .iter()
        .map(|p| {
            let w = a * nalgebra::Vector2::new(p[0], p[1]);
            [w.x, w.y]
        })
        .collect();
    let q = Polygon::new(&pts).unwrap();
    let g = polygon_c1_gradient(&q).unwrap();
    // c1 is GL2-invariant, so the gradient is orthogonal to the gl2 orbit directions;
    // at an image of the regular pentagon it vanishes outright.
    assert!(gradient_norm(&g) <= 1e-6, "{}", gradient_norm(&g));
}

/// Random unconditional body: reflections of a few positive-orthant points.
fn random_unconditional(rng: &mut ChaCha8Rng, n: usize) -> funkvol::Polytope {
    let k = rng.gen_range(1..=3);
    let mut pts: Vec<DVector<f64>> = (0..k).map(|_| DVector::from_fn(n, |_, _| rng.gen_range(0.1..1.0))).collect();
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = rng.gen_range(0.5..1.2);
        pts.push(e);
    }
    unconditional_hull(&pts).unwrap()
}

#[test]
fn unconditional_polygons_beat_hanner() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let tol = 1e-8;
    for _ in 0..10 {
        let p = random_unconditional(&mut rng, 2);
        assert!(p.is_unconditional(1e-12));
        for r in [0.5, 1.0, 2.0, 5.0] {
            let v = ball_volume(&p, &DVector::zeros(2), r, tol).unwrap().value;
            assert!(v >= hanner_ball_volume(2, r) - 2.0 * tol);
        }
    }
    // Diagonal images of the square and the diamond attain equality.
    for p in [square().linear_image(&nalgebra::DMatrix::from_diagonal(&DVector::from_vec(vec![0.7, 2.0]))).unwrap(),
              poly(&[&[1.5, 0.], &[-1.5, 0.], &[0., 0.4], &[0., -0.4]])] {
        for r in [0.5, 5.0] {
            let v = ball_volume(&p, &DVector::zeros(2), r, tol).unwrap().value;
            assert!((v - hanner_ball_volume(2, r)).abs() <= 2.0 * tol);
        }
    }
}
