#![allow(dead_code)]

use funkvol::families::Polygon;
use funkvol::Polytope;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn v(x: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(x)
}

pub fn poly(rows: &[&[f64]]) -> Polytope {
    Polytope::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

pub fn square() -> Polytope {
    poly(&[&[1., 1.], &[1., -1.], &[-1., 1.], &[-1., -1.]])
}

pub fn cube() -> Polytope {
    let mut rows = Vec::new();
    for s in 0..8 {
        rows.push((0..3).map(|i| if s >> i & 1 == 1 { -1.0 } else { 1.0 }).collect::<Vec<f64>>());
    }
    Polytope::from_rows(&rows).unwrap()
}

pub fn octahedron() -> Polytope {
    poly(&[&[1., 0., 0.], &[-1., 0., 0.], &[0., 1., 0.], &[0., -1., 0.], &[0., 0., 1.], &[0., 0., -1.]])
}

/// Asymmetric triangle, centroid at (2/3, 1/6).
pub fn asymmetric_triangle() -> Polytope {
    poly(&[&[3., 0.2], &[-0.5, 1.3], &[-0.5, -1.0]])
}

pub fn pentagon() -> Polytope {
    poly(&[&[2., 0.2], &[0.3, 1.1], &[-1.0, 0.6], &[-0.4, -1.3], &[1.5, -0.8]])
}

pub fn heptagon() -> Polytope {
    poly(&[&[1.3, 0.1], &[0.8, 0.9], &[-0.1, 1.2], &[-0.9, 0.7], &[-1.1, -0.2], &[-0.5, -1.0], &[0.6, -0.9]])
}

pub fn quadrilateral() -> Polytope {
    poly(&[&[1.6, 0.1], &[-0.2, 1.1], &[-1.0, -0.3], &[0.3, -0.9]])
}

/// Random convex polygon with `m` vertices on a jittered circle; the origin is interior.
pub fn random_polygon(rng: &mut ChaCha8Rng, m: usize) -> Polytope {
    loop {
        let mut angles: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let radius = rng.gen_range(0.5..2.0);
        let pts: Vec<DVector<f64>> = angles.iter().map(|a| v(&[radius * a.cos(), radius * a.sin()])).collect();
        if let Ok(p) = Polytope::from_vertices(&pts) {
            let ok = p.vertices().len() == m
                && p.is_interior(&DVector::zeros(2))
                && p.slacks(&DVector::zeros(2)).iter().all(|s| *s > 0.05 * radius)
                && Polygon::from_polytope(&p).is_ok();
            if ok {
                return p;
            }
        }
    }
}

/// Random polytope from a point cloud, with the origin moved to the vertex centroid.
pub fn random_polytope(rng: &mut ChaCha8Rng, n: usize, points: usize) -> Polytope {
    loop {
        let pts: Vec<DVector<f64>> = (0..points).map(|_| DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))).collect();
        if let Ok(p) = Polytope::from_vertices(&pts) {
            let c = p.vertex_centroid();
            let q = p.translate(&-c);
            if q.slacks(&DVector::zeros(n)).iter().all(|s| *s > 0.05) {
                return q;
            }
        }
    }
}

pub fn random_gl(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    loop {
        let a: DMatrix<f64> = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.5..1.5));
        if a.determinant().abs() > 0.3 {
            return a;
        }
    }
}
