//! Facet enumeration by the double description method.
//!
//! Points `u_i` (centred and scaled) become homogeneous constraints
//! `b - <a, u_i> >= 0` on `h = (b, a)`. The extreme rays of that cone are
//! exactly the facet inequalities of the hull; rays are maintained
//! incrementally, one constraint at a time, with the combinatorial adjacency
//! test on zero sets.

use nalgebra::{DMatrix, DVector};

use super::Facet;
use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::linalg::{dot, rank};

pub(crate) struct Hull {
    pub vertices: Vec<DVector<f64>>,
    pub facets: Vec<Facet>,
    /// Vertex indices (into `vertices`) lying on each facet, sorted.
    pub incidence: Vec<Vec<usize>>,
}

struct Ray {
    h: Vec<f64>,
    zeros: BitSet,
}

pub(crate) fn convex_hull(points: &[DVector<f64>], eps: f64) -> Result<Hull> {
    let first = points.first().ok_or(Error::EmptyInput)?;
    let n = first.len();
    if n == 0 {
        return Err(Error::DegenerateInput("points have dimension 0".into()));
    }
    for p in points {
        if p.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: p.len() });
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::DegenerateInput("non-finite coordinate".into()));
        }
    }

    let centroid = points.iter().fold(DVector::zeros(n), |acc, p| acc + p) / points.len() as f64;
    let scale = points.iter().map(|p| (p - &centroid).norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::DegenerateInput("all points coincide".into()));
    }

    // Deduplicated, normalised points and their originals.
    let mut originals: Vec<DVector<f64>> = Vec::new();
    let mut normalised: Vec<DVector<f64>> = Vec::new();
    for p in points {
        let u = (p - &centroid) / scale;
        if normalised.iter().all(|q| (q - &u).norm() > eps) {
            normalised.push(u);
            originals.push(p.clone());
        }
    }
    let m = normalised.len();
    if m < n + 1 {
        return Err(Error::DegenerateInput(format!(
            "{m} distinct points cannot span dimension {n}"
        )));
    }
    let rows: Vec<Vec<f64>> = normalised
        .iter()
        .map(|u| std::iter::once(1.0).chain(u.iter().map(|x| -x)).collect())
        .collect();

    let basis = initial_basis(&rows, n + 1)?;
    let mut rays = initial_rays(&rows, &basis, m)?;

    let mut processed = vec![false; m];
    for &b in &basis {
        processed[b] = true;
    }
    for i in 0..m {
        if processed[i] {
            continue;
        }
        processed[i] = true;
        add_constraint(&mut rays, &rows[i], i, n, eps);
    }

    // Convert rays to facet inequalities <a, x> <= b in original coordinates.
    let mut facets: Vec<Facet> = Vec::new();
    let mut incidence: Vec<Vec<usize>> = Vec::new();
    for ray in &rays {
        let b = ray.h[0];
        let a = DVector::from_iterator(n, ray.h[1..].iter().cloned());
        let an = a.norm();
        if b <= 0.0 || an == 0.0 {
            return Err(Error::DegenerateInput("hull construction produced an invalid facet".into()));
        }
        let normal = a / an;
        let offset = b / an * scale + normal.dot(&centroid);
        let on: Vec<usize> = (0..m)
            .filter(|&k| (offset - normal.dot(&originals[k])).abs() <= eps * scale * 10.0)
            .collect();
        if on.len() < n || incidence.contains(&on) {
            continue;
        }
        facets.push(Facet { normal, offset });
        incidence.push(on);
    }

    // A point is a vertex iff the normals of the facets through it span R^n.
    let mut point_facets: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (j, on) in incidence.iter().enumerate() {
        for &k in on {
            point_facets[k].push(j);
        }
    }
    let mut new_index = vec![usize::MAX; m];
    let mut vertices = Vec::new();
    for k in 0..m {
        let normals: Vec<DVector<f64>> =
            point_facets[k].iter().map(|&j| facets[j].normal.clone()).collect();
        if normals.len() >= n && rank(&normals, 1e-9) == n {
            new_index[k] = vertices.len();
            vertices.push(originals[k].clone());
        }
    }
    let incidence: Vec<Vec<usize>> = incidence
        .into_iter()
        .map(|on| on.into_iter().filter_map(|k| (new_index[k] != usize::MAX).then(|| new_index[k])).collect())
        .collect();
    for on in &incidence {
        if on.len() < n {
            return Err(Error::DegenerateInput("facet with too few vertices".into()));
        }
    }
    Ok(Hull { vertices, facets, incidence })
}

/// Greedy pivoted Gram-Schmidt selection of `k` linearly independent rows.
fn initial_basis(rows: &[Vec<f64>], k: usize) -> Result<Vec<usize>> {
    let mut residuals: Vec<Vec<f64>> = rows.to_vec();
    let mut chosen = Vec::with_capacity(k);
    for _ in 0..k {
        let (best, norm) = residuals
            .iter()
            .enumerate()
            .filter(|(i, _)| !chosen.contains(i))
            .map(|(i, r)| (i, dot(r, r).sqrt()))
            .fold((usize::MAX, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best == usize::MAX || norm < 1e-7 {
            return Err(Error::DegenerateInput(format!(
                "affine hull has dimension {} < {}",
                chosen.len().saturating_sub(1),
                k - 1
            )));
        }
        chosen.push(best);
        let e: Vec<f64> = residuals[best].iter().map(|x| x / norm).collect();
        for r in residuals.iter_mut() {
            let c = dot(r, &e);
            for (x, y) in r.iter_mut().zip(&e) {
                *x -= c * y;
            }
        }
    }
    Ok(chosen)
}

fn initial_rays(rows: &[Vec<f64>], basis: &[usize], m: usize) -> Result<Vec<Ray>> {
    let d = basis.len();
    let a = DMatrix::from_fn(d, d, |r, c| rows[basis[r]][c]);
    let inv = a
        .try_inverse()
        .ok_or_else(|| Error::DegenerateInput("initial simplex is singular".into()))?;
    Ok((0..d)
        .map(|k| {
            let col = inv.column(k);
            let norm = col.norm();
            let mut zeros = BitSet::new(m);
            for (r, &b) in basis.iter().enumerate() {
                if r != k {
                    zeros.insert(b);
                }
            }
            Ray { h: col.iter().map(|x| x / norm).collect(), zeros }
        })
        .collect())
}

fn add_constraint(rays: &mut Vec<Ray>, row: &[f64], index: usize, n: usize, eps: f64) {
    let values: Vec<f64> = rays.iter().map(|r| dot(&r.h, row)).collect();
    let neg: Vec<usize> = (0..rays.len()).filter(|&k| values[k] < -eps).collect();
    if neg.is_empty() {
        for (k, r) in rays.iter_mut().enumerate() {
            if values[k].abs() <= eps {
                r.zeros.insert(index);
            }
        }
        return;
    }
    let pos: Vec<usize> = (0..rays.len()).filter(|&k| values[k] > eps).collect();

    let mut created = Vec::new();
    for &p in &pos {
        for &q in &neg {
            let common = rays[p].zeros.intersection(&rays[q].zeros);
            if common.len() + 1 < n {
                continue;
            }
            let adjacent = rays
                .iter()
                .enumerate()
                .all(|(k, r)| k == p || k == q || !r.zeros.is_superset(&common));
            if !adjacent {
                continue;
            }
            let (sp, sq) = (values[p], values[q]);
            let mut h: Vec<f64> =
                rays[q].h.iter().zip(&rays[p].h).map(|(hq, hp)| sp * hq - sq * hp).collect();
            let norm = dot(&h, &h).sqrt();
            for x in h.iter_mut() {
                *x /= norm;
            }
            let mut zeros = common;
            zeros.insert(index);
            created.push(Ray { h, zeros });
        }
    }

    let mut kept: Vec<Ray> = Vec::with_capacity(rays.len() + created.len());
    for (k, mut r) in rays.drain(..).enumerate() {
        if values[k] < -eps {
            continue;
        }
        if values[k].abs() <= eps {
            r.zeros.insert(index);
        }
        kept.push(r);
    }
    kept.extend(created);
    *rays = kept;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[&[f64]]) -> Vec<DVector<f64>> {
        v.iter().map(|p| DVector::from_row_slice(p)).collect()
    }

    #[test]
    fn square_with_interior_and_edge_points() {
        let p = pts(&[&[1., 1.], &[1., -1.], &[-1., 1.], &[-1., -1.], &[0., 0.], &[1., 0.]]);
        let h = convex_hull(&p, 1e-9).unwrap();
        assert_eq!(h.vertices.len(), 4);
        assert_eq!(h.facets.len(), 4);
        assert!(h.incidence.iter().all(|on| on.len() == 2));
    }

    #[test]
    fn cube_has_six_square_facets() {
        let mut v = Vec::new();
        for s in 0..8 {
            v.push(DVector::from_fn(3, |i, _| if s >> i & 1 == 1 { 1.0 } else { -1.0 }));
        }
        let h = convex_hull(&v, 1e-9).unwrap();
        assert_eq!(h.facets.len(), 6);
        assert!(h.incidence.iter().all(|on| on.len() == 4));
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let p = pts(&[&[0., 0.], &[1., 1.], &[2., 2.]]);
        assert!(matches!(convex_hull(&p, 1e-9), Err(Error::DegenerateInput(_))));
    }
}
