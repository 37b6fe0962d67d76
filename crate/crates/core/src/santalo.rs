//! Funk–Santaló points.
//!
//! `s_∞(P)` minimises `c1(P, ·)`, which up to a constant is the barrier
//! `-Σ_F |flags(F)| log(1 - <q(F), z>)` over facets. `s_R(P)` minimises the
//! ball volume over the center; its gradient is integrated exactly next to
//! the volume and the Hessian is taken from differences of that gradient.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::asymptotics::{c0, c1_at_point, FacetBarrier};
use crate::error::{Error, Result};
use crate::funk::{ball_volume_with_gradient, default_tolerance};
use crate::{omega, Polytope};

#[derive(Clone, Debug, Serialize)]
pub struct SantaloResult {
    pub point: Vec<f64>,
    pub objective: f64,
    /// Norm of the stationarity residual at `point`.
    pub residual: f64,
    pub iterations: usize,
    /// Smallest Hessian eigenvalue seen over all iterates.
    pub min_hessian_eigenvalue: f64,
}

pub const NEWTON_BUDGET: usize = 200;
const ARMIJO_C: f64 = 1e-4;

/// Largest `t <= 1` keeping every slack at least `keep` times its current value.
fn feasible_step(slacks: &[f64], rates: &[f64], keep: f64) -> f64 {
    slacks
        .iter()
        .zip(rates)
        .filter(|(_, &r)| r > 0.0)
        .map(|(&s, &r)| (1.0 - keep) * s / r)
        .fold(1.0, f64::min)
}

fn min_eigenvalue(h: &DMatrix<f64>) -> f64 {
    h.clone().symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// `s_∞(P)`: zero of `Σ_F |flags(F)| q(F) / (1 - <q(F), z>)`, by damped Newton
/// from the vertex centroid. `tol` bounds the residual norm, measured with the
/// dual vertices of `P` taken about the origin when it is interior.
pub fn santalo_infinity(p: &Polytope, tol: f64) -> Result<SantaloResult> {
    let n = p.dim();
    let origin = DVector::zeros(n);
    // Newton runs in coordinates centred at `c`; the residual is reported
    // about the origin when possible so that it matches the stated system.
    let c = if p.is_interior(&origin) { origin } else { p.vertex_centroid() };
    let shifted = p.translate(&-&c);
    let barrier = FacetBarrier::new(&shifted)?;
    let mut z = DVector::zeros(n);
    let mut min_eig = f64::INFINITY;
    for it in 0..=NEWTON_BUDGET {
        let g = barrier.gradient(&z);
        let residual = g.norm();
        let h = barrier.hessian(&z);
        min_eig = min_eig.min(min_eigenvalue(&h));
        if residual <= tol {
            let point = &z + &c;
            return Ok(SantaloResult {
                objective: c1_at_point(p, &point)?,
                point: point.iter().cloned().collect(),
                residual,
                iterations: it,
                min_hessian_eigenvalue: min_eig,
            });
        }
        if it == NEWTON_BUDGET {
            break;
        }
        let d = h
            .cholesky()
            .ok_or(Error::MaxIterations { iterations: it, residual })?
            .solve(&-&g);
        let slacks = barrier.slacks(&z);
        let rates: Vec<f64> = barrier.duals.iter().map(|q| q.dot(&d)).collect();
        let mut t = feasible_step(&slacks, &rates, 0.1);
        let f0 = barrier.value(&z).unwrap();
        let slope = g.dot(&d);
        // The weighted log barrier is self-concordant (all weights >= 1), so
        // once the Newton decrement is below 0.1 full steps stay feasible and
        // converge quadratically; line search there only fights rounding.
        if -slope < 0.01 && t == 1.0 {
            z += d;
            continue;
        }
        let mut accepted = false;
        while t > 1e-12 {
            let trial = &z + &d * t;
            if let Some(f) = barrier.value(&trial) {
                // Near the solution the decrease drowns in rounding; accept full
                // steps there since Newton converges quadratically.
                if f <= f0 + ARMIJO_C * t * slope || (t == 1.0 && -slope < 1e-20 * f0.abs().max(1.0)) {
                    z = trial;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            // A vanishing Newton decrement means we are at the minimiser up to rounding.
            if -slope < 1e-24 {
                z += d;
                continue;
            }
            return Err(Error::MaxIterations { iterations: it, residual });
        }
    }
    let residual = barrier.gradient(&z).norm();
    Err(Error::MaxIterations { iterations: NEWTON_BUDGET, residual })
}

/// `Σ_F |flags(F)| q_x(F) / Σ_F |flags(F)|` for the vertices `q_x(F)` of `P^x`.
pub fn weighted_dual_centroid(p: &Polytope, x: &DVector<f64>) -> Result<DVector<f64>> {
    let duals = p.dual_vertices_at(x)?;
    let weights = p.facet_flag_counts();
    let total: usize = weights.iter().sum();
    let mut acc = DVector::zeros(p.dim());
    for (q, w) in duals.iter().zip(&weights) {
        acc.axpy(*w as f64, q, 1.0);
    }
    Ok(acc / total as f64)
}

/// Inradius about `x`: the smallest facet slack.
fn inradius(p: &Polytope, x: &DVector<f64>) -> f64 {
    p.slacks(x).into_iter().fold(f64::INFINITY, f64::min)
}

/// `s_R(P)`: minimiser of `x -> volht(B_P(x, R))`, to point accuracy `tol`.
pub fn santalo_at_radius(p: &Polytope, r: f64, tol: f64) -> Result<SantaloResult> {
    santalo_at_radius_from(p, r, tol, None)
}

/// As [`santalo_at_radius`], starting from `start` (default: `s_∞(P)`).
pub fn santalo_at_radius_from(p: &Polytope, r: f64, tol: f64, start: Option<DVector<f64>>) -> Result<SantaloResult> {
    let n = p.dim();
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mut x = match start {
        Some(s) => s,
        None => DVector::from_vec(santalo_infinity(p, 1e-10)?.point),
    };
    p.check_interior(&x)?;
    // Quadrature accuracy well below the size of the gradient changes probed
    // by the Hessian differences.
    let scale_guess = (c0(p) * r.max(1.0).powi(n as i32) / omega(n)).max(1.0);
    let qtol = (default_tolerance(n) * 1e-3).max(1e-12) * scale_guess;
    let grad = |x: &DVector<f64>| ball_volume_with_gradient(p, x, r, qtol);

    let budget = 60;
    let mut g = grad(&x)?.1;
    let mut min_eig = f64::INFINITY;
    for it in 0..budget {
        let h_step = 1e-4 * inradius(p, &x);
        let mut hess = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut a = x.clone();
            let mut b = x.clone();
            a[i] += h_step;
            b[i] -= h_step;
            let diff = (grad(&a)?.1 - grad(&b)?.1) / (2.0 * h_step);
            hess.set_column(i, &diff);
        }
        let hess = (&hess + hess.transpose()) * 0.5;
        min_eig = min_eig.min(min_eigenvalue(&hess));
        let d = match hess.clone().cholesky() {
            Some(ch) => ch.solve(&-&g),
            None => -&g,
        };
        // Keep every facet slack at least half of its current value.
        let slacks = p.slacks(&x);
        let rates: Vec<f64> = p.facets().iter().map(|f| f.normal.dot(&d)).collect();
        let mut t = feasible_step(&slacks, &rates, 0.5);
        let g0 = g.norm();
        let est;
        loop {
            let trial = &x + &d * t;
            let (e, gt) = grad(&trial)?;
            if gt.norm() < g0 || t < 1e-6 {
                x = trial;
                est = e;
                g = gt;
                break;
            }
            t *= 0.5;
        }
        if (&d * t).norm() <= 0.01 * tol {
            return Ok(SantaloResult {
                point: x.iter().cloned().collect(),
                objective: est.value,
                residual: g.norm(),
                iterations: it + 1,
                min_hessian_eigenvalue: min_eig,
            });
        }
    }
    Err(Error::MaxIterations { iterations: budget, residual: g.norm() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{centered_simplex, regular_polygon};

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(x)
    }

    #[test]
    fn symmetric_bodies_give_the_origin() {
        let sq = Polytope::from_rows(&[vec![1., 1.], vec![1., -1.], vec![-1., 1.], vec![-1., -1.]]).unwrap();
        let s = santalo_infinity(&sq, 1e-8).unwrap();
        assert!(DVector::from_vec(s.point).norm() < 1e-12);
        let t = santalo_infinity(&centered_simplex(3), 1e-10).unwrap();
        assert!(DVector::from_vec(t.point).norm() < 1e-10);
        assert!(weighted_dual_centroid(&sq, &v(&[0.0, 0.0])).unwrap().norm() < 1e-15);
    }

    #[test]
    fn triangle_point_is_its_centroid() {
        let t = Polytope::from_rows(&[vec![3., 0.], vec![0., 1.], vec![0., -1.]]).unwrap();
        let s = santalo_infinity(&t, 1e-10).unwrap();
        assert!((s.point[0] - 1.0).abs() < 1e-9 && s.point[1].abs() < 1e-9, "{:?}", s.point);
        assert!(s.min_hessian_eigenvalue > 0.0);
        let wdc = weighted_dual_centroid(&t, &v(&s.point)).unwrap();
        assert!(wdc.norm() < 1e-9);
    }

    #[test]
    fn newton_agrees_with_grid_search() {
        let p = Polytope::from_rows(&[vec![2., 0.2], vec![0.3, 1.1], vec![-1.0, 0.6], vec![-0.4, -1.3], vec![1.5, -0.8]])
            .unwrap();
        let s = santalo_infinity(&p, 1e-10).unwrap();
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in -150..=150 {
            for j in -150..=150 {
                let x = v(&[i as f64 * 0.01, j as f64 * 0.01]);
                if let Ok(c) = c1_at_point(&p, &x) {
                    if c < best.0 {
                        best = (c, x[0], x[1]);
                    }
                }
            }
        }
        assert!((best.1 - s.point[0]).abs() <= 0.01 && (best.2 - s.point[1]).abs() <= 0.01);
        assert!(s.objective <= best.0 + 1e-12);
    }

    #[test]
    fn finite_radius_on_symmetric_and_triangle() {
        let hex = regular_polygon(6, 1.0);
        let s = santalo_at_radius(&hex, 3.0, 1e-6).unwrap();
        assert!(DVector::from_vec(s.point).norm() < 1e-6);
        let t = Polytope::from_rows(&[vec![3., 0.], vec![0., 1.], vec![0., -1.]]).unwrap();
        let s = santalo_at_radius_from(&t, 2.0, 1e-6, Some(v(&[0.6, 0.2]))).unwrap();
        assert!((s.point[0] - 1.0).abs() < 1e-5 && s.point[1].abs() < 1e-5, "{:?}", s.point);
    }
}
