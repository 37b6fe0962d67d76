//! Funk distance, forward balls, the Holmes–Thompson density and ball volumes.
//!
//! A forward ball of radius `R` about `x` is the homothetic copy
//! `x + λ (P - x)` with `λ = 1 - e^{-R}`. Its Holmes–Thompson volume is
//! `(1/ω_n) ∫ |P^y| dy`, where the density `|P^y|` is a sum over dual flags of
//! `|det q(g)| / (n! Π (1 - <q(g_k), y>))`.
//!
//! The ball is cut into the shrunken flag simplices `λ conv{p(f_0), ..., p(f_n)}`.
//! On the simplex of a flag `f` the own dual-flag factors
//! `1 - <q(f_{n-1-i}), y>` become very small near `∂P` when `R` is large. Each
//! of them is affine in one collapsed coordinate, so they are used as
//! logarithmically graded coordinates: the Jacobian cancels the own factors
//! and the transformed integrand is bounded on the unit cube.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::{FaceId, FlagDecomposition, Polytope};
use crate::linalg::det_columns;
use crate::quadrature::{Cubature, CubatureOutput, Region};
use crate::{factorial, omega};

/// A computed Holmes–Thompson volume.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeEstimate {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

/// Default absolute tolerance on Holmes–Thompson ball volumes.
pub fn default_tolerance(n: usize) -> f64 {
    match n {
        1 => 1e-9,
        2 => 1e-7,
        3 => 1e-5,
        4 => 1e-4,
        _ => 1e-3,
    }
}

/// Funk distance `log(|p b| / |q b|)`, `b` the exit point of the ray from `p` through `q`.
pub fn funk_distance(p: &Polytope, a: &DVector<f64>, b: &DVector<f64>) -> Result<f64> {
    p.check_interior(a)?;
    p.check_interior(b)?;
    let dir = b - a;
    if dir.norm() <= f64::EPSILON * p.scale() {
        return Ok(0.0);
    }
    // Exit parameter t with a + t (b - a) on the boundary; t > 1 since b is interior.
    let t = p
        .facets()
        .iter()
        .filter_map(|f| {
            let rate = f.normal.dot(&dir);
            (rate > 0.0).then(|| (f.offset - f.normal.dot(a)) / rate)
        })
        .fold(f64::INFINITY, f64::min);
    Ok((t / (t - 1.0)).ln())
}

/// `λ = 1 - e^{-R}` as a function of the radius.
pub fn shrink_factor(r: f64) -> f64 {
    -(-r).exp_m1()
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::NonpositiveRadius(r))
    }
}

/// Forward ball `x + (1 - e^{-R})(P - x)`.
pub fn funk_ball(p: &Polytope, x: &DVector<f64>, r: f64) -> Result<Polytope> {
    check_radius(r)?;
    p.check_interior(x)?;
    Ok(p.homothety(x, shrink_factor(r)))
}

/// The density `y -> |P^y|` written as a sum over dual flags, relative to a
/// reference point `c` interior to `P`.
pub(crate) struct DensityKernel {
    n: usize,
    reference: DVector<f64>,
    /// `q(F)` for every face id (zero for the whole polytope and the empty face).
    dual: Vec<DVector<f64>>,
    /// `|det(q(f_0), ..., q(f_{n-1}))| / n!` per flag.
    coef: Vec<f64>,
    /// Faces `f_0..f_{n-1}` per flag, flattened.
    faces: Vec<usize>,
}

impl DensityKernel {
    /// Kernel for a polytope with the origin interior and a given decomposition.
    fn centered(p: &Polytope, dec: &FlagDecomposition) -> Self {
        let n = p.dim();
        let dual: Vec<DVector<f64>> = (0..p.faces().len()).map(|k| dec.dual(FaceId(k)).clone()).collect();
        let nf = factorial(n);
        let mut coef = Vec::with_capacity(p.num_flags());
        let mut faces = Vec::with_capacity(p.num_flags() * n);
        for flag in p.flags() {
            let cols: Vec<&DVector<f64>> = flag.faces[..n].iter().map(|id| &dual[id.0]).collect();
            coef.push(det_columns(&cols).abs() / nf);
            faces.extend(flag.faces[..n].iter().map(|id| id.0));
        }
        DensityKernel { n, reference: DVector::zeros(n), dual, coef, faces }
    }

    /// Kernel for `P` using the barycentric decomposition of `P - c`.
    pub(crate) fn new(p: &Polytope, c: &DVector<f64>) -> Result<Self> {
        p.check_interior(c)?;
        let shifted = p.translate(&-c);
        let dec = FlagDecomposition::barycentric(&shifted)?;
        let mut k = Self::centered(&shifted, &dec);
        k.reference = c.clone();
        Ok(k)
    }

    fn slacks_at(&self, y: &[f64], slack: &mut [f64]) {
        for (s, q) in slack.iter_mut().zip(&self.dual) {
            *s = 1.0 - q.iter().zip(y.iter().zip(self.reference.iter())).map(|(a, (b, c))| a * (b - c)).sum::<f64>();
        }
    }

    /// `Σ_flags coef / Π slack`, with `inv` holding the reciprocal slacks.
    fn sum_terms(&self, inv: &[f64]) -> f64 {
        let n = self.n;
        self.coef
            .iter()
            .zip(self.faces.chunks_exact(n))
            .map(|(c, fs)| fs.iter().fold(*c, |acc, &f| acc * inv[f]))
            .sum()
    }

    /// `|P^y|` for `y` interior (not checked).
    pub(crate) fn density(&self, y: &[f64]) -> f64 {
        let mut slack = vec![1.0; self.dual.len()];
        self.slacks_at(y, &mut slack);
        slack.iter_mut().for_each(|s| *s = s.recip());
        self.sum_terms(&slack)
    }
}

/// Lebesgue volume of the polar `P^y` of `P - y`.
pub fn ht_density(p: &Polytope, y: &DVector<f64>) -> Result<f64> {
    p.check_interior(y)?;
    let c = p.vertex_centroid();
    let kernel = DensityKernel::new(p, &c)?;
    Ok(kernel.density(y.as_slice()))
}

/// One shrunken flag simplex prepared for the graded collapsed coordinates.
struct Piece {
    /// `|det(p(f_0), ..., p(f_{n-1}))| = n! |Δ|`.
    det: f64,
    /// `own[i]` is the face `f_{n-1-i}`.
    own: Vec<usize>,
    /// `m[F * (n+1) + j] = 1 - <q(F), p(f_j)>`, zero when `f_j ⊆ F`.
    m: Vec<f64>,
}

/// Integrates `|P^y|` over `x + λ (P - x)` using a fixed decomposition of `P - x`.
struct BallIntegrator {
    n: usize,
    kernel: DensityKernel,
    pieces: Vec<Piece>,
    nfaces: usize,
}

impl BallIntegrator {
    fn new(shifted: &Polytope, dec: &FlagDecomposition) -> Self {
        let n = shifted.dim();
        let kernel = DensityKernel::centered(shifted, dec);
        let nfaces = shifted.faces().len();
        let pieces = shifted
            .flags()
            .iter()
            .map(|flag| {
                let pts: Vec<&DVector<f64>> = flag.faces.iter().map(|&id| dec.primal(id)).collect();
                let det = det_columns(&pts[..n]).abs();
                let own = (0..n).map(|i| flag.faces[n - 1 - i].0).collect();
                let mut m = vec![0.0; nfaces * (n + 1)];
                for (fi, face) in shifted.faces().iter().enumerate() {
                    if face.dim < 0 || face.dim == n as isize {
                        continue;
                    }
                    for (j, &fj) in flag.faces.iter().enumerate() {
                        let sub = &shifted.face(fj).vertices;
                        let inside = j < n && sub.iter().all(|v| face.vertices.binary_search(v).is_ok());
                        m[fi * (n + 1) + j] = if inside { 0.0 } else { (1.0 - kernel.dual[fi].dot(pts[j])).max(0.0) };
                    }
                }
                Piece { det, own, m }
            })
            .collect();
        BallIntegrator { n, kernel, pieces, nfaces }
    }

    /// Evaluates the transformed integrand on piece `h` at `u ∈ [0,1]^n`.
    /// `out[0]` receives the volume integrand; with `gradient`, `out[1..]`
    /// receives `τ ∇_y |P^y|` times the same weight.
    fn eval(&self, h: usize, u: &[f64], lambda: f64, tau: f64, gradient: bool, out: &mut [f64]) {
        let n = self.n;
        let piece = &self.pieces[h];
        let stride = n + 1;
        let mut wt = [0.0f64; 8];
        let mut own_x = [0.0f64; 8];
        let mut weight = piece.det * lambda.powi(n as i32);
        let mut pi = 1.0;
        for i in 0..n {
            let f = piece.own[i];
            let row = &piece.m[f * stride..(f + 1) * stride];
            let mut lo = tau;
            for k in 0..i {
                lo += lambda * wt[n - k] * row[n - k];
            }
            let d = row[n - i];
            let a = lambda * pi * d / lo;
            let ui = u[i];
            let (s, one_minus_s, x, g) = if a > 1e-300 {
                let l = a.ln_1p();
                let denom = -(-l).exp_m1();
                let s = -(-ui * l).exp_m1() / denom;
                let oms = (-ui * l).exp() * -(-(1.0 - ui) * l).exp_m1() / denom;
                ((s), oms, (lo + lambda * pi * d) * (-ui * l).exp(), if a < 1e-8 { 1.0 - 0.5 * a } else { l / a })
            } else {
                (ui, 1.0 - ui, lo, 1.0)
            };
            // ds/du = x log(hi/lo) / (λ π d) = x g / lo.
            weight *= x * g / lo;
            if i >= 1 {
                weight *= pi;
            }
            own_x[i] = x;
            wt[n - i] = pi * one_minus_s;
            pi *= s;
        }
        wt[0] = pi;

        let mut buf = [0.0f64; STACK_FACES];
        let mut heap = Vec::new();
        let slack: &mut [f64] = if self.nfaces <= STACK_FACES {
            &mut buf[..self.nfaces]
        } else {
            heap.resize(self.nfaces, 0.0);
            &mut heap
        };
        for (fi, s) in slack.iter_mut().enumerate() {
            let row = &piece.m[fi * stride..(fi + 1) * stride];
            let mut acc = 0.0;
            for j in 0..=n {
                acc += wt[j] * row[j];
            }
            *s = tau + lambda * acc;
        }
        for i in 0..n {
            slack[piece.own[i]] = own_x[i];
        }
        let scale = weight / omega(n);
        slack.iter_mut().for_each(|s| *s = s.recip());
        let inv = &*slack;
        if !gradient {
            out[0] = scale * self.kernel.sum_terms(inv);
            return;
        }
        let mut total = 0.0;
        for (c, fs) in self.kernel.coef.iter().zip(self.kernel.faces.chunks_exact(n)) {
            let term = fs.iter().fold(*c, |acc, &f| acc * inv[f]);
            total += term;
            for &f in fs {
                let r = term * tau * inv[f];
                for (o, q) in out[1..].iter_mut().zip(self.kernel.dual[f].iter()) {
                    *o += r * q;
                }
            }
        }
        out[0] = scale * total;
        for o in out[1..].iter_mut() {
            *o *= scale;
        }
    }

    fn integrate(&self, r: f64, tol: f64, gradient: bool) -> CubatureOutput {
        let lambda = shrink_factor(r);
        let tau = (-r).exp();
        let comps = if gradient { self.n + 1 } else { 1 };
        let regions: Vec<Region> = (0..self.pieces.len()).map(|h| Region::unit(h, self.n)).collect();
        Cubature::new(comps, tol, 0.0)
            .with_max_evaluations(max_evaluations(self.n))
            .integrate(&regions, |h, u, out| self.eval(h, u, lambda, tau, gradient, out))
    }
}

/// Face counts up to this size keep the per-point slacks on the stack.
const STACK_FACES: usize = 512;

fn max_evaluations(n: usize) -> usize {
    match n {
        1 | 2 => 20_000_000,
        3 => 60_000_000,
        _ => 150_000_000,
    }
}

fn to_estimate(out: &CubatureOutput) -> VolumeEstimate {
    VolumeEstimate { value: out.value[0], abs_error_estimate: out.error, evaluations: out.evaluations }
}

fn prepare(p: &Polytope, x: &DVector<f64>, r: f64, tol: f64) -> Result<BallIntegrator> {
    check_radius(r)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    p.check_interior(x)?;
    let shifted = p.translate(&-x);
    let dec = FlagDecomposition::barycentric(&shifted)?;
    Ok(BallIntegrator::new(&shifted, &dec))
}

/// Holmes–Thompson volume of the forward ball `B_P(x, R)` to absolute tolerance `tol`.
pub fn ball_volume(p: &Polytope, x: &DVector<f64>, r: f64, tol: f64) -> Result<VolumeEstimate> {
    let out = prepare(p, x, r, tol)?.integrate(r, tol, false);
    let est = to_estimate(&out);
    if out.converged {
        Ok(est)
    } else {
        Err(Error::ToleranceNotReached(est))
    }
}

/// Like [`ball_volume`] but with an explicit decomposition of `P - x`.
pub fn ball_volume_with_decomposition(
    p: &Polytope,
    x: &DVector<f64>,
    r: f64,
    tol: f64,
    dec: &FlagDecomposition,
) -> Result<VolumeEstimate> {
    check_radius(r)?;
    p.check_interior(x)?;
    let shifted = p.translate(&-x);
    if !dec.is_valid(&shifted, 1e-9) {
        return Err(Error::InvalidArgument("decomposition does not match the translated polytope".into()));
    }
    let out = BallIntegrator::new(&shifted, dec).integrate(r, tol, false);
    let est = to_estimate(&out);
    if out.converged {
        Ok(est)
    } else {
        Err(Error::ToleranceNotReached(est))
    }
}

/// Ball volume together with its gradient with respect to the center `x`.
///
/// Moving the center moves every point of the ball by `e^{-R}` times the
/// displacement, so the gradient is `e^{-R}/ω_n ∫ ∇_y |P^y| dy` over the ball.
pub fn ball_volume_with_gradient(
    p: &Polytope,
    x: &DVector<f64>,
    r: f64,
    tol: f64,
) -> Result<(VolumeEstimate, DVector<f64>)> {
    let out = prepare(p, x, r, tol)?.integrate(r, tol, true);
    let est = to_estimate(&out);
    if !out.converged {
        return Err(Error::ToleranceNotReached(est));
    }
    Ok((est, DVector::from_iterator(p.dim(), out.value[1..].iter().cloned())))
}

/// `(1/ω_n) ∫_K |L^y| dy` for `K` strictly inside `L`.
pub fn ht_volume_of_subset(l: &Polytope, k: &Polytope, tol: f64) -> Result<VolumeEstimate> {
    let n = l.dim();
    if k.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: k.dim() });
    }
    let margin = 1e-9 * l.scale();
    if !k.vertices().iter().all(|v| l.slacks(v).iter().all(|&s| s > margin)) {
        return Err(Error::NotStrictlyContained);
    }
    let c = k.vertex_centroid();
    let kernel = DensityKernel::new(l, &c)?;
    let inner = k.translate(&-&c);
    let dec = FlagDecomposition::barycentric(&inner)?;
    // Plain collapsed coordinates on each flag simplex of K, apex at its centroid.
    let simplices: Vec<(f64, Vec<DVector<f64>>)> = inner
        .flags()
        .iter()
        .map(|flag| {
            let pts: Vec<DVector<f64>> = flag.faces.iter().map(|&id| dec.primal(id).clone()).collect();
            let refs: Vec<&DVector<f64>> = pts[..n].iter().collect();
            (det_columns(&refs).abs(), pts)
        })
        .collect();
    let regions: Vec<Region> = (0..simplices.len()).map(|h| Region::unit(h, n)).collect();
    let w = omega(n);
    let out = Cubature::new(1, tol, 0.0).with_max_evaluations(max_evaluations(n)).integrate(&regions, |h, s, o| {
        let (det, pts) = &simplices[h];
        let mut y = c.clone();
        let mut pi = 1.0;
        let mut jac = *det;
        for i in 0..n {
            // Weight on p(f_{n-i}) is π_i (1 - s_{i+1}).
            y.axpy(pi * (1.0 - s[i]), &pts[n - i], 1.0);
            if i >= 1 {
                jac *= pi;
            }
            pi *= s[i];
        }
        y.axpy(pi, &pts[0], 1.0);
        o[0] = jac * kernel.density(y.as_slice()) / w;
    });
    let est = to_estimate(&out);
    if out.converged {
        Ok(est)
    } else {
        Err(Error::ToleranceNotReached(est))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Polytope {
        Polytope::from_rows(&[vec![1., 1.], vec![1., -1.], vec![-1., 1.], vec![-1., -1.]]).unwrap()
    }

    fn interval() -> Polytope {
        Polytope::from_rows(&[vec![-1.], vec![1.]]).unwrap()
    }

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(x)
    }

    fn hanner(n: usize, r: f64) -> f64 {
        2f64.powi(n as i32) / (factorial(n) * omega(n)) * (2.0 * r.exp() - 1.0).ln().powi(n as i32)
    }

    fn shoelace(pts: &[DVector<f64>]) -> f64 {
        // Sort by angle about the centroid, then apply the shoelace formula.
        let c = pts.iter().fold(DVector::zeros(2), |a, p| a + p) / pts.len() as f64;
        let mut sorted: Vec<&DVector<f64>> = pts.iter().collect();
        sorted.sort_by(|a, b| (a[1] - c[1]).atan2(a[0] - c[0]).partial_cmp(&(b[1] - c[1]).atan2(b[0] - c[0])).unwrap());
        let m = sorted.len();
        (0..m).map(|i| sorted[i][0] * sorted[(i + 1) % m][1] - sorted[(i + 1) % m][0] * sorted[i][1]).sum::<f64>() / 2.0
    }

    #[test]
    fn distance_on_interval() {
        let d = funk_distance(&interval(), &v(&[0.0]), &v(&[0.5])).unwrap();
        assert!((d - 2f64.ln()).abs() < 1e-15);
        assert_eq!(funk_distance(&square(), &v(&[0.2, 0.1]), &v(&[0.2, 0.1])).unwrap(), 0.0);
    }

    #[test]
    fn distance_matches_ray_oracle() {
        // Ray 0 -> (0.3, 0.7) leaves the square through y = 1 at parameter 1/0.7.
        let d = funk_distance(&square(), &v(&[0.0, 0.0]), &v(&[0.3, 0.7])).unwrap();
        let t: f64 = 1.0 / 0.7;
        assert!((d - (t / (t - 1.0)).ln()).abs() < 1e-14);
    }

    #[test]
    fn ball_boundary_is_at_distance_r() {
        let p = Polytope::from_rows(&[vec![2., 0.], vec![0., 1.], vec![-1., -0.5], vec![0.5, -1.]]).unwrap();
        let x = v(&[0.2, 0.0]);
        let r = 1.3;
        let ball = funk_ball(&p, &x, r).unwrap();
        for w in ball.vertices() {
            // Nudge inside P slightly along the ray; the distance is continuous.
            assert!((funk_distance(&p, &x, w).unwrap() - r).abs() < 1e-12);
        }
        assert!(matches!(funk_ball(&p, &x, 0.0), Err(Error::NonpositiveRadius(_))));
    }

    #[test]
    fn density_is_area_of_polar() {
        let sq = square();
        assert!((ht_density(&sq, &v(&[0.0, 0.0])).unwrap() - 2.0).abs() < 1e-14);
        let t = Polytope::from_rows(&[vec![1., 0.], vec![0., 1.], vec![-1., -1.]]).unwrap();
        for y in [v(&[0.0, 0.0]), v(&[0.3, -0.2]), v(&[-0.5, -0.45])] {
            let polar = t.dual_vertices_at(&y).unwrap();
            let exact = shoelace(&polar);
            assert!((ht_density(&t, &y).unwrap() - exact).abs() < 1e-12 * exact);
        }
    }

    #[test]
    fn density_blows_up_at_boundary() {
        let sq = square();
        let a = ht_density(&sq, &v(&[0.99, 0.0])).unwrap();
        let b = ht_density(&sq, &v(&[0.99999, 0.0])).unwrap();
        assert!(b > 100.0 * a);
    }

    #[test]
    fn interval_ball_volume() {
        for r in [0.1, 1.0, 5.0, 20.0] {
            let est = ball_volume(&interval(), &v(&[0.0]), r, 1e-11).unwrap();
            assert!((est.value - hanner(1, r)).abs() < 1e-10, "r={r}: {} vs {}", est.value, hanner(1, r));
        }
    }

    #[test]
    fn square_ball_volume_at_log_two() {
        let r: f64 = 2f64.ln();
        let est = ball_volume(&square(), &v(&[0.0, 0.0]), r, 1e-9).unwrap();
        let exact = 2.0 / std::f64::consts::PI * 3f64.ln().powi(2);
        assert!((est.value - exact).abs() < 1e-8, "{} vs {exact}", est.value);
    }

    #[test]
    fn square_ball_volume_large_radius() {
        let r = 20.0;
        let est = ball_volume(&square(), &v(&[0.0, 0.0]), r, 1e-7).unwrap();
        assert!((est.value - hanner(2, r)).abs() < 1e-6 * hanner(2, r), "{} vs {}", est.value, hanner(2, r));
    }

    #[test]
    fn off_center_interval_matches_closed_form() {
        // On [-1, 1] the ball about x is [x - λ(1 + x), x + λ(1 - x)] and the
        // density is 1/(1 - y) + 1/(1 + y).
        let (x, r) = (0.4f64, 2.0f64);
        let lam = shrink_factor(r);
        let (a, b) = (x - lam * (1.0 + x), x + lam * (1.0 - x));
        let exact = (((1.0 - a) / (1.0 - b)).ln() + ((1.0 + b) / (1.0 + a)).ln()) / 2.0;
        let est = ball_volume(&interval(), &v(&[x]), r, 1e-12).unwrap();
        assert!((est.value - exact).abs() < 1e-11);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let t = Polytope::from_rows(&[vec![3., 0.], vec![0., 1.], vec![0., -1.]]).unwrap();
        let x = v(&[0.8, 0.1]);
        let r = 1.5;
        let (_, g) = ball_volume_with_gradient(&t, &x, r, 1e-11).unwrap();
        let h = 1e-4;
        for i in 0..2 {
            let mut a = x.clone();
            let mut b = x.clone();
            a[i] += h;
            b[i] -= h;
            let fd = (ball_volume(&t, &a, r, 1e-12).unwrap().value - ball_volume(&t, &b, r, 1e-12).unwrap().value)
                / (2.0 * h);
            assert!((g[i] - fd).abs() < 1e-6, "component {i}: {} vs {fd}", g[i]);
        }
    }

    #[test]
    fn subset_volume_agrees_with_ball_volume() {
        let sq = square();
        let r = 1.0;
        let ball = funk_ball(&sq, &v(&[0.0, 0.0]), r).unwrap();
        let a = ht_volume_of_subset(&sq, &ball, 1e-9).unwrap();
        assert!((a.value - hanner(2, r)).abs() < 2e-9);
        let outside = sq.homothety(&v(&[0.0, 0.0]), 1.0);
        assert!(matches!(ht_volume_of_subset(&sq, &outside, 1e-6), Err(Error::NotStrictlyContained)));
    }

    #[test]
    fn non_interior_center_is_rejected() {
        assert!(matches!(ball_volume(&square(), &v(&[1.0, 0.0]), 1.0, 1e-6), Err(Error::PointNotInterior)));
    }
}
