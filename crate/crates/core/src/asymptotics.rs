//! Coefficients of the large-radius expansion
//! `ω_n volht(B_P(x, R)) = c0 R^n + c1 R^{n-1} + o(R^{n-1})`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::funk::ball_volume;
use crate::geometry::{FaceId, FlagDecomposition, Polytope};
use crate::linalg::NeumaierSum;
use crate::{factorial, omega};

/// Threshold below which a pairing `1 - <q, v>` counts as degenerate.
pub const PAIRING_EPS: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticCoeffs {
    pub c0: f64,
    pub c1: f64,
    /// `(flag index, log(1 - <q((rf)_{n-1}), f_0>))`, in flag order.
    pub summands: Vec<(usize, f64)>,
}

/// `|flags(P)| / (n!)^2`.
pub fn c0(p: &Polytope) -> f64 {
    let nf = factorial(p.dim());
    p.num_flags() as f64 / (nf * nf)
}

/// `n / (n!)^2 = 1 / (n! (n-1)!)`.
fn c1_prefactor(n: usize) -> f64 {
    1.0 / (factorial(n) * factorial(n - 1))
}

/// Dual vertex `a / b` of facet `<a, x> <= b`; the origin must be interior.
fn dual_vertex(p: &Polytope, facet: FaceId) -> DVector<f64> {
    let f = p.facet_of(facet);
    &f.normal / f.offset
}

fn log_pairing(s: f64) -> Result<f64> {
    if s <= PAIRING_EPS {
        Err(Error::DegeneratePairing(s))
    } else {
        Ok(s.ln())
    }
}

/// `c1` from the complete flip: `n/(n!)^2 Σ_f log(1 - <q((rf)_{n-1}), f_0>)`.
pub fn c1_flip(p: &Polytope) -> Result<AsymptoticCoeffs> {
    let n = p.dim();
    if !p.is_interior(&DVector::zeros(n)) {
        return Err(Error::OriginNotInterior);
    }
    let mut summands = Vec::with_capacity(p.num_flags());
    let mut total = NeumaierSum::default();
    for (k, flag) in p.flags().iter().enumerate() {
        let rf = p.complete_flip(flag);
        let q = dual_vertex(p, rf.face(n - 1));
        let v = p.vertex_of(flag.face(0));
        let term = log_pairing(1.0 - q.dot(v))?;
        total.add(term);
        summands.push((k, term));
    }
    Ok(AsymptoticCoeffs { c0: c0(p), c1: c1_prefactor(n) * total.value(), summands })
}

/// `L(F, G) = log(1 - <q(F), p(G)>)`, zero when `G` is the whole polytope.
fn pairing_log(p: &Polytope, dec: &FlagDecomposition, f: FaceId, g: FaceId) -> Result<f64> {
    if g == p.whole() {
        return Ok(0.0);
    }
    log_pairing(1.0 - dec.dual(f).dot(dec.primal(g)))
}

/// Per-flag, per-position contributions of the neighbouring dual flag
/// simplices, `terms[flag * n + i]`, with `f' = r_i f`:
/// `L(f'_0, f_0) - L(f'_0, f_1)` for `i = 0` and
/// `L(f'_i, f_i) + L(f_{i-1}, f_{i+1}) - L(f_{i-1}, f_i) - L(f'_i, f_{i+1})` otherwise.
/// Each is nonnegative; the `L(f_{i-1}, ·)` parts cancel against the
/// self-pairing terms when summed into `c1`.
pub fn neighbour_terms(p: &Polytope, dec: &FlagDecomposition) -> Result<Vec<f64>> {
    let n = p.dim();
    let mut terms = Vec::with_capacity(p.num_flags() * n);
    for flag in p.flags() {
        for i in 0..n {
            let other = p.flip(flag, i).face(i);
            let mut t = pairing_log(p, dec, other, flag.face(i))? - pairing_log(p, dec, other, flag.face(i + 1))?;
            if i > 0 {
                let prev = flag.face(i - 1);
                t += pairing_log(p, dec, prev, flag.face(i + 1))? - pairing_log(p, dec, prev, flag.face(i))?;
            }
            terms.push(t);
        }
    }
    Ok(terms)
}

/// `c1` through an arbitrary decomposition; independent of the decomposition.
pub fn c1_decomposed(p: &Polytope, dec: &FlagDecomposition) -> Result<f64> {
    let n = p.dim();
    let mut total = NeumaierSum::default();
    for flag in p.flags() {
        for i in 0..n {
            let other = p.flip(flag, i).face(i);
            total.add(pairing_log(p, dec, other, flag.face(i))?);
            total.add(-pairing_log(p, dec, other, flag.face(i + 1))?);
        }
    }
    Ok(c1_prefactor(p.dim()) * total.value())
}

/// `c1(P, x)`: the second coefficient for balls centred at `x`.
///
/// Each summand is `log(1 - <q/(1 - <q, x>), f_0 - x>)` with `q` the dual
/// vertex of `(rf)_{n-1}`, i.e. the complete-flip formula for `P - x`.
pub fn c1_at_point(p: &Polytope, x: &DVector<f64>) -> Result<f64> {
    p.check_interior(x)?;
    let n = p.dim();
    let mut total = NeumaierSum::default();
    for flag in p.flags() {
        let rf = p.complete_flip(flag);
        let f = p.facet_of(rf.face(n - 1));
        let slack_x = f.offset - f.normal.dot(x);
        let qx = &f.normal / slack_x;
        let v = p.vertex_of(flag.face(0));
        total.add(log_pairing(1.0 - qx.dot(&(v - x)))?);
    }
    Ok(c1_prefactor(n) * total.value())
}

/// Facet weights `|flags(F)|` and the barrier form of `c1(P, ·)`:
/// `c1(P, x) = c1(P, 0) - n/(n!)^2 Σ_F |flags(F)| log(1 - <q(F), x>)`.
pub(crate) struct FacetBarrier {
    pub weights: Vec<f64>,
    pub duals: Vec<DVector<f64>>,
}

impl FacetBarrier {
    pub fn new(p: &Polytope) -> Result<Self> {
        if !p.is_interior(&DVector::zeros(p.dim())) {
            return Err(Error::OriginNotInterior);
        }
        let weights = p.facet_flag_counts().into_iter().map(|c| c as f64).collect();
        let duals = (0..p.facets().len()).map(|j| dual_vertex(p, p.facet_face(j))).collect();
        Ok(FacetBarrier { weights, duals })
    }

    /// Slacks `1 - <q(F), z>`.
    pub fn slacks(&self, z: &DVector<f64>) -> Vec<f64> {
        self.duals.iter().map(|q| 1.0 - q.dot(z)).collect()
    }

    /// `-Σ w_F log(1 - <q(F), z>)`, or `None` outside the polytope.
    pub fn value(&self, z: &DVector<f64>) -> Option<f64> {
        let mut acc = NeumaierSum::default();
        for (w, s) in self.weights.iter().zip(self.slacks(z)) {
            if s <= 0.0 {
                return None;
            }
            acc.add(-w * s.ln());
        }
        Some(acc.value())
    }

    pub fn gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(z.len());
        for ((w, q), s) in self.weights.iter().zip(&self.duals).zip(self.slacks(z)) {
            g.axpy(w / s, q, 1.0);
        }
        g
    }

    pub fn hessian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let n = z.len();
        let mut h = DMatrix::zeros(n, n);
        for ((w, q), s) in self.weights.iter().zip(&self.duals).zip(self.slacks(z)) {
            h.ger(w / (s * s), q, q, 1.0);
        }
        h
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoefficientFit {
    pub c0: f64,
    pub c1: f64,
    /// Coefficient of the auxiliary `R^{n-2}` regressor.
    pub c2: f64,
    /// Root-mean-square residual of `ω_n V(R)` over the grid.
    pub rms_residual: f64,
    /// `(R, ω_n V(R))` samples used for the fit.
    pub samples: Vec<(f64, f64)>,
}

/// Least-squares fit of `ω_n V(R)` against `R^n, R^{n-1}, R^{n-2}`.
///
/// Each volume is computed to absolute tolerance `rel_tol · c0 R^n / ω_n`.
pub fn fit_coeffs_numeric(p: &Polytope, x: &DVector<f64>, grid: &[f64], rel_tol: f64) -> Result<CoefficientFit> {
    let n = p.dim();
    let w = omega(n);
    let lead = c0(p);
    let samples: Vec<(f64, f64)> = grid
        .iter()
        .map(|&r| Ok((r, w * ball_volume(p, x, r, rel_tol * lead * r.powi(n as i32) / w)?.value)))
        .collect::<Result<_>>()?;
    fit_samples(n, &samples)
}

/// The regression behind [`fit_coeffs_numeric`] for precomputed samples.
pub fn fit_samples(n: usize, samples: &[(f64, f64)]) -> Result<CoefficientFit> {
    if samples.len() < 3 {
        return Err(Error::InvalidArgument("at least three radii are required".into()));
    }
    if samples.windows(2).any(|s| s[1].0 <= s[0].0) {
        return Err(Error::InvalidArgument("radius grid must be strictly increasing".into()));
    }
    if samples.last().unwrap().0 < 15.0 {
        return Err(Error::InvalidArgument("largest radius must be at least 15".into()));
    }
    let m = samples.len();
    // Scale columns by powers of the largest radius to keep the system well conditioned.
    let rmax = samples.last().unwrap().0;
    let a = DMatrix::from_fn(m, 3, |i, j| (samples[i].0 / rmax).powi(n as i32 - j as i32));
    let b = DVector::from_iterator(m, samples.iter().map(|s| s.1 / rmax.powi(n as i32)));
    let sol = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::InvalidArgument(format!("least squares failed: {e}")))?;
    let resid = (&a * &sol - &b) * rmax.powi(n as i32);
    Ok(CoefficientFit {
        c0: sol[0],
        c1: sol[1] * rmax,
        c2: sol[2] * rmax * rmax,
        rms_residual: (resid.norm_squared() / m as f64).sqrt(),
        samples: samples.to_vec(),
    })
}

/// Whether `<q((rf)_{n-1}), -f_0> = 1` for every flag: the flip image of each
/// flag's facet contains the antipode of its vertex.
pub fn flag_equality_check(p: &Polytope) -> Result<bool> {
    let n = p.dim();
    if !p.is_centrally_symmetric(1e-9) {
        return Err(Error::NotCentrallySymmetric);
    }
    let expected = (1usize << n) * (1..=n).product::<usize>();
    let found = p.num_flags();
    if found != expected {
        return Err(Error::WrongFlagCount { expected, found });
    }
    Ok(p.flags().iter().all(|flag| {
        let q = dual_vertex(p, p.complete_flip(flag).face(n - 1));
        (-q.dot(p.vertex_of(flag.face(0))) - 1.0).abs() <= 1e-9
    }))
}
