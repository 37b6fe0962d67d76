//! Deterministic adaptive cubature over boxes.
//!
//! Dimension 1 uses Gauss-Kronrod 7/15, higher dimensions the Genz-Malik
//! degree 7 rule with its embedded degree 5 rule. Refinement is global: every
//! box whose error exceeds `tol / #boxes` is bisected along the axis with the
//! largest fourth difference. Boxes are evaluated in parallel and all sums are
//! taken in list order, so results do not depend on the thread count.

use rayon::prelude::*;

use crate::linalg::NeumaierSum;

/// An axis-aligned region `[lo, hi]` tagged with the integrand piece it belongs to.
#[derive(Clone, Debug)]
pub struct Region {
    pub piece: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Region {
    pub fn unit(piece: usize, dim: usize) -> Self {
        Region { piece, lo: vec![0.0; dim], hi: vec![1.0; dim] }
    }
}

#[derive(Clone, Debug)]
pub struct CubatureOutput {
    pub value: Vec<f64>,
    /// Sum over boxes of the largest per-component error estimate.
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct Cubature {
    pub components: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evaluations: usize,
    pub max_depth: usize,
}

impl Cubature {
    pub fn new(components: usize, abs_tol: f64, rel_tol: f64) -> Self {
        Cubature { components, abs_tol, rel_tol, max_evaluations: 50_000_000, max_depth: 40 }
    }

    pub fn with_max_evaluations(mut self, max: usize) -> Self {
        self.max_evaluations = max;
        self
    }

    /// Integrates `f(piece, x, out)` over the union of `regions`, which must
    /// share one dimension. `out` has length `components` and is zeroed.
    pub fn integrate<F>(&self, regions: &[Region], f: F) -> CubatureOutput
    where
        F: Fn(usize, &[f64], &mut [f64]) + Sync,
    {
        let m = self.components;
        if regions.is_empty() {
            return CubatureOutput { value: vec![0.0; m], error: 0.0, evaluations: 0, converged: true };
        }
        let dim = regions[0].lo.len();
        let rule = Rule::new(dim);
        let eval = |r: &Region, depth: usize| rule.apply(r, depth, m, &f);

        let mut boxes: Vec<Cell> = regions.par_iter().map(|r| eval(r, 0)).collect();
        let mut evaluations = boxes.len() * rule.points;
        loop {
            let (value, error) = totals(&boxes, m);
            let scale = value.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let tol = self.abs_tol.max(self.rel_tol * scale);
            let done = |converged| CubatureOutput { value: value.clone(), error, evaluations, converged };
            if error <= tol {
                return done(true);
            }
            let threshold = tol / boxes.len() as f64;
            let (split, keep): (Vec<Cell>, Vec<Cell>) = boxes
                .into_iter()
                .partition(|c| c.error > threshold && c.depth < self.max_depth);
            if split.is_empty() || evaluations + 2 * split.len() * rule.points > self.max_evaluations {
                return done(false);
            }
            evaluations += 2 * split.len() * rule.points;
            let children: Vec<Cell> = split
                .par_iter()
                .flat_map_iter(|c| {
                    let (a, b) = c.region.bisect(c.axis);
                    [eval(&a, c.depth + 1), eval(&b, c.depth + 1)]
                })
                .collect();
            // `partition` and the indexed parallel collect both preserve order,
            // so the box list evolves identically for any thread count.
            boxes = keep;
            boxes.extend(children);
        }
    }
}

fn totals(boxes: &[Cell], m: usize) -> (Vec<f64>, f64) {
    let mut sums = vec![NeumaierSum::default(); m];
    let mut err = NeumaierSum::default();
    for c in boxes {
        for (s, v) in sums.iter_mut().zip(&c.value) {
            s.add(*v);
        }
        err.add(c.error);
    }
    (sums.iter().map(|s| s.value()).collect(), err.value())
}

impl Region {
    fn bisect(&self, axis: usize) -> (Region, Region) {
        let mid = 0.5 * (self.lo[axis] + self.hi[axis]);
        let mut a = self.clone();
        let mut b = self.clone();
        a.hi[axis] = mid;
        b.lo[axis] = mid;
        (a, b)
    }
}

struct Cell {
    region: Region,
    value: Vec<f64>,
    error: f64,
    axis: usize,
    depth: usize,
}

const GK_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const GAUSS7_WEIGHTS: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

struct Rule {
    dim: usize,
    points: usize,
}

impl Rule {
    fn new(dim: usize) -> Self {
        let points = if dim == 1 { 15 } else { 1 + 4 * dim + 2 * dim * (dim - 1) + (1 << dim) };
        Rule { dim, points }
    }

    fn apply<F>(&self, region: &Region, depth: usize, m: usize, f: &F) -> Cell
    where
        F: Fn(usize, &[f64], &mut [f64]),
    {
        if self.dim == 1 {
            self.gauss_kronrod(region, depth, m, f)
        } else {
            self.genz_malik(region, depth, m, f)
        }
    }

    fn gauss_kronrod<F>(&self, region: &Region, depth: usize, m: usize, f: &F) -> Cell
    where
        F: Fn(usize, &[f64], &mut [f64]),
    {
        let c = 0.5 * (region.lo[0] + region.hi[0]);
        let h = 0.5 * (region.hi[0] - region.lo[0]);
        let mut kron = vec![0.0; m];
        let mut gauss = vec![0.0; m];
        let mut out = vec![0.0; m];
        let mut x = [0.0];
        for (k, (&node, &w)) in GK_NODES.iter().zip(&GK_WEIGHTS).enumerate() {
            let signs: &[f64] = if k == 7 { &[1.0] } else { &[-1.0, 1.0] };
            for &s in signs {
                x[0] = c + s * h * node;
                out.iter_mut().for_each(|o| *o = 0.0);
                f(region.piece, &x, &mut out);
                for i in 0..m {
                    kron[i] += w * out[i];
                    if k % 2 == 1 {
                        gauss[i] += GAUSS7_WEIGHTS[k / 2] * out[i];
                    }
                }
            }
        }
        let value: Vec<f64> = kron.iter().map(|v| v * h).collect();
        let error = (0..m).map(|i| ((kron[i] - gauss[i]) * h).abs()).fold(0.0, f64::max);
        Cell { region: region.clone(), value, error, axis: 0, depth }
    }

    fn genz_malik<F>(&self, region: &Region, depth: usize, m: usize, f: &F) -> Cell
    where
        F: Fn(usize, &[f64], &mut [f64]),
    {
        let n = self.dim;
        let nf = n as f64;
        let l2 = (9.0f64 / 70.0).sqrt();
        let l4 = (9.0f64 / 10.0).sqrt();
        let l5 = (9.0f64 / 19.0).sqrt();
        let c: Vec<f64> = (0..n).map(|i| 0.5 * (region.lo[i] + region.hi[i])).collect();
        let h: Vec<f64> = (0..n).map(|i| 0.5 * (region.hi[i] - region.lo[i])).collect();
        let volume: f64 = h.iter().map(|x| 2.0 * x).product();

        let mut x = c.clone();
        let mut out = vec![0.0; m];
        let sample = |x: &[f64], out: &mut Vec<f64>| {
            out.iter_mut().for_each(|o| *o = 0.0);
            f(region.piece, x, out);
        };

        sample(&x, &mut out);
        let f0 = out.clone();
        let mut s2 = vec![0.0; m];
        let mut s3 = vec![0.0; m];
        let mut s4 = vec![0.0; m];
        let mut s5 = vec![0.0; m];
        let mut diff = vec![0.0; n];
        for i in 0..n {
            let mut a2 = vec![0.0; m];
            let mut a3 = vec![0.0; m];
            for s in [-1.0, 1.0] {
                x[i] = c[i] + s * l2 * h[i];
                sample(&x, &mut out);
                a2.iter_mut().zip(&out).for_each(|(a, o)| *a += o);
                x[i] = c[i] + s * l4 * h[i];
                sample(&x, &mut out);
                a3.iter_mut().zip(&out).for_each(|(a, o)| *a += o);
            }
            x[i] = c[i];
            diff[i] = (0..m).map(|k| (a2[k] - 2.0 * f0[k] - (a3[k] - 2.0 * f0[k]) / 7.0).abs()).sum();
            for k in 0..m {
                s2[k] += a2[k];
                s3[k] += a3[k];
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                for (si, sj) in [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
                    x[i] = c[i] + si * l4 * h[i];
                    x[j] = c[j] + sj * l4 * h[j];
                    sample(&x, &mut out);
                    s4.iter_mut().zip(&out).for_each(|(a, o)| *a += o);
                }
                x[i] = c[i];
                x[j] = c[j];
            }
        }
        for corner in 0..(1usize << n) {
            for i in 0..n {
                let s = if corner >> i & 1 == 1 { 1.0 } else { -1.0 };
                x[i] = c[i] + s * l5 * h[i];
            }
            sample(&x, &mut out);
            s5.iter_mut().zip(&out).for_each(|(a, o)| *a += o);
        }

        let w1 = (12824.0 - 9120.0 * nf + 400.0 * nf * nf) / 19683.0;
        let w2 = 980.0 / 6561.0;
        let w3 = (1820.0 - 400.0 * nf) / 19683.0;
        let w4 = 200.0 / 19683.0;
        let w5 = 6859.0 / 19683.0 / (1u64 << n) as f64;
        let e1 = (729.0 - 950.0 * nf + 50.0 * nf * nf) / 729.0;
        let e2 = 245.0 / 486.0;
        let e3 = (265.0 - 100.0 * nf) / 1458.0;
        let e4 = 25.0 / 729.0;
        let mut value = vec![0.0; m];
        let mut error = 0.0f64;
        for k in 0..m {
            let seven = w1 * f0[k] + w2 * s2[k] + w3 * s3[k] + w4 * s4[k] + w5 * s5[k];
            let five = e1 * f0[k] + e2 * s2[k] + e3 * s3[k] + e4 * s4[k];
            value[k] = volume * seven;
            error = error.max(volume * (seven - five).abs());
        }
        // Ties go to the widest axis so that flat integrands still get split evenly.
        let mut axis = 0;
        for i in 1..n {
            let better = diff[i] > diff[axis] * (1.0 + 1e-12)
                || ((diff[i] - diff[axis]).abs() <= 1e-12 * diff[axis].max(1e-300) && h[i] > h[axis]);
            if better {
                axis = i;
            }
        }
        Cell { region: region.clone(), value, error, axis, depth }
    }
}
