//! Adaptive Dormand–Prince 5(4) integration of scalar ODEs with tabulated output.

use crate::error::{Error, Result};

/// Accepted steps of a scalar solution, interpolated by cubic Hermite
/// polynomials through the exact values and slopes at the step endpoints.
#[derive(Clone, Debug)]
pub struct OdeSolution {
    t: Vec<f64>,
    y: Vec<f64>,
    dy: Vec<f64>,
}

impl OdeSolution {
    pub fn t_end(&self) -> f64 {
        *self.t.last().unwrap()
    }

    pub fn y_end(&self) -> f64 {
        *self.y.last().unwrap()
    }

    pub fn steps(&self) -> usize {
        self.t.len() - 1
    }

    /// Value at `t` inside the integration range.
    pub fn eval(&self, t: f64) -> Option<f64> {
        let (t0, t1) = (self.t[0], self.t_end());
        let slack = 1e-12 * (1.0 + t1.abs());
        if !(t >= t0 - slack && t <= t1 + slack) {
            return None;
        }
        let t = t.clamp(t0, t1);
        let k = match self.t.partition_point(|&s| s <= t) {
            0 => 0,
            i if i >= self.t.len() => self.t.len() - 2,
            i => i - 1,
        };
        let h = self.t[k + 1] - self.t[k];
        let s = (t - self.t[k]) / h;
        let (h00, h10, h01, h11) =
            (2.0 * s * s * s - 3.0 * s * s + 1.0, s * s * s - 2.0 * s * s + s, -2.0 * s * s * s + 3.0 * s * s, s * s * s - s * s);
        Some(h00 * self.y[k] + h10 * h * self.dy[k] + h01 * self.y[k + 1] + h11 * h * self.dy[k + 1])
    }
}

#[derive(Clone, Debug)]
pub struct DormandPrince {
    pub atol: f64,
    pub rtol: f64,
    /// Upper bound on the step, which also bounds the interpolation error.
    pub h_max: f64,
    pub max_steps: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

impl DormandPrince {
    /// The step cap keeps the cubic Hermite error `h^4 |y''''| / 384` near `tol`.
    pub fn new(tol: f64) -> Self {
        DormandPrince { atol: tol, rtol: tol, h_max: (4.0 * tol.powf(0.25)).min(0.05), max_steps: 10_000_000 }
    }

    /// Integrates `y' = f(t, y)` from `(t0, y0)` to `t1 > t0`.
    pub fn solve<F: Fn(f64, f64) -> f64>(&self, f: F, t0: f64, y0: f64, t1: f64) -> Result<OdeSolution> {
        let mut sol = OdeSolution { t: vec![t0], y: vec![y0], dy: vec![f(t0, y0)] };
        if t1 <= t0 {
            return Ok(sol);
        }
        let (mut t, mut y) = (t0, y0);
        let mut k = [0.0f64; 7];
        k[0] = sol.dy[0];
        let mut h = (1e-6 * (t1 - t0)).min(self.h_max);
        for _ in 0..self.max_steps {
            if t >= t1 {
                return Ok(sol);
            }
            let last = t + h >= t1;
            if last {
                h = t1 - t;
            }
            for s in 1..7 {
                let ys = y + h * (0..s).map(|j| A[s][j] * k[j]).sum::<f64>();
                k[s] = f(t + C[s] * h, ys);
            }
            let y5 = y + h * (0..6).map(|j| A[6][j] * k[j]).sum::<f64>();
            let err = h * (0..7).map(|j| (A[6].get(j).copied().unwrap_or(0.0) - B4[j]) * k[j]).sum::<f64>();
            let scale = self.atol + self.rtol * y.abs().max(y5.abs());
            let ratio = err.abs() / scale;
            if ratio <= 1.0 {
                t = if last { t1 } else { t + h };
                y = y5;
                sol.t.push(t);
                sol.y.push(y);
                sol.dy.push(k[6]);
                k[0] = k[6];
            }
            let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * factor).min(self.h_max);
            if h <= 1e-14 * (1.0 + t.abs()) {
                return Err(Error::OdeToleranceNotReached(t));
            }
        }
        Err(Error::OdeToleranceNotReached(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let sol = DormandPrince::new(1e-11).solve(|_, y| y, 0.0, 1.0, 3.0).unwrap();
        assert!((sol.y_end() - 3f64.exp()).abs() < 1e-9 * 3f64.exp());
        let mid = sol.eval(1.2345).unwrap();
        assert!((mid - 1.2345f64.exp()).abs() < 1e-8);
        assert!(sol.eval(3.5).is_none());
    }

    #[test]
    fn pure_quadrature() {
        let sol = DormandPrince::new(1e-12).solve(|t, _| t.cos(), 0.0, 0.0, 10.0).unwrap();
        for t in [0.0, 0.3, 4.1, 10.0] {
            assert!((sol.eval(t).unwrap() - t.sin()).abs() < 1e-10);
        }
    }
}
