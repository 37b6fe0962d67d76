use nalgebra::{DMatrix, DVector};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Determinant of the square matrix whose columns are `cols`.
pub(crate) fn det_columns(cols: &[&DVector<f64>]) -> f64 {
    let n = cols.len();
    if n == 0 {
        return 1.0;
    }
    let m = DMatrix::from_fn(n, n, |r, c| cols[c][r]);
    m.determinant()
}

/// Numerical rank of a set of vectors (rows), relative to the largest singular value.
pub(crate) fn rank(rows: &[DVector<f64>], rel_tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let n = rows[0].len();
    let m = DMatrix::from_fn(rows.len(), n, |r, c| rows[r][c]);
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Compensated summation keeps reductions over many flag contributions stable.
#[derive(Default, Clone, Copy)]
pub(crate) struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_and_rank() {
        let a = DVector::from_vec(vec![2.0, 0.0]);
        let b = DVector::from_vec(vec![1.0, 3.0]);
        assert!((det_columns(&[&a, &b]) - 6.0).abs() < 1e-12);
        assert_eq!(rank(&[a.clone(), b.clone()], 1e-12), 2);
        assert_eq!(rank(&[a.clone(), a * 2.0], 1e-12), 1);
    }

    #[test]
    fn compensated_sum() {
        let mut s = NeumaierSum::default();
        for x in [1e16, 1.0, -1e16, 1.0] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }
}
