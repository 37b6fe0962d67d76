use nalgebra::{DMatrix, DVector};

use super::Polytope;
use crate::error::{Error, Result};

/// Projective map `x -> (A x + b) / (<c, x> + d)` given by an `(n+1) x (n+1)` matrix
/// `[[A, b], [c^T, d]]`.
#[derive(Clone, Debug)]
pub struct Collineation {
    matrix: DMatrix<f64>,
}

impl Collineation {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() < 2 {
            return Err(Error::InvalidArgument("collineation matrix must be square, size >= 2".into()));
        }
        if matrix.clone().lu().determinant().abs() < 1e-12 {
            return Err(Error::InvalidArgument("collineation matrix is singular".into()));
        }
        Ok(Collineation { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Image of a point; `None` when the denominator is not positive.
    pub fn apply(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        let n = self.dim();
        let hom = DVector::from_iterator(n + 1, x.iter().cloned().chain(std::iter::once(1.0)));
        let y = &self.matrix * hom;
        let w = y[n];
        (w > 1e-12).then(|| DVector::from_iterator(n, y.iter().take(n).map(|v| v / w)))
    }

    /// Image of a polytope. A positive denominator at every vertex keeps the
    /// whole polytope on the affine side, since the denominator is affine.
    pub fn apply_polytope(&self, p: &Polytope) -> Result<Polytope> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: p.dim() });
        }
        let images: Option<Vec<DVector<f64>>> = p.vertices().iter().map(|v| self.apply(v)).collect();
        Polytope::from_vertices(&images.ok_or(Error::MapsThroughInfinity)?)
    }
}

/// Applies the collineation with matrix `m` to `p`.
pub fn apply_collineation(p: &Polytope, m: &DMatrix<f64>) -> Result<Polytope> {
    Collineation::new(m.clone())?.apply_polytope(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Polytope {
        Polytope::from_rows(&[vec![1., 1.], vec![1., -1.], vec![-1., 1.], vec![-1., -1.]]).unwrap()
    }

    #[test]
    fn identity_and_linear() {
        let sq = square();
        let id = apply_collineation(&sq, &DMatrix::identity(3, 3)).unwrap();
        assert_eq!(id.vertices().len(), 4);
        let m = DMatrix::from_row_slice(3, 3, &[2., 0., 0., 0., 1., 0., 0., 0., 1.]);
        let lin = apply_collineation(&sq, &m).unwrap();
        assert!((lin.volume() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn projective_image_keeps_flag_count() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.1, -0.1, 0.9, 0.0, 0.15, -0.1, 1.0]);
        let q = apply_collineation(&square(), &m).unwrap();
        assert_eq!(q.vertices().len(), 4);
        assert_eq!(q.num_flags(), 8);
    }

    #[test]
    fn through_infinity_is_rejected() {
        let m = DMatrix::from_row_slice(3, 3, &[1., 0., 0., 0., 1., 0., 1.0, 0., 0.5]);
        assert!(matches!(apply_collineation(&square(), &m), Err(Error::MapsThroughInfinity)));
    }
}
