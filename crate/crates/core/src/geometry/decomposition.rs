use nalgebra::DVector;
use rand::Rng;

use super::{FaceId, Flag, Polytope};
use crate::error::{Error, Result};
use crate::factorial;
use crate::linalg::det_columns;

/// Interior points `p(F)` of every face and `q(F)` of every dual face `F°`.
///
/// Both maps are indexed by the primal face id. `p(P)` and `q(∅)` are the
/// origin; `p(∅)` and `q(P)` are unused and stored as zero.
#[derive(Clone, Debug)]
pub struct FlagDecomposition {
    primal: Vec<DVector<f64>>,
    dual: Vec<DVector<f64>>,
}

impl FlagDecomposition {
    /// Vertex barycenters for proper faces and dual faces.
    pub fn barycentric(p: &Polytope) -> Result<Self> {
        Self::with_weights(p, |_, _| 1.0)
    }

    /// Random strictly positive convex combinations; any such choice is valid.
    pub fn random<R: Rng + ?Sized>(p: &Polytope, rng: &mut R) -> Result<Self> {
        Self::with_weights(p, |_, _| rng.gen_range(0.05..1.0))
    }

    /// Builds the decomposition from positive weights; `weight(face, k)` is
    /// the weight of the `k`-th vertex (primal) or the `k`-th dual vertex of
    /// the dual face, called primal first.
    pub fn with_weights(p: &Polytope, mut weight: impl FnMut(FaceId, usize) -> f64) -> Result<Self> {
        let n = p.dim();
        let zero = DVector::zeros(n);
        if !p.is_interior(&zero) {
            return Err(Error::OriginNotInterior);
        }
        let dual_vertices: Vec<DVector<f64>> =
            p.facets().iter().map(|f| &f.normal / f.offset).collect();
        let combine = |points: Vec<(&DVector<f64>, f64)>| -> DVector<f64> {
            let total: f64 = points.iter().map(|(_, w)| w).sum();
            points.iter().fold(DVector::zeros(n), |acc, (x, w)| acc + *x * (*w / total))
        };

        let mut primal = Vec::with_capacity(p.faces().len());
        for (k, face) in p.faces().iter().enumerate() {
            let id = FaceId(k);
            primal.push(if face.dim == n as isize || face.dim < 0 {
                zero.clone()
            } else if face.dim == 0 {
                p.vertices()[face.vertices[0]].clone()
            } else {
                combine(face.vertices.iter().enumerate().map(|(i, &v)| (&p.vertices()[v], weight(id, i))).collect())
            });
        }
        let mut dual = Vec::with_capacity(p.faces().len());
        for (k, face) in p.faces().iter().enumerate() {
            let id = FaceId(k);
            dual.push(if face.dim == n as isize || face.dim < 0 {
                zero.clone()
            } else if face.dim == n as isize - 1 {
                dual_vertices[face.facets[0]].clone()
            } else {
                combine(face.facets.iter().enumerate().map(|(i, &j)| (&dual_vertices[j], weight(id, i))).collect())
            });
        }
        Ok(FlagDecomposition { primal, dual })
    }

    pub fn primal(&self, id: FaceId) -> &DVector<f64> {
        &self.primal[id.0]
    }

    pub fn dual(&self, id: FaceId) -> &DVector<f64> {
        &self.dual[id.0]
    }

    /// Lebesgue volume of `conv{p(f_0), ..., p(f_n)}`.
    pub fn flag_simplex_volume(&self, p: &Polytope, flag: &Flag) -> f64 {
        let n = p.dim();
        let cols: Vec<&DVector<f64>> = flag.faces[..n].iter().map(|&id| self.primal(id)).collect();
        det_columns(&cols).abs() / factorial(n)
    }

    /// Checks that every stored point lies in the relative interior of its face.
    pub fn is_valid(&self, p: &Polytope, tol: f64) -> bool {
        let n = p.dim() as isize;
        let scale = p.scale().max(1.0);
        p.faces().iter().enumerate().all(|(k, face)| {
            if face.dim == n || face.dim < 0 {
                return true;
            }
            let x = &self.primal[k];
            let primal_ok = p.facets().iter().enumerate().all(|(j, f)| {
                let s = f.offset - f.normal.dot(x);
                if face.facets.contains(&j) { s.abs() <= tol * scale } else { s > tol * scale }
            });
            let q = &self.dual[k];
            let dual_ok = p.vertices().iter().enumerate().all(|(v, w)| {
                let s = 1.0 - q.dot(w);
                if face.vertices.contains(&v) { s.abs() <= tol } else { s > tol }
            });
            primal_ok && dual_ok
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn square() -> Polytope {
        Polytope::from_rows(&[vec![1., 1.], vec![1., -1.], vec![-1., 1.], vec![-1., -1.]]).unwrap()
    }

    fn shoelace(v: &[[f64; 2]]) -> f64 {
        let n = v.len();
        (0..n).map(|i| v[i][0] * v[(i + 1) % n][1] - v[(i + 1) % n][0] * v[i][1]).sum::<f64>().abs() / 2.0
    }

    #[test]
    fn square_flag_simplices_are_equal() {
        let sq = square();
        let d = FlagDecomposition::barycentric(&sq).unwrap();
        for f in sq.flags() {
            assert!((d.flag_simplex_volume(&sq, f) - 0.5).abs() < 1e-14);
        }
        assert!(d.is_valid(&sq, 1e-9));
        assert_eq!(d.primal(sq.whole()).norm(), 0.0);
    }

    #[test]
    fn triangle_flag_simplices_tile() {
        let t = Polytope::from_rows(&[vec![1., 0.], vec![0., 1.], vec![-1., -1.]]).unwrap();
        let area = shoelace(&[[1., 0.], [0., 1.], [-1., -1.]]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in [FlagDecomposition::barycentric(&t).unwrap(), FlagDecomposition::random(&t, &mut rng).unwrap()] {
            let total: f64 = t.flags().iter().map(|f| d.flag_simplex_volume(&t, f)).sum();
            assert!((total - area).abs() < 1e-12 * area);
            assert!(d.is_valid(&t, 1e-9));
        }
    }

    #[test]
    fn origin_must_be_interior() {
        let t = Polytope::from_rows(&[vec![0., 0.], vec![1., 0.], vec![0., 1.]]).unwrap();
        assert!(matches!(FlagDecomposition::barycentric(&t), Err(Error::OriginNotInterior)));
    }
}
