//! Polytopes, face lattices, flags and the maps acting on them.

mod collineation;
mod decomposition;
mod hull;

use std::collections::HashMap;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

pub use collineation::{apply_collineation, Collineation};
pub use decomposition::FlagDecomposition;

use crate::error::{Error, Result};
use crate::factorial;
use crate::linalg::det_columns;

/// Relative tolerance for incidence decisions.
pub const INCIDENCE_EPS: f64 = 1e-9;

/// Index of a face in [`Polytope::faces`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FaceId(pub usize);

/// Facet inequality `<normal, x> <= offset` with a unit normal.
#[derive(Clone, Debug)]
pub struct Facet {
    pub normal: DVector<f64>,
    pub offset: f64,
}

/// A closed face, stored by its vertex set.
#[derive(Clone, Debug)]
pub struct Face {
    /// `-1` for the empty face, `n` for the polytope itself.
    pub dim: isize,
    /// Sorted vertex indices.
    pub vertices: Vec<usize>,
    /// Sorted indices of the facets containing this face.
    pub facets: Vec<usize>,
    /// Faces one dimension down contained in this face.
    pub subfaces: Vec<FaceId>,
    /// Faces one dimension up containing this face.
    pub superfaces: Vec<FaceId>,
}

/// A maximal chain `f_0 ⊂ f_1 ⊂ ... ⊂ f_n`; entry `i` has dimension `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Flag {
    pub faces: Vec<FaceId>,
}

impl Flag {
    pub fn face(&self, i: usize) -> FaceId {
        self.faces[i]
    }
}

/// Full-dimensional convex polytope with its complete face lattice.
///
/// Immutable after construction; flags are enumerated lazily and cached.
#[derive(Debug)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<DVector<f64>>,
    facets: Vec<Facet>,
    faces: Vec<Face>,
    /// `by_dim[d + 1]` lists the faces of dimension `d`.
    by_dim: Vec<Vec<FaceId>>,
    vertex_face: Vec<FaceId>,
    facet_face: Vec<FaceId>,
    flags: OnceLock<Vec<Flag>>,
}

impl Clone for Polytope {
    fn clone(&self) -> Self {
        Polytope {
            dim: self.dim,
            vertices: self.vertices.clone(),
            facets: self.facets.clone(),
            faces: self.faces.clone(),
            by_dim: self.by_dim.clone(),
            vertex_face: self.vertex_face.clone(),
            facet_face: self.facet_face.clone(),
            flags: self.flags.clone(),
        }
    }
}

impl Polytope {
    /// Convex hull of `points`; points that are not extreme are dropped.
    pub fn from_vertices(points: &[DVector<f64>]) -> Result<Polytope> {
        let hull = hull::convex_hull(points, INCIDENCE_EPS)?;
        let n = points[0].len();
        Self::from_hull(n, hull.vertices, hull.facets, hull.incidence)
    }

    /// Convenience wrapper over [`Polytope::from_vertices`] for row slices.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Polytope> {
        let pts: Vec<DVector<f64>> = rows.iter().map(|r| DVector::from_row_slice(r)).collect();
        Self::from_vertices(&pts)
    }

    fn from_hull(
        n: usize,
        vertices: Vec<DVector<f64>>,
        facets: Vec<Facet>,
        incidence: Vec<Vec<usize>>,
    ) -> Result<Polytope> {
        let nv = vertices.len();
        let mut vertex_facets: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for (j, on) in incidence.iter().enumerate() {
            for &v in on {
                vertex_facets[v].push(j);
            }
        }
        let facets_of = |verts: &[usize]| -> Vec<usize> {
            let mut acc: Option<Vec<usize>> = None;
            for &v in verts {
                let fs = &vertex_facets[v];
                acc = Some(match acc {
                    None => fs.clone(),
                    Some(a) => a.into_iter().filter(|j| fs.contains(j)).collect(),
                });
            }
            acc.unwrap_or_else(|| (0..incidence.len()).collect())
        };

        let mut faces: Vec<Face> = Vec::new();
        let mut index: HashMap<Vec<usize>, FaceId> = HashMap::new();
        let mut by_dim: Vec<Vec<FaceId>> = vec![Vec::new(); n + 2];
        let push = |faces: &mut Vec<Face>, by_dim: &mut Vec<Vec<FaceId>>, dim: isize, verts: Vec<usize>, fs: Vec<usize>| {
            let id = FaceId(faces.len());
            faces.push(Face { dim, vertices: verts, facets: fs, subfaces: Vec::new(), superfaces: Vec::new() });
            by_dim[(dim + 1) as usize].push(id);
            id
        };

        let whole = push(&mut faces, &mut by_dim, n as isize, (0..nv).collect(), Vec::new());
        index.insert((0..nv).collect(), whole);
        let mut facet_face = Vec::with_capacity(incidence.len());
        for (j, on) in incidence.iter().enumerate() {
            let id = push(&mut faces, &mut by_dim, n as isize - 1, on.clone(), vec![j]);
            index.insert(on.clone(), id);
            facet_face.push(id);
        }
        for &f in &facet_face {
            faces[whole.0].subfaces.push(f);
            faces[f.0].superfaces.push(whole);
        }

        for d in (1..n as isize).rev() {
            let current = by_dim[(d + 1) as usize].clone();
            for fid in current {
                let (verts, own_facets) = (faces[fid.0].vertices.clone(), faces[fid.0].facets.clone());
                let mut candidates: Vec<Vec<usize>> = Vec::new();
                for (j, on) in incidence.iter().enumerate() {
                    if own_facets.contains(&j) {
                        continue;
                    }
                    let cut: Vec<usize> = verts.iter().filter(|v| on.contains(v)).cloned().collect();
                    if !cut.is_empty() && !candidates.contains(&cut) {
                        candidates.push(cut);
                    }
                }
                let maximal: Vec<Vec<usize>> = candidates
                    .iter()
                    .filter(|c| {
                        !candidates.iter().any(|o| o.len() > c.len() && c.iter().all(|v| o.contains(v)))
                    })
                    .cloned()
                    .collect();
                for sub in maximal {
                    let sid = match index.get(&sub) {
                        Some(&id) => {
                            if faces[id.0].dim != d - 1 {
                                return Err(Error::DegenerateInput(
                                    "inconsistent face dimensions (numerically degenerate input)".into(),
                                ));
                            }
                            id
                        }
                        None => {
                            let fs = facets_of(&sub);
                            let id = push(&mut faces, &mut by_dim, d - 1, sub.clone(), fs);
                            index.insert(sub, id);
                            id
                        }
                    };
                    faces[fid.0].subfaces.push(sid);
                    faces[sid.0].superfaces.push(fid);
                }
            }
        }

        let empty = push(&mut faces, &mut by_dim, -1, Vec::new(), (0..incidence.len()).collect());
        let mut vertex_face = vec![FaceId(usize::MAX); nv];
        for &vid in &by_dim[1] {
            let verts = &faces[vid.0].vertices;
            if verts.len() != 1 {
                return Err(Error::DegenerateInput("vertex face with several vertices".into()));
            }
            vertex_face[verts[0]] = vid;
        }
        if vertex_face.iter().any(|f| f.0 == usize::MAX) {
            return Err(Error::DegenerateInput("vertex missing from face lattice".into()));
        }
        for &vid in &vertex_face {
            faces[vid.0].subfaces.push(empty);
            faces[empty.0].superfaces.push(vid);
        }
        for f in faces.iter_mut() {
            f.subfaces.sort();
            f.superfaces.sort();
        }

        let p = Polytope {
            dim: n,
            vertices,
            facets,
            faces,
            by_dim,
            vertex_face,
            facet_face,
            flags: OnceLock::new(),
        };
        if !p.diamond_property_holds() || !p.euler_relation_holds() {
            return Err(Error::DegenerateInput("face lattice fails the diamond property".into()));
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[DVector<f64>] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, id: FaceId) -> &Face {
        &self.faces[id.0]
    }

    /// Faces of dimension `d`, `-1 <= d <= n`.
    pub fn faces_of_dim(&self, d: isize) -> &[FaceId] {
        &self.by_dim[(d + 1) as usize]
    }

    /// Number of faces in each dimension `0..n`.
    pub fn f_vector(&self) -> Vec<usize> {
        (0..self.dim as isize).map(|d| self.faces_of_dim(d).len()).collect()
    }

    pub fn whole(&self) -> FaceId {
        self.by_dim[self.dim + 1][0]
    }

    pub fn empty_face(&self) -> FaceId {
        self.by_dim[0][0]
    }

    pub fn vertex_face(&self, v: usize) -> FaceId {
        self.vertex_face[v]
    }

    pub fn facet_face(&self, j: usize) -> FaceId {
        self.facet_face[j]
    }

    /// The vertex coordinates of a 0-dimensional face.
    pub fn vertex_of(&self, id: FaceId) -> &DVector<f64> {
        &self.vertices[self.faces[id.0].vertices[0]]
    }

    /// The facet inequality of an `(n-1)`-dimensional face.
    pub fn facet_of(&self, id: FaceId) -> &Facet {
        &self.facets[self.faces[id.0].facets[0]]
    }

    /// Size of the polytope, for scaling tolerances.
    pub fn scale(&self) -> f64 {
        let c = self.vertex_centroid();
        self.vertices.iter().map(|v| (v - &c).norm()).fold(0.0, f64::max)
    }

    pub fn vertex_centroid(&self) -> DVector<f64> {
        self.vertices.iter().fold(DVector::zeros(self.dim), |acc, v| acc + v) / self.vertices.len() as f64
    }

    /// Facet slacks `offset - <normal, x>`.
    pub fn slacks(&self, x: &DVector<f64>) -> Vec<f64> {
        self.facets.iter().map(|f| f.offset - f.normal.dot(x)).collect()
    }

    /// Strict interiority with a tolerance relative to the polytope size.
    pub fn is_interior(&self, x: &DVector<f64>) -> bool {
        x.len() == self.dim && self.slacks(x).iter().all(|&s| s > INCIDENCE_EPS * self.scale())
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        x.len() == self.dim && self.slacks(x).iter().all(|&s| s >= -tol)
    }

    pub(crate) fn check_interior(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        if self.is_interior(x) {
            Ok(())
        } else {
            Err(Error::PointNotInterior)
        }
    }

    /// Vertices `a / (b - <a, x>)` of the polar of `P - x`, one per facet.
    pub fn dual_vertices_at(&self, x: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
        self.check_interior(x)?;
        Ok(self.facets.iter().map(|f| &f.normal / (f.offset - f.normal.dot(x))).collect())
    }

    /// `P^x = (P - x)°`, rebuilt as a polytope.
    pub fn polar_dual(&self, x: &DVector<f64>) -> Result<Polytope> {
        Polytope::from_vertices(&self.dual_vertices_at(x)?)
    }

    pub fn is_centrally_symmetric(&self, tol: f64) -> bool {
        let tol = tol * self.scale().max(1.0);
        self.vertices.iter().all(|v| self.vertices.iter().any(|w| (v + w).norm() <= tol))
    }

    /// Lebesgue volume via the barycentric cone decomposition from the vertex centroid.
    pub fn volume(&self) -> f64 {
        let c = self.vertex_centroid();
        let bary: Vec<DVector<f64>> = self
            .faces
            .iter()
            .map(|f| {
                if f.vertices.is_empty() {
                    DVector::zeros(self.dim)
                } else {
                    f.vertices.iter().fold(DVector::zeros(self.dim), |a, &v| a + &self.vertices[v])
                        / f.vertices.len() as f64
                        - &c
                }
            })
            .collect();
        let total: f64 = self
            .flags()
            .iter()
            .map(|fl| {
                let cols: Vec<&DVector<f64>> = fl.faces[..self.dim].iter().map(|id| &bary[id.0]).collect();
                det_columns(&cols).abs()
            })
            .sum();
        total / factorial(self.dim)
    }

    // --- flags -------------------------------------------------------------

    /// All flags, each exactly once, in a deterministic depth-first order.
    pub fn flags(&self) -> &[Flag] {
        self.flags.get_or_init(|| {
            let mut out = Vec::new();
            let mut chain = vec![FaceId(0); self.dim + 1];
            chain[self.dim] = self.whole();
            self.extend_flags(self.dim, &mut chain, &mut out);
            out
        })
    }

    fn extend_flags(&self, level: usize, chain: &mut Vec<FaceId>, out: &mut Vec<Flag>) {
        if level == 0 {
            out.push(Flag { faces: chain.clone() });
            return;
        }
        for &sub in &self.faces[chain[level].0].subfaces {
            chain[level - 1] = sub;
            self.extend_flags(level - 1, chain, out);
        }
    }

    pub fn num_flags(&self) -> usize {
        self.flags().len()
    }

    /// Flag count by the recursion `|flags(F)| = sum over facets G of F of |flags(G)|`.
    pub fn count_flags_recursive(&self) -> usize {
        let mut memo: HashMap<FaceId, usize> = HashMap::new();
        self.count_below(self.whole(), &mut memo)
    }

    fn count_below(&self, id: FaceId, memo: &mut HashMap<FaceId, usize>) -> usize {
        if self.faces[id.0].dim == 0 {
            return 1;
        }
        if let Some(&c) = memo.get(&id) {
            return c;
        }
        let c = self.faces[id.0].subfaces.iter().map(|&s| self.count_below(s, memo)).sum();
        memo.insert(id, c);
        c
    }

    /// `|flags(F)|` for every facet `F`, indexed like [`Polytope::facets`].
    pub fn facet_flag_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.facets.len()];
        let pos: HashMap<FaceId, usize> = self.facet_face.iter().enumerate().map(|(j, &f)| (f, j)).collect();
        for fl in self.flags() {
            counts[pos[&fl.faces[self.dim - 1]]] += 1;
        }
        counts
    }

    /// Checks that `flag` is a maximal chain of this polytope.
    pub fn is_flag(&self, flag: &Flag) -> bool {
        flag.faces.len() == self.dim + 1
            && flag.faces[self.dim] == self.whole()
            && (0..self.dim).all(|i| {
                self.faces[flag.faces[i].0].dim == i as isize
                    && self.faces[flag.faces[i + 1].0].subfaces.contains(&flag.faces[i])
            })
    }

    /// `r_i f`: the flag differing from `f` only in its `i`-face.
    pub fn flip(&self, flag: &Flag, i: usize) -> Flag {
        assert!(i < self.dim, "flip index {i} out of range for dimension {}", self.dim);
        let lower = if i == 0 { self.empty_face() } else { flag.faces[i - 1] };
        let upper = flag.faces[i + 1];
        let other = self.faces[upper.0]
            .subfaces
            .iter()
            .copied()
            .find(|&g| g != flag.faces[i] && self.faces[g.0].subfaces.contains(&lower))
            .expect("diamond property guarantees a second face");
        let mut faces = flag.faces.clone();
        faces[i] = other;
        Flag { faces }
    }

    /// The complete flip `r = r_{n-1} ∘ ... ∘ r_0`.
    pub fn complete_flip(&self, flag: &Flag) -> Flag {
        (0..self.dim).fold(flag.clone(), |f, i| self.flip(&f, i))
    }

    // --- lattice checks ----------------------------------------------------

    /// Every interval of length two in the face lattice has exactly two middle elements.
    pub fn diamond_property_holds(&self) -> bool {
        for f in &self.faces {
            let mut counts: HashMap<FaceId, usize> = HashMap::new();
            for &g in &f.superfaces {
                for &h in &self.faces[g.0].superfaces {
                    *counts.entry(h).or_default() += 1;
                }
            }
            if counts.values().any(|&c| c != 2) {
                return false;
            }
        }
        true
    }

    pub fn euler_relation_holds(&self) -> bool {
        let n = self.dim as isize;
        let sum: isize = (0..n).map(|i| (-1isize).pow(i as u32) * self.faces_of_dim(i).len() as isize).sum();
        sum == 1 - (-1isize).pow(n as u32)
    }

    // --- maps preserving the lattice -----------------------------------------

    fn with_geometry(&self, vertices: Vec<DVector<f64>>, facets: Vec<Facet>) -> Polytope {
        Polytope {
            dim: self.dim,
            vertices,
            facets,
            faces: self.faces.clone(),
            by_dim: self.by_dim.clone(),
            vertex_face: self.vertex_face.clone(),
            facet_face: self.facet_face.clone(),
            flags: self.flags.clone(),
        }
    }

    pub fn translate(&self, t: &DVector<f64>) -> Polytope {
        let vertices = self.vertices.iter().map(|v| v + t).collect();
        let facets = self
            .facets
            .iter()
            .map(|f| Facet { normal: f.normal.clone(), offset: f.offset + f.normal.dot(t) })
            .collect();
        self.with_geometry(vertices, facets)
    }

    /// Image under `x -> center + factor (x - center)`, `factor > 0`.
    pub fn homothety(&self, center: &DVector<f64>, factor: f64) -> Polytope {
        assert!(factor > 0.0);
        let vertices = self.vertices.iter().map(|v| center + (v - center) * factor).collect();
        let facets = self
            .facets
            .iter()
            .map(|f| Facet {
                normal: f.normal.clone(),
                offset: factor * f.offset + (1.0 - factor) * f.normal.dot(center),
            })
            .collect();
        self.with_geometry(vertices, facets)
    }

    /// Image under an invertible linear map.
    pub fn linear_image(&self, a: &DMatrix<f64>) -> Result<Polytope> {
        if a.nrows() != self.dim || a.ncols() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: a.nrows() });
        }
        let inv_t = a
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("linear map is singular".into()))?
            .transpose();
        let vertices = self.vertices.iter().map(|v| a * v).collect();
        let facets = self
            .facets
            .iter()
            .map(|f| {
                let n = &inv_t * &f.normal;
                let norm = n.norm();
                Facet { normal: n / norm, offset: f.offset / norm }
            })
            .collect();
        Ok(self.with_geometry(vertices, facets))
    }

    /// Cartesian product `self × other`.
    pub fn product(&self, other: &Polytope) -> Result<Polytope> {
        let mut pts = Vec::with_capacity(self.vertices.len() * other.vertices.len());
        for a in &self.vertices {
            for b in &other.vertices {
                pts.push(DVector::from_iterator(self.dim + other.dim, a.iter().chain(b.iter()).cloned()));
            }
        }
        Polytope::from_vertices(&pts)
    }

    /// Invariance under every coordinate reflection `x_i -> -x_i`.
    pub fn is_unconditional(&self, tol: f64) -> bool {
        let tol = tol * self.scale().max(1.0);
        self.vertices.iter().all(|v| {
            (0..self.dim).all(|i| {
                let mut w = v.clone();
                w[i] = -w[i];
                self.vertices.iter().any(|u| (u - &w).norm() <= tol)
            })
        })
    }
}
