//! Reference families with closed or recursive solutions: Hanner polytopes,
//! simplices, and the planar toolkit for polygons.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DVector, Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::ode::{DormandPrince, OdeSolution};
use crate::{factorial, omega, Polytope};

// ---------------------------------------------------------------------------
// Hanner polytopes

/// Expression over segments, Cartesian products and polars.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HannerSpec {
    Segment,
    Product(Box<HannerSpec>, Box<HannerSpec>),
    Polar(Box<HannerSpec>),
}

pub const MAX_HANNER_DIM: usize = 5;

impl HannerSpec {
    pub fn product(a: HannerSpec, b: HannerSpec) -> Self {
        HannerSpec::Product(Box::new(a), Box::new(b))
    }

    pub fn polar(a: HannerSpec) -> Self {
        HannerSpec::Polar(Box::new(a))
    }

    /// `n`-cube as an iterated product of segments.
    pub fn cube(n: usize) -> Self {
        (1..n).fold(HannerSpec::Segment, |acc, _| HannerSpec::product(acc, HannerSpec::Segment))
    }

    pub fn cross_polytope(n: usize) -> Self {
        HannerSpec::polar(HannerSpec::cube(n))
    }

    /// Number of segment leaves.
    pub fn dim(&self) -> usize {
        match self {
            HannerSpec::Segment => 1,
            HannerSpec::Product(a, b) => a.dim() + b.dim(),
            HannerSpec::Polar(a) => a.dim(),
        }
    }
}

impl fmt::Display for HannerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HannerSpec::Segment => write!(f, "segment"),
            HannerSpec::Product(a, b) => write!(f, "product({a},{b})"),
            HannerSpec::Polar(a) => write!(f, "polar({a})"),
        }
    }
}

/// Parses `segment`, `product(a, b, ...)` and `polar(a)`; products of more
/// than two factors associate to the left.
impl FromStr for HannerSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let (spec, rest) = parse_hanner(&compact)?;
        if !rest.is_empty() {
            return Err(Error::Parse(format!("trailing input in Hanner expression: {rest:?}")));
        }
        Ok(spec)
    }
}

fn parse_hanner(s: &str) -> Result<(HannerSpec, &str)> {
    if let Some(rest) = s.strip_prefix("segment") {
        return Ok((HannerSpec::Segment, rest));
    }
    let (name, rest) = if let Some(r) = s.strip_prefix("product(") {
        ("product", r)
    } else if let Some(r) = s.strip_prefix("polar(") {
        ("polar", r)
    } else {
        return Err(Error::Parse(format!("expected segment, product(...) or polar(...) at {s:?}")));
    };
    let mut args = Vec::new();
    let mut rest = rest;
    loop {
        let (arg, r) = parse_hanner(rest)?;
        args.push(arg);
        if let Some(r) = r.strip_prefix(',') {
            rest = r;
        } else if let Some(r) = r.strip_prefix(')') {
            rest = r;
            break;
        } else {
            return Err(Error::Parse(format!("expected ',' or ')' at {r:?}")));
        }
    }
    let spec = match name {
        "polar" if args.len() == 1 => HannerSpec::polar(args.pop().unwrap()),
        "polar" => return Err(Error::Parse("polar takes exactly one argument".into())),
        _ if args.len() < 2 => return Err(Error::Parse("product takes at least two arguments".into())),
        _ => {
            let mut it = args.into_iter();
            let first = it.next().unwrap();
            it.fold(first, HannerSpec::product)
        }
    };
    Ok((spec, rest))
}

fn hanner_vertices(spec: &HannerSpec) -> Result<Vec<DVector<f64>>> {
    Ok(match spec {
        HannerSpec::Segment => vec![DVector::from_element(1, -1.0), DVector::from_element(1, 1.0)],
        HannerSpec::Product(a, b) => {
            let (va, vb) = (hanner_vertices(a)?, hanner_vertices(b)?);
            let mut out = Vec::with_capacity(va.len() * vb.len());
            for x in &va {
                for y in &vb {
                    out.push(DVector::from_iterator(x.len() + y.len(), x.iter().chain(y.iter()).cloned()));
                }
            }
            out
        }
        HannerSpec::Polar(a) => {
            let inner = Polytope::from_vertices(&hanner_vertices(a)?)?;
            inner.dual_vertices_at(&DVector::zeros(inner.dim()))?
        }
    })
}

/// Explicit polytope for a Hanner expression.
pub fn hanner_build(spec: &HannerSpec) -> Result<Polytope> {
    let n = spec.dim();
    if n > MAX_HANNER_DIM {
        return Err(Error::DimensionTooLarge(n));
    }
    Polytope::from_vertices(&hanner_vertices(spec)?)
}

/// Holmes–Thompson volume of a radius-`R` ball about the origin of any
/// `n`-dimensional Hanner polytope: `2^n / (n! ω_n) (log(2e^R - 1))^n`.
pub fn hanner_ball_volume(n: usize, r: f64) -> f64 {
    // log(2e^R - 1) = R + log(2 - e^{-R}), stable for small and large R.
    let l = r + (2.0 - (-r).exp()).ln();
    2f64.powi(n as i32) / (factorial(n) * omega(n)) * l.powi(n as i32)
}

/// Convex hull of all coordinate reflections of `points`, an unconditional body.
pub fn unconditional_hull(points: &[DVector<f64>]) -> Result<Polytope> {
    let n = points.first().ok_or(Error::EmptyInput)?.len();
    let mut all = Vec::with_capacity(points.len() << n);
    for p in points {
        for signs in 0..1usize << n {
            all.push(DVector::from_fn(n, |i, _| if signs >> i & 1 == 1 { -p[i] } else { p[i] }));
        }
    }
    Polytope::from_vertices(&all)
}

// ---------------------------------------------------------------------------
// Simplices

/// Standard simplex `conv{0, e_1, ..., e_n}` translated so its barycenter is the origin.
pub fn centered_simplex(n: usize) -> Polytope {
    let c = 1.0 / (n as f64 + 1.0);
    let mut pts = vec![DVector::from_element(n, -c)];
    for i in 0..n {
        let mut v = DVector::from_element(n, -c);
        v[i] += 1.0;
        pts.push(v);
    }
    Polytope::from_vertices(&pts).expect("simplex is full-dimensional")
}

/// `V_1(R) = 2 log(2e^R - 1)`.
fn segment_scaled_volume(r: f64) -> f64 {
    2.0 * (r + (2.0 - (-r).exp()).ln())
}

/// Solutions `V_k`, `k = 1..=n`, of the dimension recursion for the
/// `ω_n`-scaled ball volumes of the `n`-simplex, tabulated on `[0, R_k]`.
///
/// `V_k'(R) = (k+1)/k / (1 - e^{-R}/(k+1)) · V_{k-1}(R + log(1 + 1/k - e^{-R}/k))`.
#[derive(Clone, Debug)]
pub struct SimplexRecursion {
    n: usize,
    /// `tables[k - 2]` holds `V_k`.
    tables: Vec<OdeSolution>,
}

impl SimplexRecursion {
    /// Tabulates up to dimension `n` so that `V_n` is available on `[0, r_max]`.
    /// Both ODE tolerances are `tol / 10`.
    pub fn new(n: usize, r_max: f64, tol: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("simplex dimension must be at least 1".into()));
        }
        if !(r_max >= 0.0 && r_max.is_finite()) {
            return Err(Error::NonpositiveRadius(r_max));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        // V_{k-1} is sampled up to R_k + log(1 + 1/k).
        let mut ranges = vec![0.0; n + 1];
        ranges[n] = r_max;
        for k in (2..=n).rev() {
            ranges[k - 1] = ranges[k] + (1.0 + 1.0 / k as f64).ln();
        }
        let solver = DormandPrince::new(tol / 10.0);
        let mut rec = SimplexRecursion { n: 1, tables: Vec::new() };
        for k in 2..=n {
            let kf = k as f64;
            let rhs = |r: f64, _y: f64| {
                let e = (-r).exp();
                let arg = r + (1.0 + (1.0 - e) / kf).ln();
                // Out-of-range lookups are impossible by construction of the ranges.
                let lower = rec.scaled_volume(k - 1, arg).unwrap_or(f64::NAN);
                (kf + 1.0) / kf / (1.0 - e / (kf + 1.0)) * lower
            };
            let sol = solver.solve(rhs, 0.0, 0.0, ranges[k])?;
            if !sol.y_end().is_finite() {
                return Err(Error::OdeToleranceNotReached(ranges[k]));
            }
            rec.tables.push(sol);
            rec.n = k;
        }
        Ok(rec)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `V_k(R) = ω_k volht(B_{Δ_k}(R))` about the barycenter.
    pub fn scaled_volume(&self, k: usize, r: f64) -> Option<f64> {
        match k {
            0 => None,
            1 => Some(segment_scaled_volume(r)),
            _ if k <= self.n => self.tables[k - 2].eval(r),
            _ => None,
        }
    }

    /// Holmes–Thompson volume `V_k(R) / ω_k`.
    pub fn ht_volume(&self, k: usize, r: f64) -> Option<f64> {
        self.scaled_volume(k, r).map(|v| v / omega(k))
    }
}

/// `V_n(R) = ω_n volht(B_{Δ_n}(R))` from the dimension recursion.
pub fn simplex_volume_ode(n: usize, r: f64, tol: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::NonpositiveRadius(r));
    }
    let rec = SimplexRecursion::new(n, r, tol)?;
    rec.scaled_volume(n, r).ok_or(Error::OdeToleranceNotReached(r))
}

/// `((n+1)^{n+1} / (n!)^2, -n/2)`: `V_n(R) ≈ a (R^n + b R^{n+1})` as `R -> 0`.
pub fn simplex_small_radius_coeffs(n: usize) -> (f64, f64) {
    let nf = factorial(n);
    ((n as f64 + 1.0).powi(n as i32 + 1) / (nf * nf), -(n as f64) / 2.0)
}

/// `((n+1)! / (n!)^2, n log(n+1))`: `V_n(R) ≈ a R^n (1 + b / R)` as `R -> ∞`.
pub fn simplex_large_radius_coeffs(n: usize) -> (f64, f64) {
    let nf = factorial(n);
    (factorial(n + 1) / (nf * nf), n as f64 * (n as f64 + 1.0).ln())
}

// ---------------------------------------------------------------------------
// Polygons

/// Convex polygon around the origin with counterclockwise vertices `v_i` and
/// dual vertices `e_i` satisfying `<e_i, v_i> = <e_i, v_{i-1}> = 1`.
#[derive(Clone, Debug)]
pub struct Polygon {
    vertices: Vec<Vector2<f64>>,
    duals: Vec<Vector2<f64>>,
}

fn cross(a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

impl Polygon {
    /// Builds from vertices in cyclic order (either orientation).
    pub fn new(points: &[[f64; 2]]) -> Result<Self> {
        let m = points.len();
        if m < 3 {
            return Err(Error::DegenerateInput(format!("a polygon needs at least 3 vertices, got {m}")));
        }
        let mut v: Vec<Vector2<f64>> = points.iter().map(|p| Vector2::new(p[0], p[1])).collect();
        let area2: f64 = (0..m).map(|i| cross(&v[i], &v[(i + 1) % m])).sum();
        if area2 < 0.0 {
            v.reverse();
        }
        for i in 0..m {
            let a = v[(i + 1) % m] - v[i];
            let b = v[(i + 2) % m] - v[(i + 1) % m];
            let turn = cross(&a, &b) / (a.norm() * b.norm());
            if !(turn > 1e-8) {
                return Err(Error::DegenerateInput("polygon is not strictly convex in the given order".into()));
            }
            if !(cross(&v[i], &v[(i + 1) % m]) > 0.0) {
                return Err(Error::OriginNotInterior);
            }
        }
        let duals = (0..m)
            .map(|i| {
                let (p, q) = (v[(i + m - 1) % m], v[i]);
                let mat = Matrix2::new(p.x, p.y, q.x, q.y);
                mat.try_inverse()
                    .map(|inv| inv * Vector2::new(1.0, 1.0))
                    .ok_or(Error::OriginNotInterior)
            })
            .collect::<Result<Vec<_>>>()?;
        let q = Polygon { vertices: v, duals };
        for i in 0..m {
            let (e, a, b) = (&q.duals[i], &q.vertices[i], &q.vertices[(i + m - 1) % m]);
            if (e.dot(a) - 1.0).abs() > 1e-10 || (e.dot(b) - 1.0).abs() > 1e-10 {
                return Err(Error::DegenerateInput("dual pairing is numerically degenerate".into()));
            }
        }
        Ok(q)
    }

    /// Vertices of a planar polytope, ordered by angle about the origin.
    pub fn from_polytope(p: &Polytope) -> Result<Self> {
        if p.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: p.dim() });
        }
        let mut pts: Vec<[f64; 2]> = p.vertices().iter().map(|v| [v[0], v[1]]).collect();
        pts.sort_by(|a, b| a[1].atan2(a[0]).partial_cmp(&b[1].atan2(b[0])).unwrap());
        Polygon::new(&pts)
    }

    /// Regular `m`-gon with the given circumradius, centred at the origin.
    pub fn regular(m: usize, circumradius: f64) -> Result<Self> {
        Polygon::new(&regular_polygon_points(m, circumradius))
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Vector2<f64>] {
        &self.vertices
    }

    pub fn duals(&self) -> &[Vector2<f64>] {
        &self.duals
    }

    pub fn to_points(&self) -> Vec<[f64; 2]> {
        self.vertices.iter().map(|v| [v.x, v.y]).collect()
    }

    pub fn to_polytope(&self) -> Result<Polytope> {
        let rows: Vec<Vec<f64>> = self.vertices.iter().map(|v| vec![v.x, v.y]).collect();
        Polytope::from_rows(&rows)
    }

    fn pairing(&self, i: usize, j: usize) -> f64 {
        let m = self.len();
        self.duals[i % m].dot(&self.vertices[j % m])
    }
}

pub fn regular_polygon_points(m: usize, circumradius: f64) -> Vec<[f64; 2]> {
    (0..m)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / m as f64;
            [circumradius * a.cos(), circumradius * a.sin()]
        })
        .collect()
}

/// Regular `m`-gon as a polytope.
pub fn regular_polygon(m: usize, circumradius: f64) -> Polytope {
    let rows: Vec<Vec<f64>> = regular_polygon_points(m, circumradius).iter().map(|p| p.to_vec()).collect();
    Polytope::from_rows(&rows).expect("regular polygon is full-dimensional")
}

/// `c1` of a polygon: half the sum of `log(1 - <e_i, v_j>)` over neighbouring
/// pairs. The neighbours of `e_i` are `v_{i+1}` and `v_{i-2}`, one for each
/// side; in a triangle these coincide and the pair is counted twice.
pub fn polygon_c1(q: &Polygon) -> Result<f64> {
    let m = q.len();
    let mut total = 0.0;
    for i in 0..m {
        for j in [i + 1, i + m - 2] {
            let s = 1.0 - q.pairing(i, j);
            if s <= crate::asymptotics::PAIRING_EPS {
                return Err(Error::DegeneratePairing(s));
            }
            total += s.ln();
        }
    }
    Ok(0.5 * total)
}

fn dv_terms(q: &Polygon, lambda: f64, second_form: bool) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidArgument(format!("lambda must lie in (0, 1), got {lambda}")));
    }
    let m = q.len();
    let mut total = 0.0;
    for i in 0..m {
        for j in 0..m {
            let a = q.pairing(i, j);
            let d = q.pairing(i + 1, j + 1);
            let b = q.pairing(i, j + 1);
            let c = q.pairing(i + 1, j);
            let n = a * d - b * c;
            if n == 0.0 {
                continue;
            }
            let x = (1.0 - lambda * a) * (1.0 - lambda * d);
            let y = (1.0 - lambda * b) * (1.0 - lambda * c);
            if x <= 0.0 || y <= 0.0 {
                return Err(Error::DegeneratePairing(x.min(y)));
            }
            let log = (x / y).ln();
            let diff = x - y;
            total += if second_form {
                let pole = lambda - (a + d - b - c) / n;
                if pole == 0.0 {
                    // Then x = y and the term is its continuous limit.
                    lambda * n.abs() / x
                } else {
                    log.abs() / pole.abs()
                }
            } else if diff.abs() <= 1e-12 * x.max(y) {
                lambda * n.abs() / x
            } else {
                lambda * log.abs() * n.abs() / diff.abs()
            };
        }
    }
    Ok(0.5 * total)
}

/// Exact derivative in `λ = 1 - e^{-R}` of `ω_2 volht(B_Q(0, R))`:
/// `1/2 Σ_{i,j} λ |log(X/Y)| |N| / |X - Y|`, where with `D_ij = 1 - λ<e_i, v_j>`,
/// `X = D_ij D_{i+1,j+1}`, `Y = D_{i,j+1} D_{i+1,j}` and
/// `N = <e_i,v_j><e_{i+1},v_{j+1}> - <e_i,v_{j+1}><e_{i+1},v_j>`.
pub fn polygon_dv_dlambda(q: &Polygon, lambda: f64) -> Result<f64> {
    dv_terms(q, lambda, false)
}

/// The same derivative written as `1/2 Σ |log(X/Y)| / |λ - (a+d-b-c)/N|`.
pub fn polygon_dv_dlambda_pole_form(q: &Polygon, lambda: f64) -> Result<f64> {
    dv_terms(q, lambda, true)
}

/// Central-difference gradient of `polygon_c1` with respect to each vertex.
pub fn polygon_c1_gradient(q: &Polygon) -> Result<Vec<[f64; 2]>> {
    let pts = q.to_points();
    let scale = q.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let h = 1e-5 * scale;
    let mut grad = Vec::with_capacity(pts.len());
    for k in 0..pts.len() {
        let mut g = [0.0; 2];
        for (c, gc) in g.iter_mut().enumerate() {
            let mut plus = pts.clone();
            let mut minus = pts.clone();
            plus[k][c] += h;
            minus[k][c] -= h;
            *gc = (polygon_c1(&Polygon::new(&plus)?)? - polygon_c1(&Polygon::new(&minus)?)?) / (2.0 * h);
        }
        grad.push(g);
    }
    Ok(grad)
}

pub fn gradient_norm(grad: &[[f64; 2]]) -> f64 {
    grad.iter().map(|g| g[0] * g[0] + g[1] * g[1]).sum::<f64>().sqrt()
}
