//! Command-line front end for the `funkvol` binary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::asymptotics::{c0, c1_at_point, c1_decomposed, c1_flip, fit_coeffs_numeric, flag_equality_check};
use crate::error::{Error, Result};
use crate::families::{
    centered_simplex, gradient_norm, hanner_ball_volume, hanner_build, polygon_c1, polygon_c1_gradient,
    polygon_dv_dlambda, polygon_dv_dlambda_pole_form, simplex_large_radius_coeffs, simplex_small_radius_coeffs,
    HannerSpec, Polygon, SimplexRecursion,
};
use crate::funk::{ball_volume, default_tolerance, funk_ball, ht_volume_of_subset};
use crate::geometry::{apply_collineation, FlagDecomposition};
use crate::santalo::{santalo_at_radius_from, santalo_infinity, weighted_dual_centroid};
use crate::{factorial, omega, Polytope};

pub const MAX_INPUT_DIM: usize = 6;
pub const MAX_INPUT_VERTICES: usize = 64;

#[derive(Parser, Debug, Clone)]
#[command(name = "funkvol", version, about = "Holmes–Thompson volumes of Funk metric balls in convex polytopes")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    pub format: Format,
    /// Seed for randomised checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Holmes–Thompson volume of one Funk ball.
    Volume {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "R", visible_alias = "radius")]
        r: f64,
        /// Ball center, comma separated (default: origin).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        center: Option<Vec<f64>>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Exact asymptotic coefficients and a numeric fit.
    Coeffs {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        center: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', default_value = "10,12,14,16,18,20")]
        grid: Vec<f64>,
        /// Relative accuracy of each fitted volume.
        #[arg(long, default_value_t = 1e-8)]
        rel_tol: f64,
        /// Skip the numeric fit.
        #[arg(long)]
        no_fit: bool,
    },
    /// Funk–Santaló points at infinite and finite radii.
    Santalo {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "2,5,10,20")]
        grid: Vec<f64>,
        /// Residual tolerance for the infinite-radius point.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Point accuracy for finite radii.
        #[arg(long, default_value_t = 1e-4)]
        point_tol: f64,
    },
    /// Simplex ball volumes from the dimension recursion.
    Simplex {
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
        grid: Vec<f64>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Also integrate the ball volume of the simplex directly.
        #[arg(long)]
        quadrature: bool,
    },
    /// Hanner closed form, optionally compared with a built Hanner polytope.
    Hanner {
        #[arg(long)]
        n: Option<usize>,
        /// Expression such as `polar(product(segment,segment,segment))`.
        #[arg(long)]
        spec: Option<String>,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,4")]
        grid: Vec<f64>,
    },
    /// Planar toolkit: c1, exact dV/dλ and stationarity.
    Polygon {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.3,0.5,0.9")]
        lambda: Vec<f64>,
    },
    /// Runs the invariant suite on a polytope.
    Verify {
        #[arg(long)]
        input: PathBuf,
    },
    /// CSV-style sweep of ball volumes over radii.
    Sweep {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
        grid: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        center: Option<Vec<f64>>,
        #[arg(long)]
        tol: Option<f64>,
    },
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Clone, Debug)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Point(Vec<f64>),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}
impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}
impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}
impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}
impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}
impl From<Vec<f64>> for Cell {
    fn from(x: Vec<f64>) -> Self {
        Cell::Point(x)
    }
}
impl From<&DVector<f64>> for Cell {
    fn from(x: &DVector<f64>) -> Self {
        Cell::Point(x.iter().cloned().collect())
    }
}

fn text_num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() || (x.abs() >= 1e-4 && x.abs() < 1e9) {
        format!("{x:.6}")
    } else {
        format!("{x:.6e}")
    }
}

fn csv_num(x: f64) -> String {
    format!("{x:.16e}")
}

impl Cell {
    fn render(&self, num: fn(f64) -> String, sep: &str) -> String {
        match self {
            Cell::Num(x) => num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => if *b { "pass" } else { "FAIL" }.to_string(),
            Cell::Point(v) => format!("({})", v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(sep)),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) => json!(x),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Point(v) => json!(v),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub command: String,
    pub meta: Vec<(String, Cell)>,
    pub tables: Vec<Table>,
    /// Set when a check inside the report failed.
    pub failed: bool,
}

impl Report {
    fn new(command: &str) -> Self {
        Report { command: command.into(), ..Default::default() }
    }

    fn meta(&mut self, key: &str, value: impl Into<Cell>) {
        self.meta.push((key.into(), value.into()));
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.render_text(),
            Format::Json => serde_json::to_string_pretty(&self.to_json()).unwrap() + "\n",
            Format::Csv => self.render_csv(),
        }
    }

    fn render_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}", self.command).unwrap();
        let width = self.meta.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &self.meta {
            writeln!(out, "  {k:<width$}  {}", v.render(text_num, ", ")).unwrap();
        }
        for t in &self.tables {
            writeln!(out, "\n{}", t.name).unwrap();
            let cells: Vec<Vec<String>> =
                t.rows.iter().map(|r| r.iter().map(|c| c.render(text_num, ", ")).collect()).collect();
            let widths: Vec<usize> = (0..t.columns.len())
                .map(|j| cells.iter().map(|r| r[j].chars().count()).chain([t.columns[j].len()]).max().unwrap())
                .collect();
            let line = |vals: Vec<&str>| {
                vals.iter().zip(&widths).map(|(v, w)| format!("{v:>w$}")).collect::<Vec<_>>().join("  ")
            };
            writeln!(out, "  {}", line(t.columns.iter().map(|s| s.as_str()).collect())).unwrap();
            for r in &cells {
                writeln!(out, "  {}", line(r.iter().map(|s| s.as_str()).collect())).unwrap();
            }
        }
        out
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            writeln!(out, "# {k}: {}", v.render(csv_num, " ")).unwrap();
        }
        for (i, t) in self.tables.iter().enumerate() {
            if i > 0 || !self.meta.is_empty() {
                writeln!(out, "# {}", t.name).unwrap();
            }
            writeln!(out, "{}", t.columns.join(",")).unwrap();
            for r in &t.rows {
                writeln!(out, "{}", r.iter().map(|c| c.render(csv_num, " ")).collect::<Vec<_>>().join(",")).unwrap();
            }
        }
        out
    }

    fn to_json(&self) -> Value {
        let mut meta = Map::new();
        for (k, v) in &self.meta {
            meta.insert(k.clone(), v.to_json());
        }
        let mut tables = Map::new();
        for t in &self.tables {
            let rows: Vec<Value> = t
                .rows
                .iter()
                .map(|r| Value::Object(t.columns.iter().cloned().zip(r.iter().map(Cell::to_json)).collect()))
                .collect();
            tables.insert(t.name.clone(), Value::Array(rows));
        }
        json!({ "command": self.command, "meta": meta, "tables": tables })
    }
}

// ---------------------------------------------------------------------------
// Input

#[derive(Deserialize)]
struct PolytopeInput {
    vertices: Vec<Vec<f64>>,
    center: Option<Vec<f64>>,
}

/// Reads `{"vertices": [[...], ...], "center"?: [...]}`; the center, if given,
/// is translated to the origin.
pub fn parse_polytope(path: &Path) -> Result<Polytope> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_polytope_str(&text)
}

pub fn parse_polytope_str(text: &str) -> Result<Polytope> {
    let input: PolytopeInput = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if input.vertices.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = input.vertices[0].len();
    if n > MAX_INPUT_DIM {
        return Err(Error::DimensionTooLarge(n));
    }
    if input.vertices.len() > MAX_INPUT_VERTICES {
        return Err(Error::InvalidArgument(format!(
            "{} vertices given, at most {MAX_INPUT_VERTICES} are supported",
            input.vertices.len()
        )));
    }
    if let Some(bad) = input.vertices.iter().find(|v| v.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: bad.len() });
    }
    let shift = match input.center {
        Some(c) if c.len() != n => return Err(Error::DimensionMismatch { expected: n, got: c.len() }),
        Some(c) => DVector::from_vec(c),
        None => DVector::zeros(n),
    };
    let pts: Vec<DVector<f64>> = input.vertices.iter().map(|v| DVector::from_row_slice(v) - &shift).collect();
    Polytope::from_vertices(&pts)
}

fn center_vector(p: &Polytope, center: &Option<Vec<f64>>) -> Result<DVector<f64>> {
    match center {
        None => Ok(DVector::zeros(p.dim())),
        Some(c) if c.len() != p.dim() => Err(Error::DimensionMismatch { expected: p.dim(), got: c.len() }),
        Some(c) => Ok(DVector::from_row_slice(c)),
    }
}

fn check_radii(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty radius grid".into()));
    }
    if let Some(r) = grid.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::NonpositiveRadius(*r));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("radius grid must be strictly increasing".into()));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<f64> {
    if tol > 0.0 && tol.is_finite() {
        Ok(tol)
    } else {
        Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")))
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

// ---------------------------------------------------------------------------
// Commands

/// Executes a command and returns its complete report.
pub fn run(config: &RunConfig) -> Result<Report> {
    match &config.command {
        Command::Volume { input, r, center, tol } => cmd_volume(&parse_polytope(input)?, *r, center, *tol),
        Command::Coeffs { input, center, grid, rel_tol, no_fit } => {
            cmd_coeffs(&parse_polytope(input)?, center, grid, *rel_tol, *no_fit)
        }
        Command::Santalo { input, grid, tol, point_tol } => {
            cmd_santalo(&parse_polytope(input)?, grid, *tol, *point_tol)
        }
        Command::Simplex { n, grid, tol, quadrature } => cmd_simplex(*n, grid, *tol, *quadrature),
        Command::Hanner { n, spec, grid } => cmd_hanner(*n, spec.as_deref(), grid),
        Command::Polygon { input, lambda } => cmd_polygon(&parse_polytope(input)?, lambda),
        Command::Verify { input } => cmd_verify(&parse_polytope(input)?, config.seed),
        Command::Sweep { input, grid, center, tol } => cmd_sweep(&parse_polytope(input)?, grid, center, *tol),
    }
}

fn cmd_volume(p: &Polytope, r: f64, center: &Option<Vec<f64>>, tol: Option<f64>) -> Result<Report> {
    let x = center_vector(p, center)?;
    let tol = check_tol(tol.unwrap_or_else(|| default_tolerance(p.dim())))?;
    let est = ball_volume(p, &x, r, tol)?;
    let mut rep = Report::new("volume");
    rep.meta("dimension", p.dim());
    rep.meta("center", &x);
    rep.meta("R", r);
    rep.meta("tol", tol);
    rep.meta("value", est.value);
    rep.meta("abs_error_estimate", est.abs_error_estimate);
    rep.meta("evaluations", est.evaluations);
    Ok(rep)
}

fn cmd_coeffs(p: &Polytope, center: &Option<Vec<f64>>, grid: &[f64], rel_tol: f64, no_fit: bool) -> Result<Report> {
    let x = center_vector(p, center)?;
    let n = p.dim();
    let flip = c1_flip(p)?;
    let c1x = c1_at_point(p, &x)?;
    let mut rep = Report::new("coeffs");
    rep.meta("dimension", n);
    rep.meta("flags", p.num_flags());
    rep.meta("center", &x);
    rep.meta("c0", flip.c0);
    rep.meta("c1", flip.c1);
    rep.meta("c1_at_center", c1x);
    if !no_fit {
        check_radii(grid)?;
        let fit = fit_coeffs_numeric(p, &x, grid, check_tol(rel_tol)?)?;
        let mut t = Table::new("fit", &["coefficient", "exact", "fitted", "relative_error"]);
        t.push(vec!["c0".into(), flip.c0.into(), fit.c0.into(), rel_diff(fit.c0, flip.c0).into()]);
        t.push(vec!["c1".into(), c1x.into(), fit.c1.into(), rel_diff(fit.c1, c1x).into()]);
        rep.tables.push(t);
        let mut s = Table::new("samples", &["R", "scaled_volume"]);
        for (r, v) in &fit.samples {
            s.push(vec![(*r).into(), (*v).into()]);
        }
        rep.tables.push(s);
    }
    let mut t = Table::new("summands", &["flag", "vertex", "log_term"]);
    for (k, term) in &flip.summands {
        t.push(vec![(*k).into(), p.vertex_of(p.flags()[*k].face(0)).into(), (*term).into()]);
    }
    rep.tables.push(t);
    Ok(rep)
}

fn cmd_santalo(p: &Polytope, grid: &[f64], tol: f64, point_tol: f64) -> Result<Report> {
    check_radii(grid)?;
    let inf = santalo_infinity(p, check_tol(tol)?)?;
    let s_inf = DVector::from_vec(inf.point.clone());
    let wdc = weighted_dual_centroid(p, &s_inf)?;
    let mut rep = Report::new("santalo");
    rep.meta("s_inf", inf.point.clone());
    rep.meta("c1_at_s_inf", inf.objective);
    rep.meta("residual", inf.residual);
    rep.meta("newton_iterations", inf.iterations);
    rep.meta("weighted_dual_centroid_norm", wdc.norm());
    let mut t = Table::new("finite_radius", &["R", "s_R", "distance_to_s_inf", "min_volume", "iterations"]);
    for &r in grid {
        let s = santalo_at_radius_from(p, r, check_tol(point_tol)?, Some(s_inf.clone()))?;
        let d = (DVector::from_vec(s.point.clone()) - &s_inf).norm();
        t.push(vec![r.into(), s.point.clone().into(), d.into(), s.objective.into(), s.iterations.into()]);
    }
    rep.tables.push(t);
    Ok(rep)
}

fn cmd_simplex(n: usize, grid: &[f64], tol: f64, quadrature: bool) -> Result<Report> {
    check_radii(grid)?;
    let rec = SimplexRecursion::new(n, *grid.last().unwrap(), check_tol(tol)?)?;
    let (a, b) = simplex_small_radius_coeffs(n);
    let (c, d) = simplex_large_radius_coeffs(n);
    let mut rep = Report::new("simplex");
    rep.meta("dimension", n);
    rep.meta("small_R_leading", a);
    rep.meta("small_R_ratio", b);
    rep.meta("large_R_leading", c);
    rep.meta("large_R_ratio", d);
    let mut cols = vec!["R", "scaled_volume", "ht_volume", "small_R_approx", "large_R_approx"];
    if quadrature {
        cols.extend(["quadrature_scaled", "relative_difference"]);
    }
    let mut t = Table::new("volumes", &cols);
    let simplex = centered_simplex(n);
    for &r in grid {
        let v = rec.scaled_volume(n, r).ok_or(Error::OdeToleranceNotReached(r))?;
        let mut row: Vec<Cell> = vec![
            r.into(),
            v.into(),
            (v / omega(n)).into(),
            (a * (r.powi(n as i32) + b * r.powi(n as i32 + 1))).into(),
            (c * r.powi(n as i32) * (1.0 + d / r)).into(),
        ];
        if quadrature {
            let q = omega(n) * ball_volume(&simplex, &DVector::zeros(n), r, 1e-3 * default_tolerance(n))?.value;
            row.extend([q.into(), rel_diff(v, q).into()]);
        }
        t.push(row);
    }
    rep.tables.push(t);
    Ok(rep)
}

fn cmd_hanner(n: Option<usize>, spec: Option<&str>, grid: &[f64]) -> Result<Report> {
    check_radii(grid)?;
    let spec: Option<HannerSpec> = spec.map(str::parse).transpose()?;
    let n = match (n, &spec) {
        (_, Some(s)) => s.dim(),
        (Some(n), None) if n >= 1 => n,
        _ => return Err(Error::InvalidArgument("give --n or --spec".into())),
    };
    let built = spec.as_ref().map(hanner_build).transpose()?;
    let mut rep = Report::new("hanner");
    rep.meta("dimension", n);
    if let (Some(s), Some(p)) = (&spec, &built) {
        rep.meta("spec", s.to_string());
        rep.meta("flags", p.num_flags());
    }
    let mut cols = vec!["R", "closed_form"];
    if built.is_some() {
        cols.extend(["quadrature", "relative_difference"]);
    }
    let mut t = Table::new("volumes", &cols);
    for &r in grid {
        let exact = hanner_ball_volume(n, r);
        let mut row: Vec<Cell> = vec![r.into(), exact.into()];
        if let Some(p) = &built {
            let q = ball_volume(p, &DVector::zeros(n), r, 1e-7 * exact)?.value;
            row.extend([q.into(), rel_diff(q, exact).into()]);
        }
        t.push(row);
    }
    rep.tables.push(t);
    Ok(rep)
}

fn cmd_polygon(p: &Polytope, lambdas: &[f64]) -> Result<Report> {
    let q = Polygon::from_polytope(p)?;
    let c1 = polygon_c1(&q)?;
    let grad = polygon_c1_gradient(&q)?;
    let mut rep = Report::new("polygon");
    rep.meta("vertices", q.len());
    rep.meta("c1", c1);
    rep.meta("c1_flip", c1_flip(p)?.c1);
    rep.meta("c1_gradient_norm", gradient_norm(&grad));
    let mut t = Table::new("derivative", &["lambda", "dV_dlambda", "pole_form", "finite_difference", "relative_difference"]);
    for &lam in lambdas {
        let exact = polygon_dv_dlambda(&q, lam)?;
        let alt = polygon_dv_dlambda_pole_form(&q, lam)?;
        let fd = scaled_volume_derivative(p, lam)?;
        t.push(vec![lam.into(), exact.into(), alt.into(), fd.into(), rel_diff(fd, exact).into()]);
    }
    rep.tables.push(t);
    let mut g = Table::new("gradient", &["vertex", "position", "dc1"]);
    for (k, (v, d)) in q.vertices().iter().zip(&grad).enumerate() {
        g.push(vec![k.into(), vec![v.x, v.y].into(), d.to_vec().into()]);
    }
    rep.tables.push(g);
    Ok(rep)
}

/// Central difference in `λ` of `ω_2 volht(B(0, R(λ)))`.
pub fn scaled_volume_derivative(p: &Polytope, lambda: f64) -> Result<f64> {
    let h = 1e-4 * lambda.min(1.0 - lambda);
    let vol = |l: f64| -> Result<f64> {
        let r = -(-l).ln_1p();
        Ok(omega(2) * ball_volume(p, &DVector::zeros(2), r, 1e-13)?.value)
    };
    Ok((vol(lambda + h)? - vol(lambda - h)?) / (2.0 * h))
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, spread: f64) -> DMatrix<f64> {
    DMatrix::identity(n, n) + DMatrix::from_fn(n, n, |_, _| rng.gen_range(-spread..spread))
}

/// One line of the invariant suite.
struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn cmd_verify(p: &Polytope, seed: u64) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.dim();
    let origin = DVector::zeros(n);
    let mut checks: Vec<Check> = Vec::new();
    let mut add = |name, pass, detail: String| checks.push(Check { name, pass, detail });

    add("diamond_property", p.diamond_property_holds(), format!("f-vector {:?}", p.f_vector()));
    add("euler_relation", p.euler_relation_holds(), String::new());
    let (enumerated, recursive) = (p.num_flags(), p.count_flags_recursive());
    add("flag_count_recursion", enumerated == recursive, format!("{enumerated} flags, recursive count {recursive}"));
    let flips_ok = p.flags().iter().all(|f| {
        (0..n).all(|i| {
            let g = p.flip(f, i);
            p.flip(&g, i) == *f && (0..=n).all(|j| (j == i) != (g.face(j) == f.face(j)))
        })
    });
    add("flip_involution", flips_ok, String::new());

    if !p.is_interior(&origin) {
        add("origin_interior", false, "remaining checks need the origin inside".into());
    } else {
        let bipolar = p.polar_dual(&origin)?.polar_dual(&origin)?;
        let scale = p.scale();
        let bip_ok = bipolar.vertices().len() == p.vertices().len()
            && p.vertices().iter().all(|v| bipolar.vertices().iter().any(|w| (v - w).norm() <= 1e-9 * scale));
        add("bipolar", bip_ok, String::new());

        let dec = FlagDecomposition::barycentric(p)?;
        let tiled: f64 = p.flags().iter().map(|f| dec.flag_simplex_volume(p, f)).sum();
        let vol = p.volume();
        add("flag_simplices_tile", rel_diff(tiled, vol) <= 1e-9, format!("sum {tiled:.12}, volume {vol:.12}"));

        let reference = c1_flip(p)?.c1;
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let d = FlagDecomposition::random(p, &mut rng)?;
            worst = worst.max((c1_decomposed(p, &d)? - reference).abs());
        }
        add("decomposition_independence", worst <= 1e-9, format!("max deviation {worst:.3e} over 20 decompositions"));

        let a = random_matrix(&mut rng, n, 0.4);
        let lin = (c1_flip(&p.linear_image(&a)?)?.c1 - reference).abs();
        add("linear_invariance_c1", lin <= 1e-9, format!("deviation {lin:.3e}"));

        if n <= 3 {
            let r = 1.0;
            let lead = hanner_ball_volume(n, r);
            let tol = 1e-8 * lead;
            let ball = funk_ball(p, &origin, r)?;
            let direct = ball_volume(p, &origin, r, tol)?.value;
            // volht_L(K) = volht_{K°}(L°) with polars about the origin.
            let dual = ht_volume_of_subset(&ball.polar_dual(&origin)?, &p.polar_dual(&origin)?, tol)?.value;
            add("duality", (dual - direct).abs() <= 2.0 * tol, format!("{direct:.10} vs {dual:.10}"));

            let mut m = DMatrix::identity(n + 1, n + 1);
            for j in 0..n {
                m[(n, j)] = rng.gen_range(-0.15..0.15) / scale;
                m[(j, n)] = rng.gen_range(-0.1..0.1) * scale;
            }
            let col = match (apply_collineation(p, &m), apply_collineation(&ball, &m)) {
                (Ok(gp), Ok(gb)) => {
                    let v = ht_volume_of_subset(&gp, &gb, tol)?.value;
                    ((v - direct).abs() <= 2.0 * tol, format!("{direct:.10} vs {v:.10}"))
                }
                _ => (false, "sampled collineation was not admissible".into()),
            };
            add("collineation_invariance", col.0, col.1);
        }
        if n <= 2 {
            let seg = Polytope::from_rows(&[vec![-1.0], vec![1.0]])?;
            let prod = p.product(&seg)?;
            let r = 1.0;
            let tol = 1e-7;
            let lhs = factorial(n + 1) * omega(n + 1) * ball_volume(&prod, &DVector::zeros(n + 1), r, tol)?.value;
            let rhs = factorial(n) * omega(n) * ball_volume(p, &origin, r, 1e-10)?.value * 2.0 * hanner_ball_volume(1, r);
            let tol_scaled = 2.0 * tol * factorial(n + 1) * omega(n + 1);
            add("multiplicativity", (lhs - rhs).abs() <= tol_scaled, format!("{lhs:.10} vs {rhs:.10}"));
        }
        if p.is_unconditional(1e-9) && p.num_flags() == (1 << n) * (1..=n).product::<usize>() {
            let eq = flag_equality_check(p)?;
            add("flag_equality", eq, "unconditional with the Hanner flag count".into());
        }
        let s = santalo_infinity(p, 1e-8)?;
        let wdc = weighted_dual_centroid(p, &DVector::from_vec(s.point.clone()))?.norm();
        add("santalo_stationarity", s.residual <= 1e-8 && wdc <= 1e-7, format!("residual {:.3e}, centroid {wdc:.3e}", s.residual));
    }

    let mut rep = Report::new("verify");
    rep.meta("dimension", n);
    rep.meta("seed", seed as usize);
    let mut t = Table::new("checks", &["property", "result", "detail"]);
    for c in &checks {
        t.push(vec![c.name.into(), c.pass.into(), c.detail.clone().into()]);
    }
    rep.failed = checks.iter().any(|c| !c.pass);
    rep.tables.push(t);
    Ok(rep)
}

fn cmd_sweep(p: &Polytope, grid: &[f64], center: &Option<Vec<f64>>, tol: Option<f64>) -> Result<Report> {
    check_radii(grid)?;
    let x = center_vector(p, center)?;
    let n = p.dim();
    let tol = check_tol(tol.unwrap_or_else(|| default_tolerance(n)))?;
    let (a, b) = (c0(p), c1_at_point(p, &x)?);
    let mut t = Table::new("sweep", &["R", "volume", "fitted_residual"]);
    for &r in grid {
        let v = ball_volume(p, &x, r, tol)?.value;
        // Remainder of ω_n V beyond the two exact leading terms.
        let resid = omega(n) * v - (a * r.powi(n as i32) + b * r.powi(n as i32 - 1));
        t.push(vec![r.into(), v.into(), resid.into()]);
    }
    let mut rep = Report::new("sweep");
    rep.tables.push(t);
    Ok(rep)
}

/// Parses arguments, runs and prints; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&config) {
        Ok(report) => {
            print!("{}", report.render(config.format));
            if report.failed {
                1
            } else {
                0
            }
        }
        Err(e) => {
            let stage = e.stage();
            eprintln!("error [{}]: {e}", stage.as_str());
            exit_code(stage)
        }
    }
}

pub fn exit_code(stage: crate::error::Stage) -> i32 {
    use crate::error::Stage;
    match stage {
        Stage::Parse => 2,
        Stage::Geometry => 3,
        Stage::Quadrature => 4,
        Stage::Optimization => 5,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_square_and_reject_degenerate() {
        let sq = parse_polytope_str(r#"{"vertices": [[1,1],[1,-1],[-1,1],[-1,-1]]}"#).unwrap();
        assert_eq!(sq.vertices().len(), 4);
        let err = parse_polytope_str(r#"{"vertices": [[1,0],[0,1]]}"#).unwrap_err();
        assert!(matches!(err, Error::DegenerateInput(_)));
        assert!(matches!(parse_polytope_str("{"), Err(Error::Parse(_))));
        let big = format!(r#"{{"vertices": [[{}]]}}"#, vec!["0"; 7].join(","));
        assert!(matches!(parse_polytope_str(&big), Err(Error::DimensionTooLarge(7))));
    }

    #[test]
    fn center_is_translated_to_origin() {
        let oct = parse_polytope_str(
            r#"{"vertices": [[1,0,0],[-1,0,0],[0,1,0],[0,-1,0],[0,0,1],[0,0,-1]], "center": [0.1,0,0]}"#,
        )
        .unwrap();
        assert!(oct.vertices().iter().any(|v| (v[0] - 0.9).abs() < 1e-15));
        assert!(oct.vertices().iter().any(|v| (v[0] + 1.1).abs() < 1e-15));
    }

    #[test]
    fn number_formatting() {
        assert_eq!(text_num(0.768289), "0.768289");
        assert_eq!(text_num(1.5e-9), "1.500000e-9");
        assert_eq!(csv_num(0.1), "1.0000000000000001e-1");
    }

    #[test]
    fn grids_are_validated() {
        assert!(check_radii(&[1.0, 2.0]).is_ok());
        assert!(check_radii(&[2.0, 1.0]).is_err());
        assert!(matches!(check_radii(&[0.0]), Err(Error::NonpositiveRadius(_))));
    }
}
