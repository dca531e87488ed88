use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};

use spindle_core::fem::{lune_lower_bound, mesh_spherical_region, region_dn_eigenvalue, RegionSpec, MIN_ANGLE_DEG};
use spindle_core::isoperimetry::{check_curve, FamilyKind, IsoTestCurveFamily, Surface, TestBoundary, PASS_TOL};
use spindle_core::smoothing::{
    calibrate_c_hat, sign_conditions, smoothed_curvature, smoothing_coeffs, total_curvature_smoothed, SIGN_GRID,
};
use spindle_core::spectral::{cap_eigenvalue, char_exponent, DEFAULT_TOL};
use spindle_core::sphere_geom::{BoundaryTag, Domain, Lune, SphericalPolygon, UnitVec};
use spindle_core::spindle::{SampledCurve, SpindleParam};
use spindle_core::verify::{self, format_float, to_json_string, SuiteConfig, CSV_DIGITS};

/// Default relative tolerance for FEM eigenvalue solves.
const FEM_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "spindle", version, about = "Isoperimetric and eigenvalue checks on spindles and spherical regions")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Args)]
struct Global {
    /// Seed for every random generator
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Output file, or `json` / `csv` to pick the format and write to stdout
    #[arg(long, global = true, value_name = "PATH|json|csv")]
    out: Option<String>,
    /// Output format [default: from the --out extension, else per command]
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Relative eigenvalue tolerance [default: 1e-9 for shooting, 1e-8 for FEM]
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// First Dirichlet eigenvalue of the cap {u > b} on the unit sphere
    CapEigen {
        /// Latitude of the cap boundary, in (-π/2, π/2)
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
    },
    /// Table of λ, α and α(b) + α(-b) over a grid of latitudes (default format csv)
    BkpTable {
        #[arg(long, default_value_t = -1.5, allow_hyphen_values = true)]
        bmin: f64,
        #[arg(long, default_value_t = 1.5, allow_hyphen_values = true)]
        bmax: f64,
        /// Grid points; b = 0 is added when the range straddles it
        #[arg(long, default_value_t = 100)]
        n: usize,
    },
    /// Isoperimetric margins of generated or supplied curves (default format csv)
    IsoVerify {
        /// `spindle <a>`, `lune <a>`, `octant`, `polygon <file.json>` or `random-polygon <n>`
        #[arg(long, num_args = 1..=2, required = true, value_names = ["KIND", "ARG"])]
        surface: Vec<String>,
        /// Curve family, or `all` to split the curves evenly between families
        #[arg(long, default_value = "perturbed-caps")]
        family: String,
        /// Number of curves
        #[arg(long, default_value_t = 200)]
        n: usize,
        /// Check one curve read from `{ "samples": [[u, v], ...], "closed": true }` instead (spindles only)
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Smoothed tip of a spindle: coefficients, matching residuals, curvature grid and budget checks
    Smooth {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        eps: f64,
        /// Points in the curvature grid over [0, ε]
        #[arg(long, default_value_t = 21)]
        grid: usize,
        /// Same as --format
        #[arg(long, value_enum)]
        report: Option<Format>,
    },
    /// First mixed Dirichlet-Neumann eigenvalue of a region by finite elements
    DnEigen {
        /// Region description (JSON with keys W, V and optional dirichlet / neumann label lists)
        #[arg(long)]
        region: PathBuf,
        /// Target mesh size, in (0.001, 0.3)
        #[arg(long, default_value_t = 0.05)]
        h: f64,
        /// Also write the mesh in OFF form with a boundary-tag block
        #[arg(long)]
        mesh_out: Option<PathBuf>,
    },
    /// Run the verification suites and write a report; exits 1 if any claim fails
    Verify {
        #[arg(value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Suite grids [default: the shipped config]
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    All,
    Iso,
    FaberKrahn,
    Lemma,
}

fn usage_error(kind: ErrorKind, msg: impl std::fmt::Display) -> ! {
    Cli::command().error(kind, msg).exit()
}

/// Where output goes and in which format.
struct Sink {
    path: Option<PathBuf>,
    format: Format,
}

impl Sink {
    fn resolve(g: &Global, default: Format) -> Sink {
        let (path, implied) = match g.out.as_deref() {
            None => (None, None),
            Some("json") => (None, Some(Format::Json)),
            Some("csv") => (None, Some(Format::Csv)),
            Some(p) => {
                let ext = Path::new(p).extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
                let f = match ext.as_deref() {
                    Some("csv") => Some(Format::Csv),
                    Some("json") => Some(Format::Json),
                    _ => None,
                };
                (Some(PathBuf::from(p)), f)
            }
        };
        let format = match (g.format, implied, g.out.as_deref()) {
            (Some(f), Some(i), Some("json" | "csv")) if f != i => {
                usage_error(ErrorKind::ArgumentConflict, "--out and --format name different formats")
            }
            (Some(f), _, _) => f,
            (None, Some(i), _) => i,
            (None, None, _) => default,
        };
        Sink { path, format }
    }

    fn write(&self, bytes: &[u8]) -> anyhow::Result<()> {
        match &self.path {
            Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
            None => {
                let mut out = io::stdout().lock();
                out.write_all(bytes)?;
                out.flush()?;
                Ok(())
            }
        }
    }

    fn json(&self, v: &Value) -> anyhow::Result<()> {
        let mut s = to_json_string(v);
        s.push('\n');
        self.write(s.as_bytes())
    }

    /// A single record: JSON object, or flattened `quantity,value,tolerance` rows.
    fn record(&self, v: &Value, tolerances: &[(&str, f64)]) -> anyhow::Result<()> {
        match self.format {
            Format::Json => self.json(v),
            Format::Csv => {
                let mut rows = Vec::new();
                flatten("", v, &mut rows);
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["quantity", "value", "tolerance"])?;
                for (k, val) in rows {
                    let tol = tolerances.iter().find(|(n, _)| *n == k).map(|&(_, t)| cell(&json!(t)));
                    w.write_record([k, val, tol.unwrap_or_default()])?;
                }
                self.write(&w.into_inner()?)
            }
        }
    }

    /// Uniform rows: JSON array of objects, or CSV with one column per key.
    fn table(&self, columns: &[&str], rows: &[Vec<Value>]) -> anyhow::Result<()> {
        match self.format {
            Format::Json => {
                let objs: Vec<Value> = rows
                    .iter()
                    .map(|r| Value::Object(columns.iter().map(|c| c.to_string()).zip(r.iter().cloned()).collect()))
                    .collect();
                self.json(&Value::Array(objs))
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(columns)?;
                for r in rows {
                    w.write_record(r.iter().map(cell))?;
                }
                self.write(&w.into_inner()?)
            }
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => format_float(n.as_f64().unwrap_or(f64::NAN), CSV_DIGITS),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(&key(k), x, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| flatten(&key(&i.to_string()), x, out)),
        _ => out.push((prefix.to_string(), cell(v))),
    }
}

/// JSON number for finite floats, `null` otherwise.
fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn cap_eigen(g: &Global, b: f64) -> anyhow::Result<bool> {
    let r = cap_eigenvalue(b, g.tol.unwrap_or(DEFAULT_TOL))?;
    let alpha = char_exponent(r.value)?.alpha;
    let v = json!({
        "b": num(b),
        "lambda": num(r.value),
        "alpha": num(alpha),
        "method": r.method,
        "step": num(r.discretization),
        "error_estimate": num(r.error_estimate),
    });
    Sink::resolve(g, Format::Json).record(&v, &[])?;
    Ok(true)
}

fn bkp_table(g: &Global, bmin: f64, bmax: f64, n: usize) -> anyhow::Result<bool> {
    if n < 2 || bmin.partial_cmp(&bmax) != Some(std::cmp::Ordering::Less) {
        usage_error(ErrorKind::InvalidValue, "need --n >= 2 and --bmin < --bmax");
    }
    let tol = g.tol.unwrap_or(DEFAULT_TOL);
    let mut grid: Vec<f64> = (0..n).map(|k| bmin + (bmax - bmin) * k as f64 / (n - 1) as f64).collect();
    if bmin < 0.0 && bmax > 0.0 && !grid.contains(&0.0) {
        grid.push(0.0);
        grid.sort_by(f64::total_cmp);
    }
    let rows = grid
        .par_iter()
        .map(|&b| {
            let lam = cap_eigenvalue(b, tol)?.value;
            let alpha = char_exponent(lam)?.alpha;
            let other = char_exponent(cap_eigenvalue(-b, tol)?.value)?.alpha;
            Ok(vec![num(b), num(lam), num(alpha), num(alpha + other)])
        })
        .collect::<spindle_core::Result<Vec<_>>>()?;
    Sink::resolve(g, Format::Csv).table(&["b", "lambda", "alpha", "bkp_sum"], &rows)?;
    Ok(true)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolygonFile {
    vertices: Vec<[f64; 3]>,
}

fn parse_surface(words: &[String], seed: u64) -> anyhow::Result<Surface<f64>> {
    let arg = |what: &str| -> &str {
        match words.get(1) {
            Some(s) => s,
            None => usage_error(ErrorKind::InvalidValue, format!("--surface {} needs {what}", words[0])),
        }
    };
    let number = |what: &str| -> f64 {
        arg(what).parse().unwrap_or_else(|_| usage_error(ErrorKind::InvalidValue, format!("--surface: bad {what}")))
    };
    Ok(match words[0].as_str() {
        "spindle" => Surface::Spindle(SpindleParam::new(number("a parameter"))?),
        "lune" => Surface::Doubled(Domain::Lune(Lune::new(number("a parameter"))?)),
        "octant" => Surface::Doubled(Domain::Polygon(SphericalPolygon::new(vec![
            UnitVec::e_x(),
            UnitVec::e_y(),
            UnitVec::e_z(),
        ])?)),
        "polygon" => {
            let file: PolygonFile = serde_json::from_str(&read(Path::new(arg("a file")))?)?;
            let vs = file.vertices.iter().map(|p| UnitVec::new(p[0], p[1], p[2])).collect::<Result<Vec<_>, _>>()?;
            Surface::Doubled(Domain::Polygon(SphericalPolygon::new_convex(vs)?))
        }
        "random-polygon" => {
            let n = number("a vertex count");
            if !(n >= 3.0 && n.fract() == 0.0) {
                usage_error(ErrorKind::InvalidValue, "--surface random-polygon needs an integer >= 3");
            }
            let (_, p) = verify::suite_polygons(false, &[n as usize], seed).remove(0);
            Surface::Doubled(Domain::Polygon(p))
        }
        other => usage_error(ErrorKind::InvalidValue, format!("unknown surface kind '{other}'")),
    })
}

fn iso_verify(g: &Global, surface: &[String], family: &str, n: usize, curve: Option<&Path>) -> anyhow::Result<bool> {
    let s = parse_surface(surface, g.seed)?;
    let sink = Sink::resolve(g, Format::Csv);
    if let Some(path) = curve {
        if !matches!(s, Surface::Spindle(_)) {
            usage_error(ErrorKind::ArgumentConflict, "--curve needs a spindle surface");
        }
        let c: SampledCurve<f64> = SampledCurve::from_json(&read(path)?)?;
        let r = check_curve(&s, &TestBoundary::Spindle(vec![Arc::new(c)]))?;
        let v = json!({
            "L": num(r.l),
            "A": num(r.area),
            "margin": num(r.margin),
            "relative_margin": num(r.relative_margin),
            "pass": r.pass,
            "equality": r.equality,
        });
        sink.record(&v, &[("relative_margin", PASS_TOL)])?;
        return Ok(r.pass);
    }
    let kinds: Vec<FamilyKind> = if family == "all" {
        FamilyKind::ALL.to_vec()
    } else {
        match family.parse() {
            Ok(k) => vec![k],
            Err(e) => usage_error(ErrorKind::InvalidValue, e),
        }
    };
    let mut rows = Vec::with_capacity(n);
    let mut ok = true;
    for (i, kind) in kinds.iter().enumerate() {
        let count = n / kinds.len() + usize::from(i < n % kinds.len());
        for c in IsoTestCurveFamily::new(s.clone(), g.seed, *kind).generate(count)? {
            let r = check_curve(&s, &c.boundary).with_context(|| format!("{kind} curve {}", c.id))?;
            ok &= r.pass;
            rows.push(vec![
                json!(c.id),
                num(r.l),
                num(r.area),
                num(r.margin),
                num(r.relative_margin),
                json!(kind.name()),
                json!(r.pass),
                json!(r.equality),
            ]);
        }
    }
    sink.table(&["id", "L", "A", "margin", "relative_margin", "family", "pass", "equality"], &rows)?;
    Ok(ok)
}

fn smooth(g: &Global, a: f64, eps: f64, grid: usize, report: Option<Format>) -> anyhow::Result<bool> {
    if grid < 2 {
        usage_error(ErrorKind::InvalidValue, "--grid must be at least 2");
    }
    let ap = SpindleParam::new(a)?;
    let s = smoothing_coeffs(ap, eps)?;
    let residuals = s.matching_residuals()?;
    let signs = sign_conditions(&s, SIGN_GRID);
    let tc = total_curvature_smoothed(ap, eps)?;
    let cfg = SuiteConfig::default();
    let cal = calibrate_c_hat(&cfg.lemma.smoothing_a, &cfg.lemma.smoothing_eps)?;
    let tau = std::f64::consts::TAU;
    let gb_error = (tc.total - 2.0 * tau).abs() / (2.0 * tau);
    let tip_bound = ap.tip_mass() + cal.c_hat * eps;
    let curvature: Vec<Value> = (0..grid)
        .map(|k| {
            let u = eps * k as f64 / (grid - 1) as f64;
            json!([num(u), num(smoothed_curvature(&s, u))])
        })
        .collect();
    let gb_ok = gb_error <= cfg.lemma.gauss_bonnet_rel_tol;
    let residual_ok = residuals.iter().all(|r| r.abs() <= cfg.lemma.matching_tol);
    let v = json!({
        "a": num(a),
        "eps": num(eps),
        "coefficients": { "b0": num(s.b0), "b1": num(s.b1), "b2": num(s.b2) },
        "matching_residuals": residuals.iter().map(|&r| num(r)).collect::<Vec<_>>(),
        "sign_conditions": signs,
        "curvature_at_eps": num(smoothed_curvature(&s, eps)),
        "curvature_grid": curvature,
        "total_curvature": num(tc.total),
        "gauss_bonnet_relative_error": num(gb_error),
        "tip_mass": num(tc.tip_mass),
        "tip_mass_bound": num(tip_bound),
        "c_hat": num(cal.c_hat),
        "checks": {
            "matching": residual_ok,
            "signs": signs.holds,
            "gauss_bonnet": gb_ok,
            "tip_mass": tc.tip_mass <= tip_bound,
        },
    });
    let mut global = Global { seed: g.seed, out: g.out.clone(), format: g.format.or(report), tol: g.tol };
    if let (Some(f), Some(r)) = (g.format, report) {
        if f != r {
            usage_error(ErrorKind::ArgumentConflict, "--report and --format name different formats");
        }
        global.format = Some(f);
    }
    Sink::resolve(&global, Format::Json).record(
        &v,
        &[
            ("matching_residuals.0", cfg.lemma.matching_tol),
            ("matching_residuals.1", cfg.lemma.matching_tol),
            ("matching_residuals.2", cfg.lemma.matching_tol),
            ("gauss_bonnet_relative_error", cfg.lemma.gauss_bonnet_rel_tol),
        ],
    )?;
    Ok(residual_ok && signs.holds && gb_ok && tc.tip_mass <= tip_bound)
}

fn dn_eigen(g: &Global, region: &Path, h: f64, mesh_out: Option<&Path>) -> anyhow::Result<bool> {
    let spec = RegionSpec::from_json(&read(region)?)?;
    let w = spec.w.domain::<f64>()?;
    let r = spec.region::<f64>()?;
    let tol = g.tol.unwrap_or(FEM_TOL);
    let mesh = mesh_spherical_region(&r, h)?;
    if let Some(p) = mesh_out {
        let f = fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
        mesh.write_off(io::BufWriter::new(f)).with_context(|| format!("writing {}", p.display()))?;
    }
    let mu = region_dn_eigenvalue(&r, h, tol)?;
    let alpha = char_exponent(mu.value)?.alpha;
    let bound = lune_lower_bound(w.area(), r.area(), tol)?;
    let v = json!({
        "mu": num(mu.value),
        "alpha": num(alpha),
        "error_estimate": num(mu.error_estimate),
        "h": num(h),
        "tol": num(tol),
        "area_w": num(w.area()),
        "area_v": num(r.area()),
        "dirichlet_length": num(r.tagged_length(BoundaryTag::Dirichlet)),
        "neumann_length": num(r.tagged_length(BoundaryTag::Neumann)),
        "lower_bound": num(bound.value),
        "bound_margin": num(mu.value - bound.value),
        "mesh": {
            "vertices": mesh.vertices.len(),
            "triangles": mesh.triangles.len(),
            "min_angle_deg": num(mesh.min_angle().to_degrees()),
            "min_angle_gate_deg": num(MIN_ANGLE_DEG),
            "max_edge": num(mesh.max_edge()),
        },
    });
    Sink::resolve(g, Format::Json).record(&v, &[("error_estimate", tol)])?;
    Ok(true)
}

fn verify_cmd(g: &Global, suite: Suite, config: Option<&Path>) -> anyhow::Result<bool> {
    let cfg = match config {
        Some(p) => SuiteConfig::from_json(&read(p)?)?,
        None => SuiteConfig::default(),
    };
    let report = match suite {
        Suite::All => verify::run_all(&cfg, g.seed),
        Suite::Iso => verify::run_theorem_iso_suite(&cfg, g.seed),
        Suite::FaberKrahn => verify::run_faber_krahn_suite(&cfg, g.seed),
        Suite::Lemma => verify::run_lemma_suite(&cfg, g.seed),
    };
    let sink = Sink::resolve(g, Format::Json);
    match sink.format {
        Format::Json => sink.write(report.to_json().as_bytes())?,
        Format::Csv => {
            let mut buf = Vec::new();
            report.write_csv(&mut buf)?;
            sink.write(&buf)?;
        }
    }
    let s = report.summary;
    eprintln!("{} pass, {} fail, {} informational", s.pass, s.fail, s.informational);
    for c in report.claims.iter().filter(|c| c.verdict == verify::Verdict::Fail) {
        eprintln!("FAIL {}: {}", c.id, c.failures.first().map(String::as_str).unwrap_or(""));
    }
    Ok(report.passed())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let g = &cli.global;
    if let Some(t) = g.tol {
        if !(t > 0.0 && t < 1.0) {
            usage_error(ErrorKind::InvalidValue, "--tol must lie in (0, 1)");
        }
    }
    match &cli.cmd {
        Cmd::CapEigen { b } => cap_eigen(g, *b),
        Cmd::BkpTable { bmin, bmax, n } => bkp_table(g, *bmin, *bmax, *n),
        Cmd::IsoVerify { surface, family, n, curve } => iso_verify(g, surface, family, *n, curve.as_deref()),
        Cmd::Smooth { a, eps, grid, report } => smooth(g, *a, *eps, *grid, *report),
        Cmd::DnEigen { region, h, mesh_out } => dn_eigen(g, region, *h, mesh_out.as_deref()),
        Cmd::Verify { suite, config } => verify_cmd(g, *suite, config.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
