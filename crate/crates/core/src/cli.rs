//! The `curvforge` command line.
//!
//! Exit codes: 0 success, 1 `NOT_CERTIFIED` (certify only), 2 unparsable
//! input or flags, 3 failed validation or unsupported mode, 4 unknown
//! catalog name.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bundle::{BundleVector, Mode};
use crate::certify::{self, Bound, Certificate, SweepTable, DEFAULT_T_MAX};
use crate::error::Error;
use crate::linalg::{self, Mat, Vector};
use crate::scenario::{self, Failure, LoadError, Scenario, SCHEMA_VERSION};
use crate::validation::ValidationReport;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_CERTIFIED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_UNKNOWN_CATALOG: i32 = 4;

pub const THREADS_ENV: &str = "CURVFORGE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "curvforge", version, about = "Cheeger deformations and Ricci positivity certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Both,
}

impl Format {
    fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }

    fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Lower,
    Exact,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Lower => Mode::Lower,
            ModeArg::Exact => Mode::Exact,
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// Catalog name or path to a scenario JSON file.
    pub scenario: String,
    /// Directory for `<scenario>_<command>.{json,csv}`; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    pub format: Format,
    /// Validation and positivity tolerance.
    #[arg(long, default_value_t = crate::tol::IDENTITY)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct Grid {
    /// Comma-separated, strictly ascending, non-negative values of t.
    #[arg(long = "t", value_delimiter = ',', num_args = 1.., default_value = "0,0.1,1,10,100")]
    pub t: Vec<f64>,
    #[arg(long, value_enum, default_value = "lower")]
    pub mode: ModeArg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a scenario without computing anything.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Print P_t, C_t, P̃_t and C̃_t on a grid of t.
    Deform {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
    },
    /// Evaluate the curvature bounds on vectors given in [X, X_F, U] coordinates.
    Curvature {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y: Option<Vec<f64>>,
    },
    /// Minimum Ricci lower bound along a grid, ending with the t = ∞ row.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
    },
    /// Asymptotic certificate and the first certified finite t.
    Certify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "lower")]
        mode: ModeArg,
        #[arg(long, default_value_t = DEFAULT_T_MAX)]
        t_max: f64,
    },
    /// List the built-in scenarios, or emit one as a scenario file.
    Catalog {
        name: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
pub struct Failed {
    pub code: i32,
    pub message: String,
}

impl From<LoadError> for Failed {
    fn from(e: LoadError) -> Self {
        Failed {
            code: e.exit_code(),
            message: e.to_string(),
        }
    }
}

impl From<Error> for Failed {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BadGrid(_) | Error::NegativeTime(_) | Error::DimensionMismatch { .. } => EXIT_PARSE,
            _ => EXIT_VALIDATION,
        };
        Failed {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failed(path: &Path, e: impl std::fmt::Display) -> Failed {
    Failed {
        code: EXIT_PARSE,
        message: format!("cannot write {}: {e}", path.display()),
    }
}

/// One emitted report: JSON document and optional CSV table.
struct Report {
    json: serde_json::Value,
    csv: Option<String>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    scenario: &'a str,
    #[serde(flatten)]
    body: T,
}

fn envelope<T: Serialize>(command: &str, scenario: &str, body: T) -> serde_json::Value {
    serde_json::to_value(Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        scenario,
        body,
    })
    .expect("report serializes")
}

/// CSV number format: 17 significant digits, round-trips any `f64`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn fmt_bound(b: Bound) -> String {
    match b {
        Bound::Value(v) => fmt_num(v),
        Bound::NotApplicable => "not_applicable".into(),
    }
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8 csv")
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn emit(io: &mut Io, report: &Report, common: &Common, scenario: &str, command: &str) -> Result<(), Failed> {
    let json = serde_json::to_string_pretty(&report.json).expect("json") + "\n";
    let csv = report.csv.as_deref().filter(|_| common.format.csv());
    match &common.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| io_failed(dir, e))?;
            let stem = format!("{}_{command}", file_stem(scenario));
            if common.format.json() {
                let path = dir.join(format!("{stem}.json"));
                std::fs::write(&path, json).map_err(|e| io_failed(&path, e))?;
                let _ = writeln!(io.out, "{}", path.display());
            }
            if let Some(csv) = csv {
                let path = dir.join(format!("{stem}.csv"));
                std::fs::write(&path, csv).map_err(|e| io_failed(&path, e))?;
                let _ = writeln!(io.out, "{}", path.display());
            }
        }
        None => {
            if common.format.json() {
                let _ = io.out.write_all(json.as_bytes());
            }
            if let Some(csv) = csv {
                let _ = io.out.write_all(csv.as_bytes());
            }
        }
    }
    Ok(())
}

// ---- validate ----

#[derive(Serialize)]
struct ValidateBody<'a> {
    passed: bool,
    provenance: Option<&'a scenario::Provenance>,
    failures: Vec<Failure>,
    algebra: Option<&'a ValidationReport>,
    #[serde(rename = "oracle_P")]
    oracle_p: Option<ValidationReport>,
    #[serde(rename = "oracle_F")]
    oracle_f: Option<ValidationReport>,
    dims: Option<Dims>,
    exact_available: Option<bool>,
    preserves_complement: Option<bool>,
}

#[derive(Serialize)]
struct Dims {
    algebra: usize,
    isotropy: usize,
    h_p: usize,
    h_f: usize,
    k: usize,
}

fn validate(io: &mut Io, common: &Common) -> Result<i32, Failed> {
    let loaded = scenario::load_scenario(&common.scenario, common.tol);
    let (body, name, code) = match &loaded {
        Ok(s) => {
            let b = &s.bundle;
            let d = b.dims();
            let body = ValidateBody {
                passed: true,
                provenance: Some(&s.provenance),
                failures: Vec::new(),
                algebra: Some(&s.algebra_report),
                oracle_p: Some(b.principal().oracle().validate(common.tol)),
                oracle_f: Some(b.fiber().oracle().validate(common.tol)),
                dims: Some(Dims {
                    algebra: b.algebra().dim(),
                    isotropy: b.fiber_split().isotropy_dim(),
                    h_p: d.h_p,
                    h_f: d.h_f,
                    k: d.k,
                }),
                exact_available: Some(s.exact_available()),
                preserves_complement: Some(b.preserves_complement()),
            };
            (body, s.name.clone(), EXIT_OK)
        }
        Err(LoadError::Validation { failures, report }) => {
            let body = ValidateBody {
                passed: false,
                provenance: None,
                failures: failures.clone(),
                algebra: report.as_ref(),
                oracle_p: None,
                oracle_f: None,
                dims: None,
                exact_available: None,
                preserves_complement: None,
            };
            let _ = writeln!(io.err, "{}", loaded.as_ref().unwrap_err());
            (body, scenario_label(&common.scenario), EXIT_VALIDATION)
        }
        Err(e) => return Err(e.clone().into()),
    };
    let report = Report {
        json: envelope("validate", &name, body),
        csv: None,
    };
    emit(io, &report, common, &name, "validate")?;
    Ok(code)
}

fn scenario_label(arg: &str) -> String {
    Path::new(arg)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| arg.to_string())
}

// ---- deform ----

#[derive(Serialize)]
struct DeformRow {
    t: f64,
    #[serde(rename = "P_t")]
    p_t: Vec<Vec<f64>>,
    #[serde(rename = "C_t")]
    c_t: Vec<Vec<f64>>,
    #[serde(rename = "P_F_t")]
    p_f_t: Vec<Vec<f64>>,
    #[serde(rename = "Ptilde_t")]
    ptilde_t: Vec<Vec<f64>>,
    #[serde(rename = "Ctilde_t")]
    ctilde_t: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct DeformBody {
    mode: Mode,
    rows: Vec<DeformRow>,
}

fn deform(s: &Scenario, grid: &Grid) -> Result<Report, Failed> {
    let mode = grid.mode.into();
    certify::check_grid(&grid.t)?;
    let b = &s.bundle;
    let mut rows = Vec::new();
    let mut csv_rows = Vec::new();
    for &t in &grid.t {
        let st = b.at(t, mode)?;
        let fiber = crate::cheeger::deform_orbit_tensor(b.p_f(), t)?;
        let mats: [(&str, &Mat); 5] = [
            ("P_t", st.deformation().pt()),
            ("C_t", st.deformation().ct_vertical()),
            ("P_F_t", fiber.pt()),
            ("Ptilde_t", st.ptilde()),
            ("Ctilde_t", st.ctilde()),
        ];
        for (name, m) in mats {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    csv_rows.push(vec![fmt_num(t), name.to_string(), i.to_string(), j.to_string(), fmt_num(m[(i, j)])]);
                }
            }
        }
        rows.push(DeformRow {
            t,
            p_t: linalg::mat_to_rows(mats[0].1),
            c_t: linalg::mat_to_rows(mats[1].1),
            p_f_t: linalg::mat_to_rows(mats[2].1),
            ptilde_t: linalg::mat_to_rows(mats[3].1),
            ctilde_t: linalg::mat_to_rows(mats[4].1),
        });
    }
    Ok(Report {
        json: envelope("deform", &s.name, DeformBody { mode, rows }),
        csv: Some(csv_table(&["t", "matrix", "row", "col", "value"], &csv_rows)),
    })
}

// ---- curvature ----

#[derive(Serialize)]
struct CurvatureRow {
    t: f64,
    sec_lower: Option<f64>,
    ricci_ht_lower: f64,
}

#[derive(Serialize)]
struct CurvatureBody {
    mode: Mode,
    x: Vec<f64>,
    y: Option<Vec<f64>>,
    ricci_asymptotic_lb: f64,
    rows: Vec<CurvatureRow>,
}

fn curvature(s: &Scenario, grid: &Grid, x: &[f64], y: Option<&[f64]>) -> Result<Report, Failed> {
    let mode = grid.mode.into();
    certify::check_grid(&grid.t)?;
    let b = &s.bundle;
    let dims = b.dims();
    let xv = BundleVector::from_flat(&Vector::from_column_slice(x), dims)?;
    let yv = y
        .map(|y| BundleVector::from_flat(&Vector::from_column_slice(y), dims))
        .transpose()?;
    let asym = b.ricci_asymptotic_lb(&xv)?;
    let mut rows = Vec::new();
    for &t in &grid.t {
        let st = b.at(t, mode)?;
        let sec = yv.as_ref().map(|yv| st.sec_lower(&xv, yv)).transpose()?;
        rows.push(CurvatureRow {
            t,
            sec_lower: sec,
            ricci_ht_lower: st.ricci_ht_lower(&xv)?,
        });
    }
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                fmt_num(r.t),
                r.sec_lower.map(fmt_num).unwrap_or_default(),
                fmt_num(r.ricci_ht_lower),
                fmt_num(asym),
            ]
        })
        .collect();
    let body = CurvatureBody {
        mode,
        x: x.to_vec(),
        y: y.map(<[f64]>::to_vec),
        ricci_asymptotic_lb: asym,
        rows,
    };
    Ok(Report {
        json: envelope("curvature", &s.name, body),
        csv: Some(csv_table(&["t", "sec_lower", "ricci_ht_lower", "ricci_asymptotic_lb"], &csv_rows)),
    })
}

// ---- sweep ----

fn sweep(io: &mut Io, s: &Scenario, grid: &Grid, common: &Common) -> Result<Report, Failed> {
    let start = Instant::now();
    let table: SweepTable = certify::sweep(&s.bundle, &grid.t, grid.mode.into(), common.tol)?;
    let _ = writeln!(io.err, "sweep: {} rows in {:.3} s", table.rows.len(), start.elapsed().as_secs_f64());
    let mut csv_rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt_num(r.t),
                fmt_num(r.min_ricci_lb),
                fmt_num(r.ptilde_residual),
                fmt_num(r.lift_residual),
            ]
        })
        .collect();
    csv_rows.push(vec![
        fmt_num(f64::INFINITY),
        fmt_num(table.asymptotic.min_ricci_lb),
        fmt_num(0.0),
        fmt_num(0.0),
    ]);
    Ok(Report {
        json: envelope("sweep", &s.name, &table),
        csv: Some(csv_table(&["t", "min_ricci_lb", "ptilde_residual", "lift_residual"], &csv_rows)),
    })
}

// ---- certify ----

fn certificate_csv(c: &Certificate) -> String {
    let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
    let row = vec![
        format!("{:?}", c.verdict),
        fmt_bound(c.r_p),
        fmt_bound(c.r_f),
        fmt_bound(c.c),
        fmt_num(c.asymptotic_min),
        opt(c.min_t),
        opt(c.min_t_value),
        c.mode.to_string(),
        fmt_num(c.tol),
    ];
    csv_table(
        &["verdict", "r_P", "r_F", "C", "asymptotic_min", "min_t", "min_t_value", "mode", "tol"],
        &[row],
    )
}

fn certify_cmd(io: &mut Io, s: &Scenario, common: &Common, mode: Mode, t_max: f64) -> Result<(Report, bool), Failed> {
    if mode == Mode::Exact && !s.exact_available() {
        return Err(Error::UnsupportedMode(format!("scenario {} has no exact model; use --mode lower", s.name)).into());
    }
    let start = Instant::now();
    let cert = certify::certify(&s.bundle, common.tol, t_max, mode)?;
    let _ = writeln!(io.err, "certify: {:?} in {:.3} s", cert.verdict, start.elapsed().as_secs_f64());
    for r in &cert.reasons {
        let _ = writeln!(io.err, "  {r}");
    }
    let ok = cert.verdict.is_certified();
    let report = Report {
        csv: Some(certificate_csv(&cert)),
        json: envelope("certify", &s.name, &cert),
    };
    Ok((report, ok))
}

// ---- catalog ----

fn catalog(io: &mut Io, name: Option<&str>, out: Option<&Path>) -> Result<i32, Failed> {
    match name {
        None => {
            let entries = scenario::catalog_entries();
            let width = entries.iter().map(|e| e.0.len()).max().unwrap_or(0);
            for (n, d) in &entries {
                let _ = writeln!(io.out, "{n:width$}  {d}");
            }
            if let Some(dir) = out {
                std::fs::create_dir_all(dir).map_err(|e| io_failed(dir, e))?;
                for (n, _) in entries {
                    write_catalog_file(n, dir)?;
                }
            }
        }
        Some(n) => {
            let file = scenario::catalog_file(n).ok_or_else(|| LoadError::UnknownCatalog(n.to_string()))?;
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(|e| io_failed(dir, e))?;
                    write_catalog_file(n, dir)?;
                }
                None => {
                    let _ = writeln!(io.out, "{}", serde_json::to_string_pretty(&file).expect("json"));
                }
            }
        }
    }
    Ok(EXIT_OK)
}

fn write_catalog_file(name: &str, dir: &Path) -> Result<(), Failed> {
    let file = scenario::catalog_file(name).expect("catalog entry");
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(&file).expect("json") + "\n").map_err(|e| io_failed(&path, e))
}

// ---- dispatch ----

fn dispatch(io: &mut Io, cli: Cli) -> Result<i32, Failed> {
    match &cli.command {
        Command::Validate { common } => validate(io, common),
        Command::Catalog { name, out } => catalog(io, name.as_deref(), out.as_deref()),
        Command::Deform { common, grid } => {
            let s = scenario::load_scenario(&common.scenario, common.tol)?;
            emit(io, &deform(&s, grid)?, common, &s.name, "deform")?;
            Ok(EXIT_OK)
        }
        Command::Curvature { common, grid, x, y } => {
            let s = scenario::load_scenario(&common.scenario, common.tol)?;
            emit(io, &curvature(&s, grid, x, y.as_deref())?, common, &s.name, "curvature")?;
            Ok(EXIT_OK)
        }
        Command::Sweep { common, grid } => {
            let s = scenario::load_scenario(&common.scenario, common.tol)?;
            let report = sweep(io, &s, grid, common)?;
            emit(io, &report, common, &s.name, "sweep")?;
            Ok(EXIT_OK)
        }
        Command::Certify { common, mode, t_max } => {
            let s = scenario::load_scenario(&common.scenario, common.tol)?;
            let (report, ok) = certify_cmd(io, &s, common, (*mode).into(), *t_max)?;
            emit(io, &report, common, &s.name, "certify")?;
            Ok(if ok { EXIT_OK } else { EXIT_NOT_CERTIFIED })
        }
    }
}

fn thread_count() -> Result<usize, Failed> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(v) => v.trim().parse().map_err(|_| Failed {
            code: EXIT_PARSE,
            message: format!("{THREADS_ENV} must be a non-negative integer, got `{v}`"),
        }),
    }
}

/// Output streams of one invocation.
pub struct Io<'a> {
    pub out: &'a mut (dyn Write + Send),
    pub err: &'a mut (dyn Write + Send),
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I, io: &mut Io) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { io.err.write_all(text.as_bytes()) } else { io.out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = thread_count().and_then(|n| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| Failed {
            code: EXIT_PARSE,
            message: format!("cannot start thread pool: {e}"),
        })?;
        pool.install(|| dispatch(io, cli))
    });
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(io.err, "error: {}", f.message);
            f.code
        }
    }
}

/// [`run`] on the process's stdout and stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let (mut out, mut err) = (std::io::stdout(), std::io::stderr());
    run(args, &mut Io { out: &mut out, err: &mut err })
}

/// [`run`] with both streams captured: `(exit code, stdout, stderr)`.
pub fn run_captured<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(args, &mut Io { out: &mut out, err: &mut err });
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_numbers_round_trip() {
        for x in [0.5, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn bad_flags_exit_2() {
        assert_eq!(run_captured(["curvforge", "sweep", "su2-full", "--t", "abc"]).0, EXIT_PARSE);
        assert_eq!(run_captured(["curvforge", "frobnicate"]).0, EXIT_PARSE);
    }

    #[test]
    fn unknown_catalog_exit_4() {
        let (code, _, err) = run_captured(["curvforge", "certify", "nope", "--format", "json"]);
        assert_eq!(code, EXIT_UNKNOWN_CATALOG);
        assert!(err.contains("su2-full"));
    }
}
