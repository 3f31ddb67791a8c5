//! Command-line front end.
//!
//! Three subcommands: `solve` runs one solver and writes a JSON report plus
//! optional CSV side outputs, `table` reruns the published experiment grids,
//! and `eval` evaluates a saved model at new points.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::ipm::{ipm_solve, IpmConfig, Z0Mode};
use crate::lawson::{lawson_solve, HistoryRow, LawsonConfig, SolveReport, Status};
use crate::orthobasis::Recurrence;
use crate::problem::{BasisSpec, Builtin, Mode, Problem, Scalar};
use crate::refcheck::{detect_reference_points, lp_reference, DEFAULT_LP_CAP, DEFAULT_REF_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_CAPPED: i32 = 2;

const MODEL_FORMAT: &str = "minimax-dual-model/1";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}, line {line}: {msg}")]
    Parse { path: String, line: u64, msg: String },
    #[error("{0}")]
    Solver(#[from] Error),
    #[error("model digest mismatch: stored {stored}, computed {computed}")]
    DigestMismatch { stored: String, computed: String },
    #[error("{0}")]
    Usage(String),
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "minimax", version, about = "Best linear Chebyshev approximation on finite node sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve one problem and write a report.
    Solve(SolveArgs),
    /// Rerun the grid of Table 1 (real) or Table 2 (complex).
    Table(TableArgs),
    /// Evaluate a saved model at new points.
    Eval(EvalArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Ipm,
    Lawson,
    Lp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Z0Arg {
    Ones,
    MuOverW,
}

#[derive(clap::Args, Debug, Clone)]
pub struct SolveArgs {
    /// Built-in problem: f1, f2, g1, g2 or g2-literal.
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    pub problem: Option<String>,
    /// CSV with header x_re,x_im,f_re,f_im (imaginary columns optional).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Dimension n of the monomial space {1, x, ..., x^(n-1)}.
    #[arg(long)]
    pub dim: usize,
    #[arg(long, value_enum, default_value = "ipm")]
    pub method: Method,
    /// Lawson update exponent.
    #[arg(long, default_value_t = 1)]
    pub q: u32,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Relative d-change tolerance (IPM).
    #[arg(long)]
    pub tol_d: Option<f64>,
    /// KKT residual tolerance (IPM).
    #[arg(long)]
    pub tol_kkt: Option<f64>,
    /// Relative change tolerance (Lawson).
    #[arg(long)]
    pub tol_stop: Option<f64>,
    /// Weight filter threshold: a number, `c/m`, or `eps`.
    #[arg(long)]
    pub filter_tol: Option<String>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub mu0: Option<f64>,
    #[arg(long, value_enum)]
    pub z0: Option<Z0Arg>,
    /// Report JSON path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub history: Option<PathBuf>,
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Fitted values on `--grid` (or on the problem nodes).
    #[arg(long)]
    pub curve: Option<PathBuf>,
    /// Evaluation points, CSV with header x_re[,x_im].
    #[arg(long)]
    pub grid: Option<PathBuf>,
    /// Model file for `eval`.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(clap::Args, Debug, Clone)]
pub struct TableArgs {
    /// 1 or 2.
    pub which: String,
    /// Comparison CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args, Debug, Clone)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// CSV with header x_re[,x_im].
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Table(a) => cmd_table(&a),
        Command::Eval(a) => cmd_eval(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

/// Accepts `1e-6`, `1e-6/m` (scaled by the node count) and `eps`.
pub fn parse_filter_tol(s: &str, m: usize) -> CliResult<f64> {
    let s = s.trim();
    let bad = || CliError::Usage(format!("invalid filter tolerance `{s}`"));
    let v = if s == "eps" {
        f64::EPSILON
    } else if let Some(c) = s.strip_suffix("/m") {
        c.trim().parse::<f64>().map_err(|_| bad())? / m as f64
    } else {
        s.parse::<f64>().map_err(|_| bad())?
    };
    if !(v >= 0.0 && v.is_finite()) {
        return Err(bad());
    }
    Ok(v)
}

fn open(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn create(path: &Path) -> CliResult<File> {
    File::create(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line());
    CliError::Parse { path: path.display().to_string(), line, msg: e.to_string() }
}

/// Reads CSV columns by header name; missing optional columns read as 0.
fn read_columns(path: &Path, required: &[&str], optional: &[&str]) -> CliResult<(Vec<Vec<f64>>, Vec<bool>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open(path)?);
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let mut idx = Vec::new();
    for name in required {
        let i = find(name).ok_or_else(|| CliError::Parse {
            path: path.display().to_string(),
            line: 1,
            msg: format!("missing column `{name}`"),
        })?;
        idx.push(Some(i));
    }
    let present: Vec<bool> = optional.iter().map(|n| find(n).is_some()).collect();
    idx.extend(optional.iter().map(|n| find(n)));
    let mut cols = vec![Vec::new(); idx.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        for (c, i) in cols.iter_mut().zip(&idx) {
            let v = match i {
                None => 0.0,
                Some(i) => {
                    let field = rec.get(*i).unwrap_or("");
                    field.parse::<f64>().map_err(|_| CliError::Parse {
                        path: path.display().to_string(),
                        line,
                        msg: format!("cannot parse `{field}` as a number"),
                    })?
                }
            };
            c.push(v);
        }
    }
    Ok((cols, present))
}

/// Loads `x_re,x_im,f_re,f_im`; without imaginary columns the data is real.
pub fn read_problem_csv(path: &Path, n: usize) -> CliResult<Problem> {
    let (cols, present) = read_columns(path, &["x_re", "f_re"], &["x_im", "f_im"])?;
    let mode = if present.iter().any(|&p| p) { Mode::Complex } else { Mode::Real };
    let nodes = cols[0].iter().zip(&cols[2]).map(|(&r, &i)| Scalar::new(r, i)).collect();
    let values = cols[1].iter().zip(&cols[3]).map(|(&r, &i)| Scalar::new(r, i)).collect();
    Ok(Problem::new(nodes, values, BasisSpec::Monomial(n), mode)?)
}

pub fn read_points_csv(path: &Path) -> CliResult<Vec<Scalar>> {
    let (cols, _) = read_columns(path, &["x_re"], &["x_im"])?;
    Ok(cols[0].iter().zip(&cols[1]).map(|(&r, &i)| Scalar::new(r, i)).collect())
}

/// Result of any of the three methods, in report form.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub method: String,
    pub status: Status,
    pub eta: f64,
    pub eta_dual: f64,
    pub d: f64,
    pub iterations: usize,
    pub active_nodes: usize,
    pub reference_indices: Vec<usize>,
    pub rho_estimate: Option<f64>,
    pub history: Vec<HistoryRow>,
    pub w: Vec<f64>,
    pub r: Vec<Scalar>,
    pub recurrence: Recurrence,
    pub coeffs: Vec<Scalar>,
}

impl Outcome {
    fn from_report(rep: SolveReport) -> CliResult<Self> {
        let recurrence = rep.fit.basis.recurrence()?;
        Ok(Self {
            method: rep.method,
            status: rep.status,
            eta: rep.eta,
            eta_dual: rep.eta_dual,
            d: rep.d,
            iterations: rep.iterations,
            active_nodes: rep.active_nodes,
            reference_indices: rep.reference_set.indices,
            rho_estimate: rep.rho_estimate,
            history: rep.history,
            w: rep.w,
            r: rep.r,
            recurrence,
            coeffs: rep.fit.atilde,
        })
    }
}

/// Runs the configured method; the returned `Value` echoes the config.
pub fn run_method(problem: &Problem, a: &SolveArgs) -> CliResult<(Outcome, Value)> {
    let eps_w = match &a.filter_tol {
        Some(s) => parse_filter_tol(s, problem.m())?,
        None => 0.0,
    };
    match a.method {
        Method::Ipm => {
            let mut cfg = IpmConfig { eps_w, ..IpmConfig::default() };
            if let Some(v) = a.tau {
                cfg.tau = v;
            }
            if let Some(v) = a.mu0 {
                cfg.mu0 = v;
            }
            if let Some(v) = a.tol_d {
                cfg.eps_d = v;
            }
            if let Some(v) = a.tol_kkt {
                cfg.eps_k = v;
            }
            if let Some(v) = a.max_iter {
                cfg.k_max = v;
            }
            if let Some(z) = a.z0 {
                cfg.z0_mode = match z {
                    Z0Arg::Ones => Z0Mode::Ones,
                    Z0Arg::MuOverW => Z0Mode::MuOverW,
                };
            }
            let echo = json!({
                "tau": cfg.tau, "mu0": cfg.mu0, "eps_d": cfg.eps_d, "eps_k": cfg.eps_k,
                "k_max": cfg.k_max, "eps_w": cfg.eps_w,
                "z0": match cfg.z0_mode { Z0Mode::Ones => "ones", Z0Mode::MuOverW => "mu-over-w" },
            });
            Ok((Outcome::from_report(ipm_solve(problem, &cfg)?)?, echo))
        }
        Method::Lawson => {
            let mut cfg = LawsonConfig { q: a.q, eps_w, ..LawsonConfig::default() };
            if let Some(v) = a.max_iter {
                cfg.max_iter = v;
            }
            if let Some(v) = a.tol_stop {
                cfg.eps_stop = v;
            }
            let echo = json!({ "q": cfg.q, "max_iter": cfg.max_iter, "eps_stop": cfg.eps_stop, "eps_w": cfg.eps_w });
            Ok((Outcome::from_report(lawson_solve(problem, &cfg)?)?, echo))
        }
        Method::Lp => {
            if a.tau.is_some() || a.mu0.is_some() || a.filter_tol.is_some() {
                return Err(CliError::Usage("--tau, --mu0 and --filter-tol do not apply to --method lp".into()));
            }
            Ok((lp_outcome(problem)?, json!({ "cap": DEFAULT_LP_CAP })))
        }
    }
}

fn lp_outcome(problem: &Problem) -> CliResult<Outcome> {
    let lp = lp_reference(problem, DEFAULT_LP_CAP)?;
    let r = lp.residual(problem)?;
    // |t_j| sums to one: the multipliers are optimal dual weights
    let mut w = vec![0.0; problem.m()];
    for (&i, &t) in lp.basic_indices.iter().zip(&lp.multipliers) {
        w[i] = t.abs();
    }
    let d: f64 = w.iter().zip(&r).map(|(wi, ri)| wi * ri.norm_sqr()).sum();
    let refset = detect_reference_points(&r, lp.eta, DEFAULT_REF_TOL, problem.mode());
    let r_inf = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let w_inf = w.iter().copied().fold(0.0, f64::max);
    Ok(Outcome {
        method: "lp".into(),
        status: Status::Converged,
        eta: lp.eta,
        eta_dual: d.max(0.0).sqrt(),
        d,
        iterations: lp.pivots,
        active_nodes: lp.basic_indices.len(),
        reference_indices: refset.indices,
        rho_estimate: None,
        history: vec![HistoryRow { iter: lp.pivots, d, r_inf, w_inf, kkt_inf: None }],
        w,
        r,
        recurrence: lp.basis.recurrence()?,
        coeffs: lp.q_coefficients(),
    })
}

/// JSON report; see `schema/report.schema.json`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ReportFile {
    pub method: String,
    pub problem: String,
    pub n: usize,
    pub m: usize,
    pub mode: Mode,
    pub status: Status,
    pub eta: f64,
    pub eta_dual: f64,
    pub d: f64,
    pub iterations: usize,
    pub active_nodes: usize,
    pub reference_indices: Vec<usize>,
    /// `[re, im]` of each reference node.
    pub reference_nodes: Vec<[f64; 2]>,
    pub rho_estimate: Option<f64>,
    pub config: Value,
    pub wall_ms: f64,
}

/// Saved fit: the Hessenberg recurrence and coefficients, plus the nodes it
/// was built on and their digest.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ModelFile {
    pub format: String,
    pub mode: Mode,
    pub recurrence: Recurrence,
    pub coeffs: Vec<Scalar>,
    pub nodes: Vec<Scalar>,
    pub nodes_sha256: String,
}

/// sha256 over the little-endian bytes of `(re, im)` of every node.
pub fn nodes_digest(nodes: &[Scalar]) -> String {
    let mut h = Sha256::new();
    for z in nodes {
        h.update(z.re.to_le_bytes());
        h.update(z.im.to_le_bytes());
    }
    hex::encode(h.finalize())
}

impl ModelFile {
    pub fn new(problem: &Problem, recurrence: Recurrence, coeffs: Vec<Scalar>) -> Self {
        Self {
            format: MODEL_FORMAT.into(),
            mode: problem.mode(),
            recurrence,
            coeffs,
            nodes: problem.nodes().to_vec(),
            nodes_sha256: nodes_digest(problem.nodes()),
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let mut s = String::new();
        open(path)?.read_to_string(&mut s).map_err(io_err(path))?;
        let model: ModelFile = serde_json::from_str(&s).map_err(|e| CliError::Parse {
            path: path.display().to_string(),
            line: e.line() as u64,
            msg: e.to_string(),
        })?;
        if model.format != MODEL_FORMAT {
            return Err(CliError::Usage(format!("unsupported model format `{}`", model.format)));
        }
        model.verify()?;
        Ok(model)
    }

    pub fn verify(&self) -> CliResult<()> {
        let computed = nodes_digest(&self.nodes);
        if computed != self.nodes_sha256 {
            return Err(CliError::DigestMismatch { stored: self.nodes_sha256.clone(), computed });
        }
        Ok(())
    }

    pub fn evaluate(&self, v: &[Scalar]) -> CliResult<Vec<Scalar>> {
        let mut p = self.recurrence.evaluate(&self.coeffs, v)?;
        if self.mode == Mode::Real && v.iter().all(|z| z.im == 0.0) {
            p.iter_mut().for_each(|z| z.im = 0.0);
        }
        Ok(p)
    }
}

fn write_json(path: Option<&Path>, value: &impl Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    match path {
        Some(p) => {
            let mut f = create(p)?;
            writeln!(f, "{text}").map_err(io_err(p))
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Shortest round-trip text, in exponent form outside `[1e-4, 1e16)`.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e16).contains(&a) || !a.is_finite() {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<File>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

fn write_rows(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_history(path: &Path, history: &[HistoryRow]) -> CliResult<()> {
    write_rows(
        path,
        &["iter", "d", "r_inf", "w_inf", "kkt_inf"],
        history.iter().map(|h| {
            vec![
                h.iter.to_string(),
                num(h.d),
                num(h.r_inf),
                num(h.w_inf),
                h.kkt_inf.map(num).unwrap_or_default(),
            ]
        }),
    )
}

pub fn write_weights(path: &Path, problem: &Problem, w: &[f64], r: &[Scalar]) -> CliResult<()> {
    write_rows(
        path,
        &["index", "x_re", "x_im", "w", "r_abs"],
        problem.nodes().iter().enumerate().map(|(i, x)| {
            vec![i.to_string(), num(x.re), num(x.im), num(w[i]), num(r[i].norm())]
        }),
    )
}

pub fn write_curve(path: &Path, points: &[Scalar], p: &[Scalar]) -> CliResult<()> {
    write_rows(
        path,
        &["x_re", "x_im", "p_re", "p_im"],
        points
            .iter()
            .zip(p)
            .map(|(x, v)| vec![num(x.re), num(x.im), num(v.re), num(v.im)]),
    )
}

pub fn load_problem(a: &SolveArgs) -> CliResult<(Problem, String)> {
    match (&a.problem, &a.input) {
        (Some(name), None) => Ok((name.parse::<Builtin>()?.problem(a.dim)?, name.clone())),
        (None, Some(path)) => Ok((read_problem_csv(path, a.dim)?, path.display().to_string())),
        _ => Err(CliError::Usage("exactly one of --problem and --input is required".into())),
    }
}

pub fn cmd_solve(a: &SolveArgs) -> CliResult<i32> {
    let (problem, source) = load_problem(a)?;
    let start = Instant::now();
    let (out, config) = run_method(&problem, a)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;

    let report = ReportFile {
        method: out.method.clone(),
        problem: source,
        n: problem.n(),
        m: problem.m(),
        mode: problem.mode(),
        status: out.status,
        eta: out.eta,
        eta_dual: out.eta_dual,
        d: out.d,
        iterations: out.iterations,
        active_nodes: out.active_nodes,
        reference_nodes: out.reference_indices.iter().map(|&i| [problem.nodes()[i].re, problem.nodes()[i].im]).collect(),
        reference_indices: out.reference_indices.clone(),
        rho_estimate: out.rho_estimate,
        config,
        wall_ms,
    };
    write_json(a.out.as_deref(), &report)?;
    if let Some(p) = &a.history {
        write_history(p, &out.history)?;
    }
    if let Some(p) = &a.weights {
        write_weights(p, &problem, &out.w, &out.r)?;
    }
    let model = ModelFile::new(&problem, out.recurrence.clone(), out.coeffs.clone());
    if let Some(p) = &a.curve {
        let points = match &a.grid {
            Some(g) => read_points_csv(g)?,
            None => problem.nodes().to_vec(),
        };
        write_curve(p, &points, &model.evaluate(&points)?)?;
    } else if a.grid.is_some() {
        return Err(CliError::Usage("--grid needs --curve".into()));
    }
    if let Some(p) = &a.model {
        write_json(Some(p), &model)?;
    }
    Ok(match out.status {
        Status::Converged => EXIT_OK,
        Status::IterCapped => EXIT_CAPPED,
    })
}

pub fn cmd_eval(a: &EvalArgs) -> CliResult<i32> {
    let model = ModelFile::load(&a.model)?;
    let points = read_points_csv(&a.points)?;
    let p = model.evaluate(&points)?;
    match &a.out {
        Some(path) => write_curve(path, &points, &p)?,
        None => {
            let mut w = csv::Writer::from_writer(io::stdout());
            w.write_record(["x_re", "x_im", "p_re", "p_im"]).map_err(|e| csv_err(Path::new("-"), e))?;
            for (x, v) in points.iter().zip(&p) {
                w.write_record([num(x.re), num(x.im), num(v.re), num(v.im)])
                    .map_err(|e| csv_err(Path::new("-"), e))?;
            }
            w.flush().map_err(io_err(Path::new("-")))?;
        }
    }
    Ok(EXIT_OK)
}

/// One published table entry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableCell {
    pub table: u8,
    pub problem: &'static str,
    pub dim: usize,
    /// Filter threshold is `eps_scale / m`.
    pub eps_scale: f64,
    pub method: Method,
    pub iterations: usize,
    pub r_inf: f64,
    pub d: f64,
    pub final_nodes: usize,
}

macro_rules! cells {
    ($t:expr, $p:expr, $n:expr, $lr:expr, $ld:expr, $ir:expr, $id:expr,
     [$(($e:expr, $li:expr, $ln:expr, $ii:expr, $in:expr)),*]) => {
        [$(
            TableCell { table: $t, problem: $p, dim: $n, eps_scale: $e, method: Method::Lawson,
                        iterations: $li, r_inf: $lr, d: $ld, final_nodes: $ln },
            TableCell { table: $t, problem: $p, dim: $n, eps_scale: $e, method: Method::Ipm,
                        iterations: $ii, r_inf: $ir, d: $id, final_nodes: $in },
        )*]
    };
}

/// Published values for both tables, in the printed order.
pub fn published_cells() -> Vec<TableCell> {
    let mut v = Vec::with_capacity(48);
    v.extend(cells!(1, "f1", 21, 3.4238e-1, 1.1710e-1, 3.4235e-1, 1.1720e-1,
        [(1e-6, 1000, 232, 22, 22), (1e-5, 1000, 218, 21, 22), (1e-4, 1000, 206, 20, 22)]));
    v.extend(cells!(1, "f1", 31, 7.6031e-3, 5.7750e-5, 7.6028e-3, 5.7802e-5,
        [(1e-6, 1000, 234, 26, 32), (1e-5, 1000, 222, 26, 32), (1e-4, 1000, 206, 25, 32)]));
    v.extend(cells!(1, "f2", 21, 2.8474e-1, 8.1000e-2, 2.8473e-1, 8.1074e-2,
        [(1e-6, 1000, 236, 21, 22), (1e-5, 1000, 222, 21, 22), (1e-4, 1000, 204, 20, 22)]));
    v.extend(cells!(1, "f2", 31, 4.1257e-2, 1.7005e-3, 4.1255e-2, 1.7020e-3,
        [(1e-6, 1000, 236, 23, 32), (1e-5, 1000, 224, 22, 32), (1e-4, 1000, 200, 21, 32)]));
    v.extend(cells!(2, "g1", 9, 1.0323e-3, 1.0646e-6, 1.0322e-3, 1.0654e-6,
        [(1e-6, 1000, 242, 27, 10), (1e-5, 1000, 224, 27, 10), (1e-4, 1000, 206, 29, 10)]));
    v.extend(cells!(2, "g1", 16, 1.0529e-5, 1.1075e-10, 1.0528e-5, 1.1084e-10,
        [(1e-6, 1000, 245, 36, 19), (1e-5, 1000, 229, 55, 19), (1e-4, 1000, 221, 67, 19)]));
    v.extend(cells!(2, "g2", 21, 1.8297e-2, 3.3436e-4, 1.8294e-2, 3.3469e-4,
        [(1e-6, 1000, 597, 28, 31), (1e-5, 1000, 561, 28, 31), (1e-4, 1000, 529, 27, 31)]));
    v.extend(cells!(2, "g2", 31, 1.2449e-2, 1.5477e-4, 1.2447e-2, 1.5493e-4,
        [(1e-6, 1000, 540, 28, 32), (1e-5, 1000, 512, 28, 32), (1e-4, 1000, 474, 27, 32)]));
    v
}

/// Solver settings used for table cells: Lawson with q = 1 and 1000
/// iterations, IPM from the centered start `z = mu0 / w`.
pub fn table_args(cell: &TableCell) -> SolveArgs {
    SolveArgs {
        problem: Some(cell.problem.into()),
        input: None,
        dim: cell.dim,
        method: cell.method,
        q: 1,
        max_iter: Some(if cell.method == Method::Lawson { 1000 } else { 200 }),
        tol_d: None,
        tol_kkt: None,
        tol_stop: None,
        filter_tol: Some(format!("{:e}/m", cell.eps_scale)),
        tau: None,
        mu0: None,
        z0: (cell.method == Method::Ipm).then_some(Z0Arg::MuOverW),
        out: None,
        history: None,
        weights: None,
        curve: None,
        grid: None,
        model: None,
    }
}

#[derive(Clone, Debug)]
pub struct TableRow {
    pub cell: TableCell,
    pub outcome: Outcome,
    pub wall_ms: f64,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Solves every cell of a table, in parallel across cells.
pub fn run_table(which: u8) -> CliResult<Vec<TableRow>> {
    let cells: Vec<TableCell> = published_cells().into_iter().filter(|c| c.table == which).collect();
    cells
        .par_iter()
        .map(|cell| {
            let a = table_args(cell);
            let (problem, _) = load_problem(&a)?;
            let start = Instant::now();
            let (outcome, _) = run_method(&problem, &a)?;
            Ok(TableRow { cell: *cell, outcome, wall_ms: start.elapsed().as_secs_f64() * 1e3 })
        })
        .collect()
}

pub fn cmd_table(a: &TableArgs) -> CliResult<i32> {
    let which = match a.which.as_str() {
        "1" => 1,
        "2" => 2,
        other => return Err(CliError::Usage(format!("table must be 1 or 2, got `{other}`"))),
    };
    let rows = run_table(which)?;
    let header = [
        "problem", "dim", "eps_w", "method", "status", "iterations", "ref_iterations", "r_inf", "ref_r_inf",
        "rel_r_inf", "d", "ref_d", "rel_d", "final_nodes", "ref_final_nodes", "wall_ms",
    ];
    let records = rows.iter().map(|row| {
        let (c, o) = (&row.cell, &row.outcome);
        vec![
            c.problem.to_string(),
            c.dim.to_string(),
            format!("{:e}/m", c.eps_scale),
            o.method.clone(),
            o.status.as_str().to_string(),
            o.iterations.to_string(),
            c.iterations.to_string(),
            format!("{:.6e}", o.eta),
            format!("{:.4e}", c.r_inf),
            format!("{:.2e}", rel(o.eta, c.r_inf)),
            format!("{:.6e}", o.d),
            format!("{:.4e}", c.d),
            format!("{:.2e}", rel(o.d, c.d)),
            o.active_nodes.to_string(),
            c.final_nodes.to_string(),
            format!("{:.1}", row.wall_ms),
        ]
    });
    match &a.out {
        Some(p) => write_rows(p, &header, records)?,
        None => {
            let mut w = csv::Writer::from_writer(io::stdout());
            w.write_record(header).map_err(|e| csv_err(Path::new("-"), e))?;
            for r in records {
                w.write_record(&r).map_err(|e| csv_err(Path::new("-"), e))?;
            }
            w.flush().map_err(io_err(Path::new("-")))?;
        }
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_tol_forms() {
        assert_eq!(parse_filter_tol("1e-6/m", 2000).unwrap(), 1e-6 / 2000.0);
        assert_eq!(parse_filter_tol("0.5", 10).unwrap(), 0.5);
        assert_eq!(parse_filter_tol("eps", 10).unwrap(), f64::EPSILON);
        assert!(parse_filter_tol("x/m", 10).is_err());
        assert!(parse_filter_tol("-1", 10).is_err());
    }

    #[test]
    fn published_grid_shape() {
        let cells = published_cells();
        assert_eq!(cells.len(), 48);
        for t in [1, 2] {
            let ipm = cells.iter().filter(|c| c.table == t && c.method == Method::Ipm).count();
            assert_eq!(ipm, 12);
        }
    }

    #[test]
    fn digest_detects_tampering() {
        let p = Problem::real(&[-1.0, 0.0, 1.0], &[1.0, 0.0, 1.0], BasisSpec::Monomial(2)).unwrap();
        let sol = crate::wls::solve_wls(&p, &crate::problem::WeightVector::uniform(3)).unwrap();
        let mut model = ModelFile::new(&p, sol.basis.recurrence().unwrap(), sol.atilde.clone());
        assert!(model.verify().is_ok());
        model.nodes[1].re = 0.5;
        assert!(matches!(model.verify(), Err(CliError::DigestMismatch { .. })));
    }

    #[test]
    fn bad_table_is_usage_error() {
        assert_eq!(run(["minimax", "table", "3"]), EXIT_ERROR);
        assert_eq!(run(["minimax", "frobnicate"]), EXIT_ERROR);
    }
}
