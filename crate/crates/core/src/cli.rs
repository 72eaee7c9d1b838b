//! Command-line front end: argument parsing, the `verify` suite, and CSV
//! output for the scan commands.
//!
//! Exit codes: 0 success, 1 verification or numerical failure, 2 invalid input.

use std::ffi::OsString;
use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::b_independence::{
    b_independence_scan, ode1_residual, ode2_residual, BruteForceSettings,
};
use crate::bruteforce::cartan_norm_nd;
use crate::error::{Error, Result};
use crate::frame::{
    berwald_perp, cartan_norm_2d, closed_form_perp, closed_form_xi, positivity_scan, xi_numeric,
    PositivityReport, TheoremFamily, XiMethod, DEFAULT_THETA_SAMPLES,
};
use crate::metric::{
    admissibility_report, theorem1_hypothesis, theorem2_hypothesis, MetricFamily, MetricModel,
    MetricSpec,
};
use crate::semi_c::{compute_p, norm_relation_factor};
use crate::tensors::{bilinear, flag_tensors, mat_vec};

pub const NORM_HEADER: [&str; 8] = ["family", "c1", "c2", "c3", "k", "theta_argmax", "norm", "method"];
pub const PQ_HEADER: [&str; 9] = ["family", "k", "s", "a", "big_a", "p", "q", "norm_factor", "status"];
pub const ODE_HEADER: [&str; 7] = ["family", "k", "s", "equation", "residual", "scale", "status"];
pub const BSCAN_HEADER: [&str; 5] = ["family", "k", "theta_argmax", "norm_2d", "norm_3d"];
pub const ORACLE_HEADER: [&str; 14] = [
    "family", "c1", "c2", "c3", "k", "norm_3d", "norm_2d", "difference", "y1", "y2", "y3", "u1",
    "u2", "u3",
];

/// Threshold for the b-independence deviation.
pub const DEFAULT_B_TOL: f64 = 1e-4;
pub const DEFAULT_K_LIST: [f64; 4] = [0.2, 0.4, 0.6, 0.8];

#[derive(Debug, Parser)]
#[command(name = "cartan", version, about = "Cartan torsion norms of (alpha, beta)-metrics")]
struct Cli {
    #[command(subcommand)]
    command: CommandLine,
}

#[derive(Debug, Subcommand)]
enum CommandLine {
    /// Scan the plane Cartan norm over a k grid (CSV).
    Norm(CommonArgs),
    /// Run the closed-form vs jet verification suite.
    Verify(CommonArgs),
    /// Print the theorem hypotheses for the coefficient triple.
    Hypotheses(CommonArgs),
    /// Tabulate the semi-C split p, q over s (CSV, n = 3).
    Pq(CommonArgs),
    /// Tabulate the ODE residuals over s (CSV).
    Ode(CommonArgs),
    /// Norm deviation across k for a b-independent family (CSV).
    Bscan(CommonArgs),
    /// Brute-force 3-dimensional norm against the plane norm (CSV).
    Oracle(CommonArgs),
}

#[derive(Debug, Args, Clone, Default)]
struct CommonArgs {
    #[arg(long)]
    family: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    c1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    c2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    c3: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    d1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    d2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    d3: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    m: Option<f64>,
    /// Grid `start:stop:step`.
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Metric-spec file with `key = value` lines; flags take precedence.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_THETA_SAMPLES)]
    theta_samples: usize,
    /// `jet` or `closed-form`.
    #[arg(long, default_value = "jet")]
    method: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated k values for `bscan`.
    #[arg(long)]
    k_list: Option<String>,
    #[arg(long, default_value_t = DEFAULT_B_TOL)]
    tol: f64,
    /// Add brute-force 3-dimensional norms to `bscan`.
    #[arg(long)]
    brute_force: bool,
    #[arg(long, default_value_t = 400)]
    y_samples: usize,
    #[arg(long, default_value_t = 200)]
    u_samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Norm,
    Verify,
    Hypotheses,
    Pq,
    Ode,
    Bscan,
    Oracle,
}

/// `start:stop:step` with both ends inside `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl KGrid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::invalid(format!("k step must be positive, got {step}")));
        }
        for v in [start, stop] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("k grid value {v} outside [0, 1]")));
            }
        }
        if stop < start {
            return Err(Error::invalid(format!("k grid stop {stop} below start {start}")));
        }
        Ok(KGrid { start, stop, step })
    }

    /// `start + i·step` for every `i` with the point not past `stop`.
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl FromStr for KGrid {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad k grid {s:?}")))
        };
        match parts.as_slice() {
            [a, b, c] => KGrid::new(num(a)?, num(b)?, num(c)?),
            [a] => {
                let v = num(a)?;
                KGrid::new(v, v, 1.0)
            }
            _ => Err(Error::invalid(format!("k grid must be start:stop:step, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub spec: MetricSpec,
    pub k_grid: Option<KGrid>,
    pub theta_samples: usize,
    pub method: XiMethod,
    pub tol: f64,
    pub k_list: Vec<f64>,
    pub seed: u64,
    pub brute_force: bool,
    pub y_samples: usize,
    pub u_samples: usize,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// k values for the command: the grid if given, else the spec's `k`,
    /// else `fallback`.
    pub fn k_values(&self, fallback: &[f64]) -> Vec<f64> {
        match (self.k_grid, self.spec.k) {
            (Some(g), _) => g.points(),
            (None, Some(k)) => vec![k],
            (None, None) => fallback.to_vec(),
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Usage error or help/version request from the argument parser.
    Usage(clap::Error),
    Invalid(Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(e) => write!(f, "{e}"),
            CliError::Invalid(e) => write!(f, "{e}"),
        }
    }
}

fn parse_k_list(text: &str) -> Result<Vec<f64>> {
    let values = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad k list entry {t:?}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.is_empty() || values.iter().any(|k| !(0.0..=1.0).contains(k)) {
        return Err(Error::invalid(format!("k list must hold values in [0, 1], got {text:?}")));
    }
    Ok(values)
}

pub fn parse_config<I, T>(argv: I) -> std::result::Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(CliError::Usage)?;
    let (command, a) = match cli.command {
        CommandLine::Norm(a) => (Command::Norm, a),
        CommandLine::Verify(a) => (Command::Verify, a),
        CommandLine::Hypotheses(a) => (Command::Hypotheses, a),
        CommandLine::Pq(a) => (Command::Pq, a),
        CommandLine::Ode(a) => (Command::Ode, a),
        CommandLine::Bscan(a) => (Command::Bscan, a),
        CommandLine::Oracle(a) => (Command::Oracle, a),
    };
    build_config(command, a).map_err(CliError::Invalid)
}

fn build_config(command: Command, a: CommonArgs) -> Result<RunConfig> {
    let flags = MetricSpec {
        family: a.family,
        c1: a.c1,
        c2: a.c2,
        c3: a.c3,
        d1: a.d1,
        d2: a.d2,
        d3: a.d3,
        lambda: a.lambda,
        m: a.m,
        k: None,
        n: a.n,
    };
    let spec = match &a.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::invalid(format!("cannot read spec file {}: {e}", path.display()))
            })?;
            flags.merge_missing(&MetricSpec::parse(&text)?)
        }
        None => flags,
    };
    if let Some(k) = spec.k {
        if !(0.0..=1.0).contains(&k) {
            return Err(Error::invalid(format!("k = {k} outside [0, 1]")));
        }
    }
    let k_grid = a.k.as_deref().map(KGrid::from_str).transpose()?;
    if a.theta_samples < 64 {
        return Err(Error::invalid(format!(
            "theta-samples must be at least 64, got {}",
            a.theta_samples
        )));
    }
    if !(a.tol > 0.0) {
        return Err(Error::invalid(format!("tol must be positive, got {}", a.tol)));
    }
    if a.y_samples == 0 || a.u_samples == 0 {
        return Err(Error::invalid("sample counts must be positive"));
    }
    let k_list = match a.k_list.as_deref() {
        Some(t) => parse_k_list(t)?,
        None => DEFAULT_K_LIST.to_vec(),
    };
    Ok(RunConfig {
        command,
        spec,
        k_grid,
        theta_samples: a.theta_samples,
        method: a.method.parse()?,
        tol: a.tol,
        k_list,
        seed: a.seed,
        brute_force: a.brute_force,
        y_samples: a.y_samples,
        u_samples: a.u_samples,
        out: a.out,
    })
}

/// Writes a header and rows; every row must match the header width.
pub fn write_csv<W: Write>(writer: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let io_err = |e: csv::Error| Error::invalid(format!("csv output failed: {e}"));
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::invalid(format!(
                "row has {} fields, header has {}",
                row.len(),
                header.len()
            )));
        }
        w.write_record(row).map_err(io_err)?;
    }
    w.flush()
        .map_err(|e| Error::invalid(format!("csv output failed: {e}")))
}

pub fn write_csv_file(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let file = std::fs::File::create(path)
        .map_err(|e| Error::invalid(format!("cannot create {}: {e}", path.display())))?;
    write_csv(io::BufWriter::new(file), header, rows)
}

/// Shortest representation that parses back to the same double.
fn num(v: f64) -> String {
    format!("{v}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{}: {verdict} ({})", self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    /// Informational lines (hypothesis status and the like).
    pub notes: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &str, outcome: Result<(bool, String)>) {
        let (pass, detail) = outcome.unwrap_or_else(|e| (false, e.to_string()));
        self.checks.push(Check { name: name.to_string(), pass, detail });
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifySettings {
    pub k_values: Vec<f64>,
    /// θ points for the pointwise closed-form comparisons.
    pub theta_points: usize,
    pub theta_samples: usize,
    pub b_k_list: Vec<f64>,
    pub b_tol: f64,
    /// 3-dimensional brute-force companion to the b-independence scan.
    pub b_brute_force: Option<BruteForceSettings>,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            k_values: (0..10).map(|i| 0.05 + 0.1 * i as f64).collect(),
            theta_points: 256,
            theta_samples: DEFAULT_THETA_SAMPLES,
            b_k_list: DEFAULT_K_LIST.to_vec(),
            b_tol: DEFAULT_B_TOL,
            b_brute_force: Some(BruteForceSettings { y_samples: 200, u_samples: 100, seed: 0 }),
        }
    }
}

/// Families whose Cartan norm is expected not to depend on `‖β‖`.
pub fn is_b_independent_class(family: &MetricFamily) -> bool {
    match *family {
        MetricFamily::GeneralizedRanders { c1, c2, c3 } => {
            (c2 * c2 - c1 * c3).abs() <= 1e-12 * (c2 * c2).max((c1 * c3).abs()).max(1e-300)
        }
        MetricFamily::SqrtBIndependent { .. } | MetricFamily::IntegralBIndependent { .. } => true,
        _ => false,
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// θ points offset from the axis so `sin θ ≠ 0`.
fn theta_points(count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / count as f64)
        .collect()
}

fn models(family: &MetricFamily, ks: &[f64], n: usize) -> Result<Vec<MetricModel>> {
    ks.iter().map(|&k| MetricModel::new(*family, k, n)).collect()
}

fn check_admissible(family: &MetricFamily, s: &VerifySettings) -> Result<(bool, String)> {
    for m in models(family, &s.k_values, 2)? {
        let r = admissibility_report(&m, 201)?;
        if !r.admissible {
            return Ok((false, format!("k = {}: {r:?}", m.k)));
        }
    }
    Ok((true, format!("{} k values", s.k_values.len())))
}

fn check_flag_identities(family: &MetricFamily, s: &VerifySettings) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for m in models(family, &s.k_values, 2)? {
        let (lo, hi) = crate::frame::theta_window(&m);
        for j in 0..16 {
            let th = lo + (hi - lo) * (j as f64 + 0.5) / 16.0;
            let t = flag_tensors(&m, &[th.cos(), th.sin()])?;
            let f2 = t.f * t.f;
            worst = worst.max((bilinear(&t.g, &t.y, &t.y, 2) - f2).abs() / f2);
            let hy = mat_vec(&t.h, &t.y, 2);
            worst = worst.max(hy[0].abs().max(hy[1].abs()) / t.f);
            for a in 0..2 {
                for b in 0..2 {
                    let cy = t.c[a][b][0] * t.y[0] + t.c[a][b][1] * t.y[1];
                    worst = worst.max(cy.abs() * t.f / f2);
                }
            }
        }
    }
    Ok((worst <= 1e-9, format!("max relative defect {worst:e}, threshold 1e-9")))
}

fn check_closed_form_xi(model_list: &[MetricModel], thetas: &[f64]) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let mut at = (0.0, 0.0);
    for m in model_list {
        for &th in thetas {
            let d = rel_diff(xi_numeric(m, th)?, closed_form_xi(m, th)?);
            if d > worst {
                worst = d;
                at = (m.k, th);
            }
        }
    }
    Ok((
        worst <= 1e-8,
        format!("max relative gap {worst:e} at k = {}, theta = {}; threshold 1e-8", at.0, at.1),
    ))
}

fn check_frame_conditions(model_list: &[MetricModel], thetas: &[f64]) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for m in model_list {
        for &th in thetas {
            let fr = berwald_perp(m, th)?;
            let t = flag_tensors(m, &fr.y)?;
            let p = [fr.y_perp[0], fr.y_perp[1], 0.0];
            let f2 = t.f * t.f;
            let orth = bilinear(&t.g, &t.y, &p, 2) / f2;
            let length = bilinear(&t.g, &p, &p, 2) / f2 - 1.0;
            worst = worst.max(orth.abs()).max(length.abs());
        }
    }
    Ok((worst <= 1e-9, format!("max relative defect {worst:e}, threshold 1e-9")))
}

fn check_closed_form_perp(model_list: &[MetricModel], thetas: &[f64]) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for m in model_list {
        for &th in thetas {
            let jet = berwald_perp(m, th)?.y_perp;
            let cf = closed_form_perp(m, th)?;
            let scale = jet[0].hypot(jet[1]);
            worst = worst.max((jet[0] - cf[0]).hypot(jet[1] - cf[1]) / scale);
        }
    }
    Ok((worst <= 1e-9, format!("max relative gap {worst:e}, threshold 1e-9")))
}

fn check_positivity(kind: TheoremFamily, c: [f64; 3]) -> Result<(bool, String)> {
    let r = positivity_scan(kind, c, (512, 512))?;
    Ok(match &r {
        PositivityReport::GeneralizedRanders { min_f } => (
            min_f.value > 0.0,
            format!("min f = {} at k = {}, x = {}", min_f.value, min_f.k, min_f.x),
        ),
        PositivityReport::QuadraticBeta { min_f1, max_f1, min_f2, max_f2 } => {
            let (f1_sign, f2_nonzero) = r.sign_analysis().unwrap_or((false, false));
            (
                f1_sign && f2_nonzero,
                format!(
                    "f1 in [{}, {}], f2 in [{}, {}]",
                    min_f1.value, max_f1.value, min_f2.value, max_f2.value
                ),
            )
        }
    })
}

fn check_norm_finite(family: &MetricFamily, s: &VerifySettings) -> Result<(bool, String)> {
    let mut largest: f64 = 0.0;
    for m in models(family, &s.k_values, 2)? {
        let scan = cartan_norm_2d(&m, s.theta_samples, XiMethod::Jet)?;
        if !scan.norm.is_finite() {
            return Ok((false, format!("norm not finite at k = {}", m.k)));
        }
        largest = largest.max(scan.norm);
    }
    Ok((true, format!("largest norm {largest}")))
}

fn check_b_independence(family: &MetricFamily, s: &VerifySettings) -> Result<(bool, String)> {
    let scan = b_independence_scan(family, &s.b_k_list, s.theta_samples, s.b_tol, s.b_brute_force)?;
    let norms: Vec<String> = scan.entries.iter().map(|e| format!("{}:{}", e.k, e.norm_2d)).collect();
    let mut detail = format!(
        "deviation {} across k = [{}], threshold {}",
        scan.deviation,
        norms.join(", "),
        scan.tol
    );
    if let Some(d3) = scan.deviation_3d {
        let n3: Vec<String> = scan
            .entries
            .iter()
            .filter_map(|e| e.norm_3d.map(|v| format!("{}:{}", e.k, v)))
            .collect();
        detail.push_str(&format!("; 3-d brute-force deviation {d3} across k = [{}]", n3.join(", ")));
    }
    Ok((scan.pass, detail))
}

/// The verification suite for one family. Every check runs even after a
/// failure; numerical errors become failed checks.
pub fn verify_family(family: &MetricFamily, s: &VerifySettings) -> VerifyReport {
    let mut report = VerifyReport::default();
    report.push("admissible", check_admissible(family, s));
    report.push("flag_identities", check_flag_identities(family, s));
    if let Ok((kind, c)) = TheoremFamily::of(family) {
        let thetas = theta_points(s.theta_points);
        match models(family, &s.k_values, 2) {
            Ok(ms) => {
                report.push("closed_form_xi", check_closed_form_xi(&ms, &thetas));
                report.push("frame_conditions", check_frame_conditions(&ms, &thetas));
                report.push("closed_form_perp", check_closed_form_perp(&ms, &thetas));
            }
            Err(e) => report.push("closed_form_xi", Err(e)),
        }
        let hyp = match kind {
            TheoremFamily::GeneralizedRanders => theorem1_hypothesis(c[0], c[1], c[2]),
            TheoremFamily::QuadraticBeta => theorem2_hypothesis(c[0], c[1], c[2]),
        };
        report.notes.push(hyp.to_string());
        if hyp.holds() {
            report.push("positivity", check_positivity(kind, c));
        }
    }
    report.push("norm_finite", check_norm_finite(family, s));
    if is_b_independent_class(family) {
        report.push("b_independence", check_b_independence(family, s));
    }
    report
}

/// Exit code for an error: 2 for bad input, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) => 2,
        _ => 1,
    }
}

struct Output<'a> {
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Output<'_> {
    fn csv(&mut self, cfg: &RunConfig, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        match &cfg.out {
            Some(path) => write_csv_file(path, header, rows),
            None => write_csv(&mut *self.stdout, header, rows),
        }
    }

    fn text(&mut self, cfg: &RunConfig, lines: &[String]) -> Result<()> {
        let body: String = lines.iter().map(|l| format!("{l}\n")).collect();
        let io = |e: io::Error| Error::invalid(format!("output failed: {e}"));
        match &cfg.out {
            Some(path) => std::fs::write(path, body).map_err(io),
            None => self.stdout.write_all(body.as_bytes()).map_err(io),
        }
    }
}

/// Runs a parsed configuration; data goes to `--out` or `stdout`, diagnostics
/// to `stderr`.
pub fn run(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let mut out = Output { stdout, stderr };
    match dispatch(cfg, &mut out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(out.stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cfg: &RunConfig, out: &mut Output<'_>) -> Result<i32> {
    let family = cfg.spec.family()?;
    match cfg.command {
        Command::Norm => run_norm(cfg, &family, out),
        Command::Verify => run_verify(cfg, &family, out),
        Command::Hypotheses => run_hypotheses(cfg, &family, out),
        Command::Pq => run_pq(cfg, &family, out),
        Command::Ode => run_ode(cfg, &family, out),
        Command::Bscan => run_bscan(cfg, &family, out),
        Command::Oracle => run_oracle(cfg, &family, out),
    }
}

const DEFAULT_NORM_KS: [f64; 1] = [0.5];

fn run_norm(cfg: &RunConfig, family: &MetricFamily, out: &mut Output<'_>) -> Result<i32> {
    let ks = cfg.k_values(&DEFAULT_NORM_KS);
    let models = models(family, &ks, 2)?;
    let [c1, c2, c3] = family.coefficients();
    let mut rows = Vec::with_capacity(models.len());
    let mut failure = None;
    for m in &models {
        match cartan_norm_2d(m, cfg.theta_samples, cfg.method) {
            Ok(scan) => rows.push(vec![
                family.name().to_string(),
                num(c1),
                num(c2),
                num(c3),
                num(m.k),
                num(scan.theta_argmax),
                num(scan.norm),
                cfg.method.to_string(),
            ]),
            Err(Error::InvalidInput(msg)) => return Err(Error::InvalidInput(msg)),
            Err(Error::UnsupportedFamily(msg)) => return Err(Error::invalid(msg)),
            Err(e) => {
                failure = Some(format!("norm at k = {}: {e}", m.k));
                break;
            }
        }
    }
    out.csv(cfg, &NORM_HEADER, &rows)?;
    if let Some(msg) = failure {
        let _ = writeln!(out.stderr, "FAIL {msg}");
        return Ok(1);
    }
    Ok(0)
}

fn run_verify(cfg: &RunConfig, family: &MetricFamily, out: &mut Output<'_>) -> Result<i32> {
    let mut settings = VerifySettings {
        theta_samples: cfg.theta_samples,
        b_k_list: cfg.k_list.clone(),
        b_tol: cfg.tol,
        b_brute_force: Some(BruteForceSettings {
            y_samples: cfg.y_samples,
            u_samples: cfg.u_samples,
            seed: cfg.seed,
        }),
        ..VerifySettings::default()
    };
    if cfg.k_grid.is_some() || cfg.spec.k.is_some() {
        settings.k_values = cfg.k_values(&[]);
    }
    // surface an unusable k as bad input rather than as a failed check
    models(family, &settings.k_values, 2)?;
    let report = verify_family(family, &settings);
    let mut lines: Vec<String> = report.notes.iter().map(|n| format!("note: {n}")).collect();
    lines.extend(report.checks.iter().map(|c| c.to_string()));
    let verdict = match report.first_failure() {
        Some(c) => format!("verify: FAIL (first failing check: {})", c.name),
        None => format!("verify: PASS ({} checks)", report.checks.len()),
    };
    lines.push(verdict.clone());
    out.text(cfg, &lines)?;
    if report.passed() {
        Ok(0)
    } else {
        let _ = writeln!(out.stderr, "{verdict}");
        Ok(1)
    }
}

fn run_hypotheses(cfg: &RunConfig, family: &MetricFamily, out: &mut Output<'_>) -> Result<i32> {
    let [c1, c2, c3] = match family {
        MetricFamily::GeneralizedRanders { .. } | MetricFamily::QuadraticBeta { .. } => {
            family.coefficients()
        }
        other => {
            return Err(Error::invalid(format!(
                "hypotheses apply to gen-randers and quadratic-beta, not {}",
                other.name()
            )))
        }
    };
    let report = match family {
        MetricFamily::GeneralizedRanders { .. } => theorem1_hypothesis(c1, c2, c3),
        _ => theorem2_hypothesis(c1, c2, c3),
    };
    out.text(cfg, &[report.to_string()])?;
    Ok(0)
}

fn s_grid(family: &MetricFamily, b: f64, count: usize) -> Vec<f64> {
    let (lo, hi) = family.working_interval(b);
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

fn error_name(e: &Error) -> &'static str {
    match e {
        Error::InvalidInput(_) => "invalid_input",
        Error::SingularJet(_) => "singular_jet",
        Error::DomainError(_) => "domain_error",
        Error::NumericOverflow(_) => "numeric_overflow",
        Error::NonPositiveDefinite(_) => "non_positive_definite",
        Error::DegenerateFrame { .. } => "degenerate_frame",
        Error::UnsupportedFamily(_) => "unsupported_family",
        Error::SingularSplit(_) => "singular_split",
        Error::RiemannianFlag(_) => "riemannian_flag",
        Error::SingularOde(_) => "singular_ode",
        Error::QuadratureFailure(_) => "quadrature_failure",
    }
}

const DEFAULT_TABLE_KS: [f64; 1] = [0.5];
const S_POINTS: usize = 33;

fn run_pq(cfg: &RunConfig, family: &MetricFamily, out: &mut Output<'_>) -> Result<i32> {
    let n = cfg.spec.n.unwrap_or(3);
    let ks = cfg.k_values(&DEFAULT_TABLE_KS);
    let mut rows = Vec::new();
    for m in ks.iter().map(|&k| MetricModel::new(*family, k, n)).collect::<Result<Vec<_>>>()? {
        if m.n < 3 {
            return Err(Error::invalid("pq needs n = 3"));
        }
        for s in s_grid(family, m.k, S_POINTS) {
            let row = match compute_p(&m, s) {
                Ok(sp) => {
                    let factor = norm_relation_factor(sp.p, sp.q, sp.n)
                        .map(num)
                        .unwrap_or_else(|_| "nan".into());
                    vec![num(sp.a), num(sp.big_a), num(sp.p), num(sp.q), factor, "ok".into()]
                }
                Err(e) => {
                    let mut r = vec!["nan".to_string(); 5];
                    r.push(error_name(&e).into());
                    r
                }
            };
            let mut full = vec![family.name().to_string(), num(m.k), num(s)];
            full.extend(row);
            rows.push(full);
        }
    }
    out.csv(cfg, &PQ_HEADER, &rows)?;
    Ok(0)
}

fn run_ode(cfg: &RunConfig, family: &MetricFamily, out: &mut Output<'_>) -> Result<i32> {
    let ks = cfg.k_values(&DEFAULT_TABLE_KS);
    let lambda = match family {
        MetricFamily::IntegralBIndependent { lambda, .. } => Some(*lambda),
        _ => cfg.spec.lambda,
    };
    let mut rows = Vec::new();
    for m in models(family, &ks, 2)? {
        for s in s_grid(family, m.k, 64) {
            let mut push = |equation: &str, r: Result<crate::b_independence::Residual>| {
                let (res, scale, status) = match r {
                    Ok(r) => (num(r.value), num(r.scale), "ok"),
                    Err(e) => ("nan".into(), "nan".into(), error_name(&e)),
                };
                rows.push(vec![
                    family.name().to_string(),
                    num(m.k),
                    num(s),
                    equation.to_string(),
                    res,
                    scale,
                    status.to_string(),
                ]);
            };
            push("ode1", ode1_residual(family, s, m.k));
            if let Some(l) = lambda {
                push("ode2", ode2_residual(family, s, m.k, l));
            }
        }
    }
    out.csv(cfg, &ODE_HEADER, &rows)?;
    Ok(0)
}

fn run_bscan(cfg: &RunConfig, family: &MetricFamily, out: &mut Output<'_>) -> Result<i32> {
    let bf = cfg.brute_force.then_some(BruteForceSettings {
        y_samples: cfg.y_samples,
        u_samples: cfg.u_samples,
        seed: cfg.seed,
    });
    let scan = b_independence_scan(family, &cfg.k_list, cfg.theta_samples, cfg.tol, bf)?;
    let rows: Vec<Vec<String>> = scan
        .entries
        .iter()
        .map(|e| {
            vec![
                family.name().to_string(),
                num(e.k),
                num(e.theta_argmax),
                num(e.norm_2d),
                e.norm_3d.map(num).unwrap_or_default(),
            ]
        })
        .collect();
    out.csv(cfg, &BSCAN_HEADER, &rows)?;
    let mut summary = format!("b_independence: deviation {} threshold {}", scan.deviation, scan.tol);
    if let Some(d3) = scan.deviation_3d {
        summary.push_str(&format!(" (brute-force deviation {d3})"));
    }
    let _ = writeln!(out.stderr, "{summary} {}", if scan.pass { "PASS" } else { "FAIL" });
    Ok(if scan.pass { 0 } else { 1 })
}

fn run_oracle(cfg: &RunConfig, family: &MetricFamily, out: &mut Output<'_>) -> Result<i32> {
    let ks = cfg.k_values(&DEFAULT_NORM_KS);
    let [c1, c2, c3] = family.coefficients();
    let mut rows = Vec::new();
    for &k in &ks {
        let m3 = MetricModel::new(*family, k, 3)?;
        let m2 = MetricModel::new(*family, k, 2)?;
        let bf = cartan_norm_nd(&m3, cfg.y_samples, cfg.u_samples, cfg.seed)?;
        let n2 = cartan_norm_2d(&m2, cfg.theta_samples, XiMethod::Jet)?.norm;
        let mut row = vec![
            family.name().to_string(),
            num(c1),
            num(c2),
            num(c3),
            num(k),
            num(bf.norm),
            num(n2),
            num(bf.norm - n2),
        ];
        row.extend(bf.y.iter().chain(bf.u.iter()).map(|v| num(*v)));
        rows.push(row);
    }
    out.csv(cfg, &ORACLE_HEADER, &rows)?;
    Ok(0)
}

/// Parses `argv`, runs, and returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut so = stdout.lock();
    let mut se = stderr.lock();
    match parse_config(argv) {
        Ok(cfg) => run(&cfg, &mut so, &mut se),
        Err(CliError::Usage(e)) => {
            let _ = e.print();
            e.exit_code()
        }
        Err(CliError::Invalid(e)) => {
            let _ = writeln!(se, "error: {e}");
            exit_code(&e)
        }
    }
}
