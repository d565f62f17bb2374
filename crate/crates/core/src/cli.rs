//! Batch front end: read a mixture file, evaluate the inequalities on a
//! time grid, write `report.json`, `table.csv` and `curves.csv`.
//!
//! Mixture files are TOML:
//!
//! ```toml
//! [[components]]
//! weight = 0.5
//! mean = -2.0
//! variance = 1.0
//!
//! [[components]]
//! w = 0.5       # short aliases: w, var
//! mean = 2.0
//! var = 1.0
//! ```
//!
//! Weights summing to within 1e-3 of one are rescaled with a warning;
//! anything further off is rejected.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::conjectures::{evaluate_conjectures, log_spaced, ConjectureReport, Method};
use crate::functionals::QuadratureConfig;
use crate::mixture::{weight_sum, Component, MixtureSpec};
use crate::{Error, Result, DEFAULT_ORDER, MAX_ORDER};

/// Highest order accepted without `allow_high_order`.
pub const STANDARD_MAX_ORDER: usize = 4;

/// Largest |Σw − 1| that is silently repaired.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-3;

pub const REPORT_FILE: &str = "report.json";
pub const TABLE_FILE: &str = "table.csv";
pub const CURVES_FILE: &str = "curves.csv";

/// Time grid description, `log:COUNT:LO:HI` or `list:T1,T2,...`.
#[derive(Debug, Clone, PartialEq)]
pub enum TGrid {
    Log { count: usize, lo: f64, hi: f64 },
    List(Vec<f64>),
}

impl Default for TGrid {
    fn default() -> Self {
        TGrid::Log {
            count: 16,
            lo: 0.05,
            hi: 5.0,
        }
    }
}

impl TGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        match self {
            TGrid::Log { count, lo, hi } => log_spaced(*count, *lo, *hi),
            TGrid::List(ts) => Ok(ts.clone()),
        }
    }
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what} {s:?} in time grid")))
}

impl FromStr for TGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("log:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(Error::Parse(format!(
                    "log grid must look like log:COUNT:LO:HI, got {s:?}"
                )));
            }
            let count = parts[0]
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad count {:?} in time grid", parts[0])))?;
            Ok(TGrid::Log {
                count,
                lo: parse_f64(parts[1], "lower end")?,
                hi: parse_f64(parts[2], "upper end")?,
            })
        } else if let Some(rest) = s.strip_prefix("list:") {
            let ts = rest
                .split(',')
                .map(|p| parse_f64(p, "time"))
                .collect::<Result<Vec<f64>>>()?;
            Ok(TGrid::List(ts))
        } else {
            Err(Error::Parse(format!(
                "time grid must start with log: or list:, got {s:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub order: usize,
    pub t_grid: TGrid,
    pub method: Method,
    pub quadrature: QuadratureConfig,
    pub out_dir: PathBuf,
    pub allow_high_order: bool,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            order: DEFAULT_ORDER,
            t_grid: TGrid::default(),
            method: Method::Both,
            quadrature: QuadratureConfig::default(),
            out_dir: out_dir.into(),
            allow_high_order: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let max = if self.allow_high_order {
            MAX_ORDER
        } else {
            STANDARD_MAX_ORDER
        };
        if self.order == 0 {
            return Err(Error::InvalidConfig("order must be at least 1".into()));
        }
        if self.order > max {
            return Err(Error::OrderTooHigh {
                order: self.order,
                max,
            });
        }
        self.quadrature.validate()?;
        let ts = self.t_grid.points()?;
        if ts.is_empty() || ts.iter().any(|&t| !(t.is_finite() && t > 0.0)) {
            return Err(Error::InvalidConfig(
                "time grid must be nonempty and strictly positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MixtureFile {
    components: Vec<ComponentEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentEntry {
    #[serde(alias = "w")]
    weight: f64,
    mean: f64,
    #[serde(alias = "var")]
    variance: f64,
}

/// Parses mixture TOML text.
pub fn parse_mixture_spec(text: &str) -> Result<MixtureSpec> {
    let file: MixtureFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let components: Vec<Component> = file
        .components
        .into_iter()
        .map(|c| Component::new(c.weight, c.mean, c.variance))
        .collect();
    // validate first so bad entries are reported by index
    let spec = MixtureSpec::new(components.clone())?;
    let total = weight_sum(&components);
    let drift = (total - 1.0).abs();
    if drift > WEIGHT_SUM_TOLERANCE {
        return Err(Error::InvalidMixture(format!(
            "weights sum to {total}, more than {WEIGHT_SUM_TOLERANCE} away from 1"
        )));
    }
    if drift > 1e-12 {
        log::warn!("mixture weights sum to {total}; rescaled to 1");
    }
    Ok(spec)
}

pub fn load_mixture_spec(path: &Path) -> Result<MixtureSpec> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_mixture_spec(&text)
}

/// Fixed-width float output for serde_json: 17 significant digits.
struct FixedFloatFormatter {
    inner: serde_json::ser::PrettyFormatter<'static>,
}

macro_rules! forward {
    ($($name:ident),*) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
                self.inner.$name(writer)
            }
        )*
    };
}

impl serde_json::ser::Formatter for FixedFloatFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{:.16e}", value as f64)
    }

    fn begin_array_value<W: ?Sized + Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn begin_object_key<W: ?Sized + Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    forward!(
        begin_array,
        end_array,
        end_array_value,
        begin_object,
        end_object,
        begin_object_value,
        end_object_value
    );
}

/// Serializes a report with fixed float formatting.
pub fn report_to_json(report: &ConjectureReport) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let formatter = FixedFloatFormatter {
        inner: serde_json::ser::PrettyFormatter::with_indent(b"  "),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut out, formatter);
    serde::Serialize::serialize(report, &mut ser).map_err(|e| Error::Parse(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

pub fn report_from_json(bytes: &[u8]) -> Result<ConjectureReport> {
    serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string()))
}

fn csv_float(v: f64) -> String {
    format!("{v:.11e}")
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// One row per (t, m).
pub fn table_csv(report: &ConjectureReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "t",
        "m",
        "method",
        "ep_value",
        "ep_error",
        "ep_ok",
        "gcm_value",
        "gcm_error",
        "gcm_ok",
        "mck_bound",
        "mck_slack",
        "mck_ok",
        "status",
    ])
    .map_err(csv_error)?;
    for c in &report.cells {
        let status = match c.status {
            crate::conjectures::CellStatus::Pass => "pass",
            crate::conjectures::CellStatus::ViolationCandidate => "VIOLATION-CANDIDATE",
        };
        w.write_record([
            csv_float(c.t),
            c.m.to_string(),
            c.method.to_string(),
            csv_float(c.ep_value),
            csv_float(c.ep_error),
            c.ep_ok.to_string(),
            csv_float(c.gcm_value),
            csv_float(c.gcm_error),
            c.gcm_ok.to_string(),
            csv_float(c.mck_bound),
            csv_float(c.mck_slack),
            c.mck_ok.to_string(),
            status.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.into_inner().map_err(|e| Error::Parse(e.to_string()))
}

/// t, H, I, y, ẏ, N for plotting.
pub fn curves_csv(report: &ConjectureReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "H", "I", "y", "ydot", "N"])
        .map_err(csv_error)?;
    for p in &report.points {
        if let Some(s) = &p.summary {
            w.write_record([
                csv_float(p.t),
                csv_float(s.entropy),
                csv_float(s.fisher),
                csv_float(s.y),
                csv_float(s.y_dot),
                csv_float(s.entropy_power),
            ])
            .map_err(csv_error)?;
        }
    }
    w.into_inner().map_err(|e| Error::Parse(e.to_string()))
}

/// Process exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Clean,
    Failed,
    ViolationCandidate,
}

impl RunStatus {
    pub fn code(self) -> u8 {
        match self {
            RunStatus::Clean => 0,
            RunStatus::Failed => 1,
            RunStatus::ViolationCandidate => 2,
        }
    }

    pub fn of(report: &ConjectureReport) -> Self {
        if report.all_points_failed() || report.hard_failures().next().is_some() {
            RunStatus::Failed
        } else if !report.all_flags_pass() {
            RunStatus::ViolationCandidate
        } else {
            RunStatus::Clean
        }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: ConjectureReport,
    pub status: RunStatus,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Loads the mixture, evaluates it and writes the three artifacts.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let spec = load_mixture_spec(&config.input)?;
    let grid = config.t_grid.points()?;
    let report = evaluate_conjectures(
        &spec,
        &grid,
        config.order,
        &config.quadrature,
        config.method,
    )?;

    fs::create_dir_all(&config.out_dir).map_err(|source| Error::Io {
        path: config.out_dir.display().to_string(),
        source,
    })?;
    write_file(&config.out_dir.join(REPORT_FILE), &report_to_json(&report)?)?;
    write_file(&config.out_dir.join(TABLE_FILE), &table_csv(&report)?)?;
    write_file(&config.out_dir.join(CURVES_FILE), &curves_csv(&report)?)?;

    let status = RunStatus::of(&report);
    Ok(RunOutcome { report, status })
}

/// Human-readable digest of a finished run.
pub fn summary(report: &ConjectureReport, status: RunStatus) -> String {
    let mut s = format!(
        "{} grid points, orders 1..={}, method {}, coverage {}\n",
        report.t_grid.len(),
        report.order,
        report.method,
        report.coverage
    );
    for (t, failure) in report.evaluation_failures() {
        s.push_str(&format!("  evaluation failed at t = {t}: {failure}\n"));
    }
    for failure in report.hard_failures() {
        s.push_str(&format!("  HARD FAILURE: {failure}\n"));
    }
    let candidates: Vec<_> = report.violation_candidates().collect();
    for c in &candidates {
        s.push_str(&format!(
            "  VIOLATION-CANDIDATE t = {}, m = {}: ep {} gcm {} mck {}\n",
            c.t, c.m, c.ep_ok, c.gcm_ok, c.mck_ok
        ));
    }
    if !candidates.is_empty() {
        s.push_str("  re-run with tighter --abs-tol/--rel-tol before drawing conclusions\n");
    }
    s.push_str(match status {
        RunStatus::Clean => "all flags pass",
        RunStatus::Failed => "run failed",
        RunStatus::ViolationCandidate => "violation candidates present",
    });
    s
}
