//! Experiment configuration: a flat key = value file format with full
//! command-line parity.
//!
//! Every key can appear in a config file or be overridden by the CLI flag
//! of the same name (underscores become dashes). Lists are comma-separated;
//! grids additionally accept `lo:hi:count` for log-spaced points. Floats
//! serialize with their shortest round-trip representation, so
//! parse → serialize → parse is the identity on all fields.
//!
//! `#` starts a comment; blank lines are ignored; later keys win.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::analysis::log_grid;
use crate::bath::{BathSpec, Environment};
use crate::dynamics::IntegratorConfig;
use crate::error::{Error, Result};
use crate::model::SweepProtocol;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Trace,
    VelocitySweep,
    CouplingGrid,
    AlphaZCurve,
    Optimize,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Trace => "trace",
            ExperimentKind::VelocitySweep => "vsweep",
            ExperimentKind::CouplingGrid => "grid",
            ExperimentKind::AlphaZCurve => "azcurve",
            ExperimentKind::Optimize => "optimize",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trace" => Ok(ExperimentKind::Trace),
            "vsweep" => Ok(ExperimentKind::VelocitySweep),
            "grid" => Ok(ExperimentKind::CouplingGrid),
            "azcurve" => Ok(ExperimentKind::AlphaZCurve),
            "optimize" => Ok(ExperimentKind::Optimize),
            other => Err(Error::Config(format!(
                "unknown experiment {other:?} (expected trace|vsweep|grid|azcurve|optimize)"
            ))),
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Svg,
    Both,
}

impl OutputFormat {
    pub fn as_str(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Svg => "svg",
            OutputFormat::Both => "both",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "svg" => Ok(OutputFormat::Svg),
            "both" => Ok(OutputFormat::Both),
            other => Err(Error::Config(format!(
                "unknown format {other:?} (expected csv|svg|both)"
            ))),
        }
    }
}

/// Which population columns a velocity sweep produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    /// Longitudinal bath only.
    ZOnly,
    /// Both baths.
    XZ,
    /// Both runs plus the relative gain column.
    Both,
}

impl SweepMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepMode::ZOnly => "z",
            SweepMode::XZ => "xz",
            SweepMode::Both => "both",
        }
    }
}

impl FromStr for SweepMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "z" => Ok(SweepMode::ZOnly),
            "xz" => Ok(SweepMode::XZ),
            "both" => Ok(SweepMode::Both),
            other => Err(Error::Config(format!(
                "unknown mode {other:?} (expected z|xz|both)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizeTarget {
    Velocity,
    AlphaZ,
}

impl OptimizeTarget {
    pub fn as_str(&self) -> &'static str {
        match self {
            OptimizeTarget::Velocity => "velocity",
            OptimizeTarget::AlphaZ => "alpha-z",
        }
    }
}

impl FromStr for OptimizeTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "velocity" => Ok(OptimizeTarget::Velocity),
            "alpha-z" => Ok(OptimizeTarget::AlphaZ),
            other => Err(Error::Config(format!(
                "unknown target {other:?} (expected velocity|alpha-z)"
            ))),
        }
    }
}

/// Complete description of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub velocity: f64,
    pub velocity_grid: Vec<f64>,
    pub temperature: f64,
    pub temperature_list: Vec<f64>,
    pub alpha_x: f64,
    pub alpha_z: f64,
    pub alpha_x_grid: Vec<f64>,
    pub alpha_z_grid: Vec<f64>,
    /// Transverse couplings overlaid in a time trace; empty means just
    /// `alpha_x`.
    pub alpha_x_list: Vec<f64>,
    /// Spectral cutoff applied to both baths.
    pub cutoff: f64,
    pub offset: f64,
    pub span_product: f64,
    pub rtol: f64,
    pub atol: f64,
    /// `None` ("auto") resolves to 0.05/E_max per protocol.
    pub max_step: Option<f64>,
    pub samples: usize,
    pub mode: SweepMode,
    pub target: OptimizeTarget,
    pub scan_range: (f64, f64),
    pub scan_points: usize,
    pub out: PathBuf,
    pub format: OutputFormat,
    /// Worker threads for grid points; 0 picks the runtime default.
    pub workers: usize,
}

impl ExperimentConfig {
    /// Baseline configuration for one experiment kind.
    pub fn default_for(kind: ExperimentKind) -> Self {
        let mut cfg = ExperimentConfig {
            experiment: kind,
            velocity: 0.5,
            velocity_grid: log_grid(0.02, 10.0, 30),
            temperature: 5.0,
            temperature_list: vec![1.0, 2.5, 5.0],
            alpha_x: 5e-3,
            alpha_z: 5e-3,
            alpha_x_grid: log_grid(1e-4, 1.0, 25),
            alpha_z_grid: log_grid(1e-4, 1.0, 25),
            alpha_x_list: Vec::new(),
            cutoff: 10.0,
            offset: 0.0,
            span_product: 80.0,
            rtol: 1e-8,
            atol: 1e-10,
            max_step: None,
            samples: 2000,
            mode: SweepMode::Both,
            target: OptimizeTarget::Velocity,
            scan_range: (0.02, 10.0),
            scan_points: 30,
            out: PathBuf::from(format!("{}.csv", kind.as_str())),
            format: OutputFormat::Csv,
            workers: 0,
        };
        match kind {
            ExperimentKind::Trace => cfg.velocity = 0.3,
            ExperimentKind::AlphaZCurve => cfg.alpha_x = 0.0,
            _ => {}
        }
        cfg
    }

    /// Parse a config file; the `experiment` key selects the defaults and
    /// must be present.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut kind = None;
        for (key, value, line_no) in kv_lines(text)? {
            if key == "experiment" {
                kind = Some(value.parse::<ExperimentKind>().map_err(|e| line_err(line_no, e))?);
            }
        }
        let kind = kind.ok_or_else(|| {
            Error::Config("config file has no `experiment = ...` line".into())
        })?;
        let mut cfg = ExperimentConfig::default_for(kind);
        for (key, value, line_no) in kv_lines(text)? {
            cfg.apply_kv(&key, &value).map_err(|e| line_err(line_no, e))?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        ExperimentConfig::parse_str(&text)
    }

    /// Reject a config whose experiment kind does not match the invoked
    /// subcommand.
    pub fn ensure_kind(&self, kind: ExperimentKind) -> Result<()> {
        if self.experiment != kind {
            return Err(Error::Config(format!(
                "config file is for experiment `{}` but the `{}` subcommand was invoked",
                self.experiment, kind
            )));
        }
        Ok(())
    }

    /// Apply one key/value pair; the CLI flags funnel through here so flag
    /// and file semantics cannot drift apart.
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "experiment" => {
                let kind: ExperimentKind = value.parse()?;
                if kind != self.experiment {
                    return Err(Error::Config(format!(
                        "experiment is `{}` and cannot be changed to `{kind}` by override",
                        self.experiment
                    )));
                }
            }
            "velocity" => self.velocity = parse_f64(key, value)?,
            "velocity_grid" => self.velocity_grid = parse_grid(key, value)?,
            "temperature" => self.temperature = parse_f64(key, value)?,
            "temperature_list" => self.temperature_list = parse_grid(key, value)?,
            "alpha_x" => self.alpha_x = parse_f64(key, value)?,
            "alpha_z" => self.alpha_z = parse_f64(key, value)?,
            "alpha_x_grid" => self.alpha_x_grid = parse_grid(key, value)?,
            "alpha_z_grid" => self.alpha_z_grid = parse_grid(key, value)?,
            "alpha_x_list" => {
                self.alpha_x_list = if value.is_empty() {
                    Vec::new()
                } else {
                    parse_grid(key, value)?
                }
            }
            "cutoff" => self.cutoff = parse_f64(key, value)?,
            "offset" => self.offset = parse_f64(key, value)?,
            "span_product" => self.span_product = parse_f64(key, value)?,
            "rtol" => self.rtol = parse_f64(key, value)?,
            "atol" => self.atol = parse_f64(key, value)?,
            "max_step" => {
                self.max_step = if value == "auto" {
                    None
                } else {
                    Some(parse_f64(key, value)?)
                }
            }
            "samples" => self.samples = parse_usize(key, value)?,
            "mode" => self.mode = value.parse()?,
            "target" => self.target = value.parse()?,
            "scan_range" => self.scan_range = parse_pair(key, value)?,
            "scan_points" => self.scan_points = parse_usize(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "format" => self.format = value.parse()?,
            "workers" => self.workers = parse_usize(key, value)?,
            other => {
                return Err(Error::Config(format!("unknown config key {other:?}")));
            }
        }
        Ok(())
    }

    /// Serialize every field; `parse_str` of the result reproduces `self`
    /// exactly.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let kv = |s: &mut String, k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        kv(&mut s, "experiment", self.experiment.to_string());
        kv(&mut s, "velocity", format!("{:?}", self.velocity));
        kv(&mut s, "velocity_grid", join_floats(&self.velocity_grid));
        kv(&mut s, "temperature", format!("{:?}", self.temperature));
        kv(&mut s, "temperature_list", join_floats(&self.temperature_list));
        kv(&mut s, "alpha_x", format!("{:?}", self.alpha_x));
        kv(&mut s, "alpha_z", format!("{:?}", self.alpha_z));
        kv(&mut s, "alpha_x_grid", join_floats(&self.alpha_x_grid));
        kv(&mut s, "alpha_z_grid", join_floats(&self.alpha_z_grid));
        kv(&mut s, "alpha_x_list", join_floats(&self.alpha_x_list));
        kv(&mut s, "cutoff", format!("{:?}", self.cutoff));
        kv(&mut s, "offset", format!("{:?}", self.offset));
        kv(&mut s, "span_product", format!("{:?}", self.span_product));
        kv(&mut s, "rtol", format!("{:?}", self.rtol));
        kv(&mut s, "atol", format!("{:?}", self.atol));
        kv(
            &mut s,
            "max_step",
            match self.max_step {
                None => "auto".to_string(),
                Some(h) => format!("{h:?}"),
            },
        );
        kv(&mut s, "samples", self.samples.to_string());
        kv(&mut s, "mode", self.mode.as_str().to_string());
        kv(&mut s, "target", self.target.as_str().to_string());
        kv(
            &mut s,
            "scan_range",
            format!("{:?}:{:?}", self.scan_range.0, self.scan_range.1),
        );
        kv(&mut s, "scan_points", self.scan_points.to_string());
        kv(&mut s, "out", self.out.display().to_string());
        kv(&mut s, "format", self.format.as_str().to_string());
        kv(&mut s, "workers", self.workers.to_string());
        s
    }

    /// Cross-field checks run once before an experiment starts.
    pub fn validate(&self) -> Result<()> {
        self.protocol(self.velocity)?;
        self.environment(self.alpha_x, self.alpha_z)?;
        self.integrator_config().validate()?;
        check_grid("velocity_grid", &self.velocity_grid, true)?;
        check_grid("temperature_list", &self.temperature_list, false)?;
        check_grid("alpha_x_grid", &self.alpha_x_grid, false)?;
        check_grid("alpha_z_grid", &self.alpha_z_grid, false)?;
        if !self.alpha_x_list.is_empty() {
            check_grid("alpha_x_list", &self.alpha_x_list, false)?;
        }
        match self.experiment {
            ExperimentKind::AlphaZCurve => {
                if self.alpha_x != 0.0 {
                    return Err(Error::validation(
                        "alpha_x",
                        "the alpha-z curve requires the transverse bath off (alpha_x = 0)",
                    ));
                }
            }
            ExperimentKind::Optimize => {
                if self.format != OutputFormat::Csv {
                    return Err(Error::validation(
                        "format",
                        "optimize emits a single-row csv table and has no plot",
                    ));
                }
                if !(self.scan_range.0 > 0.0) || !(self.scan_range.1 > self.scan_range.0) {
                    return Err(Error::validation(
                        "scan_range",
                        format!("need 0 < lo < hi, got {:?}", self.scan_range),
                    ));
                }
                if self.scan_points < 2 {
                    return Err(Error::validation("scan_points", "need at least 2"));
                }
                if self.target == OptimizeTarget::AlphaZ && self.alpha_x != 0.0 {
                    return Err(Error::validation(
                        "alpha_x",
                        "the alpha-z minimum search requires alpha_x = 0",
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn integrator_config(&self) -> IntegratorConfig {
        IntegratorConfig {
            rel_tol: self.rtol,
            abs_tol: self.atol,
            max_step: self.max_step,
            samples: self.samples,
            ..IntegratorConfig::default()
        }
    }

    pub fn protocol(&self, velocity: f64) -> Result<SweepProtocol> {
        SweepProtocol::new(velocity, self.offset, self.span_product)
    }

    pub fn environment(&self, alpha_x: f64, alpha_z: f64) -> Result<Environment> {
        Environment::new(
            self.temperature,
            BathSpec::transverse_with_cutoff(alpha_x, self.cutoff)?,
            BathSpec::longitudinal_with_cutoff(alpha_z, self.cutoff)?,
        )
    }

    /// Transverse couplings to overlay in a time trace.
    pub fn trace_alphas(&self) -> Vec<f64> {
        if self.alpha_x_list.is_empty() {
            vec![self.alpha_x]
        } else {
            self.alpha_x_list.clone()
        }
    }
}

fn line_err(line_no: usize, err: Error) -> Error {
    Error::Config(format!("line {line_no}: {err}"))
}

fn kv_lines(text: &str) -> Result<Vec<(String, String, usize)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected `key = value`, got {raw:?}",
                i + 1
            )));
        };
        out.push((k.trim().to_string(), v.trim().to_string(), i + 1));
    }
    Ok(out)
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("{key}: not a number: {value:?}")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| Error::Config(format!("{key}: not a non-negative integer: {value:?}")))
}

/// `lo:hi:count` expands to log-spaced points; otherwise a comma list.
/// Either way the result must be non-empty and strictly increasing.
fn parse_grid(key: &str, value: &str) -> Result<Vec<f64>> {
    let grid = if value.contains(':') {
        let parts: Vec<&str> = value.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!(
                "{key}: expected lo:hi:count, got {value:?}"
            )));
        }
        let lo = parse_f64(key, parts[0])?;
        let hi = parse_f64(key, parts[1])?;
        let count = parse_usize(key, parts[2])?;
        if !(lo > 0.0) || !(hi > lo) || count < 2 {
            return Err(Error::Config(format!(
                "{key}: log grid needs 0 < lo < hi and count >= 2, got {value:?}"
            )));
        }
        log_grid(lo, hi, count)
    } else {
        value
            .split(',')
            .map(|s| parse_f64(key, s.trim()))
            .collect::<Result<Vec<f64>>>()?
    };
    check_grid(key, &grid, false)?;
    Ok(grid)
}

fn check_grid(key: &str, grid: &[f64], positive: bool) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config(format!("{key}: grid must be non-empty")));
    }
    for &v in grid {
        if !v.is_finite() || v < 0.0 || (positive && v == 0.0) {
            return Err(Error::Config(format!("{key}: invalid grid value {v}")));
        }
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Config(format!(
            "{key}: grid values must be strictly increasing"
        )));
    }
    Ok(())
}

fn parse_pair(key: &str, value: &str) -> Result<(f64, f64)> {
    let Some((lo, hi)) = value.split_once(':') else {
        return Err(Error::Config(format!("{key}: expected lo:hi, got {value:?}")));
    };
    Ok((parse_f64(key, lo.trim())?, parse_f64(key, hi.trim())?))
}

fn join_floats(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(",")
}
