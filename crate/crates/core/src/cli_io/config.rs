//! Scenario configuration: defaults, the key-value file format and overrides.
//!
//! A config file holds one `key = value` pair per line. Blank lines and
//! everything after `#` are ignored. Keys are the long flag names with or
//! without the leading dashes, and `-` and `_` are interchangeable, so
//! `t-end = 4` and `t_end = 4` mean the same thing.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::wave_field::{Direction, WaveParams};
use crate::Result as WaveResult;

/// Environment variable consulted when no `--config` flag is given.
pub const CONFIG_ENV: &str = "DEEPWAVE_CONFIG";

/// A malformed config value or flag; reported as a usage error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolutionKind {
    Peakon,
    Elliptic,
    Oracle,
}

impl FromStr for SolutionKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "peakon" => Ok(SolutionKind::Peakon),
            "elliptic" => Ok(SolutionKind::Elliptic),
            "oracle" => Ok(SolutionKind::Oracle),
            other => Err(ConfigError(format!(
                "unknown solution '{other}' (expected peakon, elliptic or oracle)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

impl FromStr for OutputFormat {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "svg" => Ok(OutputFormat::Svg),
            other => Err(ConfigError(format!(
                "unknown format '{other}' (expected csv, json or svg)"
            ))),
        }
    }
}

fn parse_direction(s: &str) -> Result<Direction, ConfigError> {
    match s {
        "right" | "+1" | "1" => Ok(Direction::Right),
        "left" | "-1" => Ok(Direction::Left),
        other => Err(ConfigError(format!(
            "unknown direction '{other}' (expected right or left)"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub k: f64,
    pub a: f64,
    pub g: f64,
    pub direction: Direction,
    pub p0: f64,
    pub beta: f64,
    pub solution: SolutionKind,
    pub t_start: f64,
    pub t_end: f64,
    pub samples: usize,
    /// `None` selects `π / (2k)`.
    pub const1: Option<f64>,
    pub const2: f64,
    pub t0: f64,
    pub x0: f64,
    pub z0: f64,
    /// `None` selects `T_wave / 2000`.
    pub dt: Option<f64>,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub z_min: f64,
    pub z_max: f64,
    pub grid: usize,
    pub svg_width: f64,
    pub svg_height: f64,
    pub svg_margin: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            k: 1.0,
            a: 0.1,
            g: 9.8,
            direction: Direction::Right,
            p0: 0.0,
            beta: 1.0,
            solution: SolutionKind::Elliptic,
            t_start: 0.0,
            t_end: 10.0,
            samples: 1001,
            const1: None,
            const2: -1.0,
            t0: 0.0,
            x0: 0.0,
            z0: 0.0,
            dt: None,
            format: OutputFormat::Csv,
            out: None,
            svg: None,
            z_min: crate::stagnation::DEFAULT_Z_MIN,
            z_max: crate::stagnation::DEFAULT_Z_MAX,
            grid: 25_000,
            svg_width: 640.0,
            svg_height: 480.0,
            svg_margin: 56.0,
        }
    }
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError(format!("invalid value '{value}' for {key}")))
}

fn finite(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = number(key, value)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError(format!("{key} must be finite, got '{value}'")))
    }
}

/// `--t-start`, `t_start` and `t-start` all become `t_start`.
pub fn normalize_key(key: &str) -> String {
    key.trim().trim_start_matches('-').replace('-', "_")
}

impl ScenarioConfig {
    /// Sets one field from its textual form.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = normalize_key(key);
        let value = value.trim();
        match key.as_str() {
            "k" => self.k = finite(&key, value)?,
            "a" => self.a = finite(&key, value)?,
            "g" => self.g = finite(&key, value)?,
            "direction" => self.direction = parse_direction(value)?,
            "p0" => self.p0 = finite(&key, value)?,
            "beta" => self.beta = finite(&key, value)?,
            "solution" => self.solution = value.parse()?,
            "t_start" => self.t_start = finite(&key, value)?,
            "t_end" => self.t_end = finite(&key, value)?,
            "samples" => self.samples = number(&key, value)?,
            "const1" => self.const1 = Some(finite(&key, value)?),
            "const2" => self.const2 = finite(&key, value)?,
            "t0" => self.t0 = finite(&key, value)?,
            "x0" => self.x0 = finite(&key, value)?,
            "z0" => self.z0 = finite(&key, value)?,
            "dt" => self.dt = Some(finite(&key, value)?),
            "format" => self.format = value.parse()?,
            "out" => self.out = Some(PathBuf::from(value)),
            "svg" => self.svg = Some(PathBuf::from(value)),
            "z_min" => self.z_min = finite(&key, value)?,
            "z_max" => self.z_max = finite(&key, value)?,
            "grid" => self.grid = number(&key, value)?,
            "svg_width" => self.svg_width = finite(&key, value)?,
            "svg_height" => self.svg_height = finite(&key, value)?,
            "svg_margin" => self.svg_margin = finite(&key, value)?,
            _ => return Err(ConfigError(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of a config file.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (pairs, line_no) in parse_pairs(text)?.into_iter().zip(1..) {
            let (key, value) = pairs;
            self.apply(&key, &value)
                .map_err(|e| ConfigError(format!("config entry {line_no}: {e}")))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_text(&text)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    /// Sample-grid and output invariants.
    pub fn check(&self) -> Result<(), ConfigError> {
        if self.samples < 2 {
            return Err(ConfigError(format!("samples must be at least 2, got {}", self.samples)));
        }
        if self.t_end <= self.t_start {
            return Err(ConfigError(format!(
                "t-end ({}) must exceed t-start ({})",
                self.t_end, self.t_start
            )));
        }
        if self.svg_width <= 0.0 || self.svg_height <= 0.0 || self.svg_margin < 0.0 {
            return Err(ConfigError("svg dimensions must be positive".into()));
        }
        if 2.0 * self.svg_margin >= self.svg_width.min(self.svg_height) {
            return Err(ConfigError("svg margin leaves no room for the plot".into()));
        }
        Ok(())
    }

    pub fn wave(&self) -> WaveResult<WaveParams> {
        WaveParams::new(self.k, self.a, self.g, self.direction)?.with_p0(self.p0)
    }

    /// `samples` equally spaced times from `t_start` to `t_end` inclusive.
    pub fn times(&self) -> Vec<f64> {
        let n = self.samples - 1;
        let span = self.t_end - self.t_start;
        (0..=n)
            .map(|i| {
                if i == n {
                    self.t_end
                } else {
                    self.t_start + span * i as f64 / n as f64
                }
            })
            .collect()
    }
}

/// Splits config text into `(key, value)` pairs, in file order.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected key = value", i + 1)))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError(format!("line {}: empty key", i + 1)));
        }
        pairs.push((key.to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}
