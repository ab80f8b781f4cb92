//! Command-line front end: argument parsing, configuration and emitters.
//!
//! Every failure ends with a single line `error[CODE]: message` on stderr
//! and one of the exit codes below.

pub mod commands;
pub mod config;
pub mod emit;
pub mod validate;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::WaveError;
use config::{ConfigError, ScenarioConfig, CONFIG_ENV};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "deepwave", version, about = "Particle paths beneath deep-water gravity waves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print (k, lambda, c, A) for one or more wavenumbers.
    Dispersion(DispersionArgs),
    /// Sample a particle path.
    Trajectory(ScenarioArgs),
    /// Solve for the stagnation depths.
    Stagnation(ScenarioArgs),
    /// Run the check battery; exits 4 if any check fails.
    Validate(ScenarioArgs),
    /// Evaluate the wave field at one point.
    Field(FieldArgs),
}

#[derive(Debug, Args)]
pub struct DispersionArgs {
    /// Comma-separated wavenumbers.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub k: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub a: f64,
    #[arg(long, default_value_t = 9.8)]
    pub g: f64,
    #[arg(long, default_value = "right")]
    pub direction: String,
    #[arg(long, default_value = "csv")]
    pub format: String,
}

#[derive(Debug, Args, Default)]
pub struct ScenarioArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// right or left
    #[arg(long)]
    pub direction: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub p0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// peakon, elliptic or oracle
    #[arg(long)]
    pub solution: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub const1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub const2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t0: Option<f64>,
    /// Initial position for solution=oracle.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub z0: Option<f64>,
    /// Fixed RK4 step for solution=oracle.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv, json or svg
    #[arg(long)]
    pub format: Option<String>,
    /// Also write an SVG plot to this path.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub z_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub z_max: Option<f64>,
    #[arg(long)]
    pub grid: Option<usize>,
    /// Key-value config file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub z: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
}

/// Failure of a CLI run.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Wave { context: String, error: WaveError },
    Validation(usize),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "E_USAGE",
            CliError::Io(_) => "E_IO",
            CliError::Wave { error, .. } => error.code(),
            CliError::Validation(_) => "E_VALIDATION",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Wave { .. } => EXIT_DOMAIN,
            CliError::Validation(_) => EXIT_VALIDATION,
        }
    }

    /// `error[CODE]: message`, always on one line.
    pub fn line(&self) -> String {
        let msg = match self {
            CliError::Usage(m) | CliError::Io(m) => m.clone(),
            CliError::Wave { context, error } => format!("{context}: {error}"),
            CliError::Validation(n) => format!("{n} validation check(s) failed"),
        };
        format!("error[{}]: {}", self.code(), msg.replace(['\n', '\r'], " "))
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.0)
    }
}

fn wave_err(cfg: &ScenarioConfig) -> impl Fn(WaveError) -> CliError + '_ {
    move |error| CliError::Wave {
        context: format!(
            "scenario k={} a={} g={} beta={}",
            cfg.k, cfg.a, cfg.g, cfg.beta
        ),
        error,
    }
}

/// Defaults, then the config file (`--config` or `$DEEPWAVE_CONFIG`), then flags.
pub fn resolve_config(args: &ScenarioArgs, env_config: Option<PathBuf>) -> Result<ScenarioConfig, CliError> {
    let mut cfg = ScenarioConfig::default();
    if let Some(path) = args.config.clone().or(env_config) {
        cfg.apply_file(&path)?;
    }
    let mut overrides: Vec<(&str, String)> = Vec::new();
    let mut num = |key, v: Option<f64>| {
        if let Some(v) = v {
            overrides.push((key, v.to_string()));
        }
    };
    num("k", args.k);
    num("a", args.a);
    num("g", args.g);
    num("beta", args.beta);
    num("p0", args.p0);
    num("t_start", args.t_start);
    num("t_end", args.t_end);
    num("const1", args.const1);
    num("const2", args.const2);
    num("t0", args.t0);
    num("x0", args.x0);
    num("z0", args.z0);
    num("dt", args.dt);
    num("z_min", args.z_min);
    num("z_max", args.z_max);
    for (key, v) in [("samples", args.samples), ("grid", args.grid)] {
        if let Some(v) = v {
            overrides.push((key, v.to_string()));
        }
    }
    for (key, v) in [
        ("direction", &args.direction),
        ("solution", &args.solution),
        ("format", &args.format),
    ] {
        if let Some(v) = v {
            overrides.push((key, v.clone()));
        }
    }
    for (key, v) in [("out", &args.out), ("svg", &args.svg)] {
        if let Some(v) = v {
            overrides.push((key, v.display().to_string()));
        }
    }
    for (key, value) in overrides {
        cfg.apply(key, &value)?;
    }
    cfg.check()?;
    Ok(cfg)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Io(format!("cannot write output: {e}")))
}

fn execute(cli: Cli, env_config: Option<PathBuf>, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Dispersion(args) => {
            let mut cfg = ScenarioConfig::default();
            cfg.apply("direction", &args.direction)?;
            cfg.apply("format", &args.format)?;
            let text = commands::cmd_dispersion(&args.k, args.a, args.g, cfg.direction, cfg.format)
                .map_err(wave_err(&cfg))?;
            emit(out, &text)
        }
        Command::Field(args) => {
            let cfg = resolve_config(&args.scenario, env_config)?;
            let text = commands::cmd_field(&cfg, args.x, args.z, args.t).map_err(wave_err(&cfg))?;
            emit(out, &text)
        }
        Command::Trajectory(args) => {
            let cfg = resolve_config(&args, env_config)?;
            let result = commands::cmd_trajectory(&cfg).map_err(wave_err(&cfg))?;
            if let (Some(path), Some(svg)) = (&cfg.svg, &result.svg) {
                write_file(path, svg)?;
            }
            match &cfg.out {
                Some(path) => {
                    write_file(path, &result.main)?;
                    emit(out, &format!("{}\n", commands::series_summary(&result.series)))
                }
                None => emit(out, &result.main),
            }
        }
        Command::Stagnation(args) => {
            let cfg = resolve_config(&args, env_config)?;
            let (report, text) = commands::cmd_stagnation(&cfg).map_err(wave_err(&cfg))?;
            match &cfg.out {
                Some(path) => {
                    write_file(path, &text)?;
                    emit(out, &format!("{}\n", commands::stagnation_summary(&report)))
                }
                None => emit(out, &text),
            }
        }
        Command::Validate(args) => {
            let cfg = resolve_config(&args, env_config)?;
            let (checks, text) = commands::cmd_validate(&cfg).map_err(wave_err(&cfg))?;
            match &cfg.out {
                Some(path) => write_file(path, &text)?,
                None => emit(out, &text)?,
            }
            let failed = checks.iter().filter(|c| c.passed == Some(false)).count();
            if failed > 0 {
                Err(CliError::Validation(failed))
            } else {
                Ok(())
            }
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let rendered = e.to_string();
            let first = rendered
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            let _ = writeln!(err, "error[E_USAGE]: {first}");
            return EXIT_USAGE;
        }
    };
    let env_config = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
    match execute(cli, env_config, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "{}", e.line());
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("deepwave").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn dispersion_rows() {
        let (code, out, _) = run_capture(&["dispersion", "--k", "1,2,4", "--g", "9.8", "--a", "0.1"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "k,lambda,c,A");
        assert_eq!(lines.len(), 4);
        let c: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
        assert!((c - 3.1305).abs() < 5e-5);
    }

    #[test]
    fn usage_errors_are_single_line() {
        for args in [
            vec!["dispersion"],
            vec!["trajectory", "--k", "fast"],
            vec!["nonsense"],
            vec!["trajectory", "--samples", "1"],
            vec!["trajectory", "--format", "png"],
        ] {
            let (code, _, err) = run_capture(&args);
            assert_eq!(code, EXIT_USAGE, "{args:?}");
            assert_eq!(err.lines().count(), 1, "{err}");
            assert!(err.starts_with("error[E_USAGE]: "), "{err}");
        }
    }

    #[test]
    fn domain_errors_exit_three() {
        let (code, _, err) = run_capture(&["trajectory", "--k", "-1"]);
        assert_eq!(code, EXIT_DOMAIN);
        assert!(err.starts_with("error[E_DOMAIN]: scenario k=-1"));
        let (code, _, err) = run_capture(&["stagnation", "--k", "1", "--beta", "50", "--z-min", "-0.1", "--z-max", "0.1"]);
        assert_eq!(code, EXIT_DOMAIN);
        assert!(err.starts_with("error[E_EMPTY_REPORT]"), "{err}");
    }

    #[test]
    fn config_file_and_flag_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scenario.cfg");
        std::fs::write(&path, "# k=4 scenario\nk = 4\nbeta = 1\nsamples = 3\n").unwrap();
        let args = ScenarioArgs {
            config: Some(path.clone()),
            samples: Some(5),
            ..Default::default()
        };
        let cfg = resolve_config(&args, None).unwrap();
        assert_eq!((cfg.k, cfg.samples), (4.0, 5));

        let args = ScenarioArgs::default();
        let cfg = resolve_config(&args, Some(path)).unwrap();
        assert_eq!(cfg.samples, 3);

        let missing = ScenarioArgs {
            config: Some(dir.path().join("missing.cfg")),
            ..Default::default()
        };
        assert!(matches!(resolve_config(&missing, None), Err(CliError::Usage(_))));
    }
}
