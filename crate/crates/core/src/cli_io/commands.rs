//! Subcommand bodies. Each returns its output as text; writing it out is
//! left to the caller.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use serde::Serialize;

use super::config::{OutputFormat, ScenarioConfig, SolutionKind};
use super::emit::{self, fmt_e, SvgLayout};
use super::validate::{run_battery, Check, ValidationScenario};
use crate::cubic_analysis::{build_cubic, classify_roots};
use crate::error::Result;
use crate::ode_oracle::IntegratorConfig;
use crate::stagnation::{solve_stagnation, StagnationProblem, StagnationReport};
use crate::trajectories::{assemble_xz, peakon_series, EllipticPath, PeakonParams, Stitching, TrajectorySeries};
use crate::wave_field::{evaluate_field, Direction, WaveParams};
use crate::ode_oracle::integrate_full;

#[derive(Serialize)]
struct DispersionRow {
    k: f64,
    lambda: f64,
    c: f64,
    #[serde(rename = "A")]
    amp: f64,
}

/// `(k, λ, c, A)` for each wavenumber.
pub fn cmd_dispersion(ks: &[f64], a: f64, g: f64, direction: Direction, format: OutputFormat) -> Result<String> {
    let rows = ks
        .iter()
        .map(|&k| {
            let p = WaveParams::new(k, a, g, direction)?;
            Ok(DispersionRow {
                k,
                lambda: p.wavelength(),
                c: p.c(),
                amp: p.amplitude_a(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&rows).expect("rows serialize");
            s.push('\n');
            s
        }
        _ => {
            let mut s = String::from("k,lambda,c,A\n");
            for r in &rows {
                let _ = writeln!(s, "{},{},{},{}", fmt_e(r.k), fmt_e(r.lambda), fmt_e(r.c), fmt_e(r.amp));
            }
            s
        }
    })
}

/// Field values at one point.
pub fn cmd_field(cfg: &ScenarioConfig, x: f64, z: f64, t: f64) -> Result<String> {
    let p = cfg.wave()?;
    let f = evaluate_field(&p, x, z, t);
    Ok(match cfg.format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&f).expect("field serializes");
            s.push('\n');
            s
        }
        _ => format!(
            "x,z,t,u,v,p,eta,above_surface\n{},{},{},{},{},{},{},{}\n",
            fmt_e(x),
            fmt_e(z),
            fmt_e(t),
            fmt_e(f.u),
            fmt_e(f.v),
            fmt_e(f.p),
            fmt_e(f.eta),
            f.above_surface
        ),
    })
}

/// The series selected by `cfg.solution`.
pub fn build_series(cfg: &ScenarioConfig) -> Result<TrajectorySeries> {
    let p = cfg.wave()?;
    let times = cfg.times();
    match cfg.solution {
        SolutionKind::Peakon => {
            let pk = PeakonParams {
                const1: cfg.const1.unwrap_or(FRAC_PI_2 / p.k()),
                const2: cfg.const2,
            };
            peakon_series(&p, &pk, &times)
        }
        SolutionKind::Elliptic => {
            let reduction = classify_roots(&build_cubic(&p, cfg.beta))?;
            let path = EllipticPath::new(reduction, cfg.t0);
            assemble_xz(&p, cfg.beta, &path, &times, Stitching::MatchField)
        }
        SolutionKind::Oracle => {
            let icfg = match cfg.dt {
                Some(dt) => IntegratorConfig::rk4(cfg.t_start, cfg.t_end, dt),
                None => IntegratorConfig::default_for(&p, cfg.t_start, cfg.t_end),
            };
            integrate_full(&p, cfg.x0, cfg.z0, &icfg, &times)
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), fmt_e)
}

/// One-line description of a series, printed when the data go to a file.
pub fn series_summary(series: &TrajectorySeries) -> String {
    let band = |b: Option<f64>| opt(b);
    format!(
        "case={} samples={} period={} drift_per_period={} band=[{}, {}] asymptotes={}",
        series.case_tag.as_str(),
        series.samples.len(),
        opt(series.period),
        opt(series.drift_per_period),
        band(series.band.lo),
        band(series.band.hi),
        series.asymptote_times.len()
    )
}

pub struct TrajectoryOutput {
    pub series: TrajectorySeries,
    /// Text in the requested format.
    pub main: String,
    /// SVG rendering for `--svg`, when requested alongside another format.
    pub svg: Option<String>,
}

pub fn cmd_trajectory(cfg: &ScenarioConfig) -> Result<TrajectoryOutput> {
    let series = build_series(cfg)?;
    let layout = SvgLayout {
        width: cfg.svg_width,
        height: cfg.svg_height,
        margin: cfg.svg_margin,
    };
    let main = match cfg.format {
        OutputFormat::Csv => emit::series_csv(&series),
        OutputFormat::Json => emit::series_json(&series),
        OutputFormat::Svg => emit::series_svg(&series, layout),
    };
    let svg = cfg.svg.as_ref().map(|_| emit::series_svg(&series, layout));
    Ok(TrajectoryOutput { series, main, svg })
}

pub fn stagnation_report(cfg: &ScenarioConfig) -> Result<StagnationReport> {
    let p = cfg.wave()?;
    solve_stagnation(&StagnationProblem::from_params(&p, cfg.beta), cfg.z_min, cfg.z_max, cfg.grid)
}

pub fn cmd_stagnation(cfg: &ScenarioConfig) -> Result<(StagnationReport, String)> {
    let report = stagnation_report(cfg)?;
    let text = match cfg.format {
        OutputFormat::Json => emit::stagnation_json(&report),
        _ => emit::stagnation_csv(&report, cfg.k),
    };
    Ok((report, text))
}

pub fn stagnation_summary(report: &StagnationReport) -> String {
    format!(
        "solutions={} tangent={}",
        report.count(),
        report.solutions.iter().filter(|s| s.tangent).count()
    )
}

pub fn cmd_validate(cfg: &ScenarioConfig) -> Result<(Vec<Check>, String)> {
    let scenario = ValidationScenario {
        params: cfg.wave()?,
        beta: cfg.beta,
        t0: cfg.t0,
        x0: cfg.x0,
        z0: cfg.z0,
        const2: cfg.const2,
        z_min: cfg.z_min,
        z_max: cfg.z_max,
    };
    let checks = run_battery(&scenario);
    let mut text = format!(
        "scenario k={} a={} g={} direction={} beta={}\n",
        cfg.k,
        cfg.a,
        cfg.g,
        match cfg.direction {
            Direction::Right => "right",
            Direction::Left => "left",
        },
        cfg.beta
    );
    for c in &checks {
        text.push_str(&c.line());
        text.push('\n');
    }
    let failed = checks.iter().filter(|c| c.passed == Some(false)).count();
    let _ = writeln!(text, "{} checks, {} failed", checks.len(), failed);
    Ok((checks, text))
}
