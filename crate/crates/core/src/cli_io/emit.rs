//! Text emitters for trajectory series and stagnation reports.
//!
//! CSV numbers use `{:.16e}` (17 significant digits, no locale). JSON uses
//! the shortest representation that round-trips. SVG coordinates are fixed
//! to three decimals.

use std::fmt::Write as _;

use serde::Serialize;

use crate::stagnation::StagnationReport;
use crate::trajectories::{TrajectorySeries, ZBand};

pub const CSV_HEADER: &str = "t,x,z,X,Z";

/// `{:.16e}`, with negative zero written as zero.
pub fn fmt_e(v: f64) -> String {
    format!("{:.16e}", v + 0.0)
}

pub fn series_csv(series: &TrajectorySeries) -> String {
    let mut out = String::with_capacity(96 * (series.samples.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in &series.samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_e(s.t),
            fmt_e(s.x),
            fmt_e(s.z),
            fmt_e(s.phase),
            fmt_e(s.scaled_z)
        );
    }
    out
}

#[derive(Serialize)]
struct JsonSample {
    t: f64,
    x: f64,
    z: f64,
    #[serde(rename = "X")]
    phase: f64,
    #[serde(rename = "Z")]
    scaled_z: f64,
}

#[derive(Serialize)]
struct JsonSeries<'a> {
    case_tag: &'static str,
    period: Option<f64>,
    drift_per_period: Option<f64>,
    asymptote_times: &'a [f64],
    asymptote_x: &'a [f64],
    gaps: &'a [(f64, f64)],
    band: ZBand,
    branch_sign: Option<f64>,
    samples: Vec<JsonSample>,
}

pub fn series_json(series: &TrajectorySeries) -> String {
    let doc = JsonSeries {
        case_tag: series.case_tag.as_str(),
        period: series.period,
        drift_per_period: series.drift_per_period,
        asymptote_times: &series.asymptote_times,
        asymptote_x: &series.asymptote_x,
        gaps: &series.gaps,
        band: series.band,
        branch_sign: series.branch_sign,
        samples: series
            .samples
            .iter()
            .map(|s| JsonSample {
                t: s.t + 0.0,
                x: s.x + 0.0,
                z: s.z + 0.0,
                phase: s.phase + 0.0,
                scaled_z: s.scaled_z + 0.0,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("series serializes");
    text.push('\n');
    text
}

/// Stagnation depths, one row per solution: `Z,z,branch,residual,tangent`.
pub fn stagnation_csv(report: &StagnationReport, k: f64) -> String {
    let mut out = String::from("Z,z,branch,residual,tangent\n");
    for s in &report.solutions {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_e(s.z_star),
            fmt_e(s.z_star / k),
            s.branch,
            fmt_e(s.residual),
            s.tangent
        );
    }
    out
}

pub fn stagnation_json(report: &StagnationReport) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        count: usize,
        has_tangency: bool,
        #[serde(flatten)]
        report: &'a StagnationReport,
    }
    let doc = Doc {
        count: report.count(),
        has_tangency: report.has_tangency(),
        report,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
    text.push('\n');
    text
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvgLayout {
    pub width: f64,
    pub height: f64,
    pub margin: f64,
}

/// Three decimals, with negative zero printed as `0.000`.
fn f3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

/// Step of 1, 2 or 5 times a power of ten giving about `target` intervals.
fn nice_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let unit = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    unit * mag
}

fn ticks(lo: f64, hi: f64) -> (Vec<f64>, usize) {
    let step = nice_step(hi - lo, 5.0);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    let values = (first..=last).map(|i| i as f64 * step).collect();
    (values, decimals)
}

fn padded_range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold(None, |acc: Option<(f64, f64)>, v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })?;
    let span = hi - lo;
    let pad = if span > 0.0 { 0.05 * span } else { 0.5 * lo.abs().max(1.0) };
    Some((lo - pad, hi + pad))
}

/// Vertical plotting range. Paths with asymptotes shoot off to huge `z`,
/// so their upper limit is taken at the 95th percentile of `z`.
fn z_range(series: &TrajectorySeries) -> Option<(f64, f64)> {
    let mut zs: Vec<f64> = series.samples.iter().map(|s| s.z).filter(|z| z.is_finite()).collect();
    if zs.is_empty() {
        return None;
    }
    if series.asymptote_times.is_empty() {
        return padded_range(zs.into_iter());
    }
    zs.sort_by(f64::total_cmp);
    let cap = zs[(zs.len() - 1) * 95 / 100];
    padded_range(zs.into_iter().filter(|&z| z <= cap))
}

/// Clips the segment `p`–`q` to the rectangle; Liang–Barsky.
fn clip(p: (f64, f64), q: (f64, f64), rect: (f64, f64, f64, f64)) -> Option<((f64, f64), (f64, f64))> {
    let (x0, x1, y0, y1) = rect;
    let (dx, dy) = (q.0 - p.0, q.1 - p.1);
    let mut t0: f64 = 0.0;
    let mut t1: f64 = 1.0;
    for (den, num) in [(-dx, p.0 - x0), (dx, x1 - p.0), (-dy, p.1 - y0), (dy, y1 - p.1)] {
        if den == 0.0 {
            if num < 0.0 {
                return None;
            }
        } else {
            let r = num / den;
            if den < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    (t0 <= t1).then_some({
        (
            (p.0 + t0 * dx, p.1 + t0 * dy),
            (p.0 + t1 * dx, p.1 + t1 * dy),
        )
    })
}

/// Polylines of the path in data coordinates, split at gaps and at
/// excursions outside the plotting rectangle.
fn visible_runs(series: &TrajectorySeries, rect: (f64, f64, f64, f64)) -> Vec<Vec<(f64, f64)>> {
    let mut runs: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut current: Vec<(f64, f64)> = Vec::new();
    for w in series.samples.windows(2) {
        let crosses_gap = series
            .gaps
            .iter()
            .any(|&(lo, hi)| w[0].t <= hi && w[1].t >= lo);
        let seg = if crosses_gap {
            None
        } else {
            clip((w[0].x, w[0].z), (w[1].x, w[1].z), rect)
        };
        match seg {
            Some((a, b)) => {
                if current.last() != Some(&a) {
                    if current.len() > 1 {
                        runs.push(std::mem::take(&mut current));
                    }
                    current.clear();
                    current.push(a);
                }
                current.push(b);
            }
            None => {
                if current.len() > 1 {
                    runs.push(std::mem::take(&mut current));
                }
                current.clear();
            }
        }
    }
    if current.len() > 1 {
        runs.push(current);
    }
    runs
}

/// Path `z(x)` with axes, round-number ticks, and dashed vertical lines at
/// the asymptote abscissae.
pub fn series_svg(series: &TrajectorySeries, layout: SvgLayout) -> String {
    let (w, h, m) = (layout.width, layout.height, layout.margin);
    let x_range = padded_range(series.samples.iter().map(|s| s.x)).unwrap_or((-1.0, 1.0));
    let (x_lo, x_hi) = padded_range(
        series
            .samples
            .iter()
            .map(|s| s.x)
            .chain(series.asymptote_x.iter().copied())
            .filter(|x| *x >= x_range.0 && *x <= x_range.1),
    )
    .unwrap_or(x_range);
    let (z_lo, z_hi) = z_range(series).unwrap_or((-1.0, 1.0));
    let sx = |x: f64| m + (x - x_lo) / (x_hi - x_lo) * (w - 2.0 * m);
    let sz = |z: f64| h - m - (z - z_lo) / (z_hi - z_lo) * (h - 2.0 * m);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {} {}" width="{}" height="{}">"#,
        f3(w),
        f3(h),
        f3(w),
        f3(h)
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#, f3(w), f3(h));
    let _ = writeln!(
        out,
        r#"<g stroke="black" stroke-width="1" fill="none"><rect x="{}" y="{}" width="{}" height="{}"/></g>"#,
        f3(m),
        f3(m),
        f3(w - 2.0 * m),
        f3(h - 2.0 * m)
    );

    out.push_str(r#"<g font-family="monospace" font-size="10" fill="black">"#);
    out.push('\n');
    let (xt, xd) = ticks(x_lo, x_hi);
    for x in xt {
        let px = sx(x);
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/><text x="{}" y="{}" text-anchor="middle">{:.*}</text>"#,
            f3(px),
            f3(h - m),
            f3(px),
            f3(h - m + 5.0),
            f3(px),
            f3(h - m + 17.0),
            xd,
            x + 0.0
        );
    }
    let (zt, zd) = ticks(z_lo, z_hi);
    for z in zt {
        let pz = sz(z);
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/><text x="{}" y="{}" text-anchor="end">{:.*}</text>"#,
            f3(m - 5.0),
            f3(pz),
            f3(m),
            f3(pz),
            f3(m - 7.0),
            f3(pz + 3.0),
            zd,
            z + 0.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">x</text><text x="{}" y="{}" text-anchor="middle">z</text>"#,
        f3(w / 2.0),
        f3(h - m / 4.0),
        f3(m / 4.0),
        f3(h / 2.0)
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        f3(w / 2.0),
        f3(m / 2.0),
        series.case_tag.as_str()
    );
    out.push_str("</g>\n");

    for &xa in &series.asymptote_x {
        if xa >= x_lo && xa <= x_hi {
            let px = sx(xa);
            let _ = writeln!(
                out,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="gray" stroke-dasharray="6 4"/>"#,
                f3(px),
                f3(m),
                f3(px),
                f3(h - m)
            );
        }
    }

    let rect = (x_lo, x_hi, z_lo, z_hi);
    for run in visible_runs(series, rect) {
        let points: Vec<String> = run
            .iter()
            .map(|&(x, z)| format!("{},{}", f3(sx(x)), f3(sz(z))))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
    }
    out.push_str("</svg>\n");
    out
}
