//! Direct numerical integration of the trajectory equations.
//!
//! Three systems are integrated:
//!
//! * the fixed frame, `x' = A e^{kz} cos(k(x - ct))`, `z' = A e^{kz} sin(k(x - ct))`;
//! * the moving frame, `X' = kA e^Z cos X - kc`, `Z' = kA e^Z sin X`;
//! * the truncated vertical equation in second-order form, `Z'' = P'(Z)/2`.
//!
//! The integrators land exactly on every requested sample time, so fixed-step
//! output is reproducible bit for bit.

use serde::{Deserialize, Serialize};

use crate::cubic_analysis::{build_cubic, CubicCoeffs};
use crate::error::{Result, WaveError};
use crate::trajectories::{CaseTag, TrajectorySample, TrajectorySeries, ZState};
use crate::wave_field::WaveParams;

/// Integration is stopped once `|Z|` exceeds this.
pub const ESCAPE_LEVEL: f64 = 1e3;
/// Smallest adaptive step before giving up.
pub const MIN_STEP: f64 = 1e-14;
/// Default number of fixed steps per wave period.
pub const STEPS_PER_WAVE_PERIOD: f64 = 2000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Rk4Fixed,
    Rk45Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Fixed step, or the initial step of the adaptive method.
    pub dt: f64,
    pub method: Method,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub t_start: f64,
    pub t_end: f64,
}

impl IntegratorConfig {
    pub fn rk4(t_start: f64, t_end: f64, dt: f64) -> Self {
        Self {
            dt,
            method: Method::Rk4Fixed,
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            t_start,
            t_end,
        }
    }

    pub fn rk45(t_start: f64, t_end: f64, abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            dt: 1e-3,
            method: Method::Rk45Adaptive,
            abs_tol,
            rel_tol,
            t_start,
            t_end,
        }
    }

    /// RK4 with `dt = T_wave / 2000`.
    pub fn default_for(params: &WaveParams, t_start: f64, t_end: f64) -> Self {
        Self::rk4(t_start, t_end, params.wave_period() / STEPS_PER_WAVE_PERIOD)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(WaveError::domain("dt must be positive"));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(WaveError::domain("tolerances must be positive"));
        }
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_end > self.t_start) {
            return Err(WaveError::domain("t_end must exceed t_start"));
        }
        Ok(())
    }
}

/// Escape of the truncated solution past [`ESCAPE_LEVEL`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeEvent {
    /// End of the first step on which `|Z|` exceeded the level.
    pub t_event: f64,
    pub z_event: f64,
    pub dzdt_event: f64,
    /// `t_event` plus the remaining time to `Z = +∞`, when it is finite.
    pub blow_up_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSolution {
    pub states: Vec<ZState>,
    pub escape: Option<EscapeEvent>,
}

impl TruncatedSolution {
    pub fn case_tag(&self) -> CaseTag {
        CaseTag::OracleTruncated
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// Sup of `|Z'² - (k²A²e^{2Z} - (kcZ - β)²)|`.
    pub max_residual_eq1: f64,
    /// Sup of `|Z'² - P(Z)|`.
    pub max_residual_eq2: f64,
    pub rms_residual: f64,
    pub n_samples: usize,
    pub excluded_windows: Vec<(f64, f64)>,
}

struct Run<const N: usize> {
    states: Vec<(f64, [f64; N])>,
    stopped: Option<(f64, [f64; N])>,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (w, k) in terms {
            acc += w * k[i];
        }
        *o += h * acc;
    }
    out
}

fn rk4_step<const N: usize>(f: &impl Fn(f64, &[f64; N]) -> [f64; N], t: f64, y: &[f64; N], h: f64) -> [f64; N] {
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &axpy(y, h, &[(0.5, &k1)]));
    let k3 = f(t + 0.5 * h, &axpy(y, h, &[(0.5, &k2)]));
    let k4 = f(t + h, &axpy(y, h, &[(1.0, &k3)]));
    axpy(y, h, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)])
}

/// One Dormand–Prince 5(4) step: the fifth-order solution and the error estimate.
fn dopri_step<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    t: f64,
    y: &[f64; N],
    h: f64,
) -> ([f64; N], [f64; N]) {
    let k1 = f(t, y);
    let k2 = f(t + h / 5.0, &axpy(y, h, &[(1.0 / 5.0, &k1)]));
    let k3 = f(t + 3.0 * h / 10.0, &axpy(y, h, &[(3.0 / 40.0, &k1), (9.0 / 40.0, &k2)]));
    let k4 = f(
        t + 4.0 * h / 5.0,
        &axpy(y, h, &[(44.0 / 45.0, &k1), (-56.0 / 15.0, &k2), (32.0 / 9.0, &k3)]),
    );
    let k5 = f(
        t + 8.0 * h / 9.0,
        &axpy(
            y,
            h,
            &[
                (19372.0 / 6561.0, &k1),
                (-25360.0 / 2187.0, &k2),
                (64448.0 / 6561.0, &k3),
                (-212.0 / 729.0, &k4),
            ],
        ),
    );
    let k6 = f(
        t + h,
        &axpy(
            y,
            h,
            &[
                (9017.0 / 3168.0, &k1),
                (-355.0 / 33.0, &k2),
                (46732.0 / 5247.0, &k3),
                (49.0 / 176.0, &k4),
                (-5103.0 / 18656.0, &k5),
            ],
        ),
    );
    let y5 = axpy(
        y,
        h,
        &[
            (35.0 / 384.0, &k1),
            (500.0 / 1113.0, &k3),
            (125.0 / 192.0, &k4),
            (-2187.0 / 6784.0, &k5),
            (11.0 / 84.0, &k6),
        ],
    );
    let k7 = f(t + h, &y5);
    let err = axpy(
        &[0.0; N],
        h,
        &[
            (71.0 / 57600.0, &k1),
            (-71.0 / 16695.0, &k3),
            (71.0 / 1920.0, &k4),
            (-17253.0 / 339200.0, &k5),
            (22.0 / 525.0, &k6),
            (-1.0 / 40.0, &k7),
        ],
    );
    (y5, err)
}

fn check_sample_times(cfg: &IntegratorConfig, times: &[f64]) -> Result<()> {
    cfg.validate()?;
    if times.iter().any(|t| !t.is_finite()) {
        return Err(WaveError::domain("sample times must be finite"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(WaveError::domain("sample times must be strictly increasing"));
    }
    if let (Some(&first), Some(&last)) = (times.first(), times.last()) {
        if first < cfg.t_start || last > cfg.t_end {
            return Err(WaveError::domain(format!(
                "sample times must lie in [{}, {}]",
                cfg.t_start, cfg.t_end
            )));
        }
    }
    Ok(())
}

fn run<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    y0: [f64; N],
    cfg: &IntegratorConfig,
    times: &[f64],
    stop: impl Fn(&[f64; N]) -> bool,
) -> Result<Run<N>> {
    check_sample_times(cfg, times)?;
    let mut t = cfg.t_start;
    let mut y = y0;
    let mut h_adapt = cfg.dt;
    let mut states = Vec::with_capacity(times.len());
    for &target in times {
        match cfg.method {
            Method::Rk4Fixed => {
                let span = target - t;
                let n = if span > 0.0 { (span / cfg.dt - 1e-9).ceil().max(1.0) as usize } else { 0 };
                let start = t;
                for i in 0..n {
                    let t_i = start + span * i as f64 / n as f64;
                    let t_next = if i + 1 == n { target } else { start + span * (i + 1) as f64 / n as f64 };
                    y = rk4_step(&f, t_i, &y, t_next - t_i);
                    t = t_next;
                    if y.iter().any(|v| !v.is_finite()) {
                        return Err(WaveError::Stiffness { t, state: y.to_vec() });
                    }
                    if stop(&y) {
                        return Ok(Run { states, stopped: Some((t, y)) });
                    }
                }
            }
            Method::Rk45Adaptive => {
                while t < target {
                    let h = h_adapt.min(target - t);
                    let (y_new, err) = dopri_step(&f, t, &y, h);
                    let norm = y
                        .iter()
                        .zip(&y_new)
                        .zip(&err)
                        .map(|((a, b), e)| e.abs() / (cfg.abs_tol + cfg.rel_tol * a.abs().max(b.abs())))
                        .fold(0.0, f64::max);
                    let finite = y_new.iter().all(|v| v.is_finite()) && norm.is_finite();
                    if finite && norm <= 1.0 {
                        t = if h == target - t { target } else { t + h };
                        y = y_new;
                        if stop(&y) {
                            return Ok(Run { states, stopped: Some((t, y)) });
                        }
                    }
                    let factor = if finite && norm > 0.0 {
                        (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
                    } else if finite {
                        5.0
                    } else {
                        0.2
                    };
                    // Only grow from the step actually taken, not from a clipped one.
                    h_adapt = if h < h_adapt && norm <= 1.0 { h_adapt } else { h * factor };
                    if h_adapt < MIN_STEP {
                        return Err(WaveError::Stiffness { t, state: y.to_vec() });
                    }
                }
            }
        }
        states.push((t, y));
    }
    Ok(Run { states, stopped: None })
}

fn uniform_sample(params: &WaveParams, t: f64, x: f64, z: f64) -> TrajectorySample {
    let k = params.k();
    TrajectorySample {
        t,
        x,
        z,
        phase: k * (x - params.c() * t),
        scaled_z: k * z,
    }
}

/// Fixed-frame trajectory from `(x0, z0)` at `cfg.t_start`.
pub fn integrate_full(
    params: &WaveParams,
    x0: f64,
    z0: f64,
    cfg: &IntegratorConfig,
    times: &[f64],
) -> Result<TrajectorySeries> {
    let (k, c, amp) = (params.k(), params.c(), params.amplitude_a());
    let rhs = |t: f64, y: &[f64; 2]| {
        let (s, co) = (k * (y[0] - c * t)).sin_cos();
        let e = amp * (k * y[1]).exp();
        [e * co, e * s]
    };
    let out = run(rhs, [x0, z0], cfg, times, |_| false)?;
    let samples = out
        .states
        .iter()
        .map(|&(t, [x, z])| uniform_sample(params, t, x, z))
        .collect();
    Ok(TrajectorySeries::new(CaseTag::OracleFull, samples))
}

/// Moving-frame trajectory from `(X0, Z0)`; samples are mapped back with
/// `x = X/k + ct`, `z = Z/k` and keep the integrated `X`, `Z` verbatim.
pub fn integrate_moving_frame(
    params: &WaveParams,
    phase0: f64,
    scaled_z0: f64,
    cfg: &IntegratorConfig,
    times: &[f64],
) -> Result<TrajectorySeries> {
    let (k, c) = (params.k(), params.c());
    let ka = k * params.amplitude_a();
    let kc = k * c;
    let rhs = |_t: f64, y: &[f64; 2]| {
        let (s, co) = y[0].sin_cos();
        let e = ka * y[1].exp();
        [e * co - kc, e * s]
    };
    let out = run(rhs, [phase0, scaled_z0], cfg, times, |_| false)?;
    let samples = out
        .states
        .iter()
        .map(|&(t, [xx, zz])| TrajectorySample {
            t,
            x: xx / k + c * t,
            z: zz / k,
            phase: xx,
            scaled_z: zz,
        })
        .collect();
    Ok(TrajectorySeries::new(CaseTag::OracleFull, samples))
}

/// `(Z, Z', Z'')` along a moving-frame series.
pub fn moving_frame_states(params: &WaveParams, series: &TrajectorySeries) -> Vec<ZState> {
    let k = params.k();
    let ka = k * params.amplitude_a();
    let kc = k * params.c();
    series
        .samples
        .iter()
        .map(|s| {
            let (sin_x, cos_x) = s.phase.sin_cos();
            let e = ka * s.scaled_z.exp();
            let dzdt = e * sin_x;
            let dxdt = e * cos_x - kc;
            ZState {
                t: s.t,
                z: s.scaled_z,
                dzdt,
                d2zdt2: dzdt * dzdt + e * cos_x * dxdt,
            }
        })
        .collect()
}

/// Time left from `(z_e, z'_e)` to `Z = +∞` under `Z'² = P(Z) + E`.
///
/// With `Z = z_e / s²` the integral becomes regular on `s ∈ [0, 1]`.
fn remaining_time(coeffs: &CubicCoeffs, z_e: f64, dzdt_e: f64) -> Option<f64> {
    if !(z_e > 0.0 && dzdt_e > 0.0 && coeffs.a3 > 0.0) {
        return None;
    }
    let energy = dzdt_e * dzdt_e - coeffs.eval(z_e);
    let integrand = |s: f64| {
        let s2 = s * s;
        let inner = coeffs.a3 * z_e.powi(3)
            + coeffs.a2 * z_e * z_e * s2
            + coeffs.a1 * z_e * s2 * s2
            + (coeffs.a0 + energy) * s2 * s2 * s2;
        2.0 * z_e / inner.sqrt()
    };
    let n = 2000;
    let h = 1.0 / n as f64;
    let mut sum = integrand(0.0) + integrand(1.0);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * integrand(i as f64 * h);
    }
    let value = sum * h / 3.0;
    value.is_finite().then_some(value)
}

/// Second-order truncated equation `Z'' = P'(Z)/2` from `(Z0, Z'0)`.
pub fn integrate_truncated(
    coeffs: &CubicCoeffs,
    z0: f64,
    dzdt0: f64,
    cfg: &IntegratorConfig,
    times: &[f64],
) -> Result<TruncatedSolution> {
    let rhs = |_t: f64, y: &[f64; 2]| [y[1], 0.5 * coeffs.derivative(y[0])];
    let out = run(rhs, [z0, dzdt0], cfg, times, |y| y[0].abs() > ESCAPE_LEVEL)?;
    let to_state = |(t, y): (f64, [f64; 2])| ZState {
        t,
        z: y[0],
        dzdt: y[1],
        d2zdt2: 0.5 * coeffs.derivative(y[0]),
    };
    let escape = out.stopped.map(|(t, y)| EscapeEvent {
        t_event: t,
        z_event: y[0],
        dzdt_event: y[1],
        blow_up_time: remaining_time(coeffs, y[0], y[1]).map(|dt| t + dt),
    });
    Ok(TruncatedSolution {
        states: out.states.into_iter().map(to_state).collect(),
        escape,
    })
}

fn merge_windows(windows: &[(f64, f64)], lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let mut sorted: Vec<(f64, f64)> = windows
        .iter()
        .map(|&(a, b)| (a.min(b).max(lo), a.max(b).min(hi)))
        .filter(|(a, b)| a <= b)
        .collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
    for w in sorted {
        match merged.last_mut() {
            Some(last) if w.0 <= last.1 => last.1 = last.1.max(w.1),
            _ => merged.push(w),
        }
    }
    merged
}

/// Residuals of a `Z` series in the untruncated equation
/// `Z'² = k²A²e^{2Z} - (kcZ - β)²` and in the truncated `Z'² = P(Z)`.
///
/// Samples inside any of `excluded` are skipped; the windows are clipped to
/// the sampled time span and merged.
pub fn residual_full_z_ode(
    params: &WaveParams,
    beta: f64,
    states: &[ZState],
    excluded: &[(f64, f64)],
) -> ResidualReport {
    let k = params.k();
    let ka = k * params.amplitude_a();
    let kc = k * params.c();
    let coeffs = build_cubic(params, beta);
    let (lo, hi) = match (states.first(), states.last()) {
        (Some(a), Some(b)) => (a.t, b.t),
        _ => (0.0, 0.0),
    };
    let excluded_windows = merge_windows(excluded, lo, hi);
    let mut max1: f64 = 0.0;
    let mut max2: f64 = 0.0;
    let mut sum_sq = 0.0;
    let mut n = 0;
    for s in states {
        if excluded_windows.iter().any(|&(a, b)| s.t >= a && s.t <= b) {
            continue;
        }
        let lhs = s.dzdt * s.dzdt;
        let shear = kc * s.z - beta;
        let r1 = (lhs - (ka * ka * (2.0 * s.z).exp() - shear * shear)).abs();
        let r2 = (lhs - coeffs.eval(s.z)).abs();
        max1 = max1.max(r1);
        max2 = max2.max(r2);
        sum_sq += r1 * r1 + r2 * r2;
        n += 1;
    }
    ResidualReport {
        max_residual_eq1: max1,
        max_residual_eq2: max2,
        rms_residual: if n > 0 { (sum_sq / (2 * n) as f64).sqrt() } else { 0.0 },
        n_samples: n,
        excluded_windows,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub dts: Vec<f64>,
    /// Sup-norm error of the final moving-frame state against the reference.
    pub errors: Vec<f64>,
    /// `errors[i] / errors[i + 1]`.
    pub ratios: Vec<f64>,
}

/// RK4 self-convergence on the moving-frame system: errors at `base_dt`
/// halved `refinements` times, against a run at `base_dt / 128`.
pub fn convergence_study(
    params: &WaveParams,
    phase0: f64,
    scaled_z0: f64,
    t_end: f64,
    base_dt: f64,
    refinements: usize,
) -> Result<ConvergenceStudy> {
    let final_state = |dt: f64| -> Result<[f64; 2]> {
        let cfg = IntegratorConfig::rk4(0.0, t_end, dt);
        let s = integrate_moving_frame(params, phase0, scaled_z0, &cfg, &[t_end])?;
        let last = s.samples[0];
        Ok([last.phase, last.scaled_z])
    };
    let reference = final_state(base_dt / 128.0)?;
    let mut dts = Vec::new();
    let mut errors = Vec::new();
    for i in 0..=refinements {
        let dt = base_dt / 2f64.powi(i as i32);
        let y = final_state(dt)?;
        dts.push(dt);
        errors.push((y[0] - reference[0]).abs().max((y[1] - reference[1]).abs()));
    }
    let ratios = errors.windows(2).map(|w| w[0] / w[1]).collect();
    Ok(ConvergenceStudy { dts, errors, ratios })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubic_analysis::{classify_roots, CubicReduction};
    use crate::trajectories::{beta_from_initial, period_case1, EllipticPath};
    use crate::wave_field::Direction;

    fn reference(k: f64) -> WaveParams {
        WaveParams::new(k, 0.1, 9.8, Direction::Right).unwrap()
    }

    fn grid(t_end: f64, n: usize) -> Vec<f64> {
        (1..=n).map(|i| t_end * i as f64 / n as f64).collect()
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::rk4(0.0, 1.0, 0.0).validate().is_err());
        assert!(IntegratorConfig::rk4(1.0, 1.0, 0.1).validate().is_err());
        assert!(IntegratorConfig::rk45(0.0, 1.0, 0.0, 1e-9).validate().is_err());
        let cfg = IntegratorConfig::rk4(0.0, 1.0, 0.1);
        let p = reference(1.0);
        assert!(integrate_full(&p, 0.0, 0.0, &cfg, &[0.5, 0.4]).is_err());
        assert!(integrate_full(&p, 0.0, 0.0, &cfg, &[2.0]).is_err());
        let d = IntegratorConfig::default_for(&p, 0.0, 1.0);
        assert!((d.dt - p.wave_period() / 2000.0).abs() < 1e-18);
    }

    #[test]
    fn deep_particle_barely_moves() {
        let p = reference(1.0);
        let z0 = -10.0 * p.wavelength();
        let t_end = p.wave_period();
        let cfg = IntegratorConfig::default_for(&p, 0.0, t_end);
        let s = integrate_full(&p, 0.3, z0, &cfg, &grid(t_end, 50)).unwrap();
        for sample in &s.samples {
            assert!((sample.x - 0.3).abs() < 1e-6 && (sample.z - z0).abs() < 1e-6);
        }
        assert_eq!(s.case_tag, CaseTag::OracleFull);
    }

    #[test]
    fn surface_particle_drifts_with_the_wave() {
        for dir in [Direction::Right, Direction::Left] {
            let p = WaveParams::new(1.0, 0.1, 9.8, dir).unwrap();
            let t_wave = p.wave_period();
            let cfg = IntegratorConfig::default_for(&p, 0.0, 2.0 * t_wave);
            let s = integrate_full(&p, 0.0, 0.0, &cfg, &[t_wave, 2.0 * t_wave]).unwrap();
            let drift = s.samples[1].x - s.samples[0].x;
            assert_eq!(drift.signum(), p.c().signum());
            let z_span = (s.samples[1].z - s.samples[0].z).abs();
            assert!(z_span < 1e-3);
        }
    }

    #[test]
    fn moving_frame_equilibrium() {
        let p = reference(1.0);
        let z0 = (p.c() / p.amplitude_a()).ln();
        let cfg = IntegratorConfig::rk4(0.0, 5.0, 0.01);
        let s = integrate_moving_frame(&p, 0.0, z0, &cfg, &grid(5.0, 10)).unwrap();
        for sample in &s.samples {
            assert!(sample.phase.abs() < 1e-12);
            assert!((sample.scaled_z - z0).abs() < 1e-12);
        }
    }

    #[test]
    fn frames_agree() {
        let p = reference(1.0);
        let t_end = 3.0 * p.wave_period();
        let times = grid(t_end, 60);
        let cfg = IntegratorConfig::default_for(&p, 0.0, t_end);
        let (x0, z0) = (0.4, -0.2);
        let full = integrate_full(&p, x0, z0, &cfg, &times).unwrap();
        let moving = integrate_moving_frame(&p, p.k() * x0, p.k() * z0, &cfg, &times).unwrap();
        for (a, b) in full.samples.iter().zip(&moving.samples) {
            assert!((a.phase - b.phase).abs() < 1e-8);
            assert!((a.scaled_z - b.scaled_z).abs() < 1e-8);
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        let p = reference(1.0);
        let study = convergence_study(&p, 0.3, -0.2, p.wave_period(), p.wave_period() / 20.0, 3).unwrap();
        assert_eq!(study.ratios.len(), 3);
        for r in &study.ratios {
            assert!((12.0..=20.0).contains(r), "ratio {r}");
        }
    }

    #[test]
    fn adaptive_matches_fixed() {
        let p = reference(2.0);
        let t_end = 4.0;
        let times = grid(t_end, 20);
        let fixed = integrate_moving_frame(&p, 0.1, 0.05, &IntegratorConfig::rk4(0.0, t_end, 1e-3), &times).unwrap();
        let adaptive =
            integrate_moving_frame(&p, 0.1, 0.05, &IntegratorConfig::rk45(0.0, t_end, 1e-12, 1e-12), &times).unwrap();
        for (a, b) in fixed.samples.iter().zip(&adaptive.samples) {
            assert_eq!(a.t, b.t);
            assert!((a.phase - b.phase).abs() < 1e-9);
            assert!((a.scaled_z - b.scaled_z).abs() < 1e-9);
        }
    }

    #[test]
    fn truncated_equilibrium_and_energy() {
        // P = (Z - 1)² (Z + 2) has a double root at Z = 1.
        let coeffs = CubicCoeffs::from_roots(1.0, [1.0, 1.0, -2.0]);
        let cfg = IntegratorConfig::rk4(0.0, 3.0, 1e-3);
        let sol = integrate_truncated(&coeffs, 1.0, 0.0, &cfg, &grid(3.0, 30)).unwrap();
        assert!(sol.states.iter().all(|s| (s.z - 1.0).abs() < 1e-14 && s.dzdt.abs() < 1e-14));
        assert!(sol.escape.is_none());

        let p = reference(1.0);
        let red = match classify_roots(&build_cubic(&p, 1.0)).unwrap() {
            CubicReduction::Case1(r) => r,
            _ => unreachable!(),
        };
        let t_end = 2.0 * period_case1(&red);
        let cfg = IntegratorConfig::default_for(&p, 0.0, t_end);
        let sol = integrate_truncated(&red.coeffs, red.z1, 0.0, &cfg, &grid(t_end, 400)).unwrap();
        let e0 = -red.coeffs.eval(red.z1);
        for s in &sol.states {
            assert!((s.dzdt * s.dzdt - red.coeffs.eval(s.z) - e0).abs() < 1e-8);
            assert!(s.z >= red.z1 - 1e-9 && s.z <= red.z2 + 1e-9);
        }
    }

    #[test]
    fn truncated_period_matches_closed_form() {
        let p = reference(1.0);
        let red = match classify_roots(&build_cubic(&p, 1.0)).unwrap() {
            CubicReduction::Case1(r) => r,
            _ => unreachable!(),
        };
        let period = period_case1(&red);
        let n = 4000;
        let times = grid(1.5 * period, n);
        let cfg = IntegratorConfig::rk4(0.0, 1.5 * period, 1e-4);
        let sol = integrate_truncated(&red.coeffs, red.z1, 0.0, &cfg, &times).unwrap();
        // Second minimum of Z: first sign change of Z' from - to + after the maximum.
        let w = sol
            .states
            .windows(2)
            .find(|w| w[0].t > 0.75 * period && w[0].dzdt < 0.0 && w[1].dzdt >= 0.0)
            .unwrap();
        let frac = w[0].dzdt / (w[0].dzdt - w[1].dzdt);
        let t_min = w[0].t + frac * (w[1].t - w[0].t);
        assert!(((t_min - period) / period).abs() < 1e-6, "{t_min} vs {period}");
    }

    #[test]
    fn case2_escape_and_blow_up() {
        let p = reference(4.0);
        let red = match classify_roots(&build_cubic(&p, 1.0)).unwrap() {
            CubicReduction::Case2(r) => r,
            _ => unreachable!(),
        };
        let path = EllipticPath::new(CubicReduction::Case2(red), 0.0);
        let start = path.state(0.0).unwrap();
        let first_pole = path.asymptotes_in(0.0, 10.0)[0];
        let cfg = IntegratorConfig::rk45(0.0, 10.0, 1e-13, 1e-13);
        let sol = integrate_truncated(&red.coeffs, start.z, start.dzdt, &cfg, &grid(10.0, 1000)).unwrap();
        let ev = sol.escape.unwrap();
        assert!(ev.z_event > ESCAPE_LEVEL);
        assert!(ev.t_event < first_pole);
        let blow_up = ev.blow_up_time.unwrap();
        assert!(((blow_up - first_pole) / first_pole).abs() < 1e-4);
        assert!(sol.states.windows(2).all(|w| w[1].z >= w[0].z - 1e-12 || w[0].t < 1e-9));
    }

    #[test]
    fn residuals_along_true_solution() {
        let p = reference(1.0);
        let t_end = p.wave_period();
        let times = grid(t_end, 200);
        let cfg = IntegratorConfig::default_for(&p, 0.0, t_end);
        let (x0, z0) = (0.7, -0.3);
        let s = integrate_moving_frame(&p, x0, z0, &cfg, &times).unwrap();
        let ka = p.k() * p.amplitude_a();
        let beta = p.k() * p.c() * z0 - ka * z0.exp() * x0.cos();
        let states = moving_frame_states(&p, &s);
        let report = residual_full_z_ode(&p, beta, &states, &[]);
        assert!(report.max_residual_eq1 < 1e-8, "{}", report.max_residual_eq1);
        assert_eq!(report.n_samples, 200);

        let dzdt0 = ka * z0.exp() * x0.sin();
        let (b_plus, b_minus) = beta_from_initial(&p, z0, dzdt0).unwrap();
        assert!((b_plus - beta).abs() < 1e-12 || (b_minus - beta).abs() < 1e-12);
    }

    #[test]
    fn residual_windows_and_stagnation_point() {
        let p = reference(1.0);
        let ka = p.k() * p.amplitude_a();
        let beta = -ka;
        let states: Vec<ZState> = (0..10)
            .map(|i| ZState { t: i as f64, z: 0.0, dzdt: 0.0, d2zdt2: 0.0 })
            .collect();
        let report = residual_full_z_ode(&p, beta, &states, &[(2.5, 4.5), (4.0, 6.5), (-3.0, -1.0)]);
        assert_eq!(report.max_residual_eq1, 0.0);
        assert_eq!(report.excluded_windows, vec![(2.5, 6.5)]);
        assert_eq!(report.n_samples, 6);
    }

    #[test]
    fn truncation_gap_is_reported() {
        let p = reference(1.0);
        let red = match classify_roots(&build_cubic(&p, 1.0)).unwrap() {
            CubicReduction::Case1(r) => r,
            _ => unreachable!(),
        };
        let path = EllipticPath::new(CubicReduction::Case1(red), 0.0);
        let states: Vec<ZState> = grid(path.period(), 100).iter().map(|&t| path.state(t).unwrap()).collect();
        let report = residual_full_z_ode(&p, 1.0, &states, &[]);
        assert!(report.max_residual_eq2 < 1e-10);
        assert!(report.max_residual_eq1 > 0.0);
        assert!(report.rms_residual > 0.0);
    }

    #[test]
    fn simple_cubic_blow_up_time() {
        // Z'' = 3 Z²/2 from Z = 1, Z' = 1 reaches infinity at t = 2.
        let coeffs = CubicCoeffs { a3: 1.0, a2: 0.0, a1: 0.0, a0: 0.0 };
        let cfg = IntegratorConfig::rk4(0.0, 3.0, 1e-3);
        let sol = integrate_truncated(&coeffs, 1.0, 1.0, &cfg, &[3.0]).unwrap();
        let ev = sol.escape.unwrap();
        assert!((ev.blow_up_time.unwrap() - 2.0).abs() < 1e-4);
        assert!(sol.states.is_empty());
    }
}
