//! Closed-form particle paths.
//!
//! Three families are evaluated here:
//!
//! * the peakon-like path `x = ct + const1`, `z = -(1/k) ln|kAt + const2|`;
//! * Case 1 of the cubic truncation, `Z = Z2 sn² + Z1 cn²` with argument
//!   `C1 (t - t0)` and parameter `k1sq`;
//! * Case 2, `Z = Z0 + sqrt(Z0² + pZ0 + q) (1 - cn)/(1 + cn)` with argument
//!   `C2 (t - t0)` and parameter `k2sq`, which blows up where `cn = -1`.
//!
//! The horizontal coordinate of the elliptic families is recovered from
//! `x = ct + (1/k) arcsin(e^{-Z} Z' / (kA))`, see [`assemble_xz`].

use std::f64::consts::FRAC_PI_2;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::cubic_analysis::{Case1Reduction, Case2Reduction, CubicCoeffs, CubicReduction};
use crate::error::{Result, WaveError};
use crate::special_functions::{complete_k, jacobi_sn_cn_dn};
use crate::wave_field::{evaluate_field, WaveParams};

/// Samples whose elliptic argument lies within this distance of a pole of
/// the Case 2 solution are dropped.
pub const ASYMPTOTE_GUARD: f64 = 1e-9;
/// Peakon arguments `|kAt + const2|` below this are rejected.
pub const PEAKON_MIN_ARGUMENT: f64 = 1e-300;
/// Tolerance on the square-root argument of the horizontal-coordinate formula.
pub const RADICAND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakonParams {
    pub const1: f64,
    pub const2: f64,
}

impl PeakonParams {
    /// `const1 = π / (2k)`, the offset for which `sin(k(x - ct)) = 1`
    /// along the path.
    pub fn aligned(params: &WaveParams, const2: f64) -> Self {
        Self {
            const1: FRAC_PI_2 / params.k(),
            const2,
        }
    }

    /// `t* = -const2 / (kA)`.
    pub fn blow_up_time(&self, params: &WaveParams) -> f64 {
        -self.const2 / (params.k() * params.amplitude_a())
    }
}

pub fn peakon_path(params: &WaveParams, pk: &PeakonParams, t: f64) -> Result<(f64, f64)> {
    let k = params.k();
    let arg = k * params.amplitude_a() * t + pk.const2;
    if arg.abs() < PEAKON_MIN_ARGUMENT {
        return Err(WaveError::AsymptoteProximity {
            time: t,
            nearest: pk.blow_up_time(params),
        });
    }
    Ok((params.c() * t + pk.const1, -arg.abs().ln() / k))
}

/// `ln |t - t*|` at which the peakon path reaches height `z_level`.
///
/// The offset itself underflows `f64` for large `k · z_level`, so it is
/// returned in log form.
pub fn peakon_log_offset_at_height(params: &WaveParams, z_level: f64) -> f64 {
    let k = params.k();
    -k * z_level - (k * params.amplitude_a().abs()).ln()
}

/// Residuals of the peakon path in both trajectory equations,
/// `(|x' - u|, |z' - v|)`.
///
/// The second vanishes when `sin(k const1) = -sign(kAt + const2)`; the first
/// is `|c - A e^{kz} cos(k const1)|` and is reported as-is.
pub fn peakon_residuals(params: &WaveParams, pk: &PeakonParams, t: f64) -> (f64, f64) {
    let k = params.k();
    let amp = params.amplitude_a();
    let arg = k * amp * t + pk.const2;
    let x = params.c() * t + pk.const1;
    let z = -arg.abs().ln() / k;
    let field = evaluate_field(params, x, z, t);
    let dx = params.c();
    let dz = -amp / arg;
    ((dx - field.u).abs(), (dz - field.v).abs())
}

/// Vertical state along a closed-form path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZState {
    pub t: f64,
    pub z: f64,
    pub dzdt: f64,
    pub d2zdt2: f64,
}

pub fn case1_z(red: &Case1Reduction, t: f64, t0: f64) -> f64 {
    let j = jacobi_sn_cn_dn(red.c1 * (t - t0), red.k1sq);
    red.z2 * j.sn * j.sn + red.z1 * j.cn * j.cn
}

fn case1_state(red: &Case1Reduction, t: f64, t0: f64) -> ZState {
    let j = jacobi_sn_cn_dn(red.c1 * (t - t0), red.k1sq);
    let z = red.z2 * j.sn * j.sn + red.z1 * j.cn * j.cn;
    ZState {
        t,
        z,
        dzdt: 2.0 * (red.z2 - red.z1) * red.c1 * j.sn * j.cn * j.dn,
        d2zdt2: 0.5 * red.coeffs.derivative(z),
    }
}

/// Nearest pole of the Case 2 solution if `t` is inside the guard band.
fn case2_pole_near(red: &Case2Reduction, t: f64, t0: f64) -> Option<f64> {
    let quarter = complete_k(red.k2sq);
    let arg = red.c2 * (t - t0);
    let n = ((arg - 2.0 * quarter) / (4.0 * quarter)).round();
    let pole = 2.0 * quarter + 4.0 * quarter * n;
    ((arg - pole).abs() < ASYMPTOTE_GUARD).then(|| t0 + pole / red.c2)
}

fn case2_state(red: &Case2Reduction, t: f64, t0: f64) -> Result<ZState> {
    if let Some(nearest) = case2_pole_near(red, t, t0) {
        return Err(WaveError::AsymptoteProximity { time: t, nearest });
    }
    let j = jacobi_sn_cn_dn(red.c2 * (t - t0), red.k2sq);
    let r = red.radius();
    // (1 - cn)/(1 + cn) = sn²/(1 + cn)² = (1 - cn)²/sn², whichever avoids cancellation.
    let (ratio, dratio) = if j.cn >= 0.0 {
        let den = 1.0 + j.cn;
        (j.sn * j.sn / (den * den), 2.0 * j.sn * j.dn / (den * den))
    } else {
        let num = 1.0 - j.cn;
        let s3 = j.sn * j.sn * j.sn;
        (num * num / (j.sn * j.sn), 2.0 * j.dn * num * num / s3)
    };
    let z = red.z0 + r * ratio;
    Ok(ZState {
        t,
        z,
        dzdt: r * red.c2 * dratio,
        d2zdt2: 0.5 * red.coeffs.derivative(z),
    })
}

pub fn case2_z(red: &Case2Reduction, t: f64, t0: f64) -> Result<f64> {
    case2_state(red, t, t0).map(|s| s.z)
}

/// `t0 + (2 + 4n) K(k2sq) / C2` for each `n` in the range.
pub fn asymptote_times(red: &Case2Reduction, t0: f64, n_range: Range<i64>) -> Vec<f64> {
    let quarter = complete_k(red.k2sq);
    n_range
        .map(|n| t0 + (2.0 + 4.0 * n as f64) * quarter / red.c2)
        .collect()
}

/// Period of `Z` in Case 1, `2 K(k1sq) / C1`.
pub fn period_case1(red: &Case1Reduction) -> f64 {
    2.0 * complete_k(red.k1sq) / red.c1
}

/// A Case 1 or Case 2 closed form together with its time shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EllipticPath {
    Case1 { red: Case1Reduction, t0: f64 },
    Case2 { red: Case2Reduction, t0: f64 },
}

impl EllipticPath {
    pub fn new(reduction: CubicReduction, t0: f64) -> Self {
        match reduction {
            CubicReduction::Case1(red) => EllipticPath::Case1 { red, t0 },
            CubicReduction::Case2(red) => EllipticPath::Case2 { red, t0 },
        }
    }

    pub fn t0(&self) -> f64 {
        match *self {
            EllipticPath::Case1 { t0, .. } | EllipticPath::Case2 { t0, .. } => t0,
        }
    }

    pub fn coeffs(&self) -> &CubicCoeffs {
        match self {
            EllipticPath::Case1 { red, .. } => &red.coeffs,
            EllipticPath::Case2 { red, .. } => &red.coeffs,
        }
    }

    pub fn case_tag(&self) -> CaseTag {
        match self {
            EllipticPath::Case1 { .. } => CaseTag::Case1,
            EllipticPath::Case2 { .. } => CaseTag::Case2,
        }
    }

    pub fn state(&self, t: f64) -> Result<ZState> {
        match self {
            EllipticPath::Case1 { red, t0 } => Ok(case1_state(red, t, *t0)),
            EllipticPath::Case2 { red, t0 } => case2_state(red, t, *t0),
        }
    }

    /// Period of `Z(t)`: `2K/C1` in Case 1, `4K/C2` (pole to pole) in Case 2.
    pub fn period(&self) -> f64 {
        match self {
            EllipticPath::Case1 { red, .. } => period_case1(red),
            EllipticPath::Case2 { red, .. } => 4.0 * complete_k(red.k2sq) / red.c2,
        }
    }

    /// Range of `Z` visited by the path.
    pub fn band(&self) -> ZBand {
        match self {
            EllipticPath::Case1 { red, .. } => ZBand {
                lo: Some(red.z1),
                hi: Some(red.z2),
            },
            EllipticPath::Case2 { red, .. } => ZBand {
                lo: Some(red.z0),
                hi: None,
            },
        }
    }

    /// Poles of `Z(t)` inside `[t_lo, t_hi]` (empty in Case 1).
    pub fn asymptotes_in(&self, t_lo: f64, t_hi: f64) -> Vec<f64> {
        match self {
            EllipticPath::Case1 { .. } => Vec::new(),
            EllipticPath::Case2 { red, t0 } => {
                let spacing = self.period();
                let first = ((t_lo - t0) / spacing - 0.5).floor() as i64;
                let last = ((t_hi - t0) / spacing - 0.5).ceil() as i64;
                asymptote_times(red, *t0, first..last + 1)
                    .into_iter()
                    .filter(|&t| t >= t_lo && t <= t_hi)
                    .collect()
            }
        }
    }

    /// Guard half-width in time around each pole.
    pub fn guard_time(&self) -> f64 {
        match self {
            EllipticPath::Case1 { red, .. } => ASYMPTOTE_GUARD / red.c1,
            EllipticPath::Case2 { red, .. } => ASYMPTOTE_GUARD / red.c2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    Peakon,
    Case1,
    Case2,
    OracleFull,
    OracleTruncated,
}

impl CaseTag {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseTag::Peakon => "peakon",
            CaseTag::Case1 => "case1",
            CaseTag::Case2 => "case2",
            CaseTag::OracleFull => "oracle_full",
            CaseTag::OracleTruncated => "oracle_truncated",
        }
    }
}

/// Range of the moving-frame depth `Z`; `None` marks an unbounded side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZBand {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

impl ZBand {
    pub fn contains(&self, z: f64) -> bool {
        self.lo.is_none_or(|lo| z >= lo) && self.hi.is_none_or(|hi| z <= hi)
    }
}

/// One point of a particle path in both the fixed and the moving frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: f64,
    pub z: f64,
    /// `X = k(x - ct)`.
    pub phase: f64,
    /// `Z = kz`.
    pub scaled_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySeries {
    pub samples: Vec<TrajectorySample>,
    pub case_tag: CaseTag,
    pub period: Option<f64>,
    pub drift_per_period: Option<f64>,
    pub asymptote_times: Vec<f64>,
    /// Horizontal position `lim x(t)` at each asymptote time.
    pub asymptote_x: Vec<f64>,
    /// Time windows left unsampled around asymptotes.
    pub gaps: Vec<(f64, f64)>,
    pub band: ZBand,
    /// Global arcsin sign chosen by [`Stitching`], elliptic paths only.
    pub branch_sign: Option<f64>,
}

impl TrajectorySeries {
    pub fn new(case_tag: CaseTag, samples: Vec<TrajectorySample>) -> Self {
        let band = sample_band(&samples);
        Self {
            samples,
            case_tag,
            period: None,
            drift_per_period: None,
            asymptote_times: Vec::new(),
            asymptote_x: Vec::new(),
            gaps: Vec::new(),
            band,
            branch_sign: None,
        }
    }

    pub fn z_range(&self) -> Option<(f64, f64)> {
        let mut iter = self.samples.iter().map(|s| s.scaled_z);
        let first = iter.next()?;
        Some(iter.fold((first, first), |(lo, hi), z| (lo.min(z), hi.max(z))))
    }
}

fn sample_band(samples: &[TrajectorySample]) -> ZBand {
    let lo = samples.iter().map(|s| s.scaled_z).reduce(f64::min);
    let hi = samples.iter().map(|s| s.scaled_z).reduce(f64::max);
    ZBand { lo, hi }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(WaveError::domain("sample times must be finite"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(WaveError::domain("sample times must be strictly increasing"));
    }
    Ok(())
}

/// Peakon path sampled at `times`, skipping the blow-up instant.
pub fn peakon_series(
    params: &WaveParams,
    pk: &PeakonParams,
    times: &[f64],
) -> Result<TrajectorySeries> {
    check_times(times)?;
    let k = params.k();
    let c = params.c();
    let t_star = pk.blow_up_time(params);
    let mut samples = Vec::with_capacity(times.len());
    for &t in times {
        if (t - t_star).abs() < ASYMPTOTE_GUARD {
            continue;
        }
        let (x, z) = peakon_path(params, pk, t)?;
        samples.push(TrajectorySample {
            t,
            x,
            z,
            phase: k * pk.const1,
            scaled_z: k * z,
        });
    }
    let mut series = TrajectorySeries::new(CaseTag::Peakon, samples);
    series.band.lo = None;
    if let (Some(first), Some(last)) = (times.first(), times.last()) {
        if t_star >= *first && t_star <= *last {
            series.asymptote_times.push(t_star);
            series.asymptote_x.push(c * t_star + pk.const1);
            series
                .gaps
                .push((t_star - ASYMPTOTE_GUARD, t_star + ASYMPTOTE_GUARD));
        }
    }
    Ok(series)
}

/// How the global sign of the arcsin term is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Stitching {
    /// Pick the sign whose `dx/dt` at the first sample is closest to the
    /// field velocity `u` there; ties go to `+1`.
    MatchField,
    Fixed(f64),
}

/// Arcsin argument `y = e^{-Z} Z' / (kA)` and its time derivative.
fn arcsin_argument(params: &WaveParams, state: &ZState) -> (f64, f64) {
    let ka = params.k() * params.amplitude_a();
    let decay = (-state.z).exp();
    let y = state.dzdt * decay / ka;
    let dy = (state.d2zdt2 - state.dzdt * state.dzdt) * decay / ka;
    (y, dy)
}

/// `1 - ((kcZ - β) / (kA e^Z))²`, nonnegative whenever `Z` is reachable
/// under the untruncated equation with this `β`.
pub fn radicand(params: &WaveParams, beta: f64, z: f64) -> f64 {
    let k = params.k();
    let w = (k * params.c() * z - beta) / (k * params.amplitude_a() * z.exp());
    1.0 - w * w
}

fn horizontal_rate(params: &WaveParams, state: &ZState, sign: f64) -> f64 {
    let (y, dy) = arcsin_argument(params, state);
    let cos = (1.0 - y * y).max(0.0).sqrt();
    if cos == 0.0 {
        return params.c();
    }
    params.c() + sign * dy / (cos * params.k())
}

fn choose_sign(params: &WaveParams, state: &ZState) -> f64 {
    let (y, _) = arcsin_argument(params, state);
    let u = params.amplitude_a() * state.z.exp() * (1.0 - y * y).max(0.0).sqrt();
    let plus = (horizontal_rate(params, state, 1.0) - u).abs();
    let minus = (horizontal_rate(params, state, -1.0) - u).abs();
    if minus < plus {
        -1.0
    } else {
        1.0
    }
}

fn assembled_sample(
    params: &WaveParams,
    beta: f64,
    state: &ZState,
    sign: f64,
) -> Result<TrajectorySample> {
    let rad = radicand(params, beta, state.z);
    if rad < -RADICAND_TOL {
        return Err(WaveError::contract(format!(
            "square-root argument {rad:e} < 0 at Z = {} (t = {}); Z is outside the admissible band for beta = {beta}",
            state.z, state.t
        )));
    }
    let (y, _) = arcsin_argument(params, state);
    if !y.is_finite() || y.abs() > 1.0 + RADICAND_TOL {
        return Err(WaveError::contract(format!(
            "arcsin argument {y} outside [-1, 1] at t = {}",
            state.t
        )));
    }
    let k = params.k();
    let phase = sign * y.clamp(-1.0, 1.0).asin();
    Ok(TrajectorySample {
        t: state.t,
        x: params.c() * state.t + phase / k,
        z: state.z / k,
        phase,
        scaled_z: state.z,
    })
}

/// Builds `(x(t), z(t))` from a closed-form `Z(t)`.
///
/// `x = ct + (s/k) arcsin(e^{-Z} Z'/(kA))` with `Z'` the analytic derivative
/// of the closed form, so the sheet of the arcsin flips exactly where `Z'`
/// changes sign (the turning points of `Z`) and `x(t)` stays continuous.
/// Over one period of `Z` the horizontal increment is exactly `cT`.
/// Every sample is also checked against the untruncated relation: the
/// square-root argument `1 - ((kcZ - β)/(kAe^Z))²` must not fall below
/// `-1e-9`.
pub fn assemble_xz(
    params: &WaveParams,
    beta: f64,
    path: &EllipticPath,
    times: &[f64],
    stitching: Stitching,
) -> Result<TrajectorySeries> {
    check_times(times)?;
    let states: Vec<ZState> = times
        .iter()
        .filter_map(|&t| match path.state(t) {
            Err(WaveError::AsymptoteProximity { .. }) => None,
            other => Some(other),
        })
        .collect::<Result<_>>()?;

    let sign = match stitching {
        Stitching::Fixed(s) if s != 0.0 => s.signum(),
        Stitching::Fixed(_) => return Err(WaveError::domain("branch sign must be nonzero")),
        Stitching::MatchField => states
            .first()
            .map_or(1.0, |first| choose_sign(params, first)),
    };

    let samples = states
        .iter()
        .map(|s| assembled_sample(params, beta, s, sign))
        .collect::<Result<Vec<_>>>()?;

    let period = path.period();
    let mut series = TrajectorySeries::new(path.case_tag(), samples);
    series.period = Some(period);
    series.drift_per_period = Some(params.c() * period);
    series.band = path.band();
    series.branch_sign = Some(sign);
    if let (Some(&first), Some(&last)) = (times.first(), times.last()) {
        let guard = path.guard_time();
        for t_pole in path.asymptotes_in(first, last) {
            series.asymptote_times.push(t_pole);
            series.gaps.push((t_pole - guard, t_pole + guard));
            // lim x(t) at the pole, approached from the left.
            let probe = path.state(t_pole - 10.0 * guard)?;
            series
                .asymptote_x
                .push(assembled_sample(params, beta, &probe, sign)?.x);
        }
    }
    Ok(series)
}

/// Horizontal displacement between `t_from` and `t_to` by composite Simpson
/// quadrature of the analytic `dx/dt` along the closed-form path.
///
/// Agreement with the difference of [`assemble_xz`] values confirms that
/// the sheet stitching leaves `x(t)` continuous.
pub fn quadrature_displacement(
    params: &WaveParams,
    path: &EllipticPath,
    sign: f64,
    t_from: f64,
    t_to: f64,
    intervals: usize,
) -> Result<f64> {
    let n = intervals.max(2) + intervals % 2;
    let h = (t_to - t_from) / n as f64;
    let mut sum = 0.0;
    for i in 0..=n {
        let t = t_from + i as f64 * h;
        let state = path.state(t)?;
        let weight = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += weight * horizontal_rate(params, &state, sign);
    }
    Ok(sum * h / 3.0)
}

/// Candidate values of `β` consistent with an initial `(Z, dZ/dt)` under
/// `(kcZ - β)² = k²A²e^{2Z} - (dZ/dt)²`, ordered as `kcZ ∓ sqrt(...)`.
pub fn beta_from_initial(params: &WaveParams, z_init: f64, dzdt_init: f64) -> Result<(f64, f64)> {
    let k = params.k();
    let envelope = k * params.amplitude_a() * z_init.exp();
    let disc = envelope * envelope - dzdt_init * dzdt_init;
    if disc < 0.0 {
        return Err(WaveError::contract(format!(
            "vertical velocity {dzdt_init} exceeds the field envelope {}",
            envelope.abs()
        )));
    }
    let centre = k * params.c() * z_init;
    let root = disc.sqrt();
    Ok((centre - root, centre + root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubic_analysis::{build_cubic, classify_roots};
    use crate::wave_field::Direction;

    fn reference(k: f64) -> WaveParams {
        WaveParams::new(k, 0.1, 9.8, Direction::Right).unwrap()
    }

    fn path(k: f64, beta: f64, t0: f64) -> EllipticPath {
        EllipticPath::new(classify_roots(&build_cubic(&reference(k), beta)).unwrap(), t0)
    }

    fn case1(k: f64, beta: f64) -> Case1Reduction {
        match classify_roots(&build_cubic(&reference(k), beta)).unwrap() {
            CubicReduction::Case1(r) => r,
            _ => panic!("expected Case 1"),
        }
    }

    fn case2(k: f64, beta: f64) -> Case2Reduction {
        match classify_roots(&build_cubic(&reference(k), beta)).unwrap() {
            CubicReduction::Case2(r) => r,
            _ => panic!("expected Case 2"),
        }
    }

    #[test]
    fn peakon_crosses_surface_and_blows_up() {
        let w = reference(1.0);
        let pk = PeakonParams::aligned(&w, 0.5);
        let ka = w.k() * w.amplitude_a();
        let (_, z) = peakon_path(&w, &pk, (1.0 - 0.5) / ka).unwrap();
        assert!(z.abs() < 1e-15);

        let t_star = pk.blow_up_time(&w);
        let centred = PeakonParams::aligned(&w, 0.0);
        assert!(matches!(
            peakon_path(&w, &centred, 0.0),
            Err(WaveError::AsymptoteProximity { .. })
        ));
        let (x_near, z_near) = peakon_path(&w, &pk, t_star + 1e-9).unwrap();
        assert!(z_near > 15.0);
        assert!((x_near - (w.c() * t_star + pk.const1)).abs() < 1e-8);
        let (x_far, z_far) = peakon_path(&w, &pk, 1e6).unwrap();
        assert!(z_far < -10.0 && x_far > 1e6);
        let (x_past, z_past) = peakon_path(&w, &pk, -1e6).unwrap();
        assert!(z_past < -10.0 && x_past < -1e6);
    }

    #[test]
    fn peakon_residuals_under_aligned_offset() {
        let w = reference(1.0);
        // kAt + const2 < 0 on t < t*; sin(k const1) = 1 aligns the second equation there.
        let pk = PeakonParams::aligned(&w, 2.0);
        let t_star = pk.blow_up_time(&w);
        for dt in [0.01, 0.5, 3.0, 50.0] {
            let (r1, r2) = peakon_residuals(&w, &pk, t_star - dt);
            assert!(r2 <= 1e-12, "r2 = {r2}");
            assert!((r1 - w.c()).abs() < 1e-12);
        }
        let (r1, r2) = peakon_residuals(&w, &pk, t_star - 1e9);
        assert!((r1 - w.c()).abs() < 1e-12 && r2 < 1e-12);
    }

    #[test]
    fn peakon_log_offset() {
        let w = reference(1.0);
        let ln_offset = peakon_log_offset_at_height(&w, 10.0);
        let pk = PeakonParams::aligned(&w, 0.0);
        let (_, z) = peakon_path(&w, &pk, ln_offset.exp()).unwrap();
        assert!((z - 10.0).abs() < 1e-12);
    }

    #[test]
    fn case1_turning_points_and_period() {
        let red = case1(1.0, 1.0);
        let t0 = 0.3;
        assert!((case1_z(&red, t0, t0) - red.z1).abs() < 1e-15);
        let quarter = complete_k(red.k1sq) / red.c1;
        assert!((case1_z(&red, t0 + quarter, t0) - red.z2).abs() < 1e-13);
        let period = period_case1(&red);
        assert!((case1_z(&red, t0 + period, t0) - red.z1).abs() < 1e-10);
        assert!((case1_z(&red, t0 + 0.5 * period, t0) - red.z2).abs() < 1e-10);
        for i in 0..500 {
            let z = case1_z(&red, i as f64 * 0.013, t0);
            assert!(z >= red.z1 - 1e-12 && z <= red.z2 + 1e-12);
        }
    }

    #[test]
    fn case1_period_small_modulus_limit() {
        let coeffs = CubicCoeffs::from_roots(1.0, [0.0, 1e-14, 5.0]);
        let red = crate::cubic_analysis::reduce_case1([0.0, 1e-14, 5.0], &coeffs).unwrap();
        let period = period_case1(&red);
        assert!((period - std::f64::consts::PI / red.c1).abs() < 1e-12);
    }

    #[test]
    fn case2_values_and_poles() {
        let red = case2(4.0, 1.0);
        let t0 = -0.2;
        assert!((case2_z(&red, t0, t0).unwrap() - red.z0).abs() < 1e-15);
        let quarter = complete_k(red.k2sq) / red.c2;
        let z_quarter = case2_z(&red, t0 + quarter, t0).unwrap();
        assert!((z_quarter - (red.z0 + red.radius())).abs() < 1e-10);

        let poles = asymptote_times(&red, t0, -1..3);
        assert!((poles[1] - (t0 + 2.0 * quarter)).abs() < 1e-14);
        for w in poles.windows(2) {
            assert!((w[1] - w[0] - 4.0 * quarter).abs() < 1e-12);
        }
        for &tp in &poles {
            let j = jacobi_sn_cn_dn(red.c2 * (tp - t0), red.k2sq);
            assert!((1.0 + j.cn).abs() <= 1e-9);
            assert!(matches!(
                case2_z(&red, tp, t0),
                Err(WaveError::AsymptoteProximity { nearest, .. }) if (nearest - tp).abs() < 1e-12
            ));
        }
        let near = case2_z(&red, poles[1] - 1e-6, t0).unwrap();
        assert!(near > 1e6);
        for i in 0..400 {
            if let Ok(z) = case2_z(&red, t0 + i as f64 * 0.011, t0) {
                assert!(z >= red.z0 - 1e-12);
            }
        }
    }

    /// Centered-difference `Z'` squared against `P(Z)` away from turning
    /// points and poles.
    fn check_truncated_residual(path: &EllipticPath, t_lo: f64, t_hi: f64) {
        let coeffs = *path.coeffs();
        let h = 1e-5;
        let n = 400;
        let mut worst = 0.0f64;
        let mut p_max = 0.0f64;
        for i in 0..=n {
            let t = t_lo + (t_hi - t_lo) * i as f64 / n as f64;
            let (Ok(s), Ok(sp), Ok(sm)) = (path.state(t), path.state(t + h), path.state(t - h))
            else {
                continue;
            };
            if s.z > 50.0 || s.dzdt.abs() < 1e-2 {
                continue;
            }
            let fd = (sp.z - sm.z) / (2.0 * h);
            let pz = coeffs.eval(s.z);
            p_max = p_max.max(pz.abs());
            worst = worst.max((fd * fd - pz).abs());
            assert!((fd - s.dzdt).abs() < 1e-6 * s.dzdt.abs().max(1.0));
        }
        assert!(worst <= 1e-6 * p_max, "worst {worst:e}, max|P| {p_max:e}");
    }

    #[test]
    fn closed_forms_solve_the_truncated_equation() {
        check_truncated_residual(&path(1.0, 1.0, 0.0), 0.0, 5.0);
        check_truncated_residual(&path(2.0, -1.0, 0.4), 0.0, 5.0);
        check_truncated_residual(&path(4.0, 1.0, 0.0), 0.0, 3.0);
    }

    fn times(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn assembled_case1_drifts_by_ct_per_period() {
        for (k, beta) in [(1.0, 1.0), (2.0, -1.0)] {
            let w = reference(k);
            let p = path(k, beta, 0.0);
            let period = p.period();
            for t_start in [0.0, 0.37, 1.9] {
                let s = assemble_xz(
                    &w,
                    beta,
                    &p,
                    &[t_start, t_start + period],
                    Stitching::MatchField,
                )
                .unwrap();
                let dx = s.samples[1].x - s.samples[0].x;
                let expected = w.c() * period;
                assert!((dx - expected).abs() <= 1e-8 * expected.abs(), "{dx} vs {expected}");
                assert!(dx > 0.0);
            }
        }
    }

    #[test]
    fn assembled_series_is_continuous_and_frame_consistent() {
        let w = reference(1.0);
        let p = path(1.0, 1.0, 0.0);
        let ts = times(0.0, 3.0 * p.period(), 3001);
        let s = assemble_xz(&w, 1.0, &p, &ts, Stitching::MatchField).unwrap();
        assert_eq!(s.case_tag, CaseTag::Case1);
        for pair in s.samples.windows(2) {
            let dt = pair[1].t - pair[0].t;
            assert!((pair[1].x - pair[0].x).abs() < 5.0 * w.c() * dt);
        }
        for smp in &s.samples {
            assert!((smp.phase - w.k() * (smp.x - w.c() * smp.t)).abs() <= 1e-12);
            assert!((smp.scaled_z - w.k() * smp.z).abs() <= 1e-12);
        }
        // Quadrature of dx/dt across several turning points matches the
        // closed-form displacement, so no sheet jump hides in between.
        let sign = s.branch_sign.unwrap();
        let (a, b) = (0.1, 0.1 + 1.7 * p.period());
        let pts = assemble_xz(&w, 1.0, &p, &[a, b], Stitching::Fixed(sign)).unwrap();
        let closed = pts.samples[1].x - pts.samples[0].x;
        let quad = quadrature_displacement(&w, &p, sign, a, b, 20_000).unwrap();
        assert!((closed - quad).abs() < 1e-9, "{closed} vs {quad}");
    }

    #[test]
    fn assembled_case2_records_asymptotes() {
        let w = reference(4.0);
        let p = path(4.0, 1.0, 0.0);
        let ts = times(0.0, 2.0 * p.period(), 2001);
        let s = assemble_xz(&w, 1.0, &p, &ts, Stitching::MatchField).unwrap();
        assert_eq!(s.case_tag, CaseTag::Case2);
        assert_eq!(s.asymptote_times.len(), 2);
        assert_eq!(s.asymptote_x.len(), 2);
        for (&tp, &xp) in s.asymptote_times.iter().zip(&s.asymptote_x) {
            assert!((xp - w.c() * tp).abs() < 1e-6);
        }
        assert!(s.samples.windows(2).all(|p| p[1].t > p[0].t));
        for smp in &s.samples {
            assert!(smp.scaled_z >= p.band().lo.unwrap() - 1e-12);
        }
    }

    #[test]
    fn assembled_sample_at_exact_pole_is_dropped() {
        let w = reference(4.0);
        let p = path(4.0, 1.0, 0.0);
        let EllipticPath::Case2 { red, .. } = p else { panic!() };
        let pole = asymptote_times(&red, 0.0, 0..1)[0];
        let s = assemble_xz(&w, 1.0, &p, &[0.0, pole, pole + 0.1], Stitching::MatchField).unwrap();
        assert_eq!(s.samples.len(), 2);
        assert_eq!(s.gaps.len(), 1);
    }

    #[test]
    fn corrupted_beta_is_a_contract_violation() {
        let w = reference(1.0);
        let p = path(1.0, 1.0, 0.0);
        let ts = times(0.0, p.period(), 50);
        assert!(matches!(
            assemble_xz(&w, 2.0, &p, &ts, Stitching::MatchField),
            Err(WaveError::ContractViolation(_))
        ));
        // Vanishing amplitude collapses the admissible band.
        let flat = WaveParams::new(1.0, 1e-200, 9.8, Direction::Right).unwrap();
        assert!(matches!(
            assemble_xz(&flat, 1.0, &p, &ts, Stitching::MatchField),
            Err(WaveError::ContractViolation(_))
        ));
    }

    #[test]
    fn beta_candidates() {
        let w = reference(2.0);
        let ka = w.k() * w.amplitude_a();
        let (b1, b2) = beta_from_initial(&w, 0.0, 0.0).unwrap();
        assert!((b1 + ka).abs() < 1e-15 && (b2 - ka).abs() < 1e-15);

        let z: f64 = 0.05;
        let edge = ka * z.exp();
        let (b1, b2) = beta_from_initial(&w, z, edge).unwrap();
        assert!((b1 - w.k() * w.c() * z).abs() < 1e-12);
        assert_eq!(b1, b2);
        assert!(beta_from_initial(&w, z, 1.01 * edge).is_err());

        for z in [-0.1, -0.03, 0.0, 0.04, 0.1] {
            let dz = 0.3 * ka;
            let (b1, b2) = beta_from_initial(&w, z, dz).unwrap();
            for b in [b1, b2] {
                let p = build_cubic(&w, b);
                assert!((p.eval(z) - dz * dz).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn peakon_series_skips_blow_up() {
        let w = reference(1.0);
        let pk = PeakonParams::aligned(&w, -1.0);
        let t_star = pk.blow_up_time(&w);
        let ts = [t_star - 1.0, t_star, t_star + 1.0];
        let s = peakon_series(&w, &pk, &ts).unwrap();
        assert_eq!(s.samples.len(), 2);
        assert_eq!(s.asymptote_times, vec![t_star]);
        assert_eq!(s.band.lo, None);
    }
}
