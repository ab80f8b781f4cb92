//! Linear deep-water wave solution in physical variables.
//!
//! For a wave of wavenumber `k`, amplitude `a` and gravity `g`, travelling
//! with speed `c = ±sqrt(g/k)`, the velocity field and pressure are
//!
//! ```text
//! eta(x, t)    = a cos(k(x - ct))
//! u(x, z, t)   = A e^{kz} cos(k(x - ct))
//! v(x, z, t)   = A e^{kz} sin(k(x - ct))
//! p(x, z, t)   = p0 - rho g z + rho a g e^{kz} cos(k(x - ct))
//! ```
//!
//! with `A = a c k`. The density defaults to 1 and `p0` to 0.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WaveError};

/// Propagation direction of the wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Right,
    Left,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Right => 1.0,
            Direction::Left => -1.0,
        }
    }

    pub fn from_sign(sign: f64) -> Result<Self> {
        if sign > 0.0 {
            Ok(Direction::Right)
        } else if sign < 0.0 {
            Ok(Direction::Left)
        } else {
            Err(WaveError::domain("direction sign must be +1 or -1"))
        }
    }
}

/// Physical description of a small-amplitude deep-water wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    k: f64,
    a: f64,
    g: f64,
    direction: Direction,
    p0: f64,
    rho: f64,
}

impl WaveParams {
    pub fn new(k: f64, a: f64, g: f64, direction: Direction) -> Result<Self> {
        for (name, value) in [("k", k), ("a", a), ("g", g)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(WaveError::domain(format!(
                    "{name} must be finite and positive, got {value}"
                )));
            }
        }
        Ok(Self {
            k,
            a,
            g,
            direction,
            p0: 0.0,
            rho: 1.0,
        })
    }

    pub fn with_p0(mut self, p0: f64) -> Result<Self> {
        if !p0.is_finite() {
            return Err(WaveError::domain("p0 must be finite"));
        }
        self.p0 = p0;
        Ok(self)
    }

    pub fn with_rho(mut self, rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(WaveError::domain("rho must be finite and positive"));
        }
        self.rho = rho;
        Ok(self)
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Wave speed `c`.
    pub fn c(&self) -> f64 {
        dispersion_speed(self)
    }

    /// Trajectory constant `A = a c k`.
    pub fn amplitude_a(&self) -> f64 {
        trajectory_constant(self)
    }

    pub fn wavelength(&self) -> f64 {
        TAU / self.k
    }

    /// Time for one wavelength to pass a fixed point, `2π / (k |c|)`.
    pub fn wave_period(&self) -> f64 {
        TAU / (self.k * self.c().abs())
    }

    /// Phase `k(x - ct)` reduced into `[0, 2π)`.
    pub fn phase(&self, x: f64, t: f64) -> f64 {
        (self.k * (x - self.c() * t)).rem_euclid(TAU)
    }
}

/// `c = direction · sqrt(g/k)`.
pub fn dispersion_speed(params: &WaveParams) -> f64 {
    params.direction.sign() * (params.g / params.k).sqrt()
}

/// `A = a c k`; carries the sign of the direction.
pub fn trajectory_constant(params: &WaveParams) -> f64 {
    params.a * dispersion_speed(params) * params.k
}

/// Velocity, pressure and surface elevation at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub u: f64,
    pub v: f64,
    pub p: f64,
    pub eta: f64,
    /// The probe point lies above the free surface `z = eta`.
    pub above_surface: bool,
}

pub fn evaluate_field(params: &WaveParams, x: f64, z: f64, t: f64) -> FieldSample {
    let k = params.k;
    let amp = trajectory_constant(params);
    let (sin_ph, cos_ph) = params.phase(x, t).sin_cos();
    let decay = (k * z).exp();
    let eta = params.a * cos_ph;
    FieldSample {
        u: amp * decay * cos_ph,
        v: amp * decay * sin_ph,
        p: params.p0 - params.rho * params.g * z
            + params.rho * params.a * params.g * decay * cos_ph,
        eta,
        above_surface: z > eta,
    }
}
