//! Arithmetic-geometric mean, Legendre elliptic integrals of the first
//! kind and the Jacobi elliptic functions.
//!
//! All functions take the parameter `m = k²` (squared modulus), the same
//! convention as `JacobiSN[u, m]` in Mathematica or `scipy.special.ellipj`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WaveError};

const AGM_TOL: f64 = 1e-15;
const MAX_AGM_ITER: usize = 64;

/// Parameters this close to 0 or 1 use the trigonometric or hyperbolic
/// limits of the Jacobi functions.
pub const DEGENERATE_EPS: f64 = 1e-12;

/// Squared modulus `m`, `0 <= m < 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EllipticParameter(f64);

impl EllipticParameter {
    pub fn new(m: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&m) {
            return Err(WaveError::domain(format!(
                "elliptic parameter m must satisfy 0 <= m < 1, got {m}"
            )));
        }
        Ok(Self(m))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 - m`.
    pub fn complement(self) -> f64 {
        1.0 - self.0
    }
}

/// Arithmetic-geometric mean of two positive numbers.
pub fn agm(a0: f64, b0: f64) -> Result<f64> {
    if !(a0 > 0.0 && b0 > 0.0 && a0.is_finite() && b0.is_finite()) {
        return Err(WaveError::domain(format!(
            "agm needs finite positive inputs, got ({a0}, {b0})"
        )));
    }
    let (mut a, mut b) = (a0, b0);
    for _ in 0..MAX_AGM_ITER {
        if (a - b).abs() <= AGM_TOL * a {
            break;
        }
        let next_a = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next_a;
    }
    Ok(0.5 * (a + b))
}

/// Complete elliptic integral of the first kind, `K(m) = π / (2 agm(1, sqrt(1-m)))`.
pub fn complete_k(m: EllipticParameter) -> f64 {
    // agm(1, b) with 0 < b <= 1 cannot fail.
    PI / (2.0 * agm(1.0, m.complement().sqrt()).expect("positive agm inputs"))
}

/// Carlson's symmetric integral `R_F(x, y, z)` by duplication.
fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    let (mut x, mut y, mut z) = (x, y, z);
    loop {
        let mean = (x + y + z) / 3.0;
        let dx = 1.0 - x / mean;
        let dy = 1.0 - y / mean;
        let dz = 1.0 - z / mean;
        if dx.abs().max(dy.abs()).max(dz.abs()) < 1e-4 {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0)
                / mean.sqrt();
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * sy + sy * sz + sz * sx;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
    }
}

/// Incomplete elliptic integral of the first kind
/// `F(φ | m) = ∫₀^φ dθ / sqrt(1 - m sin²θ)`, valid for every real `φ`.
pub fn incomplete_f(phi: f64, m: EllipticParameter) -> f64 {
    let periods = (phi / PI).round();
    let reduced = phi - periods * PI;
    let (s, c) = reduced.sin_cos();
    let base = s * carlson_rf(c * c, 1.0 - m.value() * s * s, 1.0);
    if periods == 0.0 {
        base
    } else {
        base + 2.0 * periods * complete_k(m)
    }
}

/// `(sn, cn, dn)` at one argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// Jacobi amplitude `am(u | m)` for `|u| <= K(m)` by the descending
/// Landen (AGM phase) recursion.
fn amplitude(u: f64, m: f64) -> f64 {
    let mut a = [0.0f64; MAX_AGM_ITER + 1];
    let mut c = [0.0f64; MAX_AGM_ITER + 1];
    a[0] = 1.0;
    let mut b = (1.0 - m).sqrt();
    c[0] = m.sqrt();
    let mut n = 0;
    while c[n].abs() > f64::EPSILON * a[n] && n < MAX_AGM_ITER {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = c[n] * c[n] / (4.0 * a[n + 1]);
        b = (a[n] * b).sqrt();
        n += 1;
    }
    let mut phi = 2f64.powi(n as i32) * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    phi
}

/// Jacobi elliptic functions `sn`, `cn`, `dn` at argument `u`, parameter `m`.
///
/// The argument is first reduced modulo `4K(m)` and folded into
/// `[0, K(m)]` using the quarter-period symmetries.
pub fn jacobi_sn_cn_dn(u: f64, m: EllipticParameter) -> JacobiTriple {
    let mv = m.value();
    if mv < DEGENERATE_EPS {
        let (sn, cn) = u.sin_cos();
        return JacobiTriple { sn, cn, dn: 1.0 };
    }
    let quarter = complete_k(m);
    let period = 4.0 * quarter;
    let mut r = u - period * (u / period).round();
    // r in [-2K, 2K]; sn is odd, cn and dn even.
    let sign_sn = if r < 0.0 { -1.0 } else { 1.0 };
    r = r.abs();
    // r in (K, 2K]: sn(r) = sn(2K - r), cn(r) = -cn(2K - r).
    let sign_cn = if r > quarter {
        r = 2.0 * quarter - r;
        -1.0
    } else {
        1.0
    };
    let (sn, cn) = if m.complement() < DEGENERATE_EPS {
        (r.tanh(), 1.0 / r.cosh())
    } else {
        amplitude(r, mv).sin_cos()
    };
    let dn = (1.0 - mv * sn * sn).max(0.0).sqrt();
    JacobiTriple {
        sn: sign_sn * sn,
        cn: sign_cn * cn,
        dn,
    }
}
