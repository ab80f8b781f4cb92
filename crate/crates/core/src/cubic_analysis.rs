//! Cubic truncation of the vertical equation of motion and its reduction
//! to Legendre normal form.
//!
//! Replacing `e^{2Z}` by its Taylor polynomial through `Z³` in
//! `(dZ/dt)² = k²A²e^{2Z} - (kcZ - β)²` gives `(dZ/dt)² = P(Z)` with
//!
//! ```text
//! P(Z) = (4/3)k²A² Z³ + k²(2A² - c²) Z² + 2k(kA² + βc) Z + (k²A² - β²)
//! ```
//!
//! When `P` has three distinct real roots `Z1 < Z2 < Z3` the motion is
//! bounded in `[Z1, Z2]` (Case 1). With a single real root `Z0` the motion
//! escapes to `+∞` in finite time (Case 2).

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WaveError};
use crate::special_functions::EllipticParameter;
use crate::wave_field::WaveParams;

const POLISH_REL_TOL: f64 = 1e-14;
const DEGENERATE_REL: f64 = 1e-12;
const ROOT_RESIDUAL_REL: f64 = 1e-10;

/// `P(Z) = a3 Z³ + a2 Z² + a1 Z + a0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicCoeffs {
    pub a3: f64,
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
}

impl CubicCoeffs {
    pub fn eval(&self, z: f64) -> f64 {
        ((self.a3 * z + self.a2) * z + self.a1) * z + self.a0
    }

    pub fn derivative(&self, z: f64) -> f64 {
        (3.0 * self.a3 * z + 2.0 * self.a2) * z + self.a1
    }

    /// Largest coefficient magnitude.
    pub fn scale(&self) -> f64 {
        self.a3
            .abs()
            .max(self.a2.abs())
            .max(self.a1.abs())
            .max(self.a0.abs())
    }

    /// `|a3 z³| + |a2 z²| + |a1 z| + |a0|`, the magnitude that sets the
    /// rounding error of [`CubicCoeffs::eval`].
    pub fn term_magnitude(&self, z: f64) -> f64 {
        let az = z.abs();
        ((self.a3.abs() * az + self.a2.abs()) * az + self.a1.abs()) * az + self.a0.abs()
    }

    /// Residual bound for a stored root: `1e-10` times the coefficient scale,
    /// raised to the rounding floor `8 eps · term_magnitude` for roots so
    /// large that no `f64` meets the fixed bound.
    pub fn root_residual_bound(&self, z: f64) -> f64 {
        (ROOT_RESIDUAL_REL * self.scale()).max(8.0 * f64::EPSILON * self.term_magnitude(z))
    }

    pub fn discriminant(&self) -> f64 {
        let (a, b, c, d) = (self.a3, self.a2, self.a1, self.a0);
        18.0 * a * b * c * d - 4.0 * b.powi(3) * d + b * b * c * c
            - 4.0 * a * c.powi(3)
            - 27.0 * a * a * d * d
    }

    /// Coefficients of `lead · (Z - r1)(Z - r2)(Z - r3)`.
    pub fn from_roots(lead: f64, roots: [f64; 3]) -> Self {
        let [r1, r2, r3] = roots;
        Self {
            a3: lead,
            a2: -lead * (r1 + r2 + r3),
            a1: lead * (r1 * r2 + r1 * r3 + r2 * r3),
            a0: -lead * r1 * r2 * r3,
        }
    }

    /// Coefficients of `lead · (Z - z0)(Z² + pZ + q)`.
    pub fn from_real_root_and_quadratic(lead: f64, z0: f64, p: f64, q: f64) -> Self {
        Self {
            a3: lead,
            a2: lead * (p - z0),
            a1: lead * (q - p * z0),
            a0: -lead * q * z0,
        }
    }
}

/// Truncated cubic for the given wave and integration constant `β`.
pub fn build_cubic(params: &WaveParams, beta: f64) -> CubicCoeffs {
    let k = params.k();
    let c = params.c();
    let amp = params.amplitude_a();
    let ka2 = k * k * amp * amp;
    CubicCoeffs {
        a3: 4.0 * ka2 / 3.0,
        a2: k * k * (2.0 * amp * amp - c * c),
        a1: 2.0 * k * (k * amp * amp + beta * c),
        a0: ka2 - beta * beta,
    }
}

/// Three distinct real roots, motion confined to `[z1, z2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Case1Reduction {
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
    /// `(z2 - z1) / (z3 - z1)`.
    pub k1sq: EllipticParameter,
    /// Time-scale factor `sqrt(a3 (z3 - z1)) / 2`, stored positive.
    pub c1: f64,
    pub coeffs: CubicCoeffs,
}

/// One real root `z0`; `P(Z) = a3 (Z - z0)(Z² + pZ + q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Case2Reduction {
    pub z0: f64,
    pub p: f64,
    pub q: f64,
    /// `(1 - (z0 + p/2) / sqrt(z0² + p z0 + q)) / 2`.
    pub k2sq: EllipticParameter,
    /// Time-scale factor `sqrt(a3) (z0² + p z0 + q)^{1/4}`, stored positive.
    pub c2: f64,
    pub coeffs: CubicCoeffs,
}

impl Case2Reduction {
    /// `sqrt(z0² + p z0 + q)`.
    pub fn radius(&self) -> f64 {
        (self.z0 * self.z0 + self.p * self.z0 + self.q).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case")]
pub enum CubicReduction {
    Case1(Case1Reduction),
    Case2(Case2Reduction),
}

impl CubicReduction {
    pub fn coeffs(&self) -> &CubicCoeffs {
        match self {
            CubicReduction::Case1(r) => &r.coeffs,
            CubicReduction::Case2(r) => &r.coeffs,
        }
    }
}

/// Newton iterations from `z`, stopping when the step falls below the
/// relative tolerance or stops reducing the residual.
fn polish(coeffs: &CubicCoeffs, mut z: f64) -> f64 {
    let mut residual = coeffs.eval(z).abs();
    for _ in 0..100 {
        let slope = coeffs.derivative(z);
        if slope == 0.0 || residual == 0.0 {
            break;
        }
        let next = z - coeffs.eval(z) / slope;
        let next_residual = coeffs.eval(next).abs();
        if next_residual > residual {
            break;
        }
        let step = (next - z).abs();
        z = next;
        residual = next_residual;
        if step <= POLISH_REL_TOL * z.abs().max(1.0) {
            break;
        }
    }
    z
}

fn check_root(coeffs: &CubicCoeffs, z: f64) -> Result<()> {
    let bound = coeffs.root_residual_bound(z);
    let value = coeffs.eval(z);
    if value.abs() > bound {
        return Err(WaveError::contract(format!(
            "root {z} leaves residual {value:e} above {bound:e}"
        )));
    }
    Ok(())
}

/// Classifies the roots of `P` and builds the matching Legendre reduction.
pub fn classify_roots(coeffs: &CubicCoeffs) -> Result<CubicReduction> {
    if coeffs.a3 == 0.0 || !coeffs.a3.is_finite() {
        return Err(WaveError::domain("leading coefficient must be nonzero"));
    }
    let disc = coeffs.discriminant();
    if disc.abs() <= DEGENERATE_REL * coeffs.scale().powi(4) {
        return Err(WaveError::DegenerateRoots { discriminant: disc });
    }

    // Depressed cubic y³ + p y + q with Z = y - b/3.
    let b = coeffs.a2 / coeffs.a3;
    let c = coeffs.a1 / coeffs.a3;
    let d = coeffs.a0 / coeffs.a3;
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b.powi(3) / 27.0 - b * c / 3.0 + d;

    if disc > 0.0 {
        // Trigonometric form; disc > 0 forces p < 0.
        let radius = 2.0 * (-p / 3.0).sqrt();
        let arg = ((3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let mut roots = [0.0, 1.0, 2.0]
            .map(|j| polish(coeffs, radius * (theta - TAU * j / 3.0).cos() - shift));
        roots.sort_by(|a, b| a.total_cmp(b));
        for &z in &roots {
            check_root(coeffs, z)?;
        }
        reduce_case1(roots, coeffs).map(CubicReduction::Case1)
    } else {
        let sqrt_d = (q * q / 4.0 + p.powi(3) / 27.0).sqrt();
        let u = (-q / 2.0 - q.signum() * sqrt_d).cbrt();
        let y = if u == 0.0 { 0.0 } else { u - p / (3.0 * u) };
        let z0 = polish(coeffs, y - shift);
        check_root(coeffs, z0)?;
        // Deflate P / (a3 (Z - z0)) = Z² + pZ + q.
        let pq = b + z0;
        let qq = if z0.abs() > 1.0 {
            -d / z0
        } else {
            c + pq * z0
        };
        reduce_case2(z0, pq, qq, coeffs).map(CubicReduction::Case2)
    }
}

/// Legendre data for three real roots `z1 < z2 < z3`.
pub fn reduce_case1(roots: [f64; 3], coeffs: &CubicCoeffs) -> Result<Case1Reduction> {
    let [z1, z2, z3] = roots;
    if !(z1 < z2 && z2 < z3) {
        let disc = coeffs.a3.powi(4)
            * ((z1 - z2) * (z1 - z3) * (z2 - z3)).powi(2);
        return Err(WaveError::DegenerateRoots { discriminant: disc });
    }
    let k1sq = EllipticParameter::new((z2 - z1) / (z3 - z1))?;
    let c1 = 0.5 * (coeffs.a3.abs() * (z3 - z1)).sqrt();
    Ok(Case1Reduction {
        z1,
        z2,
        z3,
        k1sq,
        c1,
        coeffs: *coeffs,
    })
}

/// Legendre data for one real root `z0` and quadratic factor `Z² + pZ + q`.
pub fn reduce_case2(z0: f64, p: f64, q: f64, coeffs: &CubicCoeffs) -> Result<Case2Reduction> {
    if p * p - 4.0 * q >= 0.0 {
        return Err(WaveError::contract(format!(
            "quadratic factor Z² + {p}Z + {q} has real roots"
        )));
    }
    let radius = (z0 * z0 + p * z0 + q).sqrt();
    let k2sq = EllipticParameter::new(0.5 * (1.0 - (z0 + 0.5 * p) / radius))?;
    let c2 = coeffs.a3.abs().sqrt() * radius.sqrt();
    Ok(Case2Reduction {
        z0,
        p,
        q,
        k2sq,
        c2,
        coeffs: *coeffs,
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::wave_field::Direction;

    fn reference(k: f64) -> WaveParams {
        WaveParams::new(k, 0.1, 9.8, Direction::Right).unwrap()
    }

    /// Roots by bisection on the sign changes of a fine scan.
    fn bisection_roots(coeffs: &CubicCoeffs, lo: f64, hi: f64, n: usize) -> Vec<f64> {
        let h = (hi - lo) / n as f64;
        let mut roots = Vec::new();
        for i in 0..n {
            let (mut a, mut b) = (lo + i as f64 * h, lo + (i + 1) as f64 * h);
            let (fa, fb) = (coeffs.eval(a), coeffs.eval(b));
            if fa == 0.0 {
                roots.push(a);
                continue;
            }
            if fa * fb >= 0.0 {
                continue;
            }
            let sa = fa.signum();
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if coeffs.eval(mid).signum() == sa {
                    a = mid;
                } else {
                    b = mid;
                }
                if b - a < 1e-13 {
                    break;
                }
            }
            roots.push(0.5 * (a + b));
        }
        roots
    }

    #[test]
    fn builds_reference_coefficients() {
        let p = build_cubic(&reference(1.0), 1.0);
        // c = 3.1305, A = 0.31305 substituted by hand.
        assert!((p.a3 - 0.130_667).abs() < 1e-5);
        assert!((p.a2 + 9.604).abs() < 1e-3);
        assert!((p.a1 - 6.457).abs() < 1e-3);
        assert!((p.a0 + 0.902).abs() < 1e-3);
        assert!(p.a3 > 0.0);

        let p = build_cubic(&reference(4.0), 1.0);
        assert!((p.a3 - 8.362_67).abs() < 1e-4);
        assert!((p.a2 + 26.656).abs() < 1e-3);
        assert!((p.a1 - 25.066).abs() < 1e-3);
        assert!((p.a0 - 5.272).abs() < 1e-3);
    }

    #[test]
    fn zero_is_a_root_when_beta_equals_ka() {
        let w = reference(2.0);
        let p = build_cubic(&w, w.k() * w.amplitude_a());
        assert!(p.a0.abs() < 1e-15);
        assert!(p.eval(0.0).abs() < 1e-15);
    }

    #[test]
    fn reference_cases_classify() {
        assert!(matches!(
            classify_roots(&build_cubic(&reference(1.0), 1.0)).unwrap(),
            CubicReduction::Case1(_)
        ));
        assert!(matches!(
            classify_roots(&build_cubic(&reference(2.0), -1.0)).unwrap(),
            CubicReduction::Case1(_)
        ));
        assert!(matches!(
            classify_roots(&build_cubic(&reference(4.0), 1.0)).unwrap(),
            CubicReduction::Case2(_)
        ));
    }

    #[test]
    fn k1_roots_match_bisection() {
        let coeffs = build_cubic(&reference(1.0), 1.0);
        let oracle = bisection_roots(&coeffs, -100.0, 100.0, 20_000);
        assert_eq!(oracle.len(), 3);
        let CubicReduction::Case1(red) = classify_roots(&coeffs).unwrap() else {
            panic!("expected three real roots");
        };
        for (got, want) in [red.z1, red.z2, red.z3].iter().zip(&oracle) {
            assert!((got - want).abs() < 1e-11 * want.abs().max(1.0), "{got} vs {want}");
        }
        // Frozen from the bisection oracle.
        assert!((red.z1 - 0.197_632_15).abs() < 1e-8);
        assert!((red.z2 - 0.479_642_00).abs() < 1e-8);
        assert!((red.z3 - 72.822_725_85).abs() < 1e-7);

        let k1sq = (oracle[1] - oracle[0]) / (oracle[2] - oracle[0]);
        let c1 = 0.5 * (coeffs.a3 * (oracle[2] - oracle[0])).sqrt();
        assert!((red.k1sq.value() - k1sq).abs() < 1e-12);
        assert!((red.c1 - c1).abs() < 1e-11);
        assert!((red.k1sq.value() - 0.003_883_09).abs() < 1e-8);
        assert!((red.c1 - 1.540_266_1).abs() < 1e-6);
        // C1 = k|A| sqrt(Z3 - Z1) / sqrt(3).
        let w = reference(1.0);
        let alt = w.k() * w.amplitude_a().abs() * (red.z3 - red.z1).sqrt() / 3f64.sqrt();
        assert!((red.c1 - alt).abs() < 1e-12);
    }

    #[test]
    fn k4_factorisation() {
        let coeffs = build_cubic(&reference(4.0), 1.0);
        let oracle = bisection_roots(&coeffs, -100.0, 100.0, 20_000);
        assert_eq!(oracle.len(), 1);
        let CubicReduction::Case2(red) = classify_roots(&coeffs).unwrap() else {
            panic!("expected one real root");
        };
        assert!((red.z0 - oracle[0]).abs() < 1e-12);
        assert!(red.p * red.p - 4.0 * red.q < 0.0);
        let m = red.k2sq.value();
        assert!(m > 0.0 && m < 1.0);
        let rebuilt = CubicCoeffs::from_real_root_and_quadratic(coeffs.a3, red.z0, red.p, red.q);
        for (x, y) in [
            (rebuilt.a2, coeffs.a2),
            (rebuilt.a1, coeffs.a1),
            (rebuilt.a0, coeffs.a0),
        ] {
            assert!((x - y).abs() <= 1e-10 * coeffs.scale());
        }
        let w = reference(4.0);
        let alt = 2.0 / 3f64.sqrt() * w.k() * w.amplitude_a() * red.radius().sqrt();
        assert!((red.c2 - alt).abs() < 1e-12);
    }

    #[test]
    fn case1_reduction_examples() {
        let coeffs = CubicCoeffs::from_roots(1.0, [0.0, 1.0, 2.0]);
        let red = reduce_case1([0.0, 1.0, 2.0], &coeffs).unwrap();
        assert_eq!(red.k1sq.value(), 0.5);
        let red = reduce_case1([0.0, 1e-9, 2.0], &coeffs).unwrap();
        assert!(red.k1sq.value() < 1e-9);
        assert!(matches!(
            reduce_case1([0.0, 0.0, 2.0], &coeffs),
            Err(WaveError::DegenerateRoots { .. })
        ));
        assert!(reduce_case1([1.0, 0.0, 2.0], &coeffs).is_err());
    }

    #[test]
    fn case2_reduction_examples() {
        let w = reference(1.0);
        let lead = build_cubic(&w, 1.0).a3;
        let coeffs = CubicCoeffs::from_real_root_and_quadratic(lead, 0.0, 0.0, 1.0);
        let red = reduce_case2(0.0, 0.0, 1.0, &coeffs).unwrap();
        assert_eq!(red.k2sq.value(), 0.5);
        let expected = 2.0 / 3f64.sqrt() * w.k() * w.amplitude_a().abs();
        assert!((red.c2 - expected).abs() < 1e-15);

        let red = reduce_case2(1.5, -3.0, 4.0, &coeffs).unwrap();
        assert_eq!(red.k2sq.value(), 0.5);

        assert!(matches!(
            reduce_case2(0.0, 3.0, 1.0, &coeffs),
            Err(WaveError::ContractViolation(_))
        ));
    }

    #[test]
    fn repeated_roots_are_rejected() {
        let coeffs = CubicCoeffs::from_roots(1.0, [1.0, 1.0, 3.0]);
        assert!(matches!(
            classify_roots(&coeffs),
            Err(WaveError::DegenerateRoots { .. })
        ));
        let coeffs = CubicCoeffs::from_roots(2.0, [-1.0, -1.0, -1.0]);
        assert!(classify_roots(&coeffs).is_err());
        let zero_lead = CubicCoeffs { a3: 0.0, a2: 1.0, a1: 0.0, a0: -1.0 };
        assert!(matches!(classify_roots(&zero_lead), Err(WaveError::Domain(_))));
    }

    #[test]
    fn case1_sign_structure() {
        for (k, beta) in [(1.0, 1.0), (2.0, -1.0)] {
            let coeffs = build_cubic(&reference(k), beta);
            let CubicReduction::Case1(r) = classify_roots(&coeffs).unwrap() else {
                panic!()
            };
            for i in 1..=100 {
                let s = i as f64 / 101.0;
                assert!(coeffs.eval(r.z1 + s * (r.z2 - r.z1)) > 0.0);
                assert!(coeffs.eval(r.z2 + s * (r.z3 - r.z2)) < 0.0);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn reconstruction_reproduces_coefficients(
            k in 0.3f64..5.0,
            a in 0.02f64..0.5,
            beta in -5.0f64..5.0,
            left in any::<bool>(),
        ) {
            let dir = if left { Direction::Left } else { Direction::Right };
            let w = WaveParams::new(k, a, 9.8, dir).unwrap();
            let coeffs = build_cubic(&w, beta);
            prop_assert!(coeffs.a3 > 0.0);
            let red = match classify_roots(&coeffs) {
                Ok(r) => r,
                Err(WaveError::DegenerateRoots { .. }) => return Ok(()),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            };
            let rebuilt = match red {
                CubicReduction::Case1(r) => {
                    let m = r.k1sq.value();
                    prop_assert!(m > 0.0 && m < 1.0 && r.c1 > 0.0);
                    for z in [r.z1, r.z2, r.z3] {
                        prop_assert!(coeffs.eval(z).abs() <= coeffs.root_residual_bound(z));
                    }
                    CubicCoeffs::from_roots(coeffs.a3, [r.z1, r.z2, r.z3])
                }
                CubicReduction::Case2(r) => {
                    let m = r.k2sq.value();
                    prop_assert!(m > 0.0 && m < 1.0 && r.c2 > 0.0);
                    prop_assert!(coeffs.eval(r.z0).abs() <= coeffs.root_residual_bound(r.z0));
                    CubicCoeffs::from_real_root_and_quadratic(coeffs.a3, r.z0, r.p, r.q)
                }
            };
            let s = coeffs.scale();
            prop_assert!((rebuilt.a2 - coeffs.a2).abs() <= 1e-10 * s);
            prop_assert!((rebuilt.a1 - coeffs.a1).abs() <= 1e-10 * s);
            prop_assert!((rebuilt.a0 - coeffs.a0).abs() <= 1e-10 * s);
        }
    }
}
