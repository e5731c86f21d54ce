use std::f64::consts::PI;

use super::NumericsError;

/// `ln |Γ(x)|` together with the sign of `Γ(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LnGamma {
    pub ln_abs: f64,
    pub sign: f64,
}

// Lanczos approximation, g = 7, nine coefficients.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// sin(πx) with argument reduction done before multiplying by π.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    let (r, sign) = if r < 0.0 { (-r, -1.0) } else { (r, 1.0) };
    let r = if r > 0.5 { 1.0 - r } else { r };
    sign * (PI * r).sin()
}

fn ln_gamma_positive(x: f64) -> f64 {
    // x >= 0.5
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    let z = x - 1.0;
    let mut sum = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + sum.ln()
}

/// Natural logarithm of `|Γ(x)|` and the sign of `Γ(x)`.
///
/// Uses the reflection formula below one half. Non-positive integers are
/// poles and return an error.
pub fn ln_gamma(x: f64) -> Result<LnGamma, NumericsError> {
    if x.is_nan() {
        return Err(NumericsError::Domain {
            function: "ln_gamma",
            x,
            domain: "finite real",
        });
    }
    if x <= 0.0 && x == x.floor() {
        return Err(NumericsError::Pole {
            function: "ln_gamma",
            x,
        });
    }
    if x >= 0.5 {
        return Ok(LnGamma {
            ln_abs: ln_gamma_positive(x),
            sign: 1.0,
        });
    }
    let s = sin_pi(x);
    let rest = ln_gamma_positive(1.0 - x);
    Ok(LnGamma {
        ln_abs: (PI / s.abs()).ln() - rest,
        sign: s.signum(),
    })
}

/// Γ(x) for real x away from the poles. Overflows to ±∞ past x ≈ 171.6.
pub fn gamma(x: f64) -> Result<f64, NumericsError> {
    let lg = ln_gamma(x)?;
    Ok(lg.sign * lg.ln_abs.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Stirling series after shifting the argument past 20 with the
    /// recurrence; independent of the Lanczos path.
    fn ln_gamma_stirling(x: f64) -> f64 {
        assert!(x > 0.0);
        let mut shift = 0.0;
        let mut y = x;
        while y < 20.0 {
            shift += y.ln();
            y += 1.0;
        }
        // Bernoulli terms B_{2k}/(2k(2k-1) y^{2k-1})
        let b = [
            1.0 / 12.0,
            -1.0 / 360.0,
            1.0 / 1260.0,
            -1.0 / 1680.0,
            1.0 / 1188.0,
            -691.0 / 360360.0,
            1.0 / 156.0,
        ];
        let mut series = 0.0;
        let mut ypow = y;
        for c in b {
            series += c / ypow;
            ypow *= y * y;
        }
        (y - 0.5) * y.ln() - y + 0.5 * (2.0 * PI).ln() + series - shift
    }

    #[test]
    fn trivial_values() {
        let one = ln_gamma(1.0).unwrap();
        assert_eq!(one.ln_abs, 0.0);
        assert_eq!(one.sign, 1.0);
        let half = ln_gamma(0.5).unwrap();
        assert!((half.ln_abs - PI.sqrt().ln()).abs() < 1e-15);
    }

    #[test]
    fn negative_half_integer_against_recurrence() {
        // Γ(-2.5) = Γ(0.5) / ((-2.5)(-1.5)(-0.5))
        let expected = PI.sqrt() / (-2.5f64 * -1.5 * -0.5);
        let lg = ln_gamma(-2.5).unwrap();
        assert_eq!(lg.sign, -1.0);
        assert!((lg.ln_abs - expected.abs().ln()).abs() < 1e-14);
        assert!((gamma(-2.5).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn poles_are_errors() {
        for x in [0.0, -1.0, -7.0, -50.0] {
            assert!(matches!(ln_gamma(x), Err(NumericsError::Pole { .. })));
        }
    }

    #[test]
    fn matches_stirling_oracle_on_range() {
        let mut x = -49.93;
        while x < 50.0 {
            let lg = ln_gamma(x).unwrap();
            let oracle = if x > 0.0 {
                ln_gamma_stirling(x)
            } else {
                (PI / sin_pi(x).abs()).ln() - ln_gamma_stirling(1.0 - x)
            };
            let scale = oracle.abs().max(1.0);
            assert!(
                (lg.ln_abs - oracle).abs() <= 1e-12 * scale,
                "x = {x}: {} vs {oracle}",
                lg.ln_abs
            );
            x += 0.173;
        }
    }

    #[test]
    fn sign_alternates_between_poles() {
        assert_eq!(ln_gamma(-0.5).unwrap().sign, -1.0);
        assert_eq!(ln_gamma(-1.5).unwrap().sign, 1.0);
        assert_eq!(ln_gamma(-2.5).unwrap().sign, -1.0);
        assert_eq!(ln_gamma(-3.5).unwrap().sign, 1.0);
    }
}
