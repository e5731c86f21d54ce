use std::f64::consts::PI;

use super::gamma::{gamma, sin_pi};
use super::{NumericsError, SeriesControl};

/// ζ(3/2) = g_{3/2}(1).
pub const ZETA_3_2: f64 = 2.612_375_348_685_488;

/// ζ(1/2), needed by the expansion around unit fugacity.
const ZETA_1_2: f64 = -1.460_354_508_809_586_8;

/// Riemann zeta for real s > 1 by direct summation plus an Euler-Maclaurin
/// tail. Accurate to a few ulp for s >= 1.1.
pub fn riemann_zeta(s: f64) -> Result<f64, NumericsError> {
    if s <= 1.0 {
        return Err(NumericsError::Domain {
            function: "riemann_zeta",
            x: s,
            domain: "s > 1",
        });
    }
    const N: usize = 64;
    let mut head = 0.0;
    for j in (1..N).rev() {
        head += (j as f64).powf(-s);
    }
    let n = N as f64;
    // Σ_{j>=N} j^{-s} = N^{1-s}/(s-1) + N^{-s}/2 + Σ_k B_{2k}/(2k)! s(s+1)..(s+2k-2) N^{-s-2k+1}
    let bernoulli_over_fact = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1_209_600.0,
        1.0 / 47_900_160.0,
    ];
    let mut tail = n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    let mut rising = s;
    let mut npow = n.powf(-s - 1.0);
    for (k, c) in bernoulli_over_fact.iter().enumerate() {
        tail += c * rising * npow;
        let kk = 2 * k + 1;
        rising *= (s + kk as f64) * (s + kk as f64 + 1.0);
        npow /= n * n;
    }
    Ok(head + tail)
}

/// ζ(3/2 - k) for k >= 0 via the functional equation where needed.
fn zeta_half_integer(k: usize) -> Result<f64, NumericsError> {
    match k {
        0 => Ok(ZETA_3_2),
        1 => Ok(ZETA_1_2),
        _ => {
            // ζ(1-s) = 2 (2π)^{-s} cos(πs/2) Γ(s) ζ(s), s = k - 1/2
            let s = k as f64 - 0.5;
            let cos_half = sin_pi(0.5 * s + 0.5);
            Ok(2.0 * (2.0 * PI).powf(-s) * cos_half * gamma(s)? * riemann_zeta(s)?)
        }
    }
}

/// Bose function g_{3/2}(η) = Σ_{j>=1} η^j / j^{3/2} on 0 <= η <= 1.
///
/// Direct summation for η <= 0.75. Closer to one the direct series needs
/// O(1/(1-η)) terms, so the expansion in α = -ln η,
/// g = Γ(-1/2) √α + Σ_k ζ(3/2-k) (-α)^k / k!, is used instead. At η = 1 the
/// value is ζ(3/2) from the Euler-Maclaurin certified sum.
pub fn polylog_3_2(eta: f64, ctrl: SeriesControl) -> Result<f64, NumericsError> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(NumericsError::Domain {
            function: "polylog_3_2",
            x: eta,
            domain: "[0, 1]",
        });
    }
    if eta == 0.0 {
        return Ok(0.0);
    }
    if eta == 1.0 {
        return riemann_zeta(1.5);
    }
    if eta <= 0.75 {
        return polylog_direct(eta, ctrl);
    }
    polylog_near_one(-eta.ln(), ctrl)
}

/// g_{3/2}(e^{-α}) for α >= 0; avoids forming η when it is within a few
/// ulp of one.
pub(crate) fn polylog_3_2_of_log(alpha: f64, ctrl: SeriesControl) -> Result<f64, NumericsError> {
    if alpha < 0.0 || alpha.is_nan() {
        return Err(NumericsError::Domain {
            function: "polylog_3_2",
            x: (-alpha).exp(),
            domain: "[0, 1]",
        });
    }
    if alpha == 0.0 {
        return riemann_zeta(1.5);
    }
    if alpha < 0.75f64.ln().abs() {
        polylog_near_one(alpha, ctrl)
    } else {
        polylog_direct((-alpha).exp(), ctrl)
    }
}

fn polylog_direct(eta: f64, ctrl: SeriesControl) -> Result<f64, NumericsError> {
    let mut power = 1.0;
    let mut sum = 0.0;
    for j in 1..=ctrl.max_terms {
        power *= eta;
        let term = power / (j as f64).powf(1.5);
        sum += term;
        if term <= ctrl.rel_tol * sum {
            return Ok(sum);
        }
    }
    Err(NumericsError::SeriesNotConverged {
        function: "polylog_3_2",
        terms: ctrl.max_terms,
        last_term: power,
    })
}

fn polylog_near_one(alpha: f64, ctrl: SeriesControl) -> Result<f64, NumericsError> {
    // Γ(-1/2) = -2√π
    let mut sum = -2.0 * (PI * alpha).sqrt();
    let mut factor = 1.0; // (-α)^k / k!
    for k in 0..ctrl.max_terms.min(60) {
        if k > 0 {
            factor *= -alpha / k as f64;
        }
        let term = zeta_half_integer(k)? * factor;
        sum += term;
        if k > 2 && term.abs() <= ctrl.rel_tol * sum.abs() {
            return Ok(sum);
        }
    }
    // radius of convergence is 2π; α < 0.29 gives geometric decay well before 60 terms
    Ok(sum)
}
