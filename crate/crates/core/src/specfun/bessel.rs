use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::roots::{find_root_bracketed_with, RootControl};
use super::NumericsError;

const SERIES_LIMIT: f64 = 8.0;
const ASYMPTOTIC_LIMIT: f64 = 25.0;

fn j0_series(x: f64) -> f64 {
    let y = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= y / (kf * kf);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && kf * kf > y.abs() {
            break;
        }
    }
    sum
}

/// Miller's backward recurrence normalised by J0 + 2 Σ J_{2k} = 1.
fn j0_miller(x: f64) -> f64 {
    let start = 2 * ((x as usize + 40) / 2);
    let mut j_next = 0.0; // J_{n+1}
    let mut j_curr = 1e-30; // J_n
    let mut j0 = 0.0;
    let mut norm = 0.0;
    for n in (1..=start).rev() {
        let j_prev = 2.0 * n as f64 / x * j_curr - j_next;
        j_next = j_curr;
        j_curr = j_prev;
        let idx = n - 1;
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * j_curr;
        }
        if idx == 0 {
            j0 = j_curr;
        }
        if j_curr.abs() > 1e250 {
            j_curr *= 1e-250;
            j_next *= 1e-250;
            norm *= 1e-250;
            j0 *= 1e-250;
        }
    }
    j0 / (norm + j0)
}

fn j0_asymptotic(x: f64) -> f64 {
    // Hankel expansion, mu = 4 nu^2 = 0.
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut prev_abs = f64::INFINITY;
    for m in 0..200usize {
        if m > 0 {
            let odd = (2 * m - 1) as f64;
            a *= -odd * odd / (m as f64 * 8.0 * x);
        }
        if a.abs() > prev_abs || a.abs() < 1e-18 {
            break;
        }
        prev_abs = a.abs();
        match m % 4 {
            0 => p += a,
            1 => q += a,
            2 => p -= a,
            _ => q -= a,
        }
    }
    let (s, c) = x.sin_cos();
    // cos(x - π/4), sin(x - π/4) without forming x - π/4
    let cos_chi = (c + s) * FRAC_1_SQRT_2;
    let sin_chi = (s - c) * FRAC_1_SQRT_2;
    (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        1.0
    } else if x <= SERIES_LIMIT {
        j0_series(x)
    } else if x < ASYMPTOTIC_LIMIT {
        j0_miller(x)
    } else {
        j0_asymptotic(x)
    }
}

/// The k-th positive zero of J0 (k >= 1), refined from McMahon's expansion.
pub fn bessel_j0_zero(k: usize) -> Result<f64, NumericsError> {
    if k == 0 {
        return Err(NumericsError::Domain {
            function: "bessel_j0_zero",
            x: 0.0,
            domain: "k >= 1",
        });
    }
    let beta = (k as f64 - 0.25) * PI;
    let b2 = beta * beta;
    let guess = beta + 1.0 / (8.0 * beta) - 31.0 / (384.0 * beta * b2)
        + 3779.0 / (15360.0 * beta * b2 * b2);
    let mut half = 0.05;
    loop {
        let (lo, hi) = (guess - half, guess + half);
        if bessel_j0(lo) * bessel_j0(hi) < 0.0 {
            let ctrl = RootControl {
                abs_tol: 4.0 * f64::EPSILON * guess,
                max_iterations: 200,
            };
            return find_root_bracketed_with(bessel_j0, lo, hi, ctrl);
        }
        half *= 2.0;
        if half > 1.0 {
            return Err(NumericsError::NoSignChange {
                lo,
                hi,
                f_lo: bessel_j0(lo),
                f_hi: bessel_j0(hi),
            });
        }
    }
}
