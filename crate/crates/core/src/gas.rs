//! Ideal homogeneous Bose gas in the grand-canonical ensemble.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::constants::{Constants, M_RB87};
use crate::specfun::{find_root_bracketed_with, polylog_3_2_of_log, RootControl, SeriesControl, ZETA_3_2};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasSpec {
    /// Number density n [1/m³].
    pub density: f64,
    /// Temperature T_a [K].
    pub temperature: f64,
    /// Atomic mass m [kg].
    pub mass: f64,
    pub constants: Constants,
}

impl GasSpec {
    /// ⁸⁷Rb at the given density [1/m³] and temperature [K].
    pub fn rubidium(density: f64, temperature: f64) -> Self {
        Self {
            density,
            temperature,
            mass: M_RB87,
            constants: Constants::SI,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (what, v) in [("density", self.density), ("mass", self.mass)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput {
                    what,
                    detail: format!("must be positive and finite, got {v}"),
                });
            }
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::InvalidInput {
                what: "temperature",
                detail: format!("must be non-negative, got {}", self.temperature),
            });
        }
        Ok(())
    }
}

/// Thermal de Broglie wavelength ħ√(2πβ/m) [m].
pub fn lambda_db(temperature: f64, mass: f64, c: Constants) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::InvalidInput {
            what: "temperature",
            detail: format!("λ_dB diverges at T = {temperature}"),
        });
    }
    Ok(c.hbar * (2.0 * PI / (mass * c.k_b * temperature)).sqrt())
}

/// Condensation temperature (2πħ²/(m k_B)) (n/ζ(3/2))^{2/3} [K].
pub fn t_bec(density: f64, mass: f64, c: Constants) -> f64 {
    2.0 * PI * c.hbar * c.hbar / (mass * c.k_b) * (density / ZETA_3_2).powf(2.0 / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasState {
    pub spec: GasSpec,
    /// λ_dB [m].
    pub lambda_db: f64,
    /// T_BEC [K].
    pub t_bec: f64,
    pub eta: f64,
    /// ln η, kept separately since η underflows deep in the classical regime.
    pub ln_eta: f64,
    /// μ [J].
    pub mu: f64,
    pub condensate_fraction: f64,
    /// β_a = 1/(k_B T_a) [1/J].
    pub beta: f64,
}

impl GasState {
    /// Phase-space density n λ³.
    pub fn phase_space_density(&self) -> f64 {
        self.spec.density * self.lambda_db.powi(3)
    }

    pub fn above_critical(&self) -> bool {
        self.eta < 1.0 && self.spec.temperature > self.t_bec
    }

    pub(crate) fn require_above_critical(&self) -> Result<()> {
        if self.above_critical() {
            Ok(())
        } else {
            Err(Error::Regime {
                detail: format!(
                    "T_a = {:e} K is not above T_BEC = {:e} K",
                    self.spec.temperature, self.t_bec
                ),
            })
        }
    }
}

/// Fugacity, chemical potential and condensate fraction at (n, T_a).
///
/// Above T_BEC, g_{3/2}(η) = n λ³ is solved for α = -ln η on the bracket
/// [max(0, -ln nλ³), -ln(nλ³/ζ(3/2))], which follows from η <= g_{3/2}(η) <= ζ(3/2) η.
pub fn solve_fugacity(spec: &GasSpec) -> Result<GasState> {
    spec.validate()?;
    let c = spec.constants;
    let tc = t_bec(spec.density, spec.mass, c);
    if spec.temperature == 0.0 {
        return Ok(GasState {
            spec: *spec,
            lambda_db: f64::INFINITY,
            t_bec: tc,
            eta: 1.0,
            ln_eta: 0.0,
            mu: 0.0,
            condensate_fraction: 1.0,
            beta: f64::INFINITY,
        });
    }
    let lambda = lambda_db(spec.temperature, spec.mass, c)?;
    let beta = 1.0 / (c.k_b * spec.temperature);
    let x = spec.density * lambda.powi(3);
    if spec.temperature <= tc || x >= ZETA_3_2 {
        let fraction = (1.0 - (spec.temperature / tc).powf(1.5)).max(0.0);
        return Ok(GasState {
            spec: *spec,
            lambda_db: lambda,
            t_bec: tc,
            eta: 1.0,
            ln_eta: 0.0,
            mu: 0.0,
            condensate_fraction: fraction,
            beta,
        });
    }
    let series = SeriesControl::default();
    let lo = (-x.ln()).max(0.0);
    let hi = -(x / ZETA_3_2).ln();
    let ctrl = RootControl {
        abs_tol: 1e-16,
        max_iterations: 400,
    };
    let alpha = find_root_bracketed_with(
        |a| polylog_3_2_of_log(a, series).map_or(f64::NAN, |g| g - x),
        lo,
        hi,
        ctrl,
    )?;
    let ln_eta = -alpha;
    Ok(GasState {
        spec: *spec,
        lambda_db: lambda,
        t_bec: tc,
        eta: ln_eta.exp(),
        ln_eta,
        mu: ln_eta / beta,
        condensate_fraction: 0.0,
        beta,
    })
}

/// Bose-Einstein occupation 1/(e^{β(ε-μ)} - 1).
pub fn occupation(state: &GasState, eps: f64) -> Result<f64> {
    let arg = state.beta * eps - state.ln_eta;
    if !(arg > 0.0) {
        return Err(Error::InvalidInput {
            what: "kinetic energy",
            detail: format!("occupation diverges for ε = {eps:e} J <= μ = {:e} J", state.mu),
        });
    }
    Ok(1.0 / arg.exp_m1())
}

/// Boltzmann-regime density correlation
/// g_q(τ) = (ηV/λ³) exp[-iω_q τ (1 - iτ/(ħβ))].
pub fn thermal_correlation(state: &GasState, omega_q: f64, tau: f64, volume: f64) -> Result<Complex64> {
    state.require_above_critical()?;
    let hbar = state.spec.constants.hbar;
    let amp = state.eta * volume / state.lambda_db.powi(3);
    let exponent = Complex64::new(-omega_q * tau * tau / (hbar * state.beta), -omega_q * tau);
    Ok(amp * exponent.exp())
}

/// Σ_k e^{i(ω_{k-q} - ω_k)τ} n_{k-q} (1 + n_k) over the (2·half + 1)³
/// lowest momenta of a periodic box of side `side`, with q = 2π q_idx/side.
/// `bosonic` false keeps only the Boltzmann term η e^{-βε}. Returns the
/// sum, ω_q and the box volume.
pub fn correlation_mode_sum(
    state: &GasState,
    side: f64,
    half: i32,
    q_idx: [i32; 3],
    tau: f64,
    bosonic: bool,
) -> (Complex64, f64, f64) {
    let hbar = state.spec.constants.hbar;
    let m = state.spec.mass;
    let dk = 2.0 * PI / side;
    let (beta, eta) = (state.beta, state.eta);
    let energy = |k: [f64; 3]| hbar * hbar * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) / (2.0 * m);
    let occ = |e: f64| {
        if bosonic {
            1.0 / ((beta * e).exp() / eta - 1.0)
        } else {
            eta * (-beta * e).exp()
        }
    };
    let q = q_idx.map(|i| i as f64 * dk);
    let mut sum = Complex64::new(0.0, 0.0);
    for i in -half..=half {
        for j in -half..=half {
            for k in -half..=half {
                let kv = [i as f64 * dk, j as f64 * dk, k as f64 * dk];
                let kq = [kv[0] - q[0], kv[1] - q[1], kv[2] - q[2]];
                let (ek, ekq) = (energy(kv), energy(kq));
                let weight = occ(ekq) * if bosonic { 1.0 + occ(ek) } else { 1.0 };
                sum += weight * Complex64::new(0.0, (ekq - ek) / hbar * tau).exp();
            }
        }
    }
    (sum, energy(q) / hbar, side.powi(3))
}
