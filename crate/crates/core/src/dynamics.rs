//! Relaxation of the tube's mode occupations in the atomic bath,
//! ṗ_l = -γ_l(β_c) p_l, with β_c(t) read back from the occupations.

use crate::beam::ModeTable;
use crate::rates::{thermalization_rate, RateInputs};
use crate::specfun::{find_root_bracketed_with, RootControl};
use crate::{Error, Result};

/// Relative distance to T_a below which a trajectory counts as converged.
pub const CONVERGED_REL: f64 = 1e-3;

/// How β_c is inferred from a (possibly non-thermal) occupation vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Closure {
    /// From p₀ alone.
    #[default]
    GroundMode,
    /// Thermal distribution with the same total energy Σ ħω_l p_l.
    EnergyWeighted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepControl {
    /// Embedded 5(4) pair with per-component relative error control.
    Adaptive { rel_tol: f64, initial_step: f64, min_step: f64 },
    /// Fixed step with the fifth-order solution.
    Fixed { step: f64 },
}

impl StepControl {
    pub fn adaptive(rel_tol: f64) -> Self {
        StepControl::Adaptive {
            rel_tol,
            initial_step: 0.0,
            min_step: 0.0,
        }
    }
}

impl Default for StepControl {
    fn default() -> Self {
        Self::adaptive(1e-8)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub closure: Closure,
    pub step: StepControl,
    /// Number of uniformly spaced output times, both ends included.
    pub samples: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            closure: Closure::GroundMode,
            step: StepControl::default(),
            samples: 101,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoolingTrajectory {
    /// [s]
    pub times: Vec<f64>,
    /// p_l(t), unpolarized; `occupations[k][l]` at `times[k]`.
    pub occupations: Vec<Vec<f64>>,
    /// Effective tube temperature [K].
    pub t_eff: Vec<f64>,
    /// T_a [K].
    pub t_bath: f64,
    /// |T_eff(t_end) - T_a| / T_a < 1e-3.
    pub converged: bool,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Share of the initial energy flow Σ ħω_l γ_l p_l carried by l >= 3.
    pub high_mode_flow_share: f64,
}

fn check_occupations(modes: &ModeTable, p: &[f64]) -> Result<()> {
    if p.is_empty() || p.len() > modes.modes.len() {
        return Err(Error::InvalidInput {
            what: "occupations",
            detail: format!("{} entries for {} modes", p.len(), modes.modes.len()),
        });
    }
    Ok(())
}

/// p_l = 2/(e^{β_c ħω_l} - 1), both polarizations; zero at T_c = 0.
pub fn thermal_occupations(modes: &ModeTable, t_c: f64) -> Result<Vec<f64>> {
    if !(t_c >= 0.0 && t_c.is_finite()) {
        return Err(Error::InvalidInput {
            what: "T_c",
            detail: format!("must be non-negative, got {t_c}"),
        });
    }
    if t_c == 0.0 {
        return Ok(vec![0.0; modes.modes.len()]);
    }
    let c = modes.spec.constants;
    let beta = 1.0 / (c.k_b * t_c);
    Ok(modes
        .modes
        .iter()
        .map(|m| 2.0 / (beta * c.hbar * m.omega).exp_m1())
        .collect())
}

/// β_c from 2/(e^{β_c ħω₀} - 1) = p₀; infinite for p₀ <= 0.
pub fn effective_beta(modes: &ModeTable, p: &[f64]) -> Result<f64> {
    check_occupations(modes, p)?;
    if !(p[0] > 0.0) {
        return Ok(f64::INFINITY);
    }
    let hw = modes.spec.constants.hbar * modes.modes[0].omega;
    Ok((2.0 / p[0]).ln_1p() / hw)
}

/// β_c of the thermal state with the same Σ ħω_l p_l over the given modes.
pub fn effective_beta_energy(modes: &ModeTable, p: &[f64]) -> Result<f64> {
    check_occupations(modes, p)?;
    let hbar = modes.spec.constants.hbar;
    let omegas: Vec<f64> = modes.modes[..p.len()].iter().map(|m| m.omega).collect();
    let energy: f64 = omegas.iter().zip(p).map(|(w, pl)| hbar * w * pl.max(0.0)).sum();
    if !(energy > 0.0) {
        return Ok(f64::INFINITY);
    }
    // ln of the thermal energy at β = e^s, minus the target
    let target = energy.ln();
    let gap = |s: f64| {
        let beta = s.exp();
        let thermal: f64 = omegas
            .iter()
            .map(|w| 2.0 * hbar * w / (beta * hbar * w).exp_m1())
            .sum();
        thermal.ln() - target
    };
    let guess = effective_beta(modes, p)?;
    let centre = if guess.is_finite() { guess.ln() } else { (1.0 / (hbar * omegas[0])).ln() };
    let mut lo = centre - 1.0;
    let mut hi = centre + 1.0;
    for _ in 0..200 {
        if gap(lo) > 0.0 {
            break;
        }
        lo -= 2.0;
    }
    for _ in 0..200 {
        if gap(hi) < 0.0 {
            break;
        }
        hi += 2.0;
    }
    let ctrl = RootControl {
        abs_tol: 1e-14,
        max_iterations: 300,
    };
    Ok(find_root_bracketed_with(gap, lo, hi, ctrl)?.exp())
}

fn closure_beta(inputs: &RateInputs, closure: Closure, p: &[f64]) -> Result<f64> {
    match closure {
        Closure::GroundMode => effective_beta(&inputs.modes, p),
        Closure::EnergyWeighted => effective_beta_energy(&inputs.modes, p),
    }
}

fn temperature_of(inputs: &RateInputs, beta: f64) -> f64 {
    if beta.is_infinite() {
        0.0
    } else {
        1.0 / (inputs.gas.spec.constants.k_b * beta)
    }
}

fn rhs(inputs: &RateInputs, closure: Closure, t: f64, p: &[f64], out: &mut [f64]) -> Result<()> {
    let beta_c = closure_beta(inputs, closure, p)?;
    for (l, (o, pl)) in out.iter_mut().zip(p).enumerate() {
        let g = thermalization_rate(inputs, l, beta_c)?;
        *o = -g * pl;
        if !o.is_finite() {
            return Err(Error::Integration {
                t,
                detail: format!("rate of mode {l} overflowed (γ = {g:e}, β_c = {beta_c:e})"),
            });
        }
    }
    Ok(())
}

// Dormand-Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B_LOW: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand-Prince step; returns the fifth-order state and the
/// difference to the embedded fourth-order one.
fn dp_step(
    inputs: &RateInputs,
    closure: Closure,
    t: f64,
    y: &[f64],
    h: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = y.len();
    let mut k = vec![vec![0.0; n]; 7];
    let mut stage = vec![0.0; n];
    for s in 0..7 {
        for i in 0..n {
            stage[i] = y[i] + h * (0..s).map(|r| A[s][r] * k[r][i]).sum::<f64>();
        }
        rhs(inputs, closure, t + C[s] * h, &stage, &mut k[s])?;
    }
    let mut y5 = vec![0.0; n];
    let mut err = vec![0.0; n];
    for i in 0..n {
        y5[i] = y[i] + h * (0..7).map(|s| B[s] * k[s][i]).sum::<f64>();
        err[i] = h * (0..7).map(|s| (B[s] - B_LOW[s]) * k[s][i]).sum::<f64>();
    }
    Ok((y5, err))
}

fn error_norm(y: &[f64], y_new: &[f64], err: &[f64], rel_tol: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..y.len() {
        let scale = rel_tol * y[i].abs().max(y_new[i].abs());
        if scale > 0.0 {
            worst = worst.max(err[i].abs() / scale);
        } else if err[i] != 0.0 {
            return f64::INFINITY;
        }
    }
    worst
}

/// Integrate the occupations of modes 0..=l_max of `inputs` from a thermal
/// state at `t_c0` to `t_end`.
pub fn evolve(inputs: &RateInputs, t_c0: f64, t_end: f64, opts: EvolveOptions) -> Result<CoolingTrajectory> {
    if !(t_c0 > 0.0 && t_c0.is_finite()) {
        return Err(Error::InvalidInput {
            what: "T_c0",
            detail: format!("must be positive, got {t_c0}"),
        });
    }
    if !(t_end > 0.0 && t_end.is_finite()) || opts.samples < 2 {
        return Err(Error::InvalidInput {
            what: "time grid",
            detail: format!("t_end = {t_end}, samples = {}", opts.samples),
        });
    }
    let p0 = thermal_occupations(&inputs.modes, t_c0)?;
    evolve_from(inputs, p0, t_end, opts)
}

/// As `evolve`, from an arbitrary occupation vector.
pub fn evolve_from(inputs: &RateInputs, p0: Vec<f64>, t_end: f64, opts: EvolveOptions) -> Result<CoolingTrajectory> {
    check_occupations(&inputs.modes, &p0)?;
    if p0.iter().any(|&p| !(p >= 0.0 && p.is_finite())) || !(p0[0] > 0.0) {
        return Err(Error::InvalidInput {
            what: "occupations",
            detail: "occupations must be non-negative with p₀ > 0".into(),
        });
    }
    let t_bath = inputs.gas.spec.temperature;
    let n = p0.len();
    let hbar = inputs.gas.spec.constants.hbar;
    let mut flow = vec![0.0; n];
    rhs(inputs, opts.closure, 0.0, &p0, &mut flow)?;
    let flows: Vec<f64> = flow
        .iter()
        .zip(&inputs.modes.modes)
        .map(|(f, m)| (hbar * m.omega * f).abs())
        .collect();
    let total_flow: f64 = flows.iter().sum();
    let high_mode_flow_share = if total_flow > 0.0 {
        flows.iter().skip(3).sum::<f64>() / total_flow
    } else {
        0.0
    };

    let times: Vec<f64> = (0..opts.samples)
        .map(|k| t_end * k as f64 / (opts.samples - 1) as f64)
        .collect();
    let mut occupations = Vec::with_capacity(opts.samples);
    let mut t_eff = Vec::with_capacity(opts.samples);
    let record = |p: &[f64], occ: &mut Vec<Vec<f64>>, te: &mut Vec<f64>| -> Result<()> {
        occ.push(p.to_vec());
        te.push(temperature_of(inputs, closure_beta(inputs, opts.closure, p)?));
        Ok(())
    };
    record(&p0, &mut occupations, &mut t_eff)?;

    let mut y = p0;
    let mut t = 0.0;
    let mut accepted = 0;
    let mut rejected = 0;
    let mut h = match opts.step {
        StepControl::Adaptive { initial_step, .. } if initial_step > 0.0 => initial_step,
        StepControl::Adaptive { .. } => {
            // first guess from the fastest relative rate
            let fastest = flow
                .iter()
                .zip(&y)
                .map(|(f, p)| (f / p).abs())
                .fold(0.0, f64::max);
            if fastest > 0.0 {
                1e-3 / fastest
            } else {
                t_end
            }
        }
        StepControl::Fixed { step } => step,
    };
    if !(h > 0.0) {
        return Err(Error::InvalidInput {
            what: "step",
            detail: format!("must be positive, got {h}"),
        });
    }
    for &target in &times[1..] {
        while t < target {
            let last = target - t <= h * (1.0 + 1e-12);
            let step = if last { target - t } else { h };
            let (y_new, err) = dp_step(inputs, opts.closure, t, &y, step)?;
            match opts.step {
                StepControl::Fixed { .. } => {}
                StepControl::Adaptive { rel_tol, min_step, .. } => {
                    let e = error_norm(&y, &y_new, &err, rel_tol);
                    let factor = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
                    if e > 1.0 {
                        rejected += 1;
                        h = step * factor;
                        if h <= min_step.max(f64::EPSILON * t.max(target)) {
                            return Err(Error::Integration {
                                t,
                                detail: format!("step size underflow (h = {h:e} s)"),
                            });
                        }
                        continue;
                    }
                    if !last {
                        h = step * factor;
                    } else {
                        h = h.max(step * factor.min(1.0));
                    }
                }
            }
            if let Some(l) = y_new.iter().position(|&p| p < 0.0) {
                return Err(Error::Integration {
                    t: t + step,
                    detail: format!("occupation of mode {l} went negative ({:e})", y_new[l]),
                });
            }
            accepted += 1;
            y = y_new;
            t = if last { target } else { t + step };
        }
        record(&y, &mut occupations, &mut t_eff)?;
    }
    let last_t = *t_eff.last().expect("at least two samples");
    Ok(CoolingTrajectory {
        converged: ((last_t - t_bath) / t_bath).abs() < CONVERGED_REL,
        times,
        occupations,
        t_eff,
        t_bath,
        accepted_steps: accepted,
        rejected_steps: rejected,
        high_mode_flow_share,
    })
}

/// 1/γ₀ for an infinitely hot tube: the e-folding time of the ground mode
/// far from equilibrium [s].
pub fn relaxation_time(inputs: &RateInputs) -> Result<f64> {
    Ok(1.0 / thermalization_rate(inputs, 0, 0.0)?)
}
