//! Phonon excitation and relaxation rates of the tube in the atomic bath.
//!
//! Rates deep in the Boltzmann tail fall far below the smallest f64, so
//! every formula is assembled as a logarithm first. `RateResult::value`
//! is the exponentiated number and may be zero; `ln_value` never is
//! unless the potential amplitude vanishes at the peak.

use std::f64::consts::PI;
use std::fmt;

use crate::beam::ModeTable;
use crate::gas::GasState;
use crate::potential::{v_fourier_qbar, PotentialSpec};
use crate::specfun::{integrate_adaptive_with, QuadControl};
use crate::{Error, Result};

/// Hard cap on thermal series terms.
pub const J_CAP: usize = 200;
/// Series truncation: stop once a term drops below this fraction of the sum.
pub const SERIES_REL_TOL: f64 = 1e-10;

/// Upper end of the q̄ window used by `occupation_vs_time`.
const QBAR_WINDOW: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FugacityMode {
    /// η from g_{3/2}(η) = nλ³.
    #[default]
    Exact,
    /// η ≈ nλ³.
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Series,
    Fgr,
    Simplified,
    C5,
    Quadrature,
    Multimode,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::Fgr => "fgr",
            Method::Simplified => "simplified",
            Method::C5 => "c5",
            Method::Quadrature => "quadrature",
            Method::Multimode => "multimode",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult {
    /// Γ [1/s].
    pub value: f64,
    /// ln(Γ · 1 s).
    pub ln_value: f64,
    pub method: Method,
    pub j_terms_used: usize,
    pub mode: usize,
}

impl RateResult {
    fn from_ln(ln_value: f64, method: Method, j_terms_used: usize, mode: usize) -> Self {
        Self {
            value: ln_value.exp(),
            ln_value,
            method,
            j_terms_used,
            mode,
        }
    }

    pub fn log10(&self) -> f64 {
        self.ln_value / std::f64::consts::LN_10
    }
}

/// Everything a rate formula needs, with the mode prefactors
/// A_l = 8π m I_l² L/(ħ³ λ⁵) and ϰ = 4√π R/λ precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct RateInputs {
    pub modes: ModeTable,
    pub potential: PotentialSpec,
    pub gas: GasState,
    pub varkappa: f64,
    /// ln A_l for every tabulated mode.
    pub ln_prefactors: Vec<f64>,
    pub fugacity: FugacityMode,
    /// V(q̄₁^{(l)}) [J m²].
    v_peak: Vec<f64>,
}

impl RateInputs {
    pub fn new(modes: ModeTable, potential: PotentialSpec, gas: GasState) -> Result<Self> {
        Self::with_fugacity(modes, potential, gas, FugacityMode::Exact)
    }

    pub fn with_fugacity(
        modes: ModeTable,
        potential: PotentialSpec,
        gas: GasState,
        fugacity: FugacityMode,
    ) -> Result<Self> {
        gas.require_above_critical()?;
        potential.validate()?;
        let hbar = gas.spec.constants.hbar;
        let lambda = gas.lambda_db;
        let varkappa = 4.0 * PI.sqrt() * potential.radius / lambda;
        let ln_base = (8.0 * PI * gas.spec.mass * modes.spec.length).ln() - 3.0 * hbar.ln() - 5.0 * lambda.ln();
        let ln_prefactors = modes
            .modes
            .iter()
            .map(|m| ln_base + 2.0 * m.overlap_i.abs().ln())
            .collect();
        let mut inputs = Self {
            modes,
            potential,
            gas,
            varkappa,
            ln_prefactors,
            fugacity,
            v_peak: Vec::new(),
        };
        inputs.v_peak = (0..inputs.modes.modes.len())
            .map(|l| {
                let q = inputs.peak_qbar(1, l)?;
                v_fourier_qbar(&inputs.potential, q)
            })
            .collect::<Result<_>>()?;
        Ok(inputs)
    }

    /// ln η under the selected fugacity mode.
    pub fn ln_eta(&self) -> f64 {
        match self.fugacity {
            FugacityMode::Exact => self.gas.ln_eta,
            FugacityMode::Classical => self.gas.phase_space_density().ln(),
        }
    }

    pub fn beta(&self) -> f64 {
        self.gas.beta
    }

    fn hbar(&self) -> f64 {
        self.gas.spec.constants.hbar
    }

    /// ħω_l β_a.
    pub fn reduced_energy(&self, l: usize) -> Result<f64> {
        Ok(self.hbar() * self.modes.mode(l)?.omega * self.gas.beta)
    }

    /// A_l [1/s per (J m²)²].
    pub fn prefactor(&self, l: usize) -> Result<f64> {
        self.modes.mode(l)?;
        Ok(self.ln_prefactors[l].exp())
    }

    /// V(q̄₁^{(l)}) [J m²], cached at construction.
    pub fn v_at_peak(&self, l: usize) -> Result<f64> {
        self.modes.mode(l)?;
        Ok(self.v_peak[l])
    }

    fn peak_qbar(&self, j: usize, l: usize) -> Result<f64> {
        check_j(j)?;
        let x = self.reduced_energy(l)?;
        Ok(peak_formula(self.varkappa, x, j as f64))
    }
}

fn check_j(j: usize) -> Result<()> {
    if j == 0 {
        return Err(Error::InvalidInput {
            what: "series index j",
            detail: "j starts at 1".into(),
        });
    }
    Ok(())
}

fn peak_formula(k: f64, x: f64, j: f64) -> f64 {
    let h = 0.5 * j * x;
    k / (2.0 * j).sqrt() * (1.0 + (1.0 + h * h).sqrt()).sqrt()
}

/// δ_j e^{jx} = (4q̄²/√πϰ³) exp[-j(u - x/4u)²] with u = q̄/ϰ.
fn weight_scaled(k: f64, x: f64, j: f64, qbar: f64) -> f64 {
    if qbar <= 0.0 {
        return 0.0;
    }
    let u = qbar / k;
    let d = u - x / (4.0 * u);
    4.0 * qbar * qbar / (PI.sqrt() * k.powi(3)) * (-j * d * d).exp()
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Peaked spectral weight δ_j^{(l)}(q̄) = (4q̄²/√πϰ³) exp[-j(q̄/ϰ + ϰħω_lβ/4q̄)²].
pub fn peaked_weight(inputs: &RateInputs, j: usize, l: usize, qbar: f64) -> Result<f64> {
    check_j(j)?;
    if !(qbar >= 0.0) {
        return Err(Error::InvalidInput {
            what: "qbar",
            detail: format!("must be non-negative, got {qbar}"),
        });
    }
    if qbar == 0.0 {
        return Ok(0.0);
    }
    let x = inputs.reduced_energy(l)?;
    let k = inputs.varkappa;
    let arg = qbar / k + k * x / (4.0 * qbar);
    Ok(4.0 * qbar * qbar / (PI.sqrt() * k.powi(3)) * (-(j as f64) * arg * arg).exp())
}

/// q̄_j^{(l)} = (ϰ/√2j) {1 + [1 + (jħω_lβ/2)²]^{1/2}}^{1/2}.
pub fn peak_location(inputs: &RateInputs, j: usize, l: usize) -> Result<f64> {
    inputs.peak_qbar(j, l)
}

fn ln_series_term(inputs: &RateInputs, j: usize) -> Result<f64> {
    let jf = j as f64;
    let x = inputs.reduced_energy(0)?;
    let v = if j == 1 {
        inputs.v_peak[0]
    } else {
        v_fourier_qbar(&inputs.potential, inputs.peak_qbar(j, 0)?)?
    };
    Ok(inputs.ln_prefactors[0] + jf * (inputs.ln_eta() - x) - 2.5 * jf.ln() + (0.5 * jf * x).ln_1p()
        + 2.0 * v.abs().ln())
}

/// Γ₀ᵛ = A₀ Σ_j e^{jβ(μ-ħω₀)} j^{-5/2} (1 + jħω₀β/2) |V(q̄_j)|².
pub fn rate_series(inputs: &RateInputs, j_max: usize, rel_tol: f64) -> Result<RateResult> {
    check_j(j_max)?;
    let j_max = j_max.min(J_CAP);
    let mut ln_sum = f64::NEG_INFINITY;
    let mut used = 0;
    for j in 1..=j_max {
        let term = ln_series_term(inputs, j)?;
        ln_sum = log_add(ln_sum, term);
        used = j;
        if term < rel_tol.ln() + ln_sum {
            break;
        }
    }
    Ok(RateResult::from_ln(ln_sum, Method::Series, used, 0))
}

fn ground_factors(inputs: &RateInputs) -> Result<(f64, f64, f64)> {
    let mode = inputs.modes.mode(0)?;
    Ok((mode.overlap_i, mode.omega, inputs.v_peak[0]))
}

/// Golden-rule rate (8π m I₀² L/ħ³λ⁵) e^{β(μ-ħω₀)} (1 + ħω₀β/2) |V(q̄₁)|².
pub fn rate_fgr(inputs: &RateInputs) -> Result<RateResult> {
    let (i0, omega0, v) = ground_factors(inputs)?;
    let g = &inputs.gas;
    let hbar = inputs.hbar();
    let lambda = g.lambda_db;
    let pref = 8.0 * PI * g.spec.mass * i0 * i0 * inputs.modes.spec.length / (hbar.powi(3) * lambda.powi(5));
    let beta_mu = match inputs.fugacity {
        FugacityMode::Exact => g.beta * g.mu,
        FugacityMode::Classical => (g.spec.density * lambda.powi(3)).ln(),
    };
    let x = g.beta * hbar * omega0;
    let ln = pref.ln() + beta_mu - x + (0.5 * x).ln_1p() + 2.0 * v.abs().ln();
    Ok(RateResult::from_ln(ln, Method::Fgr, 1, 0))
}

/// Classical-gas rate (4m²I₀²L/ħ⁵)(k_BT + ħω₀/2) n e^{-ħω₀/k_BT} |V(q̄₁)|².
pub fn rate_simplified(inputs: &RateInputs) -> Result<RateResult> {
    let (i0, omega0, v) = ground_factors(inputs)?;
    let ln = ln_classical_common(inputs, i0, omega0)? + 4f64.ln() + 2.0 * v.abs().ln();
    Ok(RateResult::from_ln(ln, Method::Simplified, 1, 0))
}

/// Same as `rate_simplified` with V₅ ≈ 1/3:
/// (16π²m²I₀²L/9ħ⁵)(k_BT + ħω₀/2) n e^{-ħω₀/k_BT} C₅²/R⁶.
pub fn rate_c5(inputs: &RateInputs) -> Result<RateResult> {
    let c5 = inputs.potential.single_c5().ok_or_else(|| Error::InvalidInput {
        what: "potential",
        detail: "the C5 closed form needs a single n = 5 term".into(),
    })?;
    let (i0, omega0, _) = ground_factors(inputs)?;
    let ln = ln_classical_common(inputs, i0, omega0)? + (16.0 * PI * PI / 9.0).ln() + 2.0 * c5.abs().ln()
        - 6.0 * inputs.potential.radius.ln();
    Ok(RateResult::from_ln(ln, Method::C5, 1, 0))
}

/// ln[m²I₀²L(k_BT + ħω₀/2) n e^{-ħω₀/k_BT}/ħ⁵].
fn ln_classical_common(inputs: &RateInputs, i0: f64, omega0: f64) -> Result<f64> {
    let s = &inputs.gas.spec;
    let hbar = s.constants.hbar;
    let kt = s.constants.k_b * s.temperature;
    if !(kt > 0.0) {
        return Err(Error::InvalidInput {
            what: "temperature",
            detail: "classical rates need T_a > 0".into(),
        });
    }
    Ok(2.0 * s.mass.ln() + 2.0 * i0.abs().ln() + inputs.modes.spec.length.ln() + (kt + 0.5 * hbar * omega0).ln()
        + s.density.ln()
        - hbar * omega0 / kt
        - 5.0 * hbar.ln())
}

/// Break points around the peak of δ_j on [0, upper].
fn peak_pieces(k: f64, centre: f64, j: f64, upper: f64) -> Vec<f64> {
    let w = 0.5 * k / j.sqrt();
    let lo = (centre - 12.0 * w).max(0.0);
    let hi = (centre + 12.0 * w).min(upper);
    let mut points = vec![0.0];
    if lo > 0.0 {
        points.push(lo);
    }
    for i in 1..=8 {
        points.push(lo + (hi - lo) * i as f64 / 8.0);
    }
    if hi < upper {
        points.push(upper);
    }
    points
}

fn integrate_pieces<F>(mut f: F, points: &[f64], ctrl: QuadControl) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut total = 0.0;
    for w in points.windows(2) {
        total += integrate_adaptive_with(&mut f, w[0], w[1], ctrl)?.value;
    }
    Ok(total)
}

/// A₀ Σ_j (η^j/j) ∫₀^{20 q̄_j} |V(q̄)|² δ_j(q̄) dq̄, before the mean-value step.
pub fn rate_quadrature_oracle(inputs: &RateInputs, j_max: usize) -> Result<RateResult> {
    let spec = inputs.potential.clone();
    rate_quadrature_oracle_with(inputs, j_max, |q| Ok(v_fourier_qbar(&spec, q)?.powi(2)))
}

/// `rate_quadrature_oracle` with a caller-supplied |V(q̄)|².
pub fn rate_quadrature_oracle_with<V>(inputs: &RateInputs, j_max: usize, v2: V) -> Result<RateResult>
where
    V: Fn(f64) -> Result<f64>,
{
    check_j(j_max)?;
    let j_max = j_max.min(J_CAP);
    let x = inputs.reduced_energy(0)?;
    let k = inputs.varkappa;
    let ctrl = QuadControl {
        rel_tol: 1e-11,
        abs_tol: 0.0,
        max_subdivisions: 2000,
    };
    let mut ln_sum = f64::NEG_INFINITY;
    let mut used = 0;
    for j in 1..=j_max {
        let jf = j as f64;
        let centre = inputs.peak_qbar(j, 0)?;
        let points = peak_pieces(k, centre, jf, 20.0 * centre);
        let mut failure = None;
        let integral = integrate_pieces(
            |q| match v2(q) {
                Ok(v) => v * weight_scaled(k, x, jf, q),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            &points,
            ctrl,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        let term = inputs.ln_prefactors[0] + jf * (inputs.ln_eta() - x) - jf.ln() + integral.ln();
        ln_sum = log_add(ln_sum, term);
        used = j;
        if term < SERIES_REL_TOL.ln() + ln_sum {
            break;
        }
    }
    Ok(RateResult::from_ln(ln_sum, Method::Quadrature, used, 0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultimodeRate {
    pub total: RateResult,
    /// ln of each mode's contribution, l = 0..=l_max.
    pub ln_terms: Vec<f64>,
    /// Fraction of the total carried by l = 0.
    pub ground_share: f64,
}

/// Γᵛ = Σ_l A_l e^{β(μ-ħω_l)} (1 + βħω_l/2) |V(q̄₁^{(l)})|².
pub fn vacuum_rate_multimode(inputs: &RateInputs, l_max: usize) -> Result<MultimodeRate> {
    inputs.modes.mode(l_max)?;
    let ln_eta = inputs.ln_eta();
    let mut ln_terms = Vec::with_capacity(l_max + 1);
    let mut ln_sum = f64::NEG_INFINITY;
    for l in 0..=l_max {
        let x = inputs.reduced_energy(l)?;
        let t = inputs.ln_prefactors[l] + ln_eta - x + (0.5 * x).ln_1p() + 2.0 * inputs.v_peak[l].abs().ln();
        ln_sum = log_add(ln_sum, t);
        ln_terms.push(t);
    }
    Ok(MultimodeRate {
        total: RateResult::from_ln(ln_sum, Method::Multimode, 1, l_max),
        ground_share: (ln_terms[0] - ln_sum).exp(),
        ln_terms,
    })
}

/// Signed relaxation coefficient
/// γ_l = A_l η (1 - e^{(β_c-β_a)ħω_l}) (1 + β_aħω_l/2) |V(q̄₁^{(l)})|² [1/s].
/// Positive when the tube is hotter than the gas.
pub fn thermalization_rate(inputs: &RateInputs, l: usize, beta_c: f64) -> Result<f64> {
    if !(beta_c >= 0.0) {
        return Err(Error::InvalidInput {
            what: "beta_c",
            detail: format!("must be non-negative, got {beta_c}"),
        });
    }
    let x = inputs.reduced_energy(l)?;
    let scale = (inputs.ln_prefactors[l] + inputs.ln_eta() + (0.5 * x).ln_1p() + 2.0 * inputs.v_peak[l].abs().ln())
        .exp();
    let omega = inputs.modes.modes[l].omega;
    let gap = (beta_c - inputs.gas.beta) * inputs.hbar() * omega;
    Ok(-scale * gap.exp_m1())
}

/// Centre ω₀ + ω_q and squared width σ² = 4ω_q/(jβħ) of the Gaussian
/// exp[-(ω₀ + ω_q - Δ)²/σ²].
fn spectral_gaussian(inputs: &RateInputs, j: usize, q: f64) -> Result<(f64, f64)> {
    check_j(j)?;
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidInput {
            what: "wave number q",
            detail: format!("must be positive, got {q}"),
        });
    }
    let hbar = inputs.hbar();
    let omega_q = hbar * q * q / (2.0 * inputs.gas.spec.mass);
    let centre = inputs.modes.mode(0)?.omega + omega_q;
    Ok((centre, 4.0 * omega_q / (j as f64 * inputs.gas.beta * hbar)))
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput {
            what: "time",
            detail: format!("must be positive, got {t}"),
        });
    }
    Ok(())
}

/// sin²(Δt/2)/Δ².
fn sinc2(d: f64, t: f64) -> f64 {
    let h = 0.5 * d * t;
    if h.abs() < 1e-4 {
        0.25 * t * t * (1.0 - h * h / 3.0)
    } else {
        let s = h.sin() / d;
        s * s
    }
}

/// ∫ sin²(Δt/2)/Δ² g(Δ) dΔ over [-D, D], D the first sinc node past
/// `d_max`, one lobe at a time. Returns the integral and D.
fn sinc_window<G>(t: f64, d_max: f64, g: G) -> Result<(f64, f64)>
where
    G: Fn(f64) -> f64,
{
    let period = 2.0 * PI / t;
    let n = (d_max / period).ceil() as i64;
    let ctrl = QuadControl {
        rel_tol: 1e-11,
        abs_tol: 1e10 * f64::MIN_POSITIVE,
        max_subdivisions: 200,
    };
    let mut total = 0.0;
    for k in -n..n {
        let lo = k as f64 * period;
        total += integrate_adaptive_with(|d| sinc2(d, t) * g(d), lo, lo + period, ctrl)?.value;
    }
    Ok((total, n as f64 * period))
}

/// F_j(q, t) = ∫ dΔ sin²(Δt/2)/Δ² exp[-jβħ(ω₀ + ω_q - Δ)²/(4ω_q)] [s],
/// integrated over Δ ∈ [-Δ_max, Δ_max] with
/// Δ_max = (ω₀ + ω_q) + 10σ + 50·2π/t.
pub fn fj_convolution(inputs: &RateInputs, j: usize, q: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    let (centre, width2) = spectral_gaussian(inputs, j, q)?;
    let d_max = centre + 10.0 * width2.sqrt() + 50.0 * 2.0 * PI / t;
    let (value, _) = sinc_window(t, d_max, |d| (-(centre - d).powi(2) / width2).exp())?;
    Ok(value)
}

/// Long-time limit tπ/2 · exp[-jβħ(ω₀ + ω_q)²/(4ω_q)] [s].
pub fn fj_golden_rule(inputs: &RateInputs, j: usize, q: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    let (centre, width2) = spectral_gaussian(inputs, j, q)?;
    Ok(0.5 * PI * t * (-centre * centre / width2).exp())
}

/// F_j(q, t) through its time-domain form
/// (√π σ/2) ∫₀^t (t - s) cos(cs) e^{-σ²s²/4} ds, with c = ω₀ + ω_q.
/// Once the Gaussian has died out F_j is exactly linear in t, and the
/// slope ∫₀^∞ cos(cs) e^{-σ²s²/4} ds = (√π/σ) e^{-c²/σ²} is used in closed
/// form; by quadrature it would be lost to cancellation when c ≫ σ.
pub fn fj_time_domain(inputs: &RateInputs, j: usize, q: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    let (centre, width2) = spectral_gaussian(inputs, j, q)?;
    let sigma = width2.sqrt();
    let a = 0.25 * width2;
    let cut = (90.0 / a).sqrt();
    let upper = t.min(cut);
    // absolute floors scaled by ∫|integrand| over the half line
    let ctrl1 = QuadControl {
        rel_tol: 1e-10,
        abs_tol: 1e-16 * (PI / a).sqrt(),
        max_subdivisions: 4000,
    };
    let ctrl2 = QuadControl {
        abs_tol: 1e-16 / a,
        ..ctrl1
    };
    // a few cosine periods per panel at most
    let period = 2.0 * PI / centre;
    let pieces = ((upper / (4.0 * period)).ceil() as usize).clamp(1, 4000);
    let h = upper / pieces as f64;
    let mut c1 = 0.0;
    let mut c2 = 0.0;
    for i in 0..pieces {
        let lo = i as f64 * h;
        if t < cut {
            c1 += integrate_adaptive_with(|s| (centre * s).cos() * (-a * s * s).exp(), lo, lo + h, ctrl1)?.value;
        }
        c2 += integrate_adaptive_with(|s| s * (centre * s).cos() * (-a * s * s).exp(), lo, lo + h, ctrl2)?.value;
    }
    if t >= cut {
        c1 = PI.sqrt() / sigma * (-width2.recip() * centre * centre).exp();
    }
    Ok(0.5 * PI.sqrt() * sigma * (t * c1 - c2))
}

/// Vacuum-to-excited probability
/// p₀ᵛ(t) = (m²I₀²L/2π³ħ⁵βR³) Σ_j (η^j/j) ∫ dq̄ q̄² |V(q̄)|² F_j(q̄/R, t)
/// over q̄ ∈ (0, 30]. F_j is taken from the time-domain form.
pub fn occupation_vs_time(inputs: &RateInputs, t: f64, j_max: usize) -> Result<f64> {
    check_j(j_max)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    check_time(t)?;
    let s = &inputs.gas.spec;
    let hbar = s.constants.hbar;
    let r = inputs.potential.radius;
    let i0 = inputs.modes.mode(0)?.overlap_i;
    let pref = s.mass * s.mass * i0 * i0 * inputs.modes.spec.length
        / (2.0 * PI.powi(3) * hbar.powi(5) * inputs.gas.beta * r.powi(3));
    let k = inputs.varkappa;
    let mut total = 0.0;
    for j in 1..=j_max.min(J_CAP) {
        let jf = j as f64;
        let centre = inputs.peak_qbar(j, 0)?;
        let points = peak_pieces(k, centre, jf, QBAR_WINDOW.max(20.0 * centre));
        let mut failure = None;
        let mut integrand = |qbar: f64| {
            if qbar == 0.0 {
                return 0.0;
            }
            let eval = || -> Result<f64> {
                let v = v_fourier_qbar(&inputs.potential, qbar)?;
                Ok(qbar * qbar * v * v * fj_time_domain(inputs, j, qbar / r, t)?)
            };
            eval().unwrap_or_else(|e| {
                failure.get_or_insert(e);
                0.0
            })
        };
        // absolute floor from the integrand scale on the break points, so
        // pieces far below the bulk do not chase noise
        let scale = points
            .windows(2)
            .map(|w| integrand(0.5 * (w[0] + w[1])).abs() * (w[1] - w[0]))
            .fold(0.0, f64::max);
        let ctrl = QuadControl {
            rel_tol: 1e-9,
            abs_tol: 1e-13 * scale,
            max_subdivisions: 2000,
        };
        let integral = integrate_pieces(&mut integrand, &points, ctrl)?;
        if let Some(e) = failure {
            return Err(e);
        }
        let term = (jf * inputs.ln_eta()).exp() / jf * integral;
        total += term;
        if term.abs() < SERIES_REL_TOL * total.abs() {
            break;
        }
    }
    Ok(pref * total)
}
