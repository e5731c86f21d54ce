//! Euler-Bernoulli cantilever: wave numbers, dispersion, normalized mode
//! shapes, overlap integrals and the thermal excursion of the free tip.
//!
//! Mode shapes are written in x = κL and y = κz. Every hyperbolic factor is
//! evaluated with e^{x} divided out, so nothing overflows for large l.

use std::f64::consts::{PI, SQRT_2};

use crate::constants::Constants;
use crate::specfun::{find_root_bracketed_with, integrate_adaptive_with, QuadControl, RootControl};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stiffness {
    /// EI [N m²].
    FlexuralRigidity(f64),
    /// Ground-mode angular frequency ω₀ [rad/s]; EI follows from the dispersion.
    GroundFrequency(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSpec {
    /// Tube radius R [m].
    pub radius: f64,
    /// Tube length L [m].
    pub length: f64,
    /// Linear mass density ρ_c [kg/m].
    pub rho_c: f64,
    pub stiffness: Stiffness,
    pub constants: Constants,
}

impl BeamSpec {
    /// Single-walled tube with R = 1 nm, L = 1 μm, ρ_c = 1e-15 kg/m and
    /// ω₀ = 2π·398 kHz.
    pub fn reference_tube() -> Self {
        Self {
            radius: 1e-9,
            length: 1e-6,
            rho_c: 1e-15,
            stiffness: Stiffness::GroundFrequency(2.0 * PI * 398e3),
            constants: Constants::SI,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let stiff = match self.stiffness {
            Stiffness::FlexuralRigidity(v) | Stiffness::GroundFrequency(v) => v,
        };
        for (what, v) in [
            ("radius", self.radius),
            ("length", self.length),
            ("rho_c", self.rho_c),
            ("stiffness", stiff),
            ("hbar", self.constants.hbar),
            ("k_b", self.constants.k_b),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput {
                    what,
                    detail: format!("must be positive and finite, got {v}"),
                });
            }
        }
        Ok(())
    }
}

/// cos x + 1/cosh x; same roots as cos x cosh x + 1 but bounded.
fn mode_condition(x: f64) -> f64 {
    let e = (-x).exp();
    x.cos() + 2.0 * e / (1.0 + e * e)
}

/// x_l = κ_l L for l = 0..=l_max, the roots of cos x cosh x = -1.
pub fn solve_mode_roots(l_max: usize) -> Result<Vec<f64>> {
    let mut roots = Vec::with_capacity(l_max + 1);
    for l in 0..=l_max {
        let lo = PI * l as f64;
        let hi = PI * (l + 1) as f64;
        let ctrl = RootControl {
            abs_tol: 1e-14 * hi,
            max_iterations: 200,
        };
        roots.push(find_root_bracketed_with(mode_condition, lo, hi, ctrl)?);
    }
    Ok(roots)
}

/// Wave numbers κ_l [1/m], l = 0..=l_max.
pub fn solve_wavenumbers(spec: &BeamSpec, l_max: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    Ok(solve_mode_roots(l_max)?
        .into_iter()
        .map(|x| x / spec.length)
        .collect())
}

/// Flexural rigidity EI [N m²]. A ground frequency is converted with
/// EI = ρ_c ω₀² / κ₀⁴.
pub fn resolve_stiffness(spec: &BeamSpec) -> Result<f64> {
    spec.validate()?;
    match spec.stiffness {
        Stiffness::FlexuralRigidity(ei) => Ok(ei),
        Stiffness::GroundFrequency(omega0) => {
            let kappa0 = solve_wavenumbers(spec, 0)?[0];
            Ok(spec.rho_c * omega0 * omega0 / kappa0.powi(4))
        }
    }
}

/// ω = √(EI/ρ_c) κ².
pub fn dispersion(ei: f64, rho_c: f64, kappa: f64) -> f64 {
    (ei / rho_c).sqrt() * kappa * kappa
}

/// Mode bracket times e^{-x}:
/// [(cos x + cosh x)(cos y - cosh y) + (sin x - sinh x)(sin y - sinh y)] e^{-x}.
pub(crate) fn shape_scaled(x: f64, y: f64) -> f64 {
    let ex = (-x).exp();
    let (sx, cx) = x.sin_cos();
    let (sy, cy) = y.sin_cos();
    let a_hat = ex * cx + 0.5 * (1.0 + ex * ex);
    let b_hat = ex * sx - 0.5 * (1.0 - ex * ex);
    a_hat * cy + b_hat * sy
        - 0.5 * (cx + sx + ex) * (y - x).exp()
        - 0.5 * (ex * (cx - sx) + 1.0) * (-y).exp()
}

/// E(x) e^{-2x}, where E(x) = (1/x) ∫₀^x bracket(y)² dy is the closed form
/// (1 + 2 cos x cosh x + ½[cos 2x + cosh 2x] - (1/2x)[...]).
pub(crate) fn norm_integral_scaled(x: f64) -> f64 {
    let e1 = (-x).exp();
    let e2 = e1 * e1;
    let (sx, cx) = x.sin_cos();
    let s2x = (2.0 * x).sin();
    let c2x = (2.0 * x).cos();
    let bracket = sx * (e1 + e1 * e2)
        + cx * (e1 - e1 * e2)
        + 0.25 * (1.0 + e2) * (1.0 + e2) * s2x
        + 0.5 * cx * cx * (1.0 - e2 * e2);
    e2 + cx * (e1 + e1 * e2) + 0.5 * e2 * c2x + 0.25 * (1.0 + e2 * e2) - bracket / (2.0 * x)
}

/// ã_l = a_l / √E(κ_l L). Underflows to zero only for l in the hundreds;
/// mode evaluation never goes through this value.
pub fn normalization_constant(kappa_l_length: f64, a_l: f64) -> Result<f64> {
    if !(kappa_l_length > 0.0) {
        return Err(Error::InvalidInput {
            what: "kappa_l L",
            detail: format!("must be positive, got {kappa_l_length}"),
        });
    }
    let scaled = norm_integral_scaled(kappa_l_length);
    Ok(a_l * (-kappa_l_length).exp() / scaled.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub l: usize,
    /// κ_l [1/m].
    pub kappa: f64,
    /// ω_l [rad/s].
    pub omega: f64,
    /// a_l = √(ħ/(ω_l ρ_c L)) [m].
    pub osc_length: f64,
    /// ã_l [m].
    pub norm: f64,
    /// I_l = ∫₀^L φ_l dz / (√2 L) [m].
    pub overlap_i: f64,
    /// J_l = a_l²/4 [m²].
    pub overlap_j: f64,
}

/// Solved cantilever modes l = 0..=l_max. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTable {
    pub spec: BeamSpec,
    /// EI [N m²].
    pub ei: f64,
    pub modes: Vec<Mode>,
}

impl ModeTable {
    pub fn new(spec: &BeamSpec, l_max: usize) -> Result<Self> {
        spec.validate()?;
        let ei = resolve_stiffness(spec)?;
        let roots = solve_mode_roots(l_max)?;
        let len = spec.length;
        let mut modes = Vec::with_capacity(roots.len());
        for (l, &x) in roots.iter().enumerate() {
            let kappa = x / len;
            let omega = dispersion(ei, spec.rho_c, kappa);
            let osc_length = (spec.constants.hbar / (omega * spec.rho_c * len)).sqrt();
            let norm = normalization_constant(x, osc_length)?;
            let overlap_i = overlap_quadrature(x, osc_length)?;
            modes.push(Mode {
                l,
                kappa,
                omega,
                osc_length,
                norm,
                overlap_i,
                overlap_j: 0.25 * osc_length * osc_length,
            });
        }
        Ok(Self {
            spec: *spec,
            ei,
            modes,
        })
    }

    pub fn l_max(&self) -> usize {
        self.modes.len() - 1
    }

    pub fn mode(&self, l: usize) -> Result<&Mode> {
        self.modes.get(l).ok_or_else(|| Error::InvalidInput {
            what: "mode index",
            detail: format!("l = {l} exceeds l_max = {}", self.l_max()),
        })
    }

    /// φ_l(z) [m] for 0 <= z <= L.
    pub fn eigenmode(&self, l: usize, z: f64) -> Result<f64> {
        let mode = self.mode(l)?;
        let len = self.spec.length;
        if !(0.0..=len).contains(&z) {
            return Err(Error::InvalidInput {
                what: "z",
                detail: format!("{z} outside [0, {len}]"),
            });
        }
        let x = mode.kappa * len;
        Ok(mode.osc_length * shape_scaled(x, mode.kappa * z) / norm_integral_scaled(x).sqrt())
    }

    /// Root-mean-square excursion of the tip, both polarizations,
    /// u² = Σ_{l<=l_cut} φ_l(L)² (2 n_l + 1).
    pub fn thermal_tip_displacement(&self, t_c: f64, l_cut: usize) -> Result<f64> {
        if !(t_c >= 0.0) {
            return Err(Error::InvalidInput {
                what: "T_c",
                detail: format!("must be non-negative, got {t_c}"),
            });
        }
        if l_cut > self.l_max() {
            return Err(Error::InvalidInput {
                what: "l_cut",
                detail: format!("{l_cut} exceeds l_max = {}", self.l_max()),
            });
        }
        let c = self.spec.constants;
        let mut u2 = 0.0;
        for mode in &self.modes[..=l_cut] {
            let tip = self.eigenmode(mode.l, self.spec.length)?;
            let n_l = if t_c == 0.0 {
                0.0
            } else {
                1.0 / (c.hbar * mode.omega / (c.k_b * t_c)).exp_m1()
            };
            u2 += tip * tip * (2.0 * n_l + 1.0);
        }
        Ok(u2.sqrt())
    }
}

fn overlap_quadrature(x: f64, a_l: f64) -> Result<f64> {
    let scale = norm_integral_scaled(x).sqrt();
    let ctrl = QuadControl {
        rel_tol: 1e-12,
        abs_tol: 1e-15,
        max_subdivisions: 500,
    };
    let r = integrate_adaptive_with(|s| shape_scaled(x, x * s), 0.0, 1.0, ctrl)?;
    Ok(a_l * r.value / (SQRT_2 * scale))
}
