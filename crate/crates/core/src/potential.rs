//! Inverse-power Casimir-Polder potential outside a tube of radius R and
//! its two-dimensional axis-symmetric Fourier transform.

use std::f64::consts::PI;

use crate::specfun::dd::Dd;
use crate::specfun::{
    bessel_j0, bessel_j0_zero, hyp1f2_dd, integrate_adaptive_with, wynn_epsilon, NumericsError, QuadControl,
    SeriesControl,
};
use crate::{Error, Result};

/// V(ρ) = Σ C_n / ρⁿ for ρ > R, zero inside the tube.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    /// Cutoff radius R [m].
    pub radius: f64,
    /// (n, C_n [J mⁿ]) pairs.
    pub terms: Vec<(u32, f64)>,
    /// Evaluate even powers by quadrature; when false they are rejected.
    pub even_by_quadrature: bool,
}

impl PotentialSpec {
    pub fn new(radius: f64, terms: Vec<(u32, f64)>) -> Result<Self> {
        let spec = Self {
            radius,
            terms,
            even_by_quadrature: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Single C₅/ρ⁵ term.
    pub fn c5(radius: f64, c5: f64) -> Result<Self> {
        Self::new(radius, vec![(5, c5)])
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidInput {
                what: "potential radius",
                detail: format!("must be positive, got {}", self.radius),
            });
        }
        if self.terms.is_empty() {
            return Err(Error::InvalidInput {
                what: "potential terms",
                detail: "at least one (n, C_n) term is required".into(),
            });
        }
        for &(n, c) in &self.terms {
            if n < 3 {
                return Err(Error::InvalidInput {
                    what: "potential power",
                    detail: format!("n = {n}; powers must exceed 2"),
                });
            }
            if !c.is_finite() {
                return Err(Error::InvalidInput {
                    what: "potential coefficient",
                    detail: format!("C_{n} = {c}"),
                });
            }
        }
        Ok(())
    }

    /// C₅ when the spec is exactly one n = 5 term.
    pub fn single_c5(&self) -> Option<f64> {
        match self.terms.as_slice() {
            [(5, c)] => Some(*c),
            _ => None,
        }
    }
}

/// V(ρ) [J].
pub fn v_real(spec: &PotentialSpec, rho: f64) -> f64 {
    if rho <= spec.radius {
        return 0.0;
    }
    spec.terms.iter().map(|&(n, c)| c / rho.powi(n as i32)).sum()
}

/// Closed form of ∫₁^∞ J₀(q̄u) u^{1-n} du for odd n:
/// ₁F₂(1-n/2; 1, 2-n/2; -q̄²/4)/(n-2) - nΓ(-n/2)/(2ⁿΓ(n/2)) q̄^{n-2}.
pub fn vn_closed_form(n: u32, qbar: f64) -> Result<f64> {
    check_args(n, qbar)?;
    if n % 2 == 0 {
        return Err(NumericsError::Pole {
            function: "vn_closed_form (Γ(-n/2), even n)",
            x: -(n as f64) / 2.0,
        }
        .into());
    }
    let nf = n as f64;
    let series = hyp1f2_dd(1.0 - nf / 2.0, 1.0, 2.0 - nf / 2.0, -0.25 * qbar * qbar, SeriesControl::default())?;
    // nΓ(-n/2)/(2ⁿΓ(n/2)) = -(-1)^{(n-1)/2} / ((n-2)!!)² for odd n
    let mut double_fact = 1.0;
    let mut k = n - 2;
    while k > 1 {
        double_fact *= k as f64;
        k -= 2;
    }
    let sign = if (n - 1) / 2 % 2 == 0 { -1.0 } else { 1.0 };
    let mut power = Dd::ONE;
    for _ in 0..n - 2 {
        power = power * qbar;
    }
    let tail = power / Dd::from_f64(double_fact * double_fact) * sign;
    Ok((series / Dd::from_f64(nf - 2.0) + (-tail)).to_f64())
}

/// V_n(q̄): closed form for odd n, quadrature for even n.
pub fn vn_dimensionless(n: u32, qbar: f64) -> Result<f64> {
    if n % 2 == 1 {
        vn_closed_form(n, qbar)
    } else {
        vn_quadrature(n, qbar)
    }
}

fn check_args(n: u32, qbar: f64) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidInput {
            what: "power n",
            detail: format!("{n} < 3"),
        });
    }
    if !(qbar >= 0.0 && qbar.is_finite()) {
        return Err(Error::InvalidInput {
            what: "qbar",
            detail: format!("must be finite and non-negative, got {qbar}"),
        });
    }
    Ok(())
}

const LOBES: usize = 60;

/// ∫₁^∞ J₀(q̄u) u^{1-n} du by integrating between consecutive zeros of the
/// Bessel factor and extrapolating the alternating partial sums.
pub fn vn_quadrature(n: u32, qbar: f64) -> Result<f64> {
    check_args(n, qbar)?;
    let nf = n as f64;
    if qbar == 0.0 {
        return Ok(1.0 / (nf - 2.0));
    }
    let f = |u: f64| bessel_j0(qbar * u) * u.powf(1.0 - nf);
    let ctrl = QuadControl {
        rel_tol: 1e-13,
        abs_tol: 1e-17,
        max_subdivisions: 400,
    };
    let mut k = 1;
    let mut zero = bessel_j0_zero(k)? / qbar;
    while zero <= 1.0 {
        k += 1;
        zero = bessel_j0_zero(k)? / qbar;
    }
    let mut total = integrate_adaptive_with(f, 1.0, zero, ctrl)?.value;
    let mut sums = Vec::with_capacity(LOBES + 1);
    sums.push(total);
    let mut lo = zero;
    for _ in 0..LOBES {
        k += 1;
        let hi = bessel_j0_zero(k)? / qbar;
        total += integrate_adaptive_with(f, lo, hi, ctrl)?.value;
        sums.push(total);
        lo = hi;
    }
    let full = wynn_epsilon(&sums)?;
    let short = wynn_epsilon(&sums[..sums.len() - 2])?;
    let scale = full.abs().max(1e-9);
    if (full - short).abs() > 1e-9 * scale {
        return Err(NumericsError::Acceleration {
            detail: format!("V_{n}({qbar}): {full:e} vs {short:e} with two fewer lobes"),
        }
        .into());
    }
    Ok(full)
}

/// V(q) = 2π Σ_n C_n R^{2-n} V_n(qR) [J m²].
pub fn v_fourier(spec: &PotentialSpec, q: f64) -> Result<f64> {
    let qbar = q * spec.radius;
    let mut sum = 0.0;
    for &(n, c) in &spec.terms {
        let vn = if n % 2 == 0 && !spec.even_by_quadrature {
            vn_closed_form(n, qbar)?
        } else {
            vn_dimensionless(n, qbar)?
        };
        sum += c * spec.radius.powi(2 - n as i32) * vn;
    }
    Ok(2.0 * PI * sum)
}

/// V(q̄/R) for a dimensionless wave number.
pub fn v_fourier_qbar(spec: &PotentialSpec, qbar: f64) -> Result<f64> {
    v_fourier(spec, qbar / spec.radius)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TransformRow {
    pub qbar: f64,
    pub n: u32,
    #[serde(rename = "Vn")]
    pub vn: f64,
}

/// 601 uniform points on [0, 30].
pub fn transform_grid() -> Vec<f64> {
    (0..=600).map(|i| 30.0 * i as f64 / 600.0).collect()
}

/// Rows (q̄, n, V_n) for every n in `n_list` over `grid`, grouped by n.
pub fn emit_transform_rows(grid: &[f64], n_list: &[u32]) -> Result<Vec<TransformRow>> {
    if grid.is_empty() || n_list.is_empty() {
        return Err(Error::InvalidInput {
            what: "q̄ grid",
            detail: "grid and power list must be non-empty".into(),
        });
    }
    let mut rows = Vec::with_capacity(grid.len() * n_list.len());
    for &n in n_list {
        for &qbar in grid {
            rows.push(TransformRow {
                qbar,
                n,
                vn: vn_dimensionless(n, qbar)?,
            });
        }
    }
    Ok(rows)
}
