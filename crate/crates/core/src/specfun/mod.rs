//! Special functions and the generic numerical kernels shared by the
//! physics modules: series evaluation, bracketed root finding and
//! adaptive / oscillatory quadrature.
//!
//! Everything here is a pure function of its arguments.

mod bessel;
pub(crate) mod dd;
mod gamma;
mod hypergeometric;
mod polylog;
mod quadrature;
mod roots;

pub use bessel::{bessel_j0, bessel_j0_zero};
pub use gamma::{gamma, ln_gamma, LnGamma};
pub use hypergeometric::hyp1f2;
pub(crate) use hypergeometric::hyp1f2_dd;
pub use polylog::{polylog_3_2, riemann_zeta, ZETA_3_2};
pub(crate) use polylog::polylog_3_2_of_log;
pub use quadrature::{
    gauss_kronrod_21, integrate_adaptive, integrate_adaptive_with, wynn_epsilon, QuadControl,
    QuadResult,
};
pub use roots::{find_root_bracketed, find_root_bracketed_with, RootControl};

use thiserror::Error;

/// Failure modes of the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("pole of {function} at x = {x}")]
    Pole { function: &'static str, x: f64 },
    #[error("{function}: argument {x} outside the domain {domain}")]
    Domain {
        function: &'static str,
        x: f64,
        domain: &'static str,
    },
    #[error("{function}: series not converged after {terms} terms (last term {last_term:e})")]
    SeriesNotConverged {
        function: &'static str,
        terms: usize,
        last_term: f64,
    },
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("root finder: {iterations} iterations exceeded, bracket [{lo}, {hi}]")]
    MaxIterations { iterations: usize, lo: f64, hi: f64 },
    #[error(
        "quadrature on [{lo}, {hi}]: error estimate {abs_error:e} above tolerance \
         after {subdivisions} subdivisions (estimate {estimate:e})"
    )]
    QuadratureTolerance {
        lo: f64,
        hi: f64,
        estimate: f64,
        abs_error: f64,
        subdivisions: usize,
    },
    #[error("non-finite integrand value {value} at x = {x}")]
    NonFinite { x: f64, value: f64 },
    #[error("sequence acceleration did not settle: {detail}")]
    Acceleration { detail: String },
}

/// Stopping rule for power-series style evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl SeriesControl {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self, NumericsError> {
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(NumericsError::Domain {
                function: "SeriesControl",
                x: rel_tol,
                domain: "rel_tol in (0, 1)",
            });
        }
        if max_terms == 0 {
            return Err(NumericsError::Domain {
                function: "SeriesControl",
                x: 0.0,
                domain: "max_terms >= 1",
            });
        }
        Ok(Self { rel_tol, max_terms })
    }
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-17,
            max_terms: 10_000,
        }
    }
}
