//! Phonon excitation and thermalization of a cantilevered carbon nano-tube
//! immersed in a cold Bose gas, coupled through a Casimir-Polder potential.

pub mod beam;
pub mod cli;
pub mod constants;
pub mod dynamics;
pub mod gas;
pub mod potential;
pub mod rates;
pub mod specfun;

use thiserror::Error;

pub use constants::Constants;
pub use specfun::NumericsError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("invalid {what}: {detail}")]
    InvalidInput { what: &'static str, detail: String },
    #[error("outside the regime of validity: {detail}")]
    Regime { detail: String },
    #[error("time integration failed at t = {t:e} s: {detail}")]
    Integration { t: f64, detail: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
