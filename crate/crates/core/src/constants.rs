//! Physical constants (CODATA 2018, exact SI where defined).

/// Reduced Planck constant [J s].
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant [J/K].
pub const K_B: f64 = 1.380_649e-23;
/// Mass of a ⁸⁷Rb atom [kg].
pub const M_RB87: f64 = 1.443e-25;

/// The pair of constants every physical formula needs. Kept as a value so
/// that tests can re-run a computation in a rescaled unit system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub hbar: f64,
    pub k_b: f64,
}

impl Constants {
    pub const SI: Constants = Constants { hbar: HBAR, k_b: K_B };
}

impl Default for Constants {
    fn default() -> Self {
        Self::SI
    }
}
