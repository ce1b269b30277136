//! CODATA 2018 values, SI units.

/// Reduced Planck constant [J s].
pub const HBAR: f64 = 1.054_571_817e-34;
/// Electron mass [kg], the reference mass of the modification.
pub const M_E: f64 = 9.109_383_701_5e-31;
/// Atomic mass unit [kg].
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Boltzmann constant [J/K].
pub const K_B: f64 = 1.380_649e-23;

/// The compiled-in constants as a value, for reports.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub m_e: f64,
    pub amu: f64,
    pub k_b: f64,
}

impl PhysicalConstants {
    pub const CODATA_2018: PhysicalConstants =
        PhysicalConstants { hbar: HBAR, m_e: M_E, amu: AMU, k_b: K_B };
}
