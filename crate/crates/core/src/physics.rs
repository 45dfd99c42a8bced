//! Physical constants, unit conversions and atomic species parameters.
//!
//! Everything internal is SI. Hertz and recoil-energy units only appear at
//! the presentation layer through the conversion helpers below.
//!
//! | constant | value | unit |
//! |---|---|---|
//! | h | 6.62607015e-34 | J s (exact) |
//! | ħ | 1.054571817646e-34 | J s (h / 2π) |
//! | c | 299792458 | m/s (exact) |
//! | ε₀ | 8.8541878128e-12 | F/m |
//! | u | 1.66053906660e-27 | kg |
//! | a.u. polarizability | 1.64877727436e-41 | C² m² / J |
//! | g | 9.80665 | m/s² (standard gravity) |

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{check, Result};

/// CODATA-2018 constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub h: f64,
    pub c: f64,
    pub eps0: f64,
    pub atomic_mass_unit: f64,
    pub au_polarizability: f64,
    pub g_std: f64,
}

pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
    hbar: 1.054_571_817_646_156_4e-34,
    h: 6.626_070_15e-34,
    c: 299_792_458.0,
    eps0: 8.854_187_812_8e-12,
    atomic_mass_unit: 1.660_539_066_60e-27,
    au_polarizability: 1.648_777_274_36e-41,
    g_std: 9.806_65,
};

pub const HBAR: f64 = CODATA_2018.hbar;
pub const PLANCK: f64 = CODATA_2018.h;
pub const SPEED_OF_LIGHT: f64 = CODATA_2018.c;
pub const EPS0: f64 = CODATA_2018.eps0;
pub const G_STD: f64 = CODATA_2018.g_std;

/// Unit scale factors used at the configuration boundary.
pub const NM: f64 = 1e-9;
pub const UM: f64 = 1e-6;
/// One micro-g, m/s².
pub const MICRO_G: f64 = 9.806_65e-6;

/// Atomic species trapped in the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomSpecies {
    /// Atomic mass, kg.
    pub mass: f64,
    /// Lattice (magic) wavelength, m.
    pub lattice_wavelength: f64,
    /// Clock transition wavelength, m.
    pub clock_wavelength: f64,
    /// Polarizability at the lattice wavelength, atomic units.
    pub polarizability_au: f64,
    /// Spin-orbit coupling phase per lattice site, rad.
    pub soc_phase: f64,
}

impl AtomSpecies {
    /// ⁸⁷Sr in an 813 nm magic-wavelength lattice probed at 698 nm.
    pub fn strontium_87() -> Self {
        AtomSpecies {
            mass: 86.908_877_497 * CODATA_2018.atomic_mass_unit,
            lattice_wavelength: 813.0 * NM,
            clock_wavelength: 698.0 * NM,
            polarizability_au: 295.0,
            soc_phase: 7.0 * PI / 6.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check("species.mass", self.mass, self.mass > 0.0, "must be positive")?;
        check(
            "species.lattice_wavelength",
            self.lattice_wavelength,
            self.lattice_wavelength > 0.0,
            "must be positive",
        )?;
        check(
            "species.clock_wavelength",
            self.clock_wavelength,
            self.clock_wavelength > 0.0,
            "must be positive",
        )?;
        check(
            "species.polarizability_au",
            self.polarizability_au,
            self.polarizability_au >= 0.0,
            "must be non-negative",
        )?;
        check("species.soc_phase", self.soc_phase, true, "")?;
        Ok(())
    }

    pub fn lattice_wavenumber(&self) -> f64 {
        TAU / self.lattice_wavelength
    }

    pub fn clock_wavenumber(&self) -> f64 {
        TAU / self.clock_wavelength
    }

    /// Lattice site spacing, half the lattice wavelength.
    pub fn lattice_constant(&self) -> f64 {
        self.lattice_wavelength / 2.0
    }

    /// Recoil energy in joules. Panics-free wrapper over [`recoil_energy`]
    /// for species that already passed validation.
    pub fn recoil(&self) -> f64 {
        let k = self.lattice_wavenumber();
        HBAR * HBAR * k * k / (2.0 * self.mass)
    }
}

impl Default for AtomSpecies {
    fn default() -> Self {
        Self::strontium_87()
    }
}

/// Lattice photon recoil energy ħ²k²/2m, in joules.
pub fn recoil_energy(species: &AtomSpecies) -> Result<f64> {
    species.validate()?;
    Ok(species.recoil())
}

/// Converts a polarizability from atomic units to C² m² / J.
pub fn polarizability_si(alpha_au: f64) -> Result<f64> {
    check("alpha_au", alpha_au, alpha_au >= 0.0, "must be non-negative")?;
    Ok(alpha_au * CODATA_2018.au_polarizability)
}

pub fn joules_to_hz(energy: f64) -> f64 {
    energy / PLANCK
}

pub fn hz_to_joules(freq: f64) -> f64 {
    freq * PLANCK
}

/// Energy as an angular frequency, rad/s.
pub fn joules_to_rad_s(energy: f64) -> f64 {
    energy / HBAR
}

pub fn rad_s_to_joules(omega: f64) -> f64 {
    omega * HBAR
}

pub fn joules_to_recoil(energy: f64, species: &AtomSpecies) -> f64 {
    energy / species.recoil()
}

pub fn recoil_to_joules(energy_er: f64, species: &AtomSpecies) -> f64 {
    energy_er * species.recoil()
}

/// Accelerations given in units of standard gravity.
pub fn g_to_mps2(a_g: f64) -> f64 {
    a_g * G_STD
}

pub fn mps2_to_g(a: f64) -> f64 {
    a / G_STD
}
