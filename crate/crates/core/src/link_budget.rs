//! Lattice depth behind a lossy fiber link terminated by an FBG reflector,
//! and the lowest-band tunneling rate that follows from it.

use std::f64::consts::PI;

use serde::Serialize;

use crate::bessel::bessel_j;
use crate::error::{check, Error, Result};
use crate::physics::{
    joules_to_hz, joules_to_recoil, polarizability_si, AtomSpecies, EPS0, HBAR, SPEED_OF_LIGHT, UM,
};

/// Depth below which nearest-neighbour tunneling is considered significant.
pub const SHALLOW_LATTICE_DEPTH_ER: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiberLink {
    pub length_km: f64,
    /// One-way transmission loss per kilometre, dB/km.
    pub loss_db_per_km: f64,
    pub fbg_reflectivity: f64,
    pub n_eff: f64,
}

impl FiberLink {
    pub fn validate(&self) -> Result<()> {
        check("link.length_km", self.length_km, self.length_km >= 0.0, "must be non-negative")?;
        check(
            "link.loss_dbkm",
            self.loss_db_per_km,
            self.loss_db_per_km >= 0.0,
            "must be non-negative",
        )?;
        check(
            "link.reflectivity",
            self.fbg_reflectivity,
            (0.0..=1.0).contains(&self.fbg_reflectivity),
            "must lie in [0, 1]",
        )?;
        check("link.n_eff", self.n_eff, self.n_eff >= 1.0, "must be at least 1")?;
        Ok(())
    }
}

impl Default for FiberLink {
    fn default() -> Self {
        FiberLink {
            length_km: 4.0,
            loss_db_per_km: 2.0,
            fbg_reflectivity: 0.99,
            n_eff: 1.45,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeConfig {
    /// Incident lattice power, W.
    pub power_w: f64,
    /// Beam waist radius at the atoms, m.
    pub waist_m: f64,
    pub species: AtomSpecies,
}

impl LatticeConfig {
    pub fn validate(&self) -> Result<()> {
        check("lattice.power_w", self.power_w, self.power_w > 0.0, "must be positive")?;
        check("lattice.waist_um", self.waist_m, self.waist_m > 0.0, "must be positive")?;
        self.species.validate()
    }
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig {
            power_w: 3.0,
            waist_m: 110.0 * UM,
            species: AtomSpecies::strontium_87(),
        }
    }
}

/// Fraction κ of the incident lattice power returned by the link.
///
/// κ = R · 10^(−2 γ L / 10): the loss γ·L is traversed twice (out to the
/// grating and back) and the grating reflects once.
pub fn power_decay_factor(link: &FiberLink) -> Result<f64> {
    link.validate()?;
    let round_trip_db = 2.0 * link.loss_db_per_km * link.length_km;
    Ok(link.fbg_reflectivity * 10f64.powf(-round_trip_db / 10.0))
}

/// Longitudinal lattice depth U_z0 = 4 α √κ P₀ / (π c ε₀ w₀²), joules.
///
/// The constant offset of the potential is not modelled; it shifts both
/// clock states equally.
pub fn lattice_depth(lattice: &LatticeConfig, kappa: f64) -> Result<f64> {
    check("kappa", kappa, (0.0..=1.0).contains(&kappa), "must lie in [0, 1]")?;
    if lattice.waist_m == 0.0 {
        return Err(Error::invalid("lattice.waist_um", "zero waist makes the depth singular"));
    }
    lattice.validate()?;
    let alpha = polarizability_si(lattice.species.polarizability_au)?;
    Ok(4.0 * alpha * kappa.sqrt() * lattice.power_w
        / (PI * SPEED_OF_LIGHT * EPS0 * lattice.waist_m * lattice.waist_m))
}

/// Lowest-band tunneling J₀/E_r for a depth given in recoil units.
///
/// This is the deep-lattice approximation; below roughly 5 E_r it
/// overestimates the true bandwidth.
pub fn tunneling_rate(depth_er: f64) -> Result<f64> {
    check("depth_er", depth_er, depth_er >= 0.0, "must be non-negative")?;
    Ok(4.0 / PI.sqrt() * depth_er.powf(0.75) * (-2.0 * depth_er.sqrt()).exp())
}

/// Drive amplitude ζ₀ = −m_a d ω_v n_eff ΔL_m / ħ (signed).
pub fn zeta0(species: &AtomSpecies, f_v: f64, delta_l_m: f64, n_eff: f64) -> Result<f64> {
    check("f_v", f_v, f_v > 0.0, "must be positive")?;
    check("delta_l_m", delta_l_m, delta_l_m >= 0.0, "must be non-negative")?;
    let omega_v = 2.0 * PI * f_v;
    Ok(-species.mass * species.lattice_constant() * omega_v * n_eff * delta_l_m / HBAR)
}

/// Drive-renormalized tunneling J₀ |J_0(ζ₀)|, in the units of `j0`.
pub fn renormalized_tunneling(j0: f64, zeta0: f64) -> Result<f64> {
    check("j0", j0, j0 >= 0.0, "must be non-negative")?;
    Ok(j0 * bessel_j(0, zeta0).abs())
}

/// True when the lattice is shallow enough for tunneling to matter.
pub fn shallow_lattice_flag(depth_er: f64) -> Result<bool> {
    check("depth_er", depth_er, depth_er >= 0.0, "must be non-negative")?;
    Ok(depth_er < SHALLOW_LATTICE_DEPTH_ER)
}

/// Link-derived lattice quantities for one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkBudget {
    pub kappa: f64,
    pub depth_j: f64,
    pub depth_er: f64,
    pub j0_er: f64,
    pub j0_hz: f64,
    /// Tunneling as an angular frequency, rad/s.
    pub j0_rad_s: f64,
    pub shallow: bool,
}

pub fn evaluate_link(lattice: &LatticeConfig, link: &FiberLink) -> Result<LinkBudget> {
    let kappa = power_decay_factor(link)?;
    let depth_j = lattice_depth(lattice, kappa)?;
    let depth_er = joules_to_recoil(depth_j, &lattice.species);
    let j0_er = tunneling_rate(depth_er)?;
    let j0_j = j0_er * lattice.species.recoil();
    Ok(LinkBudget {
        kappa,
        depth_j,
        depth_er,
        j0_er,
        j0_hz: joules_to_hz(j0_j),
        j0_rad_s: j0_j / HBAR,
        shallow: shallow_lattice_flag(depth_er)?,
    })
}

/// One row of a depth-versus-length table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DepthRow {
    pub length_km: f64,
    pub loss_db_per_km: f64,
    pub reflectivity: f64,
    pub kappa: f64,
    pub depth_er: f64,
    pub j0_er: f64,
    pub j0_hz: f64,
    pub shallow: bool,
}

pub const DEPTH_SWEEP_HEADER: [&str; 8] = [
    "length_km",
    "loss_db_per_km",
    "reflectivity",
    "kappa",
    "depth_Er",
    "J0_Er",
    "J0_Hz",
    "shallow",
];

impl DepthRow {
    pub fn csv_fields(&self) -> Vec<String> {
        use crate::output::fmt_f64;
        vec![
            fmt_f64(self.length_km),
            fmt_f64(self.loss_db_per_km),
            fmt_f64(self.reflectivity),
            fmt_f64(self.kappa),
            fmt_f64(self.depth_er),
            fmt_f64(self.j0_er),
            fmt_f64(self.j0_hz),
            self.shallow.to_string(),
        ]
    }
}

/// Depth table over loss × reflectivity × length, length varying fastest.
pub fn depth_vs_length_sweep(
    lattice: &LatticeConfig,
    losses: &[f64],
    reflectivities: &[f64],
    lengths: &[f64],
) -> Result<Vec<DepthRow>> {
    for (name, grid) in [("losses", losses), ("reflectivities", reflectivities), ("lengths", lengths)]
    {
        if grid.is_empty() {
            return Err(Error::invalid(name, "grid must not be empty"));
        }
    }
    let base = FiberLink::default();
    let mut rows = Vec::with_capacity(losses.len() * reflectivities.len() * lengths.len());
    for &loss in losses {
        for &r in reflectivities {
            for &length in lengths {
                let link = FiberLink {
                    length_km: length,
                    loss_db_per_km: loss,
                    fbg_reflectivity: r,
                    ..base
                };
                let b = evaluate_link(lattice, &link)?;
                rows.push(DepthRow {
                    length_km: length,
                    loss_db_per_km: loss,
                    reflectivity: r,
                    kappa: b.kappa,
                    depth_er: b.depth_er,
                    j0_er: b.j0_er,
                    j0_hz: b.j0_hz,
                    shallow: b.shallow,
                });
            }
        }
    }
    Ok(rows)
}
