//! Tunneling-broadened lineshape.
//!
//! The joint transition density of states of the spin-orbit-coupled lowest
//! band is D(δ) = 1/√(W² − δ²) on |δ| < W with W = 4 J₀ |sin(φ/2)|. It is
//! normalized to unit mass here, so the broadened spectrum is
//!
//! P̄(δ) = (1/π) ∫₀^π P(δ − W cos θ) dθ.
//!
//! Substituting x = W cos θ absorbs both edge singularities, leaving a
//! smooth periodic integrand in θ; the midpoint rule is then spectrally
//! accurate. The inner spectrum is evaluated analytically at every node.

use rayon::prelude::*;

use crate::error::{check, Error, Result};
use crate::floquet::{checked_population, FloquetModel, SpectrumResult};

pub const DEFAULT_N_THETA: usize = 512;
pub const MIN_N_THETA: usize = 16;
pub const MAX_RECOMMENDED_N_THETA: usize = 16_384;

/// Band half-width W = 4 J₀ |sin(φ/2)|, in the units of `j0`.
pub fn band_half_width(j0: f64, soc_phase: f64) -> f64 {
    4.0 * j0 * (0.5 * soc_phase).sin().abs()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityOfStates {
    /// W, rad/s.
    pub half_width: f64,
    pub soc_phase: f64,
}

impl DensityOfStates {
    pub fn new(j0: f64, soc_phase: f64) -> Result<Self> {
        check("j0", j0, j0 >= 0.0, "must be non-negative")?;
        check("soc_phase", soc_phase, true, "")?;
        Ok(DensityOfStates {
            half_width: band_half_width(j0, soc_phase),
            soc_phase,
        })
    }

    /// Unnormalized D(δ); zero at and beyond the band edges.
    pub fn eval(&self, delta: f64) -> f64 {
        let w = self.half_width;
        if delta.abs() >= w {
            0.0
        } else {
            1.0 / (w * w - delta * delta).sqrt()
        }
    }

    /// Quadrature offsets W cos θ_k at the θ midpoints, symmetric about 0.
    pub fn nodes(&self, n_theta: usize) -> Vec<f64> {
        let n = n_theta as f64;
        let half: Vec<f64> = (0..n_theta / 2)
            .map(|k| self.half_width * (std::f64::consts::PI * (k as f64 + 0.5) / n).cos())
            .collect();
        let mut nodes = Vec::with_capacity(n_theta);
        nodes.extend(half.iter().copied());
        if n_theta % 2 == 1 {
            nodes.push(0.0);
        }
        nodes.extend(half.iter().rev().map(|x| -x));
        nodes
    }
}

/// D(δ) for tunneling `j0` (rad/s) and SOC phase `phi`.
pub fn dos(delta: f64, j0: f64, phi: f64) -> f64 {
    DensityOfStates {
        half_width: band_half_width(j0, phi),
        soc_phase: phi,
    }
    .eval(delta)
}

/// Broadens an arbitrary lineshape `f` at detuning `delta` with band
/// half-width `half_width`.
pub fn convolve_fn<F: Fn(f64) -> f64>(f: F, delta: f64, half_width: f64, n_theta: usize) -> f64 {
    if half_width == 0.0 {
        return f(delta);
    }
    let dos = DensityOfStates {
        half_width,
        soc_phase: 0.0,
    };
    let nodes = dos.nodes(n_theta);
    nodes.iter().map(|x| f(delta - x)).sum::<f64>() / n_theta as f64
}

/// Node count that resolves lines of width ~1/t′ across the band, clamped
/// to [`DEFAULT_N_THETA`, `MAX_RECOMMENDED_N_THETA`].
pub fn recommended_n_theta(half_width: f64, duration: f64) -> usize {
    let want = (4.0 * half_width * duration).ceil();
    if !want.is_finite() || want <= DEFAULT_N_THETA as f64 {
        return DEFAULT_N_THETA;
    }
    (want as usize)
        .checked_next_power_of_two()
        .unwrap_or(MAX_RECOMMENDED_N_THETA)
        .min(MAX_RECOMMENDED_N_THETA)
}

/// Broadens a raw Floquet spectrum with the band of tunneling `j0` (rad/s).
pub fn convolve_spectrum(raw: &SpectrumResult, j0: f64, phi: f64, n_theta: usize) -> Result<SpectrumResult> {
    if n_theta < MIN_N_THETA {
        return Err(Error::invalid("n_theta", format!("need at least {MIN_N_THETA} nodes")));
    }
    if raw.populations.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite("raw spectrum".into()));
    }
    let dos = DensityOfStates::new(j0, phi)?;
    let model = FloquetModel::new(&raw.params()?, &raw.pulse()?)?;
    let populations = if dos.half_width == 0.0 {
        raw.populations.clone()
    } else {
        let nodes = dos.nodes(n_theta);
        let norm = n_theta as f64;
        raw.detunings
            .par_iter()
            .map(|&d| {
                let p = nodes.iter().map(|x| model.population(d - x)).sum::<f64>() / norm;
                checked_population(p, d)
            })
            .collect::<Result<Vec<_>>>()?
    };
    let mut meta = raw.meta.clone();
    meta.convolved = true;
    meta.j0_rad_s = j0;
    meta.j0_hz = j0 / (2.0 * std::f64::consts::PI);
    meta.soc_phase = Some(phi);
    meta.n_theta = Some(n_theta);
    Ok(SpectrumResult {
        detunings: raw.detunings.clone(),
        populations,
        meta,
    })
}
