//! Shared inputs for the benchmark harness.

use std::f64::consts::{PI, TAU};

use latticevib::{ClockPulse, DetuningGrid, FloquetParams, Result, SpectrumResult};

/// Drive frequency of the reference scenario, rad/s.
pub const OMEGA_V: f64 = TAU * 200.0;

/// π pulse lasting ten drive periods.
pub fn reference_pulse() -> Result<ClockPulse> {
    ClockPulse::with_area(PI, 10.0 / 200.0)
}

pub fn reference_params(beta: f64) -> Result<FloquetParams> {
    FloquetParams::new(beta, OMEGA_V)
}

pub fn reference_grid(points: usize) -> Result<DetuningGrid> {
    DetuningGrid::symmetric(4.0 * OMEGA_V, points)
}

/// Raw spectrum at β = 1 on a grid of `points` detunings.
pub fn reference_spectrum(points: usize) -> Result<SpectrumResult> {
    latticevib::floquet::excitation_spectrum(&reference_params(1.0)?, &reference_pulse()?, &reference_grid(points)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        let s = reference_spectrum(101).unwrap();
        assert_eq!(s.populations.len(), 101);
    }
}
