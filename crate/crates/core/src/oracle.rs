//! Brute-force check of the sideband formula: direct RK4 integration of the
//! phase-modulated two-level Schrödinger equation
//!
//! i d/dt (c_e, c_g) = ½ [[−δ, Ω₀ e^{−iφ(t)}], [Ω₀ e^{iφ(t)}, δ]] (c_e, c_g),
//! φ(t) = β sin(ω_v t),
//!
//! starting from the ground state at t = 0.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check, Error, Result};
use crate::floquet::{checked_population, ClockPulse, DetuningGrid, FloquetModel, FloquetParams};

/// Norm drift beyond this aborts the integration.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;
/// Largest phase advance per step used by [`accurate_step`].
const PHASE_PER_STEP: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelState {
    pub amp_e: Complex64,
    pub amp_g: Complex64,
}

impl TwoLevelState {
    pub fn ground() -> Self {
        TwoLevelState {
            amp_e: Complex64::new(0.0, 0.0),
            amp_g: Complex64::new(1.0, 0.0),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp_e.norm_sqr() + self.amp_g.norm_sqr()
    }

    pub fn excited_population(&self) -> f64 {
        self.amp_e.norm_sqr()
    }

    fn axpy(&self, h: f64, k: &TwoLevelState) -> TwoLevelState {
        TwoLevelState {
            amp_e: self.amp_e + k.amp_e * h,
            amp_g: self.amp_g + k.amp_g * h,
        }
    }
}

/// Phase-modulated clock drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulatedDrive {
    pub beta: f64,
    pub omega_v: f64,
    pub rabi: f64,
    pub detuning: f64,
}

impl ModulatedDrive {
    /// e^{iφ(t)}
    fn phasor(&self, t: f64) -> Complex64 {
        let (s, c) = (self.beta * (self.omega_v * t).sin()).sin_cos();
        Complex64::new(c, s)
    }

    /// −i H/ħ ψ given the precomputed phasor.
    fn derivative(&self, phasor: Complex64, psi: &TwoLevelState) -> TwoLevelState {
        let half_rabi = 0.5 * self.rabi;
        let half_det = 0.5 * self.detuning;
        let minus_i = Complex64::new(0.0, -1.0);
        let he = -half_det * psi.amp_e + half_rabi * phasor.conj() * psi.amp_g;
        let hg = half_rabi * phasor * psi.amp_e + half_det * psi.amp_g;
        TwoLevelState {
            amp_e: minus_i * he,
            amp_g: minus_i * hg,
        }
    }

    /// Classical RK4 from `t0` to `t1` in `steps` equal steps; `t1 < t0`
    /// integrates backwards.
    pub fn evolve(&self, state: TwoLevelState, t0: f64, t1: f64, steps: usize) -> TwoLevelState {
        let h = (t1 - t0) / steps as f64;
        let mut psi = state;
        let mut phasor_start = self.phasor(t0);
        for i in 0..steps {
            let t = t0 + i as f64 * h;
            let phasor_mid = self.phasor(t + 0.5 * h);
            let phasor_end = self.phasor(t + h);
            let k1 = self.derivative(phasor_start, &psi);
            let k2 = self.derivative(phasor_mid, &psi.axpy(0.5 * h, &k1));
            let k3 = self.derivative(phasor_mid, &psi.axpy(0.5 * h, &k2));
            let k4 = self.derivative(phasor_end, &psi.axpy(h, &k3));
            psi = TwoLevelState {
                amp_e: psi.amp_e + (k1.amp_e + 2.0 * k2.amp_e + 2.0 * k3.amp_e + k4.amp_e) * (h / 6.0),
                amp_g: psi.amp_g + (k1.amp_g + 2.0 * k2.amp_g + 2.0 * k3.amp_g + k4.amp_g) * (h / 6.0),
            };
            phasor_start = phasor_end;
        }
        psi
    }
}

/// Upper bound on the step: a fiftieth of the shortest of the drive, Rabi
/// and detuning periods.
pub fn max_step(omega_v: f64, omega0: f64, delta: f64) -> f64 {
    let mut fastest = omega_v.max(omega0);
    if delta != 0.0 {
        fastest = fastest.max(delta.abs());
    }
    TAU / fastest / 50.0
}

/// Step keeping every phase advance below 5 mrad, well inside
/// [`max_step`].
pub fn accurate_step(beta: f64, omega_v: f64, omega0: f64, delta: f64) -> f64 {
    let rate = beta * omega_v + delta.abs() + omega0;
    (PHASE_PER_STEP / rate).min(max_step(omega_v, omega0, delta))
}

/// Final state after a pulse of length `t_final`.
pub fn integrate_state(
    beta: f64,
    omega_v: f64,
    omega0: f64,
    delta: f64,
    t_final: f64,
    dt_max: f64,
) -> Result<TwoLevelState> {
    check("beta", beta, beta >= 0.0, "must be non-negative")?;
    check("omega_v", omega_v, omega_v > 0.0, "must be positive")?;
    check("omega0", omega0, omega0 > 0.0, "must be positive")?;
    check("delta", delta, true, "")?;
    check("t_final", t_final, t_final > 0.0, "must be positive")?;
    let bound = max_step(omega_v, omega0, delta);
    check("dt_max", dt_max, dt_max > 0.0 && dt_max <= bound, &format!("must lie in (0, {bound:e}]"))?;
    let steps = (t_final / dt_max).ceil().max(1.0) as usize;
    let drive = ModulatedDrive {
        beta,
        omega_v,
        rabi: omega0,
        detuning: delta,
    };
    let out = drive.evolve(TwoLevelState::ground(), 0.0, t_final, steps);
    let drift = (out.norm_sqr() - 1.0).abs();
    if drift > NORM_DRIFT_LIMIT {
        return Err(Error::Accuracy(format!("norm drift {drift:e} after {steps} steps")));
    }
    Ok(out)
}

/// Excited population after a pulse, by direct integration.
pub fn integrate_pulse(
    beta: f64,
    omega_v: f64,
    omega0: f64,
    delta: f64,
    t_final: f64,
    dt_max: f64,
) -> Result<f64> {
    Ok(integrate_state(beta, omega_v, omega0, delta, t_final, dt_max)?.excited_population())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleRow {
    pub detuning: f64,
    pub analytic: f64,
    pub integrated: f64,
    pub abs_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleComparison {
    pub rows: Vec<OracleRow>,
    pub max_abs_dev: f64,
}

/// Sideband formula against direct integration at every grid detuning.
pub fn compare_spectra(params: &FloquetParams, pulse: &ClockPulse, grid: &DetuningGrid) -> Result<OracleComparison> {
    let model = FloquetModel::new(params, pulse)?;
    let rows = grid
        .values()
        .par_iter()
        .map(|&d| {
            let analytic = checked_population(model.population(d), d)?;
            let dt = accurate_step(params.beta, params.drive_freq, pulse.rabi_freq, d);
            let integrated = integrate_pulse(params.beta, params.drive_freq, pulse.rabi_freq, d, pulse.duration, dt)?;
            Ok(OracleRow {
                detuning: d,
                analytic,
                integrated,
                abs_err: (analytic - integrated).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_abs_dev = rows.iter().map(|r| r.abs_err).fold(0.0, f64::max);
    Ok(OracleComparison { rows, max_abs_dev })
}
