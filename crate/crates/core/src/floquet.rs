//! Floquet sideband clock spectrum.
//!
//! A sinusoidal phase modulation β sin(ω_v t) on the clock coupling splits
//! the carrier into sidebands at δ = −m ω_v with Rabi frequencies
//! Ω₀ J_m(β). Each sideband is treated as an independent two-level Rabi
//! problem and the excited populations are summed.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::bessel_j_orders;
use crate::error::{check, Error, Result};

/// Largest tolerated Σ_{|m|>M} J_m(β)².
pub const TRUNCATION_RESIDUE: f64 = 1e-10;
/// Populations above 1 by less than this are clamped; larger excursions fail.
pub const POPULATION_SLACK: f64 = 1e-9;
/// Sideband terms with (Ω_eff/Ω_D)² below this are skipped.
const NEGLIGIBLE_TERM: f64 = 1e-24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClockPulse {
    /// Bare Rabi frequency Ω₀, rad/s.
    pub rabi_freq: f64,
    /// Interaction time t′, s.
    pub duration: f64,
}

impl ClockPulse {
    pub fn new(rabi_freq: f64, duration: f64) -> Result<Self> {
        check("pulse.rabi_rad_s", rabi_freq, rabi_freq > 0.0, "must be positive")?;
        check("pulse.duration_s", duration, duration > 0.0, "must be positive")?;
        Ok(ClockPulse { rabi_freq, duration })
    }

    /// Pulse of the given area Ω₀ t′ and duration.
    pub fn with_area(area: f64, duration: f64) -> Result<Self> {
        check("pulse.area", area, area > 0.0, "must be positive")?;
        Self::new(area / duration, duration)
    }

    pub fn area(&self) -> f64 {
        self.rabi_freq * self.duration
    }
}

/// Interrogation lasting ten vibration periods, t′ = 10 / f_v.
pub fn default_pulse(f_v: f64, area: f64) -> Result<ClockPulse> {
    check("f_v", f_v, f_v > 0.0, "must be positive")?;
    ClockPulse::with_area(area, 10.0 / f_v)
}

/// Strictly increasing clock detunings, rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct DetuningGrid {
    values: Vec<f64>,
}

impl DetuningGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("detuning_grid", "grid must not be empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("detuning_grid", "grid values must be finite"));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("detuning_grid", "grid must be strictly increasing"));
        }
        Ok(DetuningGrid { values })
    }

    /// `points` samples spanning [−half_span, half_span], mirror-symmetric.
    pub fn symmetric(half_span: f64, points: usize) -> Result<Self> {
        check("half_span", half_span, half_span > 0.0, "must be positive")?;
        if points < 2 {
            return Err(Error::invalid("grid.points", "need at least two points"));
        }
        let last = (points - 1) as f64;
        let values = (0..points)
            .map(|i| {
                // build from the outside in so v[i] == -v[n-1-i] exactly
                let j = i.min(points - 1 - i) as f64;
                let v = half_span * (1.0 - 2.0 * j / last);
                if 2 * i < points - 1 {
                    -v
                } else if 2 * i == points - 1 {
                    0.0
                } else {
                    v
                }
            })
            .collect();
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FloquetParams {
    pub beta: f64,
    /// Drive angular frequency ω_v, rad/s.
    pub drive_freq: f64,
    pub truncation_order: usize,
}

impl FloquetParams {
    /// Uses the default truncation ⌈β⌉ + 12.
    pub fn new(beta: f64, drive_freq: f64) -> Result<Self> {
        check("beta", beta, beta >= 0.0, "must be non-negative")?;
        Self::with_order(beta, drive_freq, beta.ceil() as usize + 12)
    }

    pub fn with_order(beta: f64, drive_freq: f64, truncation_order: usize) -> Result<Self> {
        check("beta", beta, beta >= 0.0, "must be non-negative")?;
        check("drive_freq", drive_freq, drive_freq > 0.0, "must be positive")?;
        let min = beta.ceil() as usize + 8;
        if truncation_order < min {
            return Err(Error::invalid(
                "truncation_order",
                format!("{truncation_order} is below ceil(beta) + 8 = {min}"),
            ));
        }
        Ok(FloquetParams {
            beta,
            drive_freq,
            truncation_order,
        })
    }
}

/// Modulation depth β = 4π n_eff ΔL_m / λ_c (no elasto-optic factor).
pub fn modulation_depth(delta_l_m: f64, n_eff: f64, clock_wavelength: f64) -> Result<f64> {
    check("delta_l_m", delta_l_m, delta_l_m >= 0.0, "must be non-negative")?;
    check("n_eff", n_eff, n_eff > 0.0, "must be positive")?;
    check("clock_wavelength", clock_wavelength, clock_wavelength > 0.0, "must be positive")?;
    Ok(4.0 * PI * n_eff * delta_l_m / clock_wavelength)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sideband {
    pub order: i32,
    /// Effective Rabi frequency Ω₀ J_m(β), rad/s (signed).
    pub rabi: f64,
    /// J_m(β).
    pub weight: f64,
}

/// Σ_{|m|>M} J_m(β)² from tabulated orders.
fn truncation_residue(orders: &[f64], m: usize) -> f64 {
    2.0 * orders.iter().skip(m + 1).map(|j| j * j).sum::<f64>()
}

/// Sidebands m = −M..=M with their effective Rabi frequencies.
pub fn sideband_table(beta: f64, omega_v: f64, omega0: f64, order: usize) -> Result<Vec<Sideband>> {
    check("beta", beta, beta >= 0.0, "must be non-negative")?;
    check("omega_v", omega_v, omega_v > 0.0, "must be positive")?;
    check("omega0", omega0, omega0 > 0.0, "must be positive")?;
    let extra = order.max(beta.ceil() as usize) + 40;
    let orders = bessel_j_orders(extra, beta);
    let residue = truncation_residue(&orders, order);
    if residue >= TRUNCATION_RESIDUE {
        let suggested = (order..extra)
            .find(|&m| truncation_residue(&orders, m) < TRUNCATION_RESIDUE)
            .unwrap_or(extra);
        return Err(Error::Truncation {
            order,
            residue,
            suggested,
        });
    }
    let m = order as i32;
    Ok((-m..=m)
        .map(|k| {
            let j = orders[k.unsigned_abs() as usize];
            let w = if k < 0 && k % 2 != 0 { -j } else { j };
            Sideband {
                order: k,
                rabi: omega0 * w,
                weight: w,
            }
        })
        .collect())
}

/// Precomputed sideband structure for repeated population evaluation.
#[derive(Debug, Clone)]
pub struct FloquetModel {
    terms: Vec<(f64, f64)>, // (m ω_v, Ω_eff²)
    half_duration: f64,
}

impl FloquetModel {
    pub fn new(params: &FloquetParams, pulse: &ClockPulse) -> Result<Self> {
        let table = sideband_table(params.beta, params.drive_freq, pulse.rabi_freq, params.truncation_order)?;
        let terms = table
            .iter()
            .filter(|s| s.rabi != 0.0)
            .map(|s| (s.order as f64 * params.drive_freq, s.rabi * s.rabi))
            .collect();
        Ok(FloquetModel {
            terms,
            half_duration: 0.5 * pulse.duration,
        })
    }

    /// Unclamped excited population at detuning δ:
    /// Σ_m (Ω_m/Ω_D)² sin²(Ω_D t′/2), Ω_D² = Ω_m² + (δ + m ω_v)².
    pub fn population(&self, delta: f64) -> f64 {
        let mut total = 0.0;
        for &(shift, rabi_sq) in &self.terms {
            let dm = delta + shift;
            let gen_sq = rabi_sq + dm * dm;
            let ratio = rabi_sq / gen_sq;
            if ratio < NEGLIGIBLE_TERM {
                continue;
            }
            // δ_m = 0 gives ratio 1 and sin²(|Ω_m| t′/2) directly
            let s = (gen_sq.sqrt() * self.half_duration).sin();
            total += ratio * s * s;
        }
        total
    }
}

/// Bounds-checks a population and clamps sub-tolerance overshoot.
pub(crate) fn checked_population(p: f64, delta: f64) -> Result<f64> {
    if !p.is_finite() {
        return Err(Error::NonFinite(format!("population at detuning {delta}")));
    }
    if p > 1.0 + POPULATION_SLACK {
        return Err(Error::Accuracy(format!(
            "population {p} exceeds 1 at detuning {delta} rad/s; sideband summation is outside its regime"
        )));
    }
    Ok(p.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub beta: f64,
    pub omega_v: f64,
    pub rabi_freq: f64,
    pub duration: f64,
    pub truncation_order: usize,
    pub convolved: bool,
    /// Tunneling used for the lineshape, rad/s (0 when not convolved).
    pub j0_rad_s: f64,
    pub j0_hz: f64,
    pub soc_phase: Option<f64>,
    pub n_theta: Option<usize>,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// rad/s
    pub detunings: Vec<f64>,
    pub populations: Vec<f64>,
    pub meta: SpectrumMeta,
}

impl SpectrumResult {
    pub fn params(&self) -> Result<FloquetParams> {
        FloquetParams::with_order(self.meta.beta, self.meta.omega_v, self.meta.truncation_order)
    }

    pub fn pulse(&self) -> Result<ClockPulse> {
        ClockPulse::new(self.meta.rabi_freq, self.meta.duration)
    }

    pub fn peak(&self) -> f64 {
        self.populations.iter().copied().fold(0.0, f64::max)
    }
}

/// Excitation spectrum over `grid`; points are evaluated in parallel and
/// collected in grid order.
pub fn excitation_spectrum(params: &FloquetParams, pulse: &ClockPulse, grid: &DetuningGrid) -> Result<SpectrumResult> {
    let model = FloquetModel::new(params, pulse)?;
    let populations = grid
        .values()
        .par_iter()
        .map(|&d| checked_population(model.population(d), d))
        .collect::<Result<Vec<_>>>()?;
    let warning = (params.drive_freq < 5.0 * pulse.rabi_freq).then(|| {
        format!(
            "drive {:.4e} rad/s is below 5x the Rabi frequency {:.4e} rad/s; sidebands are not resolved",
            params.drive_freq, pulse.rabi_freq
        )
    });
    Ok(SpectrumResult {
        detunings: grid.values().to_vec(),
        populations,
        meta: SpectrumMeta {
            beta: params.beta,
            omega_v: params.drive_freq,
            rabi_freq: pulse.rabi_freq,
            duration: pulse.duration,
            truncation_order: params.truncation_order,
            convolved: false,
            j0_rad_s: 0.0,
            j0_hz: 0.0,
            soc_phase: None,
            n_theta: None,
            warning,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::bessel_j;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const TWO_PI: f64 = 2.0 * PI;

    #[test]
    fn modulation_depth_examples() {
        assert_eq!(modulation_depth(0.0, 1.45, 698e-9).unwrap(), 0.0);
        assert_relative_eq!(modulation_depth(200e-9, 1.45, 698e-9).unwrap(), 5.2210, max_relative = 1e-4);
        assert_relative_eq!(modulation_depth(2.5e-9, 1.45, 698e-9).unwrap(), 0.065262, max_relative = 1e-4);
    }

    #[test]
    fn unmodulated_table_is_carrier_only() {
        let t = sideband_table(0.0, 100.0, 7.0, 12).unwrap();
        assert_eq!(t.len(), 25);
        for s in &t {
            if s.order == 0 {
                assert_eq!(s.rabi, 7.0);
            } else {
                assert_eq!(s.rabi, 0.0);
            }
        }
    }

    #[test]
    fn sum_rule_and_small_argument() {
        let t = sideband_table(5.22, 1.0, 1.0, 18).unwrap();
        let s: f64 = t.iter().map(|s| s.weight * s.weight).sum();
        assert!((s - 1.0).abs() < 1e-10);
        let t = sideband_table(0.0653, 1.0, 1.0, 13).unwrap();
        let j1 = t.iter().find(|s| s.order == 1).unwrap().weight;
        assert_relative_eq!(j1, 0.0326326, max_relative = 1e-5);
        assert!((j1 - 0.0653 / 2.0).abs() < 1e-4);
        let jm1 = t.iter().find(|s| s.order == -1).unwrap().weight;
        assert_eq!(jm1, -j1);
    }

    #[test]
    fn truncation_error_suggests_order() {
        match sideband_table(20.0, 1.0, 1.0, 10) {
            Err(Error::Truncation { suggested, .. }) => {
                assert!(suggested > 20);
                assert!(sideband_table(20.0, 1.0, 1.0, suggested).is_ok());
                assert!(sideband_table(20.0, 1.0, 1.0, suggested - 1).is_err());
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn params_enforce_minimum_order() {
        assert_eq!(FloquetParams::new(5.22, 1.0).unwrap().truncation_order, 18);
        assert!(FloquetParams::with_order(5.22, 1.0, 13).is_err());
        assert!(FloquetParams::with_order(5.22, 1.0, 14).is_ok());
    }

    #[test]
    fn resonant_pi_pulse() {
        let params = FloquetParams::new(0.0, TWO_PI * 200.0).unwrap();
        let pulse = default_pulse(200.0, PI).unwrap();
        let grid = DetuningGrid::new(vec![0.0]).unwrap();
        let s = excitation_spectrum(&params, &pulse, &grid).unwrap();
        assert_relative_eq!(s.populations[0], 1.0, max_relative = 1e-14);
    }

    #[test]
    fn first_sideband_pi_and_three_pi() {
        let fv = 200.0;
        let wv = TWO_PI * fv;
        let beta = 0.0653;
        let j1 = bessel_j(1, beta);
        let params = FloquetParams::with_order(beta, wv, 20).unwrap();
        let grid = DetuningGrid::new(vec![wv]).unwrap();

        let pi = default_pulse(fv, PI).unwrap();
        assert_relative_eq!(pi.duration, 0.05, max_relative = 1e-14);
        let p1 = excitation_spectrum(&params, &pi, &grid).unwrap().populations[0];
        let dominant = (PI * j1 / 2.0).sin().powi(2);
        assert_relative_eq!(dominant, 2.6e-3, max_relative = 0.02);
        assert!(p1 > dominant && p1 - dominant < 2.5e-3, "{p1} vs {dominant}");

        let three = default_pulse(fv, 3.0 * PI).unwrap();
        let dominant3 = (3.0 * PI * j1 / 2.0).sin().powi(2);
        assert!((dominant3 / dominant / 9.0 - 1.0).abs() < 0.05);
        let p3 = excitation_spectrum(&params, &three, &grid).unwrap().populations[0];
        assert!(p3 > p1);
    }

    #[test]
    fn default_pulse_rule() {
        let p = default_pulse(200.0, PI).unwrap();
        assert_relative_eq!(p.duration, 0.05, max_relative = 1e-15);
        assert_relative_eq!(p.rabi_freq, TWO_PI * 10.0, max_relative = 1e-14);
        assert_relative_eq!(default_pulse(50.0, PI).unwrap().duration, 0.2, max_relative = 1e-15);
        let slow = default_pulse(0.5, 3.0 * PI).unwrap();
        assert_relative_eq!(slow.duration, 20.0, max_relative = 1e-15);
        assert_relative_eq!(slow.rabi_freq, 3.0 * PI / 20.0, max_relative = 1e-14);
        assert_relative_eq!(slow.area(), 3.0 * PI, max_relative = 1e-12);
    }

    #[test]
    fn grid_validation() {
        assert!(DetuningGrid::new(vec![]).is_err());
        assert!(DetuningGrid::new(vec![1.0, 1.0]).is_err());
        assert!(DetuningGrid::new(vec![2.0, 1.0]).is_err());
        let g = DetuningGrid::symmetric(3.0, 7).unwrap();
        assert_eq!(g.values(), &[-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
        let g = DetuningGrid::symmetric(1.7, 2001).unwrap();
        let v = g.values();
        for i in 0..v.len() {
            assert_eq!(v[i], -v[v.len() - 1 - i]);
        }
    }

    #[test]
    fn far_off_resonance_is_dark() {
        let wv = TWO_PI * 200.0;
        let pulse = default_pulse(200.0, PI).unwrap();
        let params = FloquetParams::new(5.22, wv).unwrap();
        // midway between sidebands with ω_v = 200 Ω₀ so every |δ_m| ≥ 100 Ω₀
        let pulse = ClockPulse::with_area(PI, pulse.duration * 10.0).unwrap();
        let params = FloquetParams { drive_freq: 200.0 * pulse.rabi_freq, ..params };
        let grid = DetuningGrid::new(vec![0.5 * params.drive_freq]).unwrap();
        let s = excitation_spectrum(&params, &pulse, &grid).unwrap();
        assert!(s.populations[0] < 1e-3);
        assert!(s.meta.warning.is_none());
    }

    #[test]
    fn resolved_sideband_peaks() {
        let pulse = ClockPulse::with_area(PI, 0.05).unwrap();
        let wv = 20.0 * pulse.rabi_freq;
        let params = FloquetParams::new(5.22, wv).unwrap();
        let grid = DetuningGrid::symmetric(7.0 * wv, 7001).unwrap();
        let s = excitation_spectrum(&params, &pulse, &grid).unwrap();
        for m in -6i32..=6 {
            if bessel_j(m, 5.22).powi(2) <= 0.01 {
                continue;
            }
            let center = m as f64 * wv;
            let found = (1..s.populations.len() - 1).any(|i| {
                let p = &s.populations;
                p[i] >= p[i - 1] && p[i] >= p[i + 1] && (s.detunings[i] - center).abs() <= pulse.rabi_freq
            });
            assert!(found, "no peak near sideband {m}");
        }
    }

    #[test]
    fn unresolved_drive_sets_warning() {
        let pulse = ClockPulse::with_area(PI, 0.05).unwrap();
        let params = FloquetParams::new(0.5, 2.0 * pulse.rabi_freq).unwrap();
        let grid = DetuningGrid::new(vec![0.0]).unwrap();
        assert!(excitation_spectrum(&params, &pulse, &grid).unwrap().meta.warning.is_some());
    }

    #[test]
    fn overshoot_is_an_accuracy_error() {
        assert!(matches!(checked_population(1.0 + 1e-6, 0.0), Err(Error::Accuracy(_))));
        assert_eq!(checked_population(1.0 + 1e-12, 0.0).unwrap(), 1.0);
        assert!(matches!(checked_population(f64::NAN, 0.0), Err(Error::NonFinite(_))));
    }

    proptest! {
        #[test]
        fn spectrum_is_symmetric(beta in 0.0f64..8.0, ratio in 2.0f64..60.0, d in 0.0f64..4.0) {
            let pulse = ClockPulse::with_area(PI, 0.05).unwrap();
            let params = FloquetParams::new(beta, ratio * pulse.rabi_freq).unwrap();
            let model = FloquetModel::new(&params, &pulse).unwrap();
            let delta = d * params.drive_freq;
            prop_assert!((model.population(delta) - model.population(-delta)).abs() < 1e-12);
        }

        #[test]
        fn truncation_is_stable(beta in 0.0f64..8.0, d in -3.0f64..3.0, extra in 1usize..20) {
            let pulse = ClockPulse::with_area(PI, 0.05).unwrap();
            let wv = 20.0 * pulse.rabi_freq;
            let base = FloquetParams::new(beta, wv).unwrap();
            let wider = FloquetParams::with_order(beta, wv, base.truncation_order + extra).unwrap();
            let a = FloquetModel::new(&base, &pulse).unwrap().population(d * wv);
            let b = FloquetModel::new(&wider, &pulse).unwrap().population(d * wv);
            prop_assert!((a - b).abs() <= TRUNCATION_RESIDUE);
        }
    }
}
