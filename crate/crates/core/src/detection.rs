//! Detection limits of the clock-demodulated sensor.
//!
//! The signal is the largest excess excitation, relative to the spectrum
//! without vibration, anywhere inside the first sideband windows
//! |δ − m ω_v| ≤ w, m = ±1..±n. A vibration is detected once that excess
//! reaches the noise floor.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::bessel::bessel_j;
use crate::error::{check, Error, Result};
use crate::floquet::{DetuningGrid, SpectrumResult};
use crate::physics::G_STD;
use crate::scenario::Scenario;
use crate::transducer::acceleration_for_delta_l;

/// Smallest acceleration probed, in g.
pub const BRACKET_FLOOR_G: f64 = 1e-9;
/// Relative width at which bisection stops.
pub const SEARCH_RTOL: f64 = 1e-3;
/// Slack allowed when checking that the metric rises across the bracket.
const MONOTONIC_SLACK: f64 = 1e-9;
/// Fraction of the first-sideband turnover area used as the bracket top.
/// At the turnover itself the summed sideband populations exceed one.
const TURNOVER_MARGIN: f64 = 0.9;
/// Argument of J₁ at its first maximum.
const J1_PEAK_ARG: f64 = 1.841_183_781_340_659;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionCriterion {
    /// Minimum excess excitation counted as a signal. Zero is accepted and
    /// makes every probed amplitude detectable.
    pub noise_floor: f64,
    /// Atoms per interrogation; informational unless the floor is derived
    /// from it with [`DetectionCriterion::projection_limited`].
    pub atom_number: f64,
    /// Half width of each sideband window, rad/s. Defaults to Ω₀.
    pub sideband_window: Option<f64>,
}

impl Default for DetectionCriterion {
    fn default() -> Self {
        DetectionCriterion {
            noise_floor: 0.02,
            atom_number: 1000.0,
            sideband_window: None,
        }
    }
}

/// Quantum projection noise of a population measured on `n` atoms at
/// P = ½, 1 / (2√N).
pub fn projection_noise(atom_number: f64) -> Result<f64> {
    check("atom_number", atom_number, atom_number >= 1.0, "must be at least 1")?;
    Ok(0.5 / atom_number.sqrt())
}

impl DetectionCriterion {
    /// Criterion whose floor is the projection noise of `atom_number` atoms.
    pub fn projection_limited(atom_number: f64) -> Result<Self> {
        Ok(DetectionCriterion {
            noise_floor: projection_noise(atom_number)?,
            atom_number,
            sideband_window: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        check(
            "criterion.noise_floor",
            self.noise_floor,
            (0.0..1.0).contains(&self.noise_floor),
            "must lie in [0, 1)",
        )?;
        check(
            "criterion.atom_number",
            self.atom_number,
            self.atom_number >= 1.0,
            "must be at least 1",
        )?;
        if let Some(w) = self.sideband_window {
            check("criterion.window_hz", w, w > 0.0, "must be positive")?;
        }
        Ok(())
    }

    /// Window half width for a pulse of Rabi frequency `rabi`.
    pub fn window(&self, rabi: f64) -> f64 {
        self.sideband_window.unwrap_or(rabi)
    }
}

fn in_sideband_window(delta: f64, omega_v: f64, window: f64) -> bool {
    let m = (delta / omega_v).round();
    [m - 1.0, m, m + 1.0]
        .iter()
        .any(|&k| k != 0.0 && (delta - k * omega_v).abs() <= window)
}

/// Largest excess excitation of `with` over `without` inside the first
/// sideband windows of half width `window` (rad/s).
pub fn signal_metric(with: &SpectrumResult, without: &SpectrumResult, window: f64) -> Result<f64> {
    check("window", window, window > 0.0, "must be positive")?;
    if with.detunings != without.detunings {
        return Err(Error::invalid("spectra", "detuning grids differ"));
    }
    let (a, b) = (&with.meta, &without.meta);
    if a.rabi_freq != b.rabi_freq || a.duration != b.duration || a.omega_v != b.omega_v {
        return Err(Error::invalid("spectra", "pulse or drive frequency differ"));
    }
    if with.populations.len() != with.detunings.len() || without.populations.len() != with.detunings.len() {
        return Err(Error::Data("population and detuning counts differ".into()));
    }
    let mut best: Option<f64> = None;
    for (i, &d) in with.detunings.iter().enumerate() {
        if in_sideband_window(d, a.omega_v, window) {
            let diff = with.populations[i] - without.populations[i];
            best = Some(best.map_or(diff, |m: f64| m.max(diff)));
        }
    }
    best.ok_or_else(|| Error::invalid("spectra", "no detuning falls inside a sideband window"))
}

/// Detunings covering the windows around m ω_v, m = ±1..±`orders`.
pub fn sideband_window_grid(omega_v: f64, window: f64, orders: usize, points: usize) -> Result<DetuningGrid> {
    check("omega_v", omega_v, omega_v > 0.0, "must be positive")?;
    check("window", window, window > 0.0, "must be positive")?;
    if points < 2 || orders < 1 {
        return Err(Error::invalid("window grid", "need at least one order and two points"));
    }
    let mut values = Vec::with_capacity(2 * orders * points);
    for m in 1..=orders as i32 {
        for sign in [-1.0, 1.0] {
            let c = sign * m as f64 * omega_v;
            for i in 0..points {
                let x = -window + 2.0 * window * i as f64 / (points - 1) as f64;
                values.push(c + x);
            }
        }
    }
    values.sort_by(f64::total_cmp);
    values.dedup();
    DetuningGrid::new(values)
}

/// Evaluates the metric against a cached no-vibration spectrum.
#[derive(Debug, Clone)]
pub struct MetricEvaluator {
    scenario: Scenario,
    grid: DetuningGrid,
    baseline: SpectrumResult,
    window: f64,
}

impl MetricEvaluator {
    pub fn new(scenario: &Scenario, criterion: &DetectionCriterion) -> Result<Self> {
        scenario.validate()?;
        criterion.validate()?;
        let pulse = scenario.clock_pulse()?;
        let window = criterion.window(pulse.rabi_freq);
        let d = &scenario.detection;
        let grid = sideband_window_grid(scenario.omega_v(), window, d.sidebands, d.window_points)?;
        let baseline = scenario.observed_spectrum_at(0.0, &grid)?;
        Ok(MetricEvaluator {
            scenario: scenario.clone(),
            grid,
            baseline,
            window,
        })
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn grid(&self) -> &DetuningGrid {
        &self.grid
    }

    /// Metric at peak acceleration `accel` (m/s²).
    pub fn metric(&self, accel: f64) -> Result<f64> {
        let with = self.scenario.observed_spectrum_at(accel, &self.grid)?;
        signal_metric(&with, &self.baseline, self.window)
    }
}

/// Top of the search bracket, m/s².
///
/// The bracket ends at the smaller of `detection.beta_cap` and the depth
/// where the first sideband population turns over, Ω₀ t′ J₁(β) = π,
/// less a 10% margin. Below it the metric grows with the amplitude.
pub fn bracket_top(scenario: &Scenario) -> Result<f64> {
    let area = scenario.clock_pulse()?.area();
    let mut beta = scenario.detection.beta_cap.min(J1_PEAK_ARG);
    let limit = TURNOVER_MARGIN * PI;
    if area * bessel_j(1, beta) > limit {
        let (mut lo, mut hi) = (0.0, beta);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if area * bessel_j(1, mid) > limit {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        beta = lo;
    }
    scenario.accel_for_beta(beta)
}

/// Smallest x in [lo, hi] with f(x) ≥ target by bisection, assuming f rises.
fn first_crossing<F>(f: F, lo: f64, hi: f64, target: f64, what: &str) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if hi <= lo {
        return Err(Error::OutOfRegime(format!("{what}: empty search bracket [{lo:e}, {hi:e}]")));
    }
    if target <= 0.0 {
        return Ok(lo);
    }
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = f(lo)?;
    let mut f_hi = f(hi)?;
    if f_hi < target {
        return Err(Error::NotDetectable(format!(
            "{what}: metric {f_hi:.4e} at {:.4e} g stays below {target}",
            hi / G_STD
        )));
    }
    if f_lo >= target {
        return Ok(lo);
    }
    while hi - lo > SEARCH_RTOL * hi {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid < f_lo - MONOTONIC_SLACK || f_mid > f_hi + MONOTONIC_SLACK {
            return Err(Error::OutOfRegime(format!(
                "{what}: metric is not monotonic near {:.4e} g",
                mid / G_STD
            )));
        }
        if f_mid >= target {
            hi = mid;
            f_hi = f_mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    Ok(hi)
}

fn bracket_floor() -> f64 {
    BRACKET_FLOOR_G * G_STD
}

/// Smallest peak acceleration (m/s²) whose metric reaches the noise floor.
pub fn min_detectable_acceleration(scenario: &Scenario, criterion: &DetectionCriterion) -> Result<f64> {
    let ev = MetricEvaluator::new(scenario, criterion)?;
    min_detectable_with(&ev, scenario, criterion)
}

fn min_detectable_with(ev: &MetricEvaluator, scenario: &Scenario, criterion: &DetectionCriterion) -> Result<f64> {
    first_crossing(
        |a| ev.metric(a),
        bracket_floor(),
        bracket_top(scenario)?,
        criterion.noise_floor,
        "minimum detectable acceleration",
    )
}

/// Smallest increment Δa (m/s²) above `a_ref` that changes the metric by
/// the noise floor.
pub fn acceleration_resolution(scenario: &Scenario, criterion: &DetectionCriterion, a_ref: f64) -> Result<f64> {
    let ev = MetricEvaluator::new(scenario, criterion)?;
    resolution_with(&ev, scenario, criterion, a_ref)
}

fn resolution_with(
    ev: &MetricEvaluator,
    scenario: &Scenario,
    criterion: &DetectionCriterion,
    a_ref: f64,
) -> Result<f64> {
    check("a_ref", a_ref, a_ref > 0.0, "must be positive")?;
    let top = bracket_top(scenario)?;
    if a_ref >= top {
        return Err(Error::OutOfRegime(format!(
            "reference {:.4e} g is above the monotonic range ending at {:.4e} g",
            a_ref / G_STD,
            top / G_STD
        )));
    }
    let base = ev.metric(a_ref)?;
    first_crossing(
        |da| Ok(ev.metric(a_ref + da)? - base),
        bracket_floor(),
        top - a_ref,
        criterion.noise_floor,
        "acceleration resolution",
    )
}

/// Acceleration (m/s²) at which the elongation reaches the escape
/// threshold of the fiber coil.
pub fn max_detectable_acceleration(scenario: &Scenario) -> Result<f64> {
    scenario.validate()?;
    acceleration_for_delta_l(&scenario.sensor, scenario.detection.escape_threshold)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSummary {
    pub name: String,
    pub vibration_hz: f64,
    pub length_km: f64,
    pub loss_db_per_km: f64,
    pub reflectivity: f64,
    pub waist_um: f64,
    pub pulse_area_pi: f64,
    pub duration_s: f64,
    pub depth_er: f64,
    pub j0_hz: f64,
    pub convolved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionSummary {
    pub noise_floor: f64,
    pub window_hz: f64,
    pub atom_number: f64,
    pub projection_noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionReport {
    pub scenario: ScenarioSummary,
    pub min_detectable_g: f64,
    pub resolution_g: f64,
    pub reference_g: f64,
    pub max_detectable_g: f64,
    pub sensitivity_rad_per_g: f64,
    pub criterion: CriterionSummary,
}

impl DetectionReport {
    /// Plain-text summary table.
    pub fn to_table(&self) -> String {
        let s = &self.scenario;
        let rows = [
            ("scenario", s.name.clone()),
            ("vibration", format!("{} Hz", s.vibration_hz)),
            (
                "link",
                format!("{} km, {} dB/km, R = {}", s.length_km, s.loss_db_per_km, s.reflectivity),
            ),
            ("lattice depth", format!("{:.3} Er (J0 = {:.4} Hz)", s.depth_er, s.j0_hz)),
            ("pulse", format!("{:.3} pi over {} s", s.pulse_area_pi, s.duration_s)),
            ("noise floor", format!("{}", self.criterion.noise_floor)),
            ("window", format!("{:.4} Hz", self.criterion.window_hz)),
            ("min detectable", format!("{:.4e} g", self.min_detectable_g)),
            (
                "resolution",
                format!("{:.4e} g at {:.4e} g", self.resolution_g, self.reference_g),
            ),
            ("max detectable", format!("{:.4e} g", self.max_detectable_g)),
            ("sensitivity", format!("{:.2} rad/g", self.sensitivity_rad_per_g)),
        ];
        let mut out = String::new();
        for (k, v) in rows {
            out.push_str(&format!("{k:<16} {v}\n"));
        }
        out
    }
}

/// All detection figures of merit for one scenario.
pub fn full_report(scenario: &Scenario, criterion: &DetectionCriterion) -> Result<DetectionReport> {
    let ev = MetricEvaluator::new(scenario, criterion)?;
    let a_ref = scenario.detection.a_ref.unwrap_or(scenario.vibration.acceleration);
    let min = min_detectable_with(&ev, scenario, criterion)?;
    let res = resolution_with(&ev, scenario, criterion, a_ref)?;
    let max = max_detectable_acceleration(scenario)?;
    let budget = scenario.link_budget()?;
    let pulse = scenario.clock_pulse()?;
    Ok(DetectionReport {
        scenario: ScenarioSummary {
            name: scenario.name.clone(),
            vibration_hz: scenario.vibration.frequency_hz,
            length_km: scenario.link.length_km,
            loss_db_per_km: scenario.link.loss_db_per_km,
            reflectivity: scenario.link.fbg_reflectivity,
            waist_um: scenario.lattice.waist_m / 1e-6,
            pulse_area_pi: pulse.area() / PI,
            duration_s: pulse.duration,
            depth_er: budget.depth_er,
            j0_hz: budget.j0_hz,
            convolved: scenario.lineshape.convolve,
        },
        min_detectable_g: min / G_STD,
        resolution_g: res / G_STD,
        reference_g: a_ref / G_STD,
        max_detectable_g: max / G_STD,
        sensitivity_rad_per_g: scenario.sensitivity()?,
        criterion: CriterionSummary {
            noise_floor: criterion.noise_floor,
            window_hz: ev.window() / TAU,
            atom_number: criterion.atom_number,
            projection_noise: projection_noise(criterion.atom_number)?,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::{excitation_spectrum, ClockPulse, FloquetParams};
    use crate::physics::MICRO_G;
    use crate::scenario::PulseSpec;
    use approx::assert_relative_eq;

    fn quick_scenario() -> Scenario {
        let mut sc = Scenario::default();
        sc.lineshape.convolve = false;
        sc
    }

    #[test]
    fn projection_noise_values() {
        assert_relative_eq!(projection_noise(1000.0).unwrap(), 0.015811, max_relative = 1e-4);
        assert_eq!(projection_noise(1.0).unwrap(), 0.5);
        assert!(projection_noise(0.5).is_err());
        let c = DetectionCriterion::projection_limited(2500.0).unwrap();
        assert_relative_eq!(c.noise_floor, 0.01, max_relative = 1e-12);
    }

    #[test]
    fn criterion_validation() {
        let c = DetectionCriterion::default();
        assert!(c.validate().is_ok());
        assert!(DetectionCriterion { noise_floor: 0.0, ..c }.validate().is_ok());
        assert!(DetectionCriterion { noise_floor: -0.1, ..c }.validate().is_err());
        assert!(DetectionCriterion { noise_floor: 1.0, ..c }.validate().is_err());
        assert!(DetectionCriterion {
            sideband_window: Some(0.0),
            ..c
        }
        .validate()
        .is_err());
    }

    #[test]
    fn window_membership() {
        let wv = 100.0;
        assert!(in_sideband_window(100.0, wv, 5.0));
        assert!(in_sideband_window(-204.0, wv, 5.0));
        assert!(!in_sideband_window(3.0, wv, 5.0));
        assert!(!in_sideband_window(150.0, wv, 5.0));
        // a wide window still excludes the carrier
        assert!(!in_sideband_window(0.0, wv, 80.0));
        assert!(in_sideband_window(30.0, wv, 80.0));
    }

    #[test]
    fn metric_on_identical_spectra_is_zero() {
        let wv = TAU * 200.0;
        let pulse = ClockPulse::with_area(PI, 0.05).unwrap();
        let grid = sideband_window_grid(wv, pulse.rabi_freq, 2, 21).unwrap();
        let s = excitation_spectrum(&FloquetParams::new(0.3, wv).unwrap(), &pulse, &grid).unwrap();
        assert_eq!(signal_metric(&s, &s, pulse.rabi_freq).unwrap(), 0.0);
    }

    #[test]
    fn metric_rejects_mismatched_grids() {
        let wv = TAU * 200.0;
        let pulse = ClockPulse::with_area(PI, 0.05).unwrap();
        let p = FloquetParams::new(0.3, wv).unwrap();
        let a = excitation_spectrum(&p, &pulse, &DetuningGrid::symmetric(2.0 * wv, 41).unwrap()).unwrap();
        let b = excitation_spectrum(&p, &pulse, &DetuningGrid::symmetric(2.0 * wv, 43).unwrap()).unwrap();
        assert!(matches!(signal_metric(&a, &b, pulse.rabi_freq), Err(Error::InvalidParameter { .. })));
        let other = ClockPulse::with_area(3.0 * PI, 0.05).unwrap();
        let c = excitation_spectrum(&p, &other, &DetuningGrid::symmetric(2.0 * wv, 41).unwrap()).unwrap();
        assert!(signal_metric(&a, &c, pulse.rabi_freq).is_err());
    }

    #[test]
    fn metric_matches_first_sideband_population() {
        // resolved sidebands: excess at δ = ω_v is sin²(Ω₀ J₁ t′/2)
        let sc = quick_scenario();
        let ev = MetricEvaluator::new(&sc, &DetectionCriterion::default()).unwrap();
        let a = 20.0 * MICRO_G;
        let beta = sc.beta_at(a).unwrap();
        let area = sc.clock_pulse().unwrap().area();
        let expected = (0.5 * area * bessel_j(1, beta)).sin().powi(2);
        let got = ev.metric(a).unwrap();
        assert!((got - expected).abs() < 2e-3, "{got} vs {expected}");
    }

    #[test]
    fn metric_increases_with_amplitude() {
        let sc = quick_scenario();
        let ev = MetricEvaluator::new(&sc, &DetectionCriterion::default()).unwrap();
        let top = bracket_top(&sc).unwrap();
        let mut last = -1.0;
        for k in 1..=20 {
            let m = ev.metric(top * k as f64 / 20.0).unwrap();
            assert!(m >= last - 1e-12);
            last = m;
        }
    }

    #[test]
    fn min_detectable_hits_floor() {
        let sc = quick_scenario();
        let c = DetectionCriterion::default();
        let a = min_detectable_acceleration(&sc, &c).unwrap();
        let ev = MetricEvaluator::new(&sc, &c).unwrap();
        assert!(ev.metric(a).unwrap() >= c.noise_floor);
        assert!(ev.metric(a * (1.0 - 2.0 * SEARCH_RTOL)).unwrap() < c.noise_floor);
    }

    #[test]
    fn min_detectable_monotone_in_floor() {
        let sc = quick_scenario();
        let mut last = 0.0;
        for floor in [0.005, 0.01, 0.02, 0.05, 0.1] {
            let c = DetectionCriterion {
                noise_floor: floor,
                ..Default::default()
            };
            let a = min_detectable_acceleration(&sc, &c).unwrap();
            assert!(a >= last);
            last = a;
        }
    }

    #[test]
    fn zero_floor_returns_bracket_bottom() {
        let sc = quick_scenario();
        let c = DetectionCriterion {
            noise_floor: 0.0,
            ..Default::default()
        };
        assert_eq!(min_detectable_acceleration(&sc, &c).unwrap(), BRACKET_FLOOR_G * G_STD);
    }

    #[test]
    fn unreachable_floor_is_not_detectable() {
        let sc = quick_scenario();
        let c = DetectionCriterion {
            noise_floor: 0.999,
            ..Default::default()
        };
        assert!(matches!(
            min_detectable_acceleration(&sc, &c),
            Err(Error::NotDetectable(_))
        ));
    }

    #[test]
    fn bracket_respects_pulse_area() {
        let mut sc = quick_scenario();
        let pi_top = bracket_top(&sc).unwrap();
        assert_relative_eq!(sc.beta_at(pi_top).unwrap(), 1.8, max_relative = 1e-12);
        sc.pulse = PulseSpec::with_area(3.0 * PI);
        let top = bracket_top(&sc).unwrap();
        let beta = sc.beta_at(top).unwrap();
        assert!(beta < 1.0);
        assert_relative_eq!(3.0 * PI * bessel_j(1, beta), 0.9 * PI, max_relative = 1e-9);
    }

    #[test]
    fn escape_threshold_limit() {
        let sc = Scenario::default();
        let a = max_detectable_acceleration(&sc).unwrap() / G_STD;
        assert_relative_eq!(a, 3.1235e-3, max_relative = 1e-3);
    }

    #[test]
    fn report_is_self_consistent() {
        let sc = quick_scenario();
        let c = DetectionCriterion::default();
        let r = full_report(&sc, &c).unwrap();
        assert_eq!(r.sensitivity_rad_per_g, sc.sensitivity().unwrap());
        assert!(r.min_detectable_g < r.max_detectable_g);
        assert!(r.resolution_g > 0.0);
        let json = serde_json::to_value(&r).unwrap();
        for key in [
            "scenario",
            "min_detectable_g",
            "resolution_g",
            "max_detectable_g",
            "sensitivity_rad_per_g",
            "criterion",
        ] {
            assert!(json.get(key).is_some(), "{key}");
        }
        assert!(json["criterion"].get("noise_floor").is_some());
        assert!(json["criterion"].get("window_hz").is_some());
        assert!(r.to_table().contains("min detectable"));
    }

    #[test]
    fn resolution_above_range_is_rejected() {
        let sc = quick_scenario();
        let top = bracket_top(&sc).unwrap();
        assert!(matches!(
            acceleration_resolution(&sc, &DetectionCriterion::default(), 2.0 * top),
            Err(Error::OutOfRegime(_))
        ));
    }
}
