//! Golden-number regression suite.
//!
//! Records live in a plain-text file, one per line:
//!
//! ```text
//! id | op | inputs | expected | tolerance | kind | note
//! c2_sensitivity_200hz | sensitivity | freq_hz=200; accel_ug=8 | 6.36e3 | rel=0.03 | published | ...
//! ```
//!
//! `inputs` is a `;`-separated list of `name=number`; `tolerance` is
//! `rel=x` or `abs=x`; `kind` is `published` (a value quoted in the source
//! material), `computed` (obtained from an independent evaluation named in
//! the note) or `exact` (holds by construction). `#` starts a comment line.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::time::Instant;

use serde::Serialize;

use crate::bessel::{bessel_j, bessel_j_orders};
use crate::detection::{acceleration_resolution, max_detectable_acceleration, min_detectable_acceleration};
use crate::error::{Error, Result};
use crate::floquet::{excitation_spectrum, ClockPulse, DetuningGrid, FloquetParams};
use crate::lineshape::convolve_spectrum;
use crate::link_budget::{lattice_depth, power_decay_factor, tunneling_rate, FiberLink, LatticeConfig};
use crate::oracle::compare_spectra;
use crate::output::{fmt_f64, spectrum_table};
use crate::physics::{joules_to_hz, recoil_energy, AtomSpecies, G_STD, MICRO_G, NM};
use crate::presets::{fig1_lengths, fig4_traces, fig5_scenarios, FIG1_LOSSES, FIG1_REFLECTIVITIES};
use crate::scenario::Scenario;
use crate::transducer::{delta_l, sensitivity_at, SensorConfig};

/// Suite shipped with the crate.
pub const DEFAULT_SUITE: &str = include_str!("../golden/suite.txt");

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Published,
    Computed,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", content = "value", rename_all = "lowercase")]
pub enum Tolerance {
    Rel(f64),
    Abs(f64),
}

impl Tolerance {
    pub fn accepts(&self, observed: f64, expected: f64) -> bool {
        if !observed.is_finite() {
            return false;
        }
        match *self {
            Tolerance::Rel(t) => (observed - expected).abs() <= t * expected.abs(),
            Tolerance::Abs(t) => (observed - expected).abs() <= t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldenRecord {
    pub id: String,
    pub op: String,
    pub inputs: BTreeMap<String, f64>,
    pub expected: f64,
    pub tolerance: Tolerance,
    pub kind: Provenance,
    pub note: String,
}

fn suite_error(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

/// Parses suite text. Blank and `#` lines are skipped.
pub fn parse_suite(text: &str) -> Result<Vec<GoldenRecord>> {
    let mut out: Vec<GoldenRecord> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = t.split('|').map(str::trim).collect();
        if f.len() != 7 {
            return Err(suite_error(line, format!("expected 7 `|`-separated fields, got {}", f.len())));
        }
        let mut inputs = BTreeMap::new();
        for pair in f[2].split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| suite_error(line, format!("input `{pair}` is not name=value")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| suite_error(line, format!("input `{pair}` is not numeric")))?;
            inputs.insert(k.trim().to_string(), v);
        }
        let expected: f64 = f[3]
            .parse()
            .map_err(|_| suite_error(line, format!("expected value `{}` is not numeric", f[3])))?;
        let tolerance = match f[4].split_once('=') {
            Some(("rel", v)) => Tolerance::Rel(v.trim().parse().map_err(|_| suite_error(line, "bad tolerance"))?),
            Some(("abs", v)) => Tolerance::Abs(v.trim().parse().map_err(|_| suite_error(line, "bad tolerance"))?),
            _ => return Err(suite_error(line, format!("tolerance `{}` must be rel=x or abs=x", f[4]))),
        };
        let kind = match f[5] {
            "published" => Provenance::Published,
            "computed" => Provenance::Computed,
            "exact" => Provenance::Exact,
            other => return Err(suite_error(line, format!("unknown kind `{other}`"))),
        };
        if f[6].is_empty() {
            return Err(suite_error(line, "every record needs a note"));
        }
        if out.iter().any(|r| r.id == f[0]) {
            return Err(suite_error(line, format!("duplicate id `{}`", f[0])));
        }
        out.push(GoldenRecord {
            id: f[0].to_string(),
            op: f[1].to_string(),
            inputs,
            expected,
            tolerance,
            kind,
            note: f[6].to_string(),
        });
    }
    Ok(out)
}

struct Inputs<'a> {
    map: &'a BTreeMap<String, f64>,
}

impl Inputs<'_> {
    fn get(&self, key: &str) -> Result<f64> {
        self.map
            .get(key)
            .copied()
            .ok_or_else(|| Error::invalid("golden input", format!("missing `{key}`")))
    }

    fn or(&self, key: &str, default: f64) -> f64 {
        self.map.get(key).copied().unwrap_or(default)
    }
}

fn sensor() -> SensorConfig {
    SensorConfig::default()
}

fn detection_scenario(inp: &Inputs) -> Result<Scenario> {
    let f = inp.get("freq_hz")?;
    let mut sc = fig5_scenarios()
        .into_iter()
        .find(|s| s.vibration.frequency_hz == f)
        .ok_or_else(|| Error::invalid("freq_hz", "no detection scenario at this frequency"))?;
    if let Some(a) = inp.map.get("accel_ug") {
        sc.vibration.acceleration = a * MICRO_G;
    }
    Ok(sc)
}

/// Resolved-sideband π-pulse setup used by the structural checks:
/// Ω₀ = 2π·10 Hz, t′ = π/Ω₀, ω_v = ratio·Ω₀.
fn pi_pulse_setup(beta: f64, ratio: f64) -> Result<(FloquetParams, ClockPulse)> {
    let omega0 = TAU * 10.0;
    let pulse = ClockPulse::new(omega0, PI / omega0)?;
    Ok((FloquetParams::new(beta, ratio * omega0)?, pulse))
}

fn evaluate(op: &str, inp: &Inputs) -> Result<f64> {
    let sr = AtomSpecies::strontium_87();
    match op {
        "recoil_hz" => Ok(joules_to_hz(recoil_energy(&sr)?)),
        "delta_l_nm" => Ok(delta_l(&sensor(), inp.get("accel_ug")? * MICRO_G, inp.get("freq_hz")?)? / NM),
        "sensitivity" => sensitivity_at(
            &sensor(),
            inp.get("accel_ug")? * MICRO_G,
            inp.get("freq_hz")?,
            sr.clock_wavelength,
        ),
        "oracle_max_dev" => {
            let (params, pulse) = pi_pulse_setup(inp.get("beta")?, inp.get("ratio")?)?;
            let grid = DetuningGrid::symmetric(2.0 * params.drive_freq, inp.or("points", 401.0) as usize)?;
            Ok(compare_spectra(&params, &pulse, &grid)?.max_abs_dev)
        }
        "kappa" => power_decay_factor(&FiberLink {
            length_km: inp.get("length_km")?,
            loss_db_per_km: inp.get("loss_dbkm")?,
            fbg_reflectivity: inp.get("reflectivity")?,
            ..FiberLink::default()
        }),
        "depth_sqrt_ratio" => {
            let lat = LatticeConfig::default();
            let k = inp.get("kappa")?;
            Ok(lattice_depth(&lat, k)? / lattice_depth(&lat, 1.0)? / k.sqrt())
        }
        "depth_order_violations" => {
            let lat = LatticeConfig::default();
            let mut bad = 0usize;
            for &r in &FIG1_REFLECTIVITIES {
                let mut prev_loss_row: Option<Vec<f64>> = None;
                for &loss in &FIG1_LOSSES {
                    let rows = crate::link_budget::depth_vs_length_sweep(&lat, &[loss], &[r], &fig1_lengths())?;
                    let d: Vec<f64> = rows.iter().map(|x| x.depth_er).collect();
                    bad += d.windows(2).filter(|w| w[1] >= w[0]).count();
                    if let Some(p) = &prev_loss_row {
                        // first point (L = 0) is loss independent
                        bad += d.iter().zip(p).skip(1).filter(|(a, b)| a >= b).count();
                    }
                    prev_loss_row = Some(d);
                }
            }
            Ok(bad as f64)
        }
        "j0_er" => tunneling_rate(inp.get("depth_er")?),
        "convolve_constant_err" => {
            let c = inp.or("level", 0.37);
            let half_width = inp.or("half_width", 250.0);
            let worst = (-50..=50)
                .map(|i| crate::lineshape::convolve_fn(|_| c, i as f64 * 7.3, half_width, 512))
                .map(|v| (v - c).abs())
                .fold(0.0, f64::max);
            Ok(worst)
        }
        "convolve_zero_tunneling_err" | "convolved_symmetry_err" | "n_theta_convergence" => {
            let (params, pulse) = pi_pulse_setup(inp.or("beta", 0.8), inp.or("ratio", 20.0))?;
            let grid = DetuningGrid::symmetric(3.0 * params.drive_freq, 601)?;
            let raw = excitation_spectrum(&params, &pulse, &grid)?;
            let phi = sr.soc_phase;
            let j0 = inp.or("j0_rad_s", 15.0);
            let max_diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            match op {
                "convolve_zero_tunneling_err" => {
                    let c = convolve_spectrum(&raw, 0.0, phi, 512)?;
                    Ok(max_diff(&c.populations, &raw.populations))
                }
                "convolved_symmetry_err" => {
                    let c = convolve_spectrum(&raw, j0, phi, 512)?;
                    let rev: Vec<f64> = c.populations.iter().rev().copied().collect();
                    Ok(max_diff(&c.populations, &rev))
                }
                _ => {
                    let a = convolve_spectrum(&raw, j0, phi, 512)?;
                    let b = convolve_spectrum(&raw, j0, phi, 1024)?;
                    Ok(max_diff(&a.populations, &b.populations))
                }
            }
        }
        "bessel_sum_rule_err" => {
            let beta = inp.get("beta")?;
            let j = bessel_j_orders(60 + beta.ceil() as usize, beta);
            let s = j[0] * j[0] + 2.0 * j[1..].iter().map(|x| x * x).sum::<f64>();
            Ok((s - 1.0).abs())
        }
        "sideband_peaks_missing" => {
            let beta = inp.get("beta")?;
            let max_order = inp.get("max_order")? as i32;
            let (params, pulse) = pi_pulse_setup(beta, inp.or("ratio", 20.0))?;
            let wv = params.drive_freq;
            let span = (max_order + 2) as f64 * wv;
            let grid = DetuningGrid::symmetric(span, 400 * (max_order as usize + 2) + 1)?;
            let s = excitation_spectrum(&params, &pulse, &grid)?;
            let p = &s.populations;
            let missing = (-max_order..=max_order)
                .filter(|&m| {
                    let c = m as f64 * wv;
                    !(1..p.len() - 1).any(|i| {
                        p[i] >= p[i - 1] && p[i] >= p[i + 1] && (s.detunings[i] - c).abs() <= pulse.rabi_freq
                    })
                })
                .count();
            Ok(missing as f64)
        }
        "pulse_area_ratio" => {
            let f = inp.get("freq_hz")?;
            let traces = fig4_traces()?;
            let mut peaks = Vec::new();
            for t in traces.iter().filter(|t| t.scenario.vibration.frequency_hz == f) {
                let sc = &t.scenario;
                let raw = sc.raw_spectrum_at(sc.vibration.acceleration, &sc.detuning_grid()?)?;
                let (wv, w) = (raw.meta.omega_v, raw.meta.rabi_freq);
                let peak = raw
                    .detunings
                    .iter()
                    .zip(&raw.populations)
                    .filter(|(d, _)| (**d - wv).abs() <= w)
                    .map(|(_, p)| *p)
                    .fold(0.0, f64::max);
                peaks.push((t.scenario.clock_pulse()?.area(), peak));
            }
            peaks.sort_by(|a, b| a.0.total_cmp(&b.0));
            match peaks.as_slice() {
                [(_, pi), (_, three_pi)] => Ok(three_pi / pi),
                _ => Err(Error::invalid("freq_hz", "no fig4 traces at this frequency")),
            }
        }
        "small_beta_area_ratio" => {
            let j1 = bessel_j(1, inp.get("beta")?);
            Ok((1.5 * PI * j1).sin().powi(2) / (0.5 * PI * j1).sin().powi(2))
        }
        "min_detectable_ug" => {
            let sc = detection_scenario(inp)?;
            Ok(min_detectable_acceleration(&sc, &sc.criterion)? / MICRO_G)
        }
        "resolution_ug" => {
            let sc = detection_scenario(inp)?;
            let a_ref = sc.vibration.acceleration;
            Ok(acceleration_resolution(&sc, &sc.criterion, a_ref)? / MICRO_G)
        }
        "max_detectable_mg" => {
            let mut sc = Scenario::default();
            sc.detection.escape_threshold = inp.or("threshold_um", 1.0) * 1e-6;
            Ok(max_detectable_acceleration(&sc)? / G_STD * 1e3)
        }
        "thread_invariance" => {
            let sc = &fig5_scenarios()[0];
            let render = |threads: usize| -> Result<String> {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .map_err(|e| Error::Accuracy(e.to_string()))?;
                pool.install(|| spectrum_table(&sc.observed_spectrum()?).to_csv_string())
            };
            let one = render(1)?;
            let mismatched = [2usize, 3].iter().map(|&n| render(n)).collect::<Result<Vec<_>>>()?;
            Ok(mismatched.iter().filter(|s| **s != one).count() as f64)
        }
        other => Err(Error::invalid("op", format!("no operation bound to `{other}`"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldenResult {
    pub id: String,
    pub op: String,
    pub observed: Option<f64>,
    pub expected: f64,
    pub tolerance: Tolerance,
    pub kind: Provenance,
    pub pass: bool,
    pub error: Option<String>,
    pub note: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldenReport {
    pub passed: usize,
    pub failed: usize,
    pub results: Vec<GoldenResult>,
}

impl GoldenReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<36} {:<6} {:>14} {:>14} {:>12} {:>8}\n",
            "id", "result", "observed", "expected", "tolerance", "seconds"
        );
        for r in &self.results {
            let obs = r.observed.map_or_else(|| "-".to_string(), |v| format!("{v:.6e}"));
            let tol = match r.tolerance {
                Tolerance::Rel(t) => format!("rel {}", fmt_f64(t)),
                Tolerance::Abs(t) => format!("abs {}", fmt_f64(t)),
            };
            out.push_str(&format!(
                "{:<36} {:<6} {:>14} {:>14.6e} {:>12} {:>8.2}\n",
                r.id,
                if r.pass { "pass" } else { "FAIL" },
                obs,
                r.expected,
                tol,
                r.seconds
            ));
            if let Some(e) = &r.error {
                out.push_str(&format!("    error: {e}\n"));
            }
        }
        out.push_str(&format!("{} passed, {} failed\n", self.passed, self.failed));
        out
    }
}

/// Evaluates a single record.
pub fn run_record(rec: &GoldenRecord) -> GoldenResult {
    let start = Instant::now();
    let outcome = evaluate(&rec.op, &Inputs { map: &rec.inputs });
    let seconds = start.elapsed().as_secs_f64();
    let (observed, error) = match outcome {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    };
    GoldenResult {
        id: rec.id.clone(),
        op: rec.op.clone(),
        observed,
        expected: rec.expected,
        tolerance: rec.tolerance,
        kind: rec.kind,
        pass: observed.is_some_and(|v| rec.tolerance.accepts(v, rec.expected)),
        error,
        note: rec.note.clone(),
        seconds,
    }
}

pub fn run_golden_suite(records: &[GoldenRecord]) -> GoldenReport {
    let results: Vec<GoldenResult> = records.iter().map(run_record).collect();
    let passed = results.iter().filter(|r| r.pass).count();
    GoldenReport {
        passed,
        failed: results.len() - passed,
        results,
    }
}

/// Criterion numbers covered by a suite, from the `c<N>_` id prefixes.
pub fn covered_criteria(records: &[GoldenRecord]) -> Vec<u32> {
    let mut v: Vec<u32> = records
        .iter()
        .filter_map(|r| r.id.strip_prefix('c')?.split('_').next()?.parse().ok())
        .collect();
    v.sort_unstable();
    v.dedup();
    v
}
