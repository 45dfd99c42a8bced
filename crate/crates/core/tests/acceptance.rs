//! Acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness so every line is printed by a plain
//! `cargo test`. The process exits nonzero if any criterion fails.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use latticevib::bessel::{bessel_j, bessel_j_orders};
use latticevib::detection::{acceleration_resolution, max_detectable_acceleration, min_detectable_acceleration};
use latticevib::floquet::excitation_spectrum;
use latticevib::lineshape::{convolve_fn, convolve_spectrum};
use latticevib::link_budget::{depth_vs_length_sweep, lattice_depth, power_decay_factor, tunneling_rate};
use latticevib::oracle::compare_spectra;
use latticevib::physics::{G_STD, MICRO_G, NM};
use latticevib::presets::{build_preset, fig1_lengths, fig4_traces, fig5_scenarios, FIG1_LOSSES, FIG1_REFLECTIVITIES};
use latticevib::transducer::{delta_l, sensitivity_at};
use latticevib::{
    AtomSpecies, ClockPulse, DetuningGrid, FiberLink, FloquetParams, LatticeConfig, Preset, Result, Scenario,
    SensorConfig, SpectrumResult,
};

// Tolerances.
const TOL_DELTA_L_REL: f64 = 0.05;
const TOL_SENSITIVITY_REL: f64 = 0.03;
const TOL_ORACLE_ABS: f64 = 0.05;
const TOL_ORACLE_UNMODULATED_ABS: f64 = 1e-8;
const TOL_KAPPA_REL: f64 = 1e-12;
const TOL_SQRT_SCALING_REL: f64 = 1e-12;
const TOL_J0_REL: f64 = 0.01;
const TOL_LINESHAPE_ABS: f64 = 1e-12;
const TOL_QUADRATURE_ABS: f64 = 1e-8;
const TOL_SUM_RULE_ABS: f64 = 1e-10;
const TOL_AREA_RATIO_REL: f64 = 0.10;
const TOL_DETECTION_REL: f64 = 0.25;
const MAX_DETECTABLE_BAND_MG: (f64, f64) = (1.0, 10.0);

type Criterion = (u32, &'static str, fn() -> Result<Outcome>);

struct Outcome {
    pass: bool,
    detail: String,
}

/// Accumulates sub-checks of one criterion.
struct Checks {
    pass: bool,
    parts: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Checks {
            pass: true,
            parts: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: String) {
        self.pass &= ok;
        self.parts.push(if ok { what } else { format!("[x] {what}") });
    }

    fn rel(&mut self, label: &str, got: f64, want: f64, tol: f64) {
        let err = (got - want).abs() / want.abs();
        self.check(err <= tol, format!("{label} {got:.6e} vs {want:.6e} (rel {err:.2e} <= {tol})"));
    }

    fn abs_max(&mut self, label: &str, got: f64, tol: f64) {
        self.check(got <= tol, format!("{label} {got:.3e} <= {tol:e}"));
    }

    fn done(self) -> Outcome {
        Outcome {
            pass: self.pass,
            detail: self.parts.join("; "),
        }
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Ω₀ = 2π·10 Hz π pulse with ω_v = ratio·Ω₀.
fn resolved_setup(beta: f64, ratio: f64) -> Result<(FloquetParams, ClockPulse)> {
    let omega0 = TAU * 10.0;
    Ok((FloquetParams::new(beta, ratio * omega0)?, ClockPulse::new(omega0, PI / omega0)?))
}

fn criterion_1() -> Result<Outcome> {
    let sensor = SensorConfig::default();
    let mut c = Checks::new();
    c.check(
        sensor.turns == 58 && sensor.resonance_hz == 300.0,
        format!("N = {}, f0 = {} Hz", sensor.turns, sensor.resonance_hz),
    );
    let dl = delta_l(&sensor, 8.0 * MICRO_G, 200.0)? / NM;
    c.rel("delta_L [nm]", dl, 2.5, TOL_DELTA_L_REL);
    Ok(c.done())
}

fn criterion_2() -> Result<Outcome> {
    let sensor = SensorConfig::default();
    let sr = AtomSpecies::strontium_87();
    let mut c = Checks::new();
    c.check(
        sensor.n_eff == 1.45 && sensor.elasto_optic == 0.78 && (sr.clock_wavelength - 698e-9).abs() < 1e-15,
        "n_eff 1.45, C 0.78, 698 nm".into(),
    );
    let s = sensitivity_at(&sensor, 8.0 * MICRO_G, 200.0, sr.clock_wavelength)?;
    c.rel("S(200 Hz) [rad/g]", s, 6.36e3, TOL_SENSITIVITY_REL);
    Ok(c.done())
}

fn criterion_3() -> Result<Outcome> {
    let sensor = SensorConfig::default();
    let sr = AtomSpecies::strontium_87();
    let mut c = Checks::new();
    let s = sensitivity_at(&sensor, 24.1 * MICRO_G, 5.0, sr.clock_wavelength)?;
    c.rel("S(5 Hz, 24.1 ug) [rad/g]", s, 6.5e3, TOL_SENSITIVITY_REL);
    Ok(c.done())
}

fn criterion_4() -> Result<Outcome> {
    let mut c = Checks::new();
    for (beta, ratio) in [(0.0, 20.0), (0.0, 100.0), (0.0653, 20.0), (1.0, 50.0), (5.22, 100.0)] {
        let (params, pulse) = resolved_setup(beta, ratio)?;
        let grid = DetuningGrid::symmetric(2.0 * params.drive_freq, 401)?;
        let dev = compare_spectra(&params, &pulse, &grid)?.max_abs_dev;
        let tol = if beta == 0.0 { TOL_ORACLE_UNMODULATED_ABS } else { TOL_ORACLE_ABS };
        c.abs_max(&format!("beta {beta}, ratio {ratio}:"), dev, tol);
    }
    Ok(c.done())
}

fn criterion_5() -> Result<Outcome> {
    let mut c = Checks::new();
    let mut worst_kappa = 0.0f64;
    for &r in &FIG1_REFLECTIVITIES {
        for &gamma in &FIG1_LOSSES {
            for &l in &fig1_lengths() {
                let link = FiberLink {
                    length_km: l,
                    loss_db_per_km: gamma,
                    fbg_reflectivity: r,
                    ..FiberLink::default()
                };
                let closed = r * 10f64.powf(-2.0 * gamma * l / 10.0);
                let got = power_decay_factor(&link)?;
                worst_kappa = worst_kappa.max(((got - closed) / closed).abs());
            }
        }
    }
    c.abs_max("kappa rel err", worst_kappa, TOL_KAPPA_REL);

    let lat = LatticeConfig::default();
    let u1 = lattice_depth(&lat, 1.0)?;
    let worst_sqrt = [0.9, 0.5, 0.25, 0.1, 1e-3]
        .iter()
        .map(|&k| Ok((lattice_depth(&lat, k)? / (u1 * f64::sqrt(k)) - 1.0).abs()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    c.abs_max("U/sqrt(kappa) spread", worst_sqrt, TOL_SQRT_SCALING_REL);

    let mut violations = 0usize;
    for &r in &FIG1_REFLECTIVITIES {
        let mut prev: Option<Vec<f64>> = None;
        for &gamma in &FIG1_LOSSES {
            let rows = depth_vs_length_sweep(&lat, &[gamma], &[r], &fig1_lengths())?;
            let d: Vec<f64> = rows.iter().map(|x| x.depth_er).collect();
            violations += d.windows(2).filter(|w| w[1] >= w[0]).count();
            if let Some(p) = &prev {
                violations += d.iter().zip(p).skip(1).filter(|(a, b)| a >= b).count();
            }
            prev = Some(d);
        }
    }
    c.check(violations == 0, format!("ordering violations {violations}"));

    c.rel("J0(20 Er) [Er]", tunneling_rate(20.0)?, 2.79e-3, TOL_J0_REL);
    Ok(c.done())
}

fn criterion_6() -> Result<Outcome> {
    let mut c = Checks::new();
    let phi = AtomSpecies::strontium_87().soc_phase;

    let level = 0.37;
    let worst_const = (-50..=50)
        .map(|i| (convolve_fn(|_| level, i as f64 * 7.3, 250.0, 512) - level).abs())
        .fold(0.0, f64::max);
    c.abs_max("constant", worst_const, TOL_LINESHAPE_ABS);

    let (params, pulse) = resolved_setup(0.8, 20.0)?;
    let grid = DetuningGrid::symmetric(3.0 * params.drive_freq, 601)?;
    let raw = excitation_spectrum(&params, &pulse, &grid)?;
    let zero = convolve_spectrum(&raw, 0.0, phi, 512)?;
    c.abs_max("J0 = 0", max_diff(&zero.populations, &raw.populations), TOL_LINESHAPE_ABS);

    let j0 = 15.0;
    let a = convolve_spectrum(&raw, j0, phi, 512)?;
    let rev: Vec<f64> = a.populations.iter().rev().copied().collect();
    c.abs_max("symmetry", max_diff(&a.populations, &rev), TOL_LINESHAPE_ABS);

    let b = convolve_spectrum(&raw, j0, phi, 1024)?;
    c.abs_max("512 vs 1024 nodes", max_diff(&a.populations, &b.populations), TOL_QUADRATURE_ABS);
    Ok(c.done())
}

fn criterion_7() -> Result<Outcome> {
    let mut c = Checks::new();
    let beta = 5.22;
    let max_order = 4;
    let (params, pulse) = resolved_setup(beta, 20.0)?;
    let wv = params.drive_freq;
    let grid = DetuningGrid::symmetric((max_order + 2) as f64 * wv, 400 * (max_order as usize + 2) + 1)?;
    let s = excitation_spectrum(&params, &pulse, &grid)?;
    let p = &s.populations;
    let missing: Vec<i32> = (-max_order..=max_order)
        .filter(|&m| {
            let centre = m as f64 * wv;
            !(1..p.len() - 1).any(|i| {
                p[i] >= p[i - 1] && p[i] >= p[i + 1] && (s.detunings[i] - centre).abs() <= pulse.rabi_freq
            })
        })
        .collect();
    c.check(missing.is_empty(), format!("peaks for |m| <= 4, missing {missing:?}"));

    let j = bessel_j_orders(80, beta);
    let sum = j[0] * j[0] + 2.0 * j[1..].iter().map(|x| x * x).sum::<f64>();
    c.abs_max("sum rule", (sum - 1.0).abs(), TOL_SUM_RULE_ABS);
    Ok(c.done())
}

fn first_sideband_peak(s: &SpectrumResult) -> f64 {
    let (wv, w) = (s.meta.omega_v, s.meta.rabi_freq);
    s.detunings
        .iter()
        .zip(&s.populations)
        .filter(|(d, _)| (**d - wv).abs() <= w)
        .map(|(_, p)| *p)
        .fold(0.0, f64::max)
}

fn criterion_8() -> Result<Outcome> {
    let mut c = Checks::new();
    let traces = fig4_traces()?;
    for f in [5.0, 0.5] {
        let mut rows = Vec::new();
        for t in traces.iter().filter(|t| t.scenario.vibration.frequency_hz == f) {
            let sc = &t.scenario;
            let grid = sc.detuning_grid()?;
            let raw = sc.raw_spectrum_at(sc.vibration.acceleration, &grid)?;
            let obs = sc.observed_spectrum_at(sc.vibration.acceleration, &grid)?;
            rows.push((sc.clock_pulse()?.area(), first_sideband_peak(&raw), first_sideband_peak(&obs), sc.beta()?));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let [(_, raw_pi, obs_pi, beta), (_, raw_3pi, obs_3pi, _)] = rows[..] else {
            c.check(false, format!("{f} Hz: expected a pi and a 3pi trace"));
            continue;
        };
        c.check(raw_3pi > raw_pi, format!("{f} Hz raw 3pi {raw_3pi:.4e} > pi {raw_pi:.4e}"));
        c.check(obs_3pi > obs_pi, format!("{f} Hz broadened 3pi {obs_3pi:.4e} > pi {obs_pi:.4e}"));
        c.rel(&format!("{f} Hz raw peak ratio"), raw_3pi / raw_pi, 9.0, TOL_AREA_RATIO_REL);
        let j1 = bessel_j(1, beta);
        let dominant = (1.5 * PI * j1).sin().powi(2) / (0.5 * PI * j1).sin().powi(2);
        c.rel(&format!("{f} Hz dominant-term ratio (beta {beta:.4})"), dominant, 9.0, TOL_AREA_RATIO_REL);
    }
    Ok(c.done())
}

fn detection_scenario(f_v: f64) -> Scenario {
    fig5_scenarios()
        .into_iter()
        .find(|s| s.vibration.frequency_hz == f_v)
        .expect("detection scenario")
}

fn criterion_9() -> Result<Outcome> {
    let mut c = Checks::new();
    let s200 = detection_scenario(200.0);
    let res200 = acceleration_resolution(&s200, &s200.criterion, 8.0 * MICRO_G)? / MICRO_G;
    c.rel("resolution 200 Hz [ug]", res200, 3.2, TOL_DETECTION_REL);

    let s5 = detection_scenario(5.0);
    let min5 = min_detectable_acceleration(&s5, &s5.criterion)? / MICRO_G;
    c.rel("min detectable 5 Hz [ug]", min5, 24.1, TOL_DETECTION_REL);
    let res5 = acceleration_resolution(&s5, &s5.criterion, 24.1 * MICRO_G)? / MICRO_G;
    c.rel("resolution 5 Hz [ug]", res5, 9.4, TOL_DETECTION_REL);

    let max_mg = max_detectable_acceleration(&Scenario::default())? / G_STD * 1e3;
    let (lo, hi) = MAX_DETECTABLE_BAND_MG;
    c.check(
        (lo..=hi).contains(&max_mg),
        format!("max detectable {max_mg:.3} mg in [{lo}, {hi}]"),
    );
    Ok(c.done())
}

fn build_all(threads: usize) -> Result<Vec<(String, String)>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
    pool.install(|| {
        let mut out = Vec::new();
        for p in Preset::ALL {
            out.extend(build_preset(p)?.into_iter().map(|a| (a.name, a.contents)));
        }
        Ok(out)
    })
}

fn criterion_10() -> Result<Outcome> {
    let mut c = Checks::new();
    let one = build_all(1)?;
    let two = build_all(2)?;
    let again = build_all(1)?;
    let bytes: usize = one.iter().map(|(_, s)| s.len()).sum();
    c.check(one == two, format!("{} artifacts, {bytes} bytes, 1 vs 2 threads", one.len()));
    c.check(one == again, "repeat run".into());
    Ok(c.done())
}

fn main() -> ExitCode {
    // libtest flags such as --nocapture are ignored.
    let criteria: [Criterion; 10] = [
        (1, "transduction golden number", criterion_1),
        (2, "sensitivity at 200 Hz", criterion_2),
        (3, "sensitivity at 5 Hz", criterion_3),
        (4, "oracle equivalence", criterion_4),
        (5, "link-budget properties", criterion_5),
        (6, "lineshape contracts", criterion_6),
        (7, "sideband structure", criterion_7),
        (8, "pulse-area enhancement", criterion_8),
        (9, "detection searches", criterion_9),
        (10, "determinism", criterion_10),
    ];
    let mut failed = 0;
    for (n, name, f) in criteria {
        let t = Instant::now();
        let outcome = f().unwrap_or_else(|e| Outcome {
            pass: false,
            detail: format!("error: {e}"),
        });
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "criterion {n:>2} {} {name} ({:.1} s): {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            outcome.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
