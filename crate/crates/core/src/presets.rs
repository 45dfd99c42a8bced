//! Figure presets: fixed parameter sets whose outputs land in a directory
//! as CSV, JSON and SVG.
//!
//! | preset | content |
//! |---|---|
//! | fig1 | lattice depth vs fiber length for 4 losses × 3 reflectivities |
//! | fig3 | broadened spectra at 200 Hz and 50 Hz, 4 and 6 km at 4 dB/km, π pulse, ΔL = 200 nm |
//! | fig4 | 5 Hz (6 km, 2 dB/km) and 0.5 Hz (5 km, 3 dB/km) spectra, π and 3π pulses |
//! | fig5 | 3π spectra near the detection threshold at 200 Hz and 5 Hz plus detection reports |

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::detection::{full_report, DetectionReport};
use crate::error::{Error, Result};
use crate::floquet::SpectrumResult;
use crate::link_budget::{depth_vs_length_sweep, LatticeConfig, LinkBudget};
use crate::output::{depth_table, fmt_f64, to_json_string, write_text, Table};
use crate::physics::{G_STD, MICRO_G, NM};
use crate::scenario::{GridSpec, PulseSpec, Scenario};
use crate::svg::{render_table, PlotSpec};
use crate::transducer::acceleration_for_delta_l;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig1,
    Fig3,
    Fig4,
    Fig5,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Fig1, Preset::Fig3, Preset::Fig4, Preset::Fig5];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::invalid("preset", format!("unknown preset `{s}` (expected fig1, fig3, fig4 or fig5)")))
    }
}

/// In-memory preset output: file name and contents.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

fn artifact(name: impl Into<String>, contents: String) -> Artifact {
    Artifact {
        name: name.into(),
        contents,
    }
}

pub const FIG1_LOSSES: [f64; 4] = [2.0, 3.0, 4.0, 5.0];
pub const FIG1_REFLECTIVITIES: [f64; 3] = [0.9, 0.95, 0.99];

/// 0 to 8 km in 0.1 km steps.
pub fn fig1_lengths() -> Vec<f64> {
    (0..=80).map(|i| i as f64 / 10.0).collect()
}

fn fig1() -> Result<Vec<Artifact>> {
    let lattice = LatticeConfig::default();
    let rows = depth_vs_length_sweep(&lattice, &FIG1_LOSSES, &FIG1_REFLECTIVITIES, &fig1_lengths())?;
    let table = depth_table(&rows);
    let plot = PlotSpec {
        x_label: Some("fiber length (km)".into()),
        y_label: Some("lattice depth (Er)".into()),
        ..PlotSpec::new("length_km", &["depth_Er"])
            .grouped(&["loss_db_per_km", "reflectivity"])
            .titled("Lattice depth vs fiber length")
            .log_y(true)
    };
    #[derive(Serialize)]
    struct Meta<'a> {
        preset: &'static str,
        curves: usize,
        rows: usize,
        losses_db_per_km: &'a [f64],
        reflectivities: &'a [f64],
        lattice: &'a LatticeConfig,
    }
    let meta = Meta {
        preset: "fig1",
        curves: FIG1_LOSSES.len() * FIG1_REFLECTIVITIES.len(),
        rows: rows.len(),
        losses_db_per_km: &FIG1_LOSSES,
        reflectivities: &FIG1_REFLECTIVITIES,
        lattice: &lattice,
    };
    Ok(vec![
        artifact("fig1_depth.csv", table.to_csv_string()?),
        artifact("fig1_depth.json", to_json_string(&meta)?),
        artifact("fig1_depth.svg", render_table(&table, &plot)?),
    ])
}

/// One spectrum trace of a preset.
#[derive(Debug, Clone)]
pub struct Trace {
    pub label: String,
    pub scenario: Scenario,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceInfo {
    pub trace: String,
    pub f_v_hz: f64,
    pub accel_g: f64,
    pub delta_l_nm: f64,
    pub beta: f64,
    pub pulse_area_pi: f64,
    pub duration_s: f64,
    pub link: LinkBudget,
    pub n_theta: Option<usize>,
    pub peak_raw: f64,
    pub peak: f64,
    /// Largest raw population within ±Ω₀ of δ = +ω_v.
    pub first_sideband_raw: f64,
    pub first_sideband: f64,
    pub warning: Option<String>,
    pub config: String,
}

fn first_sideband_peak(spec: &SpectrumResult) -> f64 {
    let (wv, w) = (spec.meta.omega_v, spec.meta.rabi_freq);
    spec.detunings
        .iter()
        .zip(&spec.populations)
        .filter(|(d, _)| (**d - wv).abs() <= w)
        .map(|(_, p)| *p)
        .fold(0.0, f64::max)
}

/// Raw and (if enabled) broadened spectra of one trace.
pub fn trace_spectra(sc: &Scenario) -> Result<(SpectrumResult, SpectrumResult)> {
    let grid = sc.detuning_grid()?;
    let accel = sc.vibration.acceleration;
    let raw = sc.raw_spectrum_at(accel, &grid)?;
    let observed = if sc.lineshape.convolve {
        sc.observed_spectrum_at(accel, &grid)?
    } else {
        raw.clone()
    };
    Ok((raw, observed))
}

const TRACE_HEADER: [&str; 9] = [
    "trace",
    "f_v_hz",
    "length_km",
    "loss_db_per_km",
    "pulse_area_pi",
    "delta_L_nm",
    "detuning_hz",
    "detuning_wv",
    "population_raw",
];

fn spectra_artifacts(stem: &str, title: &str, traces: &[Trace]) -> Result<(Vec<Artifact>, Vec<TraceInfo>)> {
    let mut header: Vec<&str> = TRACE_HEADER.to_vec();
    header.push("population");
    let mut table = Table::new(&header);
    let mut infos = Vec::new();
    for tr in traces {
        let sc = &tr.scenario;
        let (raw, obs) = trace_spectra(sc)?;
        let pulse = sc.clock_pulse()?;
        let dl_nm = sc.delta_l()? / NM;
        let wv = sc.omega_v();
        for i in 0..raw.detunings.len() {
            let d = raw.detunings[i];
            let mut row = vec![tr.label.clone()];
            row.extend(
                [
                    sc.vibration.frequency_hz,
                    sc.link.length_km,
                    sc.link.loss_db_per_km,
                    pulse.area() / PI,
                    dl_nm,
                    d / TAU,
                    d / wv,
                    raw.populations[i],
                    obs.populations[i],
                ]
                .iter()
                .map(|&v| fmt_f64(v)),
            );
            table.push(row);
        }
        infos.push(TraceInfo {
            trace: tr.label.clone(),
            f_v_hz: sc.vibration.frequency_hz,
            accel_g: sc.vibration.acceleration / G_STD,
            delta_l_nm: dl_nm,
            beta: sc.beta()?,
            pulse_area_pi: pulse.area() / PI,
            duration_s: pulse.duration,
            link: sc.link_budget()?,
            n_theta: obs.meta.n_theta,
            peak_raw: raw.peak(),
            peak: obs.peak(),
            first_sideband_raw: first_sideband_peak(&raw),
            first_sideband: first_sideband_peak(&obs),
            warning: obs.meta.warning.clone(),
            config: sc.to_config_string(),
        });
    }
    let plot = PlotSpec {
        x_label: Some("detuning / vibration frequency".into()),
        y_label: Some("excitation fraction".into()),
        ..PlotSpec::new("detuning_wv", &["population"]).grouped(&["trace"]).titled(title)
    };
    let arts = vec![
        artifact(format!("{stem}.csv"), table.to_csv_string()?),
        artifact(format!("{stem}.json"), to_json_string(&infos)?),
        artifact(format!("{stem}.svg"), render_table(&table, &plot)?),
    ];
    Ok((arts, infos))
}

fn base_scenario(name: &str, f_v: f64, length_km: f64, loss: f64, area: f64) -> Scenario {
    let mut sc = Scenario {
        name: name.to_string(),
        pulse: PulseSpec::with_area(area),
        ..Scenario::default()
    };
    sc.link.length_km = length_km;
    sc.link.loss_db_per_km = loss;
    sc.vibration.frequency_hz = f_v;
    sc
}

fn with_delta_l(mut sc: Scenario, delta_l_m: f64) -> Result<Scenario> {
    sc.vibration.acceleration = acceleration_for_delta_l(&sc.sensor, delta_l_m)?;
    Ok(sc)
}

fn area_label(area: f64) -> &'static str {
    if area == PI {
        "pi"
    } else {
        "3pi"
    }
}

/// Traces of the fig3 preset.
pub fn fig3_traces() -> Result<Vec<Trace>> {
    let mut out = Vec::new();
    for f_v in [200.0, 50.0] {
        for length in [4.0, 6.0] {
            let label = format!("{f_v} Hz, {length} km");
            let mut sc = base_scenario(&label, f_v, length, 4.0, PI);
            sc.grid = GridSpec {
                span_wv: 8.0,
                points: 1601,
            };
            out.push(Trace {
                label,
                scenario: with_delta_l(sc, 200.0 * NM)?,
            });
        }
    }
    Ok(out)
}

/// Traces of the fig4 preset.
pub fn fig4_traces() -> Result<Vec<Trace>> {
    let mut out = Vec::new();
    for (f_v, length, loss) in [(5.0, 6.0, 2.0), (0.5, 5.0, 3.0)] {
        for area in [PI, 3.0 * PI] {
            let label = format!("{f_v} Hz, {}", area_label(area));
            let mut sc = base_scenario(&label, f_v, length, loss, area);
            sc.grid = GridSpec {
                span_wv: 3.0,
                points: 1201,
            };
            out.push(Trace {
                label,
                scenario: with_delta_l(sc, 5.0 * NM)?,
            });
        }
    }
    Ok(out)
}

/// Operating points of the fig5 detection reports (200 Hz at 8 µg, 5 Hz
/// at 24.1 µg), 3π pulse, 4 km at 2 dB/km.
pub fn fig5_scenarios() -> Vec<Scenario> {
    [(200.0, 8.0), (5.0, 24.1)]
        .into_iter()
        .map(|(f_v, ug)| {
            let mut sc = base_scenario(&format!("{f_v} Hz detection"), f_v, 4.0, 2.0, 3.0 * PI);
            sc.vibration.acceleration = ug * MICRO_G;
            sc.grid = GridSpec {
                span_wv: 3.0,
                points: 1201,
            };
            sc
        })
        .collect()
}

/// Threshold traces: 200 Hz at ΔL = 2.5, 3.0, 3.5 nm and 5 Hz at 14.7,
/// 24.1, 33.5 µg.
pub fn fig5_traces() -> Result<Vec<Trace>> {
    let scs = fig5_scenarios();
    let mut out = Vec::new();
    for dl in [2.5, 3.0, 3.5] {
        let label = format!("200 Hz, {dl} nm");
        let mut sc = with_delta_l(scs[0].clone(), dl * NM)?;
        sc.name = label.clone();
        out.push(Trace { label, scenario: sc });
    }
    for ug in [14.7, 24.1, 33.5] {
        let label = format!("5 Hz, {ug} ug");
        let mut sc = scs[1].clone();
        sc.vibration.acceleration = ug * MICRO_G;
        sc.name = label.clone();
        out.push(Trace { label, scenario: sc });
    }
    Ok(out)
}

/// Detection reports of the fig5 preset.
pub fn fig5_reports() -> Result<Vec<DetectionReport>> {
    fig5_scenarios().iter().map(|sc| full_report(sc, &sc.criterion)).collect()
}

/// Renders a preset in memory.
pub fn build_preset(preset: Preset) -> Result<Vec<Artifact>> {
    match preset {
        Preset::Fig1 => fig1(),
        Preset::Fig3 => Ok(spectra_artifacts("fig3_spectra", "Spectra at 200 Hz and 50 Hz", &fig3_traces()?)?.0),
        Preset::Fig4 => Ok(spectra_artifacts("fig4_spectra", "Pulse area at 5 Hz and 0.5 Hz", &fig4_traces()?)?.0),
        Preset::Fig5 => {
            let (mut arts, _) = spectra_artifacts("fig5_spectra", "Spectra near threshold", &fig5_traces()?)?;
            let reports = fig5_reports()?;
            let text: String = reports.iter().map(|r| r.to_table() + "\n").collect();
            arts.push(artifact("fig5_detection.json", to_json_string(&reports)?));
            arts.push(artifact("fig5_detection.txt", text));
            Ok(arts)
        }
    }
}

/// Trace summaries of a spectrum preset, without rendering files.
pub fn preset_trace_info(preset: Preset) -> Result<Vec<TraceInfo>> {
    let traces = match preset {
        Preset::Fig1 => return Err(Error::invalid("preset", "fig1 has no spectrum traces")),
        Preset::Fig3 => fig3_traces()?,
        Preset::Fig4 => fig4_traces()?,
        Preset::Fig5 => fig5_traces()?,
    };
    Ok(spectra_artifacts("traces", "", &traces)?.1)
}

/// Writes a preset into `dir` and returns the paths written.
pub fn run_preset(preset: Preset, dir: &Path) -> Result<Vec<PathBuf>> {
    let arts = build_preset(preset)?;
    let mut paths = Vec::with_capacity(arts.len());
    for a in arts {
        let p = dir.join(&a.name);
        write_text(&p, &a.contents)?;
        paths.push(p);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svg::count_polylines;

    #[test]
    fn names_parse() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!("fig2".parse::<Preset>().is_err());
    }

    #[test]
    fn fig1_has_twelve_curves() {
        let arts = build_preset(Preset::Fig1).unwrap();
        let csv = &arts[0].contents;
        assert_eq!(csv.lines().count(), 1 + 12 * 81);
        assert_eq!(count_polylines(&arts[2].contents), 12);
        assert!(csv.lines().nth(4).unwrap().starts_with("0.3,2,0.9,"));
    }

    #[test]
    fn trace_parameters() {
        let t = fig5_traces().unwrap();
        assert_eq!(t.len(), 6);
        let dl: Vec<f64> = t[..3].iter().map(|x| x.scenario.delta_l().unwrap() / NM).collect();
        for (a, b) in dl.iter().zip([2.5, 3.0, 3.5]) {
            assert!((a - b).abs() < 1e-9);
        }
        let f4 = fig4_traces().unwrap();
        assert_eq!(f4.len(), 4);
        assert_eq!(f4[3].scenario.link.length_km, 5.0);
        assert!((f4[1].scenario.clock_pulse().unwrap().area() - 3.0 * PI).abs() < 1e-12);
    }
}
