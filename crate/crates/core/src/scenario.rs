//! Simulation scenario and its plain-text configuration format.
//!
//! One `section.key = value` assignment per line. Blank lines and lines
//! starting with `#` are ignored. Keys carry their unit in the suffix and
//! are converted to SI on entry; unset keys keep the defaults of
//! [`Scenario::default`]. Unknown or repeated keys are errors.
//!
//! ```text
//! # 200 Hz operating point
//! link.length_km = 4
//! link.loss_dbkm = 2
//! vibration.freq_hz = 200
//! vibration.accel_ug = 8
//! pulse.area_pi = 3
//! ```

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::detection::DetectionCriterion;
use crate::error::{check, Error, Result};
use crate::floquet::{excitation_spectrum, modulation_depth, ClockPulse, DetuningGrid, FloquetParams, SpectrumResult};
use crate::lineshape::{band_half_width, convolve_spectrum, recommended_n_theta};
use crate::link_budget::{evaluate_link, renormalized_tunneling, zeta0, FiberLink, LatticeConfig, LinkBudget};
use crate::output::io_at;
use crate::physics::{CODATA_2018, MICRO_G, NM, UM};
use crate::transducer::{acceleration_for_delta_l, delta_l, sensitivity, SensorConfig, VibrationDrive};

/// Clock interrogation. With neither Rabi frequency nor area given the
/// pulse is a π pulse; without a duration it lasts ten vibration periods.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PulseSpec {
    /// Pulse area Ω₀ t′, rad.
    pub area: Option<f64>,
    /// Bare Rabi frequency, rad/s.
    pub rabi: Option<f64>,
    /// Interaction time, s.
    pub duration: Option<f64>,
}

impl PulseSpec {
    pub fn with_area(area: f64) -> Self {
        PulseSpec {
            area: Some(area),
            ..Default::default()
        }
    }

    pub fn resolve(&self, f_v: f64) -> Result<ClockPulse> {
        check("vibration.freq_hz", f_v, f_v > 0.0, "must be positive")?;
        let duration = self.duration.unwrap_or(10.0 / f_v);
        match (self.area, self.rabi) {
            (Some(_), Some(_)) => Err(Error::invalid(
                "pulse",
                "give either pulse.area_pi or pulse.rabi_rad_s, not both",
            )),
            (None, Some(rabi)) => ClockPulse::new(rabi, duration),
            (area, None) => ClockPulse::with_area(area.unwrap_or(PI), duration),
        }
    }
}

/// Symmetric detuning grid in units of the vibration frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    /// Half span as a multiple of ω_v.
    pub span_wv: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            span_wv: 4.0,
            points: 2001,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineshapeSpec {
    pub convolve: bool,
    /// Quadrature nodes; `None` picks [`recommended_n_theta`].
    pub n_theta: Option<usize>,
    /// Use the drive-renormalized tunneling J₀|J_0(ζ₀)| under vibration.
    pub renormalized: bool,
}

impl Default for LineshapeSpec {
    fn default() -> Self {
        LineshapeSpec {
            convolve: true,
            n_theta: None,
            renormalized: false,
        }
    }
}

/// Search settings for the detection limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionSpec {
    /// Operating point for the resolution search, m/s². Defaults to the
    /// scenario vibration amplitude.
    pub a_ref: Option<f64>,
    /// Elongation at which the fiber or coil leaves the linear regime, m.
    pub escape_threshold: f64,
    /// Upper end of the search bracket in modulation depth.
    pub beta_cap: f64,
    /// Sideband orders ±1..±n inspected by the metric.
    pub sidebands: usize,
    /// Detunings per sideband window.
    pub window_points: usize,
}

impl Default for DetectionSpec {
    fn default() -> Self {
        DetectionSpec {
            a_ref: None,
            escape_threshold: 1.0 * UM,
            beta_cap: 1.8,
            sidebands: 2,
            window_points: 61,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub link: FiberLink,
    pub lattice: LatticeConfig,
    pub sensor: SensorConfig,
    pub vibration: VibrationDrive,
    pub pulse: PulseSpec,
    pub grid: GridSpec,
    pub lineshape: LineshapeSpec,
    pub criterion: DetectionCriterion,
    pub detection: DetectionSpec,
    pub output_dir: Option<String>,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            name: "default".into(),
            link: FiberLink::default(),
            lattice: LatticeConfig::default(),
            sensor: SensorConfig::default(),
            vibration: VibrationDrive::in_micro_g(200.0, 8.0),
            pulse: PulseSpec::default(),
            grid: GridSpec::default(),
            lineshape: LineshapeSpec::default(),
            criterion: DetectionCriterion::default(),
            detection: DetectionSpec::default(),
            output_dir: None,
        }
    }
}

/// Every recognised key in serialization order.
pub const CONFIG_KEYS: &[&str] = &[
    "scenario.name",
    "link.length_km",
    "link.loss_dbkm",
    "link.reflectivity",
    "link.n_eff",
    "lattice.power_w",
    "lattice.waist_um",
    "species.mass_u",
    "species.lattice_wavelength_nm",
    "species.clock_wavelength_nm",
    "species.polarizability_au",
    "species.soc_phase_rad",
    "sensor.turns",
    "sensor.resonance_hz",
    "sensor.mass_kg",
    "sensor.stiffness_npm",
    "sensor.elasto_optic",
    "vibration.freq_hz",
    "vibration.accel_ug",
    "pulse.area_pi",
    "pulse.rabi_rad_s",
    "pulse.duration_s",
    "grid.span_wv",
    "grid.points",
    "lineshape.convolve",
    "lineshape.n_theta",
    "lineshape.renormalized",
    "criterion.noise_floor",
    "criterion.atom_number",
    "criterion.window_hz",
    "detection.a_ref_ug",
    "detection.escape_threshold_um",
    "detection.beta_cap",
    "detection.sidebands",
    "detection.window_points",
    "output.dir",
];

/// Keys that hold a real number, for parameter sweeps.
pub fn is_numeric_key(key: &str) -> bool {
    !matches!(
        key,
        "scenario.name" | "lineshape.convolve" | "lineshape.renormalized" | "output.dir"
    ) && CONFIG_KEYS.contains(&key)
}

fn parse_num(key: &str, raw: &str, line: usize) -> Result<f64> {
    let v: f64 = raw.parse().map_err(|_| Error::Config {
        line,
        message: format!("`{key}` expects a number, got `{raw}`"),
    })?;
    if !v.is_finite() {
        return Err(Error::Config {
            line,
            message: format!("`{key}` must be finite"),
        });
    }
    Ok(v)
}

fn parse_int<T: std::str::FromStr>(key: &str, raw: &str, line: usize) -> Result<T> {
    raw.parse().map_err(|_| Error::Config {
        line,
        message: format!("`{key}` expects a non-negative integer, got `{raw}`"),
    })
}

fn parse_bool(key: &str, raw: &str, line: usize) -> Result<bool> {
    match raw {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::Config {
            line,
            message: format!("`{key}` expects true or false, got `{raw}`"),
        }),
    }
}

/// Inverse of `y * scale` that survives a round trip through the parser:
/// searches neighbouring floats of `v / scale` for one that maps back to
/// `v` exactly.
fn unscale(v: f64, scale: f64) -> f64 {
    let guess = v / scale;
    if guess * scale == v || !guess.is_finite() || guess == 0.0 {
        return guess;
    }
    let bits = guess.to_bits();
    for k in 1..=16u64 {
        for cand in [f64::from_bits(bits.wrapping_add(k)), f64::from_bits(bits.wrapping_sub(k))] {
            if cand * scale == v {
                return cand;
            }
        }
    }
    guess
}

fn num(v: f64) -> String {
    format!("{v}")
}

impl Scenario {
    /// Sets one key from its textual value. `line` is reported in errors.
    pub fn apply_key(&mut self, key: &str, raw: &str, line: usize) -> Result<()> {
        let raw = raw.trim();
        let f = |s: &str| parse_num(key, s, line);
        match key {
            "scenario.name" => self.name = raw.to_string(),
            "link.length_km" => self.link.length_km = f(raw)?,
            "link.loss_dbkm" => self.link.loss_db_per_km = f(raw)?,
            "link.reflectivity" => self.link.fbg_reflectivity = f(raw)?,
            "link.n_eff" => {
                let n = f(raw)?;
                self.link.n_eff = n;
                self.sensor.n_eff = n;
            }
            "lattice.power_w" => self.lattice.power_w = f(raw)?,
            "lattice.waist_um" => self.lattice.waist_m = f(raw)? * UM,
            "species.mass_u" => self.lattice.species.mass = f(raw)? * CODATA_2018.atomic_mass_unit,
            "species.lattice_wavelength_nm" => self.lattice.species.lattice_wavelength = f(raw)? * NM,
            "species.clock_wavelength_nm" => self.lattice.species.clock_wavelength = f(raw)? * NM,
            "species.polarizability_au" => self.lattice.species.polarizability_au = f(raw)?,
            "species.soc_phase_rad" => self.lattice.species.soc_phase = f(raw)?,
            "sensor.turns" => self.sensor.turns = parse_int(key, raw, line)?,
            "sensor.resonance_hz" => self.sensor.resonance_hz = f(raw)?,
            "sensor.mass_kg" => self.sensor.mass_kg = Some(f(raw)?),
            "sensor.stiffness_npm" => self.sensor.stiffness_n_per_m = Some(f(raw)?),
            "sensor.elasto_optic" => self.sensor.elasto_optic = f(raw)?,
            "vibration.freq_hz" => self.vibration.frequency_hz = f(raw)?,
            "vibration.accel_ug" => self.vibration.acceleration = f(raw)? * MICRO_G,
            "pulse.area_pi" => self.pulse.area = Some(f(raw)? * PI),
            "pulse.rabi_rad_s" => self.pulse.rabi = Some(f(raw)?),
            "pulse.duration_s" => self.pulse.duration = Some(f(raw)?),
            "grid.span_wv" => self.grid.span_wv = f(raw)?,
            "grid.points" => self.grid.points = parse_int(key, raw, line)?,
            "lineshape.convolve" => self.lineshape.convolve = parse_bool(key, raw, line)?,
            "lineshape.n_theta" => self.lineshape.n_theta = Some(parse_int(key, raw, line)?),
            "lineshape.renormalized" => self.lineshape.renormalized = parse_bool(key, raw, line)?,
            "criterion.noise_floor" => self.criterion.noise_floor = f(raw)?,
            "criterion.atom_number" => self.criterion.atom_number = f(raw)?,
            "criterion.window_hz" => self.criterion.sideband_window = Some(f(raw)? * TAU),
            "detection.a_ref_ug" => self.detection.a_ref = Some(f(raw)? * MICRO_G),
            "detection.escape_threshold_um" => self.detection.escape_threshold = f(raw)? * UM,
            "detection.beta_cap" => self.detection.beta_cap = f(raw)?,
            "detection.sidebands" => self.detection.sidebands = parse_int(key, raw, line)?,
            "detection.window_points" => self.detection.window_points = parse_int(key, raw, line)?,
            "output.dir" => self.output_dir = Some(raw.to_string()),
            _ => {
                return Err(Error::UnknownKey {
                    key: key.to_string(),
                    line,
                })
            }
        }
        Ok(())
    }

    /// Current value of a key in config units; `None` for unset options.
    pub fn get_key(&self, key: &str) -> Result<Option<String>> {
        let s = &self.lattice.species;
        let v = match key {
            "scenario.name" => Some(self.name.clone()),
            "link.length_km" => Some(num(self.link.length_km)),
            "link.loss_dbkm" => Some(num(self.link.loss_db_per_km)),
            "link.reflectivity" => Some(num(self.link.fbg_reflectivity)),
            "link.n_eff" => Some(num(self.link.n_eff)),
            "lattice.power_w" => Some(num(self.lattice.power_w)),
            "lattice.waist_um" => Some(num(unscale(self.lattice.waist_m, UM))),
            "species.mass_u" => Some(num(unscale(s.mass, CODATA_2018.atomic_mass_unit))),
            "species.lattice_wavelength_nm" => Some(num(unscale(s.lattice_wavelength, NM))),
            "species.clock_wavelength_nm" => Some(num(unscale(s.clock_wavelength, NM))),
            "species.polarizability_au" => Some(num(s.polarizability_au)),
            "species.soc_phase_rad" => Some(num(s.soc_phase)),
            "sensor.turns" => Some(self.sensor.turns.to_string()),
            "sensor.resonance_hz" => Some(num(self.sensor.resonance_hz)),
            "sensor.mass_kg" => self.sensor.mass_kg.map(num),
            "sensor.stiffness_npm" => self.sensor.stiffness_n_per_m.map(num),
            "sensor.elasto_optic" => Some(num(self.sensor.elasto_optic)),
            "vibration.freq_hz" => Some(num(self.vibration.frequency_hz)),
            "vibration.accel_ug" => Some(num(unscale(self.vibration.acceleration, MICRO_G))),
            "pulse.area_pi" => self.pulse.area.map(|a| num(unscale(a, PI))),
            "pulse.rabi_rad_s" => self.pulse.rabi.map(num),
            "pulse.duration_s" => self.pulse.duration.map(num),
            "grid.span_wv" => Some(num(self.grid.span_wv)),
            "grid.points" => Some(self.grid.points.to_string()),
            "lineshape.convolve" => Some(self.lineshape.convolve.to_string()),
            "lineshape.n_theta" => self.lineshape.n_theta.map(|n| n.to_string()),
            "lineshape.renormalized" => Some(self.lineshape.renormalized.to_string()),
            "criterion.noise_floor" => Some(num(self.criterion.noise_floor)),
            "criterion.atom_number" => Some(num(self.criterion.atom_number)),
            "criterion.window_hz" => self.criterion.sideband_window.map(|w| num(unscale(w, TAU))),
            "detection.a_ref_ug" => self.detection.a_ref.map(|a| num(unscale(a, MICRO_G))),
            "detection.escape_threshold_um" => Some(num(unscale(self.detection.escape_threshold, UM))),
            "detection.beta_cap" => Some(num(self.detection.beta_cap)),
            "detection.sidebands" => Some(self.detection.sidebands.to_string()),
            "detection.window_points" => Some(self.detection.window_points.to_string()),
            "output.dir" => self.output_dir.clone(),
            _ => {
                return Err(Error::UnknownKey {
                    key: key.to_string(),
                    line: 0,
                })
            }
        };
        Ok(v)
    }

    /// Parses configuration text on top of the defaults and validates.
    pub fn parse_str(text: &str) -> Result<Scenario> {
        let mut sc = Scenario::default();
        let mut seen: Vec<&str> = Vec::new();
        let mut resonance_given = false;
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw_line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| Error::Config {
                line,
                message: format!("expected `key = value`, got `{trimmed}`"),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Config {
                    line,
                    message: "empty key".into(),
                });
            }
            if seen.contains(&key) {
                return Err(Error::Config {
                    line,
                    message: format!("`{key}` is set twice"),
                });
            }
            sc.apply_key(key, value, line)?;
            resonance_given |= key == "sensor.resonance_hz";
            seen.push(key);
        }
        match (sc.sensor.mass_kg, sc.sensor.stiffness_n_per_m) {
            (Some(m), Some(k)) if !resonance_given && m > 0.0 && k > 0.0 => {
                sc.sensor.resonance_hz = (k / m).sqrt() / TAU;
            }
            (Some(_), None) | (None, Some(_)) => {
                return Err(Error::invalid(
                    "sensor",
                    "sensor.mass_kg and sensor.stiffness_npm must be given together",
                ))
            }
            _ => {}
        }
        sc.validate()?;
        Ok(sc)
    }

    pub fn parse_config(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path).map_err(|e| io_at(path, e))?;
        Scenario::parse_str(&text)
    }

    /// Full configuration listing; parsing it reproduces `self`.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let mut section = "";
        for key in CONFIG_KEYS {
            let Some(value) = self.get_key(key).expect("listed key") else {
                continue;
            };
            let sec = key.split('.').next().unwrap_or("");
            if sec != section {
                if !section.is_empty() {
                    out.push('\n');
                }
                section = sec;
            }
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        self.link.validate()?;
        self.lattice.validate()?;
        self.sensor.validate()?;
        self.vibration.validate()?;
        if self.link.n_eff != self.sensor.n_eff {
            return Err(Error::invalid("link.n_eff", "fiber and sensor indices must agree"));
        }
        self.pulse.resolve(self.vibration.frequency_hz)?;
        check("grid.span_wv", self.grid.span_wv, self.grid.span_wv > 0.0, "must be positive")?;
        if self.grid.points < 2 {
            return Err(Error::invalid("grid.points", "need at least two points"));
        }
        if let Some(n) = self.lineshape.n_theta {
            if n < crate::lineshape::MIN_N_THETA {
                return Err(Error::invalid(
                    "lineshape.n_theta",
                    format!("need at least {} nodes", crate::lineshape::MIN_N_THETA),
                ));
            }
        }
        self.criterion.validate()?;
        let d = &self.detection;
        if let Some(a) = d.a_ref {
            check("detection.a_ref_ug", a, a > 0.0, "must be positive")?;
        }
        check(
            "detection.escape_threshold_um",
            d.escape_threshold,
            d.escape_threshold > 0.0,
            "must be positive",
        )?;
        check("detection.beta_cap", d.beta_cap, d.beta_cap > 0.0, "must be positive")?;
        if d.sidebands < 1 {
            return Err(Error::invalid("detection.sidebands", "need at least one sideband order"));
        }
        if d.window_points < 3 {
            return Err(Error::invalid("detection.window_points", "need at least three points"));
        }
        Ok(())
    }

    pub fn omega_v(&self) -> f64 {
        self.vibration.omega()
    }

    pub fn link_budget(&self) -> Result<LinkBudget> {
        evaluate_link(&self.lattice, &self.link)
    }

    pub fn clock_pulse(&self) -> Result<ClockPulse> {
        self.pulse.resolve(self.vibration.frequency_hz)
    }

    pub fn detuning_grid(&self) -> Result<DetuningGrid> {
        DetuningGrid::symmetric(self.grid.span_wv * self.omega_v(), self.grid.points)
    }

    pub fn delta_l_at(&self, accel: f64) -> Result<f64> {
        delta_l(&self.sensor, accel, self.vibration.frequency_hz)
    }

    pub fn delta_l(&self) -> Result<f64> {
        self.delta_l_at(self.vibration.acceleration)
    }

    pub fn beta_at(&self, accel: f64) -> Result<f64> {
        modulation_depth(
            self.delta_l_at(accel)?,
            self.sensor.n_eff,
            self.lattice.species.clock_wavelength,
        )
    }

    pub fn beta(&self) -> Result<f64> {
        self.beta_at(self.vibration.acceleration)
    }

    /// Acceleration giving modulation depth `beta`.
    pub fn accel_for_beta(&self, beta: f64) -> Result<f64> {
        check("beta", beta, beta >= 0.0, "must be non-negative")?;
        let dl = beta * self.lattice.species.clock_wavelength / (4.0 * PI * self.sensor.n_eff);
        acceleration_for_delta_l(&self.sensor, dl)
    }

    pub fn zeta0_at(&self, accel: f64) -> Result<f64> {
        zeta0(
            &self.lattice.species,
            self.vibration.frequency_hz,
            self.delta_l_at(accel)?,
            self.link.n_eff,
        )
    }

    /// Phase sensitivity of the sensor at the scenario frequency, rad/g.
    pub fn sensitivity(&self) -> Result<f64> {
        sensitivity(
            &self.sensor,
            self.vibration.frequency_hz,
            self.lattice.species.clock_wavelength,
        )
    }

    /// Tunneling (rad/s) that sets the band lineshape at acceleration `accel`.
    pub fn lineshape_tunneling_at(&self, accel: f64) -> Result<f64> {
        let j0 = self.link_budget()?.j0_rad_s;
        if self.lineshape.renormalized && accel > 0.0 {
            renormalized_tunneling(j0, self.zeta0_at(accel)?)
        } else {
            Ok(j0)
        }
    }

    /// Quadrature nodes for tunneling `j0` (rad/s).
    pub fn n_theta_for(&self, j0: f64) -> Result<usize> {
        if let Some(n) = self.lineshape.n_theta {
            return Ok(n);
        }
        let w = band_half_width(j0, self.lattice.species.soc_phase);
        Ok(recommended_n_theta(w, self.clock_pulse()?.duration))
    }

    /// Raw sideband spectrum at acceleration `accel` over `grid`.
    pub fn raw_spectrum_at(&self, accel: f64, grid: &DetuningGrid) -> Result<SpectrumResult> {
        let params = FloquetParams::new(self.beta_at(accel)?, self.omega_v())?;
        excitation_spectrum(&params, &self.clock_pulse()?, grid)
    }

    /// Spectrum as observed: band-broadened when the lineshape is enabled.
    pub fn observed_spectrum_at(&self, accel: f64, grid: &DetuningGrid) -> Result<SpectrumResult> {
        let raw = self.raw_spectrum_at(accel, grid)?;
        if !self.lineshape.convolve {
            return Ok(raw);
        }
        let j0 = self.lineshape_tunneling_at(accel)?;
        let n_theta = self.n_theta_for(j0)?;
        let mut out = convolve_spectrum(&raw, j0, self.lattice.species.soc_phase, n_theta)?;
        let wanted = 4.0 * band_half_width(j0, self.lattice.species.soc_phase) * raw.meta.duration;
        if (n_theta as f64) < wanted {
            let note = format!("lineshape uses {n_theta} nodes, below 4 W t' = {wanted:.0}; lines are under-resolved");
            out.meta.warning = Some(match out.meta.warning.take() {
                Some(w) => format!("{w}; {note}"),
                None => note,
            });
        }
        Ok(out)
    }

    pub fn observed_spectrum(&self) -> Result<SpectrumResult> {
        self.observed_spectrum_at(self.vibration.acceleration, &self.detuning_grid()?)
    }
}
