//! Spring–mass coil-wound fiber accelerometer in its flat low-frequency
//! response: acceleration → fiber elongation → optical phase.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{check, Error, Result};
use crate::physics::{G_STD, MICRO_G};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensorConfig {
    pub turns: u32,
    /// Mechanical resonance, Hz (ordinary frequency).
    pub resonance_hz: f64,
    /// Inertial mass, kg, when the resonance is derived from mass and stiffness.
    pub mass_kg: Option<f64>,
    /// Effective stiffness, N/m.
    pub stiffness_n_per_m: Option<f64>,
    pub elasto_optic: f64,
    pub n_eff: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        SensorConfig {
            turns: 58,
            resonance_hz: 300.0,
            mass_kg: None,
            stiffness_n_per_m: None,
            elasto_optic: 0.78,
            n_eff: 1.45,
        }
    }
}

impl SensorConfig {
    /// Sensor whose resonance follows from √(K/m) / 2π.
    pub fn from_mass_stiffness(turns: u32, mass_kg: f64, stiffness: f64) -> Result<Self> {
        check("sensor.mass_kg", mass_kg, mass_kg > 0.0, "must be positive")?;
        check("sensor.stiffness_npm", stiffness, stiffness > 0.0, "must be positive")?;
        let sensor = SensorConfig {
            turns,
            resonance_hz: (stiffness / mass_kg).sqrt() / TAU,
            mass_kg: Some(mass_kg),
            stiffness_n_per_m: Some(stiffness),
            ..SensorConfig::default()
        };
        sensor.validate()?;
        Ok(sensor)
    }

    pub fn validate(&self) -> Result<()> {
        if self.turns < 1 {
            return Err(Error::invalid("sensor.turns", "need at least one turn"));
        }
        check("sensor.resonance_hz", self.resonance_hz, self.resonance_hz > 0.0, "must be positive")?;
        check(
            "sensor.elasto_optic",
            self.elasto_optic,
            self.elasto_optic > 0.0 && self.elasto_optic <= 1.0,
            "must lie in (0, 1]",
        )?;
        check("sensor.n_eff", self.n_eff, self.n_eff >= 1.0, "must be at least 1")?;
        if let (Some(m), Some(k)) = (self.mass_kg, self.stiffness_n_per_m) {
            check("sensor.mass_kg", m, m > 0.0, "must be positive")?;
            check("sensor.stiffness_npm", k, k > 0.0, "must be positive")?;
            let derived = (k / m).sqrt() / TAU;
            if ((derived - self.resonance_hz) / derived).abs() > 1e-9 {
                return Err(Error::invalid(
                    "sensor.resonance_hz",
                    format!("inconsistent with √(K/m)/2π = {derived} Hz"),
                ));
            }
        }
        Ok(())
    }

    /// Angular resonance ω₀ = 2π f₀.
    pub fn omega0(&self) -> f64 {
        TAU * self.resonance_hz
    }
}

/// Sinusoidal vibration applied to the sensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VibrationDrive {
    pub frequency_hz: f64,
    /// Peak acceleration, m/s².
    pub acceleration: f64,
}

impl VibrationDrive {
    pub fn in_micro_g(frequency_hz: f64, accel_ug: f64) -> Self {
        VibrationDrive {
            frequency_hz,
            acceleration: accel_ug * MICRO_G,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check("vibration.freq_hz", self.frequency_hz, self.frequency_hz > 0.0, "must be positive")?;
        check(
            "vibration.accel",
            self.acceleration,
            self.acceleration >= 0.0,
            "must be non-negative",
        )
    }

    pub fn omega(&self) -> f64 {
        TAU * self.frequency_hz
    }

    pub fn acceleration_g(&self) -> f64 {
        self.acceleration / G_STD
    }

    pub fn delta_l(&self, sensor: &SensorConfig) -> Result<f64> {
        delta_l(sensor, self.acceleration, self.frequency_hz)
    }
}

fn check_regime(sensor: &SensorConfig, f_v: f64) -> Result<()> {
    sensor.validate()?;
    check("f_v", f_v, f_v > 0.0, "must be positive")?;
    if f_v >= sensor.resonance_hz {
        return Err(Error::OutOfRegime(format!(
            "vibration at {f_v} Hz is not below the sensor resonance {} Hz",
            sensor.resonance_hz
        )));
    }
    Ok(())
}

/// Peak fiber elongation ΔL_m = 2 N a_v / ω₀², metres.
pub fn delta_l(sensor: &SensorConfig, a_v: f64, f_v: f64) -> Result<f64> {
    check_regime(sensor, f_v)?;
    check("a_v", a_v, a_v >= 0.0, "must be non-negative")?;
    let w0 = sensor.omega0();
    Ok(2.0 * sensor.turns as f64 * a_v / (w0 * w0))
}

/// Acceleration producing a given elongation; inverse of [`delta_l`].
pub fn acceleration_for_delta_l(sensor: &SensorConfig, delta_l_m: f64) -> Result<f64> {
    sensor.validate()?;
    check("delta_l_m", delta_l_m, delta_l_m >= 0.0, "must be non-negative")?;
    let w0 = sensor.omega0();
    Ok(delta_l_m * w0 * w0 / (2.0 * sensor.turns as f64))
}

/// Optical phase change Δφ = (4π n_eff / λ) C ΔL_m.
pub fn phase_change(delta_l_m: f64, wavelength: f64, n_eff: f64, elasto_optic: f64) -> Result<f64> {
    check("wavelength", wavelength, wavelength > 0.0, "must be positive")?;
    check("delta_l_m", delta_l_m, delta_l_m >= 0.0, "must be non-negative")?;
    Ok(4.0 * PI * n_eff / wavelength * elasto_optic * delta_l_m)
}

/// Phase sensitivity Δφ/a_v evaluated at one acceleration, rad/g.
pub fn sensitivity_at(sensor: &SensorConfig, a_v: f64, f_v: f64, wavelength: f64) -> Result<f64> {
    check("a_v", a_v, a_v > 0.0, "must be positive")?;
    let dl = delta_l(sensor, a_v, f_v)?;
    let phase = phase_change(dl, wavelength, sensor.n_eff, sensor.elasto_optic)?;
    Ok(phase / (a_v / G_STD))
}

/// Phase sensitivity, rad/g. Independent of amplitude in this model.
pub fn sensitivity(sensor: &SensorConfig, f_v: f64, wavelength: f64) -> Result<f64> {
    sensitivity_at(sensor, G_STD, f_v, wavelength)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const UG: f64 = MICRO_G;

    #[test]
    fn elongation_examples() {
        let s = SensorConfig::default();
        assert_eq!(delta_l(&s, 0.0, 200.0).unwrap(), 0.0);
        let dl = delta_l(&s, 8.0 * UG, 200.0).unwrap();
        assert!((dl / 2.5e-9 - 1.0).abs() < 0.05, "{dl}");
        assert_relative_eq!(delta_l(&s, 24.1 * UG, 5.0).unwrap(), 7.716e-9, max_relative = 1e-3);
    }

    #[test]
    fn elongation_scaling() {
        let s = SensorConfig::default();
        let base = delta_l(&s, 10.0 * UG, 50.0).unwrap();
        assert_relative_eq!(delta_l(&s, 30.0 * UG, 50.0).unwrap(), 3.0 * base, max_relative = 1e-14);
        let twice = SensorConfig { turns: 116, ..s };
        assert_relative_eq!(delta_l(&twice, 10.0 * UG, 50.0).unwrap(), 2.0 * base, max_relative = 1e-14);
        let stiff = SensorConfig { resonance_hz: 600.0, ..s };
        assert_relative_eq!(delta_l(&stiff, 10.0 * UG, 50.0).unwrap(), base / 4.0, max_relative = 1e-14);
        let back = acceleration_for_delta_l(&s, base).unwrap();
        assert_relative_eq!(back, 10.0 * UG, max_relative = 1e-14);
    }

    #[test]
    fn rejects_resonant_drive() {
        let s = SensorConfig::default();
        assert!(matches!(delta_l(&s, UG, 300.0), Err(Error::OutOfRegime(_))));
        assert!(matches!(sensitivity(&s, 450.0, 698e-9), Err(Error::OutOfRegime(_))));
    }

    #[test]
    fn phase_examples() {
        assert_eq!(phase_change(0.0, 698e-9, 1.45, 0.78).unwrap(), 0.0);
        let p = phase_change(2.5e-9, 698e-9, 1.45, 0.78).unwrap();
        assert_relative_eq!(p, 0.0509, max_relative = 1e-3);
        assert_relative_eq!(phase_change(5e-9, 698e-9, 1.45, 0.78).unwrap(), 2.0 * p, max_relative = 1e-14);
        assert!(phase_change(1e-9, 0.0, 1.45, 0.78).is_err());
    }

    #[test]
    fn sensitivity_examples() {
        let s = SensorConfig::default();
        let at_200 = sensitivity(&s, 200.0, 698e-9).unwrap();
        assert!((at_200 / 6.36e3 - 1.0).abs() < 0.03, "{at_200}");
        let at_5 = sensitivity_at(&s, 24.1 * UG, 5.0, 698e-9).unwrap();
        assert!((at_5 / 6.5e3 - 1.0).abs() < 0.03, "{at_5}");
        let ref_value = sensitivity_at(&s, UG, 200.0, 698e-9).unwrap();
        for a in [10.0, 100.0] {
            assert_relative_eq!(sensitivity_at(&s, a * UG, 200.0, 698e-9).unwrap(), ref_value, max_relative = 1e-9);
        }
    }

    #[test]
    fn mass_stiffness_form() {
        let m = 0.05;
        let k = m * (TAU * 300.0).powi(2);
        let s = SensorConfig::from_mass_stiffness(58, m, k).unwrap();
        assert_relative_eq!(s.resonance_hz, 300.0, max_relative = 1e-9);
        // 2 N m a / K equals the low-frequency form
        let a = 8.0 * UG;
        assert_relative_eq!(delta_l(&s, a, 200.0).unwrap(), 2.0 * 58.0 * m * a / k, max_relative = 1e-12);
        let bad = SensorConfig { resonance_hz: 301.0, ..s };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn sensor_invariants() {
        let s = SensorConfig::default();
        assert!(SensorConfig { turns: 0, ..s }.validate().is_err());
        assert!(SensorConfig { elasto_optic: 1.2, ..s }.validate().is_err());
        assert!(SensorConfig { resonance_hz: 0.0, ..s }.validate().is_err());
    }
}
