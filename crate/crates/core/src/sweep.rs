//! One-parameter sweeps over a scenario.

use rayon::prelude::*;
use serde::Serialize;

use crate::detection::MetricEvaluator;
use crate::error::{Error, Result};
use crate::output::{fmt_f64, Table};
use crate::physics::{G_STD, NM};
use crate::scenario::{is_numeric_key, Scenario};

/// Columns after the swept key.
pub const SWEEP_COLUMNS: [&str; 9] = [
    "kappa",
    "depth_Er",
    "J0_Hz",
    "delta_L_nm",
    "beta",
    "zeta0",
    "sensitivity_rad_per_g",
    "accel_g",
    "signal_metric",
];

/// Derived quantities for one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub kappa: f64,
    pub depth_er: f64,
    pub j0_hz: f64,
    pub delta_l_nm: f64,
    pub beta: f64,
    pub zeta0: f64,
    pub sensitivity: f64,
    pub accel_g: f64,
    pub signal_metric: f64,
}

impl SweepRow {
    pub fn numbers(&self) -> [f64; 10] {
        [
            self.value,
            self.kappa,
            self.depth_er,
            self.j0_hz,
            self.delta_l_nm,
            self.beta,
            self.zeta0,
            self.sensitivity,
            self.accel_g,
            self.signal_metric,
        ]
    }
}

/// Evaluates the chain of `scenario`; `value` is echoed into the row.
pub fn evaluate_row(scenario: &Scenario, value: f64) -> Result<SweepRow> {
    scenario.validate()?;
    let budget = scenario.link_budget()?;
    let accel = scenario.vibration.acceleration;
    let metric = MetricEvaluator::new(scenario, &scenario.criterion)?.metric(accel)?;
    Ok(SweepRow {
        value,
        kappa: budget.kappa,
        depth_er: budget.depth_er,
        j0_hz: budget.j0_hz,
        delta_l_nm: scenario.delta_l()? / NM,
        beta: scenario.beta()?,
        zeta0: scenario.zeta0_at(accel)?,
        sensitivity: scenario.sensitivity()?,
        accel_g: accel / G_STD,
        signal_metric: metric,
    })
}

/// Result of a sweep over one configuration key.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub key: String,
    pub rows: Vec<SweepRow>,
}

impl Sweep {
    pub fn table(&self) -> Table {
        let mut header = vec![self.key.clone()];
        header.extend(SWEEP_COLUMNS.iter().map(|s| s.to_string()));
        let mut t = Table::new(&header);
        for r in &self.rows {
            t.push_numbers(&r.numbers());
        }
        t
    }
}

/// Re-evaluates `base` with `key` set to each of `values` in turn.
pub fn sweep(base: &Scenario, key: &str, values: &[f64]) -> Result<Sweep> {
    if !is_numeric_key(key) {
        return Err(Error::invalid("axis", format!("`{key}` is not a sweepable numeric key")));
    }
    if values.is_empty() {
        return Err(Error::invalid("values", "need at least one value"));
    }
    let rows = values
        .par_iter()
        .map(|&v| {
            let mut sc = base.clone();
            sc.apply_key(key, &fmt_f64(v), 0)?;
            evaluate_row(&sc, v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sweep {
        key: key.to_string(),
        rows,
    })
}

/// Parses `start:stop:count` (inclusive, evenly spaced) or a comma list.
pub fn parse_values(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::invalid("values", format!("cannot parse `{spec}`"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [a, b, n] => {
            let (a, b) = (num(a)?, num(b)?);
            let n: usize = n.trim().parse().map_err(|_| bad())?;
            match n {
                0 => return Err(bad()),
                1 => vec![a],
                _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
            }
        }
        [_] => spec.split(',').map(num).collect::<Result<Vec<_>>>()?,
        _ => return Err(bad()),
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    Ok(values)
}
