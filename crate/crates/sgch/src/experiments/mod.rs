//! Numerical experiments behind the presets and the acceptance suite. Each
//! returns its checks together with the rows and tables the command line
//! writes to disk.

mod asymptotics;
mod breaking;
mod divergence;
mod operators;
mod regularization;
mod stability;

pub use asymptotics::*;
pub use breaking::*;
pub use divergence::*;
pub use operators::*;
pub use regularization::*;
pub use stability::*;

use serde::Serialize;
use sgch_core::fit::fit_power_law;
use sgch_core::noise::WienerStream;
use sgch_core::{Field, Grid};

/// Thresholds applied by the checks.
pub mod tolerance {
    pub const OPERATOR_IDENTITY: f64 = 1e-10;
    pub const KERNEL_QUADRATURE: f64 = 1e-6;
    pub const BUMP_RATIO: f64 = 0.05;
    pub const LOW_FREQ_SLOPE: f64 = 0.05;
    pub const LOW_FREQ_GROWTH: f64 = 3.0;
    pub const RESIDUAL_SLOPE_MARGIN: f64 = 0.15;
    pub const RESIDUAL_CONSISTENCY: f64 = 1e-8;
    pub const INITIAL_GAP_SLOPE: f64 = 0.05;
    pub const NORMALIZED_GAP: f64 = 0.5;
    pub const TRACKING_SLOPE_MARGIN: f64 = 0.1;
    pub const AMPLITUDE_DRIFT: f64 = 0.1;
    pub const CAP_TIME_CHANGE: f64 = 0.05;
    pub const ENERGY_DRIFT: f64 = 1e-6;
    pub const ENERGY_IMPROVEMENT: f64 = 4.0;
    pub const STRONG_ORDER: f64 = 0.4;
    /// Relative agreement of the fitted Lyapunov constant on a wider grid.
    pub const LYAPUNOV_STABILITY: f64 = 1e-9;
    /// Growth of the fitted constant that flags an unbounded requirement.
    pub const LYAPUNOV_DIVERGENCE: f64 = 10.0;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Rows of plot data destined for a CSV file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

pub fn cell(x: f64) -> String {
    x.to_string()
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    /// JSONL rows, each with a `kind` field.
    pub records: Vec<serde_json::Value>,
    pub tables: Vec<Table>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn merge(&mut self, other: Outcome) {
        self.checks.extend(other.checks);
        self.records.extend(other.records);
        self.tables.extend(other.tables);
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, passed, detail));
    }

    fn record(&mut self, kind: &str, mut row: serde_json::Value) {
        if let Some(map) = row.as_object_mut() {
            map.insert("kind".into(), kind.into());
        }
        self.records.push(row);
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("numerical breakdown at t = {time}")]
    Breakdown { time: f64 },
    #[error(transparent)]
    Core(sgch_core::Error),
}

impl From<sgch_core::Error> for ExperimentError {
    fn from(e: sgch_core::Error) -> Self {
        match e {
            sgch_core::Error::NonFinite { time } => ExperimentError::Breakdown { time },
            other => ExperimentError::Core(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

/// Log-log slope, NaN when the data cannot be fitted.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    fit_power_law(xs, ys).map(|f| f.slope).unwrap_or(f64::NAN)
}

/// `c0 + sum_j (a_j cos + b_j sin)(pi j x / L) / j^decay` with Gaussian
/// coefficients from a seeded stream.
pub fn random_trig_field(grid: &Grid, stream: &mut WienerStream, modes: usize, decay: f64) -> Field {
    let c = stream.increments(1.0, 2 * modes + 1);
    let base = std::f64::consts::PI / grid.half_length();
    Field::from_fn(grid, |x| {
        let mut v = c[0];
        for j in 1..=modes {
            let w = (j as f64).powf(-decay);
            let arg = base * j as f64 * x;
            v += w * (c[2 * j - 1] * arg.cos() + c[2 * j] * arg.sin());
        }
        v
    })
}

fn fmt_list(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.4e}")).collect();
    format!("[{}]", parts.join(", "))
}
