use serde::{Deserialize, Serialize};
use serde_json::json;
use sgch_core::ensemble::{exit_stability_table, ExitStabilityConfig, Perturbation};
use sgch_core::exec::Executor;
use sgch_core::integrate::{Scheme, SimConfig};
use sgch_core::noise::{NoiseModel, TimeProfile};
use sgch_core::{Error, Field, Grid, GridSpec};

use super::{cell, Outcome, Result, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExitStabilityParams {
    /// `u0 = a x exp(-(x / width)^2)`.
    pub amplitude: f64,
    pub width: f64,
    pub half_length: f64,
    pub points: usize,
    pub k: u32,
    pub s: f64,
    /// `identity`, `sine` or `high-frequency`.
    pub perturbation: String,
    /// Amplitude of the sine family.
    pub perturbation_amplitude: f64,
    /// Width exponent of the high-frequency family.
    pub delta: f64,
    #[serde(rename = "n")]
    pub n_list: Vec<u32>,
    pub radius: f64,
    pub dt: f64,
    pub t_final: f64,
    /// Noise amplitude; zero gives deterministic runs.
    pub b: f64,
    pub theta: f64,
    pub seed: u64,
}

impl Default for ExitStabilityParams {
    fn default() -> Self {
        Self {
            amplitude: 0.5,
            width: 2.0,
            half_length: 40.0,
            points: 2048,
            k: 1,
            s: 3.0,
            perturbation: "sine".into(),
            perturbation_amplitude: 0.5,
            delta: 0.5,
            n_list: vec![4, 8, 16, 32],
            radius: 3.2,
            dt: 0.005,
            t_final: 3.0,
            b: 0.5,
            theta: 1.0,
            seed: 7,
        }
    }
}

impl ExitStabilityParams {
    pub fn family(&self) -> Result<Perturbation> {
        match self.perturbation.as_str() {
            "identity" => Ok(Perturbation::Identity),
            "sine" => Ok(Perturbation::Sine {
                amplitude: self.perturbation_amplitude,
            }),
            "high-frequency" => Ok(Perturbation::HighFrequency {
                delta: self.delta,
                s: self.s,
            }),
            other => Err(Error::InvalidConfig(format!(
                "unknown perturbation `{other}`; expected identity, sine or high-frequency"
            ))
            .into()),
        }
    }

    pub fn initial_data(&self) -> Result<Field> {
        let grid = Grid::new(GridSpec::new(self.half_length, self.points)?)?;
        let (a, w) = (self.amplitude, self.width);
        Ok(Field::from_fn(&grid, |x| a * x * (-(x / w) * (x / w)).exp()))
    }

    pub fn config(&self) -> Result<ExitStabilityConfig> {
        let mut base = SimConfig::deterministic(
            GridSpec::new(self.half_length, self.points)?,
            self.k,
            self.dt,
            self.t_final,
        )?;
        base.s_track = vec![self.s];
        base.sobolev_index = self.s;
        base.seed = self.seed;
        if self.b != 0.0 {
            base.scheme = Scheme::HeunDriftEm;
            base.noise = NoiseModel::ScalarPower {
                b: TimeProfile::Constant { value: self.b },
                theta: self.theta,
            };
        }
        Ok(ExitStabilityConfig {
            base,
            radius: self.radius,
            n_list: self.n_list.clone(),
            perturbation: self.family()?,
        })
    }
}

/// Exiting times of a perturbed family of initial data against the
/// unperturbed one, with every run driven by the same Brownian path.
pub fn exit_stability(p: &ExitStabilityParams, exec: &impl Executor) -> Result<Outcome> {
    let cfg = p.config()?;
    let table = exit_stability_table(&p.initial_data()?, &cfg, exec)?;
    let mut out = Outcome::default();
    let errors: Vec<String> = table
        .rows
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| format!("n = {}: {e}", r.n)))
        .collect();
    out.check(
        "every perturbed run completed",
        errors.is_empty(),
        if errors.is_empty() {
            format!("{} rows", table.rows.len())
        } else {
            errors.join("; ")
        },
    );
    if cfg.perturbation == Perturbation::Identity {
        let worst = table.rows.iter().map(|r| r.gap).fold(0.0, f64::max);
        out.check(
            "identity family has no gap",
            worst == 0.0,
            format!("largest gap {worst:e}"),
        );
    }
    let mut csv = Table::new(
        "exit_stability",
        &["n", "initial_distance", "exit_time", "gap", "error"],
    );
    for r in &table.rows {
        csv.push(vec![
            r.n.to_string(),
            cell(r.initial_distance),
            r.exit_time.map_or(String::new(), cell),
            cell(r.gap),
            r.error.clone().unwrap_or_default(),
        ]);
    }
    out.record(
        "exit_stability",
        json!({ "perturbation": cfg.perturbation, "table": table }),
    );
    out.tables.push(csv);
    Ok(out)
}
