use serde::{Deserialize, Serialize};
use serde_json::json;
use sgch_core::ensemble::{run_ensemble, two_proportion_band, EnsembleConfig, EnsembleReport};
use sgch_core::exec::{Executor, Sequential};
use sgch_core::integrate::{Scheme, SimConfig};
use sgch_core::noise::{NoiseModel, TimeProfile};
use sgch_core::{Field, Grid, GridSpec};

use super::{cell, Outcome, Result, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularizationParams {
    /// `u0 = a x exp(-(x / width)^2)`.
    pub amplitude: f64,
    pub width: f64,
    pub half_length: f64,
    pub points: usize,
    pub k: u32,
    pub theta: f64,
    #[serde(rename = "b")]
    pub b_list: Vec<f64>,
    pub paths: usize,
    pub seed: u64,
    pub radius: f64,
    pub dt: f64,
    pub t_final: f64,
    /// Samples of each survival curve.
    pub survival_points: usize,
}

impl Default for RegularizationParams {
    fn default() -> Self {
        Self {
            amplitude: -0.56,
            width: 1.0,
            half_length: 8.0,
            points: 256,
            k: 1,
            theta: 1.0,
            b_list: vec![0.5, 1.0, 2.0],
            paths: 100,
            seed: 1000,
            radius: 50.0,
            dt: 1.5e-3,
            t_final: 3.0,
            survival_points: 61,
        }
    }
}

impl RegularizationParams {
    pub fn initial_data(&self) -> Result<Field> {
        let grid = Grid::new(GridSpec::new(self.half_length, self.points)?)?;
        let (a, w) = (self.amplitude, self.width);
        Ok(Field::from_fn(&grid, |x| a * x * (-(x / w) * (x / w)).exp()))
    }

    fn base(&self) -> Result<SimConfig> {
        let mut cfg = SimConfig::deterministic(
            GridSpec::new(self.half_length, self.points)?,
            self.k,
            self.dt,
            self.t_final,
        )?;
        cfg.s_track = vec![3.0];
        cfg.halt_on_exit = true;
        Ok(cfg)
    }

    /// Ensemble with noise amplitude `b`; `b = 0` is the single deterministic run.
    pub fn ensemble(&self, b: f64) -> Result<EnsembleConfig> {
        let mut cfg = self.base()?;
        let paths = if b == 0.0 {
            1
        } else {
            cfg.scheme = Scheme::EulerMaruyama;
            cfg.noise = NoiseModel::ScalarPower {
                b: TimeProfile::Constant { value: b },
                theta: self.theta,
            };
            self.paths
        };
        Ok(EnsembleConfig::new(cfg, paths, self.seed, vec![self.radius])?)
    }
}

fn fraction(report: &EnsembleReport, radius: f64) -> f64 {
    report.exit_fraction(radius).unwrap_or(f64::NAN)
}

/// Exit-before-`T` fractions for growing multiplicative noise against the
/// deterministic run, which breaks down.
pub fn noise_regularization(p: &RegularizationParams, exec: &impl Executor) -> Result<Outcome> {
    let u0 = p.initial_data()?;
    let deterministic = run_ensemble(&u0, &p.ensemble(0.0)?, &Sequential)?;
    let det = fraction(&deterministic, p.radius);
    let mut out = Outcome::default();
    out.check(
        "deterministic run exits before T",
        det == 1.0,
        format!("deterministic exit fraction {det} at R = {}", p.radius),
    );

    let mut fractions = vec![det];
    let times: Vec<f64> = (0..p.survival_points)
        .map(|i| p.t_final * i as f64 / (p.survival_points.max(2) - 1) as f64)
        .collect();
    let mut survival = Table::new("survival", &["b", "time", "survival"]);
    let mut summary = Table::new(
        "exit_fractions",
        &["b", "exit_fraction", "breakdown_fraction", "failed_paths"],
    );
    summary.push(vec![
        cell(0.0),
        cell(det),
        cell(deterministic.breakdown_fraction),
        deterministic.failed.to_string(),
    ]);
    for &b in &p.b_list {
        let report = run_ensemble(&u0, &p.ensemble(b)?, exec)?;
        let f = fraction(&report, p.radius);
        fractions.push(f);
        summary.push(vec![
            cell(b),
            cell(f),
            cell(report.breakdown_fraction),
            report.failed.to_string(),
        ]);
        for (t, s) in times.iter().zip(report.survival(p.radius, &times)) {
            survival.push(vec![cell(b), cell(*t), cell(s)]);
        }
        for path in &report.paths {
            out.record(
                "path",
                json!({
                    "b": b,
                    "path": path.path,
                    "seed": path.seed,
                    "exit_time": path.exit_time(p.radius),
                    "breakdown": path.breakdown,
                    "sup_hs": path.sup_hs,
                    "sup_w1inf": path.sup_w1inf,
                    "error": path.error,
                }),
            );
        }
        out.record(
            "ensemble",
            json!({ "b": b, "exit_fraction": f, "breakdown_fraction": report.breakdown_fraction, "completed": report.completed,
                    "sup_hs_quantiles": report.sup_hs_quantiles, "config_hash": report.config_hash }),
        );
    }

    let noisy = &fractions[1..];
    let monotone = noisy.windows(2).all(|w| w[1] <= w[0]);
    out.check(
        "exit fraction non-increasing in b",
        monotone,
        format!("fractions {noisy:?} for b = {:?}", p.b_list),
    );
    // comparisons along deterministic, b_1, b_2, ...
    let bands: Vec<(f64, f64)> = fractions
        .windows(2)
        .map(|w| (w[0] - w[1], two_proportion_band(w[0], w[1], p.paths)))
        .collect();
    let separated = bands.iter().filter(|(d, band)| d > band).count();
    let middle = bands.len() / 2;
    let middle_ok = bands.get(middle).is_some_and(|(d, band)| d > band);
    out.check(
        "middle comparison outside the 95% band",
        middle_ok,
        format!(
            "(difference, band) along the chain {bands:.3?}; {separated} of {} separated",
            bands.len()
        ),
    );
    out.check(
        "noise lowers the exit fraction",
        noisy.iter().all(|&f| f < det),
        format!("noisy fractions {noisy:?} vs deterministic {det}"),
    );
    out.tables.push(summary);
    out.tables.push(survival);
    Ok(out)
}
