//! Seeded Monte Carlo ensembles of trajectories and exiting-time tables.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::bump::PROFILE;
use crate::error::{invalid, Error, Result};
use crate::exec::Executor;
use crate::field::Field;
use crate::integrate::{fnv1a, simulate, Breakdown, ExitTime, SimConfig, TrajectoryRecord};
use crate::norms::h_norm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub base: SimConfig,
    pub paths: usize,
    /// Path `i` runs with seed `seed_base + i`.
    pub seed_base: u64,
    /// Exit radii; they replace the radii of `base`.
    pub exit_thresholds: Vec<f64>,
    pub summary_quantiles: Vec<f64>,
}

impl EnsembleConfig {
    pub fn new(base: SimConfig, paths: usize, seed_base: u64, exit_thresholds: Vec<f64>) -> Result<Self> {
        let cfg = Self {
            base,
            paths,
            seed_base,
            exit_thresholds,
            summary_quantiles: alloc::vec![0.1, 0.5, 0.9],
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.paths == 0 {
            return Err(invalid("paths", "at least one path is required"));
        }
        if self.exit_thresholds.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(invalid("exit_thresholds", "radii must be positive and finite"));
        }
        if self.summary_quantiles.iter().any(|q| !(*q > 0.0 && *q < 1.0)) {
            return Err(invalid("summary_quantiles", "quantiles must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn path_seed(&self, path: usize) -> u64 {
        self.seed_base.wrapping_add(path as u64)
    }

    /// Simulation settings for one path.
    pub fn path_config(&self, path: usize) -> SimConfig {
        let mut cfg = self.base.clone();
        cfg.seed = self.path_seed(path);
        cfg.exit_radii = self.exit_thresholds.clone();
        cfg
    }

    pub fn config_hash(&self) -> u64 {
        fnv1a(serde_json::to_string(self).unwrap_or_default().as_bytes())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathOutcome {
    pub path: usize,
    pub seed: u64,
    /// Exit times with a breakdown counted as an exit at the breakdown time.
    pub exit_times: Vec<ExitTime>,
    pub breakdown: Option<Breakdown>,
    pub final_time: f64,
    pub sup_hs: f64,
    pub sup_w1inf: f64,
    pub error: Option<String>,
}

impl PathOutcome {
    fn from_record(path: usize, record: &TrajectoryRecord) -> Self {
        let exit_times = record
            .exit_times
            .iter()
            .map(|e| ExitTime {
                radius: e.radius,
                time: effective_exit(e.time, record.breakdown.as_ref()),
            })
            .collect();
        Self {
            path,
            seed: record.seed,
            exit_times,
            breakdown: record.breakdown,
            final_time: record.final_time,
            sup_hs: record.sup_hs,
            sup_w1inf: record.sup_w1inf,
            error: None,
        }
    }

    fn failed(path: usize, seed: u64, error: &Error) -> Self {
        Self {
            path,
            seed,
            exit_times: Vec::new(),
            breakdown: None,
            final_time: 0.0,
            sup_hs: f64::NAN,
            sup_w1inf: f64::NAN,
            error: Some(error.to_string()),
        }
    }

    pub fn exit_time(&self, radius: f64) -> Option<f64> {
        self.exit_times.iter().find(|e| e.radius == radius).and_then(|e| e.time)
    }
}

fn effective_exit(exit: Option<f64>, breakdown: Option<&Breakdown>) -> Option<f64> {
    match (exit, breakdown) {
        (Some(t), Some(b)) => Some(t.min(b.time)),
        (None, Some(b)) => Some(b.time),
        (t, None) => t,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitFraction {
    pub radius: f64,
    pub exited: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantile {
    pub level: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub paths: Vec<PathOutcome>,
    /// Paths that ran to completion; fractions are taken over these.
    pub completed: usize,
    pub failed: usize,
    pub exit_fractions: Vec<ExitFraction>,
    pub breakdown_fraction: f64,
    pub sup_hs_quantiles: Vec<Quantile>,
    pub sup_w1inf_quantiles: Vec<Quantile>,
    pub config_hash: u64,
}

impl EnsembleReport {
    pub fn exit_fraction(&self, radius: f64) -> Option<f64> {
        self.exit_fractions
            .iter()
            .find(|f| f.radius == radius)
            .map(|f| f.fraction)
    }

    /// Survival curve `P(tau^R > t)` sampled at `times`.
    pub fn survival(&self, radius: f64, times: &[f64]) -> Vec<f64> {
        let done: Vec<&PathOutcome> = self.paths.iter().filter(|p| p.error.is_none()).collect();
        times
            .iter()
            .map(|&t| {
                if done.is_empty() {
                    return 0.0;
                }
                let alive = done
                    .iter()
                    .filter(|p| p.exit_time(radius).is_none_or(|e| e > t))
                    .count();
                alive as f64 / done.len() as f64
            })
            .collect()
    }
}

/// Runs every path of the ensemble. Failing paths are recorded, not fatal.
pub fn run_ensemble(u0: &Field, cfg: &EnsembleConfig, exec: &impl Executor) -> Result<EnsembleReport> {
    cfg.validate()?;
    if u0.grid().spec() != &cfg.base.grid {
        return Err(Error::GridMismatch);
    }
    let outcomes = exec.map(cfg.paths, |path| {
        let sim = cfg.path_config(path);
        match simulate(u0, &sim) {
            Ok(record) => PathOutcome::from_record(path, &record),
            Err(e) => PathOutcome::failed(path, sim.seed, &e),
        }
    });
    Ok(summarize(cfg, outcomes))
}

/// Aggregates path outcomes given in any order.
pub fn summarize(cfg: &EnsembleConfig, mut outcomes: Vec<PathOutcome>) -> EnsembleReport {
    outcomes.sort_by_key(|p| p.path);
    let done: Vec<&PathOutcome> = outcomes.iter().filter(|p| p.error.is_none()).collect();
    let completed = done.len();
    let ratio = |count: usize| {
        if completed == 0 {
            0.0
        } else {
            count as f64 / completed as f64
        }
    };
    let mut radii = cfg.exit_thresholds.clone();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let t_final = cfg.base.t_final;
    let exit_fractions = radii
        .iter()
        .map(|&radius| {
            let exited = done
                .iter()
                .filter(|p| p.exit_time(radius).is_some_and(|t| t <= t_final))
                .count();
            ExitFraction {
                radius,
                exited,
                fraction: ratio(exited),
            }
        })
        .collect();
    let broke = done.iter().filter(|p| p.breakdown.is_some()).count();
    let hs: Vec<f64> = done.iter().map(|p| p.sup_hs).collect();
    let w1: Vec<f64> = done.iter().map(|p| p.sup_w1inf).collect();
    EnsembleReport {
        completed,
        failed: outcomes.len() - completed,
        exit_fractions,
        breakdown_fraction: ratio(broke),
        sup_hs_quantiles: quantiles(&hs, &cfg.summary_quantiles),
        sup_w1inf_quantiles: quantiles(&w1, &cfg.summary_quantiles),
        config_hash: cfg.config_hash(),
        paths: outcomes,
    }
}

/// Linearly interpolated empirical quantiles.
pub fn quantiles(values: &[f64], levels: &[f64]) -> Vec<Quantile> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
    sorted.sort_by(f64::total_cmp);
    levels
        .iter()
        .map(|&level| {
            let value = match sorted.len() {
                0 => f64::NAN,
                len => {
                    let pos = level * (len - 1) as f64;
                    let lo = Float::floor(pos) as usize;
                    let hi = (lo + 1).min(len - 1);
                    let w = pos - lo as f64;
                    sorted[lo] * (1.0 - w) + sorted[hi] * w
                }
            };
            Quantile { level, value }
        })
        .collect()
}

/// Half-width of the normal-approximation 95% band for the difference of two
/// proportions with `paths` samples each.
pub fn two_proportion_band(p1: f64, p2: f64, paths: usize) -> f64 {
    let pooled = 0.5 * (p1 + p2);
    1.96 * Float::sqrt(pooled * (1.0 - pooled) * 2.0 / paths as f64)
}

/// Families `u0_n -> u0` of perturbed initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Perturbation {
    /// `u0_n = u0`.
    Identity,
    /// `u0_n = u0 + (amplitude / n) sin(x)`, with the wavenumber rounded to
    /// the nearest resolved one.
    Sine { amplitude: f64 },
    /// `u0_n = u0 + n^(-delta/2 - s) phi(x / n^delta) cos(n x)`.
    HighFrequency { delta: f64, s: f64 },
}

impl Perturbation {
    pub fn apply(&self, u0: &Field, n: u32) -> Result<Field> {
        let grid = u0.grid();
        let spec = grid.spec();
        let n_f = n as f64;
        let extra = match *self {
            Perturbation::Identity => return Ok(u0.clone()),
            Perturbation::Sine { amplitude } => {
                let base = core::f64::consts::PI / spec.half_length;
                let xi = Float::max(Float::round(1.0 / base), 1.0) * base;
                Field::from_fn(grid, |x| amplitude / n_f * Float::sin(xi * x))
            }
            Perturbation::HighFrequency { delta, s } => {
                let width = Float::powf(n_f, delta);
                if PROFILE.support_radius() * width >= spec.half_length {
                    return Err(Error::SupportExceedsDomain {
                        radius: PROFILE.support_radius() * width,
                        half_length: spec.half_length,
                    });
                }
                if n_f >= 2.0 / 3.0 * spec.max_wavenumber() {
                    return Err(invalid("n", format!("frequency {n} is not resolved by the grid")));
                }
                let amplitude = Float::powf(n_f, -delta / 2.0 - s);
                let samples = (0..spec.points)
                    .map(|k| {
                        let (c, _) = crate::instability::carrier(spec, k, n_f, 0.0);
                        amplitude * PROFILE.value(spec.point(k) / width) * c
                    })
                    .collect();
                Field::from_samples(grid, samples)?
            }
        };
        let mut u = u0.clone();
        u.add_scaled(1.0, &extra)?;
        Ok(u)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExitStabilityConfig {
    pub base: SimConfig,
    pub radius: f64,
    pub n_list: Vec<u32>,
    pub perturbation: Perturbation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitStabilityRow {
    pub n: u32,
    /// `||u0_n - u0||_{H^s}`.
    pub initial_distance: f64,
    pub exit_time: Option<f64>,
    /// `|min(tau_n, T) - min(tau, T)|`.
    pub gap: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitStabilityTable {
    pub radius: f64,
    pub reference: Option<f64>,
    pub rows: Vec<ExitStabilityRow>,
}

/// Exiting times of the perturbed family against the unperturbed run, all
/// paths driven by the same seed.
pub fn exit_stability_table(u0: &Field, cfg: &ExitStabilityConfig, exec: &impl Executor) -> Result<ExitStabilityTable> {
    if !(cfg.radius.is_finite() && cfg.radius > 0.0) {
        return Err(invalid("radius", "exit radius must be positive and finite"));
    }
    let mut sim = cfg.base.clone();
    sim.exit_radii = alloc::vec![cfg.radius];
    sim.validate()?;
    let s = sim.sobolev_index;
    let t_final = sim.t_final;
    let exit_of = |u: &Field| -> Result<Option<f64>> {
        let record = simulate(u, &sim)?;
        Ok(effective_exit(record.exit_time(cfg.radius), record.breakdown.as_ref()))
    };
    let reference = exit_of(u0)?;
    let capped = |t: Option<f64>| t.map_or(t_final, |t| t.min(t_final));
    let rows = exec.map(cfg.n_list.len(), |i| {
        let n = cfg.n_list[i];
        let run = || -> Result<(f64, Option<f64>)> {
            let un = cfg.perturbation.apply(u0, n)?;
            let distance = h_norm(&un.difference(u0)?, s);
            Ok((distance, exit_of(&un)?))
        };
        match run() {
            Ok((initial_distance, exit_time)) => ExitStabilityRow {
                n,
                initial_distance,
                exit_time,
                gap: Float::abs(capped(exit_time) - capped(reference)),
                error: None,
            },
            Err(e) => ExitStabilityRow {
                n,
                initial_distance: f64::NAN,
                exit_time: None,
                gap: f64::NAN,
                error: Some(e.to_string()),
            },
        }
    });
    Ok(ExitStabilityTable {
        radius: cfg.radius,
        reference,
        rows,
    })
}
