use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use serde_json::json;
use sgch_core::exec::Executor;
use sgch_core::instability::{divergence_experiment, DivergenceReport, DivergenceSettings, InstabilityScenario};
use sgch_core::integrate::Scheme;
use sgch_core::noise::{NoiseModel, TimeProfile};

use super::{cell, tolerance, Outcome, Result, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivergenceParams {
    pub k: u32,
    pub s: f64,
    pub delta: f64,
    pub rho0: f64,
    pub n_list: Vec<u32>,
    pub t_final: f64,
    pub dt: f64,
    pub coarse_points: usize,
    /// Frequencies of the noisy variant; empty skips it.
    pub noise_n_list: Vec<u32>,
    pub noise_paths: usize,
    pub seed: u64,
}

impl Default for DivergenceParams {
    fn default() -> Self {
        Self {
            k: 1,
            s: 3.0,
            delta: 0.8,
            rho0: 0.75,
            n_list: vec![64, 128, 256],
            t_final: FRAC_PI_2,
            dt: PI / 40.0,
            coarse_points: 4096,
            noise_n_list: vec![64, 128],
            noise_paths: 4,
            seed: 0,
        }
    }
}

fn push_rows(table: &mut Table, variant: &str, report: &DivergenceReport) {
    for r in &report.rows {
        table.push(vec![
            variant.to_string(),
            r.n.to_string(),
            cell(r.initial_gap),
            cell(r.sup_gap),
            cell(r.reference),
            cell(r.normalized_gap),
            cell(r.tracking),
        ]);
    }
}

/// Two families of solutions whose initial data merge as `n` grows while
/// their distance at later times stays of order one.
pub fn divergence(p: &DivergenceParams, exec: &impl Executor) -> Result<Outcome> {
    let scenario = InstabilityScenario::new(p.k, p.s, p.delta, p.rho0, p.n_list.clone(), p.t_final)?;
    let settings = DivergenceSettings {
        t_final: p.t_final,
        dt: p.dt,
        coarse_points: p.coarse_points,
        sample_every: 1,
        noise: NoiseModel::None,
        scheme: Scheme::Rk4Det,
        paths: 1,
        seed: p.seed,
        exit_radius: None,
    };
    let report = divergence_experiment(&scenario, &settings, exec)?;
    let mut out = Outcome::default();
    let mut table = Table::new(
        "divergence",
        &[
            "variant",
            "n",
            "initial_gap",
            "sup_gap",
            "reference",
            "normalized_gap",
            "tracking",
        ],
    );
    push_rows(&mut table, "deterministic", &report);

    let want = p.delta / 2.0 - 1.0 / p.k as f64;
    let initial = report.initial_gap_fit.as_ref().map_or(f64::NAN, |f| f.slope);
    out.check(
        "initial gap shrinks at the predicted rate",
        (initial - want).abs() <= tolerance::INITIAL_GAP_SLOPE,
        format!(
            "fitted slope {initial:.4}, expected {want:.4} +- {}",
            tolerance::INITIAL_GAP_SLOPE
        ),
    );
    let last = report.rows.last();
    let normalized = last.map_or(f64::NAN, |r| r.normalized_gap);
    let floor = tolerance::NORMALIZED_GAP * report.sup_sin;
    out.check(
        "solutions separate at the largest n",
        normalized >= floor,
        format!(
            "normalized sup gap {normalized:.4} at n = {}, required {floor:.4}",
            last.map_or(0, |r| r.n)
        ),
    );
    let tracking = report.tracking_fit.as_ref().map_or(f64::NAN, |f| f.slope);
    let tracking_bound = scenario.tracking_exponent() + tolerance::TRACKING_SLOPE_MARGIN;
    out.check(
        "approximate solutions track the actual ones",
        tracking <= tracking_bound,
        format!("fitted slope {tracking:.4}, bound {tracking_bound:.4}"),
    );
    out.record("divergence", json!({ "variant": "deterministic", "report": report }));

    if !p.noise_n_list.is_empty() && p.noise_paths > 0 {
        let noisy_scenario = InstabilityScenario::new(p.k, p.s, p.delta, p.rho0, p.noise_n_list.clone(), p.t_final)?;
        let noisy_settings = DivergenceSettings {
            noise: NoiseModel::ExpDamped {
                f: TimeProfile::Constant { value: 1.0 },
                rho0: p.rho0,
                m: 2,
            },
            scheme: Scheme::HeunDriftEm,
            paths: p.noise_paths,
            ..settings
        };
        let noisy = divergence_experiment(&noisy_scenario, &noisy_settings, exec)?;
        push_rows(&mut table, "exp_damped_noise", &noisy);
        let last = noisy.rows.last();
        let normalized = last.map_or(f64::NAN, |r| r.normalized_gap);
        let spread = last.map_or(String::new(), |r| super::fmt_list(&r.path_sup_gaps));
        out.check(
            "solutions separate under damped noise",
            normalized >= tolerance::NORMALIZED_GAP * noisy.sup_sin,
            format!(
                "mean normalized sup gap {normalized:.4} at n = {} over {} paths, path gaps {spread}",
                last.map_or(0, |r| r.n),
                p.noise_paths
            ),
        );
        out.record("divergence", json!({ "variant": "exp_damped_noise", "report": noisy }));
    }
    out.tables.push(table);
    Ok(out)
}
