use serde::{Deserialize, Serialize};
use serde_json::json;
use sgch_core::exec::Executor;
use sgch_core::integrate::{simulate, BlowupCaps, BreakdownReason, SimConfig, TrajectoryRecord};
use sgch_core::norms::{h_norm, w1inf_norm};
use sgch_core::{Field, Grid, GridSpec};

use super::{cell, tolerance, Outcome, Result, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveBreakingParams {
    /// `u0 = 8 a x exp(-4 x^2)`; negative `a` steepens at the origin.
    pub amplitude: f64,
    pub half_length: f64,
    pub points: usize,
    pub dt: f64,
    pub t_final: f64,
    /// Caps as multiples of the initial `W^{1,inf}` and `H^3` norms.
    pub w1inf_cap_ratio: f64,
    pub hs_cap_ratio: f64,
    pub grace: f64,
}

impl Default for WaveBreakingParams {
    fn default() -> Self {
        Self {
            amplitude: -2.0,
            half_length: 4.0,
            points: 1024,
            dt: 2e-4,
            t_final: 0.5,
            w1inf_cap_ratio: 3.0,
            hs_cap_ratio: 100.0,
            grace: 0.05,
        }
    }
}

fn breaking_run(p: &WaveBreakingParams, points: usize, dt: f64) -> Result<TrajectoryRecord> {
    let spec = GridSpec::new(p.half_length, points)?;
    let grid = Grid::new(spec)?;
    let a = p.amplitude;
    let u0 = Field::from_fn(&grid, |x| 8.0 * a * x * (-4.0 * x * x).exp());
    let mut cfg = SimConfig::deterministic(spec, 1, dt, p.t_final)?;
    cfg.s_track = vec![1.0, 3.0];
    cfg.caps = BlowupCaps {
        w1inf: p.w1inf_cap_ratio * w1inf_norm(&u0),
        hs: p.hs_cap_ratio * h_norm(&u0, 3.0),
        grace: p.grace,
    };
    Ok(simulate(&u0, &cfg)?)
}

/// Relative change of the running maximum `sup_{s <= t} sup_x |u(s)|` over
/// the run, and the largest relative change of `sup_x |u(t)|` itself.
fn amplitude_drift(record: &TrajectoryRecord) -> (f64, f64) {
    let first = record.norm_reports[0].l_inf;
    let peak = record.norm_reports.iter().map(|r| r.l_inf).fold(first, f64::max);
    let pointwise = record
        .norm_reports
        .iter()
        .map(|r| (r.l_inf - first).abs() / first)
        .fold(0.0, f64::max);
    ((peak - first) / first, pointwise)
}

/// Steep odd data breaks: the slope hits its cap while the amplitude stays
/// put, and the hit time is resolved in both `dt` and `N`.
pub fn wave_breaking(p: &WaveBreakingParams, exec: &impl Executor) -> Result<Outcome> {
    let runs = [(p.points, p.dt), (2 * p.points, p.dt), (p.points, p.dt / 2.0)];
    let records: Vec<Result<TrajectoryRecord>> = exec.map(runs.len(), |i| breaking_run(p, runs[i].0, runs[i].1));
    let records = records.into_iter().collect::<Result<Vec<_>>>()?;
    let base = &records[0];
    let mut out = Outcome::default();

    let reason = base.breakdown.map(|b| b.reason);
    out.check(
        "slope cap reached first",
        reason == Some(BreakdownReason::W1infCap),
        format!("breakdown {:?}", base.breakdown),
    );
    let (drift, pointwise) = amplitude_drift(base);
    out.check(
        "amplitude stays bounded",
        drift < tolerance::AMPLITUDE_DRIFT,
        format!(
            "running sup of |u| changed by {drift:.3e}, bound {}; sup|u(t)| moved by up to {pointwise:.3e} of its initial value",
            tolerance::AMPLITUDE_DRIFT
        ),
    );
    let hit = |r: &TrajectoryRecord| r.cap_hits.w1inf.unwrap_or(f64::NAN);
    for (record, label) in records[1..].iter().zip(["2N", "dt/2"]) {
        let change = (hit(record) - hit(base)).abs() / hit(base);
        out.check(
            format!("cap hit time converged under {label}"),
            change < tolerance::CAP_TIME_CHANGE,
            format!(
                "hit at {:.5} vs {:.5}, relative change {change:.3e}, bound {}",
                hit(record),
                hit(base),
                tolerance::CAP_TIME_CHANGE
            ),
        );
    }
    let paired = records.iter().all(|r| match (r.cap_hits.w1inf, r.cap_hits.hs) {
        (Some(a), Some(b)) => (a - b).abs() <= p.grace,
        _ => false,
    });
    let hits: Vec<_> = records.iter().map(|r| (r.cap_hits.w1inf, r.cap_hits.hs)).collect();
    out.check(
        "both caps breached together",
        paired,
        format!("(slope, Sobolev) hit times {hits:?}, window {}", p.grace),
    );

    for ((points, dt), record) in runs.iter().zip(&records) {
        let (drift, pointwise) = amplitude_drift(record);
        out.record(
            "breaking_run",
            json!({ "points": points, "dt": dt, "breakdown": record.breakdown, "cap_hits": record.cap_hits, "amplitude_drift": drift, "pointwise_amplitude_change": pointwise }),
        );
    }
    let mut table = Table::new("norms", &["time", "l_inf", "w1_inf", "h1", "h3"]);
    for r in &base.norm_reports {
        table.push(vec![
            cell(r.time),
            cell(r.l_inf),
            cell(r.w1_inf),
            cell(r.h(1.0).unwrap_or(f64::NAN)),
            cell(r.h(3.0).unwrap_or(f64::NAN)),
        ]);
    }
    out.tables.push(table);
    Ok(out)
}
