use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use serde_json::json;
use sgch_core::bump::PROFILE;
use sgch_core::dynamics::growth_constant;
use sgch_core::instability::{error_terms, low_freq_solve, InstabilityScenario, LowFreqSettings, LowFreqTrajectory};
use sgch_core::noise::{fit_m1, log_grid, lyapunov_gap, LyapunovParams, PowerBeta, TimeProfile, WienerStream};
use sgch_core::norms::{bump_norm_ratio, embedding_constant, h_norm, Carrier};
use sgch_core::{Grid, GridSpec};

use super::{cell, random_trig_field, slope, tolerance, Outcome, Result, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpParams {
    pub n_list: Vec<u32>,
    pub delta: f64,
    pub r: f64,
}

impl Default for BumpParams {
    fn default() -> Self {
        Self {
            n_list: vec![32, 64, 128, 256],
            delta: 0.8,
            r: 3.0,
        }
    }
}

/// `n^{-delta/2-r} ||phi(x/n^delta) cos(n x)||_{H^r}` against its limit
/// `||phi||_{L^2} / sqrt(2)`.
pub fn bump_asymptotics(p: &BumpParams) -> Result<Outcome> {
    let limit = (PROFILE.l2_norm_squared() / 2.0).sqrt();
    let mut table = Table::new(
        "bump_ratio",
        &[
            "n",
            "cos_ratio",
            "sin_ratio",
            "cos_relative_error",
            "sin_relative_error",
        ],
    );
    let mut cos_errors = Vec::new();
    let mut sin_errors = Vec::new();
    for &n in &p.n_list {
        let c = bump_norm_ratio(&PROFILE, n as f64, p.delta, p.r, 0.0, Carrier::Cos)?;
        let s = bump_norm_ratio(&PROFILE, n as f64, p.delta, p.r, 0.0, Carrier::Sin)?;
        let (ce, se) = ((c - limit).abs() / limit, (s - limit).abs() / limit);
        table.push(vec![n.to_string(), cell(c), cell(s), cell(ce), cell(se)]);
        cos_errors.push(ce);
        sin_errors.push(se);
    }
    let mut out = Outcome::default();
    let bound = tolerance::BUMP_RATIO;
    let last = |v: &[f64]| v.last().copied().unwrap_or(f64::NAN);
    let largest = p.n_list.last().copied().unwrap_or(0);
    out.check(
        "cosine packet ratio near the limit",
        last(&cos_errors) <= bound,
        format!(
            "relative error {:.3e} at n = {largest}, limit {limit:.6}, bound {bound}",
            last(&cos_errors)
        ),
    );
    out.check(
        "sine packet ratio near the limit",
        last(&sin_errors) <= bound,
        format!(
            "relative error {:.3e} at n = {largest}, bound {bound}",
            last(&sin_errors)
        ),
    );
    let monotone = cos_errors.len() >= 2 && cos_errors.windows(2).all(|w| w[1] < w[0]);
    out.check(
        "ratio error decreases with n",
        monotone,
        format!("errors {}", super::fmt_list(&cos_errors)),
    );
    out.tables.push(table);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowFreqParams {
    /// `(k, delta)` pairs.
    pub cases: Vec<(u32, f64)>,
    pub s: f64,
    pub rho0: f64,
    pub n_list: Vec<u32>,
    pub t_final: f64,
    pub dt: f64,
    pub coarse_points: usize,
}

impl Default for LowFreqParams {
    fn default() -> Self {
        Self {
            cases: vec![(1, 0.8), (2, 0.45)],
            s: 3.0,
            rho0: 0.75,
            n_list: vec![64, 128, 256],
            t_final: FRAC_PI_2,
            dt: PI / 40.0,
            coarse_points: 4096,
        }
    }
}

fn low_settings(t_final: f64, dt: f64, coarse_points: usize) -> LowFreqSettings {
    LowFreqSettings {
        t_final,
        dt,
        coarse_points,
        sample_every: 1,
    }
}

/// Decay of `||u_l(0)||_{H^s}` in `n` and the `n`-uniform growth bound of the
/// low-frequency solution.
pub fn low_frequency_scaling(p: &LowFreqParams) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut table = Table::new("low_frequency", &["k", "delta", "n", "initial_norm", "sup_ratio"]);
    let ns: Vec<f64> = p.n_list.iter().map(|&n| n as f64).collect();
    for &(k, delta) in &p.cases {
        let scenario = InstabilityScenario::new(k, p.s, delta, p.rho0, p.n_list.clone(), p.t_final)?;
        let m = scenario.m_pair().1;
        let mut norms = Vec::new();
        let mut worst_ratio = 0.0f64;
        for &n in &p.n_list {
            let low = low_freq_solve(&scenario, n, m, &low_settings(p.t_final, p.dt, p.coarse_points))?;
            let norm = h_norm(&low.states[0], p.s);
            let ratio = low.sup_norm_ratio(p.s);
            table.push(vec![k.to_string(), cell(delta), n.to_string(), cell(norm), cell(ratio)]);
            norms.push(norm);
            worst_ratio = worst_ratio.max(ratio);
        }
        let fitted = slope(&ns, &norms);
        let want = delta / 2.0 - 1.0 / k as f64;
        let tol = tolerance::LOW_FREQ_SLOPE;
        out.check(
            format!("low-frequency data slope (k = {k}, delta = {delta})"),
            (fitted - want).abs() <= tol,
            format!("fitted {fitted:.4}, expected {want:.4} +- {tol}"),
        );
        out.check(
            format!("low-frequency solution bounded (k = {k}, delta = {delta})"),
            worst_ratio <= tolerance::LOW_FREQ_GROWTH,
            format!(
                "largest sup-in-time ratio {worst_ratio:.4} up to t = {:.4}, bound {}",
                p.t_final,
                tolerance::LOW_FREQ_GROWTH
            ),
        );
        out.record(
            "low_frequency",
            json!({ "k": k, "delta": delta, "n": p.n_list, "norms": norms, "slope": fitted }),
        );
    }
    out.tables.push(table);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualParams {
    pub k: u32,
    pub s: f64,
    pub delta: f64,
    pub rho0: f64,
    pub n_list: Vec<u32>,
    pub t_final: f64,
    pub dt: f64,
    pub coarse_points: usize,
}

impl Default for ResidualParams {
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
        }
    }
}

/// Decay in `n` of the residual of the approximate solutions, in total and
/// term by term.
pub fn residual_decay(p: &ResidualParams) -> Result<Outcome> {
    let scenario = InstabilityScenario::new(p.k, p.s, p.delta, p.rho0, p.n_list.clone(), p.t_final)?;
    let m = scenario.m_pair().1;
    let mut accumulated = Vec::new();
    let mut terms: Vec<[f64; 4]> = Vec::new();
    let mut consistency = 0.0f64;
    let mut fourth_vanishes = true;
    let mut table = Table::new("residual", &["n", "accumulated", "e1", "e2", "e3", "e4", "consistency"]);
    for &n in &p.n_list {
        let low: LowFreqTrajectory = low_freq_solve(&scenario, n, m, &low_settings(p.t_final, p.dt, p.coarse_points))?;
        let errors = error_terms(&scenario, &low, true)?;
        let worst = errors.samples.iter().filter_map(|s| s.consistency).fold(0.0, f64::max);
        fourth_vanishes &= errors.samples.iter().all(|s| s.terms[3] == 0.0);
        consistency = consistency.max(worst);
        let t = errors.max_terms;
        table.push(vec![
            n.to_string(),
            cell(errors.max_accumulated),
            cell(t[0]),
            cell(t[1]),
            cell(t[2]),
            cell(t[3]),
            cell(worst),
        ]);
        accumulated.push(errors.max_accumulated);
        terms.push(t);
    }
    let ns: Vec<f64> = p.n_list.iter().map(|&n| n as f64).collect();
    let rate = scenario.decay_exponent();
    let bound = rate + tolerance::RESIDUAL_SLOPE_MARGIN;
    let mut out = Outcome::default();
    let total = slope(&ns, &accumulated);
    out.check(
        "accumulated residual decays",
        total <= bound,
        format!("fitted slope {total:.4}, bound {bound:.4} (rate {rate:.4})"),
    );
    let mut slopes = vec![total];
    for i in 0..4 {
        let series: Vec<f64> = terms.iter().map(|t| t[i]).collect();
        if i == 3 && p.k == 1 {
            out.check(
                "fourth residual term vanishes for k = 1",
                fourth_vanishes,
                "identically zero at every sample",
            );
            slopes.push(f64::NAN);
            continue;
        }
        let fitted = slope(&ns, &series);
        out.check(
            format!("residual term {} decays", i + 1),
            fitted <= bound,
            format!("fitted slope {fitted:.4}, bound {bound:.4}"),
        );
        slopes.push(fitted);
    }
    out.check(
        "residual split matches the drift",
        consistency <= tolerance::RESIDUAL_CONSISTENCY,
        format!(
            "largest relative mismatch {consistency:.3e}, bound {:e}",
            tolerance::RESIDUAL_CONSISTENCY
        ),
    );
    let mut slope_table = Table::new("residual_slopes", &["quantity", "slope", "bound"]);
    for (name, s) in ["accumulated", "e1", "e2", "e3", "e4"].iter().zip(&slopes) {
        slope_table.push(vec![name.to_string(), cell(*s), cell(bound)]);
    }
    out.record(
        "residual",
        json!({ "n": p.n_list, "accumulated": accumulated, "terms": terms, "slopes": slopes, "rate": rate }),
    );
    out.tables.push(table);
    out.tables.push(slope_table);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovCheckParams {
    pub seed: u64,
    pub suite: usize,
    pub k: u32,
    pub s: f64,
    pub eps: f64,
    pub theta: f64,
    pub b: f64,
    pub grid_low: f64,
    pub grid_high: f64,
    pub grid_points: usize,
}

impl Default for LyapunovCheckParams {
    fn default() -> Self {
        Self {
            seed: 11,
            suite: 50,
            k: 1,
            s: 3.0,
            eps: 0.25,
            theta: 1.0,
            b: 1.0,
            grid_low: 1e-2,
            grid_high: 1e4,
            grid_points: 400,
        }
    }
}

/// Extends a log grid by `decades` at the same log spacing.
fn extended_grid(p: &LyapunovCheckParams, decades: f64) -> Vec<f64> {
    let span = (p.grid_high / p.grid_low).log10();
    let step = span / (p.grid_points - 1) as f64;
    let extra = (decades / step).round() as usize;
    let high = p.grid_high * 10f64.powf(extra as f64 * step);
    log_grid(p.grid_low, high, p.grid_points + extra)
}

/// The Lyapunov inequality on a log-spaced grid, with the growth and
/// embedding constants measured on a random field suite.
pub fn lyapunov_check(p: &LyapunovCheckParams) -> Result<Outcome> {
    let grid = Grid::new(GridSpec::new(PI, 128)?)?;
    let mut stream = WienerStream::new(p.seed);
    let suite: Vec<_> = (0..p.suite)
        .map(|_| random_trig_field(&grid, &mut stream, 10, 1.5))
        .collect();
    let lambda = growth_constant(&suite, p.k, p.s, p.eps)?;
    let embedding = embedding_constant(grid.spec(), p.s);
    let params = LyapunovParams {
        lambda_s: lambda,
        k: p.k,
        embedding,
    };
    let xs = log_grid(p.grid_low, p.grid_high, p.grid_points);
    let mut out = Outcome::default();

    let regular = PowerBeta {
        b: TimeProfile::Constant { value: p.b },
        theta: p.theta,
    };
    let m1 = fit_m1(&xs, 0.0, &regular, &params, 1.0);
    let max_gap = xs
        .iter()
        .map(|&x| lyapunov_gap(x, x / embedding, 0.0, &regular, &params, m1, 1.0))
        .fold(f64::NEG_INFINITY, f64::max);
    let wider = fit_m1(&extended_grid(p, 4.0), 0.0, &regular, &params, 1.0);
    let stable = (wider - m1).abs() <= tolerance::LYAPUNOV_STABILITY * m1.max(1.0);
    out.check(
        format!("finite constant for theta = {} > k/2", p.theta),
        p.theta > p.k as f64 / 2.0 && m1.is_finite() && max_gap <= 0.0 && stable,
        format!("M1 = {m1:.6e}, largest gap {max_gap:.3e}, M1 on four more decades {wider:.6e}"),
    );

    let critical = PowerBeta {
        b: TimeProfile::Constant { value: lambda.sqrt() },
        theta: p.k as f64 / 2.0,
    };
    let base = fit_m1(&xs, 0.0, &critical, &params, 1.0);
    let extended = extended_grid(p, 2.0);
    let grown = fit_m1(&extended, 0.0, &critical, &params, 1.0);
    let violated = extended
        .iter()
        .any(|&x| lyapunov_gap(x, x / embedding, 0.0, &critical, &params, base, 1.0) > 0.0);
    out.check(
        "violation detected for theta = k/2, b^2 < 2 lambda",
        violated && grown > tolerance::LYAPUNOV_DIVERGENCE * base,
        format!("b^2 = {lambda:.4e} = lambda, M1 grows from {base:.4e} to {grown:.4e} over two more decades"),
    );
    out.record(
        "lyapunov",
        json!({ "lambda": lambda, "embedding": embedding, "m1_regular": m1, "m1_critical": [base, grown] }),
    );
    let mut table = Table::new("lyapunov", &["x", "gap_regular", "gap_critical"]);
    for &x in xs.iter().step_by(10) {
        let y = x / embedding;
        table.push(vec![
            cell(x),
            cell(lyapunov_gap(x, y, 0.0, &regular, &params, m1, 1.0)),
            cell(lyapunov_gap(x, y, 0.0, &critical, &params, base, 1.0)),
        ]);
    }
    out.tables.push(table);
    Ok(out)
}
