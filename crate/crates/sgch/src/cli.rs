//! Preset dispatch behind the `sgch` binary.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::{echo, resolve, ConfigError, Settings};
use crate::exec::RayonExecutor;
use crate::experiments::*;
use crate::output::OutputDir;

pub mod exit_code {
    pub const PASS: u8 = 0;
    pub const FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const BREAKDOWN: u8 = 3;
    pub const UNKNOWN_PRESET: u8 = 4;
    pub const BAD_CONFIG: u8 = 5;
    pub const UNWRITABLE: u8 = 6;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    VerifyOperators,
    LemmaAsymptotics,
    Instability,
    WaveBreaking,
    NoiseRegularization,
    ExitStability,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::VerifyOperators,
        Preset::LemmaAsymptotics,
        Preset::Instability,
        Preset::WaveBreaking,
        Preset::NoiseRegularization,
        Preset::ExitStability,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::VerifyOperators => "verify-operators",
            Preset::LemmaAsymptotics => "lemma-asymptotics",
            Preset::Instability => "instability",
            Preset::WaveBreaking => "wave-breaking",
            Preset::NoiseRegularization => "noise-regularization",
            Preset::ExitStability => "exit-stability",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn description(self) -> &'static str {
        match self {
            Preset::VerifyOperators => "operator identities, kernel quadrature, energy drift and Euler-Maruyama order",
            Preset::LemmaAsymptotics => {
                "bump norm limits, low-frequency scaling, residual decay and the Lyapunov condition"
            }
            Preset::Instability => "low-frequency scaling, residual decay and divergence of the two solution families",
            Preset::WaveBreaking => "slope blow-up with bounded amplitude for steep odd data",
            Preset::NoiseRegularization => "exit fractions under growing multiplicative noise",
            Preset::ExitStability => "exiting times of a perturbed family of initial data",
        }
    }

    /// Presets in which a numerical breakdown means the run is invalid.
    pub fn forbids_breakdown(self) -> bool {
        matches!(
            self,
            Preset::VerifyOperators | Preset::LemmaAsymptotics | Preset::Instability
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyOperatorsParams {
    /// Seed of the random test fields.
    pub seed: u64,
    pub fields: usize,
    pub points: usize,
    pub half_length: f64,
    pub kernel_points: usize,
    /// Step of the energy run.
    pub dt: f64,
    /// Paths of the strong-order estimate.
    pub paths: usize,
    pub em_seed: u64,
}

impl Default for VerifyOperatorsParams {
    fn default() -> Self {
        let (ops, kernel, solver) = (
            OperatorParams::default(),
            KernelParams::default(),
            SolverParams::default(),
        );
        Self {
            seed: ops.seed,
            fields: ops.fields,
            points: ops.points,
            half_length: kernel.half_length,
            kernel_points: kernel.points,
            dt: solver.energy_dt,
            paths: solver.em_paths,
            em_seed: solver.seed,
        }
    }
}

fn verify_operators(p: &VerifyOperatorsParams, exec: &RayonExecutor) -> Result<Outcome> {
    let mut out = operator_identities(&OperatorParams {
        seed: p.seed,
        fields: p.fields,
        points: p.points,
    })?;
    out.merge(kernel_equivalence(&KernelParams {
        half_length: p.half_length,
        points: p.kernel_points,
    })?);
    let solver = SolverParams {
        energy_dt: p.dt,
        em_paths: p.paths,
        seed: p.em_seed,
        ..SolverParams::default()
    };
    out.merge(solver_validation(&solver, exec)?);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaAsymptoticsParams {
    pub bump_n: Vec<u32>,
    pub bump_delta: f64,
    pub bump_r: f64,
    /// `(k, delta)` pairs of the low-frequency scaling.
    pub pairs: Vec<(u32, f64)>,
    /// Power and width exponent of the residual run.
    pub k: u32,
    pub delta: f64,
    pub s: f64,
    pub rho0: f64,
    pub n: Vec<u32>,
    pub t_final: f64,
    pub dt: f64,
    pub coarse_points: usize,
    /// Seed of the Lyapunov test suite.
    pub seed: u64,
    pub suite: usize,
    pub eps: f64,
    pub theta: f64,
    pub b: f64,
    pub grid_low: f64,
    pub grid_high: f64,
    pub grid_points: usize,
}

impl Default for LemmaAsymptoticsParams {
    fn default() -> Self {
        let (bump, low, res, lyap) = (
            BumpParams::default(),
            LowFreqParams::default(),
            ResidualParams::default(),
            LyapunovCheckParams::default(),
        );
        Self {
            bump_n: bump.n_list,
            bump_delta: bump.delta,
            bump_r: bump.r,
            pairs: low.cases,
            k: res.k,
            delta: res.delta,
            s: res.s,
            rho0: res.rho0,
            n: res.n_list,
            t_final: res.t_final,
            dt: res.dt,
            coarse_points: res.coarse_points,
            seed: lyap.seed,
            suite: lyap.suite,
            eps: lyap.eps,
            theta: lyap.theta,
            b: lyap.b,
            grid_low: lyap.grid_low,
            grid_high: lyap.grid_high,
            grid_points: lyap.grid_points,
        }
    }
}

fn lemma_asymptotics(p: &LemmaAsymptoticsParams, _: &RayonExecutor) -> Result<Outcome> {
    let mut out = bump_asymptotics(&BumpParams {
        n_list: p.bump_n.clone(),
        delta: p.bump_delta,
        r: p.bump_r,
    })?;
    out.merge(low_frequency_scaling(&LowFreqParams {
        cases: p.pairs.clone(),
        s: p.s,
        rho0: p.rho0,
        n_list: p.n.clone(),
        t_final: p.t_final,
        dt: p.dt,
        coarse_points: p.coarse_points,
    })?);
    out.merge(residual_decay(&ResidualParams {
        k: p.k,
        s: p.s,
        delta: p.delta,
        rho0: p.rho0,
        n_list: p.n.clone(),
        t_final: p.t_final,
        dt: p.dt,
        coarse_points: p.coarse_points,
    })?);
    out.merge(lyapunov_check(&LyapunovCheckParams {
        seed: p.seed,
        suite: p.suite,
        k: p.k,
        s: p.s,
        eps: p.eps,
        theta: p.theta,
        b: p.b,
        grid_low: p.grid_low,
        grid_high: p.grid_high,
        grid_points: p.grid_points,
    })?);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstabilityParams {
    pub k: u32,
    pub s: f64,
    pub delta: f64,
    pub rho0: f64,
    pub n: Vec<u32>,
    pub t_final: f64,
    pub dt: f64,
    pub coarse_points: usize,
    /// Frequencies of the noisy variant; empty skips it.
    pub noise_n: Vec<u32>,
    pub paths: usize,
    pub seed: u64,
}

impl Default for InstabilityParams {
    fn default() -> Self {
        let d = DivergenceParams::default();
        debug_assert_eq!((d.t_final, d.dt), (FRAC_PI_2, PI / 40.0));
        Self {
            k: d.k,
            s: d.s,
            delta: d.delta,
            rho0: d.rho0,
            n: d.n_list,
            t_final: d.t_final,
            dt: d.dt,
            coarse_points: d.coarse_points,
            noise_n: d.noise_n_list,
            paths: d.noise_paths,
            seed: d.seed,
        }
    }
}

fn instability(p: &InstabilityParams, exec: &RayonExecutor) -> Result<Outcome> {
    let mut out = low_frequency_scaling(&LowFreqParams {
        cases: vec![(p.k, p.delta)],
        s: p.s,
        rho0: p.rho0,
        n_list: p.n.clone(),
        t_final: p.t_final,
        dt: p.dt,
        coarse_points: p.coarse_points,
    })?;
    out.merge(residual_decay(&ResidualParams {
        k: p.k,
        s: p.s,
        delta: p.delta,
        rho0: p.rho0,
        n_list: p.n.clone(),
        t_final: p.t_final,
        dt: p.dt,
        coarse_points: p.coarse_points,
    })?);
    let params = DivergenceParams {
        k: p.k,
        s: p.s,
        delta: p.delta,
        rho0: p.rho0,
        n_list: p.n.clone(),
        t_final: p.t_final,
        dt: p.dt,
        coarse_points: p.coarse_points,
        noise_n_list: p.noise_n.clone(),
        noise_paths: p.paths,
        seed: p.seed,
    };
    out.merge(divergence(&params, exec)?);
    Ok(out)
}

/// Outcome of `sgch run`: the exit code and a line for stderr.
#[derive(Debug)]
pub struct RunStatus {
    pub code: u8,
    pub message: String,
}

impl RunStatus {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

fn config_status(e: ConfigError) -> RunStatus {
    match e {
        ConfigError::Malformed { .. } => RunStatus::new(exit_code::BAD_CONFIG, e.to_string()),
        ConfigError::Usage(_) => RunStatus::new(exit_code::USAGE, e.to_string()),
    }
}

fn execute<P>(preset: Preset, settings: &Settings, experiment: fn(&P, &RayonExecutor) -> Result<Outcome>) -> RunStatus
where
    P: Serialize + DeserializeOwned + Default,
{
    let name = preset.name();
    let params: P = match resolve(name, settings) {
        Ok(p) => p,
        Err(e) => return config_status(e),
    };
    let exec = match RayonExecutor::new(settings.threads) {
        Ok(exec) => exec,
        Err(e) => return RunStatus::new(exit_code::USAGE, format!("thread pool: {e}")),
    };
    let config = match echo(name, &params) {
        Ok(text) => text,
        Err(e) => return RunStatus::new(exit_code::USAGE, e.to_string()),
    };
    let out = match OutputDir::create(&settings.out, name, &config) {
        Ok(out) => out,
        Err(e) => return RunStatus::new(exit_code::UNWRITABLE, e.to_string()),
    };
    let (outcome, status) = match experiment(&params, &exec) {
        Ok(outcome) => {
            let status = if outcome.passed() {
                RunStatus::new(exit_code::PASS, format!("{name}: all checks passed"))
            } else {
                let failed: Vec<&str> = outcome
                    .checks
                    .iter()
                    .filter(|c| !c.passed)
                    .map(|c| c.name.as_str())
                    .collect();
                RunStatus::new(
                    exit_code::FAILED,
                    format!("{name}: failed checks: {}", failed.join(", ")),
                )
            };
            (outcome, status)
        }
        Err(e @ ExperimentError::Breakdown { .. }) => {
            let code = if preset.forbids_breakdown() {
                exit_code::BREAKDOWN
            } else {
                exit_code::FAILED
            };
            (Outcome::default(), RunStatus::new(code, format!("{name}: {e}")))
        }
        Err(e) => (
            Outcome::default(),
            RunStatus::new(exit_code::USAGE, format!("{name}: {e}")),
        ),
    };
    let error = (outcome.checks.is_empty() && status.code != exit_code::PASS).then_some(status.message.as_str());
    if let Err(e) = out.write_outcome(name, &outcome, error) {
        return RunStatus::new(exit_code::UNWRITABLE, e.to_string());
    }
    for check in &outcome.checks {
        eprintln!(
            "{} {}: {}",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    RunStatus::new(
        status.code,
        format!("{} (results in {})", status.message, out.path().display()),
    )
}

/// Runs the preset called `name`.
pub fn run(name: &str, settings: &Settings) -> RunStatus {
    let Some(preset) = Preset::parse(name) else {
        let known: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
        return RunStatus::new(
            exit_code::UNKNOWN_PRESET,
            format!("unknown preset `{name}`; known presets: {}", known.join(", ")),
        );
    };
    match preset {
        Preset::VerifyOperators => execute(preset, settings, verify_operators),
        Preset::LemmaAsymptotics => execute(preset, settings, lemma_asymptotics),
        Preset::Instability => execute(preset, settings, instability),
        Preset::WaveBreaking => execute(preset, settings, |p: &WaveBreakingParams, e| wave_breaking(p, e)),
        Preset::NoiseRegularization => execute(preset, settings, |p: &RegularizationParams, e| {
            noise_regularization(p, e)
        }),
        Preset::ExitStability => execute(preset, settings, |p: &ExitStabilityParams, e| exit_stability(p, e)),
    }
}
