//! Time stepping: RK4 for the deterministic flow, Euler-Maruyama and a
//! Heun-drift / Euler-diffusion scheme for the Ito equation.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::dynamics::{cutoff_factor, drift_with_factor, DriftParams};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{Grid, GridSpec};
use crate::noise::{eval_noise, NoiseModel, WienerStream};
use crate::norms::{h_norm, w1inf_norm, NormReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Rk4Det,
    EulerMaruyama,
    HeunDriftEm,
}

/// Thresholds standing in for the blow-up time. After the first breach the
/// run continues for `grace` time units so the other threshold can be seen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowupCaps {
    pub w1inf: f64,
    pub hs: f64,
    #[serde(default)]
    pub grace: f64,
}

impl Default for BlowupCaps {
    fn default() -> Self {
        Self {
            w1inf: 1e3,
            hs: 1e6,
            grace: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub grid: GridSpec,
    pub k: u32,
    /// Sobolev indices measured at every recorded step.
    pub s_track: Vec<f64>,
    /// Index `s` used for exiting times and the `H^s` cap; must be tracked.
    pub sobolev_index: f64,
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    pub drift: DriftParams,
    #[serde(default)]
    pub noise: NoiseModel,
    /// Radii `R` of the exiting times `inf{t : ||u||_{H^s} > R}`.
    #[serde(default)]
    pub exit_radii: Vec<f64>,
    #[serde(default)]
    pub caps: BlowupCaps,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub record_stride: usize,
    /// Stop once every exit radius has been crossed.
    #[serde(default)]
    pub halt_on_exit: bool,
    /// Brownian increments are summed from this many finer draws per step.
    #[serde(default = "one_u32")]
    pub wiener_substeps: u32,
    /// Deterministic runs halve the step when RK4 stage norms spike tenfold.
    #[serde(default)]
    pub adaptive: bool,
}

fn one() -> usize {
    1
}

fn one_u32() -> u32 {
    1
}

impl SimConfig {
    /// Deterministic RK4 configuration without exit radii.
    pub fn deterministic(grid: GridSpec, k: u32, dt: f64, t_final: f64) -> Result<Self> {
        let cfg = Self {
            grid,
            k,
            s_track: alloc::vec![0.0, 1.0, 3.0],
            sobolev_index: 3.0,
            dt,
            t_final,
            scheme: Scheme::Rk4Det,
            drift: DriftParams::new(k)?,
            noise: NoiseModel::None,
            exit_radii: Vec::new(),
            caps: BlowupCaps::default(),
            seed: 0,
            record_stride: 1,
            halt_on_exit: false,
            wiener_substeps: 1,
            adaptive: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        self.grid.validate()?;
        self.drift.validate()?;
        self.noise.validate()?;
        if self.k != self.drift.k {
            return bad(format!("k = {} but the drift uses k = {}", self.k, self.drift.k));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_final.is_finite() && self.dt <= self.t_final) {
            return bad(format!("need dt <= T, got dt = {} and T = {}", self.dt, self.t_final));
        }
        if !(self.caps.w1inf > 0.0 && self.caps.hs > 0.0 && self.caps.grace >= 0.0) {
            return bad(String::from("blow-up caps must be positive"));
        }
        if self.scheme == Scheme::Rk4Det && !self.noise.is_none() {
            return bad(String::from("rk4_det requires noise = none"));
        }
        if self.adaptive && !self.noise.is_none() {
            return bad(String::from("adaptive steps are only allowed for deterministic runs"));
        }
        if !self.s_track.contains(&self.sobolev_index) {
            return bad(format!("sobolev_index {} is not in s_track", self.sobolev_index));
        }
        if self.s_track.iter().any(|s| !s.is_finite()) {
            return bad(String::from("s_track entries must be finite"));
        }
        if self
            .exit_radii
            .iter()
            .any(|r| r.partial_cmp(&0.0) != Some(core::cmp::Ordering::Greater))
        {
            return bad(String::from("exit radii must be positive"));
        }
        if self.record_stride == 0 || self.wiener_substeps == 0 {
            return bad(String::from("record_stride and wiener_substeps must be positive"));
        }
        Ok(())
    }

    /// Number of steps; the last one is shortened to land on `T`.
    pub fn steps(&self) -> usize {
        Float::ceil(self.t_final / self.dt * (1.0 - 1e-12)) as usize
    }

    pub fn step_time(&self, i: usize) -> f64 {
        Float::min(i as f64 * self.dt, self.t_final)
    }

    /// FNV-1a hash of the canonical JSON form.
    pub fn config_hash(&self) -> u64 {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        fnv1a(&bytes)
    }
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BreakdownReason {
    W1infCap,
    HsCap,
    Nonfinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakdown {
    /// Time at which the run was halted.
    pub time: f64,
    /// What triggered the halt first.
    pub reason: BreakdownReason,
}

/// First breach times of each cap, for the blow-up dichotomy.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CapHits {
    pub w1inf: Option<f64>,
    pub hs: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitTime {
    pub radius: f64,
    pub time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub norm_reports: Vec<NormReport>,
    pub exit_times: Vec<ExitTime>,
    pub breakdown: Option<Breakdown>,
    pub cap_hits: CapHits,
    /// Suprema over every step, not only recorded ones.
    pub sup_hs: f64,
    pub sup_w1inf: f64,
    pub final_time: f64,
    pub seed: u64,
    pub config_hash: u64,
}

impl TrajectoryRecord {
    pub fn exit_time(&self, radius: f64) -> Option<f64> {
        self.exit_times.iter().find(|e| e.radius == radius).and_then(|e| e.time)
    }
}

fn rk4(u: &Field, dt: f64, params: &DriftParams, depth: u32, adaptive: bool) -> Result<Field> {
    let eval = |v: &Field| -> Result<Field> {
        let chi = cutoff_factor(v, params)?;
        drift_with_factor(v, params, chi)
    };
    let k1 = eval(u)?;
    let mut stage = u.clone();
    stage.add_scaled(-0.5 * dt, &k1)?;
    let k2 = eval(&stage)?;
    let mut stage = u.clone();
    stage.add_scaled(-0.5 * dt, &k2)?;
    let k3 = eval(&stage)?;
    let mut stage = u.clone();
    stage.add_scaled(-dt, &k3)?;
    let k4 = eval(&stage)?;
    if adaptive && depth < 8 {
        let base = h_norm(&k1, 0.0);
        let spike = [&k2, &k3, &k4].iter().map(|k| h_norm(k, 0.0)).fold(0.0, Float::max);
        if base > 0.0 && spike > 10.0 * base || !spike.is_finite() {
            let half = rk4(u, 0.5 * dt, params, depth + 1, adaptive)?;
            return rk4(&half, 0.5 * dt, params, depth + 1, adaptive);
        }
    }
    let mut out = u.clone();
    out.add_scaled(-dt / 6.0, &k1)?;
    out.add_scaled(-dt / 3.0, &k2)?;
    out.add_scaled(-dt / 3.0, &k3)?;
    out.add_scaled(-dt / 6.0, &k4)?;
    Ok(out)
}

/// One step of length `dt` from time `t`. `increments` holds one Brownian
/// increment per noise component and is ignored without noise.
pub fn step(u: &Field, t: f64, dt: f64, cfg: &SimConfig, increments: &[f64]) -> Result<Field> {
    if !u.is_finite() {
        return Err(Error::NonFinite { time: t });
    }
    let params = &cfg.drift;
    let next = match cfg.scheme {
        Scheme::Rk4Det => rk4(u, dt, params, 0, cfg.adaptive)?,
        Scheme::EulerMaruyama | Scheme::HeunDriftEm => {
            let chi = cutoff_factor(u, params)?;
            let d0 = drift_with_factor(u, params, chi)?;
            let mut out = u.clone();
            if cfg.scheme == Scheme::EulerMaruyama {
                out.add_scaled(-dt, &d0)?;
            } else {
                let mut predictor = u.clone();
                predictor.add_scaled(-dt, &d0)?;
                let chi_p = cutoff_factor(&predictor, params)?;
                let d1 = drift_with_factor(&predictor, params, chi_p)?;
                out.add_scaled(-0.5 * dt, &d0)?;
                out.add_scaled(-0.5 * dt, &d1)?;
            }
            if !cfg.noise.is_none() {
                let dim = cfg.noise.dimension();
                if increments.len() != dim {
                    return Err(Error::LengthMismatch {
                        expected: dim,
                        found: increments.len(),
                    });
                }
                for (g, dw) in eval_noise(&cfg.noise, t, u)?.iter().zip(increments) {
                    out.add_scaled(chi * dw, g)?;
                }
            }
            out
        }
    };
    if next.is_finite() {
        Ok(next)
    } else {
        Err(Error::NonFinite { time: t + dt })
    }
}

/// Advances one trajectory step by step, owning its Brownian stream.
pub struct Stepper {
    cfg: SimConfig,
    u: Field,
    index: usize,
    steps: usize,
    stream: WienerStream,
}

impl Stepper {
    pub fn new(u0: &Field, cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        if *u0.grid().spec() != cfg.grid {
            return Err(Error::GridMismatch);
        }
        if !u0.is_finite() {
            return Err(Error::NonFinite { time: 0.0 });
        }
        Ok(Self {
            cfg: cfg.clone(),
            u: u0.clone(),
            index: 0,
            steps: cfg.steps(),
            stream: WienerStream::new(cfg.seed),
        })
    }

    pub fn state(&self) -> &Field {
        &self.u
    }

    pub fn time(&self) -> f64 {
        self.cfg.step_time(self.index)
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn finished(&self) -> bool {
        self.index >= self.steps
    }

    /// Takes one step. On failure the state is left unchanged.
    pub fn advance(&mut self) -> Result<()> {
        let t = self.time();
        let dt = self.cfg.step_time(self.index + 1) - t;
        let dim = self.cfg.noise.dimension();
        let dw = if dim > 0 {
            self.stream.refined_increments(dt, dim, self.cfg.wiener_substeps)
        } else {
            Vec::new()
        };
        self.u = step(&self.u, t, dt, &self.cfg, &dw)?;
        self.index += 1;
        Ok(())
    }
}

/// Runs `u0` to `T`, a breakdown, or exit of every radius when halting on
/// exit. `observe` sees every recorded state.
pub fn simulate_with(u0: &Field, cfg: &SimConfig, mut observe: impl FnMut(f64, &Field)) -> Result<TrajectoryRecord> {
    let mut stepper = Stepper::new(u0, cfg)?;
    let s = cfg.sobolev_index;
    let mut record = TrajectoryRecord {
        times: Vec::new(),
        norm_reports: Vec::new(),
        exit_times: cfg
            .exit_radii
            .iter()
            .map(|&radius| ExitTime { radius, time: None })
            .collect(),
        breakdown: None,
        cap_hits: CapHits::default(),
        sup_hs: 0.0,
        sup_w1inf: 0.0,
        final_time: 0.0,
        seed: cfg.seed,
        config_hash: cfg.config_hash(),
    };
    let mut first_breach: Option<(f64, BreakdownReason)> = None;
    loop {
        let t = stepper.time();
        let u = stepper.state();
        let last = stepper.finished();
        let recorded = stepper.index() % cfg.record_stride == 0 || last;
        let (hs, w1) = if recorded {
            let report = NormReport::measure(u, t, &cfg.s_track);
            let pair = (report.h(s).unwrap_or(0.0), report.w1_inf);
            record.times.push(t);
            record.norm_reports.push(report);
            observe(t, u);
            pair
        } else {
            (h_norm(u, s), w1inf_norm(u))
        };
        record.final_time = t;
        record.sup_hs = Float::max(record.sup_hs, hs);
        record.sup_w1inf = Float::max(record.sup_w1inf, w1);
        for e in record.exit_times.iter_mut() {
            if e.time.is_none() && hs > e.radius {
                e.time = Some(t);
            }
        }
        if record.cap_hits.w1inf.is_none() && w1 >= cfg.caps.w1inf {
            record.cap_hits.w1inf = Some(t);
            first_breach.get_or_insert((t, BreakdownReason::W1infCap));
        }
        if record.cap_hits.hs.is_none() && hs >= cfg.caps.hs {
            record.cap_hits.hs = Some(t);
            first_breach.get_or_insert((t, BreakdownReason::HsCap));
        }
        if let Some((t0, reason)) = first_breach {
            let both = record.cap_hits.w1inf.is_some() && record.cap_hits.hs.is_some();
            if both || t - t0 >= cfg.caps.grace || last {
                if !recorded {
                    let report = NormReport::measure(u, t, &cfg.s_track);
                    record.times.push(t);
                    record.norm_reports.push(report);
                    observe(t, u);
                }
                record.breakdown = Some(Breakdown { time: t, reason });
                break;
            }
        }
        let all_exited = !record.exit_times.is_empty() && record.exit_times.iter().all(|e| e.time.is_some());
        if last || (cfg.halt_on_exit && all_exited) {
            if !recorded {
                let report = NormReport::measure(u, t, &cfg.s_track);
                record.times.push(t);
                record.norm_reports.push(report);
                observe(t, u);
            }
            break;
        }
        match stepper.advance() {
            Ok(()) => {}
            Err(Error::NonFinite { time }) => {
                if !recorded {
                    let report = NormReport::measure(stepper.state(), t, &cfg.s_track);
                    record.times.push(t);
                    record.norm_reports.push(report);
                }
                let reason = first_breach.map(|b| b.1).unwrap_or(BreakdownReason::Nonfinite);
                record.breakdown = Some(Breakdown { time, reason });
                record.final_time = time;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(record)
}

pub fn simulate(u0: &Field, cfg: &SimConfig) -> Result<TrajectoryRecord> {
    simulate_with(u0, cfg, |_, _| {})
}

/// First recorded time with `||u||_{H^s} > R`.
pub fn exiting_time(record: &TrajectoryRecord, radius: f64, s: f64) -> Result<Option<f64>> {
    for report in &record.norm_reports {
        match report.h(s) {
            None => return Err(Error::UntrackedIndex(s)),
            Some(v) if v > radius => return Ok(Some(report.time)),
            Some(_) => {}
        }
    }
    Ok(None)
}

/// Grid helper shared by callers that build `u0` for a config.
pub fn grid_for(cfg: &SimConfig) -> Result<Grid> {
    Grid::new(cfg.grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn config(n: usize) -> SimConfig {
        SimConfig::deterministic(GridSpec::new(PI, n).unwrap(), 1, 0.01, 0.1).unwrap()
    }

    #[test]
    fn constant_state_is_fixed() {
        let cfg = config(32);
        let g = grid_for(&cfg).unwrap();
        let u = Field::from_fn(&g, |_| 0.7);
        let v = step(&u, 0.0, cfg.dt, &cfg, &[]).unwrap();
        assert_eq!(u.samples(), v.samples());
    }

    #[test]
    fn euler_without_noise_is_forward_euler() {
        let mut cfg = config(32);
        cfg.scheme = Scheme::EulerMaruyama;
        let g = grid_for(&cfg).unwrap();
        let u = Field::from_fn(&g, |x| 0.3 * x.sin());
        let v = step(&u, 0.0, cfg.dt, &cfg, &[]).unwrap();
        let d = crate::dynamics::drift(&u, &cfg.drift).unwrap();
        let mut w = u.clone();
        w.add_scaled(-cfg.dt, &d).unwrap();
        assert_eq!(v.samples(), w.samples());
    }

    #[test]
    fn config_checks() {
        let mut cfg = config(32);
        cfg.noise = NoiseModel::cylindrical(0.1, 4);
        assert!(cfg.validate().is_err());
        let mut cfg = config(32);
        cfg.dt = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = config(32);
        cfg.sobolev_index = 2.5;
        assert!(cfg.validate().is_err());
        let mut cfg = config(32);
        cfg.k = 2;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn step_count_lands_on_final_time() {
        let mut cfg = config(32);
        cfg.t_final = 0.105;
        assert_eq!(cfg.steps(), 11);
        assert_eq!(cfg.step_time(11), 0.105);
        cfg.t_final = 0.1;
        assert_eq!(cfg.steps(), 10);
    }

    #[test]
    fn exit_time_uses_right_endpoint() {
        let mut cfg = config(32);
        cfg.exit_radii = alloc::vec![1.0];
        let mk = |t: f64, v: f64| NormReport {
            time: t,
            sobolev: alloc::vec![crate::norms::SobolevNorm { s: 3.0, value: v }],
            l_inf: 0.0,
            w1_inf: 0.0,
        };
        let record = TrajectoryRecord {
            times: alloc::vec![0.0, 0.1, 0.2],
            norm_reports: alloc::vec![mk(0.0, 0.5), mk(0.1, 0.9), mk(0.2, 1.2)],
            exit_times: Vec::new(),
            breakdown: None,
            cap_hits: CapHits::default(),
            sup_hs: 1.2,
            sup_w1inf: 0.0,
            final_time: 0.2,
            seed: 0,
            config_hash: 0,
        };
        assert_eq!(exiting_time(&record, 1.0, 3.0).unwrap(), Some(0.2));
        assert_eq!(exiting_time(&record, 2.0, 3.0).unwrap(), None);
        assert_eq!(exiting_time(&record, 1.0, 2.0), Err(Error::UntrackedIndex(2.0)));
    }
}
