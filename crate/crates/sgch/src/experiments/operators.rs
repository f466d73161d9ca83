use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::json;
use sgch_core::bump::gauss_legendre;
use sgch_core::exec::Executor;
use sgch_core::integrate::{simulate_with, Scheme, SimConfig, Stepper};
use sgch_core::noise::{NoiseModel, TimeProfile, WienerStream};
use sgch_core::norms::{h_norm, l2_norm};
use sgch_core::spectral::{bessel_potential, derivative, helmholtz_inverse, mollify};
use sgch_core::{Field, Grid, GridSpec};

use super::{cell, fmt_list, random_trig_field, slope, tolerance, Outcome, Result, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorParams {
    pub seed: u64,
    pub fields: usize,
    pub points: usize,
}

impl Default for OperatorParams {
    fn default() -> Self {
        Self {
            seed: 2024,
            fields: 20,
            points: 128,
        }
    }
}

fn relative(a: &Field, b: &Field) -> Result<f64> {
    Ok(l2_norm(&a.difference(b)?) / l2_norm(b).max(f64::MIN_POSITIVE))
}

/// Commutation, self-adjointness and inversion identities on random
/// band-limited fields.
pub fn operator_identities(p: &OperatorParams) -> Result<Outcome> {
    let grid = Grid::new(GridSpec::new(PI, p.points)?)?;
    let modes = p.points / 2 - 1;
    let mut stream = WienerStream::new(p.seed);
    let (mut commutator, mut adjoint, mut inverse) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..p.fields {
        let u = random_trig_field(&grid, &mut stream, modes, 1.0);
        let v = random_trig_field(&grid, &mut stream, modes, 1.0);
        for eps in [0.1, 0.5, 1.0] {
            for s in [-1.5, 0.5, 3.0] {
                let a = bessel_potential(&mollify(&u, eps)?, s);
                let b = mollify(&bessel_potential(&u, s), eps)?;
                commutator = commutator.max(relative(&a, &b)?);
            }
            let left = mollify(&u, eps)?.inner_l2(&v)?;
            let right = u.inner_l2(&mollify(&v, eps)?)?;
            adjoint = adjoint.max((left - right).abs() / (l2_norm(&u) * l2_norm(&v)));
        }
        let second = derivative(&derivative(&u));
        let helmholtz = Field::linear_combination(&[(1.0, &u), (-1.0, &second)])?;
        inverse = inverse.max(relative(&helmholtz_inverse(&helmholtz), &u)?);
    }
    let mut out = Outcome::default();
    let mut table = Table::new("operators", &["identity", "max_relative_error", "bound"]);
    let bound = tolerance::OPERATOR_IDENTITY;
    for (name, err) in [
        ("bessel potential commutes with the mollifier", commutator),
        ("mollifier is self-adjoint", adjoint),
        ("helmholtz inverse undoes 1 - d_xx", inverse),
    ] {
        out.check(
            name,
            err <= bound,
            format!("max relative error {err:.3e} over {} fields, bound {bound:e}", p.fields),
        );
        table.push(vec![name.to_string(), cell(err), cell(bound)]);
    }
    out.tables.push(table);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelParams {
    pub half_length: f64,
    pub points: usize,
}

impl Default for KernelParams {
    fn default() -> Self {
        Self {
            half_length: 40.0,
            points: 4096,
        }
    }
}

type TestField = (&'static str, fn(f64) -> f64);

const KERNEL_FIELDS: [TestField; 5] = [
    ("gaussian", |x| (-x * x).exp()),
    ("shifted gaussian", |x| (-(x - 3.0) * (x - 3.0) / 2.0).exp()),
    ("sech squared", |x| 1.0 / x.cosh().powi(2)),
    ("odd gaussian", |x| x * (-x * x / 4.0).exp()),
    ("modulated gaussian", |x| (2.0 * x).cos() * (-x * x / 8.0).exp()),
];

/// `(1/2) int e^{-|x - y|} f(y) dy`, split at the kink.
fn kernel_convolution(f: fn(f64) -> f64, x: f64, reach: f64) -> f64 {
    let integrand = |y: f64| 0.5 * (-(x - y).abs()).exp() * f(y);
    gauss_legendre(integrand, x - reach, x, 64) + gauss_legendre(integrand, x, x + reach, 64)
}

/// The Fourier multiplier `(1 - d_xx)^{-1}` against direct quadrature of the
/// exponential kernel.
pub fn kernel_equivalence(p: &KernelParams) -> Result<Outcome> {
    let grid = Grid::new(GridSpec::new(p.half_length, p.points)?)?;
    let reach = 0.9 * p.half_length;
    let mut out = Outcome::default();
    let mut table = Table::new("kernel", &["field", "relative_l2_error"]);
    let mut worst = 0.0f64;
    for (name, f) in KERNEL_FIELDS {
        let u = Field::from_fn(&grid, f);
        let spectral = helmholtz_inverse(&u);
        let direct = Field::from_samples(
            &grid,
            grid.points_iter().map(|x| kernel_convolution(f, x, reach)).collect(),
        )?;
        let err = h_norm(&spectral.difference(&direct)?, 0.0) / h_norm(&direct, 0.0);
        worst = worst.max(err);
        table.push(vec![name.to_string(), cell(err)]);
        out.record("kernel", json!({ "field": name, "relative_error": err }));
    }
    let bound = tolerance::KERNEL_QUADRATURE;
    let size_ok = p.half_length >= 40.0 && p.points >= 4096;
    out.check(
        "multiplier matches kernel quadrature",
        worst <= bound && size_ok,
        format!(
            "worst relative L2 error {worst:.3e} over {} fields at L = {}, N = {}, bound {bound:e}",
            KERNEL_FIELDS.len(),
            p.half_length,
            p.points
        ),
    );
    out.tables.push(table);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverParams {
    pub energy_points: usize,
    pub energy_half_length: f64,
    pub energy_dt: f64,
    pub energy_t_final: f64,
    pub em_points: usize,
    pub em_paths: usize,
    pub em_t_final: f64,
    pub em_b: f64,
    pub seed: u64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            energy_points: 256,
            energy_half_length: 10.0,
            energy_dt: 1e-4,
            energy_t_final: 1.0,
            em_points: 128,
            em_paths: 16,
            em_t_final: 0.25,
            em_b: 0.5,
            seed: 0,
        }
    }
}

/// Largest relative change of `||u||_{H^1}` along a deterministic
/// Camassa-Holm run from a two-hump momentum profile.
fn energy_drift(p: &SolverParams, dt: f64) -> Result<f64> {
    let spec = GridSpec::new(p.energy_half_length, p.energy_points)?;
    let grid = Grid::new(spec)?;
    let mut cfg = SimConfig::deterministic(spec, 1, dt, p.energy_t_final)?;
    cfg.s_track = vec![1.0];
    cfg.sobolev_index = 1.0;
    cfg.record_stride = ((p.energy_t_final / dt / 100.0).round() as usize).max(1);
    let momentum = Field::from_fn(&grid, |x| {
        40.0 * ((-4.0 * (x - 1.0) * (x - 1.0)).exp() + 0.5 * (-8.0 * (x + 1.5) * (x + 1.5)).exp())
    });
    let u0 = helmholtz_inverse(&momentum);
    let e0 = h_norm(&u0, 1.0);
    let mut worst = 0.0f64;
    let record = simulate_with(&u0, &cfg, |_, u| worst = worst.max((h_norm(u, 1.0) - e0).abs() / e0))?;
    if let Some(b) = record.breakdown {
        return Err(sgch_core::Error::NonFinite { time: b.time }.into());
    }
    Ok(worst)
}

const EM_LEVELS: [u32; 5] = [8, 9, 10, 11, 12];
const EM_REFERENCE_LEVEL: u32 = 16;

/// Solution at `T` with `2^level` Euler-Maruyama steps, every level driven by
/// the same Brownian path.
fn em_solution(p: &SolverParams, level: u32, seed: u64) -> Result<Field> {
    let spec = GridSpec::new(PI, p.em_points)?;
    let grid = Grid::new(spec)?;
    let u0 = Field::from_fn(&grid, |x| 0.5 * x.sin() + 0.2 * (2.0 * x).cos());
    let mut cfg = SimConfig::deterministic(spec, 1, p.em_t_final / 2f64.powi(level as i32), p.em_t_final)?;
    cfg.scheme = Scheme::EulerMaruyama;
    cfg.noise = NoiseModel::ScalarPower {
        b: TimeProfile::Constant { value: p.em_b },
        theta: 0.0,
    };
    cfg.seed = seed;
    cfg.wiener_substeps = 1 << (EM_REFERENCE_LEVEL - level);
    let mut stepper = Stepper::new(&u0, &cfg)?;
    while !stepper.finished() {
        stepper.advance()?;
    }
    Ok(stepper.state().clone())
}

/// Energy conservation of the deterministic solver and the strong order of
/// Euler-Maruyama.
pub fn solver_validation(p: &SolverParams, exec: &impl Executor) -> Result<Outcome> {
    let mut out = Outcome::default();
    let coarse = energy_drift(p, p.energy_dt)?;
    let fine = energy_drift(p, p.energy_dt / 2.0)?;
    let improvement = coarse / fine;
    out.check(
        "H1 norm conserved",
        coarse <= tolerance::ENERGY_DRIFT,
        format!(
            "relative drift {coarse:.3e} at dt = {:e}, bound {:e}",
            p.energy_dt,
            tolerance::ENERGY_DRIFT
        ),
    );
    out.check(
        "H1 drift improves with dt/2",
        improvement >= tolerance::ENERGY_IMPROVEMENT,
        format!(
            "drift {fine:.3e} at dt/2, improvement {improvement:.1}x, required {}x",
            tolerance::ENERGY_IMPROVEMENT
        ),
    );
    out.record(
        "energy",
        json!({ "dt": p.energy_dt, "coarse_drift": coarse, "fine_drift": fine }),
    );

    let per_path: Vec<Result<Vec<f64>>> = exec.map(p.em_paths, |i| {
        let seed = p.seed + i as u64;
        let reference = em_solution(p, EM_REFERENCE_LEVEL, seed)?;
        EM_LEVELS
            .iter()
            .map(|&level| Ok(l2_norm(&em_solution(p, level, seed)?.difference(&reference)?)))
            .collect()
    });
    let mut errors = vec![0.0; EM_LEVELS.len()];
    for path in per_path {
        for (e, v) in errors.iter_mut().zip(path?) {
            *e += v / p.em_paths as f64;
        }
    }
    let dts: Vec<f64> = EM_LEVELS.iter().map(|&l| p.em_t_final / 2f64.powi(l as i32)).collect();
    let order = slope(&dts, &errors);
    out.check(
        "Euler-Maruyama strong order",
        order >= tolerance::STRONG_ORDER,
        format!(
            "fitted slope {order:.3} over {} paths, errors {}, required {}",
            p.em_paths,
            fmt_list(&errors),
            tolerance::STRONG_ORDER
        ),
    );
    let mut table = Table::new("strong_order", &["dt", "mean_l2_error"]);
    for (dt, e) in dts.iter().zip(&errors) {
        table.push(vec![cell(*dt), cell(*e)]);
    }
    out.tables.push(table);
    Ok(out)
}
