//! Noise coefficients, Wiener increments and the Lyapunov inequality check.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::Field;
use crate::norms::{h_norm, w1inf_norm};
use crate::product::ProductSpace;

/// A bounded function of time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeProfile {
    Constant {
        value: f64,
    },
    /// `mean + amplitude * sin(frequency * t)`.
    Oscillating {
        mean: f64,
        amplitude: f64,
        frequency: f64,
    },
}

impl TimeProfile {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant { value } => value,
            TimeProfile::Oscillating {
                mean,
                amplitude,
                frequency,
            } => mean + amplitude * Float::sin(frequency * t),
        }
    }

    /// Lower and upper bounds over all times.
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            TimeProfile::Constant { value } => (value, value),
            TimeProfile::Oscillating { mean, amplitude, .. } => (mean - amplitude.abs(), mean + amplitude.abs()),
        }
    }

    fn check_finite(&self, name: &'static str) -> Result<()> {
        let ok = match *self {
            TimeProfile::Constant { value } => value.is_finite(),
            TimeProfile::Oscillating {
                mean,
                amplitude,
                frequency,
            } => mean.is_finite() && amplitude.is_finite() && frequency.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(name, "time profile must be finite"))
        }
    }
}

/// Default Sobolev index of the damping factor in [`NoiseModel::ExpDamped`].
pub const DEFAULT_RHO0: f64 = 0.75;

/// Default truncation of the cylindrical noise.
pub const DEFAULT_CYLINDRICAL_MODES: usize = 16;

/// State-dependent noise coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseModel {
    #[default]
    None,
    /// `b(t) (1 + ||u||_{W^{1,inf}})^theta u`.
    ScalarPower { b: TimeProfile, theta: f64 },
    /// `f(t) exp(-1 / ||u||_{H^{rho0}}) u^m`.
    ExpDamped { f: TimeProfile, rho0: f64, m: u32 },
    /// `sum_n c_n psi_n(x) u dW_n` with the torus Fourier basis `psi_n`.
    DiagonalCylindrical { coefficients: Vec<f64> },
}

impl NoiseModel {
    /// Cylindrical noise with coefficients `amplitude * n^{-2}`, `n = 1..=modes`.
    pub fn cylindrical(amplitude: f64, modes: usize) -> Self {
        NoiseModel::DiagonalCylindrical {
            coefficients: (1..=modes).map(|n| amplitude / (n * n) as f64).collect(),
        }
    }

    /// Number of independent Brownian motions driving the model.
    pub fn dimension(&self) -> usize {
        match self {
            NoiseModel::None => 0,
            NoiseModel::ScalarPower { .. } | NoiseModel::ExpDamped { .. } => 1,
            NoiseModel::DiagonalCylindrical { coefficients } => coefficients.len(),
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, NoiseModel::None)
    }

    /// ScalarPower with `theta >= k/2`.
    pub fn is_regularizing(&self, k: u32) -> bool {
        matches!(self, NoiseModel::ScalarPower { theta, .. } if *theta >= k as f64 / 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseModel::None => Ok(()),
            NoiseModel::ScalarPower { b, theta } => {
                b.check_finite("b")?;
                let (lo, _) = b.bounds();
                if lo <= 0.0 {
                    return Err(invalid(
                        "b",
                        format!("must stay above a positive bound, lower bound is {lo}"),
                    ));
                }
                if !theta.is_finite() || *theta < 0.0 {
                    return Err(invalid(
                        "theta",
                        format!("must be finite and non-negative, got {theta}"),
                    ));
                }
                Ok(())
            }
            NoiseModel::ExpDamped { f, rho0, m } => {
                f.check_finite("f")?;
                if !(*rho0 > 0.5 && *rho0 < 1.0) {
                    return Err(invalid("rho0", format!("must lie in (1/2, 1), got {rho0}")));
                }
                if *m == 0 {
                    return Err(invalid("m", "power must be positive"));
                }
                Ok(())
            }
            NoiseModel::DiagonalCylindrical { coefficients } => {
                if coefficients.is_empty() {
                    return Err(invalid("coefficients", "need at least one mode"));
                }
                if !coefficients.iter().all(|c| c.is_finite()) {
                    return Err(invalid("coefficients", "must be finite"));
                }
                Ok(())
            }
        }
    }
}

/// Orthonormal torus basis: `psi_{2j-1} = cos(pi j x / L) / sqrt L`,
/// `psi_{2j} = sin(pi j x / L) / sqrt L`.
pub fn torus_basis(n: usize, half_length: f64, x: f64) -> f64 {
    let j = n.div_ceil(2) as f64;
    let arg = PI * j * x / half_length;
    let norm = 1.0 / Float::sqrt(half_length);
    if n % 2 == 1 {
        norm * Float::cos(arg)
    } else {
        norm * Float::sin(arg)
    }
}

/// Noise fields at `(t, u)`, one per Brownian component. Empty for no noise.
pub fn eval_noise(model: &NoiseModel, t: f64, u: &Field) -> Result<Vec<Field>> {
    model.validate()?;
    Ok(match model {
        NoiseModel::None => Vec::new(),
        NoiseModel::ScalarPower { b, theta } => {
            let factor = b.value(t) * Float::powf(1.0 + w1inf_norm(u), *theta);
            alloc::vec![u.scaled(factor)]
        }
        NoiseModel::ExpDamped { f, rho0, m } => {
            let norm = h_norm(u, *rho0);
            if norm == 0.0 {
                return Ok(alloc::vec![Field::zeros(u.grid())]);
            }
            let factor = f.value(t) * Float::exp(-1.0 / norm);
            let space = ProductSpace::new(u.grid(), true);
            let power: Vec<f64> = space.lift(u).iter().map(|v| Float::powi(*v, *m as i32)).collect();
            let mut out = if *m == 1 { u.clone() } else { space.project(&power) };
            out.scale(factor);
            alloc::vec![out]
        }
        NoiseModel::DiagonalCylindrical { coefficients } => {
            let grid = u.grid();
            let space = ProductSpace::new(grid, true);
            let lifted = space.lift(u);
            let l = grid.half_length();
            let m = space.len();
            let h = 2.0 * l / m as f64;
            coefficients
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let vals: Vec<f64> = lifted
                        .iter()
                        .enumerate()
                        .map(|(p, v)| c * torus_basis(i + 1, l, -l + h * p as f64) * v)
                        .collect();
                    space.project(&vals)
                })
                .collect()
        }
    })
}

/// Seeded stream of Brownian increments. Each trajectory owns one.
#[derive(Debug, Clone)]
pub struct WienerStream {
    rng: ChaCha20Rng,
}

impl WienerStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    /// `count` independent `N(0, dt)` samples.
    pub fn increments(&mut self, dt: f64, count: usize) -> Vec<f64> {
        let sd = Float::sqrt(dt);
        (0..count)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut self.rng);
                sd * z
            })
            .collect()
    }

    /// One increment over `dt` per component, accumulated from `substeps`
    /// finer increments so coarser steps see the same Brownian path.
    pub fn refined_increments(&mut self, dt: f64, count: usize, substeps: u32) -> Vec<f64> {
        let sub = dt / substeps.max(1) as f64;
        let mut total = alloc::vec![0.0; count];
        for _ in 0..substeps.max(1) {
            for (acc, dw) in total.iter_mut().zip(self.increments(sub, count)) {
                *acc += dw;
            }
        }
        total
    }
}

/// Independent `N(0, dt)` increments for the model's dimension.
pub fn wiener_increments(model: &NoiseModel, dt: f64, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid("dt", format!("must be positive, got {dt}")));
    }
    let dim = model.dimension().max(1);
    let mut stream = WienerStream::new(seed);
    Ok((0..count).map(|_| stream.increments(dt, dim)).collect())
}

/// Constants entering the Lyapunov inequality with `V(x) = log(1 + x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovParams {
    /// Growth constant of the `H^s` energy estimate.
    pub lambda_s: f64,
    pub k: u32,
    /// Embedding constant with `||u||_{W^{1,inf}} <= K ||u||_{H^s}`.
    pub embedding: f64,
}

/// `beta(t, x) = b(t) (1 + x)^theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerBeta {
    pub b: TimeProfile,
    pub theta: f64,
}

impl PowerBeta {
    pub fn value(&self, t: f64, x: f64) -> f64 {
        self.b.value(t) * Float::powf(1.0 + x, self.theta)
    }
}

fn lyapunov_sides(x: f64, y: f64, t: f64, beta: &PowerBeta, params: &LyapunovParams) -> (f64, f64) {
    let b = beta.value(t, x);
    let b2 = b * b;
    let y2 = y * y;
    let q = 1.0 + y2;
    let xk = Float::powi(x, params.k as i32);
    let lhs = (2.0 * params.lambda_s * xk * y2 + b2 * y2) / q - 2.0 * b2 * y2 * y2 / (q * q);
    let damping = 2.0 * b2 * y2 * y2 / (q * q * (1.0 + Float::ln(q)));
    (lhs, damping)
}

/// Left side minus right side of the Lyapunov inequality
/// `(2 lambda x^k y^2 + beta^2 y^2)/(1+y^2) - 2 beta^2 y^4/(1+y^2)^2
///   <= M1 - M2 2 beta^2 y^4 / ((1+y^2)^2 (1 + log(1+y^2)))`.
pub fn lyapunov_gap(x: f64, y: f64, t: f64, beta: &PowerBeta, params: &LyapunovParams, m1: f64, m2: f64) -> f64 {
    let (lhs, damping) = lyapunov_sides(x, y, t, beta, params);
    lhs - (m1 - m2 * damping)
}

/// Smallest `M1` making the gap non-positive at every `x` of the grid, with
/// `y = x / K`.
pub fn fit_m1(xs: &[f64], t: f64, beta: &PowerBeta, params: &LyapunovParams, m2: f64) -> f64 {
    xs.iter()
        .map(|&x| {
            let (lhs, damping) = lyapunov_sides(x, x / params.embedding, t, beta, params);
            lhs + m2 * damping
        })
        .fold(0.0, Float::max)
}

/// `count` log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (Float::ln(lo), Float::ln(hi));
    (0..count)
        .map(|i| Float::exp(a + (b - a) * i as f64 / (count.max(2) - 1) as f64))
        .collect()
}
