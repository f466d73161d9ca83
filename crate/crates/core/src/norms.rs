//! Sobolev and Lipschitz norms.

use alloc::format;
use alloc::vec::Vec;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::bump::PlateauBump;
use crate::error::{invalid, Result};
use crate::field::Field;
use crate::grid::{Grid, GridSpec};
use crate::spectral::derivative;

/// `||u||_{H^s} = (2L sum (1+xi^2)^s |u_hat|^2)^{1/2}`.
pub fn h_norm(u: &Field, s: f64) -> f64 {
    let xi = u.grid().wavenumbers();
    let sum: f64 = u
        .spectrum()
        .iter()
        .zip(xi)
        .map(|(c, &w)| Float::powf(1.0 + w * w, s) * c.norm_sqr())
        .sum();
    Float::sqrt(2.0 * u.grid().half_length() * sum)
}

pub fn l2_norm(u: &Field) -> f64 {
    h_norm(u, 0.0)
}

/// Sup norm estimated on a 4x spectrally refined grid.
pub fn linf_norm(u: &Field) -> f64 {
    u.oversampled(4).iter().fold(0.0, |m, v| Float::max(m, Float::abs(*v)))
}

/// `||u||_{W^{1,inf}} = max(||u||_inf, ||u_x||_inf)`.
pub fn w1inf_norm(u: &Field) -> f64 {
    Float::max(linf_norm(u), linf_norm(&derivative(u)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevNorm {
    pub s: f64,
    pub value: f64,
}

/// Norms of one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub time: f64,
    pub sobolev: Vec<SobolevNorm>,
    pub l_inf: f64,
    pub w1_inf: f64,
}

impl NormReport {
    pub fn measure(u: &Field, time: f64, s_list: &[f64]) -> Self {
        let l_inf = linf_norm(u);
        let lip = linf_norm(&derivative(u));
        Self {
            time,
            sobolev: s_list.iter().map(|&s| SobolevNorm { s, value: h_norm(u, s) }).collect(),
            l_inf,
            w1_inf: Float::max(l_inf, lip),
        }
    }

    pub fn h(&self, s: f64) -> Option<f64> {
        self.sobolev.iter().find(|n| n.s == s).map(|n| n.value)
    }
}

/// Constant `K` with `||u||_{W^{1,inf}} <= K ||u||_{H^s}` for every field on
/// the grid: `K^2 = (1/2L) sum_j (1 + xi_j^2)^{1-s}`.
pub fn embedding_constant(spec: &GridSpec, s: f64) -> f64 {
    let sum: f64 = (0..spec.points)
        .map(|j| Float::powf(1.0 + Float::powi(spec.wavenumber(j), 2), 1.0 - s))
        .sum();
    Float::sqrt(sum / (2.0 * spec.half_length))
}

/// Grid on which `psi(x / n^delta)` modulated at frequency `n` is resolved:
/// half-length four times the scaled support, and a power-of-two point count
/// whose largest wavenumber is at least `1.5 n`.
pub fn scaled_bump_grid(n: f64, delta: f64, support_radius: f64) -> Result<GridSpec> {
    if !(n >= 1.0 && n.is_finite()) {
        return Err(invalid("n", format!("frequency must be at least 1, got {n}")));
    }
    let half_length = 4.0 * support_radius * Float::powf(n, delta);
    let needed = 2.0 * half_length * 1.5 * n / core::f64::consts::PI;
    let mut points = 64usize;
    while (points as f64) < needed {
        points *= 2;
    }
    GridSpec::new(half_length, points)
}

/// Which carrier multiplies the scaled profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Carrier {
    Cos,
    Sin,
}

/// `n^{-delta/2 - r} ||psi(x/n^delta) carrier(n x - alpha)||_{H^r}`, which tends
/// to `||psi||_{L^2} / sqrt 2` as `n` grows.
pub fn bump_norm_ratio(profile: &PlateauBump, n: f64, delta: f64, r: f64, alpha: f64, carrier: Carrier) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", format!("must lie in (0, 1), got {delta}")));
    }
    let spec = scaled_bump_grid(n, delta, profile.support_radius())?;
    let grid = Grid::new(spec)?;
    let width = Float::powf(n, delta);
    let field = Field::from_fn(&grid, |x| {
        let phase = n * x - alpha;
        let wave = match carrier {
            Carrier::Cos => Float::cos(phase),
            Carrier::Sin => Float::sin(phase),
        };
        profile.value(x / width) * wave
    });
    Ok(Float::powf(n, -0.5 * delta - r) * h_norm(&field, r))
}
