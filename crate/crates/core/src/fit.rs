//! Least-squares power-law fits on log-log data.

use alloc::format;
use alloc::vec::Vec;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// `y ~ C x^slope` fitted by least squares on `(ln x, ln y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    /// Log-space residuals, one per point.
    pub residuals: Vec<f64>,
}

impl PowerFit {
    pub fn rms_residual(&self) -> f64 {
        let n = self.residuals.len().max(1) as f64;
        Float::sqrt(self.residuals.iter().map(|r| r * r).sum::<f64>() / n)
    }
}

pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<PowerFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(invalid(
            "data",
            format!("need two or more paired points, got {} and {}", xs.len(), ys.len()),
        ));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(invalid("data", "log-log fit needs positive finite values"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| Float::ln(*v)).collect();
    let ly: Vec<f64> = ys.iter().map(|v| Float::ln(*v)).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(invalid("data", "abscissae must not all coincide"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = lx.iter().zip(&ly).map(|(x, y)| y - (intercept + slope * x)).collect();
    Ok(PowerFit {
        slope,
        intercept,
        residuals,
    })
}
