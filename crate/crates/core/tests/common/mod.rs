#![allow(dead_code)]

use proptest::prelude::*;
use sgch_core::{Field, Grid, GridSpec};
use std::f64::consts::PI;

pub fn grid(half_length: f64, points: usize) -> Grid {
    Grid::new(GridSpec::new(half_length, points).unwrap()).unwrap()
}

/// `c0 + sum_j (a_j cos(xi_j x) + b_j sin(xi_j x)) / j^decay`.
pub fn trig_field(g: &Grid, coeffs: &[f64], decay: f64) -> Field {
    let base = PI / g.half_length();
    Field::from_fn(g, |x| {
        let mut v = coeffs[0];
        for (j, pair) in coeffs[1..].chunks(2).enumerate() {
            let m = (j + 1) as f64;
            let w = m.powf(-decay);
            v += w * pair[0] * (m * base * x).cos();
            if pair.len() > 1 {
                v += w * pair[1] * (m * base * x).sin();
            }
        }
        v
    })
}

/// Coefficients for fields with `modes` resolved Fourier modes.
pub fn coeffs(modes: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 2 * modes + 1)
}

/// Deterministic pseudo-random coefficients for fixed suites.
pub fn suite_coeffs(seed: u64, modes: usize) -> Vec<f64> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..2 * modes + 1)
        .map(|_| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
        .collect()
}

pub fn max_abs_diff(a: &Field, b: &Field) -> f64 {
    a.samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &Field) -> f64 {
    a.samples().iter().fold(0.0, |m, v| m.max(v.abs()))
}
