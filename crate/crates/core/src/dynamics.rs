//! Deterministic drift of the generalized Camassa-Holm equation in nonlocal
//! form: `u_t + u^k u_x + F(u) = 0`.

use alloc::format;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::Field;
use crate::norms::{h_norm, w1inf_norm};
use crate::product::ProductSpace;
use crate::spectral::{check_mollifier, derivative, derivative_factor, mollifier_symbol, mollify, smooth_step};

/// Parameters shared by every evaluation of the drift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftParams {
    /// Nonlinearity degree, at least 1.
    pub k: u32,
    #[serde(default = "default_true")]
    pub dealias: bool,
    /// Mollifier parameter `eps`; `None` evaluates the unregularized drift.
    #[serde(default)]
    pub mollifier: Option<f64>,
    /// Cut-off radius `R > 1` applied through the `W^{1,inf}` norm.
    #[serde(default)]
    pub cutoff_radius: Option<f64>,
}

fn default_true() -> bool {
    true
}

impl DriftParams {
    pub fn new(k: u32) -> Result<Self> {
        let p = Self {
            k,
            dealias: true,
            mollifier: None,
            cutoff_radius: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_degree(self.k)?;
        if let Some(eps) = self.mollifier {
            check_mollifier(eps)?;
        }
        if let Some(r) = self.cutoff_radius {
            check_radius(r)?;
        }
        Ok(())
    }
}

pub(crate) fn check_degree(k: u32) -> Result<()> {
    if k == 0 {
        return Err(invalid("k", "nonlinearity degree must be at least 1"));
    }
    Ok(())
}

fn check_radius(r: f64) -> Result<()> {
    if !(r.is_finite() && r > 1.0) {
        return Err(invalid("R", format!("cut-off radius must exceed 1, got {r}")));
    }
    Ok(())
}

/// Smooth cut-off: 1 on `[0, R]`, 0 on `[2R, inf)`.
pub fn chi_r(x: f64, radius: f64) -> Result<f64> {
    check_radius(radius)?;
    Ok(smooth_step((2.0 * radius - x) / radius))
}

fn lift_with_derivative(space: &ProductSpace, u: &Field) -> (Vec<f64>, Vec<f64>) {
    (space.lift(u), space.lift(&derivative(u)))
}

fn powi(x: f64, p: i32) -> f64 {
    if p == 0 {
        1.0
    } else {
        Float::powi(x, p)
    }
}

/// `u^k u_x`.
pub fn transport(u: &Field, k: u32, dealias: bool) -> Result<Field> {
    check_degree(k)?;
    let space = ProductSpace::new(u.grid(), dealias);
    let (v, vx) = lift_with_derivative(&space, u);
    let prod: Vec<f64> = v.iter().zip(&vx).map(|(a, b)| powi(*a, k as i32) * b).collect();
    Ok(space.project(&prod))
}

fn helmholtz_derivative(space: &ProductSpace, values: &[f64], u: &Field, weight: f64) -> Field {
    let spec = space.project_spectrum(values);
    let grid = u.grid();
    let ny = grid.spec().nyquist_slot();
    let out = spec
        .iter()
        .zip(grid.wavenumbers())
        .enumerate()
        .map(|(i, (c, &xi))| c * derivative_factor(i, ny, xi) * (weight / (1.0 + xi * xi)))
        .collect();
    Field::from_spectrum(grid, out).expect("length matches grid")
}

/// `(1 - d_xx)^{-1} d_x (u^{k+1})`.
pub fn f1(u: &Field, k: u32, dealias: bool) -> Result<Field> {
    check_degree(k)?;
    let space = ProductSpace::new(u.grid(), dealias);
    let v = space.lift(u);
    let g: Vec<f64> = v.iter().map(|a| powi(*a, k as i32 + 1)).collect();
    Ok(helmholtz_derivative(&space, &g, u, 1.0))
}

/// `(2k-1)/2 (1 - d_xx)^{-1} d_x (u^{k-1} u_x^2)`.
pub fn f2(u: &Field, k: u32, dealias: bool) -> Result<Field> {
    check_degree(k)?;
    let space = ProductSpace::new(u.grid(), dealias);
    let (v, vx) = lift_with_derivative(&space, u);
    let g: Vec<f64> = v.iter().zip(&vx).map(|(a, b)| powi(*a, k as i32 - 1) * b * b).collect();
    Ok(helmholtz_derivative(&space, &g, u, (2.0 * k as f64 - 1.0) / 2.0))
}

/// `(k-1)/2 (1 - d_xx)^{-1} (u^{k-2} u_x^3)`, identically zero for `k = 1`.
pub fn f3(u: &Field, k: u32, dealias: bool) -> Result<Field> {
    check_degree(k)?;
    if k == 1 {
        return Ok(Field::zeros(u.grid()));
    }
    let space = ProductSpace::new(u.grid(), dealias);
    let (v, vx) = lift_with_derivative(&space, u);
    let g: Vec<f64> = v
        .iter()
        .zip(&vx)
        .map(|(a, b)| powi(*a, k as i32 - 2) * b * b * b)
        .collect();
    let weight = (k as f64 - 1.0) / 2.0;
    Ok(space.project(&g).multiply_real(|xi| weight / (1.0 + xi * xi)))
}

/// Spectrum of `u^k u_x + F(u)`, sharing the lifted samples between terms.
fn drift_spectrum(u: &Field, k: u32, dealias: bool, transport_of: Option<&Field>) -> Vec<Complex64> {
    let grid = u.grid();
    let space = ProductSpace::new(grid, dealias);
    let (v, vx) = lift_with_derivative(&space, u);
    let kk = k as i32;
    let c2 = (2.0 * k as f64 - 1.0) / 2.0;
    let c3 = (k as f64 - 1.0) / 2.0;
    let mut flux = Vec::with_capacity(v.len());
    let mut source = Vec::with_capacity(if k > 1 { v.len() } else { 0 });
    for (a, b) in v.iter().zip(&vx) {
        let ak1 = powi(*a, kk - 1);
        flux.push(ak1 * a * a + c2 * ak1 * b * b);
        if k > 1 {
            source.push(c3 * powi(*a, kk - 2) * b * b * b);
        }
    }
    let transport_spec = match transport_of {
        None => {
            let t: Vec<f64> = v.iter().zip(&vx).map(|(a, b)| powi(*a, kk) * b).collect();
            space.project_spectrum(&t)
        }
        Some(t) => t.spectrum().to_vec(),
    };
    let flux_spec = space.project_spectrum(&flux);
    let source_spec = if k > 1 {
        Some(space.project_spectrum(&source))
    } else {
        None
    };
    let ny = grid.spec().nyquist_slot();
    grid.wavenumbers()
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            let mut nonlocal = flux_spec[i] * derivative_factor(i, ny, xi);
            if let Some(s) = &source_spec {
                nonlocal += s[i];
            }
            transport_spec[i] + nonlocal / (1.0 + xi * xi)
        })
        .collect()
}

/// `F(u) = F1 + F2 + F3`.
pub fn nonlocal(u: &Field, k: u32, dealias: bool) -> Result<Field> {
    check_degree(k)?;
    let zero = Field::zeros(u.grid());
    let spec = drift_spectrum(u, k, dealias, Some(&zero));
    Field::from_spectrum(u.grid(), spec)
}

/// Cut-off factor `chi_R(||u||_{W^{1,inf}})`, or 1 without a cut-off.
pub fn cutoff_factor(u: &Field, params: &DriftParams) -> Result<f64> {
    match params.cutoff_radius {
        Some(r) => chi_r(w1inf_norm(u), r),
        None => Ok(1.0),
    }
}

/// Full drift `u^k u_x + F(u)`, mollified and cut off as configured. The
/// mollified form transports with `J_eps((J_eps u)^k d_x J_eps u)`.
pub fn drift(u: &Field, params: &DriftParams) -> Result<Field> {
    params.validate()?;
    let chi = cutoff_factor(u, params)?;
    drift_with_factor(u, params, chi)
}

pub(crate) fn drift_with_factor(u: &Field, params: &DriftParams, chi: f64) -> Result<Field> {
    if chi == 0.0 {
        return Ok(Field::zeros(u.grid()));
    }
    let k = params.k;
    let mut spec = match params.mollifier {
        None => drift_spectrum(u, k, params.dealias, None),
        Some(eps) => {
            let v = mollify(u, eps)?;
            let t = transport(&v, k, params.dealias)?;
            let t = t.multiply_real(|xi| mollifier_symbol(eps * xi));
            drift_spectrum(u, k, params.dealias, Some(&t))
        }
    };
    if chi != 1.0 {
        spec.iter_mut().for_each(|c| *c *= chi);
    }
    Field::from_spectrum(u.grid(), spec)
}

/// `||u||_{H^1}^2`, conserved by smooth solutions of the unforced equation.
pub fn h1_energy(u: &Field) -> f64 {
    let h = h_norm(u, 1.0);
    h * h
}

/// Ratio bounding the growth of `||J_eps u||_{H^s}` along the mollified flow:
/// `(|(D^s J_eps[u^k u_x], D^s J_eps u)| + |(D^s J_eps F(u), D^s J_eps u)|)
///  / (||u||_{W^{1,inf}}^k ||u||_{H^s}^2)`.
pub fn energy_growth_ratio(u: &Field, k: u32, s: f64, eps: f64) -> Result<f64> {
    check_degree(k)?;
    check_mollifier(eps)?;
    let t = transport(u, k, true)?;
    let f = nonlocal(u, k, true)?;
    let weight = |c: Complex64, d: Complex64, xi: f64| {
        let j = mollifier_symbol(eps * xi);
        (c * d.conj()).re * Float::powf(1.0 + xi * xi, s) * j * j
    };
    let xi = u.grid().wavenumbers();
    let l = 2.0 * u.grid().half_length();
    let mut a = 0.0;
    let mut b = 0.0;
    for (i, &x) in xi.iter().enumerate() {
        a += weight(t.spectrum()[i], u.spectrum()[i], x);
        b += weight(f.spectrum()[i], u.spectrum()[i], x);
    }
    let denom = Float::powi(w1inf_norm(u), k as i32) * Float::powi(h_norm(u, s), 2);
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(l * (Float::abs(a) + Float::abs(b)) / denom)
}

/// Largest [`energy_growth_ratio`] over sample fields, an empirical value of
/// the constant in `d/dt ||J_eps u||_{H^s}^2 <= 2 lambda ||u||_{W^{1,inf}}^k ||u||_{H^s}^2`.
pub fn growth_constant(samples: &[Field], k: u32, s: f64, eps: f64) -> Result<f64> {
    samples
        .iter()
        .try_fold(0.0, |acc, u| Ok(Float::max(acc, energy_growth_ratio(u, k, s, eps)?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, GridSpec};
    use core::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(GridSpec::new(PI, 64).unwrap()).unwrap()
    }

    #[test]
    fn burgers_part_of_a_single_mode() {
        let g = grid();
        let u = Field::from_fn(&g, |x| x.sin());
        let t = transport(&u, 1, true).unwrap();
        for (x, v) in g.points_iter().zip(t.samples()) {
            assert!((v - x.sin() * x.cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn nonlocal_sum_matches_pieces() {
        let g = grid();
        let u = Field::from_fn(&g, |x| 0.5 * x.sin() + 0.2 * (2.0 * x).cos());
        for k in 1..=3 {
            let whole = nonlocal(&u, k, true).unwrap();
            let parts = Field::linear_combination(&[
                (1.0, &f1(&u, k, true).unwrap()),
                (1.0, &f2(&u, k, true).unwrap()),
                (1.0, &f3(&u, k, true).unwrap()),
            ])
            .unwrap();
            for (a, b) in whole.samples().iter().zip(parts.samples()) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn f1_of_sine_for_k1() {
        // (1 - d_xx)^{-1} d_x sin^2 x = (1 - d_xx)^{-1} sin 2x = sin 2x / 5
        let g = grid();
        let u = Field::from_fn(&g, |x| x.sin());
        let f = f1(&u, 1, true).unwrap();
        for (x, v) in g.points_iter().zip(f.samples()) {
            assert!((v - (2.0 * x).sin() / 5.0).abs() < 1e-14);
        }
        assert!(f3(&u, 1, true).unwrap().samples().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn cutoff_profile() {
        assert_eq!(chi_r(0.0, 2.0).unwrap(), 1.0);
        assert_eq!(chi_r(2.0, 2.0).unwrap(), 1.0);
        assert_eq!(chi_r(4.0, 2.0).unwrap(), 0.0);
        assert!((chi_r(3.0, 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(chi_r(1.0, 1.0).is_err());
        assert!(DriftParams::new(0).is_err());
    }

    #[test]
    fn cutoff_switches_drift_off() {
        let g = grid();
        let u = Field::from_fn(&g, |x| 5.0 * x.sin());
        let mut p = DriftParams::new(1).unwrap();
        p.cutoff_radius = Some(2.0);
        let d = drift(&u, &p).unwrap();
        assert!(d.samples().iter().all(|v| *v == 0.0));
    }
}
