//! Fourier multipliers: Bessel potentials, the Helmholtz inverse, the
//! spectral derivative and the smooth mollifier.

use alloc::format;
use num_complex::Complex64;
use num_traits::Float;

use crate::error::{invalid, Result};
use crate::field::Field;

/// `S(t) = e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)})` on `(0,1)`, extended by 0 and 1.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        1.0 / (1.0 + Float::exp(1.0 / t - 1.0 / (1.0 - t)))
    }
}

pub fn smooth_step_derivative(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let s = smooth_step(t);
    s * (1.0 - s) * (1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t)))
}

/// Symbol of the mollifier: 1 on `|z| <= 1`, 0 on `|z| >= 2`.
pub fn mollifier_symbol(z: f64) -> f64 {
    smooth_step(2.0 - z.abs())
}

/// `(1 + xi^2)^{s/2}`.
pub fn bessel_symbol(xi: f64, s: f64) -> f64 {
    Float::powf(1.0 + xi * xi, 0.5 * s)
}

/// `D^s u`.
pub fn bessel_potential(u: &Field, s: f64) -> Field {
    if s == 0.0 {
        return u.clone();
    }
    u.multiply_real(|xi| bessel_symbol(xi, s))
}

/// `(1 - d_xx)^{-1} u`.
pub fn helmholtz_inverse(u: &Field) -> Field {
    u.multiply_real(|xi| 1.0 / (1.0 + xi * xi))
}

/// Spectral `d/dx`; the unpaired Nyquist mode is dropped.
pub fn derivative(u: &Field) -> Field {
    let ny = u.grid().spec().nyquist_slot();
    u.map_spectrum(|i, xi, c| {
        if i == ny {
            Complex64::new(0.0, 0.0)
        } else {
            c * Complex64::new(0.0, xi)
        }
    })
}

/// `J_eps u` with symbol `j(eps xi)`. Requires `0 < eps <= 1`.
pub fn mollify(u: &Field, eps: f64) -> Result<Field> {
    check_mollifier(eps)?;
    Ok(u.multiply_real(|xi| mollifier_symbol(eps * xi)))
}

pub(crate) fn check_mollifier(eps: f64) -> Result<()> {
    if !(eps.is_finite() && eps > 0.0 && eps <= 1.0) {
        return Err(invalid(
            "eps",
            format!("mollifier parameter must lie in (0, 1], got {eps}"),
        ));
    }
    Ok(())
}

/// `i xi` with the Nyquist slot cleared, as a spectral factor.
pub(crate) fn derivative_factor(slot: usize, nyquist: usize, xi: f64) -> Complex64 {
    if slot == nyquist {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new(0.0, xi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, GridSpec};
    use core::f64::consts::PI;

    #[test]
    fn smooth_step_shape() {
        assert_eq!(smooth_step(-0.1), 0.0);
        assert_eq!(smooth_step(1.3), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        assert!((smooth_step(0.3) + smooth_step(0.7) - 1.0).abs() < 1e-15);
        let h = 1e-6;
        for &t in &[0.1, 0.4, 0.77] {
            let fd = (smooth_step(t + h) - smooth_step(t - h)) / (2.0 * h);
            assert!((fd - smooth_step_derivative(t)).abs() < 1e-8);
        }
    }

    #[test]
    fn derivative_of_trig_modes() {
        let g = Grid::new(GridSpec::new(PI, 32).unwrap()).unwrap();
        let u = Field::from_fn(&g, |x| (3.0 * x).sin());
        let du = derivative(&u);
        for (x, v) in g.points_iter().zip(du.samples()) {
            assert!((v - 3.0 * (3.0 * x).cos()).abs() < 1e-12);
        }
        let w = helmholtz_inverse(&u);
        for (x, v) in g.points_iter().zip(w.samples()) {
            assert!((v - (3.0 * x).sin() / 10.0).abs() < 1e-14);
        }
    }

    #[test]
    fn mollifier_rejects_bad_eps() {
        let g = Grid::new(GridSpec::new(PI, 16).unwrap()).unwrap();
        let u = Field::zeros(&g);
        assert!(mollify(&u, 0.0).is_err());
        assert!(mollify(&u, -1.0).is_err());
        assert!(mollify(&u, 1.5).is_err());
        assert!(mollify(&u, 0.5).is_ok());
    }
}
