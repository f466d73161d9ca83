mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use sgch_core::bump::gauss_legendre;
use sgch_core::norms::h_norm;
use sgch_core::spectral::*;
use sgch_core::{Error, Field, GridSpec};
use std::f64::consts::PI;

#[test]
fn grid_validation() {
    assert!(GridSpec::new(1.0, 8).is_ok());
    assert!(matches!(GridSpec::new(1.0, 6), Err(Error::InvalidGrid(_))));
    assert!(matches!(GridSpec::new(1.0, 9), Err(Error::InvalidGrid(_))));
    assert!(matches!(GridSpec::new(0.0, 8), Err(Error::InvalidGrid(_))));
    let spec = GridSpec::new(2.0, 16).unwrap();
    for j in 0..16 {
        assert_eq!(spec.wavenumber(j), PI * spec.mode(j) as f64 / 2.0);
    }
}

#[test]
fn constant_has_only_the_zero_mode() {
    let g = grid(PI, 16);
    let u = Field::from_fn(&g, |_| 1.0);
    assert!((u.spectrum()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    assert!(u.spectrum()[1..].iter().all(|c| c.norm() < 1e-15));
}

#[test]
fn cosine_splits_into_two_halves() {
    let g = grid(8.0 * PI, 256);
    let u = Field::from_fn(&g, |x| x.cos());
    // cos x sits at mode 8 when L = 8 pi
    for (j, c) in u.spectrum().iter().enumerate() {
        let mode = g.spec().mode(j);
        let want = if mode.abs() == 8 { 0.5 } else { 0.0 };
        assert!((c - Complex64::new(want, 0.0)).norm() < 1e-12, "mode {mode}");
    }
}

#[test]
fn spectrum_length_is_checked() {
    let g = grid(PI, 16);
    assert!(matches!(
        Field::from_samples(&g, vec![0.0; 8]),
        Err(Error::LengthMismatch { expected: 16, found: 8 })
    ));
    assert!(Field::from_spectrum(&g, vec![Complex64::new(0.0, 0.0); 15]).is_err());
}

#[test]
fn bessel_potential_examples() {
    let g = grid(PI, 32);
    let u = Field::from_fn(&g, |x| x.cos());
    for s in [-1.5, 0.5, 2.0, 3.0] {
        let d = bessel_potential(&u, s);
        let want = Field::from_fn(&g, |x| 2f64.powf(s / 2.0) * x.cos());
        assert!(max_abs_diff(&d, &want) < 1e-12, "s {s}");
    }
    let v = trig_field(&g, &suite_coeffs(3, 10), 1.0);
    assert_eq!(bessel_potential(&v, 0.0).samples(), v.samples());
}

#[test]
fn helmholtz_inverse_examples() {
    let g = grid(PI, 32);
    let u = Field::from_fn(&g, |x| x.cos());
    let want = Field::from_fn(&g, |x| 0.5 * x.cos());
    assert!(max_abs_diff(&helmholtz_inverse(&u), &want) < 1e-14);
    let c = Field::from_fn(&g, |_| 2.5);
    assert!(max_abs_diff(&helmholtz_inverse(&c), &c) < 1e-14);
}

/// `(1/2) int e^{-|x-y|} f(y) dy` split at the kink `y = x`.
fn kernel_quadrature(f: impl Fn(f64) -> f64 + Copy, x: f64, reach: f64) -> f64 {
    let k = |y: f64| 0.5 * (-(x - y).abs()).exp() * f(y);
    gauss_legendre(k, x - reach, x, 64) + gauss_legendre(k, x, x + reach, 64)
}

#[test]
fn helmholtz_inverse_matches_kernel_convolution() {
    let g = grid(40.0, 2048);
    let f = |y: f64| (-y * y).exp();
    let u = Field::from_fn(&g, f);
    let h = helmholtz_inverse(&u);
    let oracle: Vec<f64> = g.points_iter().map(|x| kernel_quadrature(f, x, 35.0)).collect();
    let err = Field::from_samples(&g, oracle.iter().zip(h.samples()).map(|(a, b)| a - b).collect()).unwrap();
    assert!(h_norm(&err, 0.0) / h_norm(&h, 0.0) < 1e-6);
}

#[test]
fn mollifier_leaves_low_modes_alone() {
    let g = grid(PI, 64);
    let u = Field::from_fn(&g, |x| x.cos() + 0.3 * (2.0 * x).sin());
    for eps in [0.1, 0.4, 0.5] {
        assert!(max_abs_diff(&mollify(&u, eps).unwrap(), &u) < 1e-15, "eps {eps}");
    }
    let c = Field::from_fn(&g, |x| x.cos());
    assert!(max_abs_diff(&mollify(&c, 1.0).unwrap(), &c) < 1e-15);
    assert!(mollify(&u, 0.0).is_err());
    assert!(mollify(&u, -0.5).is_err());
    assert!(mollify(&u, 1.5).is_err());
}

#[test]
fn mollifier_symbol_shape() {
    assert_eq!(mollifier_symbol(0.0), 1.0);
    assert_eq!(mollifier_symbol(1.0), 1.0);
    assert_eq!(mollifier_symbol(-1.0), 1.0);
    assert_eq!(mollifier_symbol(2.0), 0.0);
    assert_eq!(mollifier_symbol(3.0), 0.0);
    let mut prev = 1.0;
    for i in 0..=1000 {
        let v = mollifier_symbol(1.0 + i as f64 / 1000.0);
        assert!((0.0..=1.0).contains(&v) && v <= prev);
        prev = v;
    }
}

#[test]
fn mollifier_error_decays_faster_than_the_rate() {
    // smooth field with every mode occupied
    let g = grid(PI, 512);
    let u = Field::from_fn(&g, |x| 1.0 / (1.2 - x.cos()));
    let (s, r) = (3.0, 1.0);
    let ratios: Vec<f64> = (2..=6)
        .map(|p| {
            let eps = 2f64.powi(-p);
            let diff = u.difference(&mollify(&u, eps).unwrap()).unwrap();
            h_norm(&diff, r) / eps.powf(s - r)
        })
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
}

#[test]
fn derivative_examples() {
    let g = grid(PI, 32);
    let u = Field::from_fn(&g, |x| x.sin());
    let want = Field::from_fn(&g, |x| x.cos());
    assert!(max_abs_diff(&derivative(&u), &want) < 1e-12);
    let c = Field::from_fn(&g, |_| 4.0);
    assert!(max_abs(&derivative(&c)) < 1e-15);
}

#[test]
fn derivative_matches_centered_differences() {
    let errors: Vec<f64> = [64usize, 128, 256]
        .iter()
        .map(|&n| {
            let g = grid(PI, n);
            let u = trig_field(&g, &suite_coeffs(11, 6), 0.0);
            let d = derivative(&u);
            let h = g.spec().spacing();
            let s = u.samples();
            (0..n)
                .map(|i| {
                    let fd = (s[(i + 1) % n] - s[(i + n - 1) % n]) / (2.0 * h);
                    (fd - d.samples()[i]).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.1, "{errors:?}");
    }
}

#[test]
fn derivative_output_is_real_with_nyquist_content() {
    let g = grid(PI, 16);
    let u = Field::from_fn(&g, |x| (8.0 * x).cos() + x.sin());
    let d = derivative(&u);
    assert!(d.spectrum()[8].norm() == 0.0);
    let want = Field::from_fn(&g, |x| x.cos());
    assert!(max_abs_diff(&d, &want) < 1e-13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn round_trip_reproduces_samples(c in coeffs(20)) {
        let g = grid(3.0, 64);
        let u = trig_field(&g, &c, 0.5);
        let back = Field::from_spectrum(&g, u.spectrum().to_vec()).unwrap();
        let scale = max_abs(&u).max(1e-300);
        prop_assert!(max_abs_diff(&u, &back) / scale < 1e-12);
    }

    #[test]
    fn spectrum_is_hermitian(c in coeffs(20)) {
        let g = grid(3.0, 64);
        let u = trig_field(&g, &c, 0.5);
        let spec = u.spectrum();
        for j in 1..32 {
            prop_assert!((spec[j] - spec[64 - j].conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn parseval_holds(c in coeffs(20)) {
        let g = grid(3.0, 64);
        let u = trig_field(&g, &c, 0.5);
        let physical: f64 = u.samples().iter().map(|v| v * v).sum::<f64>() * g.spec().spacing();
        let spectral: f64 = 6.0 * u.spectrum().iter().map(|c| c.norm_sqr()).sum::<f64>();
        prop_assert!((physical - spectral).abs() <= 1e-12 * physical.max(1e-300));
    }

    #[test]
    fn multipliers_commute(c in coeffs(24), s in -2.0f64..4.0, eps in 0.05f64..1.0) {
        let g = grid(PI, 64);
        let u = trig_field(&g, &c, 0.0);
        let pairs: [(Field, Field); 3] = [
            (bessel_potential(&mollify(&u, eps).unwrap(), s), mollify(&bessel_potential(&u, s), eps).unwrap()),
            (helmholtz_inverse(&derivative(&u)), derivative(&helmholtz_inverse(&u))),
            (bessel_potential(&derivative(&u), s), derivative(&bessel_potential(&u, s))),
        ];
        for (a, b) in &pairs {
            let scale = max_abs(a).max(1e-12);
            prop_assert!(max_abs_diff(a, b) / scale < 1e-12);
        }
    }

    #[test]
    fn bessel_potential_inverts(c in coeffs(24), s in 0.0f64..4.0) {
        let g = grid(PI, 64);
        let u = trig_field(&g, &c, 0.0);
        let back = bessel_potential(&bessel_potential(&u, s), -s);
        prop_assert!(h_norm(&back.difference(&u).unwrap(), 0.0) <= 1e-10 * h_norm(&u, 0.0).max(1e-300));
    }

    #[test]
    fn helmholtz_inverse_undoes_helmholtz(c in coeffs(24)) {
        let g = grid(PI, 64);
        let u = trig_field(&g, &c, 0.0);
        let second = derivative(&derivative(&u));
        let helm = Field::linear_combination(&[(1.0, &u), (-1.0, &second)]).unwrap();
        let back = helmholtz_inverse(&helm);
        prop_assert!(h_norm(&back.difference(&u).unwrap(), 0.0) <= 1e-10 * h_norm(&u, 0.0).max(1e-300));
    }

    #[test]
    fn mollifier_is_self_adjoint(a in coeffs(30), b in coeffs(30), eps in 0.05f64..1.0) {
        let g = grid(PI, 64);
        let f = trig_field(&g, &a, 0.0);
        let h = trig_field(&g, &b, 0.0);
        let left = mollify(&f, eps).unwrap().inner_l2(&h).unwrap();
        let right = f.inner_l2(&mollify(&h, eps).unwrap()).unwrap();
        let scale = h_norm(&f, 0.0) * h_norm(&h, 0.0);
        prop_assert!((left - right).abs() <= 1e-12 * scale.max(1e-300));
    }

    #[test]
    fn mollifier_contracts_every_norm(c in coeffs(30), eps in 0.05f64..1.0, s in -2.0f64..5.0) {
        let g = grid(PI, 64);
        let u = trig_field(&g, &c, 0.0);
        prop_assert!(h_norm(&mollify(&u, eps).unwrap(), s) <= h_norm(&u, s) * (1.0 + 1e-14));
    }
}
