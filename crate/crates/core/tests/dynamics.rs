mod common;

use common::*;
use proptest::prelude::*;
use sgch_core::dynamics::*;
use sgch_core::norms::{h_norm, w1inf_norm};
use sgch_core::Field;
use std::f64::consts::PI;

#[test]
fn third_part_vanishes_for_camassa_holm() {
    let g = grid(PI, 64);
    for seed in 0..5 {
        let u = trig_field(&g, &suite_coeffs(seed, 8), 1.0);
        assert!(f3(&u, 1, true).unwrap().samples().iter().all(|v| *v == 0.0));
    }
}

#[test]
fn nonlocal_parts_of_zero() {
    let g = grid(PI, 32);
    let z = Field::zeros(&g);
    for k in 1..=4 {
        for part in [f1(&z, k, true), f2(&z, k, true), f3(&z, k, true)] {
            assert!(max_abs(&part.unwrap()) == 0.0);
        }
    }
    assert!(f1(&z, 0, true).is_err());
}

#[test]
fn first_part_of_a_cosine() {
    let g = grid(PI, 32);
    let u = Field::from_fn(&g, |x| x.cos());
    let want = Field::from_fn(&g, |x| -(2.0 * x).sin() / 5.0);
    assert!(max_abs_diff(&f1(&u, 1, true).unwrap(), &want) < 1e-14);
}

#[test]
fn drift_of_a_constant_vanishes() {
    let g = grid(PI, 32);
    let u = Field::from_fn(&g, |_| 0.8);
    for k in 1..=3 {
        let d = drift(&u, &DriftParams::new(k).unwrap()).unwrap();
        assert!(max_abs(&d) < 1e-15);
    }
}

#[test]
fn drift_of_a_cosine() {
    // u u_x = -sin(2x)/2, F1 = -sin(2x)/5, F2 = sin(2x)/10
    let g = grid(PI, 32);
    let u = Field::from_fn(&g, |x| x.cos());
    let d = drift(&u, &DriftParams::new(1).unwrap()).unwrap();
    let want = Field::from_fn(&g, |x| -0.6 * (2.0 * x).sin());
    assert!(max_abs_diff(&d, &want) < 1e-14);
}

#[test]
fn mollified_drift_converges() {
    let g = grid(PI, 128);
    let u = trig_field(&g, &suite_coeffs(7, 6), 0.5);
    let plain = drift(&u, &DriftParams::new(1).unwrap()).unwrap();
    let gaps: Vec<f64> = (0..6)
        .map(|p| {
            let mut params = DriftParams::new(1).unwrap();
            params.mollifier = Some(2f64.powi(-p));
            let d = drift(&u, &params).unwrap();
            h_norm(&d.difference(&plain).unwrap(), 3.0)
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] <= w[0]), "{gaps:?}");
    assert!(gaps[0] > 0.0 && gaps[5] < 1e-10 * h_norm(&plain, 3.0), "{gaps:?}");
}

#[test]
fn cutoff_function_shape() {
    for r in [1.5, 3.0, 10.0] {
        assert_eq!(chi_r(0.0, r).unwrap(), 1.0);
        assert_eq!(chi_r(r, r).unwrap(), 1.0);
        assert_eq!(chi_r(2.0 * r, r).unwrap(), 0.0);
        let mid = chi_r(1.5 * r, r).unwrap();
        assert!(mid > 0.0 && mid < 1.0);
        let mut prev = 1.0;
        for i in 0..=1000 {
            let v = chi_r(r + r * i as f64 / 1000.0, r).unwrap();
            assert!(v <= prev);
            prev = v;
        }
    }
    assert!(chi_r(0.5, 1.0).is_err());
    assert!(chi_r(0.5, 0.5).is_err());
}

#[test]
fn cutoff_scales_the_whole_drift() {
    let g = grid(PI, 64);
    let u = Field::from_fn(&g, |x| 0.5 * x.sin() + 0.2 * (2.0 * x).cos());
    let w = w1inf_norm(&u);
    let plain = drift(&u, &DriftParams::new(1).unwrap()).unwrap();
    let mut params = DriftParams::new(1).unwrap();
    params.cutoff_radius = Some(w * 2.0);
    assert_eq!(drift(&u, &params).unwrap().samples(), plain.samples());
    params.cutoff_radius = Some(1.01f64.max(w / 1.5));
    let chi = chi_r(w, params.cutoff_radius.unwrap()).unwrap();
    let scaled = drift(&u, &params).unwrap();
    assert!(max_abs_diff(&scaled, &plain.scaled(chi)) < 1e-15);
}

fn growth_suite(seed0: u64, g: &sgch_core::Grid) -> Vec<Field> {
    (0..50)
        .map(|i| trig_field(g, &suite_coeffs(seed0 + i, 10), 1.5))
        .collect()
}

#[test]
fn growth_constant_has_headroom_on_fresh_fields() {
    let g = grid(PI, 128);
    for k in [1, 2] {
        let lambda = growth_constant(&growth_suite(100, &g), k, 3.0, 0.25).unwrap();
        assert!(lambda.is_finite() && lambda > 0.0);
        for u in growth_suite(900, &g) {
            assert!(energy_growth_ratio(&u, k, 3.0, 0.25).unwrap() <= 2.0 * lambda);
        }
    }
}

#[test]
fn energy_is_a_sobolev_square() {
    let g = grid(PI, 32);
    let u = Field::from_fn(&g, |x| x.sin());
    assert!((h1_energy(&u) - 2.0 * PI).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn derivative_parts_have_zero_mean(c in coeffs(16), k in 1u32..4) {
        let g = grid(2.0, 64);
        let u = trig_field(&g, &c, 1.0);
        for part in [f1(&u, k, true).unwrap(), f2(&u, k, true).unwrap()] {
            prop_assert!(part.spectrum()[0].norm() < 1e-12);
        }
    }

    #[test]
    fn dealiasing_only_touches_the_top_third(c in coeffs(40), k in 1u32..4) {
        let n = 96;
        let g = grid(PI, n);
        let band = 2 * n / (3 * (k as usize + 1)) - 1;
        let u = trig_field(&g, &c[..2 * band + 1], 0.5);
        let on = drift(&u, &DriftParams { dealias: true, ..DriftParams::new(k).unwrap() }).unwrap();
        let off = drift(&u, &DriftParams { dealias: false, ..DriftParams::new(k).unwrap() }).unwrap();
        let scale = on.spectrum().iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
        for j in 0..n {
            if (g.spec().mode(j).unsigned_abs() as usize) < n / 3 {
                prop_assert!((on.spectrum()[j] - off.spectrum()[j]).norm() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn cutoff_is_inert_below_the_radius(c in coeffs(8)) {
        let g = grid(PI, 64);
        let u = trig_field(&g, &c, 1.0);
        let mut params = DriftParams::new(1).unwrap();
        params.cutoff_radius = Some(w1inf_norm(&u) + 1.1);
        let plain = drift(&u, &DriftParams::new(1).unwrap()).unwrap();
        let cut = drift(&u, &params).unwrap();
        prop_assert_eq!(cut.samples(), plain.samples());
    }
}
