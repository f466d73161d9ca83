mod common;

#[allow(unused_imports)]
use common::*;
use proptest::prelude::*;
use sgch_core::ensemble::*;
use sgch_core::exec::Sequential;
use sgch_core::integrate::{grid_for, BlowupCaps, Scheme, SimConfig};
use sgch_core::noise::{NoiseModel, TimeProfile};
use sgch_core::norms::h_norm;
use sgch_core::{Field, GridSpec};
use std::f64::consts::PI;

fn base(points: usize, t_final: f64) -> SimConfig {
    let mut cfg = SimConfig::deterministic(GridSpec::new(PI, points).unwrap(), 1, 0.01, t_final).unwrap();
    cfg.scheme = Scheme::EulerMaruyama;
    cfg
}

fn smooth(cfg: &SimConfig) -> Field {
    let g = grid_for(cfg).unwrap();
    Field::from_fn(&g, |x| 0.5 * x.sin() + 0.2 * (2.0 * x).cos())
}

fn noisy(mut cfg: SimConfig, b: f64) -> SimConfig {
    cfg.noise = NoiseModel::ScalarPower {
        b: TimeProfile::Constant { value: b },
        theta: 1.0,
    };
    cfg
}

#[test]
fn noiseless_paths_agree() {
    let cfg0 = base(32, 0.5);
    let u = smooth(&cfg0);
    let h3 = h_norm(&u, 3.0);
    let cfg = EnsembleConfig::new(cfg0, 8, 10, vec![0.5 * h3, 1e4]).unwrap();
    let report = run_ensemble(&u, &cfg, &Sequential).unwrap();
    assert_eq!((report.paths.len(), report.completed, report.failed), (8, 8, 0));
    assert_eq!(report.exit_fraction(0.5 * h3), Some(1.0));
    assert_eq!(report.exit_fraction(1e4), Some(0.0));
    assert_eq!(report.breakdown_fraction, 0.0);
    assert!(report.paths.iter().all(|p| p.sup_hs == report.paths[0].sup_hs));
    let spread = report.sup_hs_quantiles.last().unwrap().value - report.sup_hs_quantiles[0].value;
    assert!(spread.abs() < 1e-14 * report.paths[0].sup_hs);
}

#[test]
fn breaking_paths_all_count_as_exits() {
    let mut cfg0 = SimConfig::deterministic(GridSpec::new(4.0, 256).unwrap(), 1, 1e-3, 0.4).unwrap();
    cfg0.scheme = Scheme::EulerMaruyama;
    let g = grid_for(&cfg0).unwrap();
    let u = Field::from_fn(&g, |x| -8.0 * x * (-4.0 * x * x).exp());
    cfg0 = noisy(cfg0, 0.05);
    cfg0.caps = BlowupCaps {
        w1inf: 2.0 * sgch_core::norms::w1inf_norm(&u),
        hs: 1e12,
        grace: 0.0,
    };
    let cfg = EnsembleConfig::new(cfg0, 4, 0, vec![1e11]).unwrap();
    let report = run_ensemble(&u, &cfg, &Sequential).unwrap();
    assert_eq!(report.breakdown_fraction, 1.0);
    assert_eq!(report.exit_fraction(1e11), Some(1.0));
}

#[test]
fn exit_fractions_shrink_as_the_radius_grows() {
    let cfg0 = noisy(base(32, 0.5), 2.0);
    let u = smooth(&cfg0);
    let h3 = h_norm(&u, 3.0);
    let radii: Vec<f64> = [1.0, 1.5, 2.0, 3.0, 5.0].iter().map(|f| f * h3).collect();
    let cfg = EnsembleConfig::new(cfg0, 12, 7, radii.clone()).unwrap();
    let report = run_ensemble(&u, &cfg, &Sequential).unwrap();
    let fractions: Vec<f64> = radii.iter().map(|r| report.exit_fraction(*r).unwrap()).collect();
    assert!(fractions.windows(2).all(|w| w[1] <= w[0]), "{fractions:?}");
    let times = [0.0, 0.25, 0.5];
    let survival = report.survival(radii[1], &times);
    assert!(survival.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn report_bytes_are_reproducible() {
    let cfg0 = noisy(base(32, 0.3), 1.0);
    let u = smooth(&cfg0);
    let cfg = EnsembleConfig::new(cfg0, 4, 3, vec![2.0 * h_norm(&u, 3.0)]).unwrap();
    let a = serde_json::to_vec(&run_ensemble(&u, &cfg, &Sequential).unwrap()).unwrap();
    let b = serde_json::to_vec(&run_ensemble(&u, &cfg, &Sequential).unwrap()).unwrap();
    assert_eq!(a, b);
    assert_eq!(cfg.path_config(2).seed, 5);
}

#[test]
fn invalid_ensembles_are_rejected() {
    let cfg0 = base(32, 0.3);
    assert!(EnsembleConfig::new(cfg0.clone(), 0, 0, vec![1.0]).is_err());
    assert!(EnsembleConfig::new(cfg0.clone(), 2, 0, vec![-1.0]).is_err());
    let mut cfg = EnsembleConfig::new(cfg0, 2, 0, vec![1.0]).unwrap();
    cfg.summary_quantiles = vec![1.0];
    assert!(cfg.validate().is_err());
}

#[test]
fn band_matches_the_pooled_formula() {
    let band = two_proportion_band(0.4, 0.6, 100);
    assert!((band - 1.96 * (0.25f64 * 0.02).sqrt()).abs() < 1e-15);
    assert_eq!(two_proportion_band(0.0, 0.0, 10), 0.0);
}

#[test]
fn sine_family_approaches_the_reference_exit() {
    let cfg0 = base(64, 1.0);
    let u = smooth(&cfg0);
    let table = exit_stability_table(
        &u,
        &ExitStabilityConfig {
            base: cfg0,
            radius: 1.2 * h_norm(&u, 3.0),
            n_list: vec![2, 4, 8, 16],
            perturbation: Perturbation::Sine { amplitude: 1.0 },
        },
        &Sequential,
    )
    .unwrap();
    assert!(table.rows.iter().all(|r| r.error.is_none()));
    let distances: Vec<f64> = table.rows.iter().map(|r| r.initial_distance).collect();
    for w in distances.windows(2) {
        assert!((w[0] / w[1] - 2.0).abs() < 1e-9);
    }
    assert!(table.rows.last().unwrap().gap <= table.rows[0].gap);
}

#[test]
fn high_frequency_family_reports_unresolved_rows() {
    let mut cfg0 = SimConfig::deterministic(GridSpec::new(40.0, 1024).unwrap(), 1, 0.01, 0.05).unwrap();
    cfg0.scheme = Scheme::Rk4Det;
    let g = grid_for(&cfg0).unwrap();
    let u = Field::from_fn(&g, |x| 0.3 * (-(x * x) / 4.0).exp());
    let table = exit_stability_table(
        &u,
        &ExitStabilityConfig {
            base: cfg0,
            radius: 1e3,
            n_list: vec![4, 8, 60],
            perturbation: Perturbation::HighFrequency { delta: 0.8, s: 3.0 },
        },
        &Sequential,
    )
    .unwrap();
    assert_eq!(table.reference, None);
    assert!(table.rows[0].error.is_none() && table.rows[1].error.is_none());
    assert_eq!(table.rows[0].gap, 0.0);
    assert!(table.rows[2].error.is_some());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn summary_ignores_path_order(order in Just((0..6usize).collect::<Vec<_>>()).prop_shuffle(), times in prop::collection::vec(prop::option::of(0.0f64..1.0), 6)) {
        let cfg = EnsembleConfig::new(base(16, 1.0), 6, 0, vec![1.0]).unwrap();
        let outcomes: Vec<PathOutcome> = times
            .iter()
            .enumerate()
            .map(|(i, t)| PathOutcome {
                path: i,
                seed: i as u64,
                exit_times: vec![sgch_core::integrate::ExitTime { radius: 1.0, time: *t }],
                breakdown: None,
                final_time: 1.0,
                sup_hs: i as f64,
                sup_w1inf: 2.0 * i as f64,
                error: None,
            })
            .collect();
        let shuffled: Vec<PathOutcome> = order.iter().map(|&i| outcomes[i].clone()).collect();
        prop_assert_eq!(summarize(&cfg, outcomes), summarize(&cfg, shuffled));
    }

    #[test]
    fn quantiles_are_monotone(values in prop::collection::vec(-10.0f64..10.0, 1..40)) {
        let q = quantiles(&values, &[0.1, 0.5, 0.9]);
        prop_assert!(q[0].value <= q[1].value && q[1].value <= q[2].value);
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo <= q[0].value && q[2].value <= hi);
    }
}
