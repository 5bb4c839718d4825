mod common;

use common::brute_force_emd;
use ganbench::metrics::{
    critic_emd, emd, jsd, kde, kl_divergence, mmd_squared, mmd_squared_with, qq_points, wasserstein_1d, Bandwidth,
    CriticConfig, Histogram, KernelSpec,
};
use ganbench::sample::SampleSet;
use proptest::prelude::*;

fn col(v: &[f64]) -> SampleSet {
    SampleSet::from_column(v).unwrap()
}

fn hist(m: &[f64]) -> Histogram {
    Histogram::from_masses(m.to_vec()).unwrap()
}

#[test]
fn mmd_singletons() {
    let v = mmd_squared(&col(&[0.0]), &col(&[1.0]), &KernelSpec::gaussian(1.0)).unwrap();
    assert!((v - (1.0 - 2.0 * (-0.5f64).exp() + 1.0)).abs() <= 1e-9, "{v}");
}

#[test]
fn kl_and_jsd_hand_values() {
    let kl = kl_divergence(&hist(&[0.5, 0.5]), &hist(&[0.25, 0.75])).unwrap();
    let expect = 0.5 * (0.5f64 / 0.25).ln() + 0.5 * (0.5f64 / 0.75).ln();
    assert!((kl - expect).abs() <= 1e-9 && (kl - 0.14384).abs() < 1e-5);
    let kl = kl_divergence(&hist(&[1.0, 0.0]), &hist(&[0.5, 0.5])).unwrap();
    assert!((kl - 2f64.ln()).abs() <= 1e-9);
    let p = hist(&[0.2, 0.3, 0.5]);
    assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
    assert_eq!(jsd(&p, &p).unwrap(), 0.0);
    let d = jsd(&hist(&[1.0, 0.0]), &hist(&[0.0, 1.0])).unwrap();
    assert!((d - 2f64.ln()).abs() <= 1e-9);
}

#[test]
fn emd_examples() {
    assert_eq!(emd(&col(&[0.0, 1.0]), &col(&[1.0, 2.0])).unwrap(), 1.0);
    assert_eq!(wasserstein_1d(&[3.0, -1.0, 2.0], &[3.0, -1.0, 2.0]).unwrap(), 0.0);
}

#[test]
fn single_sample_kde_peak() {
    let v = kde(&col(&[0.0]), Bandwidth::Fixed(1.0), &col(&[0.0])).unwrap()[0];
    assert!((v - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() <= 1e-12);
}

#[test]
fn critic_emd_is_reproducible() {
    let x = col(&(0..64).map(|i| (i as f64 * 0.7).sin()).collect::<Vec<_>>());
    let y = col(&(0..64).map(|i| 1.0 + (i as f64 * 0.3).cos()).collect::<Vec<_>>());
    let cfg = CriticConfig {
        steps: 30,
        ..CriticConfig::default()
    };
    let a = critic_emd(&x, &y, &cfg).unwrap();
    let b = critic_emd(&x, &y, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(critic_emd(&x, &x, &cfg).unwrap().value, 0.0);
}

fn sample_vec(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, n)
}

fn histogram_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..12).prop_flat_map(|k| (prop::collection::vec(0.0f64..1.0, k), prop::collection::vec(0.0f64..1.0, k)))
}

fn normalized(v: &[f64]) -> Option<Histogram> {
    let s: f64 = v.iter().sum();
    (s > 0.0).then(|| Histogram::from_counts(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn emd_matches_brute_force(pair in (1usize..=6).prop_flat_map(|n| (sample_vec(n..=n), sample_vec(n..=n)))) {
        let (x, y) = pair;
        let exact = wasserstein_1d(&x, &y).unwrap();
        prop_assert!((exact - brute_force_emd(&x, &y)).abs() <= 1e-9);
    }

    #[test]
    fn emd_is_a_metric(n in 1usize..=8, seed in any::<u64>()) {
        let mut r = ganbench::rng::rng(seed);
        let mut draw = || common::random_tensor(&mut r, &[n], 5.0).into_data();
        let (x, y, z) = (draw(), draw(), draw());
        let d = |a: &[f64], b: &[f64]| wasserstein_1d(a, b).unwrap();
        prop_assert_eq!(d(&x, &x), 0.0);
        prop_assert!(d(&x, &y) >= 0.0);
        prop_assert!((d(&x, &y) - d(&y, &x)).abs() <= 1e-12);
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-12);
    }

    #[test]
    fn mmd_is_non_negative_and_zero_on_identical(x in sample_vec(1..=20), y in sample_vec(1..=20), s in 0.1f64..5.0) {
        let k = KernelSpec::gaussian(s);
        prop_assert!(mmd_squared(&col(&x), &col(&y), &k).unwrap() >= 0.0);
        prop_assert!(mmd_squared(&col(&x), &col(&x), &k).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn unbiased_mmd_is_symmetric(x in sample_vec(2..=12), y in sample_vec(2..=12)) {
        let k = KernelSpec::gaussian(1.0);
        let a = mmd_squared_with(&col(&x), &col(&y), &k, true).unwrap();
        let b = mmd_squared_with(&col(&y), &col(&x), &k, true).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn jsd_is_bounded_and_symmetric(pair in histogram_pair()) {
        let (Some(p), Some(q)) = (normalized(&pair.0), normalized(&pair.1)) else { return Ok(()); };
        let d = jsd(&p, &q).unwrap();
        prop_assert!((0.0..=std::f64::consts::LN_2 + 1e-12).contains(&d));
        prop_assert!((d - jsd(&q, &p).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn kl_is_non_negative(pair in histogram_pair()) {
        let (Some(p), Some(q)) = (normalized(&pair.0), normalized(&pair.1)) else { return Ok(()); };
        if let Ok(v) = kl_divergence(&p, &q) {
            prop_assert!(v >= -1e-12);
        }
    }

    #[test]
    fn qq_scaling(x in sample_vec(2..=30), q in 2usize..20) {
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        for (a, b) in qq_points(&x, &y, q).unwrap() {
            prop_assert!((b - 2.0 * a).abs() <= 1e-9);
        }
    }

    #[test]
    fn kde_integrates_to_one(x in sample_vec(1..=15), h in 0.2f64..2.0) {
        let lo = x.iter().cloned().fold(f64::INFINITY, f64::min) - 10.0 * h;
        let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 10.0 * h;
        let n = 4000;
        let grid: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        let dens = kde(&col(&x), Bandwidth::Fixed(h), &col(&grid)).unwrap();
        let step = (hi - lo) / n as f64;
        let area: f64 = dens.windows(2).map(|w| 0.5 * (w[0] + w[1]) * step).sum();
        prop_assert!(dens.iter().all(|&d| d >= 0.0));
        prop_assert!((area - 1.0).abs() <= 1e-3);
    }
}
