use proptest::prelude::*;
use qdrt::stats::{
    cvm_statistic, cvm_two_sample, fit_logistic, fit_lognormal, fit_weibull, Distribution, StatsError,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, LogNormal, Normal, Weibull};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn logistic_draws(mu: f64, s: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| {
            let u: f64 = r.random_range(f64::EPSILON..1.0);
            mu + s * (u / (1.0 - u)).ln()
        })
        .collect()
}

#[test]
fn logistic_round_trip() {
    let xs = logistic_draws(11.0, 4.3, 100_000, 1);
    let fit = fit_logistic(&xs).unwrap();
    let Distribution::Logistic { mu, s } = fit.distribution else { panic!() };
    assert!((mu - 11.0).abs() < 0.1, "mu {mu}");
    assert!((s - 4.3).abs() < 0.1, "s {s}");
}

#[test]
fn weibull_round_trip() {
    let d = Weibull::new(100.0, 30.0).unwrap();
    let mut r = rng(2);
    let xs: Vec<f64> = (0..100_000).map(|_| d.sample(&mut r)).collect();
    let fit = fit_weibull(&xs).unwrap();
    let Distribution::Weibull { scale, shape } = fit.distribution else { panic!() };
    assert!((scale - 100.0).abs() < 0.5, "A {scale}");
    assert!((shape - 30.0).abs() < 1.0, "B {shape}");

    // the MLE zeroes the profile score in B
    let n = xs.len() as f64;
    let mean_ln = xs.iter().map(|x| x.ln()).sum::<f64>() / n;
    let (mut s0, mut s1) = (0.0, 0.0);
    for &x in &xs {
        let p = (x / scale).powf(shape);
        s0 += p;
        s1 += p * x.ln();
    }
    let score = 1.0 / shape + mean_ln - s1 / s0;
    assert!(score.abs() < 1e-8, "score {score}");
    assert!((s0 / n - 1.0).abs() < 1e-8);
}

#[test]
fn lognormal_round_trip() {
    let d = LogNormal::new(3.0, 1.0).unwrap();
    let mut r = rng(3);
    let xs: Vec<f64> = (0..100_000).map(|_| d.sample(&mut r)).collect();
    let fit = fit_lognormal(&xs).unwrap();
    let Distribution::Lognormal { mu, sigma } = fit.distribution else { panic!() };
    assert!((mu - 3.0).abs() < 0.02);
    assert!((sigma - 1.0).abs() < 0.02);
}

#[test]
fn shifted_normals_are_rejected() {
    let a = Normal::new(0.0, 1.0).unwrap();
    let b = Normal::new(5.0, 1.0).unwrap();
    let mut r = rng(4);
    let x: Vec<f64> = (0..200).map(|_| a.sample(&mut r)).collect();
    let y: Vec<f64> = (0..200).map(|_| b.sample(&mut r)).collect();
    let res = cvm_two_sample(&x, &y, 9_999, 1, 0.01).unwrap();
    assert!(res.p_value < 0.001);
    assert!(res.p_value_asymptotic < 0.001);
    assert!(!res.passed());
}

#[test]
fn same_law_usually_passes() {
    let d = Normal::new(2.0, 3.0).unwrap();
    let mut passes = 0;
    for seed in 0..20 {
        let mut r = rng(100 + seed);
        let x: Vec<f64> = (0..300).map(|_| d.sample(&mut r)).collect();
        let y: Vec<f64> = (0..300).map(|_| d.sample(&mut r)).collect();
        if cvm_two_sample(&x, &y, 999, seed, 0.01).unwrap().passed() {
            passes += 1;
        }
    }
    assert!(passes >= 18, "{passes}/20");
}

#[test]
fn rejects_short_or_nonfinite_input() {
    let ok: Vec<f64> = (0..20).map(f64::from).collect();
    assert!(matches!(cvm_two_sample(&ok[..3], &ok, 99, 0, 0.01), Err(StatsError::TooFewSamples { .. })));
    let mut bad = ok.clone();
    bad[4] = f64::NAN;
    assert!(matches!(cvm_two_sample(&bad, &ok, 99, 0, 0.01), Err(StatsError::NonFinite { index: 4, .. })));
}

fn sample_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-50.0..50.0f64, 8..60),
        prop::collection::vec(-50.0..50.0f64, 8..60),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn statistic_is_invariant_under_monotone_maps((x, y) in sample_pair()) {
        let t = cvm_statistic(&x, &y).unwrap();
        let f = |v: &Vec<f64>| v.iter().map(|a| (a / 10.0).exp() * 3.0 + 1.0).collect::<Vec<_>>();
        let t2 = cvm_statistic(&f(&x), &f(&y)).unwrap();
        prop_assert!((t - t2).abs() < 1e-12 * t.max(1.0));
    }

    #[test]
    fn statistic_is_symmetric((x, y) in sample_pair()) {
        let a = cvm_statistic(&x, &y).unwrap();
        let b = cvm_statistic(&y, &x).unwrap();
        prop_assert!((a - b).abs() < 1e-12 * a.max(1.0));
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn permutation_test_is_reproducible((x, y) in sample_pair(), seed in any::<u64>()) {
        let a = cvm_two_sample(&x, &y, 199, seed, 0.01).unwrap();
        let b = cvm_two_sample(&x, &y, 199, seed, 0.01).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(a.p_value > 0.0 && a.p_value <= 1.0);
    }
}
