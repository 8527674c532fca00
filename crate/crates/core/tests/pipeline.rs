use bgamma::inversion::{self, InversionConfig, RegimeChoice};
use bgamma::simulate::{ks_critical, sample_functional, PathSampler};
use bgamma::wiener_hopf::{self, IDENTITY_TOL};
use bgamma::{Error, LevyExponent, MellinLaw, Measure, Regime, SpecFile};

const KILLED_DRIFT: &str = "sigma2 = 0.0\ngamma = 1.0\nkill_rate = 1.0\n";

#[test]
fn spec_to_uniform_law() {
    let e = SpecFile::from_toml_str(KILLED_DRIFT).unwrap().process().unwrap();
    let law = MellinLaw::new(&e).unwrap();
    let cfg = InversionConfig::default();
    let f = inversion::cdf(&law, 0.5, &cfg).unwrap();
    assert!((f.value - 0.5).abs() < 1e-8);
    assert_eq!(inversion::support(&law).to_string(), "(0, 1]");
    assert_eq!(inversion::cdf(&law, 1.5, &cfg).unwrap().value, 1.0);
}

#[test]
fn two_sided_process_factorizes() {
    let e = LevyExponent::new(0.5, 0.3, 0.1, Measure::exponential(1.0, 2.0), Measure::exponential(2.0, 3.0)).unwrap();
    let pair = wiener_hopf::factorize(&e).unwrap();
    assert!(pair.identity_residual(&e) < IDENTITY_TOL);
    let law = MellinLaw::from_pair(&e, pair).unwrap();
    let cfg = InversionConfig::default();
    for x in [0.3, 1.0, 3.0] {
        let f = inversion::cdf(&law, x, &cfg).unwrap().value;
        let t = inversion::tail(&law, x, &cfg).unwrap().value;
        assert!((f + t - 1.0).abs() < 1e-7, "{f} + {t}");
    }
}

#[test]
fn cdf_derivative_matches_density() {
    let law = MellinLaw::new(&LevyExponent::brownian(1.0, 0.8, 0.3)).unwrap();
    let cfg = InversionConfig::default();
    for x in [0.4, 1.0, 2.5] {
        let h = 1e-3 * x;
        let fp = inversion::cdf(&law, x + h, &cfg).unwrap().value;
        let fm = inversion::cdf(&law, x - h, &cfg).unwrap().value;
        let d = inversion::density(&law, x, 0, &cfg).unwrap().value;
        assert!(((fp - fm) / (2.0 * h) - d).abs() < 1e-5 * (1.0 + d), "x = {x}");
    }
}

#[test]
fn density_integrates_to_one() {
    let law = MellinLaw::new(&LevyExponent::brownian(1.0, 0.5, 1.0)).unwrap();
    let cfg = InversionConfig::default();
    // composite Simpson on a log grid plus the two end masses
    let (lo, hi) = (1e-3f64, 50.0f64);
    let n = 600;
    let h = (hi / lo).ln() / n as f64;
    let mut s = 0.0;
    for i in 0..=n {
        let x = lo * (i as f64 * h).exp();
        let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * x * inversion::density(&law, x, 0, &cfg).unwrap().value;
    }
    s *= h / 3.0;
    let total = s + inversion::cdf(&law, lo, &cfg).unwrap().value + inversion::tail(&law, hi, &cfg).unwrap().value;
    assert!((total - 1.0).abs() < 1e-6, "{total}");
}

#[test]
fn regimes_agree_on_overlaps() {
    // θ₊ is not an integer here, so the series has no order limit
    let law = MellinLaw::new(&LevyExponent::brownian(1.0, 0.5, 0.5)).unwrap();
    let cfg = InversionConfig::default();
    let x = 1e-3;
    let series = inversion::small_x_series(&law, x, 3).unwrap();
    let inv = inversion::cdf(&law, x, &cfg).unwrap().value;
    assert!((series.value - inv).abs() < 1e-6);
    // with θ₊ = −1 no term is available
    let unit = MellinLaw::new(&LevyExponent::brownian(1.0, 0.5, 1.0)).unwrap();
    assert!(matches!(inversion::small_x_series(&unit, x, 1), Err(Error::OrderExceedsPoles { .. })));

    let cr = inversion::cramer_tail(&law, 0).unwrap();
    let x = 100.0;
    let t = inversion::tail(&law, x, &cfg).unwrap().value;
    assert!(cr.constant * x.powf(cr.theta) < 1e-3);
    assert!((cr.constant * x.powf(cr.theta) / t - 1.0).abs() < 0.05);

    let grid = inversion::density_grid(&law, &[1e-4, 0.5, 2.0], 0, RegimeChoice::Auto, &cfg).unwrap();
    assert_eq!(grid.regime[0], Regime::SmallSeries);
    assert_eq!(grid.regime[1], Regime::Inversion);
}

#[test]
fn smoothness_cap_in_polynomial_class() {
    // N = q = 2.5: derivatives up to order 1
    let law = MellinLaw::new(&LevyExponent::brownian(0.0, 1.0, 2.5)).unwrap();
    let cfg = InversionConfig::default();
    let f1 = inversion::density(&law, 0.4, 1, &cfg).unwrap().value;
    // f(x) = q(1−x)^{q−1}, f′ = −q(q−1)(1−x)^{q−2}
    assert!((f1 + 2.5 * 1.5 * 0.6f64.powf(0.5)).abs() < 1e-6);
    assert!(matches!(inversion::density(&law, 0.4, 2, &cfg), Err(Error::SmoothnessCapExceeded { requested: 2, cap: 1 })));
}

#[test]
fn sampling_is_independent_of_worker_count() {
    let e = LevyExponent::new(1.0, 1.0, 0.0, Measure::exponential(0.5, 2.0), Measure::exponential(0.5, 1.0)).unwrap();
    let s = PathSampler::new(e, 7);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| sample_functional(&s, 2_000).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a, b);
    assert!(a.samples.iter().zip(&b.samples).all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn halving_dt_stays_within_sampling_noise() {
    let law = MellinLaw::new(&LevyExponent::brownian(1.0, 0.5, 1.0)).unwrap();
    let cfg = InversionConfig::default();
    let n = 20_000;
    let ks = |dt: f64| {
        let emp = sample_functional(&PathSampler::new(law.exponent.clone(), 5).with_dt(dt), n).unwrap();
        let grid = inversion::density_grid(&law, &bgamma::simulate::sample_grid(&emp, 200), 0, RegimeChoice::Inversion, &cfg).unwrap();
        let mut e = emp;
        bgamma::simulate::compare(&grid, &mut e, &Default::default()).unwrap().ks_stat
    };
    let (a, b) = (ks(2e-2), ks(1e-2));
    assert!((a - b).abs() < ks_critical(n, 0.05), "{a} vs {b}");
}
