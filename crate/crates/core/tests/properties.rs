use bgamma::bernstein_gamma::{stirling_components, BernsteinGamma};
use bgamma::inversion::{self, InversionConfig};
use bgamma::{BernsteinFunction, LevyExponent, MellinLaw, Measure};
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// A Bernstein function with drift, killing and an exponential jump part.
fn phi_strategy() -> impl Strategy<Value = BernsteinFunction> {
    (0.0..2.0f64, 0.1..2.0f64, prop::option::of((0.1..3.0f64, 0.2..4.0f64))).prop_map(|(k, d, jump)| {
        let m = match jump {
            Some((w, r)) => Measure::exponential(w, r),
            None => Measure::zero(),
        };
        BernsteinFunction::new(k, d, m).unwrap()
    })
}

fn process_strategy() -> impl Strategy<Value = LevyExponent> {
    (0.2..3.0f64, 0.2..3.0f64, 0.0..1.0f64, 0.0..1.5f64).prop_map(|(s2, g, q, w)| {
        let down = if w > 0.1 { Measure::exponential(w, 2.0) } else { Measure::zero() };
        LevyExponent::new(s2, g, q, Measure::zero(), down).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn w_recurrence(phi in phi_strategy(), a in 0.2..5.0f64, b in -30.0..30.0f64) {
        let w = BernsteinGamma::new(phi.clone()).unwrap();
        let z = C::new(a, b);
        let lhs = w.eval(z + 1.0).unwrap();
        let rhs = phi.value(z) * w.eval(z).unwrap();
        prop_assert!(rel(lhs, rhs) < 1e-9, "{lhs} vs {rhs}");
    }

    #[test]
    fn w_conjugate_symmetry(phi in phi_strategy(), a in 0.2..5.0f64, b in 0.0..30.0f64) {
        let w = BernsteinGamma::new(phi).unwrap();
        let z = C::new(a, b);
        prop_assert!(rel(w.eval(z.conj()).unwrap(), w.eval(z).unwrap().conj()) < 1e-12);
    }

    #[test]
    fn w_scaling(phi in phi_strategy(), c in 0.2..5.0f64, a in 0.2..4.0f64, b in -10.0..10.0f64) {
        let z = C::new(a, b);
        let w = BernsteinGamma::new(phi.clone()).unwrap().eval(z).unwrap();
        let wc = BernsteinGamma::new(phi.scaled(c)).unwrap().eval(z).unwrap();
        let expect = w * C::new(c, 0.0).powc(z - 1.0);
        prop_assert!(rel(wc, expect) < 1e-9, "{wc} vs {expect}");
    }

    #[test]
    fn w_bounded_by_real_axis(phi in phi_strategy(), a in 0.2..5.0f64, b in -40.0..40.0f64) {
        let w = BernsteinGamma::new(phi).unwrap();
        let on_line = w.eval(C::new(a, b)).unwrap().norm();
        let real = w.eval(C::new(a, 0.0)).unwrap().re;
        prop_assert!(on_line <= real * (1.0 + 1e-12));
    }

    #[test]
    fn stirling_component_bounds(phi in phi_strategy(), a in 0.3..4.0f64, b in -20.0..20.0f64) {
        let s = stirling_components(&phi, C::new(a, b)).unwrap();
        prop_assert!(s.e.abs() <= 19.0 / (8.0 * a));
        prop_assert!(s.r.abs() <= 0.75);
        prop_assert!(s.a >= -1e-12 && s.a <= std::f64::consts::FRAC_PI_2 * b.abs() + 1e-12);
    }

    #[test]
    fn mellin_recurrence(e in process_strategy(), a in 0.1..0.9f64, b in -15.0..15.0f64) {
        let law = MellinLaw::new(&e).unwrap();
        let r = law.recurrence_residual(C::new(a, b)).unwrap();
        prop_assert!(r < 1e-9, "{r}");
    }

    #[test]
    fn mellin_conjugate_symmetry(e in process_strategy(), a in 0.1..0.9f64, b in 0.0..15.0f64) {
        let law = MellinLaw::new(&e).unwrap();
        let z = C::new(a, b);
        prop_assert!(rel(law.eval(z.conj()).unwrap(), law.eval(z).unwrap().conj()) < 1e-12);
    }

    #[test]
    fn mellin_invariant_under_factor_rescaling(e in process_strategy(), k in 0.2..5.0f64, a in 0.1..0.9f64, b in -10.0..10.0f64) {
        let law = MellinLaw::new(&e).unwrap();
        let scaled = MellinLaw::from_pair(&e, law.pair.rescaled(k)).unwrap();
        let z = C::new(a, b);
        prop_assert!(rel(scaled.eval(z).unwrap(), law.eval(z).unwrap()) < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn cdf_is_monotone(e in process_strategy(), x0 in 0.05..2.0f64) {
        let law = MellinLaw::new(&e).unwrap();
        let cfg = InversionConfig::default();
        let mut prev = -1.0;
        for k in 0..6 {
            let f = inversion::cdf(&law, x0 * 1.5f64.powi(k), &cfg).unwrap();
            prop_assert!(f.value >= prev - f.err - 1e-8, "{} after {prev}", f.value);
            prop_assert!((-1e-8..=1.0 + 1e-8).contains(&f.value));
            prev = f.value;
        }
    }
}
