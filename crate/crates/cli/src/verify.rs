//! Invariant checks behind `bgamma verify`.

use std::f64::consts::PI;

use bgamma::bernstein_gamma::{a_phi, a_phi_dual, euler_constant, log_abs_stirling, stirling_components, BernsteinGamma};
use bgamma::inversion::{self, InversionConfig};
use bgamma::wiener_hopf::IDENTITY_TOL;
use bgamma::{BernsteinFunction, DecayClass, Error, MellinLaw, SpecFile, Support};
use num_complex::Complex64 as C;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn check(name: &str, r: Result<f64, Error>, tol: f64) -> Check {
    match r {
        Ok(v) => Check { name: name.into(), value: v, tolerance: tol, pass: v <= tol, note: None },
        Err(e) => Check { name: name.into(), value: f64::NAN, tolerance: tol, pass: false, note: Some(e.to_string()) },
    }
}

fn grid() -> Vec<C> {
    let mut g = Vec::new();
    for i in 0..11 {
        for j in 0..11 {
            g.push(C::new(0.5 + 0.55 * i as f64, -30.0 + 6.0 * j as f64));
        }
    }
    g
}

/// Lanczos Γ for Re z ≥ 1/2, an oracle independent of the library.
fn lanczos_gamma(z: C) -> C {
    const P: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let z = z - 1.0;
    let mut x = C::new(P[0], 0.0);
    for (i, p) in P.iter().enumerate().skip(1) {
        x += *p / (z + i as f64);
    }
    let t = z + 7.5;
    (0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()).exp()
}

fn max_over<F: Fn(C) -> Result<f64, Error>>(f: F) -> Result<f64, Error> {
    grid().into_iter().try_fold(0.0f64, |m, z| Ok(m.max(f(z)?)))
}

fn bernstein_checks(phi: &BernsteinFunction, out: &mut Vec<Check>) {
    let w = match BernsteinGamma::new(phi.clone()) {
        Ok(w) => w,
        Err(e) => {
            out.push(check("w_phi_construction", Err(e), 0.0));
            return;
        }
    };
    if phi.is_pure_drift() {
        // W_{δz}(z) = δ^{z−1}Γ(z)
        let d = phi.delta;
        out.push(check(
            "gamma_recovery",
            max_over(|z| {
                let g = lanczos_gamma(z) * C::new(d, 0.0).powc(z - 1.0);
                Ok((w.eval(z)? - g).norm() / g.norm())
            }),
            1e-10,
        ));
    }
    out.push(check(
        "w_recurrence",
        max_over(|z| {
            let rhs = phi.value(z) * w.eval(z)?;
            Ok((w.eval(z + 1.0)? - rhs).norm() / rhs.norm())
        }),
        1e-9,
    ));
    out.push(check("w_conjugate_symmetry", max_over(|z| Ok((w.eval(z.conj())? - w.eval(z)?.conj()).norm() / w.eval(z)?.norm())), 1e-12));
    out.push(check(
        "stirling_modulus",
        max_over(|z| {
            let exact = w.eval(z)?.norm();
            Ok((log_abs_stirling(phi, z)?.exp() - exact).abs() / exact)
        }),
        1e-9,
    ));
    out.push(check(
        "stirling_component_bounds",
        max_over(|z| {
            let s = stirling_components(phi, z)?;
            let (a, b) = (z.re, z.im.abs());
            let excess = (s.e.abs() - 19.0 / (8.0 * a)).max(s.r.abs() - 0.75).max(-s.a).max(s.a - PI / 2.0 * b);
            Ok(excess.max(0.0))
        }),
        1e-12,
    ));
    out.push(check(
        "euler_constant_bracket",
        euler_constant(phi).map(|(g, _)| {
            let p1 = phi.value_real(1.0);
            let d1 = phi.deriv_value(C::new(1.0, 0.0), 1).re;
            (-p1.ln() - g).max(g - (d1 / p1 - p1.ln())).max(0.0)
        }),
        1e-12,
    ));
    let dual = [(1.0, 5.0), (2.0, 20.0), (0.5, 50.0)]
        .iter()
        .try_fold(0.0f64, |m, &(a, b)| Ok::<f64, Error>(m.max((a_phi(phi, C::new(a, b))? - a_phi_dual(phi, C::new(a, b))?).abs())));
    out.push(check("a_phi_dual_representation", dual, 1e-6));
}

fn law_checks(law: &MellinLaw, tol: f64, out: &mut Vec<Check>) {
    let cfg = InversionConfig::with_tol(tol);
    out.push(check("wiener_hopf_identity", Ok(law.pair.identity_residual(&law.exponent)), IDENTITY_TOL));
    out.push(check("mellin_normalization", law.eval(C::new(1.0, 0.0)).map(|m| (m - 1.0).norm()), 1e-10));
    let (lo, hi) = (law.band.0.max(0.0), law.band.1.min(1.0));
    let pts: Vec<C> = (1..=5).flat_map(|i| (-5..=5).map(move |j| C::new(lo + (hi - lo) * i as f64 / 6.0, 3.0 * j as f64))).collect();
    out.push(check(
        "mellin_recurrence",
        pts.iter().try_fold(0.0f64, |m, &z| match law.recurrence_residual(z) {
            Ok(r) => Ok(m.max(r)),
            Err(Error::ZeroDenominator(_)) => Ok(m),
            Err(e) => Err(e),
        }),
        1e-9,
    ));
    out.push(check(
        "mellin_conjugate_symmetry",
        pts.iter().try_fold(0.0f64, |m, &z| Ok::<f64, Error>(m.max((law.eval(z.conj())? - law.eval(z)?.conj()).norm() / law.eval(z)?.norm()))),
        1e-12,
    ));

    let sup = inversion::support(law);
    if matches!(sup, Support::Point { .. }) {
        return;
    }
    let xs: Vec<f64> = [0.05, 0.2, 0.5, 0.9, 1.5, 3.0, 8.0].into_iter().filter(|&x| sup.contains(x)).collect();
    let comp = xs.iter().try_fold(0.0f64, |m, &x| {
        let f = inversion::cdf(law, x, &cfg)?.value;
        let t = inversion::tail(law, x, &cfg)?.value;
        Ok::<f64, Error>(m.max((f + t - 1.0).abs()))
    });
    out.push(check("cdf_plus_tail", comp, 1e3 * tol));
    let mono = xs.iter().try_fold((0.0f64, -1.0f64), |(worst, prev), &x| {
        let f = inversion::cdf(law, x, &cfg)?.value;
        Ok::<(f64, f64), Error>((worst.max(prev - f), f))
    });
    out.push(check("cdf_monotone", mono.map(|m| m.0.max(0.0)), 10.0 * tol));

    let smooth = match law.decay_class() {
        Ok(DecayClass::Polynomial { n }) => n > 2.0,
        Ok(_) => true,
        Err(_) => false,
    };
    if smooth {
        let d = xs.iter().take(4).try_fold(0.0f64, |m, &x| {
            let h = 1e-3 * x;
            if !(sup.contains(x - h) && sup.contains(x + h)) {
                return Ok(m);
            }
            let fd = (inversion::cdf(law, x + h, &cfg)?.value - inversion::cdf(law, x - h, &cfg)?.value) / (2.0 * h);
            let f = inversion::density(law, x, 0, &cfg)?.value;
            Ok::<f64, Error>(m.max((fd - f).abs() / (1.0 + f)))
        });
        out.push(check("cdf_derivative_matches_density", d, 1e-5));
    }

    let q = law.exponent.kill_rate;
    if q > 0.0 && law.decay_exponent().map(|n| n > 1.0).unwrap_or(false) {
        let r = inversion::density(law, 1e-4, 0, &cfg).map(|d| (d.value / q - 1.0).abs());
        out.push(check("density_at_zero", r, 0.01));
        if let Ok(s) = inversion::small_x_series(law, 1e-3, 1) {
            let r = inversion::cdf(law, 1e-3, &cfg).map(|f| (f.value - s.value).abs().max(0.0) - s.remainder_bound);
            out.push(check("series_vs_inversion", r.map(|v| v.max(0.0)), 1e-6));
        }
    }
    if let Ok(cr) = inversion::cramer_tail(law, 0) {
        let mut x = 10.0f64;
        while cr.constant * x.powf(cr.theta) >= 1e-3 && x < 1e8 {
            x *= 2.0;
        }
        let r = inversion::tail(law, x, &cfg).map(|t| (cr.constant * x.powf(cr.theta) / t.value - 1.0).abs());
        out.push(check("cramer_vs_inversion", r, 0.05));
    }
}

pub fn run(spec: &SpecFile, tol: f64) -> Result<Vec<Check>, Error> {
    let mut out = Vec::new();
    if spec.bernstein.is_some() || (spec.phi_plus.is_some() && !spec.has_process()) {
        bernstein_checks(&spec.bernstein()?, &mut out);
    }
    if spec.has_process() {
        let e = spec.process()?;
        let law = match spec.pair()? {
            Some(p) => MellinLaw::from_pair(&e, p)?,
            None => MellinLaw::new(&e)?,
        };
        law_checks(&law, tol, &mut out);
    }
    if out.is_empty() {
        return Err(Error::Parse("nothing to verify: give a process or a [bernstein] section".into()));
    }
    Ok(out)
}
