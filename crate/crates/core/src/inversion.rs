//! Distribution of `I_Ψ` by Mellin–Barnes inversion, with the small-x series
//! and the Cramér tail as alternative regimes.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use num_traits::{FromPrimitive, One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::bernstein_gamma::{BernsteinGamma, DecayClass, ExtLog};
use crate::error::{Error, Result};
use crate::mellin::MellinLaw;
use crate::quadrature::{self, QuadOpts, Tail};
use crate::simulate::{self, MomentEstimate, PathSampler};

type C = Complex64;

fn c(x: f64) -> C {
    C::new(x, 0.0)
}

/// Controls for a single inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InversionConfig {
    /// Contour abscissa; chosen by a real-axis saddle search when `None`.
    pub contour_re: Option<f64>,
    /// Imaginary cutoff; derived from the decay class when `None`.
    pub trunc_b: Option<f64>,
    pub tol: f64,
    pub max_derivative: usize,
    /// Cell width used for grid-averaged densities in the `L²` regime.
    pub cell: f64,
}

impl Default for InversionConfig {
    fn default() -> Self {
        InversionConfig { contour_re: None, trunc_b: None, tol: 1e-8, max_derivative: 4, cell: 1e-3 }
    }
}

impl InversionConfig {
    pub fn with_tol(tol: f64) -> Self {
        InversionConfig { tol, ..Default::default() }
    }
}

/// Result of one inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Inverted {
    pub value: f64,
    pub err: f64,
    pub contour: f64,
    /// Set when the value is an average over a cell of this width.
    pub cell: Option<f64>,
}

/// Support of the law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Support {
    Point { x: f64 },
    Interval { lo: f64, hi: f64, lo_closed: bool, hi_closed: bool },
}

impl Support {
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Support::Point { x: p } => (x - p).abs() <= 1e-12 * p,
            Support::Interval { lo, hi, lo_closed, hi_closed } => {
                (x > lo || (lo_closed && x == lo)) && (x < hi || (hi_closed && x == hi))
            }
        }
    }

    pub fn upper(&self) -> f64 {
        match *self {
            Support::Point { x } => x,
            Support::Interval { hi, .. } => hi,
        }
    }

    pub fn lower(&self) -> f64 {
        match *self {
            Support::Point { x } => x,
            Support::Interval { lo, .. } => lo,
        }
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Support::Point { x } => write!(f, "{{{x}}}"),
            Support::Interval { lo, hi, lo_closed, hi_closed } => write!(
                f,
                "{}{lo}, {hi}{}",
                if lo_closed { '[' } else { '(' },
                if hi_closed && hi.is_finite() { ']' } else { ')' }
            ),
        }
    }
}

/// Support from the shape of the factors.
pub fn support(law: &MellinLaw) -> Support {
    let (pp, pm) = (&law.pair.phi_plus, &law.pair.phi_minus);
    let edge = 1.0 / (pm.at_infinity() * pp.delta);
    if pm.is_constant() {
        if pp.is_pure_drift() {
            Support::Point { x: edge }
        } else {
            Support::Interval { lo: 0.0, hi: edge, lo_closed: false, hi_closed: edge.is_finite() }
        }
    } else if pp.is_pure_drift() {
        Support::Interval { lo: edge, hi: f64::INFINITY, lo_closed: true, hi_closed: false }
    } else {
        Support::Interval { lo: 0.0, hi: f64::INFINITY, lo_closed: false, hi_closed: false }
    }
}

/// How `|kernel(a+ib)|` decays.
#[derive(Debug, Clone, Copy)]
enum Decay {
    Exponential(f64),
    Polynomial(f64),
}

fn kernel_decay(law: &MellinLaw, shift: f64) -> Result<Decay> {
    Ok(match law.decay_class()? {
        DecayClass::Exponential { theta } => Decay::Exponential(theta),
        DecayClass::Polynomial { n } => Decay::Polynomial(n + shift),
        DecayClass::Rapid => Decay::Exponential(0.5),
    })
}

/// `(1/π) Re ∫_0^∞ x^{−(a+ib)} K(a+ib) db`.
fn mellin_barnes<K: Fn(C) -> Result<C>>(x: f64, a: f64, kernel: K, decay: Decay, cfg: &InversionConfig) -> Result<(f64, f64)> {
    let lx = x.ln();
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let g = |b: f64| -> C {
        let w = C::new(a, b);
        match kernel(w) {
            Ok(k) => (-w * lx).exp() * k,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                c(0.0)
            }
        }
    };
    let gr = |b: f64| g(b).re;
    let abs_tol = cfg.tol * PI * 0.05;
    let opts = QuadOpts::with_tol(abs_tol, 1e-11);
    let check = |r: Result<f64>| -> Result<f64> {
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        r
    };

    let (value, err) = match decay {
        Decay::Exponential(theta) => {
            let mut bmax = cfg.trunc_b.unwrap_or((1.0 / cfg.tol).ln() / theta + 10.0);
            if cfg.trunc_b.is_none() {
                while g(bmax).norm() / theta > abs_tol * 1e-2 {
                    bmax *= 1.5;
                    if bmax > 1e5 {
                        return Err(Error::TruncationFailure(format!("integrand still {:.1e} at b = {bmax:.0}", g(bmax).norm())));
                    }
                }
            }
            let panel = (PI / lx.abs().max(1e-12)).clamp(1.0, 8.0);
            let mut s = 0.0;
            let mut lo = 0.0;
            while lo < bmax {
                let hi = (lo + panel).min(bmax);
                s += check(quadrature::integrate_real(gr, lo, hi, &opts))?;
                lo = hi;
            }
            (s, g(bmax).norm() / theta)
        }
        Decay::Polynomial(p) => {
            if p <= 0.0 {
                return Err(Error::TruncationFailure(format!("kernel decays like |b|^{{-{p}}}: not integrable")));
            }
            let b0 = 20.0;
            let mut head = 0.0;
            for w in [0.0, 0.5, 2.0, 8.0, b0].windows(2) {
                head += check(quadrature::integrate_real(gr, w[0], w[1], &opts))?;
            }
            // effective oscillation rate of the integrand beyond b0
            let h = 0.05;
            let omega = ((g(b0 + h) / g(b0)).arg() / h).abs();
            check(Ok(0.0))?;
            if cfg.trunc_b.is_some() || omega < PI / 400.0 {
                let tail = match cfg.trunc_b {
                    Some(bm) => check(quadrature::integrate_real(gr, b0, bm.max(b0), &opts))?,
                    None => {
                        let r = quadrature::integrate_to_inf(|b| c(gr(b)), b0, Tail::Algebraic(b0), &opts);
                        check(r.map(|r| r.value.re))?
                    }
                };
                (head + tail, abs_tol)
            } else {
                let half = PI / omega;
                let mut sums = Vec::new();
                let mut s = head;
                let mut lo = b0;
                let mut best = (f64::NAN, f64::INFINITY);
                for k in 0..6000 {
                    s += check(quadrature::integrate_real(gr, lo, lo + half, &opts))?;
                    lo += half;
                    sums.push(s);
                    if k >= 8 && k % 2 == 0 {
                        let tailn = &sums[sums.len().saturating_sub(40)..];
                        let (est, e) = quadrature::wynn_epsilon(tailn);
                        let e = e.max(1e-15 * est.abs());
                        if e < best.1 {
                            best = (est, e);
                        }
                        if e < abs_tol * 0.1 {
                            break;
                        }
                    }
                }
                if !(best.1 < abs_tol * 10.0) {
                    return Err(Error::TruncationFailure(format!(
                        "oscillatory tail did not settle (last error {:.1e})",
                        best.1
                    )));
                }
                best
            }
        }
    };
    Ok((value / PI, err / PI))
}

/// Admissible `Re z` range for a kernel whose poles sit at `lo` and `hi`.
fn saddle<F: Fn(f64) -> f64>(lo: f64, hi: f64, f: F) -> f64 {
    let span = if hi.is_finite() { hi - lo } else { 8.0 };
    let lo_f = if lo.is_finite() { lo } else { hi - 8.0 };
    let (mut a, mut b) = (lo_f + 0.02 * span.min(1.0) * 0.5, lo_f + span - 0.02 * span.min(1.0) * 0.5);
    if !hi.is_finite() {
        b = lo_f + 8.0;
    }
    if !lo.is_finite() {
        a = hi - 40.0;
    }
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let safe = |t: f64| {
        let v = f(t);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    for _ in 0..60 {
        let x1 = b - gr * (b - a);
        let x2 = a + gr * (b - a);
        if safe(x1) < safe(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    0.5 * (a + b)
}

fn pochhammer(z: C, n: usize) -> C {
    (0..n).fold(c(1.0), |acc, k| acc * (z + k as f64))
}

fn cap_for(law: &MellinLaw) -> Result<Option<i64>> {
    Ok(match law.decay_class()? {
        DecayClass::Polynomial { n } => Some(n.ceil() as i64 - 2),
        _ => None,
    })
}

/// `f^{(n)}(x)`.
pub fn density(law: &MellinLaw, x: f64, n: usize, cfg: &InversionConfig) -> Result<Inverted> {
    if !(x > 0.0) {
        return Err(Error::InvalidInput("x must be positive".into()));
    }
    let sup = support(law);
    if !sup.contains(x) || matches!(sup, Support::Point { .. }) {
        return Err(Error::OutsideSupport { x, support: sup.to_string() });
    }
    if n > cfg.max_derivative {
        return Err(Error::SmoothnessCapExceeded { requested: n as i64, cap: cfg.max_derivative as i64 });
    }
    let cap = cap_for(law)?;
    if n >= 1 {
        if let Some(cap) = cap {
            if n as i64 > cap {
                return Err(Error::SmoothnessCapExceeded { requested: n as i64, cap });
            }
        }
    }
    if n == 0 {
        if let DecayClass::Polynomial { n: big_n } = law.decay_class()? {
            if big_n <= 1.0 {
                // L² regime: cell average
                let h = cfg.cell;
                let (l, r) = ((x - 0.5 * h).max(0.0), x + 0.5 * h);
                let fr = cdf(law, r, cfg)?;
                let fl = if l > 0.0 { cdf(law, l, cfg)? } else { Inverted { value: 0.0, err: 0.0, contour: 0.0, cell: None } };
                return Ok(Inverted {
                    value: (fr.value - fl.value) / (r - l),
                    err: (fr.err + fl.err) / (r - l),
                    contour: fr.contour,
                    cell: Some(r - l),
                });
            }
        }
    }
    let (lo, hi) = law.strip;
    let lx = x.ln();
    let a = cfg.contour_re.unwrap_or_else(|| {
        saddle(lo.max(0.0), hi, |a| -a * lx + (pochhammer(c(a), n).norm() * law.eval(c(a)).map(|m| m.norm()).unwrap_or(f64::INFINITY)).ln())
    });
    if !(a > lo.max(0.0) && a < hi) {
        return Err(Error::OutOfStrip { z: c(a), lo: lo.max(0.0), hi });
    }
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let kernel = |w: C| -> Result<C> { Ok(pochhammer(w, n) * law.eval(w)? * x.powi(-(n as i32))) };
    let (v, e) = mellin_barnes(x, a, kernel, kernel_decay(law, -(n as f64))?, cfg)?;
    Ok(Inverted { value: sign * v, err: e, contour: a, cell: None })
}

/// `F(x) = P(I ≤ x)`.
pub fn cdf(law: &MellinLaw, x: f64, cfg: &InversionConfig) -> Result<Inverted> {
    let sup = support(law);
    if let Some(v) = outside_value(&sup, x) {
        return Ok(Inverted { value: v, err: 0.0, contour: f64::NAN, cell: None });
    }
    let (lo, _) = law.strip;
    let lo = lo.max(0.0);
    let lx = x.ln();
    let a = cfg.contour_re.unwrap_or_else(|| {
        saddle(lo, 1.0, |a| (1.0 - a) * lx + (law.eval(c(a)).map(|m| m.norm()).unwrap_or(f64::INFINITY) / (1.0 - a)).ln())
    });
    if !(a > lo && a < 1.0) {
        return Err(Error::OutOfStrip { z: c(a), lo, hi: 1.0 });
    }
    let kernel = |w: C| -> Result<C> { Ok(-law.eval(w)? / (w - 1.0) * x) };
    let (v, e) = mellin_barnes(x, a, kernel, kernel_decay(law, 1.0)?, cfg)?;
    Ok(Inverted { value: v, err: e, contour: a, cell: None })
}

/// `F̄(x) = P(I > x)`.
pub fn tail(law: &MellinLaw, x: f64, cfg: &InversionConfig) -> Result<Inverted> {
    let sup = support(law);
    if let Some(v) = outside_value(&sup, x) {
        return Ok(Inverted { value: 1.0 - v, err: 0.0, contour: f64::NAN, cell: None });
    }
    let (_, hi) = law.strip;
    if !(hi > 1.0) {
        let f = cdf(law, x, cfg)?;
        return Ok(Inverted { value: 1.0 - f.value, ..f });
    }
    let lx = x.ln();
    let a = cfg.contour_re.map(|a| if a > 1.0 { a } else { 0.5 * (1.0 + hi.min(2.0)) }).unwrap_or_else(|| {
        saddle(1.0, hi, |a| (1.0 - a) * lx + (law.eval(c(a)).map(|m| m.norm()).unwrap_or(f64::INFINITY) / (a - 1.0)).ln())
    });
    if !(a > 1.0 && a < hi) {
        return Err(Error::OutOfStrip { z: c(a), lo: 1.0, hi });
    }
    let kernel = |w: C| -> Result<C> { Ok(law.eval(w)? / (w - 1.0) * x) };
    let (v, e) = mellin_barnes(x, a, kernel, kernel_decay(law, 1.0)?, cfg)?;
    Ok(Inverted { value: v, err: e, contour: a, cell: None })
}

fn outside_value(sup: &Support, x: f64) -> Option<f64> {
    match *sup {
        Support::Point { x: p } => Some(if x >= p { 1.0 } else { 0.0 }),
        Support::Interval { lo, hi, .. } => {
            if x <= lo {
                Some(0.0)
            } else if x >= hi {
                Some(1.0)
            } else {
                None
            }
        }
    }
}

// --- small-x expansion --------------------------------------------------

/// `c_k = −Ψ(0)∏_{j<k}Ψ(j)/k!`, `k = 1..=m`, in any field.
pub fn series_coefficients<T>(psi0: &T, psi: &[T], m: usize) -> Vec<T>
where
    T: Clone + Zero + One + std::ops::Neg<Output = T> + std::ops::Div<Output = T> + FromPrimitive,
{
    let mut out = Vec::with_capacity(m);
    let mut prod = -psi0.clone();
    for k in 1..=m {
        if k >= 2 {
            prod = prod * psi[k - 2].clone();
        }
        prod = prod / T::from_usize(k).expect("k is representable");
        out.push(prod.clone());
    }
    out
}

/// Whether the small-x series converges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeriesRadius {
    Convergent { radius: f64 },
    Asymptotic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallSeries {
    pub value: f64,
    pub coefficients: Vec<f64>,
    pub remainder_bound: f64,
    pub radius: SeriesRadius,
}

/// Pole-count bound on the expansion order.
pub fn order_bound(law: &MellinLaw) -> f64 {
    let t = law.pair.phi_plus.thresholds();
    let th = t.theta_phi.abs();
    if th.is_finite() && (th - th.round()).abs() < 1e-9 && th.round() >= 1.0 {
        th.round()
    } else if t.a_phi.is_finite() {
        (t.a_phi.abs() + 1.0).ceil()
    } else {
        f64::INFINITY
    }
}

pub fn series_radius(law: &MellinLaw) -> SeriesRadius {
    let (pp, pm) = (&law.pair.phi_plus, &law.pair.phi_minus);
    if pp.is_constant() {
        SeriesRadius::Convergent { radius: 1.0 / (pp.at_infinity() * pm.delta) }
    } else if pp.is_affine() && pp.delta > 0.0 && pm.at_infinity().is_finite() {
        SeriesRadius::Convergent { radius: 1.0 / (pm.at_infinity() * pp.delta) }
    } else {
        SeriesRadius::Asymptotic
    }
}

/// `F(x) ≈ Σ_{k≤m} c_k x^k` with the contour bound on the remainder.
pub fn small_x_series(law: &MellinLaw, x: f64, m: usize) -> Result<SmallSeries> {
    let q = -law.exponent.value(c(0.0)).re;
    if !(q > 0.0) {
        return Err(Error::NotKilled);
    }
    let bound = order_bound(law);
    if !((m as f64) < bound) {
        return Err(Error::OrderExceedsPoles { order: m, bound });
    }
    let (pp, pm) = (&law.pair.phi_plus, &law.pair.phi_minus);
    let psi: Vec<f64> = (1..m.max(1)).map(|j| -pp.value_real(-(j as f64)) * pm.value_real(j as f64)).collect();
    let coefficients = series_coefficients(&-q, &psi, m);
    let value = coefficients.iter().enumerate().map(|(k, ck)| ck * x.powi(k as i32 + 1)).sum();
    let remainder_bound = remainder_bound(law, x, m)?;
    Ok(SmallSeries { value, coefficients, remainder_bound, radius: series_radius(law) })
}

/// `x^{−a}/(2π) ∫ |M(a+1+ib)|/|a+ib| db` on a contour `a ∈ (−m−1, −m)`.
fn remainder_bound(law: &MellinLaw, x: f64, m: usize) -> Result<f64> {
    let a_lo = (-(m as f64) - 1.0).max(law.band.0 - 1.0);
    let a = 0.5 * (a_lo - m as f64);
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let f = |b: f64| -> C {
        match law.eval(C::new(a + 1.0, b)) {
            Ok(v) => c(v.norm() / C::new(a, b).norm()),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                c(0.0)
            }
        }
    };
    let opts = QuadOpts::with_tol(1e-16, 1e-6);
    // dyadic panels; the remainder is extrapolated geometrically from the
    // last panel ratio (exact for power-law decay)
    let mut total = quadrature::integrate(f, 0.0, 10.0, &opts)?.value.re;
    let mut lo = 10.0;
    let (mut prev, mut prev_r) = (f64::NAN, f64::NAN);
    for _ in 0..40 {
        let cur = quadrature::integrate(f, lo, 2.0 * lo, &opts)?.value.re;
        total += cur;
        lo *= 2.0;
        let r = cur / prev;
        if r.is_finite() && r < 0.95 && ((r - prev_r).abs() < 1e-3 || cur < 1e-12 * total) {
            total += cur * r / (1.0 - r);
            break;
        }
        prev = cur;
        prev_r = r;
    }
    let (head, tail) = (total, 0.0);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(x.powf(-a) * 2.0 * (head + tail) / (2.0 * PI))
}

// --- Cramér tail ----------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cramer {
    pub theta: f64,
    pub constant: f64,
}

fn cramer_parts(law: &MellinLaw) -> Result<(f64, f64)> {
    let pm = &law.pair.phi_minus;
    let t = pm.try_thresholds()?;
    let theta = t.theta_phi;
    if !(theta.is_finite() && theta < 0.0) || t.d_phi != theta {
        return Err(Error::NoCramerRoot(format!("d_φ₋ = {} is not a root of φ₋", t.d_phi)));
    }
    if !(theta > t.a_phi + 1e-6) {
        return Err(Error::ConditionUnverifiable(format!("root {theta} too close to the abscissa {}", t.a_phi)));
    }
    if !law.imaginary_zeros.is_empty() {
        return Err(Error::ConditionUnverifiable("Ψ has zeros on the imaginary axis (lattice case)".into()));
    }
    let d1 = pm.deriv_value(c(theta), 1).re;
    if !(d1.is_finite() && d1 > 0.0) {
        return Err(Error::ConditionUnverifiable(format!("φ₋′(θ⁺) = {d1}")));
    }
    let wm = match law.bg_minus.log_extended(c(1.0 + theta))? {
        ExtLog::Value(v) => v.value.exp().re,
        ExtLog::Pole { location, residue } => return Err(Error::NearPole { pole: location, residue }),
    };
    let wp = law.bg_plus.eval(c(1.0 - theta))?.re;
    Ok((theta, pm.kappa * wm / (d1 * wp)))
}

/// `F̄(x) ~ C x^θ` for `n = 0`; for `n ≥ 1` the constant `K_n` in
/// `f^{(n)}(x) ~ K_n x^{θ−n−1}`.
pub fn cramer_tail(law: &MellinLaw, n: usize) -> Result<Cramer> {
    let (theta, base) = cramer_parts(law)?;
    let g = BernsteinGamma::gamma();
    let constant = if n == 0 {
        base * g.eval(c(-theta))?.re
    } else {
        cramer_density_constant(law, n)?
    };
    Ok(Cramer { theta, constant })
}

/// `K_n` for `f^{(n)}`, any `n ≥ 0`.
pub fn cramer_density_constant(law: &MellinLaw, n: usize) -> Result<f64> {
    let (theta, base) = cramer_parts(law)?;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * base * BernsteinGamma::gamma().eval(c(n as f64 + 1.0 - theta))?.re)
}

// --- grids ----------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Inversion,
    SmallSeries,
    CramerTail,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Inversion => "inversion",
            Regime::SmallSeries => "small_series",
            Regime::CramerTail => "cramer_tail",
        })
    }
}

/// Which regimes a grid computation may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeChoice {
    Auto,
    Inversion,
    Series,
    Tail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityGrid {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub cdf: Vec<f64>,
    pub tail: Vec<f64>,
    pub derivatives: Vec<Vec<f64>>,
    pub regime: Vec<Regime>,
    pub err_est: Vec<f64>,
}

struct Row {
    f: f64,
    big_f: f64,
    fbar: f64,
    ders: Vec<f64>,
    regime: Regime,
    err: f64,
}

fn series_row(law: &MellinLaw, x: f64, cfg: &InversionConfig) -> Result<Row> {
    let m = ((order_bound(law) - 1.0).min(8.0)).max(1.0) as usize;
    let s = small_x_series(law, x, m)?;
    if !(s.remainder_bound < cfg.tol) {
        return Err(Error::TruncationFailure(format!("series remainder {:.1e} above tolerance", s.remainder_bound)));
    }
    let f: f64 = s.coefficients.iter().enumerate().map(|(k, ck)| ck * (k + 1) as f64 * x.powi(k as i32)).sum();
    Ok(Row { f, big_f: s.value, fbar: 1.0 - s.value, ders: vec![], regime: Regime::SmallSeries, err: s.remainder_bound })
}

fn tail_row(law: &MellinLaw, x: f64) -> Result<Row> {
    let cr = cramer_tail(law, 0)?;
    let k0 = cramer_density_constant(law, 0)?;
    let fbar = cr.constant * x.powf(cr.theta);
    Ok(Row {
        f: k0 * x.powf(cr.theta - 1.0),
        big_f: 1.0 - fbar,
        fbar,
        ders: vec![],
        regime: Regime::CramerTail,
        err: f64::NAN,
    })
}

fn inversion_row(law: &MellinLaw, x: f64, n: usize, cfg: &InversionConfig) -> Result<Row> {
    let sup = support(law);
    let f = if sup.contains(x) && !matches!(sup, Support::Point { .. }) {
        density(law, x, 0, cfg)?
    } else {
        Inverted { value: 0.0, err: 0.0, contour: f64::NAN, cell: None }
    };
    let mut ders = Vec::with_capacity(n);
    for k in 1..=n {
        ders.push(if f.contour.is_nan() { 0.0 } else { density(law, x, k, cfg)?.value });
    }
    // use the contour whose answer is the smaller of F, F̄
    let fc = cdf(law, x, cfg)?;
    let (big_f, fbar, err) = if fc.value <= 0.5 {
        (fc.value, 1.0 - fc.value, fc.err)
    } else {
        let t = tail(law, x, cfg)?;
        (1.0 - t.value, t.value, t.err)
    };
    Ok(Row { f: f.value, big_f, fbar, ders, regime: Regime::Inversion, err: err.max(f.err) })
}

/// Density, distribution function and tail on a grid; rows computed in parallel.
pub fn density_grid(law: &MellinLaw, xs: &[f64], n: usize, choice: RegimeChoice, cfg: &InversionConfig) -> Result<DensityGrid> {
    let rows: Vec<Result<Row>> = xs
        .par_iter()
        .map(|&x| match choice {
            RegimeChoice::Inversion => inversion_row(law, x, n, cfg),
            RegimeChoice::Series => series_row(law, x, cfg),
            RegimeChoice::Tail => tail_row(law, x),
            RegimeChoice::Auto => {
                if x < 1e-2 {
                    if let Ok(r) = series_row(law, x, cfg) {
                        if n == 0 {
                            return Ok(r);
                        }
                    }
                }
                match inversion_row(law, x, n, cfg) {
                    Ok(r) => Ok(r),
                    Err(e) => match tail_row(law, x) {
                        Ok(r) if x > 1.0 && r.fbar < 1e-3 => Ok(r),
                        _ => Err(e),
                    },
                }
            }
        })
        .collect();
    let mut g = DensityGrid {
        x: xs.to_vec(),
        f: vec![],
        cdf: vec![],
        tail: vec![],
        derivatives: vec![vec![]; n],
        regime: vec![],
        err_est: vec![],
    };
    for r in rows {
        let r = r?;
        g.f.push(r.f);
        g.cdf.push(r.big_f);
        g.tail.push(r.fbar);
        // the series and tail regimes carry no derivatives
        for (k, col) in g.derivatives.iter_mut().enumerate() {
            col.push(r.ders.get(k).copied().unwrap_or(f64::NAN));
        }
        g.regime.push(r.regime);
        g.err_est.push(r.err);
    }
    Ok(g)
}

/// Monte Carlo estimate of `E[I(t)^{−a}]` for an unkilled process.
///
/// `a` must lie in `(0, 1 − a_{φ₊})`; beyond that the moment is infinite.
pub fn finite_horizon_moment(law: &MellinLaw, a: f64, t: f64, n_paths: usize, seed: u64) -> Result<MomentEstimate> {
    if law.exponent.kill_rate != 0.0 {
        return Err(Error::NotInClass("finite-horizon moments need Ψ(0) = 0".into()));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput("t must be positive".into()));
    }
    if !(a > 0.0) {
        return Err(Error::InvalidInput("a must be positive".into()));
    }
    let threshold = 1.0 - law.pair.phi_plus.thresholds().a_phi;
    if a >= threshold {
        return Err(Error::MomentInfinite { a, threshold });
    }
    let s = PathSampler::new(law.exponent.clone(), seed);
    Ok(simulate::sample_finite_horizon(&s, t, n_paths)?.moment(-a))
}

/// `t^a·E[I(t)^{−a}]` along a grid of horizons; tends to 1 as `t → 0`.
pub fn finite_horizon_scaling(law: &MellinLaw, a: f64, ts: &[f64], n_paths: usize, seed: u64) -> Result<Vec<(f64, MomentEstimate)>> {
    ts.iter()
        .map(|&t| {
            let m = finite_horizon_moment(law, a, t, n_paths, seed)?;
            let k = t.powf(a);
            Ok((t, MomentEstimate { order: m.order, mean: k * m.mean, se: k * m.se }))
        })
        .collect()
}
