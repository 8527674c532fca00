//! Characteristic exponents Ψ and Bernstein functions φ.
//!
//! Measures are finite sums of three component kinds: exponential densities
//! `w·e^{−λy}dy`, atoms `w·δ_x`, and tabulated tails (piecewise-linear μ̄ on a
//! grid). For every kind the Laplace-type integrals that φ, Ψ and their
//! derivatives need have closed forms, so evaluation is exact up to rounding.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadOpts};

type C = Complex64;

fn c(x: f64) -> C {
    C::new(x, 0.0)
}

/// `(1 − e^{−w})/w`, accurate near `w = 0`.
pub(crate) fn one_minus_exp_over(w: C) -> C {
    if w.norm() < 0.1 {
        // Σ (−w)^k/(k+1)!
        let mut term = c(1.0);
        let mut s = c(1.0);
        for k in 1..12 {
            term = term * (-w) / (k as f64 + 1.0);
            s += term;
        }
        s
    } else {
        (1.0 - (-w).exp()) / w
    }
}

/// One building block of a one-sided measure on `(0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Component {
    /// Density `weight·e^{−rate·y}`.
    Exponential { weight: f64, rate: f64 },
    /// Point mass `weight` at `location`.
    Atom { weight: f64, location: f64 },
    /// Tail μ̄ given at strictly increasing `grid` points, linear in between,
    /// constant below `grid[0]`; a positive last value is a point mass at the
    /// last grid point.
    Tabulated { grid: Vec<f64>, tail: Vec<f64> },
}

impl Component {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(m.to_string()));
        match self {
            Component::Exponential { weight, rate } => {
                if !(*weight > 0.0 && weight.is_finite()) || !(*rate > 0.0 && rate.is_finite()) {
                    return bad("exponential component needs weight > 0 and rate > 0");
                }
            }
            Component::Atom { weight, location } => {
                if !(*weight > 0.0 && weight.is_finite()) || !(*location > 0.0 && location.is_finite()) {
                    return bad("atom needs weight > 0 and location > 0");
                }
            }
            Component::Tabulated { grid, tail } => {
                if grid.len() < 2 || grid.len() != tail.len() {
                    return bad("tabulated tail needs at least two grid points and matching values");
                }
                if grid[0] < 0.0 || grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|g| !g.is_finite()) {
                    return bad("tabulated grid must be finite, non-negative and strictly increasing");
                }
                if tail.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) || tail.windows(2).any(|w| w[1] > w[0]) {
                    return bad("tabulated tail must be finite, non-negative and non-increasing");
                }
                if tail[0] <= 0.0 {
                    return bad("tabulated tail must carry positive mass");
                }
            }
        }
        Ok(())
    }
}

/// A finite measure on `(0, ∞)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Measure {
    pub components: Vec<Component>,
    /// Optional regular-variation index of the tail at zero, used only for
    /// decay classification of tabulated inputs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

/// `∫_a^{a+h} y^k e^{−zy} dy`.
fn poly_exp_integral(k: usize, z: C, a: f64, h: f64) -> C {
    let zh = z.norm() * h;
    let kj: Vec<C> = if zh <= 20.0 {
        let rule = quadrature::gl32();
        (0..=k)
            .map(|j| quadrature::gl_fixed(&|t: f64| (-z * t).exp() * t.powi(j as i32), 0.0, h, rule))
            .collect()
    } else {
        let e = (-z * h).exp();
        let mut v = Vec::with_capacity(k + 1);
        v.push((1.0 - e) / z);
        for j in 1..=k {
            let prev = v[j - 1];
            v.push((prev * j as f64 - e * h.powi(j as i32)) / z);
        }
        v
    };
    let mut s = c(0.0);
    let mut binom = 1.0;
    for (j, kv) in kj.iter().enumerate() {
        // C(k, j) a^{k-j}
        s += *kv * (binom * a.powi((k - j) as i32));
        binom = binom * (k - j) as f64 / (j + 1) as f64;
    }
    (-z * a).exp() * s
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

impl Measure {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        let m = Measure { components, alpha: None };
        m.validate()?;
        Ok(m)
    }

    pub fn zero() -> Self {
        Measure::default()
    }

    pub fn exponential(weight: f64, rate: f64) -> Self {
        Measure { components: vec![Component::Exponential { weight, rate }], alpha: None }
    }

    pub fn atom(weight: f64, location: f64) -> Self {
        Measure { components: vec![Component::Atom { weight, location }], alpha: None }
    }

    pub fn validate(&self) -> Result<()> {
        for comp in &self.components {
            comp.validate()?;
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::InvalidInput("regular-variation index must lie in (0, 1)".into()));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    pub fn has_tabulated(&self) -> bool {
        self.components.iter().any(|c| matches!(c, Component::Tabulated { .. }))
    }

    pub fn only_exponentials(&self) -> bool {
        self.components.iter().all(|c| matches!(c, Component::Exponential { .. }))
    }

    /// Multiply every weight by `k > 0`.
    pub fn scaled(&self, k: f64) -> Measure {
        let components = self
            .components
            .iter()
            .map(|comp| match comp {
                Component::Exponential { weight, rate } => Component::Exponential { weight: weight * k, rate: *rate },
                Component::Atom { weight, location } => Component::Atom { weight: weight * k, location: *location },
                Component::Tabulated { grid, tail } => {
                    Component::Tabulated { grid: grid.clone(), tail: tail.iter().map(|t| t * k).collect() }
                }
            })
            .collect();
        Measure { components, alpha: self.alpha }
    }

    /// Union of two measures.
    pub fn plus(&self, other: &Measure) -> Measure {
        let mut components = self.components.clone();
        components.extend(other.components.iter().cloned());
        Measure { components, alpha: self.alpha.or(other.alpha) }
    }

    /// μ̄(y) = μ((y, ∞)), right-continuous, for y ≥ 0.
    pub fn tail(&self, y: f64) -> f64 {
        self.components
            .iter()
            .map(|comp| match comp {
                Component::Exponential { weight, rate } => weight / rate * (-rate * y).exp(),
                Component::Atom { weight, location } => {
                    if y < *location {
                        *weight
                    } else {
                        0.0
                    }
                }
                Component::Tabulated { grid, tail } => tabulated_tail(grid, tail, y),
            })
            .sum()
    }

    /// Total mass μ̄(0⁺).
    pub fn total_mass(&self) -> f64 {
        self.tail(0.0)
    }

    /// Density at 0⁺ of the absolutely continuous part.
    pub fn density_at_zero(&self) -> f64 {
        self.components
            .iter()
            .map(|comp| match comp {
                Component::Exponential { weight, .. } => *weight,
                Component::Atom { .. } => 0.0,
                Component::Tabulated { grid, tail } => {
                    if grid[0] == 0.0 {
                        (tail[0] - tail[1]) / (grid[1] - grid[0])
                    } else {
                        0.0
                    }
                }
            })
            .sum()
    }

    /// Exact divergence abscissa of `∫e^{−uy}μ(dy)` from the exponential
    /// components (−∞ if none).
    pub fn exact_abscissa(&self) -> f64 {
        self.components
            .iter()
            .filter_map(|comp| match comp {
                Component::Exponential { rate, .. } => Some(-rate),
                _ => None,
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Abscissa including an extrapolated estimate for tabulated tails.
    /// The second value is `true` when the estimate is not exact.
    pub fn abscissa(&self) -> (f64, bool) {
        let mut a = self.exact_abscissa();
        let mut approx = false;
        for comp in &self.components {
            if let Component::Tabulated { grid, tail } = comp {
                let m = grid.len() - 1;
                let (t0, t1) = (tail[m - 1], tail[m]);
                if t1 > 0.0 && t0 > t1 {
                    let lam = (t0 / t1).ln() / (grid[m] - grid[m - 1]);
                    a = a.max(-lam);
                    approx = true;
                }
            }
        }
        (a, approx)
    }

    /// `∫(1 − e^{−zy}) μ(dy)`.
    pub fn laplace_part(&self, z: C) -> C {
        let mut s = c(0.0);
        for comp in &self.components {
            match comp {
                Component::Exponential { weight, rate } => s += z * (*weight / *rate) / (z + *rate),
                Component::Atom { weight, location } => s += (1.0 - (-z * *location).exp()) * *weight,
                Component::Tabulated { grid, tail } => {
                    for i in 0..grid.len() - 1 {
                        let h = grid[i + 1] - grid[i];
                        let d = (tail[i] - tail[i + 1]) / h;
                        if d > 0.0 {
                            let inner = (-z * grid[i]).exp() * one_minus_exp_over(z * h) * h;
                            s += (c(h) - inner) * d;
                        }
                    }
                    let m = grid.len() - 1;
                    if tail[m] > 0.0 {
                        s += (1.0 - (-z * grid[m]).exp()) * tail[m];
                    }
                }
            }
        }
        s
    }

    /// `∫ y^n e^{−zy} μ(dy)` for `n ≥ 0`.
    pub fn laplace_moment(&self, n: usize, z: C) -> C {
        let mut s = c(0.0);
        for comp in &self.components {
            match comp {
                Component::Exponential { weight, rate } => {
                    s += *weight * factorial(n) / (z + *rate).powi(n as i32 + 1);
                }
                Component::Atom { weight, location } => {
                    s += (-z * *location).exp() * (*weight * location.powi(n as i32));
                }
                Component::Tabulated { grid, tail } => {
                    for i in 0..grid.len() - 1 {
                        let h = grid[i + 1] - grid[i];
                        let d = (tail[i] - tail[i + 1]) / h;
                        if d > 0.0 {
                            s += poly_exp_integral(n, z, grid[i], h) * d;
                        }
                    }
                    let m = grid.len() - 1;
                    if tail[m] > 0.0 {
                        s += (-z * grid[m]).exp() * (tail[m] * grid[m].powi(n as i32));
                    }
                }
            }
        }
        s
    }

    /// `∫_{(0,1)} y μ(dy)`.
    pub fn truncated_first_moment(&self) -> f64 {
        let mut s = 0.0;
        for comp in &self.components {
            match comp {
                Component::Exponential { weight, rate } => {
                    s += weight * (1.0 - (1.0 + rate) * (-rate).exp()) / (rate * rate);
                }
                Component::Atom { weight, location } => {
                    if *location < 1.0 {
                        s += weight * location;
                    }
                }
                Component::Tabulated { grid, tail } => {
                    for i in 0..grid.len() - 1 {
                        let (a, b) = (grid[i], grid[i + 1].min(1.0));
                        if a >= 1.0 {
                            break;
                        }
                        let d = (tail[i] - tail[i + 1]) / (grid[i + 1] - grid[i]);
                        s += d * (b * b - a * a) / 2.0;
                    }
                    let m = grid.len() - 1;
                    if grid[m] < 1.0 {
                        s += tail[m] * grid[m];
                    }
                }
            }
        }
        s
    }

    /// Breakpoints where μ̄ is not smooth.
    pub(crate) fn breakpoints(&self) -> Vec<f64> {
        let mut v = Vec::new();
        for comp in &self.components {
            match comp {
                Component::Atom { location, .. } => v.push(*location),
                Component::Tabulated { grid, .. } => v.extend(grid.iter().copied()),
                _ => {}
            }
        }
        v.retain(|x| *x > 0.0);
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// Slowest exponential decay rate of μ̄ (∞ for compact support).
    pub(crate) fn min_rate(&self) -> f64 {
        -self.exact_abscissa()
    }
}

fn tabulated_tail(grid: &[f64], tail: &[f64], y: f64) -> f64 {
    let m = grid.len() - 1;
    if y < grid[0] {
        return tail[0];
    }
    if y >= grid[m] {
        return 0.0;
    }
    let i = grid.partition_point(|g| *g <= y) - 1;
    let t = (y - grid[i]) / (grid[i + 1] - grid[i]);
    tail[i] + t * (tail[i + 1] - tail[i])
}

/// Analyticity data of a Bernstein function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub a_phi: f64,
    pub theta_phi: f64,
    pub d_phi: f64,
    /// `true` if `a_phi` was extrapolated from a tabulated tail.
    pub a_phi_approximate: bool,
}

/// Which integral representation of φ to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiForm {
    Measure,
    Tail,
}

/// `φ(z) = κ + δz + ∫(1 − e^{−zy})μ(dy)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BernsteinFunction {
    pub kappa: f64,
    pub delta: f64,
    #[serde(default)]
    pub measure: Measure,
    #[serde(skip)]
    thresholds: OnceLock<Thresholds>,
}

impl PartialEq for BernsteinFunction {
    fn eq(&self, o: &Self) -> bool {
        self.kappa == o.kappa && self.delta == o.delta && self.measure == o.measure
    }
}

impl BernsteinFunction {
    pub fn new(kappa: f64, delta: f64, measure: Measure) -> Result<Self> {
        let f = BernsteinFunction { kappa, delta, measure, thresholds: OnceLock::new() };
        f.validate()?;
        Ok(f)
    }

    /// `φ(z) = z`.
    pub fn identity() -> Self {
        Self::affine(0.0, 1.0)
    }

    /// `φ(z) = κ + δz`.
    pub fn affine(kappa: f64, delta: f64) -> Self {
        BernsteinFunction { kappa, delta, measure: Measure::zero(), thresholds: OnceLock::new() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) || !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::NotBernstein("κ and δ must be finite and non-negative".into()));
        }
        self.measure.validate().map_err(|e| Error::NotBernstein(e.to_string()))?;
        if self.kappa == 0.0 && self.delta == 0.0 && self.measure.is_zero() {
            return Err(Error::NotBernstein("φ ≡ 0 is excluded".into()));
        }
        Ok(())
    }

    pub fn is_constant(&self) -> bool {
        self.delta == 0.0 && self.measure.is_zero()
    }

    /// `φ(z) = δz` with δ > 0.
    pub fn is_pure_drift(&self) -> bool {
        self.kappa == 0.0 && self.measure.is_zero() && self.delta > 0.0
    }

    pub fn is_affine(&self) -> bool {
        self.measure.is_zero()
    }

    /// `cφ`.
    pub fn scaled(&self, k: f64) -> Self {
        BernsteinFunction {
            kappa: self.kappa * k,
            delta: self.delta * k,
            measure: self.measure.scaled(k),
            thresholds: OnceLock::new(),
        }
    }

    /// `φ + q`.
    pub fn killed(&self, q: f64) -> Self {
        BernsteinFunction {
            kappa: self.kappa + q,
            delta: self.delta,
            measure: self.measure.clone(),
            thresholds: OnceLock::new(),
        }
    }

    /// `lim_{u→∞} φ(u)` (∞ when δ > 0).
    pub fn at_infinity(&self) -> f64 {
        if self.delta > 0.0 {
            f64::INFINITY
        } else {
            self.kappa + self.measure.total_mass()
        }
    }

    fn check_strip(&self, z: C) -> Result<()> {
        let a = self.measure.exact_abscissa();
        if z.re > a {
            Ok(())
        } else {
            Err(Error::OutOfStrip { z, lo: a, hi: f64::INFINITY })
        }
    }

    /// φ(z) in the chosen representation.
    pub fn eval_form(&self, z: C, form: PhiForm) -> Result<C> {
        match form {
            PhiForm::Measure => {
                self.check_strip(z)?;
                Ok(self.value(z))
            }
            PhiForm::Tail => self.eval_tail_form(z),
        }
    }

    /// φ(z), measure form.
    pub fn eval(&self, z: C) -> Result<C> {
        self.eval_form(z, PhiForm::Measure)
    }

    /// φ(z) without the strip check.
    #[inline]
    pub fn value(&self, z: C) -> C {
        c(self.kappa) + z * self.delta + self.measure.laplace_part(z)
    }

    /// φ on the real line.
    #[inline]
    pub fn value_real(&self, u: f64) -> f64 {
        self.value(c(u)).re
    }

    /// `κ + δz + z∫e^{−zy}μ̄(y)dy`, by quadrature; needs Re z > 0.
    pub fn eval_tail_form(&self, z: C) -> Result<C> {
        if z.re <= 0.0 {
            return Err(Error::OutOfStrip { z, lo: 0.0, hi: f64::INFINITY });
        }
        let base = c(self.kappa) + z * self.delta;
        if self.measure.is_zero() {
            return Ok(base);
        }
        let decay = z.re + self.measure.min_rate().min(1e300);
        let opts = QuadOpts::with_tol(1e-14, 1e-13);
        let mut pts = vec![0.0];
        pts.extend(self.measure.breakpoints());
        let bp_end = *pts.last().unwrap();
        // integrate piecewise over breakpoints, then in chunks until the
        // integrand is negligible
        let f = |y: f64| (-z * y).exp() * self.measure.tail(y);
        let mut total = c(0.0);
        for w in pts.windows(2) {
            total += quadrature::integrate(f, w[0], w[1], &opts)?.value;
        }
        if self.measure.min_rate().is_finite() {
            let period = 2.0 * std::f64::consts::PI / z.im.abs().max(1e-3);
            let chunk = period.max(0.5 / decay).min(4.0 / decay).max(1e-3);
            let mut y = bp_end;
            let scale = self.measure.total_mass();
            loop {
                let r = quadrature::integrate(f, y, y + chunk, &opts)?;
                total += r.value;
                y += chunk;
                if (-decay * y).exp() * scale / decay < 1e-17 * (1.0 + total.norm()) {
                    break;
                }
            }
        }
        Ok(base + z * total)
    }

    /// n-th derivative, n ≥ 1, without strip check.
    pub fn deriv_value(&self, z: C, n: usize) -> C {
        assert!(n >= 1);
        let m = self.measure.laplace_moment(n, z);
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let d = if n == 1 { self.delta } else { 0.0 };
        c(d) + m * sign
    }

    /// φ′ (order 1) or φ″ (order 2), and higher orders.
    pub fn derivative(&self, z: C, order: usize) -> Result<C> {
        if order == 0 {
            return self.eval(z);
        }
        self.check_strip(z)?;
        Ok(self.deriv_value(z, order))
    }

    /// `[φ, φ′, …, φ^{(n)}]`.
    pub fn derivatives(&self, z: C, n: usize) -> Vec<C> {
        let mut v = Vec::with_capacity(n + 1);
        v.push(self.value(z));
        for k in 1..=n {
            v.push(self.deriv_value(z, k));
        }
        v
    }

    /// `[ln φ, (ln φ)′, …, (ln φ)^{(n)}]` with principal log.
    pub fn log_derivatives(&self, z: C, n: usize) -> Vec<C> {
        log_derivs_from(&self.derivatives(z, n))
    }

    pub fn thresholds(&self) -> Thresholds {
        *self.thresholds.get_or_init(|| self.compute_thresholds().unwrap_or_else(|_| {
            let (a, approx) = self.measure.abscissa();
            Thresholds { a_phi: a, theta_phi: f64::NAN, d_phi: f64::NAN, a_phi_approximate: approx }
        }))
    }

    /// Thresholds with root-bracketing errors surfaced.
    pub fn try_thresholds(&self) -> Result<Thresholds> {
        let t = self.thresholds();
        if t.theta_phi.is_nan() {
            return self.compute_thresholds();
        }
        Ok(t)
    }

    fn compute_thresholds(&self) -> Result<Thresholds> {
        let (a, approx) = self.measure.abscissa();
        let theta = self.largest_root(a)?;
        Ok(Thresholds { a_phi: a, theta_phi: theta, d_phi: a.max(theta), a_phi_approximate: approx })
    }

    fn largest_root(&self, a: f64) -> Result<f64> {
        if self.kappa == 0.0 {
            return Ok(0.0);
        }
        if self.is_constant() {
            return Ok(f64::NEG_INFINITY);
        }
        let f = |u: f64| self.value_real(u);
        // bracket [lo, 0] with φ(lo) < 0 < φ(0)
        let mut lo;
        if a.is_finite() {
            let mut eps = 1e-3 * (1.0 + a.abs());
            loop {
                lo = a + eps;
                if f(lo) < 0.0 {
                    break;
                }
                eps *= 0.5;
                if eps < 1e-15 * (1.0 + a.abs()) {
                    // φ(a⁺) ≥ 0: no root in (a, 0]
                    return Ok(f64::NEG_INFINITY);
                }
            }
        } else {
            let mut b = 1.0;
            loop {
                lo = -b;
                let v = f(lo);
                if v < 0.0 {
                    break;
                }
                if !v.is_finite() || b > 1e12 {
                    return Err(Error::RootBracketFailure(format!("φ stays non-negative down to {lo}")));
                }
                b *= 2.0;
            }
        }
        let mut hi = 0.0;
        while hi - lo > 1e-13 * (1.0 + lo.abs()) {
            let m = 0.5 * (lo + hi);
            if f(m) < 0.0 {
                lo = m;
            } else {
                hi = m;
            }
        }
        // one Newton polish step
        let mut r = 0.5 * (lo + hi);
        let d = self.deriv_value(c(r), 1).re;
        if d > 0.0 {
            let step = f(r) / d;
            if step.abs() < 1e-10 {
                r -= step;
            }
        }
        Ok(r)
    }
}

/// Faà di Bruno for the logarithm: `(ln f)^{(n)}` from `f, f′, …`.
pub fn log_derivs_from(d: &[C]) -> Vec<C> {
    let n = d.len() - 1;
    let mut l = vec![c(0.0); n + 1];
    l[0] = d[0].ln();
    // f·L′ = f′  ⇒  L^{(k)} = (f^{(k)} − Σ_{j=1}^{k−1} C(k−1,j) f^{(j)} L^{(k−j)})/f
    for k in 1..=n {
        let mut s = d[k];
        let mut binom = 1.0;
        for j in 1..k {
            binom = binom * (k - j) as f64 / j as f64;
            s -= d[j] * l[k - j] * binom;
        }
        l[k] = s / d[0];
    }
    l
}

/// How the small-jump compensator is applied in the Lévy–Khintchine formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Compensation {
    /// `∫(e^{zr} − 1)Π(dr)`: γ is the drift of the finite-variation process.
    #[default]
    None,
    /// `∫(e^{zr} − 1 − zr·1{|r|<1})Π(dr)`.
    Unit,
}

/// `Ψ(z) = σ²z²/2 + γz + ∫(e^{zr} − 1 − ·)Π(dr) − q`.
///
/// Π is stored as two measures on `(0, ∞)`: `pi_plus` for upward jumps and
/// `pi_minus` for the mirror image of the downward jumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyExponent {
    pub sigma2: f64,
    pub gamma: f64,
    pub kill_rate: f64,
    pub pi_plus: Measure,
    pub pi_minus: Measure,
    #[serde(default)]
    pub compensation: Compensation,
}

impl LevyExponent {
    pub fn new(sigma2: f64, gamma: f64, kill_rate: f64, pi_plus: Measure, pi_minus: Measure) -> Result<Self> {
        let e = LevyExponent { sigma2, gamma, kill_rate, pi_plus, pi_minus, compensation: Compensation::None };
        e.validate()?;
        Ok(e)
    }

    /// `σ²z²/2 + γz − q`.
    pub fn brownian(sigma2: f64, gamma: f64, kill_rate: f64) -> Self {
        LevyExponent {
            sigma2,
            gamma,
            kill_rate,
            pi_plus: Measure::zero(),
            pi_minus: Measure::zero(),
            compensation: Compensation::None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma2 >= 0.0 && self.sigma2.is_finite()) {
            return Err(Error::InvalidInput("sigma2 must be finite and non-negative".into()));
        }
        if !self.gamma.is_finite() {
            return Err(Error::InvalidInput("gamma must be finite".into()));
        }
        if !(self.kill_rate >= 0.0 && self.kill_rate.is_finite()) {
            return Err(Error::InvalidInput("kill_rate must be finite and non-negative".into()));
        }
        self.pi_plus.validate()?;
        self.pi_minus.validate()?;
        if self.sigma2 == 0.0 && self.gamma == 0.0 && self.pi_plus.is_zero() && self.pi_minus.is_zero() && self.kill_rate == 0.0 {
            return Err(Error::InvalidInput("Ψ ≡ 0 is degenerate".into()));
        }
        Ok(())
    }

    /// `Ψ − q` (adds to the killing rate).
    pub fn kill(&self, q: f64) -> Self {
        let mut e = self.clone();
        e.kill_rate += q;
        e
    }

    pub fn has_jumps(&self) -> bool {
        !(self.pi_plus.is_zero() && self.pi_minus.is_zero())
    }

    /// Open interval of real parts where the integrals converge.
    pub fn strip(&self) -> (f64, f64) {
        (self.pi_minus.exact_abscissa(), -self.pi_plus.exact_abscissa())
    }

    fn check_strip(&self, z: C) -> Result<()> {
        let (lo, hi) = self.strip();
        if z.re > lo && z.re < hi {
            Ok(())
        } else {
            Err(Error::OutOfStrip { z, lo, hi })
        }
    }

    fn comp_shift(&self) -> f64 {
        match self.compensation {
            Compensation::None => 0.0,
            Compensation::Unit => self.pi_plus.truncated_first_moment() - self.pi_minus.truncated_first_moment(),
        }
    }

    /// Linear coefficient once the compensator is folded in:
    /// `Ψ(z) = σ²z²/2 + γ_eff·z + ∫(e^{zr} − 1)Π(dr) − q`.
    pub fn effective_drift(&self) -> f64 {
        self.gamma - self.comp_shift()
    }

    /// Ψ(z), checking the strip.
    pub fn eval(&self, z: C) -> Result<C> {
        self.check_strip(z)?;
        Ok(self.value(z))
    }

    /// Ψ(z) without the strip check.
    pub fn value(&self, z: C) -> C {
        z * z * (0.5 * self.sigma2) + z * self.effective_drift()
            - self.pi_plus.laplace_part(-z)
            - self.pi_minus.laplace_part(z)
            - self.kill_rate
    }

    /// n-th derivative, n ≥ 1.
    pub fn deriv_value(&self, z: C, n: usize) -> C {
        assert!(n >= 1);
        let mut s = self.pi_plus.laplace_moment(n, -z);
        let neg = self.pi_minus.laplace_moment(n, z);
        s += if n.is_multiple_of(2) { neg } else { -neg };
        match n {
            1 => s + z * self.sigma2 + self.effective_drift(),
            2 => s + self.sigma2,
            _ => s,
        }
    }

    pub fn derivative(&self, z: C, n: usize) -> Result<C> {
        if n == 0 {
            return self.eval(z);
        }
        self.check_strip(z)?;
        Ok(self.deriv_value(z, n))
    }

    /// `E[ξ₁]` for the unkilled process (may be ±∞ only for infinite tails,
    /// which the supported measures never have).
    pub fn mean(&self) -> f64 {
        self.deriv_value(c(0.0), 1).re
    }

    /// Spot check of `Re Ψ(ib) ≤ 0` on a grid; returns the largest violation.
    pub fn negative_definiteness_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..=200 {
            let b = -100.0 + k as f64;
            let v = self.value(C::new(0.0, b)).re;
            worst = worst.max(v);
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C, b: C, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn psi_examples() {
        let e = LevyExponent::brownian(2.0, 0.0, 0.0);
        assert!(close(e.eval(c(1.0)).unwrap(), c(1.0), 1e-15));
        let e = LevyExponent::brownian(0.0, 1.0, 1.0);
        assert!(close(e.eval(c(0.0)).unwrap(), c(-1.0), 1e-15));
        let e = LevyExponent::new(0.0, 0.0, 0.0, Measure::exponential(1.0, 1.0), Measure::zero()).unwrap();
        assert!(close(e.eval(c(-0.5)).unwrap(), c(-1.0 / 3.0), 1e-14));
        assert!(e.eval(c(1.0)).is_err());
    }

    #[test]
    fn psi_compensated_matches_quadrature() {
        let mut e = LevyExponent::new(0.5, 0.3, 0.0, Measure::exponential(2.0, 3.0), Measure::atom(0.7, 0.4)).unwrap();
        e.compensation = Compensation::Unit;
        let z = C::new(0.4, 2.0);
        let opts = QuadOpts::default();
        let up = quadrature::integrate(
            |r| ((z * r).exp() - 1.0 - z * r * if r < 1.0 { 1.0 } else { 0.0 }) * (2.0 * (-3.0 * r).exp()),
            0.0,
            1.0,
            &opts,
        )
        .unwrap()
        .value
            + quadrature::integrate_to_inf(
                |r| ((z * r).exp() - 1.0) * (2.0 * (-3.0 * r).exp()),
                1.0,
                quadrature::Tail::Exponential(0.3),
                &opts,
            )
            .unwrap()
            .value;
        let down = ((-z * 0.4).exp() - 1.0 + z * 0.4) * 0.7;
        let want = z * z * 0.25 + z * 0.3 + up + down;
        assert!(close(e.eval(z).unwrap(), want, 1e-12));
    }

    #[test]
    fn phi_examples() {
        let id = BernsteinFunction::identity();
        let z = C::new(2.0, 3.0);
        assert!(close(id.eval(z).unwrap(), z, 1e-15));
        let q = BernsteinFunction::affine(0.7, 1.0);
        assert!(close(q.eval(c(0.0)).unwrap(), c(0.7), 1e-15));
        let e = BernsteinFunction::new(0.0, 0.0, Measure::exponential(1.0, 1.0)).unwrap();
        assert!(close(e.eval(c(1.0)).unwrap(), c(0.5), 1e-15));
        assert!(close(e.derivative(c(1e-12), 1).unwrap(), c(1.0), 1e-10));
        assert!(close(id.derivative(c(5.0), 1).unwrap(), c(1.0), 0.0));
        assert!(close(id.derivative(c(5.0), 2).unwrap(), c(0.0), 0.0));
    }

    #[test]
    fn thresholds_examples() {
        let t = BernsteinFunction::affine(0.3, 1.0).thresholds();
        assert_eq!(t.a_phi, f64::NEG_INFINITY);
        assert!((t.theta_phi + 0.3).abs() < 1e-12);
        assert!((t.d_phi + 0.3).abs() < 1e-12);
        let t = BernsteinFunction::identity().thresholds();
        assert_eq!((t.theta_phi, t.d_phi), (0.0, 0.0));
        let t = BernsteinFunction::new(0.0, 0.0, Measure::exponential(1.0, 2.0)).unwrap().thresholds();
        assert_eq!(t.a_phi, -2.0);
        let t = BernsteinFunction::affine(2.0, 0.0).thresholds();
        assert_eq!(t.d_phi, f64::NEG_INFINITY);
        // κ + w z/(λ(λ+z)) with a root inside (−λ, 0)
        let f = BernsteinFunction::new(0.5, 0.0, Measure::exponential(1.0, 1.0)).unwrap();
        let t = f.thresholds();
        assert!(f.value_real(t.theta_phi).abs() < 1e-12);
        assert!(t.theta_phi > -1.0 && t.theta_phi < 0.0);
    }

    fn tab() -> Measure {
        Measure::new(vec![Component::Tabulated { grid: vec![0.0, 0.5, 1.2, 2.0], tail: vec![2.0, 1.1, 0.4, 0.1] }])
            .unwrap()
    }

    #[test]
    fn tabulated_against_quadrature() {
        let m = tab();
        // density (t_i − t_{i+1})/h on each cell, atom 0.1 at 2
        let dens = |y: f64| -> f64 {
            if y < 0.5 {
                0.9 / 0.5
            } else if y < 1.2 {
                0.7 / 0.7
            } else {
                0.3 / 0.8
            }
        };
        for &z in &[C::new(0.3, 0.0), C::new(2.0, 15.0), C::new(-1.0, 40.0), C::new(0.01, 0.2)] {
            for n in 0..7 {
                let opts = QuadOpts::with_tol(1e-14, 1e-13);
                let mut want = c(0.0);
                for (a, b) in [(0.0, 0.5), (0.5, 1.2), (1.2, 2.0)] {
                    want += quadrature::integrate(|y| (-z * y).exp() * y.powi(n) * dens(y), a, b, &opts)
                        .unwrap()
                        .value;
                }
                want += (-z * 2.0).exp() * 0.1 * 2f64.powi(n);
                assert!(close(m.laplace_moment(n as usize, z), want, 1e-11), "n={n} z={z}");
            }
            let want = quadrature::integrate(|y| (1.0 - (-z * y).exp()) * dens(y), 0.0, 2.0, &QuadOpts::default())
                .unwrap()
                .value
                + (1.0 - (-z * 2.0).exp()) * 0.1;
            assert!(close(m.laplace_part(z), want, 1e-11));
        }
        assert!((m.tail(0.25) - 1.55).abs() < 1e-15);
        assert_eq!(m.tail(2.0), 0.0);
        assert!((m.tail(1.999_999) - 0.1).abs() < 1e-5);
    }

    #[test]
    fn two_forms_agree() {
        let fs = [
            BernsteinFunction::new(0.2, 0.5, Measure::exponential(1.0, 1.5)).unwrap(),
            BernsteinFunction::new(0.0, 0.0, Measure::new(vec![
                Component::Exponential { weight: 1.0, rate: 0.5 },
                Component::Exponential { weight: 2.0, rate: 4.0 },
            ]).unwrap()).unwrap(),
            BernsteinFunction::new(0.1, 0.0, Measure::atom(1.0, 0.7)).unwrap(),
            BernsteinFunction::new(0.0, 1.0, tab()).unwrap(),
        ];
        for f in &fs {
            for &z in &[C::new(0.05, 0.0), C::new(1.0, 1.0), C::new(10.0, -100.0), C::new(0.3, 60.0)] {
                let a = f.eval_form(z, PhiForm::Measure).unwrap();
                let b = f.eval_form(z, PhiForm::Tail).unwrap();
                assert!((a - b).norm() <= 1e-10 * a.norm(), "{f:?} {z}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn log_derivs_match_closed_form() {
        // φ(z) = z: (ln z)^{(k)} = (−1)^{k−1}(k−1)!/z^k
        let z = C::new(1.3, 0.7);
        let l = BernsteinFunction::identity().log_derivatives(z, 6);
        for k in 1..=6usize {
            let want = c((-1f64).powi(k as i32 - 1) * factorial(k - 1)) / z.powi(k as i32);
            assert!(close(l[k], want, 1e-13));
        }
    }
}
