//! Wiener–Hopf factor pairs `Ψ(z) = −φ₊(−z)φ₋(z)` for the supported exponent
//! classes, and the reconstruction of the descending ladder tail from the
//! ascending potential density.
//!
//! Normalisation: the ascending factor is scaled so that its rational form
//! `∏(w+s_k)/∏(w+λ_i)` has leading coefficient one; in particular φ₊(z) = z
//! for Brownian motion with positive drift and φ₊(z) = q + z for a killed unit
//! drift. All laws computed downstream are invariant under `(cφ₊, φ₋/c)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy_model::{BernsteinFunction, Component, LevyExponent, Measure};
use crate::quadrature::{self, QuadOpts};

type C = Complex64;

fn c(x: f64) -> C {
    C::new(x, 0.0)
}

/// How a factor pair was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassTag {
    SpectrallyNegative,
    SpectrallyPositive,
    BrownianDrift,
    Rational,
    Explicit,
}

/// `(φ₊, φ₋)` with `Ψ(z) = −φ₊(−z)φ₋(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorPair {
    pub phi_plus: BernsteinFunction,
    pub phi_minus: BernsteinFunction,
    /// Accumulated rescaling constant relative to the canonical pair.
    pub normalization: f64,
    pub class_tag: ClassTag,
}

/// Grid used for the factor identity check.
pub fn identity_grid() -> Vec<C> {
    (0..64).map(|k| C::new(0.0, -50.0 + 100.0 * k as f64 / 63.0)).collect()
}

/// Tolerance of the factor identity check.
pub const IDENTITY_TOL: f64 = 1e-9;

impl FactorPair {
    /// `max |Ψ(z) + φ₊(−z)φ₋(z)|/(1+|Ψ(z)|)` over the imaginary-axis grid.
    pub fn identity_residual(&self, exp: &LevyExponent) -> f64 {
        identity_grid()
            .into_iter()
            .map(|z| {
                let psi = exp.value(z);
                (psi + self.phi_plus.value(-z) * self.phi_minus.value(z)).norm() / (1.0 + psi.norm())
            })
            .fold(0.0, f64::max)
    }

    /// `(cφ₊, φ₋/c)`.
    pub fn rescaled(&self, k: f64) -> FactorPair {
        FactorPair {
            phi_plus: self.phi_plus.scaled(k),
            phi_minus: self.phi_minus.scaled(1.0 / k),
            normalization: self.normalization * k,
            class_tag: self.class_tag,
        }
    }

    /// Validate a user-supplied pair against `exp`.
    pub fn explicit(exp: &LevyExponent, phi_plus: BernsteinFunction, phi_minus: BernsteinFunction) -> Result<Self> {
        let p = FactorPair { phi_plus, phi_minus, normalization: 1.0, class_tag: ClassTag::Explicit };
        p.validate(exp)?;
        Ok(p)
    }

    /// Bernstein probes on both factors plus the identity check.
    pub fn validate(&self, exp: &LevyExponent) -> Result<()> {
        check_bernstein(&self.phi_plus)?;
        check_bernstein(&self.phi_minus)?;
        let r = self.identity_residual(exp);
        if !(r <= IDENTITY_TOL) {
            return Err(Error::FactorValidationFailure { residual: r, tolerance: IDENTITY_TOL });
        }
        Ok(())
    }

    /// `φ₋(0) > 0`, i.e. the exponential functional is finite.
    pub fn functional_finite(&self) -> bool {
        self.phi_minus.kappa > 0.0
    }
}

/// Numerical probes of positivity, monotonicity and concavity on `(0, ∞)`.
pub fn check_bernstein(phi: &BernsteinFunction) -> Result<()> {
    phi.validate()?;
    for k in 0..=60 {
        let u = 10f64.powf(-3.0 + 6.0 * k as f64 / 60.0);
        let d = phi.derivatives(c(u), 2);
        let (f, f1, f2) = (d[0].re, d[1].re, d[2].re);
        let scale = 1e-12 * (1.0 + f.abs());
        if f < -scale || f1 < -scale || f2 > scale * (1.0 + 1.0 / (u * u)) || u * f1 > f + scale {
            return Err(Error::NotBernstein(format!(
                "probe at u = {u:.3e}: φ = {f:.3e}, φ′ = {f1:.3e}, φ″ = {f2:.3e}"
            )));
        }
    }
    Ok(())
}

// --- polynomials, ascending coefficients -------------------------------

fn pmul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            r[i + j] += x * y;
        }
    }
    r
}

fn padd(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n).map(|i| a.get(i).copied().unwrap_or(0.0) + b.get(i).copied().unwrap_or(0.0)).collect()
}

fn peval(p: &[f64], z: C) -> C {
    p.iter().rev().fold(c(0.0), |acc, &k| acc * z + k)
}

fn pderiv(p: &[f64]) -> Vec<f64> {
    p.iter().enumerate().skip(1).map(|(i, k)| k * i as f64).collect()
}

fn ptrim(mut p: Vec<f64>) -> Vec<f64> {
    let scale = p.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    while p.len() > 1 && p.last().unwrap().abs() <= 1e-14 * scale {
        p.pop();
    }
    p
}

/// Complex roots via companion-matrix eigenvalues, Newton-polished.
fn proots(p: &[f64]) -> Vec<C> {
    let n = p.len() - 1;
    if n == 0 {
        return vec![];
    }
    let lead = p[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -p[i] / lead;
    }
    let dp = pderiv(p);
    m.complex_eigenvalues()
        .iter()
        .map(|r0| {
            let mut r = *r0;
            for _ in 0..8 {
                let d = peval(&dp, r);
                if d.norm() == 0.0 {
                    break;
                }
                let step = peval(p, r) / d;
                r -= step;
                if step.norm() < 1e-16 * (1.0 + r.norm()) {
                    break;
                }
            }
            r
        })
        .collect()
}

/// Merge exponential components with equal rates; `None` if any other kind
/// is present.
fn exp_rates(m: &Measure) -> Option<Vec<(f64, f64)>> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for comp in &m.components {
        match comp {
            Component::Exponential { weight, rate } => {
                if let Some(e) = out.iter_mut().find(|(_, r)| (r - rate).abs() <= 1e-14 * rate) {
                    e.0 += weight;
                } else {
                    out.push((*weight, *rate));
                }
            }
            _ => return None,
        }
    }
    Some(out)
}

/// `C·∏(w+s_k)/∏(w+λ_i)` as a Bernstein triplet.
fn rational_to_bernstein(cst: f64, s: &[C], lambdas: &[f64]) -> Result<BernsteinFunction> {
    let (m, n) = (s.len(), lambdas.len());
    if !(m == n || m == n + 1) || !(cst > 0.0) {
        return Err(Error::NotBernstein(format!(
            "rational factor with {m} zeros, {n} poles and constant {cst} is not Bernstein"
        )));
    }
    let delta = if m == n + 1 { cst } else { 0.0 };
    let mut kappa = c(cst);
    for sk in s {
        kappa *= sk;
    }
    for l in lambdas {
        kappa /= *l;
    }
    let mut comps = Vec::new();
    for (i, &li) in lambdas.iter().enumerate() {
        let mut res = c(cst);
        for sk in s {
            res *= sk - li;
        }
        for (j, &lj) in lambdas.iter().enumerate() {
            if j != i {
                res /= lj - li;
            }
        }
        let w = -res.re;
        if w.abs() <= 1e-13 * cst.max(1.0) * li.max(1.0) {
            continue;
        }
        if w < 0.0 || res.im.abs() > 1e-8 * res.norm().max(1.0) {
            return Err(Error::NotBernstein(format!("partial-fraction weight {res} at rate {li}")));
        }
        comps.push(Component::Exponential { weight: w, rate: li });
    }
    let mut k = kappa.re;
    if k.abs() < 1e-14 * cst.max(1.0) {
        k = 0.0;
    }
    if k < 0.0 {
        return Err(Error::NotBernstein(format!("φ(0) = {k} < 0")));
    }
    BernsteinFunction::new(k, delta, Measure { components: comps, alpha: None })
}

/// `Ψ(z) − q` with the killing rate increased by `q`.
pub fn kill(exp: &LevyExponent, q: f64) -> Result<LevyExponent> {
    if !(q > 0.0) {
        return Err(Error::InvalidInput("killing rate must be positive".into()));
    }
    Ok(exp.kill(q))
}

/// Wiener–Hopf factors of a supported exponent.
pub fn factorize(exp: &LevyExponent) -> Result<FactorPair> {
    exp.validate()?;
    let pair = if !exp.has_jumps() {
        brownian_pair(exp)
    } else if let (Some(_), Some(_)) = (exp_rates(&exp.pi_plus), exp_rates(&exp.pi_minus)) {
        if exp.pi_plus.is_zero() && exp.kill_rate == 0.0 && exp.mean() >= 0.0 {
            spectrally_negative_pair(exp)?
        } else {
            rational_pair(exp)?
        }
    } else if exp.pi_plus.is_zero() {
        if exp.kill_rate > 0.0 || exp.mean() < 0.0 {
            return Err(Error::UnsupportedClass(
                "spectrally negative exponent with non-exponential jumps must be unkilled with E[ξ₁] ≥ 0 \
                 (nearest supported class: spectrally_negative); otherwise use exponential jumps (rational)"
                    .into(),
            ));
        }
        if exp.pi_minus.has_tabulated() {
            return Err(Error::UnsupportedClass(
                "tabulated downward jumps are not supported (nearest supported class: spectrally_negative \
                 with exponential or atomic jumps)"
                    .into(),
            ));
        }
        spectrally_negative_pair(exp)?
    } else {
        return Err(Error::UnsupportedClass(
            "upward jumps must be an exponential mixture (nearest supported class: rational)".into(),
        ));
    };
    pair.validate(exp)?;
    Ok(pair)
}

fn brownian_pair(exp: &LevyExponent) -> FactorPair {
    let (s2, g, q) = (exp.sigma2, exp.effective_drift(), exp.kill_rate);
    let (pp, pm) = if s2 > 0.0 {
        let disc = (g * g + 2.0 * s2 * q).sqrt();
        // roots r₊ ≥ 0 ≥ r₋ of σ²z²/2 + γz − q, computed without cancellation
        let (rp, rm) = if g >= 0.0 {
            let rm = (-g - disc) / s2;
            let rp = if rm != 0.0 { -2.0 * q / (s2 * rm) } else { 0.0 };
            (rp, rm)
        } else {
            let rp = (-g + disc) / s2;
            let rm = if rp != 0.0 { -2.0 * q / (s2 * rp) } else { 0.0 };
            (rp, rm)
        };
        (BernsteinFunction::affine(rp.max(0.0), 1.0), BernsteinFunction::affine(0.5 * s2 * (-rm).max(0.0), 0.5 * s2))
    } else if g > 0.0 {
        (BernsteinFunction::affine(q / g, 1.0), BernsteinFunction::affine(g, 0.0))
    } else if g < 0.0 {
        (BernsteinFunction::affine(1.0, 0.0), BernsteinFunction::affine(q, -g))
    } else {
        (BernsteinFunction::affine(1.0, 0.0), BernsteinFunction::affine(q, 0.0))
    };
    FactorPair { phi_plus: pp, phi_minus: pm, normalization: 1.0, class_tag: ClassTag::BrownianDrift }
}

/// Unkilled, no upward jumps, `E[ξ₁] ≥ 0`: φ₊(z) = z and
/// φ₋(z) = Ψ′(0) + σ²z/2 + ∫(1 − e^{−zy})Π̄₋(y)dy.
fn spectrally_negative_pair(exp: &LevyExponent) -> Result<FactorPair> {
    let mut comps = Vec::new();
    for comp in &exp.pi_minus.components {
        match comp {
            Component::Exponential { weight, rate } => {
                comps.push(Component::Exponential { weight: weight / rate, rate: *rate });
            }
            Component::Atom { weight, location } => comps.push(Component::Tabulated {
                grid: vec![0.0, *location],
                tail: vec![weight * location, 0.0],
            }),
            Component::Tabulated { .. } => {
                return Err(Error::UnsupportedClass("tabulated downward jumps".into()));
            }
        }
    }
    let mean = exp.mean().max(0.0);
    let pm = BernsteinFunction::new(mean, 0.5 * exp.sigma2, Measure { components: comps, alpha: None })?;
    Ok(FactorPair {
        phi_plus: BernsteinFunction::identity(),
        phi_minus: pm,
        normalization: 1.0,
        class_tag: ClassTag::SpectrallyNegative,
    })
}

fn rational_pair(exp: &LevyExponent) -> Result<FactorPair> {
    let up = exp_rates(&exp.pi_plus).unwrap();
    let down = exp_rates(&exp.pi_minus).unwrap();
    let lin_up: Vec<Vec<f64>> = up.iter().map(|(_, l)| vec![*l, -1.0]).collect();
    let lin_down: Vec<Vec<f64>> = down.iter().map(|(_, l)| vec![*l, 1.0]).collect();
    let all: Vec<&Vec<f64>> = lin_up.iter().chain(lin_down.iter()).collect();
    let prod_except = |skip: Option<usize>| -> Vec<f64> {
        let mut p = vec![1.0];
        for (i, f) in all.iter().enumerate() {
            if Some(i) != skip {
                p = pmul(&p, f);
            }
        }
        p
    };
    let d = prod_except(None);
    let base = vec![-exp.kill_rate, exp.effective_drift(), 0.5 * exp.sigma2];
    let mut p = pmul(&base, &d);
    for (i, (w, l)) in up.iter().enumerate() {
        p = padd(&p, &pmul(&[0.0, w / l], &prod_except(Some(i))));
    }
    for (j, (w, l)) in down.iter().enumerate() {
        let i = up.len() + j;
        p = padd(&p, &pmul(&[0.0, -w / l], &prod_except(Some(i))));
    }
    let mut p = ptrim(p);

    let mut plus_roots: Vec<C> = Vec::new();
    let mut minus_roots: Vec<C> = Vec::new();
    if exp.kill_rate == 0.0 {
        p[0] = 0.0;
        p.remove(0);
        let mean = exp.mean();
        let scale = 1e-12 * (1.0 + exp.effective_drift().abs() + exp.sigma2);
        if mean.abs() <= scale {
            p[0] = 0.0;
            p.remove(0);
            plus_roots.push(c(0.0));
            minus_roots.push(c(0.0));
        } else if mean > 0.0 {
            plus_roots.push(c(0.0));
        } else {
            minus_roots.push(c(0.0));
        }
    }
    let lead = *p.last().unwrap();
    for r in proots(&p) {
        if r.re.abs() <= 1e-12 * (1.0 + r.norm()) {
            return Err(Error::UnsupportedClass(format!(
                "root {r} on the imaginary axis (lattice-type exponent; nearest supported class: explicit)"
            )));
        }
        if r.re > 0.0 {
            plus_roots.push(r);
        } else {
            minus_roots.push(r);
        }
    }
    let s_plus: Vec<C> = plus_roots.clone();
    let s_minus: Vec<C> = minus_roots.iter().map(|r| -r).collect();
    let cm = -lead * if plus_roots.len().is_multiple_of(2) { 1.0 } else { -1.0 };
    let lam_up: Vec<f64> = up.iter().map(|(_, l)| *l).collect();
    let lam_down: Vec<f64> = down.iter().map(|(_, l)| *l).collect();
    let pp = rational_to_bernstein(1.0, &s_plus, &lam_up)?;
    let pm = rational_to_bernstein(cm, &s_minus, &lam_down)?;
    let tag = if exp.pi_plus.is_zero() {
        ClassTag::SpectrallyNegative
    } else if exp.pi_minus.is_zero() {
        ClassTag::SpectrallyPositive
    } else {
        ClassTag::Rational
    };
    Ok(FactorPair { phi_plus: pp, phi_minus: pm, normalization: 1.0, class_tag: tag })
}

/// Potential density `u` of a Bernstein function with positive drift on a
/// uniform grid, from the alternating convolution series
/// `u = Σ_j (−1)^j δ^{−j−1} (1 * g^{*j})`, `g = φ(0) + μ̄`.
#[derive(Debug, Clone)]
pub struct PotentialDensity {
    pub h: f64,
    pub u: Vec<f64>,
    /// `U(y) = ∫_0^y u`.
    pub cum: Vec<f64>,
    /// Estimated absolute error of `u` (rounding plus discretisation).
    pub error: f64,
    pub terms: usize,
}

/// Options for the potential-density series.
#[derive(Debug, Clone, Copy)]
pub struct SeriesOpts {
    pub h: f64,
    pub y_max: f64,
    pub tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesOpts {
    fn default() -> Self {
        SeriesOpts { h: 1e-3, y_max: 30.0, tol: 1e-9, max_terms: 2000 }
    }
}

/// Trapezoid convolution `(a*b)(kh)` for all k, via FFT.
fn trap_conv(a: &[f64], b: &[f64], h: f64, planner: &mut FftPlanner<f64>) -> Vec<f64> {
    let n = a.len();
    let m = (2 * n).next_power_of_two();
    let fft = planner.plan_fft_forward(m);
    let ifft = planner.plan_fft_inverse(m);
    let mut fa: Vec<C> = a.iter().map(|x| c(*x)).chain(std::iter::repeat(c(0.0))).take(m).collect();
    let mut fb: Vec<C> = b.iter().map(|x| c(*x)).chain(std::iter::repeat(c(0.0))).take(m).collect();
    fft.process(&mut fa);
    fft.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    ifft.process(&mut fa);
    (0..n)
        .map(|k| {
            let full = fa[k].re / m as f64;
            h * (full - 0.5 * (a[0] * b[k] + a[k] * b[0]))
        })
        .collect()
}

fn series_on_grid(phi: &BernsteinFunction, h: f64, n: usize, opts: &SeriesOpts) -> Result<(Vec<f64>, usize, f64)> {
    let delta = phi.delta;
    let g: Vec<f64> = (0..n).map(|k| phi.kappa + phi.measure.tail(k as f64 * h)).collect();
    let mut planner = FftPlanner::new();
    let mut term = vec![1.0; n];
    let mut u: Vec<f64> = term.iter().map(|t| t / delta).collect();
    let mut coef = 1.0 / delta;
    let mut biggest: f64 = 1.0 / delta;
    for j in 1..=opts.max_terms {
        term = trap_conv(&term, &g, h, &mut planner);
        coef /= -delta;
        let mut sup: f64 = 0.0;
        for (uk, tk) in u.iter_mut().zip(&term) {
            let v = coef * tk;
            *uk += v;
            sup = sup.max(v.abs());
        }
        biggest = biggest.max(sup);
        if sup < opts.tol * 1e-3 {
            let rounding = biggest * 1e-15 * (j as f64).sqrt();
            return Ok((u, j, rounding));
        }
    }
    Err(Error::SeriesDivergence(format!("terms still above tolerance after {} convolutions", opts.max_terms)))
}

/// Potential density on `[0, y]` with Richardson extrapolation in the step.
pub fn potential_density(phi: &BernsteinFunction, y: f64, opts: &SeriesOpts) -> Result<PotentialDensity> {
    if !(phi.delta > 0.0) {
        return Err(Error::NotInClass("the potential-density series needs a positive drift".into()));
    }
    let h = opts.h;
    let n = (y / h).ceil() as usize + 1;
    let (fine, terms, rounding) = series_on_grid(phi, h, n, opts)?;
    let n2 = (n - 1) / 2 + 1;
    let (coarse, _, _) = series_on_grid(phi, 2.0 * h, n2, opts)?;
    let mut u = fine.clone();
    let mut disc: f64 = 0.0;
    for k in 0..n2 {
        let d = (fine[2 * k] - coarse[k]) / 3.0;
        u[2 * k] += d;
        disc = disc.max(d.abs());
    }
    // odd nodes: carry the neighbouring correction
    for k in 0..(n - 1) / 2 {
        let i = 2 * k + 1;
        let d = 0.5 * ((u[i - 1] - fine[i - 1]) + (u[i + 1] - fine[i + 1]));
        u[i] += d;
    }
    if rounding > opts.tol.max(1e-6) {
        return Err(Error::SeriesDivergence(format!(
            "alternating series loses accuracy (rounding ≈ {rounding:.1e}) on [0, {y}]"
        )));
    }
    let mut cum = vec![0.0; n];
    for k in 1..n {
        cum[k] = cum[k - 1] + 0.5 * h * (u[k - 1] + u[k]);
    }
    Ok(PotentialDensity { h, u, cum, error: rounding + disc * 1e-2, terms })
}

impl PotentialDensity {
    fn horizon(&self) -> f64 {
        (self.u.len() - 1) as f64 * self.h
    }

    /// Linear interpolation of `u`, flat beyond the grid.
    pub fn density(&self, y: f64) -> f64 {
        let n = self.u.len();
        let t = y / self.h;
        let i = t.floor() as usize;
        if i + 1 >= n {
            return self.u[n - 1];
        }
        let f = t - i as f64;
        self.u[i] * (1.0 - f) + self.u[i + 1] * f
    }

    /// `U(y)`, linearly extrapolated past the grid.
    pub fn cumulative(&self, y: f64) -> f64 {
        let n = self.u.len();
        let yh = self.horizon();
        if y >= yh {
            return self.cum[n - 1] + self.u[n - 1] * (y - yh);
        }
        let t = y / self.h;
        let i = t.floor() as usize;
        let f = t - i as f64;
        // exact integral of the linear interpolant
        self.cum[i] + self.h * (self.u[i] * f + 0.5 * (self.u[i + 1] - self.u[i]) * f * f)
    }
}

/// Horizon past which `Π̄₋` is negligible at level `tol`.
fn jump_horizon(pi_minus: &Measure, tol: f64) -> f64 {
    let mut y: f64 = 1.0;
    for comp in &pi_minus.components {
        match comp {
            Component::Exponential { weight, rate } => {
                y = y.max(((weight / (rate * rate)).max(1.0) / tol).ln() / rate);
            }
            Component::Atom { location, .. } => y = y.max(*location),
            Component::Tabulated { grid, .. } => y = y.max(*grid.last().unwrap()),
        }
    }
    y
}

/// `μ̄₋(y) = ∫_0^∞ Π̄₋(y+v)U₊(dv) = ∫_{(y,∞)} U₊(r−y)Π₋(dr)`.
///
/// Needs `δ₊ > 0`; `U₊` comes from [`potential_density`].
pub fn friendly_inverse_tail(pair: &FactorPair, pi_minus: &Measure, y: f64) -> Result<f64> {
    friendly_inverse_tail_with(pair, pi_minus, y, &SeriesOpts::default())
}

pub fn friendly_inverse_tail_with(pair: &FactorPair, pi_minus: &Measure, y: f64, opts: &SeriesOpts) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::InvalidInput("y must be positive".into()));
    }
    if pi_minus.is_zero() {
        return Ok(0.0);
    }
    let phi = &pair.phi_plus;
    if !(phi.delta > 0.0) {
        return Err(Error::NotInClass("friendly inverse needs δ₊ > 0".into()));
    }
    let need = (jump_horizon(pi_minus, opts.tol) - y).max(0.0);
    if need == 0.0 && pi_minus.tail(y) == 0.0 {
        return Ok(0.0);
    }
    let pd = potential_density(phi, need.min(opts.y_max).max(opts.h * 4.0), opts)?;
    tail_from_potential(&pd, pi_minus, y)
}

/// `∫_{(y,∞)} U(r−y)Π(dr)` for a given potential.
pub fn tail_from_potential(pd: &PotentialDensity, pi: &Measure, y: f64) -> Result<f64> {
    let opts = QuadOpts::with_tol(1e-13, 1e-11);
    let yh = pd.horizon();
    let mut s = 0.0;
    for comp in &pi.components {
        match comp {
            Component::Exponential { weight, rate } => {
                // w e^{−λy} ∫_0^∞ U(t)e^{−λt}dt, grid part + linear extrapolation
                let mut acc = 0.0;
                let knots: Vec<f64> = (0..=((yh / 1.0).ceil() as usize)).map(|k| (k as f64).min(yh)).collect();
                for w in knots.windows(2) {
                    if w[1] > w[0] {
                        acc += quadrature::integrate_real(|t| pd.cumulative(t) * (-rate * t).exp(), w[0], w[1], &opts)?;
                    }
                }
                let n = pd.u.len();
                let (uy, cy) = (pd.u[n - 1], pd.cum[n - 1]);
                acc += (-rate * yh).exp() * (cy / rate + uy / (rate * rate));
                s += weight * (-rate * y).exp() * acc;
            }
            Component::Atom { weight, location } => {
                if *location > y {
                    s += weight * pd.cumulative(location - y);
                }
            }
            Component::Tabulated { grid, tail } => {
                for i in 0..grid.len() - 1 {
                    let (a, b) = (grid[i].max(y), grid[i + 1]);
                    if b <= a {
                        continue;
                    }
                    let d = (tail[i] - tail[i + 1]) / (grid[i + 1] - grid[i]);
                    s += d * quadrature::integrate_real(|r| pd.cumulative(r - y), a, b, &opts)?;
                }
                let m = grid.len() - 1;
                if tail[m] > 0.0 && grid[m] > y {
                    s += tail[m] * pd.cumulative(grid[m] - y);
                }
            }
        }
    }
    Ok(s)
}

/// `υ₋(0⁺) = ∫u₊(y)Π₋(dy)` when δ₊ > 0.
pub fn descending_density_at_zero(pair: &FactorPair, pi_minus: &Measure) -> Result<f64> {
    if pi_minus.is_zero() {
        return Ok(0.0);
    }
    let phi = &pair.phi_plus;
    if !(phi.delta > 0.0) {
        return Err(Error::NotInClass("needs δ₊ > 0".into()));
    }
    // exponential Π₋: ∫u e^{−λy} = 1/φ₊(λ) exactly
    if let Some(rates) = exp_rates(pi_minus) {
        return Ok(rates.iter().map(|(w, l)| w / phi.value_real(*l)).sum());
    }
    let opts = SeriesOpts::default();
    let pd = potential_density(phi, jump_horizon(pi_minus, opts.tol).min(opts.y_max), &opts)?;
    let mut s = 0.0;
    for comp in &pi_minus.components {
        match comp {
            Component::Exponential { weight, rate } => s += weight / phi.value_real(*rate),
            Component::Atom { weight, location } => s += weight * pd.density(*location),
            Component::Tabulated { grid, tail } => {
                let q = QuadOpts::with_tol(1e-12, 1e-10);
                for i in 0..grid.len() - 1 {
                    let d = (tail[i] - tail[i + 1]) / (grid[i + 1] - grid[i]);
                    s += d * quadrature::integrate_real(|y| pd.density(y), grid[i], grid[i + 1], &q)?;
                }
                let m = grid.len() - 1;
                s += tail[m] * pd.density(grid[m]);
            }
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brownian_examples() {
        let (g, s2) = (0.7, 1.3);
        let p = factorize(&LevyExponent::brownian(s2, g, 0.0)).unwrap();
        assert_eq!(p.phi_plus, BernsteinFunction::identity());
        assert!((p.phi_minus.kappa - g).abs() < 1e-15 && (p.phi_minus.delta - s2 / 2.0).abs() < 1e-15);
        let p = factorize(&LevyExponent::brownian(0.0, 1.0, 0.4)).unwrap();
        assert_eq!(p.phi_plus, BernsteinFunction::affine(0.4, 1.0));
        assert_eq!(p.phi_minus, BernsteinFunction::affine(1.0, 0.0));
        let p = factorize(&LevyExponent::brownian(2.0, 0.0, 0.0)).unwrap();
        assert_eq!(p.phi_plus, BernsteinFunction::identity());
        assert_eq!(p.phi_minus, BernsteinFunction::identity());
    }

    #[test]
    fn killing_limit() {
        let (g, s2) = (0.8, 2.0);
        for q in [1e-2, 1e-4, 1e-6] {
            let p = factorize(&kill(&LevyExponent::brownian(s2, g, 0.0), q).unwrap()).unwrap();
            assert!(p.phi_plus.kappa < 2.0 * q / g);
            assert!((p.phi_minus.kappa / p.phi_minus.delta - 2.0 * g / s2).abs() < 2.0 * q);
        }
    }

    #[test]
    fn rational_two_sided() {
        let e = LevyExponent::new(
            0.5,
            0.2,
            0.3,
            Measure::new(vec![
                Component::Exponential { weight: 1.0, rate: 2.0 },
                Component::Exponential { weight: 0.5, rate: 5.0 },
            ])
            .unwrap(),
            Measure::exponential(1.5, 1.0),
        )
        .unwrap();
        let p = factorize(&e).unwrap();
        assert_eq!(p.class_tag, ClassTag::Rational);
        assert!(p.identity_residual(&e) < 1e-12);
        let e0 = LevyExponent { kill_rate: 0.0, ..e.clone() };
        let p0 = factorize(&e0).unwrap();
        assert!(p0.identity_residual(&e0) < 1e-12);
        // drifts to −∞: the ascending factor is killed, the descending one is not
        assert!(e0.mean() < 0.0);
        assert!(p0.phi_plus.kappa > 0.0 && p0.phi_minus.kappa == 0.0);
    }

    #[test]
    fn compound_poisson_both_sides() {
        let e = LevyExponent::new(0.0, 0.5, 0.0, Measure::exponential(1.0, 3.0), Measure::exponential(2.0, 1.0)).unwrap();
        let p = factorize(&e).unwrap();
        assert!(p.identity_residual(&e) < 1e-12);
    }

    #[test]
    fn spectrally_negative_atom() {
        let e = LevyExponent::new(1.0, 2.0, 0.0, Measure::zero(), Measure::atom(0.5, 1.5)).unwrap();
        let p = factorize(&e).unwrap();
        assert_eq!(p.class_tag, ClassTag::SpectrallyNegative);
        assert!(p.identity_residual(&e) < 1e-12);
    }

    #[test]
    fn unsupported_upward_atom() {
        let e = LevyExponent::new(1.0, 2.0, 0.0, Measure::atom(0.5, 1.5), Measure::zero()).unwrap();
        assert!(matches!(factorize(&e), Err(Error::UnsupportedClass(m)) if m.contains("rational")));
    }

    #[test]
    fn friendly_inverse_examples() {
        let pair = factorize(&LevyExponent::brownian(2.0, 1.0, 0.0)).unwrap();
        let pi = Measure::exponential(1.0, 1.0);
        let v = friendly_inverse_tail(&pair, &pi, 1.0).unwrap();
        assert!((v - (-1f64).exp()).abs() < 1e-7, "{v}");
        assert_eq!(friendly_inverse_tail(&pair, &Measure::zero(), 1.0).unwrap(), 0.0);
        assert!(friendly_inverse_tail(&pair, &pi, 60.0).unwrap() < 1e-20);
    }

    /// Independent oracle: trapezoid solve of δu + g*u = 1.
    fn volterra(phi: &BernsteinFunction, h: f64, n: usize) -> Vec<f64> {
        let g: Vec<f64> = (0..n).map(|k| phi.kappa + phi.measure.tail(k as f64 * h)).collect();
        let mut u = vec![0.0; n];
        u[0] = 1.0 / phi.delta;
        for k in 1..n {
            let mut s = 0.5 * g[k] * u[0];
            for i in 1..k {
                s += g[k - i] * u[i];
            }
            u[k] = (1.0 - h * s) / (phi.delta + 0.5 * h * g[0]);
        }
        u
    }

    #[test]
    fn series_matches_exact_exponential_potential() {
        // φ(z)(z+λ) = (κ+δz)(z+λ) + wz/λ, so u is a two-term exponential sum
        let (k, d, w, l) = (0.2, 1.5, 1.0, 2.0);
        let phi = BernsteinFunction::new(k, d, Measure::exponential(w, l)).unwrap();
        let (b, c0) = ((k + d * l + w / l) / d, k * l / d);
        let disc = (b * b - 4.0 * c0).sqrt();
        let (r1, r2) = (0.5 * (b - disc), 0.5 * (b + disc));
        let exact = |y: f64| {
            ((l - r1) * (-r1 * y).exp() - (l - r2) * (-r2 * y).exp()) / (d * (r2 - r1))
        };
        let pd = potential_density(&phi, 8.0, &SeriesOpts::default()).unwrap();
        for y in [0.0, 0.5, 1.0, 3.7, 8.0] {
            assert!((pd.density(y) - exact(y)).abs() < 1e-9, "{y}: {} vs {}", pd.density(y), exact(y));
        }
    }

    #[test]
    fn series_matches_volterra_with_atom() {
        let phi = BernsteinFunction::new(0.2, 1.5, Measure::new(vec![
            Component::Exponential { weight: 1.0, rate: 2.0 },
            Component::Atom { weight: 0.3, location: 0.7 },
        ]).unwrap()).unwrap();
        let pd = potential_density(&phi, 8.0, &SeriesOpts::default()).unwrap();
        let v = volterra(&phi, 2.5e-4, 32001);
        for k in [0usize, 1000, 3500, 8000] {
            assert!((pd.u[k] - v[4 * k]).abs() < 2e-5, "{k}: {} vs {}", pd.u[k], v[4 * k]);
        }
        // ∫u e^{−λy} = 1/φ(λ)
        let lam = 3.0;
        let lap: f64 = pd.u.iter().enumerate().map(|(k, u)| {
            let w = if k == 0 || k == pd.u.len() - 1 { 0.5 } else { 1.0 };
            w * u * (-lam * k as f64 * pd.h).exp() * pd.h
        }).sum();
        assert!((lap - 1.0 / phi.value_real(lam)).abs() < 1e-5);
    }

    #[test]
    fn rescaling_keeps_identity() {
        let e = LevyExponent::brownian(1.0, 0.5, 0.2);
        let p = factorize(&e).unwrap().rescaled(3.0);
        assert!(p.identity_residual(&e) < 1e-12);
        assert_eq!(p.normalization, 3.0);
    }
}
