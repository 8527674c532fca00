//! Bernstein-gamma functions `W_φ`: the solution of `W(z+1) = φ(z)W(z)`,
//! `W(1) = 1`, given by a generalised Weierstrass product.
//!
//! Two evaluation branches are provided:
//!
//! * **product** — the Weierstrass product truncated after `N` factors, with
//!   the remaining log-sum replaced by its Euler–Maclaurin expansion; `N` is
//!   doubled until the result settles.
//! * **stirling** — an exact integral form
//!   `log W(z) = −ln φ(z) + ∫_1^{1+z} ln φ + ½ln φ(1) − ½ln φ(1+z) − T_φ
//!   − ½∫_1^∞ P(u)(ln φ)″(u+z)du`,
//!   used above the crossover radius where the product needs too many terms.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::levy_model::{BernsteinFunction, Thresholds};
use crate::quadrature::{self, QuadOpts, Tail};

type C = Complex64;

fn c(x: f64) -> C {
    C::new(x, 0.0)
}

/// `B_{2j}/(2j)!` for j = 1..4.
const EM_COEF: [f64; 4] = [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0];

/// Default switch-over radius between the product and integral branches.
pub const CROSSOVER_RADIUS: f64 = 40.0;

/// Sawtooth weight `P(u) = {u}(1 − {u})`.
pub fn sawtooth(u: f64) -> f64 {
    let f = u - u.floor();
    f * (1.0 - f)
}

/// Which representation produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Product,
    Stirling,
    Recurrence,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::Product => "product",
            Branch::Stirling => "stirling",
            Branch::Recurrence => "recurrence",
        })
    }
}

/// `log W(z)` with its provenance.
#[derive(Debug, Clone, Copy)]
pub struct LogValue {
    pub value: C,
    /// Absolute error estimate of `value` (relative error of `W`).
    pub error: f64,
    pub branch: Branch,
}

/// Result of evaluating the meromorphic extension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Value(C),
    Pole { location: f64, residue: C },
}

/// `∫_s^∞ P(u) (ln φ)″(u + shift) du`.
///
/// Unit intervals up to `u_max` are integrated numerically; the remainder is
/// the Bernoulli expansion
/// `−L′/6 + L‴/360 − L⁽⁵⁾/15120` at `u_max + shift`.
pub fn p_integral(phi: &BernsteinFunction, shift: C, s: usize, u_max: usize) -> Result<C> {
    let l2 = |u: f64| -> C {
        let d = phi.derivatives(shift + u, 2);
        (d[2] * d[0] - d[1] * d[1]) / (d[0] * d[0])
    };
    let rule = quadrature::gl32();
    let opts = QuadOpts::with_tol(1e-15, 1e-14);
    let mut total = c(0.0);
    for k in s..u_max {
        let (a, b) = (k as f64, k as f64 + 1.0);
        let near = (shift + a).norm() < 4.0 || k < s + 2;
        if near {
            total += quadrature::integrate(|u| l2(u) * sawtooth(u), a, b, &opts)?.value;
        } else {
            total += quadrature::gl_fixed(&|u: f64| l2(u) * ((u - a) * (b - u)), a, b, rule);
        }
    }
    let l = phi.log_derivatives(shift + u_max as f64, 5);
    Ok(total - l[1] / 6.0 + l[3] / 360.0 - l[5] / 15120.0)
}

/// `T_φ = −½∫_1^∞ P(u)(ln φ)″(u)du`.
pub fn t_phi(phi: &BernsteinFunction) -> Result<f64> {
    Ok(-0.5 * p_integral(phi, c(0.0), 1, 48)?.re)
}

/// Euler-type constant `γ_φ = lim (Σ_{k≤n} φ′(k)/φ(k) − ln φ(n))`.
///
/// Partial sums are corrected by their Euler–Maclaurin tail and `n` is
/// doubled until two estimates agree to 1e-12. The second value is the last
/// difference.
pub fn euler_constant(phi: &BernsteinFunction) -> Result<(f64, f64)> {
    let f = |k: f64| {
        let d = phi.derivatives(c(k), 1);
        d[1].re / d[0].re
    };
    let mut sum = 0.0;
    let mut k_done = 0usize;
    let mut prev = f64::NAN;
    let mut n = 8usize;
    let mut diff = f64::INFINITY;
    while n <= 1 << 16 {
        for k in k_done + 1..=n {
            sum += f(k as f64);
        }
        k_done = n;
        let l = phi.log_derivatives(c(n as f64), 8);
        let mut est = sum - l[0].re - 0.5 * l[1].re;
        for (j, cj) in EM_COEF.iter().enumerate() {
            est -= cj * l[2 * j + 2].re;
        }
        diff = (est - prev).abs();
        if diff < 1e-14 * (1.0 + est.abs()) {
            return Ok((est, diff));
        }
        prev = est;
        n *= 2;
    }
    if diff < 1e-12 {
        Ok((prev, diff))
    } else {
        Err(Error::SlowConvergence { estimate: prev, bound: diff })
    }
}

/// Evaluator for `W_φ`.
#[derive(Debug, Clone)]
pub struct BernsteinGamma {
    phi: BernsteinFunction,
    euler_const: f64,
    euler_err: f64,
    t_phi: f64,
    crossover_radius: f64,
    thresholds: Thresholds,
}

impl BernsteinGamma {
    pub fn new(phi: BernsteinFunction) -> Result<Self> {
        phi.validate()?;
        let (euler_const, euler_err) = euler_constant(&phi)?;
        let t_phi = t_phi(&phi)?;
        let thresholds = phi.thresholds();
        Ok(BernsteinGamma { phi, euler_const, euler_err, t_phi, crossover_radius: CROSSOVER_RADIUS, thresholds })
    }

    /// Shared evaluator for `φ(z) = z`, i.e. the gamma function.
    pub fn gamma() -> &'static BernsteinGamma {
        static G: OnceLock<BernsteinGamma> = OnceLock::new();
        G.get_or_init(|| BernsteinGamma::new(BernsteinFunction::identity()).expect("identity is Bernstein"))
    }

    pub fn with_crossover(mut self, r: f64) -> Self {
        self.crossover_radius = r;
        self
    }

    pub fn phi(&self) -> &BernsteinFunction {
        &self.phi
    }

    pub fn euler_const(&self) -> f64 {
        self.euler_const
    }

    pub fn euler_error(&self) -> f64 {
        self.euler_err
    }

    pub fn t_phi(&self) -> f64 {
        self.t_phi
    }

    pub fn crossover_radius(&self) -> f64 {
        self.crossover_radius
    }

    pub fn thresholds(&self) -> Thresholds {
        self.thresholds
    }

    /// `W_φ(z)` for `Re z > 0`.
    pub fn eval(&self, z: C) -> Result<C> {
        Ok(self.log_eval(z)?.value.exp())
    }

    /// `log W_φ(z)` for `Re z > 0` (continuous branch along rays from 1).
    pub fn log_eval(&self, z: C) -> Result<LogValue> {
        if !(z.re > 0.0) {
            return Err(Error::OutOfStrip { z, lo: 0.0, hi: f64::INFINITY });
        }
        if z.norm() <= self.crossover_radius {
            self.log_product(z)
        } else {
            self.log_stirling(z)
        }
    }

    /// `log W_φ(z)` on a chosen branch.
    pub fn log_eval_branch(&self, z: C, branch: Branch) -> Result<LogValue> {
        if !(z.re > 0.0) {
            return Err(Error::OutOfStrip { z, lo: 0.0, hi: f64::INFINITY });
        }
        match branch {
            Branch::Product => self.log_product(z),
            Branch::Stirling => self.log_stirling(z),
            Branch::Recurrence => self.log_eval(z),
        }
    }

    fn log_product(&self, z: C) -> Result<LogValue> {
        let phi = &self.phi;
        let g = |u: f64| -> C {
            let d = phi.derivatives(c(u), 1);
            d[0].ln() - phi.value(z + u).ln() + z * (d[1] / d[0])
        };
        let head = -z * self.euler_const - phi.value(z).ln();
        let mut sum = c(0.0);
        let mut k_done = 0usize;
        let mut prev: Option<C> = None;
        let mut n = 16usize;
        let opts = QuadOpts::with_tol(1e-15, 1e-15);
        loop {
            for k in k_done + 1..n {
                sum += g(k as f64);
            }
            k_done = n - 1;
            let nf = n as f64;
            // ∫_N^∞ g = ∫_N^{N+z} ln φ − z ln φ(N)
            let lu = phi.log_derivatives(c(nf), 8);
            let lz = phi.log_derivatives(z + nf, 7);
            let seg = quadrature::integrate_segment(|w| phi.value(w).ln(), c(nf), z + nf, &opts)?;
            let mut tail = seg.value - z * lu[0] + 0.5 * (lu[0] - lz[0] + z * lu[1]);
            for (j, cj) in EM_COEF.iter().enumerate() {
                let m = 2 * j + 1;
                let gm = lu[m] - lz[m] + z * lu[m + 1];
                tail -= gm * *cj;
            }
            let val = head + sum + tail;
            if let Some(p) = prev {
                let d = (val - p).norm();
                if d < 1e-13 * (1.0 + val.norm()) {
                    let err = d + seg.error + 1e-15 * (1.0 + val.norm()) + self.euler_err * z.norm();
                    return Ok(LogValue { value: val, error: err, branch: Branch::Product });
                }
                if n >= 8192 {
                    return Err(Error::ConvergenceFailure(format!(
                        "Weierstrass product at z = {z} did not settle (last change {d:e})"
                    )));
                }
            }
            prev = Some(val);
            n *= 2;
        }
    }

    fn log_stirling(&self, z: C) -> Result<LogValue> {
        let phi = &self.phi;
        let opts = QuadOpts::with_tol(1e-14, 1e-15);
        let seg = quadrature::integrate_segment(|w| phi.value(w).ln(), c(1.0), z + 1.0, &opts)?;
        let u_max = if z.norm() >= 20.0 { 3 } else { 48 };
        let pint = p_integral(phi, z, 1, u_max)?;
        let val = -phi.value(z).ln() + seg.value + 0.5 * phi.value_real(1.0).ln()
            - 0.5 * phi.value(z + 1.0).ln()
            - self.t_phi
            - 0.5 * pint;
        let err = seg.error + 1e-14 * (1.0 + val.norm());
        Ok(LogValue { value: val, error: err, branch: Branch::Stirling })
    }

    /// `W_φ` on `Re z > a_φ` through `W(z) = W(z+n)/∏_{j<n} φ(z+j)`; at the
    /// simple poles `θ_φ − k` the residue is returned instead.
    pub fn eval_extended(&self, z: C) -> Result<Extended> {
        if z.re > 0.0 {
            return Ok(Extended::Value(self.eval(z)?));
        }
        Ok(match self.log_extended(z)? {
            ExtLog::Value(v) => Extended::Value(v.value.exp()),
            ExtLog::Pole { location, residue } => Extended::Pole { location, residue },
        })
    }

    /// Log-space version of [`eval_extended`](Self::eval_extended).
    pub fn log_extended(&self, z: C) -> Result<ExtLog> {
        if z.re > 0.0 {
            return Ok(ExtLog::Value(self.log_eval(z)?));
        }
        let a = self.thresholds.a_phi;
        if !(z.re > a) {
            return Err(Error::OutOfStrip { z, lo: a, hi: f64::INFINITY });
        }
        let theta = self.thresholds.theta_phi;
        let n = (1.0 - z.re).ceil() as usize;
        let mut lsum = c(0.0);
        for j in 0..n {
            let w = z + j as f64;
            if theta.is_finite() && (w - theta).norm() < 1e-12 * (1.0 + theta.abs()) {
                return Ok(ExtLog::Pole { location: theta - j as f64, residue: self.residue(j)? });
            }
            let p = self.phi.value(w);
            if p.norm() < 1e-300 {
                return Err(Error::NearPole { pole: w.re - j as f64, residue: c(f64::NAN) });
            }
            lsum += p.ln();
        }
        let base = self.log_eval(z + n as f64)?;
        Ok(ExtLog::Value(LogValue {
            value: base.value - lsum,
            error: base.error + 1e-15 * n as f64,
            branch: Branch::Recurrence,
        }))
    }

    /// Residue of `W_φ` at `θ_φ − k`.
    pub fn residue(&self, k: usize) -> Result<C> {
        let theta = self.thresholds.theta_phi;
        if !theta.is_finite() || !(theta - k as f64 > self.thresholds.a_phi) {
            return Err(Error::InvalidInput(format!("no pole of W at θ − {k}")));
        }
        let w1 = self.eval(c(1.0 + theta))?;
        let mut den = self.phi.deriv_value(c(theta), 1);
        for j in 1..=k {
            den *= self.phi.value(c(theta - j as f64));
        }
        Ok(w1 / den)
    }
}

/// Log-space counterpart of [`Extended`].
#[derive(Debug, Clone, Copy)]
pub enum ExtLog {
    Value(LogValue),
    Pole { location: f64, residue: C },
}

/// The functions entering the exact modulus representation of `|W_φ(z)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StirlingComponents {
    /// `A_φ(z) = ∫_0^b arg φ(a+iu)du`.
    pub a: f64,
    /// `G_φ(a) = ∫_1^{1+a} ln φ`.
    pub g: f64,
    /// `E_φ(z)`.
    pub e: f64,
    /// `R_φ(a)`.
    pub r: f64,
    /// `T_φ`.
    pub t: f64,
    /// `H_φ(a) = ∫_1^{1+a} uφ′/φ`.
    pub h: f64,
    /// `H*_φ(a) = a(φ(a+1) − φ(a))/φ(a)`.
    pub h_star: f64,
}

/// `A_φ(a+ib)` by quadrature of the principal argument.
pub fn a_phi(phi: &BernsteinFunction, z: C) -> Result<f64> {
    let (a, b) = (z.re, z.im.abs());
    if b == 0.0 {
        return Ok(0.0);
    }
    let opts = QuadOpts::with_tol(1e-13, 1e-13);
    quadrature::integrate_real(|u| phi.value(C::new(a, u)).arg(), 0.0, b, &opts)
}

/// `A_φ(a+ib) = ∫_a^∞ ln(|φ(u+ib)|/φ(u))du`.
pub fn a_phi_dual(phi: &BernsteinFunction, z: C) -> Result<f64> {
    let (a, b) = (z.re, z.im.abs());
    if b == 0.0 {
        return Ok(0.0);
    }
    let opts = QuadOpts::with_tol(1e-12, 1e-12);
    let f = |u: f64| c((phi.value(C::new(u, b)).norm() / phi.value_real(u)).ln());
    let split = a + 4.0 * b;
    let head = quadrature::integrate(f, a, split, &opts)?.value.re;
    let tail = quadrature::integrate_to_inf(f, split, Tail::Algebraic(split.max(1.0)), &opts)?.value.re;
    Ok(head + tail)
}

/// All components at `z`, `Re z > 0`.
pub fn stirling_components(phi: &BernsteinFunction, z: C) -> Result<StirlingComponents> {
    let a = z.re;
    if !(a > 0.0) {
        return Err(Error::OutOfStrip { z, lo: 0.0, hi: f64::INFINITY });
    }
    let opts = QuadOpts::with_tol(1e-14, 1e-14);
    let a_c = a_phi(phi, z)?;
    let g = quadrature::integrate_real(|u| phi.value_real(u).ln(), 1.0, 1.0 + a, &opts)?;
    let h = quadrature::integrate_real(
        |u| {
            let d = phi.derivatives(c(u), 1);
            u * d[1].re / d[0].re
        },
        1.0,
        1.0 + a,
        &opts,
    )?;
    let pa = phi.value_real(a);
    let h_star = a * (phi.value_real(a + 1.0) - pa) / pa;
    let e = if z.im == 0.0 {
        0.0
    } else {
        0.5 * (p_integral(phi, z, 0, 48)?.re - p_integral(phi, c(a), 0, 48)?.re)
    };
    let r = 0.5 * (p_integral(phi, c(a), 1, 48)?.re - p_integral(phi, c(0.0), 1, 48)?.re);
    let t = t_phi(phi)?;
    Ok(StirlingComponents { a: a_c, g, e, r, t, h, h_star })
}

/// `ln|W_φ(z)|` from the exact modulus representation.
pub fn log_abs_stirling(phi: &BernsteinFunction, z: C) -> Result<f64> {
    let s = stirling_components(phi, z)?;
    let a = z.re;
    let lp = |u: f64| phi.value_real(u).ln();
    Ok(0.5 * lp(1.0) - 0.5 * lp(a) - 0.5 * lp(1.0 + a) - 0.5 * phi.value(z).norm().ln() + s.g - s.a - s.e - s.r)
}

/// Decay of `|W_φ(a+ib)|` as `|b| → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum DecayClass {
    /// `ln|W| ≈ −θ|b|`.
    Exponential { theta: f64 },
    /// `|W| ≈ |b|^{−n}`.
    Polynomial { n: f64 },
    /// Faster than any power.
    Rapid,
}

/// Classify the decay of `|W_φ|` along vertical lines.
pub fn decay_class(phi: &BernsteinFunction) -> Result<DecayClass> {
    if phi.delta > 0.0 {
        return Ok(DecayClass::Exponential { theta: PI / 2.0 });
    }
    if let Some(alpha) = phi.measure.alpha {
        return Ok(DecayClass::Exponential { theta: PI * alpha / 2.0 });
    }
    if phi.measure.is_zero() {
        return Ok(DecayClass::Polynomial { n: 0.0 });
    }
    if phi.measure.has_tabulated() {
        return Err(Error::Unclassifiable("tabulated measure without a regular-variation tag".into()));
    }
    let v0 = phi.measure.density_at_zero();
    if v0.is_finite() {
        Ok(DecayClass::Polynomial { n: v0 / phi.at_infinity() })
    } else {
        Ok(DecayClass::Rapid)
    }
}

/// `log W_φ(z+1)` from the Malmstén-type integral, available when the
/// potential measure is explicit (φ affine).
pub fn malmsten_log(phi: &BernsteinFunction, z: C) -> Result<C> {
    if !phi.is_affine() {
        return Err(Error::NoExplicitPotential);
    }
    if !(z.re > -1.0) {
        return Err(Error::OutOfStrip { z, lo: -1.0, hi: f64::INFINITY });
    }
    let lin = z * phi.value_real(1.0).ln();
    if phi.delta == 0.0 {
        return Ok(lin);
    }
    // κ(dy) = δ·U(dy) = e^{−βy}dy with β = κ/δ
    let beta = phi.kappa / phi.delta;
    let num = |y: f64| -> C {
        if y * (1.0 + z.norm()) < 0.2 {
            // Σ_{k≥2} (−y)^k (z^k − z)/k!
            let mut s = c(0.0);
            let mut zk = z;
            let mut yk = 1.0;
            for k in 1..20 {
                yk *= -y / k as f64;
                if k >= 2 {
                    zk *= z;
                    s += (zk - z) * yk;
                }
            }
            s
        } else {
            ((-z * y).exp() - 1.0) - z * ((-y).exp_m1())
        }
    };
    let f = |y: f64| -> C {
        let w = (-beta * y).exp() / (y * y.exp_m1());
        num(y) * w
    };
    let opts = QuadOpts::with_tol(1e-14, 1e-13);
    let head = quadrature::integrate(f, 0.0, 1.0, &opts)?.value;
    let tail = quadrature::integrate_to_inf(f, 1.0, Tail::Exponential(1.0 / (1.0 + beta)), &opts)?.value;
    Ok(lin + head + tail)
}
