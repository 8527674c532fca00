//! Adaptive Gauss–Kronrod quadrature for complex-valued integrands, fixed
//! Gauss–Legendre rules and Wynn's epsilon accelerator.
//!
//! Everything integrates `Fn(f64) -> Complex64`; real integrands are simply
//! lifted. The adaptive driver is a global (QAG-style) bisection scheme: the
//! interval with the largest error estimate is split until the summed error
//! meets the tolerance, the depth limit is hit, or the interval budget runs out.

use std::collections::BinaryHeap;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Options for the adaptive driver.
#[derive(Debug, Clone, Copy)]
pub struct QuadOpts {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum bisection depth of any single interval.
    pub max_depth: u32,
    /// Upper bound on the number of live intervals.
    pub max_intervals: usize,
}

impl Default for QuadOpts {
    fn default() -> Self {
        QuadOpts { abs_tol: 1e-12, rel_tol: 1e-12, max_depth: 60, max_intervals: 4000 }
    }
}

impl QuadOpts {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        QuadOpts { abs_tol, rel_tol, ..Default::default() }
    }
}

/// Value and error estimate of a quadrature.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
    /// Integral of |f|, used for the round-off floor.
    pub abs_mass: f64,
}

/// One 15-point Kronrod panel on `[a, b]` with QUADPACK's error heuristic.
pub fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Integral {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    let mut resabs = fc.norm() * WGK[7];
    let mut fv1 = [Complex64::new(0.0, 0.0); 7];
    let mut fv2 = [Complex64::new(0.0, 0.0); 7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        rk += (f1 + f2) * WGK[j];
        resabs += WGK[j] * (f1.norm() + f2.norm());
        if j % 2 == 1 {
            rg += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = rk * 0.5;
    let mut resasc = WGK[7] * (fc - mean).norm();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }
    let value = rk * h;
    let resabs = resabs * h.abs();
    let resasc = resasc * h.abs();
    let mut err = ((rk - rg) * h).norm();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Integral { value, error: err, abs_mass: resabs }
}

struct Panel {
    a: f64,
    b: f64,
    depth: u32,
    r: Integral,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.r.error == o.r.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.r.error.total_cmp(&o.r.error)
    }
}

/// Adaptive integration over a finite interval; returns the best estimate
/// even when the tolerance is not met (inspect `error`).
pub fn integrate_raw<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, opts: &QuadOpts) -> Integral {
    if a == b {
        return Integral { value: Complex64::new(0.0, 0.0), error: 0.0, abs_mass: 0.0 };
    }
    let first = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    let mut total = first.value;
    let mut err = first.error;
    let mut mass = first.abs_mass;
    heap.push(Panel { a, b, depth: 0, r: first });
    let mut frozen_err = 0.0;
    let mut frozen_val = Complex64::new(0.0, 0.0);
    let mut frozen_mass = 0.0;
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * total.norm()).max(100.0 * f64::EPSILON * mass);
        if err <= tol || heap.len() >= opts.max_intervals {
            break;
        }
        let Some(p) = heap.pop() else { break };
        if p.depth >= opts.max_depth || (p.b - p.a).abs() < 1e-15 * (1.0 + p.a.abs()) {
            // cannot refine further; set aside
            frozen_err += p.r.error;
            frozen_val += p.r.value;
            frozen_mass += p.r.abs_mass;
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let m = 0.5 * (p.a + p.b);
        let l = gk15(&f, p.a, m);
        let r = gk15(&f, m, p.b);
        total += l.value + r.value - p.r.value;
        err += l.error + r.error - p.r.error;
        mass += l.abs_mass + r.abs_mass - p.r.abs_mass;
        heap.push(Panel { a: p.a, b: m, depth: p.depth + 1, r: l });
        heap.push(Panel { a: m, b: p.b, depth: p.depth + 1, r });
    }
    // recompute sums from scratch to shed accumulated cancellation
    let mut v = frozen_val;
    let mut e = frozen_err;
    let mut am = frozen_mass;
    for p in heap.iter() {
        v += p.r.value;
        e += p.r.error;
        am += p.r.abs_mass;
    }
    Integral { value: v, error: e, abs_mass: am }
}

fn check(r: Integral, opts: &QuadOpts) -> Result<Integral> {
    let tol = opts.abs_tol.max(opts.rel_tol * r.value.norm()).max(100.0 * f64::EPSILON * r.abs_mass);
    // allow a modest overshoot: the estimate is pessimistic in practice
    if r.error <= 10.0 * tol && r.value.re.is_finite() && r.value.im.is_finite() {
        Ok(r)
    } else {
        Err(Error::QuadratureFailure { estimate: r.value, error: r.error })
    }
}

/// Adaptive integration over `[a, b]`.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, opts: &QuadOpts) -> Result<Integral> {
    check(integrate_raw(f, a, b, opts), opts)
}

/// Real-valued convenience wrapper.
pub fn integrate_real<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOpts) -> Result<f64> {
    integrate(|x| Complex64::new(f(x), 0.0), a, b, opts).map(|r| r.value.re)
}

/// How to map `[a, ∞)` onto a finite interval.
#[derive(Debug, Clone, Copy)]
pub enum Tail {
    /// `x = a + s·t/(1−t)`; suited to algebraic decay.
    Algebraic(f64),
    /// `x = a − s·ln(1−t)`; suited to exponential decay with scale `s`.
    Exponential(f64),
}

/// Integrate over `[a, ∞)` after a change of variables.
pub fn integrate_to_inf<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    tail: Tail,
    opts: &QuadOpts,
) -> Result<Integral> {
    let g = |t: f64| -> Complex64 {
        match tail {
            Tail::Algebraic(s) => {
                let om = 1.0 - t;
                let x = a + s * t / om;
                let v = f(x);
                if v.re == 0.0 && v.im == 0.0 {
                    v
                } else {
                    v * (s / (om * om))
                }
            }
            Tail::Exponential(s) => {
                let om = 1.0 - t;
                let x = a - s * om.ln();
                let v = f(x);
                if v.re == 0.0 && v.im == 0.0 {
                    v
                } else {
                    v * (s / om)
                }
            }
        }
    };
    let r = integrate_raw(g, 0.0, 1.0, opts);
    check(r, opts)
}

/// Integral of an analytic `f` along the straight segment `w0 → w1`.
pub fn integrate_segment<F: Fn(Complex64) -> Complex64>(
    f: F,
    w0: Complex64,
    w1: Complex64,
    opts: &QuadOpts,
) -> Result<Integral> {
    let d = w1 - w0;
    let r = integrate(|t| f(w0 + d * t), 0.0, 1.0, opts)?;
    Ok(Integral { value: r.value * d, error: r.error * d.norm(), abs_mass: r.abs_mass * d.norm() })
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Shared 32-point Gauss–Legendre rule.
pub fn gl32() -> &'static (Vec<f64>, Vec<f64>) {
    static R: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(32))
}

/// Fixed Gauss–Legendre rule on `[a, b]`.
pub fn gl_fixed<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> Complex64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = Complex64::new(0.0, 0.0);
    for (xi, wi) in rule.0.iter().zip(&rule.1) {
        s += f(c + h * xi) * *wi;
    }
    s * h
}

/// Wynn's epsilon algorithm applied to the partial sums `s`.
///
/// Returns the accelerated limit and an error estimate taken from the
/// difference of the last two diagonal elements.
pub fn wynn_epsilon(s: &[f64]) -> (f64, f64) {
    let n = s.len();
    if n == 0 {
        return (0.0, f64::INFINITY);
    }
    if n < 3 {
        let e = if n == 2 { (s[1] - s[0]).abs() } else { f64::INFINITY };
        return (s[n - 1], e);
    }
    // eps[k][j]: column k, row j
    let mut prev: Vec<f64> = vec![0.0; n + 1];
    let mut cur: Vec<f64> = s.to_vec();
    let mut best = s[n - 1];
    let mut best_err = (s[n - 1] - s[n - 2]).abs();
    let mut k = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for j in 0..cur.len() - 1 {
            let d = cur[j + 1] - cur[j];
            let v = if d.abs() < 1e-300 { f64::INFINITY } else { prev[j + 1] + 1.0 / d };
            next.push(v);
        }
        k += 1;
        if k % 2 == 0 && next.len() >= 2 {
            let l = next.len();
            let est = next[l - 1];
            let e = (next[l - 1] - next[l - 2]).abs();
            if est.is_finite() && e.is_finite() && e < best_err {
                best = est;
                best_err = e;
            }
        }
        if next.iter().any(|v| !v.is_finite()) {
            break;
        }
        prev = cur;
        cur = next;
    }
    (best, best_err)
}
