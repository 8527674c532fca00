//! Monte Carlo oracle: sample `I_Ψ = ∫₀^ζ e^{−ξ_s} ds` path by path.
//!
//! Jump and killing times are exact exponential clocks, Brownian increments
//! are exact between breakpoints, and on each piece `e^{−ξ}` is integrated
//! against the Brownian bridge between the two endpoints.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inversion::{self, DensityGrid, InversionConfig, RegimeChoice, Support};
use crate::levy_model::{Component, LevyExponent, Measure};
use crate::mellin::MellinLaw;
use crate::quadrature;

/// Step growth is capped at this multiple of `dt` once `e^{−ξ}` is small.
const STEP_GROWTH: f64 = 10.0;
const MAX_STEPS: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Jump {
    Exp(f64),
    Atom(f64),
    Uniform(f64, f64),
}

/// Alias-free discrete sampler over jump shapes of one sign.
#[derive(Debug, Clone, PartialEq)]
struct JumpTable {
    cum: Vec<f64>,
    shapes: Vec<Jump>,
}

impl JumpTable {
    fn new(m: &Measure) -> Self {
        let mut cum = Vec::new();
        let mut shapes = Vec::new();
        let mut acc = 0.0;
        let mut push = |w: f64, j: Jump| {
            if w > 0.0 {
                acc += w;
                cum.push(acc);
                shapes.push(j);
            }
        };
        for comp in &m.components {
            match comp {
                Component::Exponential { weight, rate } => push(weight / rate, Jump::Exp(*rate)),
                Component::Atom { weight, location } => push(*weight, Jump::Atom(*location)),
                Component::Tabulated { grid, tail } => {
                    for i in 0..grid.len() - 1 {
                        push(tail[i] - tail[i + 1], Jump::Uniform(grid[i], grid[i + 1]));
                    }
                    push(tail[grid.len() - 1], Jump::Atom(grid[grid.len() - 1]));
                }
            }
        }
        JumpTable { cum, shapes }
    }

    fn mass(&self) -> f64 {
        self.cum.last().copied().unwrap_or(0.0)
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        let u = rng.random::<f64>() * self.mass();
        let i = self.cum.partition_point(|&c| c <= u).min(self.shapes.len() - 1);
        match self.shapes[i] {
            Jump::Exp(r) => rng.sample::<f64, _>(Exp1) / r,
            Jump::Atom(l) => l,
            Jump::Uniform(a, b) => a + (b - a) * rng.random::<f64>(),
        }
    }
}

/// Path sampler for Brownian motion with drift, compound Poisson jumps and
/// killing.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSampler {
    pub exp: LevyExponent,
    /// Base time step between events.
    pub dt: f64,
    /// Fixed horizon `t`; `None` runs until killing or until the remaining
    /// mass bound drops below `tol`.
    pub horizon: Option<f64>,
    pub seed: u64,
    /// Relative bound on the discarded tail `∫_t^∞ e^{−ξ_s} ds`.
    pub tol: f64,
    /// Give up on a path after this much simulated time.
    pub max_time: f64,
}

impl PathSampler {
    pub fn new(exp: LevyExponent, seed: u64) -> Self {
        PathSampler { exp, dt: 1e-2, horizon: None, seed, tol: 1e-9, max_time: 1e5 }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_horizon(mut self, t: f64) -> Self {
        self.horizon = Some(t);
        self
    }

    fn check(&self) -> Result<()> {
        self.exp.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidInput("dt must be positive".into()));
        }
        if let Some(t) = self.horizon {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidInput("horizon must be positive".into()));
            }
        } else if self.exp.kill_rate == 0.0 && self.exp.mean() <= 0.0 {
            return Err(Error::NotAlmostSurelyFinite(format!(
                "unkilled process with E[ξ₁] = {} ≤ 0 never drifts to +∞",
                self.exp.mean()
            )));
        }
        Ok(())
    }

    /// The RNG for path `i`: one ChaCha stream per path.
    pub fn rng(&self, path: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(path);
        r
    }

    /// One sample of `I` (or `I(t)` with a horizon).
    pub fn sample_path(&self, path: u64) -> Result<f64> {
        let mut rng = self.rng(path);
        let up = JumpTable::new(&self.exp.pi_plus);
        let down = JumpTable::new(&self.exp.pi_minus);
        self.run(&mut rng, &up, &down)
    }

    fn run<R: Rng>(&self, rng: &mut R, up: &JumpTable, down: &JumpTable) -> Result<f64> {
        let sigma = self.exp.sigma2.sqrt();
        let drift = self.exp.effective_drift();
        let lam_up = up.mass();
        let lam = lam_up + down.mass();
        let mean = self.exp.mean();
        let q = self.exp.kill_rate;

        let clock = |rng: &mut R, rate: f64| {
            if rate > 0.0 {
                rng.sample::<f64, _>(Exp1) / rate
            } else {
                f64::INFINITY
            }
        };
        let kill_at = clock(rng, q);
        let stop_at = self.horizon.map_or(kill_at, |h| h.min(kill_at));
        let base = match self.horizon {
            Some(h) => self.dt.min(h / 100.0),
            None => self.dt,
        };
        let mut next_jump = clock(rng, lam);

        let (mut t, mut xi, mut total) = (0.0, 0.0f64, 0.0);
        for _ in 0..MAX_STEPS {
            let h = base * xi.exp().clamp(1.0, STEP_GROWTH);
            let end = (t + h).min(next_jump).min(stop_at);
            let dt = end - t;
            let z: f64 = rng.sample(StandardNormal);
            let next = xi + drift * dt + sigma * dt.sqrt() * z;
            total += bridge_integral(xi, next, dt, self.exp.sigma2);
            xi = next;
            t = end;
            if t >= stop_at {
                return Ok(total);
            }
            if t >= next_jump {
                let jump = if rng.random::<f64>() * lam < lam_up { up.draw(rng) } else { -down.draw(rng) };
                xi += jump;
                next_jump = t + clock(rng, lam);
            }
            if self.horizon.is_none() && mean > 0.0 && (-xi).exp() / mean < self.tol * total {
                return Ok(total);
            }
            if t > self.max_time {
                break;
            }
        }
        Err(Error::HorizonExceeded(format!(
            "path not finished at t = {t:.3e} (ξ = {xi:.3e}, I so far {total:.3e})"
        )))
    }

    fn sample_many(&self, n_paths: usize) -> Result<Vec<f64>> {
        if n_paths == 0 {
            return Err(Error::InvalidInput("need at least one path".into()));
        }
        let up = JumpTable::new(&self.exp.pi_plus);
        let down = JumpTable::new(&self.exp.pi_minus);
        (0..n_paths as u64)
            .into_par_iter()
            .map(|i| self.run(&mut self.rng(i), &up, &down))
            .collect()
    }
}

/// `E[∫₀^h e^{−X_s} ds]` for a Brownian bridge from `u` to `v` over `[0, h]`.
fn bridge_integral(u: f64, v: f64, h: f64, sigma2: f64) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    let d = v - u;
    if sigma2 == 0.0 {
        let r = if d.abs() < 1e-8 { 1.0 - d / 2.0 + d * d / 6.0 } else { -(-d).exp_m1() / d };
        return h * (-u).exp() * r;
    }
    let (nodes, weights) = gl8();
    let mut s = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        let r = 0.5 * (x + 1.0);
        s += w * (-d * r + 0.5 * sigma2 * h * r * (1.0 - r)).exp();
    }
    0.5 * h * (-u).exp() * s
}

fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: std::sync::OnceLock<(Vec<f64>, Vec<f64>)> = std::sync::OnceLock::new();
    RULE.get_or_init(|| quadrature::gauss_legendre(8))
}

/// Estimate of `E[I^p]` with a grouped jackknife standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub order: f64,
    pub mean: f64,
    pub se: f64,
}

/// Sorted Monte Carlo sample with summary statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalLaw {
    pub samples: Vec<f64>,
    pub n: usize,
    pub ks_stat: Option<f64>,
    pub moments: Vec<MomentEstimate>,
    /// Samples in path order, kept for resampling.
    #[serde(skip)]
    pub raw: Vec<f64>,
}

const JACKKNIFE_GROUPS: usize = 100;

impl EmpiricalLaw {
    pub fn from_raw(raw: Vec<f64>, orders: &[f64]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidInput("empty sample".into()));
        }
        let mut samples = raw.clone();
        samples.sort_by(f64::total_cmp);
        let mut law = EmpiricalLaw { n: samples.len(), samples, ks_stat: None, moments: Vec::new(), raw };
        law.moments = orders.iter().map(|&p| law.moment(p)).collect();
        Ok(law)
    }

    /// `E[I^p]`, jackknifed over interleaved path groups.
    pub fn moment(&self, p: f64) -> MomentEstimate {
        let g = JACKKNIFE_GROUPS.min(self.n);
        let mut sums = vec![0.0; g];
        let mut counts = vec![0usize; g];
        for (i, x) in self.raw.iter().enumerate() {
            sums[i % g] += x.powf(p);
            counts[i % g] += 1;
        }
        let total: f64 = sums.iter().sum();
        let mean = total / self.n as f64;
        if g < 2 {
            return MomentEstimate { order: p, mean, se: f64::NAN };
        }
        let loo: Vec<f64> = (0..g).map(|k| (total - sums[k]) / (self.n - counts[k]) as f64).collect();
        let bar = loo.iter().sum::<f64>() / g as f64;
        let var = (g - 1) as f64 / g as f64 * loo.iter().map(|v| (v - bar).powi(2)).sum::<f64>();
        MomentEstimate { order: p, mean, se: var.sqrt() }
    }

    /// Empirical cdf `#{X ≤ x}/n`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.samples.partition_point(|&s| s <= x) as f64 / self.n as f64
    }

    /// Empirical quantile by order statistic.
    pub fn quantile(&self, p: f64) -> f64 {
        let i = ((p * self.n as f64).ceil() as usize).clamp(1, self.n) - 1;
        self.samples[i]
    }

    /// Sup distance to a continuous cdf.
    pub fn ks_distance(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let n = self.n as f64;
        self.samples.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
            let f = cdf(x);
            d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs())
        })
    }

    /// Log–log slope of the empirical tail over ranks with `F̄ ∈ [lo, hi]`.
    pub fn tail_slope(&self, lo: f64, hi: f64) -> Option<f64> {
        let n = self.n as f64;
        let pts: Vec<(f64, f64)> = self
            .samples
            .iter()
            .enumerate()
            .filter_map(|(i, &x)| {
                let bar = (n - (i + 1) as f64) / n;
                (bar >= lo && bar <= hi && x > 0.0).then(|| (x.ln(), bar.ln()))
            })
            .collect();
        if pts.len() < 10 {
            return None;
        }
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    }
}

/// `n_paths` independent samples of `I_Ψ`.
pub fn sample_functional(s: &PathSampler, n_paths: usize) -> Result<EmpiricalLaw> {
    let mut s = s.clone();
    s.horizon = None;
    s.check()?;
    EmpiricalLaw::from_raw(s.sample_many(n_paths)?, &[1.0, 2.0])
}

/// Negative orders reported by default for `I(t)`.
pub const FINITE_HORIZON_ORDERS: [f64; 4] = [1.0, -0.25, -0.5, -1.0];

/// `n_paths` samples of `I(t) = ∫₀^{t∧ζ} e^{−ξ_s} ds`.
pub fn sample_finite_horizon(s: &PathSampler, t: f64, n_paths: usize) -> Result<EmpiricalLaw> {
    let s = s.clone().with_horizon(t);
    s.check()?;
    EmpiricalLaw::from_raw(s.sample_many(n_paths)?, &FINITE_HORIZON_ORDERS)
}

/// Kolmogorov survival function `P(K > λ)`.
pub fn kolmogorov_pvalue(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let t = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        s += if k % 2 == 1 { t } else { -t };
        if t < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Asymptotic one-sample KS critical value at level `alpha`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Two-sample KS distance.
pub fn ks_two_sample(a: &EmpiricalLaw, b: &EmpiricalLaw) -> f64 {
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    let (na, nb) = (a.n as f64, b.n as f64);
    while i < a.n && j < b.n {
        let x = a.samples[i].min(b.samples[j]);
        while i < a.n && a.samples[i] <= x {
            i += 1;
        }
        while j < b.n && b.samples[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Pass/fail thresholds for [`compare`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareConfig {
    pub alpha: f64,
    pub z_max: f64,
    /// `(order k, E[I^k])` pairs to test.
    pub moments: Vec<(f64, f64)>,
    /// Expected log–log tail slope.
    pub tail_target: Option<f64>,
    pub slope_tol: f64,
    /// `F̄` window for the tail regression.
    pub tail_window: (f64, f64),
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig { alpha: 0.05, z_max: 3.0, moments: Vec::new(), tail_target: None, slope_tol: 0.1, tail_window: (1e-3, 1e-2) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentCheck {
    pub order: f64,
    pub empirical: f64,
    pub se: f64,
    pub analytic: f64,
    pub z: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub n: usize,
    pub ks_stat: f64,
    pub ks_critical: f64,
    pub ks_pvalue: f64,
    pub ks_pass: bool,
    pub moments: Vec<MomentCheck>,
    pub tail_slope: Option<f64>,
    pub tail_target: Option<f64>,
    pub tail_pass: Option<bool>,
    pub pass: bool,
}

fn grid_cdf(grid: &DensityGrid, x: f64) -> f64 {
    let xs = &grid.x;
    let k = xs.partition_point(|&g| g <= x);
    if k == 0 {
        // below the grid: scale down linearly towards the origin
        return if xs[0] > 0.0 && x > 0.0 { grid.cdf[0] * x / xs[0] } else { 0.0 };
    }
    if k == xs.len() {
        return grid.cdf[k - 1];
    }
    let (a, b) = (xs[k - 1], xs[k]);
    let w = if a > 0.0 { (x / a).ln() / (b / a).ln() } else { (x - a) / (b - a) };
    grid.cdf[k - 1] + w * (grid.cdf[k] - grid.cdf[k - 1])
}

/// Compare a Monte Carlo sample with an analytic cdf tabulated on a grid.
pub fn compare(analytic: &DensityGrid, emp: &mut EmpiricalLaw, cfg: &CompareConfig) -> Result<CompareReport> {
    if analytic.x.is_empty() || analytic.x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("analytic grid must be non-empty and increasing".into()));
    }
    let (glo, ghi) = (analytic.x[0], analytic.x[analytic.x.len() - 1]);
    let (slo, shi) = (emp.samples[0], emp.samples[emp.n - 1]);
    if ghi < slo || glo > shi {
        return Err(Error::SupportMismatch(format!(
            "grid [{glo:.4e}, {ghi:.4e}] and samples [{slo:.4e}, {shi:.4e}] do not overlap"
        )));
    }
    let ks = emp.ks_distance(|x| grid_cdf(analytic, x));
    Ok(finish_report(emp, ks, cfg))
}

fn finish_report(emp: &mut EmpiricalLaw, ks: f64, cfg: &CompareConfig) -> CompareReport {
    emp.ks_stat = Some(ks);
    let n = emp.n;
    let sn = (n as f64).sqrt();
    let crit = ks_critical(n, cfg.alpha);
    let pvalue = kolmogorov_pvalue((sn + 0.12 + 0.11 / sn) * ks);
    let moments: Vec<MomentCheck> = cfg
        .moments
        .iter()
        .map(|&(k, exact)| {
            let m = emp.moment(k);
            let z = (m.mean - exact) / m.se;
            MomentCheck { order: k, empirical: m.mean, se: m.se, analytic: exact, z, pass: z.abs() < cfg.z_max }
        })
        .collect();
    let tail_slope = cfg.tail_target.and_then(|_| emp.tail_slope(cfg.tail_window.0, cfg.tail_window.1));
    let tail_pass = cfg.tail_target.map(|t| tail_slope.is_some_and(|s| (s - t).abs() <= cfg.slope_tol));
    let pass = ks < crit && moments.iter().all(|m| m.pass) && tail_pass.unwrap_or(true);
    CompareReport {
        n,
        ks_stat: ks,
        ks_critical: crit,
        ks_pvalue: pvalue,
        ks_pass: ks < crit,
        moments,
        tail_slope,
        tail_target: cfg.tail_target,
        tail_pass,
        pass,
    }
}

/// Log-spaced grid spanning the sample range.
pub fn sample_grid(emp: &EmpiricalLaw, points: usize) -> Vec<f64> {
    let lo = emp.samples.iter().copied().find(|&x| x > 0.0).unwrap_or(1e-12);
    let hi = emp.samples[emp.n - 1].max(lo * (1.0 + 1e-9));
    let (a, b) = (lo.ln(), hi.ln());
    let m = points.max(2);
    (0..m).map(|i| (a + (b - a) * i as f64 / (m - 1) as f64).exp()).collect()
}

/// [`compare`] against a law, tabulating the cdf over the sample range and
/// filling in finite integer moments and the Cramér slope when available.
pub fn compare_law(law: &MellinLaw, emp: &mut EmpiricalLaw, cfg: &CompareConfig, inv: &InversionConfig) -> Result<CompareReport> {
    let sup = inversion::support(law);
    let outside = emp.samples.iter().filter(|&&x| !near_support(&sup, x)).count();
    if outside * 100 > emp.n {
        return Err(Error::SupportMismatch(format!("{outside} of {} samples lie outside {sup}", emp.n)));
    }
    let mut cfg = cfg.clone();
    if let Support::Point { x } = sup {
        let ks = emp.samples.iter().filter(|&&s| (s - x).abs() > 1e-6 * x).count() as f64 / emp.n as f64;
        return Ok(finish_report(emp, ks, &cfg));
    }
    let grid = inversion::density_grid(law, &sample_grid(emp, 300), 0, RegimeChoice::Inversion, inv)?;
    cfg.moments.retain(|m| m.1.is_finite());
    compare(&grid, emp, &cfg)
}

fn near_support(sup: &Support, x: f64) -> bool {
    let slack = 1e-9 * (1.0 + x.abs());
    sup.contains(x) || sup.contains(x + slack) || sup.contains(x - slack)
}

/// Subordinator with Laplace exponent φ as a Lévy exponent `−φ(−z)`.
fn subordinator(phi: &crate::levy_model::BernsteinFunction) -> LevyExponent {
    LevyExponent {
        sigma2: 0.0,
        gamma: phi.delta,
        kill_rate: phi.kappa,
        pi_plus: phi.measure.clone(),
        pi_minus: Measure::zero(),
        compensation: Default::default(),
    }
}

/// Inverse-cdf sampler from a tabulated cdf, interpolating in `ln x`.
#[derive(Debug, Clone)]
pub struct InverseCdf {
    pub x: Vec<f64>,
    pub cdf: Vec<f64>,
}

impl InverseCdf {
    /// Tabulate the law until both tails are below `eps`.
    pub fn from_law(law: &MellinLaw, points: usize, eps: f64, inv: &InversionConfig) -> Result<Self> {
        let (mut lo, mut hi) = (0.1f64, 10.0f64);
        while lo > 1e-12 && inversion::cdf(law, lo, inv)?.value > eps {
            lo /= 4.0;
        }
        while hi < 1e12 && inversion::tail(law, hi, inv)?.value > eps {
            hi *= 4.0;
        }
        let (a, b) = (lo.ln(), hi.ln());
        let x: Vec<f64> = (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect();
        let grid = inversion::density_grid(law, &x, 0, RegimeChoice::Inversion, inv)?;
        let mut cdf = grid.cdf;
        for i in 1..cdf.len() {
            cdf[i] = cdf[i].max(cdf[i - 1]);
        }
        Ok(InverseCdf { x, cdf })
    }

    pub fn invert(&self, u: f64) -> f64 {
        let k = self.cdf.partition_point(|&c| c < u);
        if k == 0 {
            return self.x[0];
        }
        if k == self.cdf.len() {
            return self.x[k - 1];
        }
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let w = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.0 };
        (self.x[k - 1].ln() + w * (self.x[k] / self.x[k - 1]).ln()).exp()
    }
}

/// Samples of `I_{φ₊}·X_{φ₋}` for a law whose φ₋ is affine, with `I_{φ₊}`
/// simulated from the ascending subordinator and `X_{φ₋}` drawn by inverse cdf
/// (its Mellin transform `φ₋(0)W_{φ₋}(1−z)` is that of `I` for `zφ₋(z)`).
pub fn sample_factorized(law: &MellinLaw, n_paths: usize, seed: u64, dt: f64, inv: &InversionConfig) -> Result<EmpiricalLaw> {
    let pm = &law.pair.phi_minus;
    if !pm.is_affine() {
        return Err(Error::UnsupportedClass("factorized sampling needs an affine φ₋".into()));
    }
    let sub = PathSampler::new(subordinator(&law.pair.phi_plus), seed).with_dt(dt);
    sub.check()?;
    let ip = sub.sample_many(n_paths)?;
    let x_law = if pm.is_constant() {
        None
    } else {
        let e = LevyExponent::brownian(2.0 * pm.delta, pm.kappa, 0.0);
        let m = MellinLaw::new(&e)?;
        Some(InverseCdf::from_law(&m, 400, 1e-7, inv)?)
    };
    let raw: Vec<f64> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let x = match &x_law {
                None => 1.0 / pm.kappa,
                Some(t) => {
                    let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
                    r.set_stream(i as u64);
                    t.invert(r.random::<f64>())
                }
            };
            ip[i] * x
        })
        .collect();
    EmpiricalLaw::from_raw(raw, &[1.0, 2.0])
}
