//! `bgamma` command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bgamma::bernstein_gamma::{log_abs_stirling, BernsteinGamma, Extended};
use bgamma::inversion::{self, InversionConfig, RegimeChoice};
use bgamma::simulate::{self, CompareConfig, PathSampler};
use bgamma::wiener_hopf::{self, identity_grid, IDENTITY_TOL};
use bgamma::{DensityGrid, Error, MellinLaw, SpecFile};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C;
use serde_json::json;

use output::{Header, Sink};

const AFTER_HELP: &str = "\
CSV columns
  wgamma      re_z, im_z, re_W, im_W, ln_abs_W, ln_abs_W_stirling
  mellin      re_z, im_z, re_M, im_M, recurrence_residual
  law         x, f, F, Fbar, regime, err_est, then f1..fn for --derivatives n
  mc          I  (one sample per line, in path order)
Every output starts with a header carrying the library version and the
SHA-256 of the spec file: `#` comment lines for CSV and TOML, a `header`
object for JSON. `bgamma --schema` prints all of this as JSON.

Exit status: 0 success, 1 invalid input, 2 numerical failure.";

#[derive(Parser, Debug)]
#[command(name = "bgamma", version, about = "Bernstein-gamma functions and laws of exponential functionals", after_help = AFTER_HELP)]
struct Cli {
    /// Absolute tolerance for quadratures, in (0, 1e-2].
    #[arg(long, global = true, env = "BGAMMA_TOL", default_value_t = 1e-8, value_parser = parse_tol)]
    tol: f64,
    /// Write the main output here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Print progress to stderr.
    #[arg(long, short, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Print the machine-readable output schema and exit.
    #[arg(long)]
    schema: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Wiener–Hopf factors of a process; writes the pair as a spec file and
    /// the identity residual report as JSON (to --report, else stderr).
    Factorize {
        spec: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// W_φ on a set of points, for the [bernstein] (or [phi_plus]) section.
    Wgamma {
        spec: PathBuf,
        #[command(flatten)]
        points: Points,
    },
    /// Mellin transform M_Ψ(z) = E[I^{z−1}] with recurrence residuals.
    Mellin {
        spec: PathBuf,
        #[command(flatten)]
        points: Points,
    },
    /// Density, distribution function and tail of I_Ψ on an x-grid.
    Law {
        spec: PathBuf,
        /// `lo:hi:step` or a comma-separated list.
        #[arg(long, value_parser = parse_grid)]
        x: Grid,
        #[arg(long, default_value_t = 0)]
        derivatives: usize,
        #[arg(long, value_enum, default_value_t = Regimes::Auto)]
        regimes: Regimes,
    },
    /// Monte Carlo samples of I_Ψ (or of I(t) with --t).
    Mc {
        spec: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Finite horizon.
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, default_value_t = 1e-2)]
        dt: f64,
        /// JSON summary instead of the samples.
        #[arg(long)]
        summary: bool,
    },
    /// Compare Monte Carlo samples with the CSV written by `law`.
    McCompare {
        spec: PathBuf,
        /// CSV produced by `bgamma law`.
        #[arg(long)]
        law: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-2)]
        dt: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Run the invariant checks for the spec and print a JSON report.
    Verify { spec: PathBuf },
}

#[derive(clap::Args, Debug)]
struct Points {
    /// A point `re,im` (repeatable).
    #[arg(long = "z", value_parser = parse_point, allow_hyphen_values = true)]
    z: Vec<C>,
    /// Real parts `lo:hi:step` (with --im forms a product grid).
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    re: Option<Grid>,
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    im: Option<Grid>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Regimes {
    Auto,
    Inversion,
    Series,
    Tail,
}

impl From<Regimes> for RegimeChoice {
    fn from(r: Regimes) -> Self {
        match r {
            Regimes::Auto => RegimeChoice::Auto,
            Regimes::Inversion => RegimeChoice::Inversion,
            Regimes::Series => RegimeChoice::Series,
            Regimes::Tail => RegimeChoice::Tail,
        }
    }
}

#[derive(Clone, Debug)]
struct Grid(Vec<f64>);

fn parse_tol(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if t > 0.0 && t <= 1e-2 {
        Ok(t)
    } else {
        Err("tolerance must lie in (0, 1e-2]".into())
    }
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let nums = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}"));
    if s.contains(':') {
        let p: Vec<&str> = s.split(':').collect();
        if p.len() != 3 {
            return Err("expected lo:hi:step".into());
        }
        let (lo, hi, step) = (nums(p[0])?, nums(p[1])?, nums(p[2])?);
        if !(step > 0.0) || hi < lo {
            return Err("need step > 0 and hi ≥ lo".into());
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        Ok(Grid((0..=n).map(|k| lo + k as f64 * step).collect()))
    } else {
        s.split(',').map(nums).collect::<Result<Vec<_>, _>>().map(Grid)
    }
}

fn parse_point(s: &str) -> Result<C, String> {
    let p: Vec<&str> = s.split(',').collect();
    let f = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    match p.as_slice() {
        [re] => Ok(C::new(f(re)?, 0.0)),
        [re, im] => Ok(C::new(f(re)?, f(im)?)),
        _ => Err("expected re or re,im".into()),
    }
}

impl Points {
    fn all(&self) -> Result<Vec<C>, Error> {
        let mut v = self.z.clone();
        match (&self.re, &self.im) {
            (Some(r), Some(i)) => {
                for a in &r.0 {
                    for b in &i.0 {
                        v.push(C::new(*a, *b));
                    }
                }
            }
            (Some(r), None) => v.extend(r.0.iter().map(|a| C::new(*a, 0.0))),
            (None, Some(_)) => return Err(Error::InvalidInput("--im needs --re".into())),
            (None, None) => {}
        }
        if v.is_empty() {
            return Err(Error::InvalidInput("no points given (use --z or --re/--im)".into()));
        }
        Ok(v)
    }
}

/// Failure of a command: input problems exit 1, numerical ones 2.
enum Failure {
    Lib(Error),
    Io(String),
    Checks(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn load(spec: &Path) -> Result<(SpecFile, Header), Failure> {
    let bytes = std::fs::read(spec).map_err(|e| Failure::Io(format!("{}: {e}", spec.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Error::Parse("spec is not UTF-8".into()))?;
    Ok((SpecFile::parse(&text)?, Header::new(&bytes)))
}

fn law_of(spec: &SpecFile) -> Result<MellinLaw, Error> {
    let e = spec.process()?;
    match spec.pair()? {
        Some(p) => {
            p.validate(&e)?;
            MellinLaw::from_pair(&e, p)
        }
        None => MellinLaw::new(&e),
    }
}

/// OLS slope of ln F̄ against ln x over the rows with F̄ in `window`.
fn grid_tail_slope(g: &DensityGrid, window: (f64, f64)) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        g.x.iter().zip(&g.tail).filter(|(_, &t)| t >= window.0 && t <= window.1).map(|(&x, &t)| (x.ln(), t.ln())).collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2)));
    Some(sxy / sxx)
}

fn inv_cfg(tol: f64) -> InversionConfig {
    InversionConfig::with_tol(tol)
}

fn run(cli: Cli) -> Result<(), Failure> {
    if cli.schema {
        let mut sink = Sink::new(cli.output.as_deref())?;
        sink.line(&serde_json::to_string_pretty(&output::schema()).expect("static schema"))?;
        return Ok(sink.flush()?);
    }
    let Some(cmd) = cli.command else {
        return Err(Failure::Lib(Error::InvalidInput("no subcommand given (see --help)".into())));
    };
    let mut sink = Sink::new(cli.output.as_deref())?;
    let say = |m: &str| {
        if cli.verbose > 0 {
            eprintln!("{m}");
        }
    };
    match cmd {
        Command::Factorize { spec, report } => {
            let (sf, header) = load(&spec)?;
            let e = sf.process()?;
            say("factorizing");
            let pair = wiener_hopf::factorize(&e)?;
            let residual = pair.identity_residual(&e);
            let doc = SpecFile::from_process(&e).with_pair(&pair);
            sink.line(&header.comment())?;
            sink.raw(&doc.to_toml_string()?)?;
            let rep = json!({
                "header": header.json(),
                "class_tag": pair.class_tag,
                "identity_residual": residual,
                "grid_points": identity_grid().len(),
                "tolerance": IDENTITY_TOL,
                "pass": residual <= IDENTITY_TOL,
                "phi_plus_zero": pair.phi_plus.kappa,
                "phi_minus_zero": pair.phi_minus.kappa,
            });
            let text = serde_json::to_string_pretty(&rep).expect("json");
            match report {
                Some(p) => std::fs::write(p, text + "\n")?,
                None => eprintln!("{text}"),
            }
        }
        Command::Wgamma { spec, points } => {
            let (sf, header) = load(&spec)?;
            let phi = sf.bernstein()?;
            let w = BernsteinGamma::new(phi.clone())?;
            sink.line(&header.comment())?;
            sink.line("re_z,im_z,re_W,im_W,ln_abs_W,ln_abs_W_stirling")?;
            for z in points.all()? {
                let v = match w.eval_extended(z)? {
                    Extended::Value(v) => v,
                    Extended::Pole { location, residue } => return Err(Error::NearPole { pole: location, residue }.into()),
                };
                let st = if z.re > 0.0 { log_abs_stirling(&phi, z)? } else { f64::NAN };
                sink.line(&format!("{},{},{},{},{},{}", z.re, z.im, v.re, v.im, v.norm().ln(), st))?;
            }
        }
        Command::Mellin { spec, points } => {
            let (sf, header) = load(&spec)?;
            let law = law_of(&sf)?;
            sink.line(&header.comment())?;
            sink.line("re_z,im_z,re_M,im_M,recurrence_residual")?;
            for z in points.all()? {
                let m = law.eval(z)?;
                let r = law.recurrence_residual(z).unwrap_or(f64::NAN);
                sink.line(&format!("{},{},{},{},{}", z.re, z.im, m.re, m.im, r))?;
            }
        }
        Command::Law { spec, x, derivatives, regimes } => {
            let (sf, header) = load(&spec)?;
            let law = law_of(&sf)?;
            say(&format!("inverting on {} points", x.0.len()));
            let g = inversion::density_grid(&law, &x.0, derivatives, regimes.into(), &inv_cfg(cli.tol))?;
            sink.line(&header.comment())?;
            let mut cols = "x,f,F,Fbar,regime,err_est".to_string();
            for k in 1..=derivatives {
                cols += &format!(",f{k}");
            }
            sink.line(&cols)?;
            for i in 0..g.x.len() {
                let mut row = format!("{},{},{},{},{},{}", g.x[i], g.f[i], g.cdf[i], g.tail[i], g.regime[i], g.err_est[i]);
                for d in &g.derivatives {
                    row += &format!(",{}", d[i]);
                }
                sink.line(&row)?;
            }
        }
        Command::Mc { spec, n, seed, t, dt, summary } => {
            let (sf, header) = load(&spec)?;
            let s = PathSampler::new(sf.process()?, seed).with_dt(dt);
            say(&format!("sampling {n} paths"));
            let emp = match t {
                Some(t) => simulate::sample_finite_horizon(&s, t, n)?,
                None => simulate::sample_functional(&s, n)?,
            };
            if summary {
                let q = |p: f64| emp.quantile(p);
                let rep = json!({
                    "header": header.json(),
                    "n": emp.n,
                    "seed": seed,
                    "horizon": t,
                    "dt": dt,
                    "moments": emp.moments,
                    "quantiles": { "0.01": q(0.01), "0.25": q(0.25), "0.5": q(0.5), "0.75": q(0.75), "0.99": q(0.99) },
                });
                sink.line(&serde_json::to_string_pretty(&rep).expect("json"))?;
            } else {
                sink.line(&header.comment())?;
                sink.line("I")?;
                for x in &emp.raw {
                    sink.line(&x.to_string())?;
                }
            }
        }
        Command::McCompare { spec, law, n, seed, dt, alpha } => {
            let (sf, header) = load(&spec)?;
            let ml = law_of(&sf)?;
            let grid = output::read_law_csv(&law)?;
            let s = PathSampler::new(sf.process()?, seed).with_dt(dt);
            let mut emp = simulate::sample_functional(&s, n)?;
            let mut cfg = CompareConfig { alpha, ..Default::default() };
            // the asymptotic exponent is only reached far out; compare with the
            // slope of the tabulated tail over the same window instead
            let asymptotic = inversion::cramer_tail(&ml, 0).ok().map(|cr| cr.theta);
            if asymptotic.is_some() {
                cfg.tail_target = grid_tail_slope(&grid, cfg.tail_window);
            }
            for k in [1, 2] {
                if let Ok(m) = ml.moment_by_recurrence(k) {
                    cfg.moments.push((k as f64, m));
                }
            }
            let r = simulate::compare(&grid, &mut emp, &cfg)?;
            let rep = json!({ "header": header.json(), "seed": seed, "tail_asymptotic": asymptotic, "report": r });
            sink.line(&serde_json::to_string_pretty(&rep).expect("json"))?;
            if !r.pass {
                sink.flush()?;
                return Err(Failure::Checks("comparison failed".into()));
            }
        }
        Command::Verify { spec } => {
            let (sf, header) = load(&spec)?;
            let rep = verify::run(&sf, cli.tol)?;
            let pass = rep.iter().all(|c| c.pass);
            let doc = json!({ "header": header.json(), "checks": rep, "pass": pass });
            sink.line(&serde_json::to_string_pretty(&doc).expect("json"))?;
            if !pass {
                sink.flush()?;
                return Err(Failure::Checks("some checks failed".into()));
            }
        }
    }
    sink.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 2 } else { 1 })
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Checks(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
