use std::path::PathBuf;
use std::process::{Command, Output};

use bgamma::wiener_hopf;
use bgamma::SpecFile;

const KILLED_DRIFT: &str = "sigma2 = 0.0\ngamma = 1.0\nkill_rate = 1.0\n";
const IDENTITY: &str = "[bernstein]\nkappa = 0.0\ndelta = 1.0\nmeasure = []\n";
const BM: &str = "sigma2 = 1.0\ngamma = 0.5\nkill_rate = 0.5\n";

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bgamma-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn bgamma(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bgamma")).args(args).env_remove("BGAMMA_TOL").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().filter(|l| !l.starts_with('#')).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

#[test]
fn law_on_killed_drift_is_uniform() {
    let spec = scratch("kd.toml", KILLED_DRIFT);
    let o = bgamma(&["law", spec.to_str().unwrap(), "--x", "0.1:0.9:0.1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.starts_with("# bgamma "));
    let r = rows(&out);
    assert_eq!(r[0], ["x", "f", "F", "Fbar", "regime", "err_est"]);
    assert_eq!(r.len(), 10);
    for row in &r[1..] {
        let x: f64 = row[0].parse().unwrap();
        let f: f64 = row[2].parse().unwrap();
        assert!((f - x).abs() < 1e-8, "F({x}) = {f}");
    }
}

#[test]
fn verify_identity_bernstein_function() {
    let spec = scratch("id.toml", IDENTITY);
    let o = bgamma(&["verify", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
    assert!(v["checks"].as_array().unwrap().iter().any(|c| c["name"] == "gamma_recovery"));
}

#[test]
fn verify_process() {
    let spec = scratch("bm-verify.toml", BM);
    let o = bgamma(&["verify", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn mc_is_reproducible() {
    let spec = scratch("bm-mc.toml", BM);
    let run = || stdout(&bgamma(&["mc", spec.to_str().unwrap(), "--n", "200", "--seed", "11"]));
    let a = run();
    assert_eq!(a, run());
    assert_eq!(rows(&a).len(), 201);
    let other = stdout(&bgamma(&["mc", spec.to_str().unwrap(), "--n", "200", "--seed", "12"]));
    assert_ne!(a, other);
}

#[test]
fn factorize_round_trips() {
    let spec = scratch("bm-fact.toml", BM);
    let out = spec.with_extension("pair.toml");
    let rep = spec.with_extension("report.json");
    let o = bgamma(&["-o", out.to_str().unwrap(), "factorize", spec.to_str().unwrap(), "--report", rep.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let sf = SpecFile::from_toml_str(&text).unwrap();
    let orig = SpecFile::from_toml_str(BM).unwrap();
    assert_eq!(sf.process().unwrap(), orig.process().unwrap());
    let pair = sf.pair().unwrap().unwrap();
    assert_eq!(pair, wiener_hopf::factorize(&orig.process().unwrap()).unwrap());
    assert!((pair.phi_plus.kappa - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(r["pass"], true);

    // the written pair is accepted as input and gives the same law
    let a = stdout(&bgamma(&["law", out.to_str().unwrap(), "--x", "0.5,2"]));
    let b = stdout(&bgamma(&["law", spec.to_str().unwrap(), "--x", "0.5,2"]));
    let (a, b) = (rows(&a), rows(&b));
    for (ra, rb) in a[1..].iter().zip(&b[1..]) {
        let (fa, fb): (f64, f64) = (ra[2].parse().unwrap(), rb[2].parse().unwrap());
        assert!((fa - fb).abs() < 1e-9);
    }
}

#[test]
fn invalid_input_exits_one() {
    let bad = scratch("bad.toml", "foo = 1\n");
    assert_eq!(bgamma(&["law", bad.to_str().unwrap(), "--x", "0.5"]).status.code(), Some(1));
    let spec = scratch("kd-tol.toml", KILLED_DRIFT);
    assert_eq!(bgamma(&["--tol", "0.5", "law", spec.to_str().unwrap(), "--x", "0.5"]).status.code(), Some(1));
    assert_eq!(bgamma(&["--tol", "-1e-9", "law", spec.to_str().unwrap(), "--x", "0.5"]).status.code(), Some(1));
    assert_eq!(bgamma(&["law", "/nonexistent/spec.toml", "--x", "0.5"]).status.code(), Some(1));
}

#[test]
fn tolerance_from_environment() {
    let spec = scratch("kd-env.toml", KILLED_DRIFT);
    let run = |tol: &str| {
        Command::new(env!("CARGO_BIN_EXE_bgamma"))
            .args(["law", spec.to_str().unwrap(), "--x", "0.5"])
            .env("BGAMMA_TOL", tol)
            .output()
            .unwrap()
    };
    assert!(run("1e-6").status.success());
    assert_eq!(run("1").status.code(), Some(1));
}

#[test]
fn schema_and_help_describe_columns() {
    let o = bgamma(&["--schema"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for cmd in ["wgamma", "mellin", "law", "mc"] {
        assert!(v[cmd]["columns"].is_array(), "{cmd}");
    }
    let help = stdout(&bgamma(&["--help"]));
    assert!(help.contains("re_z, im_z, re_W, im_W, ln_abs_W, ln_abs_W_stirling"));
    assert!(help.contains("x, f, F, Fbar, regime, err_est"));
}

#[test]
fn wgamma_recovers_gamma() {
    let spec = scratch("id-w.toml", IDENTITY);
    let o = bgamma(&["wgamma", spec.to_str().unwrap(), "--z", "5,0", "--z", "0.5,0"]);
    let r = rows(&stdout(&o));
    let w5: f64 = r[1][2].parse().unwrap();
    let wh: f64 = r[2][2].parse().unwrap();
    assert!((w5 - 24.0).abs() < 1e-10);
    assert!((wh - std::f64::consts::PI.sqrt()).abs() < 1e-12);
}

#[test]
fn mc_compare_accepts_law_output() {
    let spec = scratch("bm-cmp.toml", BM);
    let law = spec.with_extension("csv");
    let xs: Vec<String> = (0..200).map(|i| format!("{:e}", 1e-3 * 2e5f64.powf(i as f64 / 199.0))).collect();
    let o = bgamma(&["-o", law.to_str().unwrap(), "law", spec.to_str().unwrap(), "--x", &xs.join(",")]);
    assert!(o.status.success());
    let o = bgamma(&["mc-compare", spec.to_str().unwrap(), "--law", law.to_str().unwrap(), "--n", "40000", "--seed", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}
