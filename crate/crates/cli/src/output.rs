use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use bgamma::{DensityGrid, Error, Regime};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// Provenance stamped on every output.
pub struct Header {
    pub version: &'static str,
    pub spec_sha256: String,
}

impl Header {
    pub fn new(spec: &[u8]) -> Self {
        let digest = Sha256::digest(spec);
        let spec_sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
        Header { version: bgamma::VERSION, spec_sha256 }
    }

    pub fn comment(&self) -> String {
        format!("# bgamma {} spec-sha256 {}", self.version, self.spec_sha256)
    }

    pub fn json(&self) -> Value {
        json!({ "library": "bgamma", "version": self.version, "spec_sha256": self.spec_sha256 })
    }
}

/// stdout or a file.
pub struct Sink(Box<dyn Write>);

impl Sink {
    pub fn new(path: Option<&Path>) -> io::Result<Self> {
        Ok(Sink(match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout())),
        }))
    }

    pub fn line(&mut self, s: &str) -> io::Result<()> {
        writeln!(self.0, "{s}")
    }

    pub fn raw(&mut self, s: &str) -> io::Result<()> {
        self.0.write_all(s.as_bytes())
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.0.flush()
    }
}

/// Read back the CSV written by `bgamma law`.
pub fn read_law_csv(path: &Path) -> Result<DensityGrid, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let head: Vec<&str> = lines.next().ok_or_else(|| Error::Parse("empty law file".into()))?.split(',').collect();
    let col = |name: &str| head.iter().position(|h| *h == name).ok_or_else(|| Error::Parse(format!("law file lacks column `{name}`")));
    let (cx, cf, cbf, cfb, creg, cerr) = (col("x")?, col("f")?, col("F")?, col("Fbar")?, col("regime")?, col("err_est")?);
    let mut g = DensityGrid { x: vec![], f: vec![], cdf: vec![], tail: vec![], derivatives: vec![], regime: vec![], err_est: vec![] };
    for (i, l) in lines.enumerate() {
        let cells: Vec<&str> = l.split(',').collect();
        let num = |k: usize| -> Result<f64, Error> {
            cells
                .get(k)
                .ok_or_else(|| Error::Parse(format!("row {}: too few columns", i + 1)))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", i + 1)))
        };
        g.x.push(num(cx)?);
        g.f.push(num(cf)?);
        g.cdf.push(num(cbf)?);
        g.tail.push(num(cfb)?);
        g.err_est.push(num(cerr)?);
        g.regime.push(match cells.get(creg).copied() {
            Some("inversion") => Regime::Inversion,
            Some("small_series") => Regime::SmallSeries,
            Some("cramer_tail") => Regime::CramerTail,
            other => return Err(Error::Parse(format!("row {}: unknown regime {other:?}", i + 1))),
        });
    }
    if g.x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parse("law file x column must be increasing".into()));
    }
    Ok(g)
}

/// Machine-readable description of every output.
pub fn schema() -> Value {
    let num = |d: &str| json!({ "type": "number", "description": d });
    json!({
        "header": {
            "csv": "first line `# bgamma <version> spec-sha256 <hex>`",
            "json": { "header": { "library": "string", "version": "string", "spec_sha256": "hex string" } }
        },
        "wgamma": { "format": "csv", "columns": [
            ["re_z", num("real part of z")], ["im_z", num("imaginary part of z")],
            ["re_W", num("Re W_φ(z)")], ["im_W", num("Im W_φ(z)")],
            ["ln_abs_W", num("ln|W_φ(z)|")], ["ln_abs_W_stirling", num("ln|W_φ(z)| from the exact Stirling-type representation (NaN for Re z ≤ 0)")]
        ]},
        "mellin": { "format": "csv", "columns": [
            ["re_z", num("real part of z")], ["im_z", num("imaginary part of z")],
            ["re_M", num("Re M_Ψ(z) = Re E[I^{z−1}]")], ["im_M", num("Im M_Ψ(z)")],
            ["recurrence_residual", num("|M(z+1)Ψ(−z) + zM(z)| relative to the size of the terms")]
        ]},
        "law": { "format": "csv", "columns": [
            ["x", num("abscissa")], ["f", num("density (cell average in the L² regime)")],
            ["F", num("P(I ≤ x)")], ["Fbar", num("P(I > x)")],
            ["regime", { "type": "string", "enum": ["inversion", "small_series", "cramer_tail"] }],
            ["err_est", num("error estimate of F/Fbar (NaN for the asymptotic tail)")],
            ["f1..fn", num("density derivatives for --derivatives n")]
        ]},
        "mc": { "format": "csv or json (--summary)", "columns": [["I", num("one sample of I (or I(t)) per path, in path order")]],
                "summary": { "n": "integer", "seed": "integer", "horizon": "number or null", "dt": "number",
                             "moments": "[{order, mean, se}]", "quantiles": "object" } },
        "mc-compare": { "format": "json", "report": {
            "n": "integer", "ks_stat": "number", "ks_critical": "number", "ks_pvalue": "number", "ks_pass": "bool",
            "moments": "[{order, empirical, se, analytic, z, pass}]", "tail_slope": "number or null",
            "tail_target": "number or null", "tail_pass": "bool or null", "pass": "bool" } },
        "factorize": { "format": "toml spec with [phi_plus], [phi_minus], normalization, class_tag; JSON report on --report or stderr" },
        "verify": { "format": "json", "checks": "[{name, value, tolerance, pass, note}]", "pass": "bool" },
        "exit_codes": { "0": "success", "1": "invalid input", "2": "numerical failure or failed checks" },
        "environment": { "BGAMMA_TOL": "default for --tol, in (0, 1e-2]" }
    })
}
