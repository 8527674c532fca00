//! Experiment files: a TOML document (JSON accepted) describing a Lévy
//! process, a factor pair or a single Bernstein function.
//!
//! ```toml
//! sigma2 = 2.0
//! gamma = 1.0
//! kill_rate = 0.0
//! compensation = "none"        # or "unit"
//!
//! [[levy_measure]]
//! side = "down"                # "up" or "down"
//! kind = "exponential"         # exponential | atom | tabulated
//! weight = 1.0
//! rate = 2.0
//!
//! [phi_plus]                   # optional factor pair
//! kappa = 0.0
//! delta = 1.0
//! measure = [{ kind = "atom", weight = 0.5, location = 1.0 }]
//!
//! [bernstein]                  # optional single φ
//! kappa = 0.0
//! delta = 1.0
//! ```
//!
//! Unknown keys are rejected everywhere.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy_model::{BernsteinFunction, Compensation, Component, LevyExponent, Measure};
use crate::wiener_hopf::{ClassTag, FactorPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Exponential,
    Atom,
    Tabulated,
}

/// One jump component with its side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpSpec {
    pub side: Side,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<Vec<f64>>,
}

impl JumpSpec {
    fn need<T: Clone>(v: &Option<T>, key: &str, kind: Kind) -> Result<T> {
        v.clone().ok_or_else(|| Error::Parse(format!("{kind:?} jump needs `{key}`")))
    }

    pub fn component(&self) -> Result<Component> {
        let k = self.kind;
        let extra = |keys: &[(&str, bool)]| -> Result<()> {
            match keys.iter().find(|(_, set)| *set) {
                Some((key, _)) => Err(Error::Parse(format!("`{key}` is not a parameter of a {k:?} jump"))),
                None => Ok(()),
            }
        };
        match k {
            Kind::Exponential => {
                extra(&[("location", self.location.is_some()), ("grid", self.grid.is_some()), ("tail", self.tail.is_some())])?;
                Ok(Component::Exponential { weight: Self::need(&self.weight, "weight", k)?, rate: Self::need(&self.rate, "rate", k)? })
            }
            Kind::Atom => {
                extra(&[("rate", self.rate.is_some()), ("grid", self.grid.is_some()), ("tail", self.tail.is_some())])?;
                Ok(Component::Atom { weight: Self::need(&self.weight, "weight", k)?, location: Self::need(&self.location, "location", k)? })
            }
            Kind::Tabulated => {
                extra(&[("weight", self.weight.is_some()), ("rate", self.rate.is_some()), ("location", self.location.is_some())])?;
                Ok(Component::Tabulated { grid: Self::need(&self.grid, "grid", k)?, tail: Self::need(&self.tail, "tail", k)? })
            }
        }
    }

    pub fn from_component(side: Side, c: &Component) -> Self {
        let mut j = JumpSpec { side, kind: Kind::Exponential, weight: None, rate: None, location: None, grid: None, tail: None };
        match c {
            Component::Exponential { weight, rate } => {
                j.weight = Some(*weight);
                j.rate = Some(*rate);
            }
            Component::Atom { weight, location } => {
                j.kind = Kind::Atom;
                j.weight = Some(*weight);
                j.location = Some(*location);
            }
            Component::Tabulated { grid, tail } => {
                j.kind = Kind::Tabulated;
                j.grid = Some(grid.clone());
                j.tail = Some(tail.clone());
            }
        }
        j
    }
}

/// `φ(z) = κ + δz + ∫(1 − e^{−zy})μ(dy)` as written in a file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BernsteinSpec {
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub measure: Vec<Component>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl BernsteinSpec {
    pub fn build(&self) -> Result<BernsteinFunction> {
        let mut m = Measure::new(self.measure.clone())?;
        m.alpha = self.alpha;
        BernsteinFunction::new(self.kappa, self.delta, m)
    }

    pub fn from_function(f: &BernsteinFunction) -> Self {
        BernsteinSpec { kappa: f.kappa, delta: f.delta, measure: f.measure.components.clone(), alpha: f.measure.alpha }
    }
}

/// Parsed experiment file. All sections are optional; accessors report
/// what is missing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kill_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compensation: Option<Compensation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levy_measure: Vec<JumpSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_plus: Option<BernsteinSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_minus: Option<BernsteinSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_tag: Option<ClassTag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bernstein: Option<BernsteinSpec>,
}

impl SpecFile {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    /// JSON if the document starts with `{`, TOML otherwise.
    pub fn parse(s: &str) -> Result<Self> {
        if s.trim_start().starts_with('{') {
            Self::from_json_str(s)
        } else {
            Self::from_toml_str(s)
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&s)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json_string(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn has_process(&self) -> bool {
        self.sigma2.is_some() || self.gamma.is_some() || self.kill_rate.is_some() || !self.levy_measure.is_empty()
    }

    pub fn process(&self) -> Result<LevyExponent> {
        if !self.has_process() {
            return Err(Error::Parse("no process given (sigma2, gamma, kill_rate, levy_measure)".into()));
        }
        let (mut up, mut down) = (Vec::new(), Vec::new());
        for j in &self.levy_measure {
            match j.side {
                Side::Up => up.push(j.component()?),
                Side::Down => down.push(j.component()?),
            }
        }
        let mut e = LevyExponent::new(
            self.sigma2.unwrap_or(0.0),
            self.gamma.unwrap_or(0.0),
            self.kill_rate.unwrap_or(0.0),
            Measure::new(up)?,
            Measure::new(down)?,
        )?;
        e.compensation = self.compensation.unwrap_or_default();
        Ok(e)
    }

    pub fn pair(&self) -> Result<Option<FactorPair>> {
        match (&self.phi_plus, &self.phi_minus) {
            (None, None) => Ok(None),
            (Some(p), Some(m)) => Ok(Some(FactorPair {
                phi_plus: p.build()?,
                phi_minus: m.build()?,
                normalization: self.normalization.unwrap_or(1.0),
                class_tag: self.class_tag.unwrap_or(ClassTag::Explicit),
            })),
            _ => Err(Error::Parse("a factor pair needs both phi_plus and phi_minus".into())),
        }
    }

    /// The single Bernstein function: `[bernstein]`, else `[phi_plus]`.
    pub fn bernstein(&self) -> Result<BernsteinFunction> {
        match (&self.bernstein, &self.phi_plus) {
            (Some(b), _) | (None, Some(b)) => b.build(),
            _ => Err(Error::Parse("no [bernstein] or [phi_plus] section".into())),
        }
    }

    pub fn from_process(e: &LevyExponent) -> Self {
        let mut s = SpecFile {
            sigma2: Some(e.sigma2),
            gamma: Some(e.gamma),
            kill_rate: Some(e.kill_rate),
            compensation: (e.compensation != Compensation::None).then_some(e.compensation),
            ..Default::default()
        };
        s.levy_measure.extend(e.pi_plus.components.iter().map(|c| JumpSpec::from_component(Side::Up, c)));
        s.levy_measure.extend(e.pi_minus.components.iter().map(|c| JumpSpec::from_component(Side::Down, c)));
        s
    }

    pub fn with_pair(mut self, p: &FactorPair) -> Self {
        self.phi_plus = Some(BernsteinSpec::from_function(&p.phi_plus));
        self.phi_minus = Some(BernsteinSpec::from_function(&p.phi_minus));
        self.normalization = Some(p.normalization);
        self.class_tag = Some(p.class_tag);
        self
    }

    pub fn from_bernstein(f: &BernsteinFunction) -> Self {
        SpecFile { bernstein: Some(BernsteinSpec::from_function(f)), ..Default::default() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"
sigma2 = 1.0
gamma = 0.5
kill_rate = 0.25

[[levy_measure]]
side = "up"
kind = "exponential"
weight = 1.0
rate = 3.0

[[levy_measure]]
side = "down"
kind = "atom"
weight = 0.5
location = 0.7
"#;

    #[test]
    fn parses_process() {
        let s = SpecFile::from_toml_str(DOC).unwrap();
        let e = s.process().unwrap();
        assert_eq!(e.sigma2, 1.0);
        assert_eq!(e.kill_rate, 0.25);
        assert_eq!(e.pi_plus, Measure::exponential(1.0, 3.0));
        assert_eq!(e.pi_minus, Measure::atom(0.5, 0.7));
        let back = SpecFile::from_process(&e);
        assert_eq!(back.process().unwrap(), e);
        let json = back.to_json_string().unwrap();
        assert_eq!(SpecFile::parse(&json).unwrap(), back);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(SpecFile::from_toml_str("sigma = 1.0").is_err());
        let bad = DOC.replace("rate = 3.0", "rate = 3.0\nshape = 2.0");
        assert!(SpecFile::from_toml_str(&bad).is_err());
        let wrong = DOC.replace("location = 0.7", "location = 0.7\nrate = 1.0");
        assert!(matches!(SpecFile::from_toml_str(&wrong).unwrap().process(), Err(Error::Parse(_))));
        assert!(SpecFile::from_toml_str("[bernstein]\nkappa = 1\ndelta = 1\nmu = 2").is_err());
    }

    #[test]
    fn pair_round_trip() {
        let p = FactorPair {
            phi_plus: BernsteinFunction::new(0.5, 1.0, Measure::exponential(2.0, 1.5)).unwrap(),
            phi_minus: BernsteinFunction::affine(1.0, 0.25),
            normalization: 2.0,
            class_tag: ClassTag::Rational,
        };
        let s = SpecFile::from_process(&LevyExponent::brownian(0.5, 1.0, 0.0)).with_pair(&p);
        let t = s.to_toml_string().unwrap();
        let back = SpecFile::from_toml_str(&t).unwrap();
        assert_eq!(back.pair().unwrap().unwrap(), p);
    }

    #[test]
    fn bernstein_section() {
        let s = SpecFile::from_toml_str("[bernstein]\ndelta = 1.0\nmeasure = [{ kind = \"exponential\", weight = 1.0, rate = 2.0 }]").unwrap();
        let f = s.bernstein().unwrap();
        assert_eq!(f.delta, 1.0);
        assert!(s.process().is_err());
    }
}
