//! Bernstein-gamma functions and the law of exponential functionals
//! `I_Ψ = ∫₀^∞ e^{−ξ_s} ds` of Lévy processes.
//!
//! The pipeline: a [`LevyExponent`] is split into a Wiener–Hopf
//! [`FactorPair`], each factor gets a [`BernsteinGamma`] function, the
//! Mellin transform [`MellinLaw`] is assembled from those, and
//! [`inversion`] turns it into densities and distribution functions.
//! [`simulate`] is an independent Monte Carlo check.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bernstein_gamma;
pub mod error;
pub mod inversion;
pub mod levy_model;
pub mod mellin;
pub mod quadrature;
pub mod simulate;
pub mod spec_file;
pub mod wiener_hopf;

pub use bernstein_gamma::{BernsteinGamma, DecayClass, StirlingComponents};
pub use error::{Error, Result};
pub use inversion::{DensityGrid, InversionConfig, Inverted, Regime, RegimeChoice, Support};
pub use levy_model::{BernsteinFunction, Compensation, Component, LevyExponent, Measure};
pub use mellin::MellinLaw;
pub use simulate::{CompareConfig, CompareReport, EmpiricalLaw, PathSampler};
pub use spec_file::SpecFile;
pub use wiener_hopf::{ClassTag, FactorPair};

/// Library version, stamped into every CLI output header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
