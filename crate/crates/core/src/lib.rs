//! Quantile factor models with characteristic-driven intercepts and loadings.
//!
//! The estimator runs a cross-sectional quantile regression of returns on a
//! sieve expansion of characteristics in every period, stacks the coefficient
//! vectors into a `P x T` matrix and extracts intercepts, loadings and factors
//! from it by principal components. Around that core the crate provides
//! factor-number selection, a weighted bootstrap (including a test of a zero
//! intercept function), a Monte Carlo harness with the three benchmark data
//! generating processes, and an R² suite for evaluating extracted factors.
//!
//! ```no_run
//! use qrpca::{estimate, panel::{self, Schema}, sieve::{Basis, BasisSpec}};
//!
//! let panel = panel::load_panel("panel.csv", &Schema::default())?;
//! let spec: BasisSpec = serde_json::from_str(r#"{"family":"polynomial","degree":2,"intercept":true}"#)?;
//! let basis = Basis::for_panel(&spec, &panel)?;
//! let stage = estimate::stage_one(&panel, &basis, 0.5)?;
//! let fit = estimate::fit(&stage, 2)?;
//! println!("{:?}", fit.eigvals);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod bootstrap;
pub mod cli;
pub mod error;
pub mod estimate;
pub mod evaluate;
pub mod mc;
pub mod panel;
pub mod qreg;
pub mod rng;
pub mod selectk;
pub mod sieve;
pub mod spectral;

pub use error::{Error, ErrorKind, Result};
pub use estimate::{fit, stage_one, QrpcaFit, StageOne};
pub use panel::{CrossSection, Panel};
pub use sieve::{Basis, BasisSpec};
