//! Bootstrap estimation of the VC dimension of linear regression models and
//! model selection with the fitted dimension.
//!
//! The pipeline: resample a dataset at several subsample sizes to build a
//! xi curve ([`xi::xi_curve`]), fit the bound curve to it ([`vcfit::fit_vc`]),
//! and compare `|q - d_hat|` across a nested model list
//! ([`modelselect::sweep`]) alongside ERM, AIC, BIC and cross-validation
//! scores.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod criteria;
pub mod data;
pub mod error;
pub mod io;
pub mod linmod;
pub mod minimize;
pub mod modelselect;
pub mod rng;
pub mod simgen;
pub mod vcfit;
pub mod xi;

pub use config::{BootstrapConfig, BoundPolicy, CGrid, Config, DesignPoints, DiscretizationConfig};
pub use data::{Blocks, Dataset};
pub use error::{Error, ErrorCategory, Result};
pub use modelselect::{sweep, NestedModelList, SelectionReport, SweepParams};
pub use vcfit::{fit_vc, VcEstimate};
pub use xi::{xi_curve, XiCurve};
