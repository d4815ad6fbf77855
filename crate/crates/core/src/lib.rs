//! Stacking ensemble with an aggregation-based attention layer.
//!
//! Six first-layer classifiers produce out-of-fold class probabilities.
//! Three of them are fused per sample by the dependent OWA operator, the
//! other three by an OWA operator whose weights are learned by gradient
//! descent. A selection layer keeps the fused vector with the larger class
//! margin and a ridge classifier makes the final decision.
//!
//! Module map:
//!
//! - [`owa`]: DOWA and IOWA operators
//! - [`screening`]: bootstrap-forest feature contributions
//! - [`learners`]: the six first-layer classifiers
//! - [`prediction`]: out-of-fold probability tables
//! - [`ensemble`]: grouping, attention, selection, ridge meta-learner
//! - [`metrics`]: confusion metrics, ROC and AUC
//! - [`pipeline`]: the cross-validated experiment and its artifacts
//! - [`cli`]: the `owa-fusion` command line

pub mod cli;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod folds;
pub mod learners;
pub mod metrics;
pub mod owa;
pub mod pipeline;
pub mod prediction;
pub mod screening;
pub mod stats;
pub mod tree;

pub use error::{Error, Result};
