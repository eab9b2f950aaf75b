//! Shrinkage estimation in the two-level normal means model.
//!
//! The crate provides James–Stein, positive-part and ADM shrinkage rules
//! behind one abstraction ([`shrinkage`]), a numerical certifier for
//! Baranchik's minimaxity conditions ([`minimax`]), the generalized-Bayes
//! decomposition of the James–Stein factor and the divergence of its
//! implied prior ([`bayes`]), and a Monte Carlo risk engine with common
//! random numbers and an exact James–Stein oracle ([`risk`]).

pub mod bayes;
pub mod error;
pub mod figure1;
pub mod harness;
pub mod minimax;
pub mod model;
pub mod quadrature;
pub mod risk;
pub mod shrinkage;
pub mod special;
pub mod stream;

pub use error::{Error, Result};
pub use model::{ModelConfig, ObservationStats};
pub use shrinkage::{AdmParams, EstimatorKind, ShrinkageEstimator};
