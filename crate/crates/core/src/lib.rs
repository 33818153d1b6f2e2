//! Least Angle Regression with exact post-selection spacing tests.
//!
//! The numeric code is generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix the scalar to `f64`.

// `!(x > y)` is used on purpose so NaN inputs fall into the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conditional;
pub mod error;
pub mod inference;
pub mod lar;
pub mod model;
pub mod multiple;
pub mod quadrature;
pub mod real;
pub mod special;

pub use error::{LarError, Result};
pub use inference::{Method, NoiseScale, Outcome, Refusal, RuleTag, SelectionRule, Stages};
pub use lar::{Formulation, PathStatus};
pub use model::SignedIndex;
pub use quadrature::{LatticeRule, QmcBudget};
pub use real::Real;

pub type DesignMatrix = model::DesignMatrix<f64>;
pub type ResponseVector = model::ResponseVector<f64>;
pub type CorrelationState = model::CorrelationState<f64>;
pub type ActiveSequence = model::ActiveSequence<f64>;
pub type LarPath = lar::LarPath<f64>;
pub type FrozenGeometry = conditional::FrozenGeometry<f64>;
pub type QmcEstimate = quadrature::QmcEstimate<f64>;
pub type VarianceSplit = inference::VarianceSplit<f64>;
pub type PValueReport = inference::PValueReport<f64>;
pub type SelectionDecision = inference::SelectionDecision<f64>;
pub type FalseNegativeResult = inference::FalseNegativeResult<f64>;
pub type PValueSequence = multiple::PValueSequence<f64>;
pub type RejectionSet = multiple::RejectionSet<f64>;
