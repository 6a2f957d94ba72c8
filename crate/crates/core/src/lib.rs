//! Orlicz premia: evaluation, strictly consistent scoring, Murphy diagrams
//! and optimized return risk measures.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix it to `f64`.

// `!(a > b)` is deliberate throughout: NaN must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dist;
pub mod error;
pub mod io;
pub mod murphy;
pub mod orliczfn;
pub mod orrisk;
pub mod premium;
pub mod quadrature;
pub mod scalar;
pub mod scoring;

pub use error::{Error, Result};
pub use orliczfn::{catalog_lookup, lambert_w, OrliczKind, PhiParams, ShapeFlags, CATALOG};
pub use premium::{orlicz_premium, PremiumMethod};
pub use scalar::Scalar;
pub use scoring::{mean_score, verify_consistency, Weight};

pub type Distribution = dist::DiscreteDistribution<f64>;
pub type Sample = dist::Sample<f64>;
pub type OrliczFunction = orliczfn::OrliczFunctionSpec<f64>;
pub type Params = PhiParams<f64>;
pub type Premium = premium::PremiumResult<f64>;
pub type ScoringFamily = scoring::ScoringFamily<f64>;
pub type ScoreReport = scoring::ScoreReport<f64>;
pub type ElementaryKind = murphy::ElementaryKind<f64>;
pub type MurphyCurve = murphy::MurphyCurve<f64>;
pub type OrResult = orrisk::ORResult<f64>;
pub type AverageValueAtRisk = orrisk::ScaledExpectation<f64>;
pub type HgInner = orrisk::HaezendonckGoovaerts<f64>;
