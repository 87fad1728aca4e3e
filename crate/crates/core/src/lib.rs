//! Pattern statistics on clusters of lattice random fields.
//!
//! The crate samples q-state fields on finite windows of Z^d, labels the
//! occupied clusters, counts pattern occurrences on the origin's cluster,
//! computes exact cluster-size tails for site percolation on Z^2 by lattice
//! animal enumeration, and estimates tail constants and maximal-cluster laws.

pub mod cluster;
pub mod error;
pub mod estimators;
pub mod exact;
pub mod gumbel;
pub mod lattice;
pub mod pattern;
pub mod sampler;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Real, Scalar};

/// Exact tail in double precision.
pub type ExactTail64 = exact::ExactTail<f64>;
/// Exact tail in rational arithmetic.
pub type RationalTail = exact::ExactTail<num_rational::BigRational>;
pub type JointCountTable64 = exact::JointCountTable<f64>;
pub type RationalJointCountTable = exact::JointCountTable<num_rational::BigRational>;
pub type TailReport64 = estimators::TailReport<f64>;
pub type MuEstimates64 = estimators::MuEstimates<f64>;
pub type RatioLimitReport64 = estimators::RatioLimitReport<f64>;
pub type PatternPair64 = pattern::PatternPairContext<f64>;
