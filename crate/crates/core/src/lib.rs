//! Feature ranking for high-dimensional classification data.
//!
//! Two multivariate rankers score each attribute by how well it works in
//! pairs with every other attribute: [`pairwise_correlation`] uses the CFS
//! merit of two-attribute subsets and [`pairwise_consistency`] the consistency
//! rate. Univariate baselines, ReliefF, an MDL discretizer and a small
//! cross-validation and significance-testing harness are included.

pub mod baselines;
pub mod classifiers;
pub mod cli;
pub mod compare;
pub mod dataset;
pub mod discretize;
pub mod error;
pub mod eval;
pub mod metrics;
pub mod pairwise;
pub mod pairwise_consistency;
pub mod pairwise_correlation;
pub mod ranking;

pub use classifiers::{ClassifierSpec, Learner};
pub use dataset::{ClassSpec, Dataset};
pub use error::{Error, Result};
pub use pairwise::PairwiseOptions;
pub use ranking::Ranking;
