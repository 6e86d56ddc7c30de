//! Fuzzy beta-certain and beta-possible rule mining from incomplete
//! quantitative data with the variable-precision rough-set model.
//!
//! Missing values are estimated while the approximations are built. The
//! usual flow is [`dataset::load_dataset_path`] and
//! [`dataset::fuzzify_dataset`], then
//! [`approximation::run_imputation_pipeline`], then [`rules::mine_rules`].

pub mod approximation;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod membership;
pub mod partitions;
pub mod rules;

pub use approximation::{run_imputation_pipeline, ImputationOutcome, ImputationRecord, Phase};
pub use dataset::{
    fuzzify_dataset, load_dataset, load_dataset_path, load_prefuzzified, load_prefuzzified_path,
    ClassPartition, FuzzyCell, FuzzyDataset, FuzzyObject, LoadOptions, RawDataset,
};
pub use error::{Error, Result};
pub use membership::{FuzzyValue, MembershipFunction, MembershipFunctionSet};
pub use partitions::{IncompleteEquivalenceClass, RegionCombination, Tag};
pub use rules::{classify, mine_rules, Beta, FuzzyRule, Prediction, RuleKind, RuleSet};

/// Slack for comparisons against beta and between rule measures.
pub const TOLERANCE: f64 = 1e-9;
