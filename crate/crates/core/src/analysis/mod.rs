//! Corpus-level statistics: contingency tables, tests of independence,
//! Cramér's V and classifier validation metrics.

mod association;
mod confusion;
mod contingency;

pub use association::{
    association_test, chisq_independence, chisq_independence_with, cramers_v, cramers_v_ci,
    fisher_exact_mc, pearson_chi_square, AssociationMethod, AssociationResult, VCiMethod,
    DEFAULT_BOOTSTRAP_REPLICATES, DEFAULT_REPLICATES, DEFAULT_SEED, MIN_EXPECTED,
};
pub use confusion::{binomial_upper_tail, clopper_pearson, confusion_metrics, ConfusionMetrics};
pub use contingency::{
    build_contingency, Classified, ContingencyTable, Dimension, EffectSizeReporting, PaperRecord,
    TestRecord,
};
