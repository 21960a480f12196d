//! Matched-pair validation and the statistics behind it.

pub mod matching;
pub mod stats;

pub use matching::{
    check_eligible, find_match, match_all, CriteriaCheck, MatchCriteria, MatchOutcome, MatchedPair, Matcher,
};
pub use stats::{
    cohens_d, cohens_d_at, cohens_d_interval, d_to_r, fisher_interval, normal_critical, pair_dominance_fraction,
    pearson_with_ci, spearman, CorrelationResult, Dominance, EffectSize,
};
