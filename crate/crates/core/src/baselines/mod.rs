//! Comparison techniques used to judge the fix-locus ranking: naive trace
//! inspection, Ochiai spectrum-based fault localization, and the Top-k
//! summary table.

mod naive;
mod ochiai;
mod topk;

pub use naive::naive_ranking;
pub use ochiai::{
    ochiai, parse_coverage_matrix, CoverageError, CoverageMatrix, TestCoverage, Verdict,
};
pub use topk::{achieved_rank, topk_report, ScenarioRankings, TopKCounts, TopKReport};
