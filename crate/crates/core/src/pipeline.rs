//! End-to-end analysis of one baseline/failure pair.

use thiserror::Error;

use crate::diff::{diff_traces, extract_sibs, DiffError, DiffOptions, Hunk, Sib};
use crate::rank::{rank, RankError, RankedCandidate};
use crate::scalar::ScoreScalar;
use crate::tree::{build_failure_tree, FailureCallTree, TreeError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Rank(#[from] RankError),
}

#[derive(Debug, Clone)]
pub struct Analysis<T> {
    pub hunks: Vec<Hunk>,
    pub sibs: Vec<Sib>,
    pub tree: FailureCallTree,
    pub ranking: Vec<RankedCandidate<T>>,
}

/// Diff, SIB extraction, failure call tree and ranking in one go.
/// Identical traces surface as [`TreeError::NoSibs`].
pub fn analyze<T: ScoreScalar>(
    baseline: &crate::Trace,
    failure: &crate::Trace,
    options: DiffOptions,
) -> Result<Analysis<T>, AnalysisError> {
    let hunks = diff_traces(baseline, failure, options)?;
    let sibs = extract_sibs(&hunks, baseline, failure);
    let tree = build_failure_tree(failure, &sibs)?;
    let ranking = rank(&tree, &failure.app_package)?;
    Ok(Analysis {
        hunks,
        sibs,
        tree,
        ranking,
    })
}
