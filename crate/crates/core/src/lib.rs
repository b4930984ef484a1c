//! Fix-locus localization for incompatibilities introduced by framework
//! upgrades.
//!
//! Given the boundary-call trace of a test that passes on the old framework
//! and the trace of the same test failing on the new one, the crate diffs
//! the two traces into weighted Suspicious Invocation Blocks (SIBs), builds
//! the failure call tree, and ranks the app methods that most likely need a
//! change, each with the SIBs that support it.
//!
//! Scores are generic over [`ScoreScalar`]; the aliases below fix the
//! scalar to `f64` for everyday use and to exact rationals for checks.

pub mod baselines;
pub mod diff;
pub mod io;
pub mod model;
pub mod pipeline;
pub mod rank;
pub mod scalar;
pub mod synth;
pub mod tree;

pub use diff::{
    diff_traces, extract_sibs, project_keys, DiffError, DiffKey, DiffOptions, Hunk, HunkKind, Sib,
};
pub use io::{
    filter_boundary_methods, normalize_value, parse_trace, parse_trace_str, write_trace,
    MethodList, Normalizer, TraceIoError,
};
pub use model::{
    validate_trace, Direction, MethodRef, Origin, ReturnValue, StackFrame, Trace, TraceEvent,
    Violation,
};
pub use pipeline::{analyze, AnalysisError};
pub use rank::{emit_csv, RankError};
pub use scalar::ScoreScalar;
pub use tree::{build_failure_tree, emit_dot, reachable_sibs, FailureCallTree, TreeError};

/// Exact rational scores.
pub type Exact = num_rational::Ratio<u64>;

pub type NodeScore = rank::NodeScore<f64>;
pub type ExactNodeScore = rank::NodeScore<Exact>;
pub type RankedCandidate = rank::RankedCandidate<f64>;
pub type ExactRankedCandidate = rank::RankedCandidate<Exact>;
pub type Analysis = pipeline::Analysis<f64>;
