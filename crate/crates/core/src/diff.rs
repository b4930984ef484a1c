//! Trace differencing and Suspicious Invocation Block extraction.
//!
//! Both traces are projected onto [`DiffKey`] sequences and aligned with a
//! longest-common-subsequence diff. Every maximal non-matching region becomes
//! a [`Hunk`]; each hunk becomes one [`Sib`] weighted by the number of
//! boundary calls it contains.
//!
//! Among all maximum-length alignments the diff picks the one whose matched
//! pairs are lexicographically smallest, i.e. each baseline element is
//! matched as early as possible. That makes the output a pure function of
//! the two key sequences.

use std::fmt;
use std::fmt::Write as _;
use std::ops::Range;

use thiserror::Error;

use crate::model::{Direction, MethodRef, ReturnValue, StackFrame, Trace, TraceEvent};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DiffError {
    #[error("traces belong to different apps: baseline `{baseline}`, failure `{failure}`")]
    AppMismatch { baseline: String, failure: String },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DiffOptions {
    /// Compare argument and return values in addition to direction and callee.
    pub value_sensitive: bool,
    /// Qualify keys with the thread id so events of different threads never
    /// align with each other.
    pub per_thread: bool,
}

impl DiffOptions {
    pub fn value_sensitive(value_sensitive: bool) -> Self {
        DiffOptions {
            value_sensitive,
            ..Default::default()
        }
    }
}

/// Projection of an event used as the sole notion of equality by the diff.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DiffKey {
    pub direction: Direction,
    pub callee: String,
    pub payload: Option<String>,
    pub thread: Option<u64>,
}

fn payload(ev: &TraceEvent) -> String {
    let mut s = ev.args.join("\u{1f}");
    s.push('\u{1e}');
    match &ev.ret {
        ReturnValue::Void => s.push_str("void"),
        ReturnValue::Unrecorded => s.push('?'),
        ReturnValue::Value(v) => {
            s.push('=');
            s.push_str(v);
        }
    }
    s
}

pub fn project_keys(trace: &Trace, options: DiffOptions) -> Vec<DiffKey> {
    trace
        .events
        .iter()
        .map(|ev| DiffKey {
            direction: ev.direction,
            callee: ev.callee.to_string(),
            payload: options.value_sensitive.then(|| payload(ev)),
            thread: options.per_thread.then_some(ev.thread),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HunkKind {
    /// Present only in the failure trace.
    Inserted,
    /// Present only in the baseline trace.
    Deleted,
    Replaced,
}

impl HunkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            HunkKind::Inserted => "INSERTED",
            HunkKind::Deleted => "DELETED",
            HunkKind::Replaced => "REPLACED",
        }
    }
}

impl fmt::Display for HunkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A maximal region where the two traces do not align. Spans are half-open
/// index ranges into the event lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hunk {
    pub kind: HunkKind,
    pub baseline_span: Range<usize>,
    pub failure_span: Range<usize>,
}

impl Hunk {
    /// Builds a hunk from two gap ranges, or `None` if both are empty.
    pub fn from_gap(baseline_span: Range<usize>, failure_span: Range<usize>) -> Option<Hunk> {
        let kind = match (baseline_span.is_empty(), failure_span.is_empty()) {
            (true, true) => return None,
            (true, false) => HunkKind::Inserted,
            (false, true) => HunkKind::Deleted,
            (false, false) => HunkKind::Replaced,
        };
        Some(Hunk {
            kind,
            baseline_span,
            failure_span,
        })
    }
}

/// Matched index pairs `(baseline, failure)` of the canonical LCS alignment.
///
/// Equal leading elements are matched directly. The remainder is solved with
/// a suffix-LCS table where only the move decision of each mismatching cell
/// is retained, one bit per cell. On ties the walk advances in the failure
/// sequence, which keeps the current baseline element available for an
/// earlier match.
pub fn lcs_pairs<T: PartialEq>(baseline: &[T], failure: &[T]) -> Vec<(usize, usize)> {
    let prefix = baseline
        .iter()
        .zip(failure)
        .take_while(|(a, b)| a == b)
        .count();
    let mut pairs: Vec<(usize, usize)> = (0..prefix).map(|i| (i, i)).collect();

    let a = &baseline[prefix..];
    let b = &failure[prefix..];
    let (n, m) = (a.len(), b.len());
    if n == 0 || m == 0 {
        return pairs;
    }

    // advance_failure[i * m + j] is set when a[i] != b[j] and a[i] can still
    // be matched in some optimal alignment of a[i..] with b[j..]. The walk
    // then skips b[j], so each baseline element takes the earliest feasible
    // partner.
    let mut advance_failure = vec![0u64; (n * m).div_ceil(64)];
    let mut below = vec![0u32; m + 1];
    let mut row = vec![0u32; m + 1];
    for i in (0..n).rev() {
        row[m] = 0;
        let mut matchable = false;
        for j in (0..m).rev() {
            if a[i] == b[j] {
                row[j] = below[j + 1] + 1;
                matchable = true;
            } else {
                row[j] = row[j + 1].max(below[j]);
                matchable = matchable && row[j + 1] == row[j];
                if matchable {
                    let bit = i * m + j;
                    advance_failure[bit / 64] |= 1 << (bit % 64);
                }
            }
        }
        std::mem::swap(&mut row, &mut below);
    }

    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        if a[i] == b[j] {
            pairs.push((prefix + i, prefix + j));
            i += 1;
            j += 1;
        } else {
            let bit = i * m + j;
            if advance_failure[bit / 64] & (1 << (bit % 64)) != 0 {
                j += 1;
            } else {
                i += 1;
            }
        }
    }
    pairs
}

/// Turns matched pairs into the ordered list of gaps between them.
pub fn hunks_from_pairs(pairs: &[(usize, usize)], n: usize, m: usize) -> Vec<Hunk> {
    let mut hunks = Vec::new();
    let (mut bi, mut fi) = (0, 0);
    for &(b, f) in pairs.iter().chain(std::iter::once(&(n, m))) {
        if let Some(h) = Hunk::from_gap(bi..b, fi..f) {
            hunks.push(h);
        }
        bi = b + 1;
        fi = f + 1;
    }
    hunks
}

pub fn diff_traces(
    baseline: &Trace,
    failure: &Trace,
    options: DiffOptions,
) -> Result<Vec<Hunk>, DiffError> {
    if baseline.app_package != failure.app_package {
        return Err(DiffError::AppMismatch {
            baseline: baseline.app_package.clone(),
            failure: failure.app_package.clone(),
        });
    }
    let a = project_keys(baseline, options);
    let b = project_keys(failure, options);
    let pairs = lcs_pairs(&a, &b);
    Ok(hunks_from_pairs(&pairs, a.len(), b.len()))
}

/// Suspicious Invocation Block: one contiguous region of differing boundary
/// calls.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sib {
    pub id: usize,
    /// Failure-side events for inserted/replaced blocks, baseline-side events
    /// for deleted ones.
    pub events: Vec<TraceEvent>,
    pub weight: u64,
    /// Where the block sits in the failure execution.
    pub anchor_stack: Vec<StackFrame>,
    pub origin_kind: HunkKind,
}

impl Sib {
    pub fn callees(&self) -> impl Iterator<Item = &MethodRef> {
        self.events.iter().map(|e| &e.callee)
    }
}

fn entry_only_stack(baseline: &Trace, failure: &Trace) -> Vec<StackFrame> {
    let root = failure
        .entry_point()
        .or_else(|| baseline.entry_point())
        .cloned()
        .unwrap_or_else(MethodRef::synthetic_root);
    vec![StackFrame::new(root, &failure.app_package)]
}

pub fn extract_sibs(hunks: &[Hunk], baseline: &Trace, failure: &Trace) -> Vec<Sib> {
    hunks
        .iter()
        .enumerate()
        .map(|(id, h)| {
            let (events, anchor_stack) = match h.kind {
                HunkKind::Inserted | HunkKind::Replaced => {
                    let events = failure.events[h.failure_span.clone()].to_vec();
                    let anchor = events[0].stack.clone();
                    (events, anchor)
                }
                HunkKind::Deleted => {
                    let events = baseline.events[h.baseline_span.clone()].to_vec();
                    let anchor = match h.failure_span.start.checked_sub(1) {
                        Some(prev) => failure.events[prev].stack.clone(),
                        None => entry_only_stack(baseline, failure),
                    };
                    (events, anchor)
                }
            };
            Sib {
                id,
                weight: events.len() as u64,
                events,
                anchor_stack,
                origin_kind: h.kind,
            }
        })
        .collect()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// CSV report with one row per SIB: `id,kind,weight,callees,anchor`.
/// Callees and anchor frames are `;`-separated.
pub fn sib_report(sibs: &[Sib]) -> String {
    let mut out = String::from("id,kind,weight,callees,anchor\n");
    for s in sibs {
        let callees = s
            .callees()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(";");
        let anchor = s
            .anchor_stack
            .iter()
            .map(|f| f.method.to_string())
            .collect::<Vec<_>>()
            .join(";");
        writeln!(
            out,
            "{},{},{},{},{}",
            s.id,
            s.origin_kind,
            s.weight,
            csv_field(&callees),
            csv_field(&anchor)
        )
        .unwrap();
    }
    out
}
