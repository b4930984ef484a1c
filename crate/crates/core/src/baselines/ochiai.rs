use std::collections::{BTreeSet, HashMap};

use num_traits::Float;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoverageError {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("coverage matrix has no failing test")]
    NoFailingTest,
    #[error("test `{test}` covers unknown entity `{entity}`")]
    UnknownEntity { test: String, entity: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestCoverage {
    pub id: String,
    pub verdict: Verdict,
    /// Indices into [`CoverageMatrix::entities`].
    pub covered: BTreeSet<usize>,
}

/// Per-test coverage spectra over an ordered list of entities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageMatrix {
    entities: Vec<String>,
    tests: Vec<TestCoverage>,
}

impl CoverageMatrix {
    pub fn new(entities: Vec<String>, tests: Vec<TestCoverage>) -> Result<Self, CoverageError> {
        for t in &tests {
            if let Some(&bad) = t.covered.iter().find(|&&i| i >= entities.len()) {
                return Err(CoverageError::UnknownEntity {
                    test: t.id.clone(),
                    entity: format!("#{bad}"),
                });
            }
        }
        if !tests.iter().any(|t| t.verdict == Verdict::Fail) {
            return Err(CoverageError::NoFailingTest);
        }
        Ok(CoverageMatrix { entities, tests })
    }

    /// Builds a matrix from named coverage sets; entities are ordered by
    /// first mention.
    pub fn from_named<'a, I, E>(tests: I) -> Result<Self, CoverageError>
    where
        I: IntoIterator<Item = (&'a str, Verdict, E)>,
        E: IntoIterator<Item = &'a str>,
    {
        let mut entities = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut out = Vec::new();
        for (id, verdict, covered) in tests {
            let covered = covered
                .into_iter()
                .map(|e| {
                    *index.entry(e.to_owned()).or_insert_with(|| {
                        entities.push(e.to_owned());
                        entities.len() - 1
                    })
                })
                .collect();
            out.push(TestCoverage {
                id: id.to_owned(),
                verdict,
                covered,
            });
        }
        CoverageMatrix::new(entities, out)
    }

    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn tests(&self) -> &[TestCoverage] {
        &self.tests
    }
}

/// Reads `#coverage v1` followed by `testId<TAB>PASS|FAIL<TAB>e1;e2;...`
/// lines. An empty or `-` coverage field means the test covers nothing.
pub fn parse_coverage_matrix(text: &str) -> Result<CoverageMatrix, CoverageError> {
    let malformed = |line: usize, reason: &str| CoverageError::MalformedLine {
        line,
        reason: reason.to_owned(),
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == "#coverage v1" => {}
        _ => return Err(malformed(1, "expected header `#coverage v1`")),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let mut f = line.split('\t');
        let (Some(id), Some(verdict), cov, None) = (f.next(), f.next(), f.next(), f.next()) else {
            return Err(malformed(
                idx + 1,
                "expected `testId<TAB>PASS|FAIL<TAB>entities`",
            ));
        };
        let verdict = match verdict {
            "PASS" => Verdict::Pass,
            "FAIL" => Verdict::Fail,
            _ => return Err(malformed(idx + 1, "verdict must be PASS or FAIL")),
        };
        let covered: Vec<&str> = match cov.unwrap_or("") {
            "" | "-" => Vec::new(),
            c => c.split(';').filter(|e| !e.is_empty()).collect(),
        };
        rows.push((id, verdict, covered));
    }
    CoverageMatrix::from_named(rows)
}

/// Ochiai suspiciousness `ef / sqrt((ef + nf) * (ef + ep))` per entity,
/// sorted descending; ties keep entity order. A zero denominator scores 0.
pub fn ochiai<F: Float>(matrix: &CoverageMatrix) -> Result<Vec<(String, F)>, CoverageError> {
    let total_failed = matrix
        .tests
        .iter()
        .filter(|t| t.verdict == Verdict::Fail)
        .count();
    if total_failed == 0 {
        return Err(CoverageError::NoFailingTest);
    }
    let n = matrix.entities.len();
    let (mut ef, mut ep) = (vec![0usize; n], vec![0usize; n]);
    for t in &matrix.tests {
        let counts = match t.verdict {
            Verdict::Fail => &mut ef,
            Verdict::Pass => &mut ep,
        };
        for &e in &t.covered {
            counts[e] += 1;
        }
    }
    let to_f = |x: usize| F::from(x).expect("count fits in a float");
    let mut scored: Vec<(String, F)> = matrix
        .entities
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let nf = total_failed - ef[i];
            let denom = (to_f(ef[i] + nf) * to_f(ef[i] + ep[i])).sqrt();
            let s = if denom == F::zero() {
                F::zero()
            } else {
                to_f(ef[i]) / denom
            };
            (e.clone(), s)
        })
        .collect();
    // stable sort keeps entity order among ties
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    Ok(scored)
}
