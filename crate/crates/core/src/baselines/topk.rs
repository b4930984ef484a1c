use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

/// Best 1-based position of any ground-truth member in `ranking`.
pub fn achieved_rank<S: AsRef<str>>(ranking: &[S], truth: &BTreeSet<String>) -> Option<usize> {
    ranking
        .iter()
        .position(|m| truth.contains(m.as_ref()))
        .map(|p| p + 1)
}

/// Rankings produced by each technique for one scenario. A technique that
/// could not run (for example Ochiai without a coverage matrix) maps to
/// `None`.
#[derive(Debug, Clone, Default)]
pub struct ScenarioRankings {
    pub name: String,
    pub truth: BTreeSet<String>,
    pub rankings: BTreeMap<String, Option<Vec<String>>>,
}

/// Cumulative counts: a rank-1 hit counts for Top-1, Top-5 and Top-10.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TopKCounts {
    pub top1: usize,
    pub top5: usize,
    pub top10: usize,
    pub not_in_ranking: usize,
}

impl TopKCounts {
    fn record(&mut self, rank: Option<usize>) {
        match rank {
            Some(r) => {
                self.top1 += usize::from(r <= 1);
                self.top5 += usize::from(r <= 5);
                self.top10 += usize::from(r <= 10);
            }
            None => self.not_in_ranking += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopKReport {
    pub techniques: Vec<String>,
    /// Scenario name and achieved rank per technique, in technique order.
    pub rows: Vec<(String, Vec<Option<usize>>)>,
    pub counts: Vec<TopKCounts>,
}

pub fn topk_report(techniques: &[String], scenarios: &[ScenarioRankings]) -> TopKReport {
    let mut counts = vec![TopKCounts::default(); techniques.len()];
    let rows = scenarios
        .iter()
        .map(|sc| {
            let ranks: Vec<Option<usize>> = techniques
                .iter()
                .map(|t| {
                    sc.rankings
                        .get(t)
                        .and_then(|r| r.as_deref())
                        .and_then(|r| achieved_rank(r, &sc.truth))
                })
                .collect();
            for (c, r) in counts.iter_mut().zip(&ranks) {
                c.record(*r);
            }
            (sc.name.clone(), ranks)
        })
        .collect();
    TopKReport {
        techniques: techniques.to_vec(),
        rows,
        counts,
    }
}

impl TopKReport {
    pub fn counts_for(&self, technique: &str) -> Option<TopKCounts> {
        self.techniques
            .iter()
            .position(|t| t == technique)
            .map(|i| self.counts[i])
    }

    /// One row per scenario (rank or `-`), then the Top-1, Top-5, Top-10
    /// and "Not in the ranking" summary rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scenario");
        for t in &self.techniques {
            write!(out, ",{t}").unwrap();
        }
        out.push('\n');
        for (name, ranks) in &self.rows {
            out.push_str(name);
            for r in ranks {
                match r {
                    Some(r) => write!(out, ",{r}").unwrap(),
                    None => out.push_str(",-"),
                }
            }
            out.push('\n');
        }
        let summary = [
            (
                "Top-1",
                self.counts.iter().map(|c| c.top1).collect::<Vec<_>>(),
            ),
            ("Top-5", self.counts.iter().map(|c| c.top5).collect()),
            ("Top-10", self.counts.iter().map(|c| c.top10).collect()),
            (
                "Not in the ranking",
                self.counts.iter().map(|c| c.not_in_ranking).collect(),
            ),
        ];
        for (label, values) in summary {
            out.push_str(label);
            for v in values {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truth(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn scenario(ranking: Vec<String>, t: &[&str]) -> ScenarioRankings {
        ScenarioRankings {
            name: "s".into(),
            truth: truth(t),
            rankings: BTreeMap::from([("fixlocus".to_string(), Some(ranking))]),
        }
    }

    #[test]
    fn rank_one_counts_everywhere() {
        let r = topk_report(&["fixlocus".into()], &[scenario(vec!["m".into()], &["m"])]);
        assert_eq!(
            r.counts[0],
            TopKCounts {
                top1: 1,
                top5: 1,
                top10: 1,
                not_in_ranking: 0
            }
        );
    }

    #[test]
    fn rank_seven_is_top10_only() {
        let ranking: Vec<String> = (1..=12).map(|i| format!("m{i}")).collect();
        let r = topk_report(&["fixlocus".into()], &[scenario(ranking, &["m7"])]);
        assert_eq!(r.rows[0].1, vec![Some(7)]);
        assert_eq!((r.counts[0].top5, r.counts[0].top10), (0, 1));
    }

    #[test]
    fn best_member_rule() {
        let ranking = vec!["x".to_string(), "b".into(), "a".into()];
        assert_eq!(achieved_rank(&ranking, &truth(&["a", "b"])), Some(2));
        assert_eq!(achieved_rank(&ranking, &truth(&["q"])), None);
    }

    #[test]
    fn missing_technique_prints_dash() {
        let mut sc = scenario(vec!["m".into()], &["m"]);
        sc.rankings.insert("ochiai".into(), None);
        let r = topk_report(&["fixlocus".into(), "ochiai".into()], &[sc]);
        assert_eq!(
            r.to_csv(),
            "scenario,fixlocus,ochiai\ns,1,-\nTop-1,1,0\nTop-5,1,0\nTop-10,1,0\nNot in the ranking,0,1\n"
        );
    }
}
