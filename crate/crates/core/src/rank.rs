//! Two-factor node scoring and the per-method fix-locus ranking.
//!
//! For a node `n` of the failure call tree:
//!
//! ```text
//! S(n)     = weight of SIBs reachable from n / total SIB weight
//! D(n)     = 1 / (1 + d), d = edges from n to the nearest SIB-carrying
//!            node in its subtree
//! score(n) = S(n) * D(n)
//! ```
//!
//! `S` favours nodes high in the hierarchy (the root reaches everything),
//! `D` favours nodes close to the symptoms (carriers have `D = 1`). Nodes
//! reaching no SIB have `S = D = 0` and are never ranked.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::diff::Sib;
use crate::model::{MethodRef, Origin};
use crate::scalar::ScoreScalar;
use crate::tree::{reachable_sibs_all, FailureCallTree, NodeId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RankError {
    #[error("no method of app package `{0}` reaches a suspicious invocation block")]
    EmptyRanking(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeScore<T> {
    pub node: NodeId,
    pub reachable: BTreeSet<usize>,
    pub reachable_weight: u64,
    /// `None` when the node reaches no SIB.
    pub distance: Option<usize>,
    pub s: T,
    pub d: T,
    pub score: T,
}

/// Scores every node; the result is indexed by [`NodeId`].
pub fn score_nodes<T: ScoreScalar>(tree: &FailureCallTree) -> Vec<NodeScore<T>> {
    let total = tree.total_sib_weight();
    let reachable = reachable_sibs_all(tree);

    let mut distance: Vec<Option<usize>> = tree
        .nodes()
        .iter()
        .map(|n| (!n.attached_sibs.is_empty()).then_some(0))
        .collect();
    for id in (1..tree.len()).rev() {
        let parent = tree.node(id).parent.expect("non-root node has a parent");
        if let Some(d) = distance[id] {
            let cand = d + 1;
            distance[parent] = Some(distance[parent].map_or(cand, |p| p.min(cand)));
        }
    }

    reachable
        .into_iter()
        .zip(distance)
        .enumerate()
        .map(|(node, (reachable, distance))| {
            let reachable_weight = tree.weight_of(&reachable);
            let (s, d) = match distance {
                Some(dist) if total > 0 => (
                    T::from_ratio(reachable_weight, total),
                    T::from_ratio(1, 1 + dist as u64),
                ),
                _ => (T::zero(), T::zero()),
            };
            NodeScore {
                node,
                reachable,
                reachable_weight,
                distance,
                s,
                d,
                score: s * d,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedCandidate<T> {
    /// 1-based.
    pub rank: usize,
    pub method: MethodRef,
    /// Best-scoring node of this method.
    pub score: NodeScore<T>,
    /// SIBs reachable from the best node, in id order.
    pub evidence: Vec<Sib>,
}

/// Ranks the app methods of the tree by their best node score.
///
/// Order: score descending, then earliest first occurrence in the failure
/// trace, then canonical method text. Framework methods, the entry point and
/// nodes reaching no SIB are left out.
pub fn rank<T: ScoreScalar>(
    tree: &FailureCallTree,
    app_package: &str,
) -> Result<Vec<RankedCandidate<T>>, RankError> {
    let scores = score_nodes::<T>(tree);

    struct Best {
        node: NodeId,
        first_seq: u64,
    }
    let mut best: BTreeMap<&MethodRef, Best> = BTreeMap::new();
    for (id, node) in tree.nodes().iter().enumerate() {
        if id == crate::tree::ROOT
            || node.method.is_synthetic_root()
            || node.method.origin(app_package) != Origin::App
        {
            continue;
        }
        let seq = node.first_seq.unwrap_or(u64::MAX);
        let entry = best.entry(&node.method).or_insert(Best {
            node: id,
            first_seq: seq,
        });
        entry.first_seq = entry.first_seq.min(seq);
        if scores[id].score > scores[entry.node].score {
            entry.node = id;
        }
    }

    let mut cands: Vec<(&MethodRef, Best)> = best
        .into_iter()
        .filter(|(_, b)| scores[b.node].distance.is_some())
        .collect();
    if cands.is_empty() {
        return Err(RankError::EmptyRanking(app_package.to_owned()));
    }
    cands.sort_by(|(ma, a), (mb, b)| {
        scores[b.node]
            .score
            .partial_cmp(&scores[a.node].score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.first_seq.cmp(&b.first_seq))
            .then_with(|| ma.cmp(mb))
    });

    Ok(cands
        .into_iter()
        .enumerate()
        .map(|(i, (method, b))| {
            let score = scores[b.node].clone();
            let evidence = score
                .reachable
                .iter()
                .filter_map(|&id| tree.sib(id).cloned())
                .collect();
            RankedCandidate {
                rank: i + 1,
                method: method.clone(),
                score,
                evidence,
            }
        })
        .collect())
}

/// `sibId:kind:weight:[callee;callee...]`
pub fn evidence_entry(sib: &Sib) -> String {
    let callees = sib
        .callees()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(";");
    format!(
        "{}:{}:{}:[{}]",
        sib.id, sib.origin_kind, sib.weight, callees
    )
}

/// Ranking CSV: `rank,method,score,S,D,evidence`, scores with six decimals,
/// evidence entries joined by `|`.
pub fn emit_csv<T: ScoreScalar>(ranking: &[RankedCandidate<T>]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["rank", "method", "score", "S", "D", "evidence"])
        .expect("in-memory write");
    for c in ranking {
        let evidence = c
            .evidence
            .iter()
            .map(evidence_entry)
            .collect::<Vec<_>>()
            .join("|");
        w.write_record([
            c.rank.to_string(),
            c.method.to_string(),
            format!("{:.6}", c.score.score.to_f64()),
            format!("{:.6}", c.score.s.to_f64()),
            format!("{:.6}", c.score.d.to_f64()),
            evidence,
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::HunkKind;
    use crate::io::parse_trace_str;
    use crate::model::{StackFrame, Trace};
    use crate::tree::{build_failure_tree, ROOT};
    use num_rational::Ratio;

    type Q = Ratio<u64>;

    fn q(n: u64, d: u64) -> Q {
        Q::new(n, d)
    }

    fn sib_at(id: usize, weight: u64, t: &Trace, anchor: &[&str]) -> Sib {
        Sib {
            id,
            events: vec![t.events[0].clone(); weight as usize],
            weight,
            anchor_stack: anchor
                .iter()
                .map(|s| StackFrame::new(s.parse().unwrap(), &t.app_package))
                .collect(),
            origin_kind: HunkKind::Inserted,
        }
    }

    fn node_named(tree: &FailureCallTree, name: &str) -> NodeId {
        tree.nodes()
            .iter()
            .position(|n| n.method.to_string() == name)
            .unwrap()
    }

    // root -> A -> B, single weight-1 SIB on B.
    fn single_path() -> FailureCallTree {
        let t = parse_trace_str(
            "#trace v1 app=app env=x\n\
0\t1\tAPI_CALL\tfw.Z.z()\t-\tvoid\t<root>.Main.main(),app.K.a(),app.K.b()\n",
        )
        .unwrap();
        let anchor = ["<root>.Main.main()", "app.K.a()", "app.K.b()"];
        build_failure_tree(&t, &[sib_at(0, 1, &t, &anchor)]).unwrap()
    }

    #[test]
    fn single_path_scores() {
        let tree = single_path();
        let s = score_nodes::<Q>(&tree);
        let a = node_named(&tree, "app.K.a()");
        let b = node_named(&tree, "app.K.b()");
        assert_eq!((s[b].s, s[b].d, s[b].score), (q(1, 1), q(1, 1), q(1, 1)));
        assert_eq!((s[a].s, s[a].d, s[a].score), (q(1, 1), q(1, 2), q(1, 2)));
        assert_eq!(
            (s[ROOT].s, s[ROOT].d, s[ROOT].score),
            (q(1, 1), q(1, 3), q(1, 3))
        );
        // the framework leaf under B reaches nothing
        let leaf = node_named(&tree, "fw.Z.z()");
        assert_eq!(s[leaf].score, q(0, 1));
        assert_eq!(s[leaf].distance, None);

        let ranking = rank::<Q>(&tree, "app").unwrap();
        let got: Vec<(String, Q)> = ranking
            .iter()
            .map(|c| (c.method.to_string(), c.score.score))
            .collect();
        assert_eq!(
            got,
            vec![("app.K.b()".into(), q(1, 1)), ("app.K.a()".into(), q(1, 2))]
        );
    }

    #[test]
    fn two_children_with_one_sib_each() {
        let t = parse_trace_str(
            "#trace v1 app=app env=x\n\
0\t1\tCALLBACK\tapp.A.x()\t-\tvoid\t<root>.Main.main()\n\
1\t1\tCALLBACK\tapp.B.y()\t-\tvoid\t<root>.Main.main()\n",
        )
        .unwrap();
        let tree = build_failure_tree(
            &t,
            &[
                sib_at(0, 1, &t, &["<root>.Main.main()", "app.A.x()"]),
                sib_at(1, 1, &t, &["<root>.Main.main()", "app.B.y()"]),
            ],
        )
        .unwrap();
        let s = score_nodes::<Q>(&tree);
        for name in ["app.A.x()", "app.B.y()"] {
            let n = node_named(&tree, name);
            assert_eq!((s[n].s, s[n].d, s[n].score), (q(1, 2), q(1, 1), q(1, 2)));
        }
        assert_eq!(
            (s[ROOT].s, s[ROOT].d, s[ROOT].score),
            (q(1, 1), q(1, 2), q(1, 2))
        );

        // equal scores: first executed wins
        let r = rank::<f64>(&tree, "app").unwrap();
        assert_eq!(r[0].method.to_string(), "app.A.x()");
        assert_eq!(r[1].method.to_string(), "app.B.y()");
        assert_eq!(r[0].evidence.len(), 1);
    }

    #[test]
    fn sib_on_root_only() {
        let t = parse_trace_str(
            "#trace v1 app=app env=x\n0\t1\tCALLBACK\tapp.A.x()\t-\tvoid\t<root>.Main.main()\n",
        )
        .unwrap();
        let tree = build_failure_tree(&t, &[sib_at(0, 2, &t, &["<root>.Main.main()"])]).unwrap();
        let s = score_nodes::<Q>(&tree);
        assert_eq!(
            (s[ROOT].s, s[ROOT].d, s[ROOT].score),
            (q(1, 1), q(1, 1), q(1, 1))
        );
        // the only app method reaches nothing
        assert_eq!(
            rank::<f64>(&tree, "app").unwrap_err(),
            RankError::EmptyRanking("app".into())
        );
    }

    #[test]
    fn tie_break_by_first_occurrence_seq() {
        let t = parse_trace_str(
            "#trace v1 app=app env=x\n\
3\t1\tCALLBACK\tapp.Z.m2()\t-\tvoid\t<root>.Main.main()\n\
7\t1\tCALLBACK\tapp.A.m1()\t-\tvoid\t<root>.Main.main()\n",
        )
        .unwrap();
        let tree = build_failure_tree(
            &t,
            &[
                sib_at(0, 1, &t, &["<root>.Main.main()", "app.A.m1()"]),
                sib_at(1, 1, &t, &["<root>.Main.main()", "app.Z.m2()"]),
            ],
        )
        .unwrap();
        let r = rank::<f64>(&tree, "app").unwrap();
        assert_eq!(r[0].method.to_string(), "app.Z.m2()");
        assert_eq!(r[1].method.to_string(), "app.A.m1()");
        assert_eq!(r[1].rank, 2);
    }

    #[test]
    fn only_app_method_is_ranked_regardless_of_score() {
        let t = parse_trace_str(
            "#trace v1 app=app env=x\n\
0\t1\tAPI_CALL\tfw.F.f()\t-\tvoid\t<root>.Main.main(),fw.L.loop(),app.M.m()\n",
        )
        .unwrap();
        let tree = build_failure_tree(
            &t,
            &[sib_at(
                0,
                1,
                &t,
                &["<root>.Main.main()", "fw.L.loop()", "app.M.m()"],
            )],
        )
        .unwrap();
        let r = rank::<f64>(&tree, "app").unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].method.to_string(), "app.M.m()");
    }

    #[test]
    fn csv_layout() {
        assert_eq!(emit_csv::<f64>(&[]), "rank,method,score,S,D,evidence\n");
        let tree = single_path();
        let r = rank::<f64>(&tree, "app").unwrap();
        let csv = emit_csv(&r[..1]);
        assert_eq!(
            csv,
            "rank,method,score,S,D,evidence\n\
1,app.K.b(),1.000000,1.000000,1.000000,0:INSERTED:1:[fw.Z.z()]\n"
        );
        assert_eq!(csv.lines().count(), 2);
        assert_eq!(emit_csv(&r), emit_csv(&r.clone()));
    }
}
