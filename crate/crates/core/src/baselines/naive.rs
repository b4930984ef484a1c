use std::collections::HashSet;

use crate::diff::{diff_traces, extract_sibs, DiffError, DiffOptions};
use crate::model::{MethodRef, Trace};

/// Methods a developer meets when reading the trace differences top to
/// bottom.
///
/// For each hunk in order, the events of the hunk are read (baseline side
/// first), each event's stack from the entry point down followed by its
/// callee, then the hunk's anchor stack. App methods are listed at their
/// first appearance.
pub fn naive_ranking(
    baseline: &Trace,
    failure: &Trace,
    options: DiffOptions,
) -> Result<Vec<MethodRef>, DiffError> {
    let hunks = diff_traces(baseline, failure, options)?;
    let sibs = extract_sibs(&hunks, baseline, failure);
    let app = &failure.app_package;

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut visit = |m: &MethodRef| {
        if m.belongs_to(app) && !m.is_synthetic_root() && seen.insert(m.clone()) {
            out.push(m.clone());
        }
    };
    for (hunk, sib) in hunks.iter().zip(&sibs) {
        let events = baseline.events[hunk.baseline_span.clone()]
            .iter()
            .chain(&failure.events[hunk.failure_span.clone()]);
        for ev in events {
            ev.stack.iter().for_each(|f| visit(&f.method));
            visit(&ev.callee);
        }
        sib.anchor_stack.iter().for_each(|f| visit(&f.method));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_trace_str;

    const BASE: &str = "#trace v1 app=app env=old\n\
0\t1\tCALLBACK\tapp.A.m()\t-\tvoid\t<root>.Main.main(),fw.L.loop()\n\
1\t1\tAPI_CALL\tfw.X.a()\t-\tvoid\t<root>.Main.main(),fw.L.loop(),app.A.m()\n\
2\t1\tCALLBACK\tapp.B.n()\t-\tvoid\t<root>.Main.main(),fw.L.loop()\n\
3\t1\tAPI_CALL\tfw.X.b()\t-\tvoid\t<root>.Main.main(),fw.L.loop(),app.B.n()\n\
4\t1\tAPI_CALL\tfw.X.c()\t-\tvoid\t<root>.Main.main(),fw.L.loop(),app.A.m()\n";

    fn names(v: &[MethodRef]) -> Vec<String> {
        v.iter().map(|m| m.to_string()).collect()
    }

    #[test]
    fn identical_traces_give_nothing() {
        let t = parse_trace_str(BASE).unwrap();
        assert!(naive_ranking(&t, &t, DiffOptions::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn single_hunk_under_app_method() {
        let base = parse_trace_str(BASE).unwrap();
        let mut fail = base.clone();
        fail.events.remove(1);
        let r = naive_ranking(&base, &fail, DiffOptions::default()).unwrap();
        assert_eq!(names(&r), vec!["app.A.m()"]);
    }

    #[test]
    fn first_occurrence_wins_across_hunks() {
        let base = parse_trace_str(BASE).unwrap();
        let mut fail = base.clone();
        // hunks under A.m, then B.n, then A.m again
        fail.events[1].callee = "fw.X.a2()".parse().unwrap();
        fail.events[3].callee = "fw.X.b2()".parse().unwrap();
        fail.events[4].callee = "fw.X.c2()".parse().unwrap();
        let r = naive_ranking(&base, &fail, DiffOptions::default()).unwrap();
        assert_eq!(names(&r), vec!["app.A.m()", "app.B.n()"]);
    }
}
