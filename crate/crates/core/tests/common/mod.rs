//! Test-only oracles and generators. Nothing here calls into the diff,
//! tree or ranking code it is used to check.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::ops::Range;

use fixlocus_core::{Direction, MethodRef, ReturnValue, StackFrame, Trace, TraceEvent};
use rand::seq::SliceRandom;
use rand::Rng;

pub const APP: &str = "com.app";

/// Hunk as `(kind, baseline span, failure span)`, kind in
/// `INSERTED | DELETED | REPLACED`.
pub type OracleHunk = (&'static str, Range<usize>, Range<usize>);

/// Exhaustive dynamic-programming LCS oracle.
///
/// Fills the full suffix-LCS table, then selects matched pairs greedily in
/// baseline order: each baseline element is matched to the earliest failure
/// element that still allows a longest common subsequence to be completed.
/// This yields the lexicographically smallest optimal set of matched pairs.
pub fn oracle_hunks<T: PartialEq>(a: &[T], b: &[T]) -> Vec<OracleHunk> {
    let (n, m) = (a.len(), b.len());
    let mut suf = vec![vec![0usize; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            suf[i][j] = if a[i] == b[j] {
                suf[i + 1][j + 1] + 1
            } else {
                suf[i + 1][j].max(suf[i][j + 1])
            };
        }
    }
    let total = suf[0][0];
    let mut pairs = Vec::new();
    let mut next_j = 0;
    for i in 0..n {
        let found =
            (next_j..m).find(|&j| a[i] == b[j] && pairs.len() + 1 + suf[i + 1][j + 1] == total);
        if let Some(j) = found {
            pairs.push((i, j));
            next_j = j + 1;
        }
    }
    assert_eq!(
        pairs.len(),
        total,
        "oracle must realize a longest common subsequence"
    );

    let mut out = Vec::new();
    let mut prev = (0usize, 0usize);
    for (bi, fi) in pairs.into_iter().chain(std::iter::once((n, m))) {
        let (bs, fs) = (prev.0..bi, prev.1..fi);
        let kind = match (bs.is_empty(), fs.is_empty()) {
            (true, true) => None,
            (true, false) => Some("INSERTED"),
            (false, true) => Some("DELETED"),
            (false, false) => Some("REPLACED"),
        };
        if let Some(k) = kind {
            out.push((k, bs, fs));
        }
        prev = (bi + 1, fi + 1);
    }
    out
}

pub fn m(s: &str) -> MethodRef {
    s.parse().expect("valid method reference")
}

const FW_CALLEES: &[&str] = &[
    "android.widget.TextView.setText(CharSequence)",
    "android.os.Handler.post(Runnable)",
    "android.content.Context.getSystemService(String)",
    "android.location.LocationManager.requestLocationUpdates(String,long,float,LocationListener)",
];

const APP_METHODS: &[&str] = &[
    "com.app.MainActivity.onCreate(Bundle)",
    "com.app.MainActivity.onResume()",
    "com.app.ui.Controller.refresh()",
    "com.app.net.Client.fetch(String, int)",
];

const VALUE_CHARS: &[char] = &[
    'a', 'Z', '0', '7', ' ', ';', '\t', '\\', '-', '?', '@', 'é', ',', '\n',
];

fn random_value<R: Rng>(rng: &mut R) -> String {
    match rng.gen_range(0..6) {
        0 => "-".into(),
        1 => "void".into(),
        2 => "?".into(),
        _ => {
            let len = rng.gen_range(0..8);
            let raw: String = (0..len)
                .map(|_| *VALUE_CHARS.choose(rng).unwrap())
                .collect();
            fixlocus_core::normalize_value(&raw)
        }
    }
}

/// A valid trace over a small alphabet. `alphabet` bounds how many distinct
/// callees of each direction are used, which controls how often keys repeat.
pub fn random_trace<R: Rng>(rng: &mut R, max_events: usize, alphabet: usize) -> Trace {
    let n = rng.gen_range(0..=max_events);
    random_trace_len(rng, n, alphabet)
}

pub fn random_trace_len<R: Rng>(rng: &mut R, n: usize, alphabet: usize) -> Trace {
    let mut t = Trace::new(APP, "env");
    let mut seq = rng.gen_range(0..5u64);
    for _ in 0..n {
        t.events.push(random_event(rng, seq, alphabet));
        seq += rng.gen_range(1..4);
    }
    t
}

pub fn random_event<R: Rng>(rng: &mut R, seq: u64, alphabet: usize) -> TraceEvent {
    let k = alphabet.clamp(1, FW_CALLEES.len());
    let root = MethodRef::synthetic_root();
    let mut stack = vec![
        StackFrame::new(root, APP),
        StackFrame::new(m("android.os.Looper.loop()"), APP),
    ];
    let direction = if rng.gen_bool(0.5) {
        Direction::ApiCall
    } else {
        Direction::Callback
    };
    let callee = match direction {
        Direction::ApiCall => {
            let depth = rng.gen_range(1..=3);
            for _ in 0..depth {
                stack.push(StackFrame::new(m(APP_METHODS.choose(rng).unwrap()), APP));
            }
            m(FW_CALLEES[rng.gen_range(0..k)])
        }
        Direction::Callback => m(APP_METHODS[rng.gen_range(0..k)]),
    };
    let args = (0..rng.gen_range(0..3))
        .map(|_| random_value(rng))
        .collect();
    let ret = match rng.gen_range(0..3) {
        0 => ReturnValue::Void,
        1 => ReturnValue::Unrecorded,
        _ => ReturnValue::Value(random_value(rng)),
    };
    TraceEvent {
        seq,
        thread: rng.gen_range(1..3),
        direction,
        callee,
        args,
        ret,
        stack,
    }
}

/// Derives a failure trace from `base` with random insertions, deletions and
/// substitutions, renumbering seq.
pub fn mutate<R: Rng>(rng: &mut R, base: &Trace, edits: usize, alphabet: usize) -> Trace {
    let mut events = base.events.clone();
    for _ in 0..edits {
        match rng.gen_range(0..3) {
            0 => {
                let pos = rng.gen_range(0..=events.len());
                events.insert(pos, random_event(rng, 0, alphabet));
            }
            1 if !events.is_empty() => {
                let pos = rng.gen_range(0..events.len());
                events.remove(pos);
            }
            _ if !events.is_empty() => {
                let pos = rng.gen_range(0..events.len());
                events[pos] = random_event(rng, 0, alphabet);
            }
            _ => {}
        }
    }
    for (i, e) in events.iter_mut().enumerate() {
        e.seq = i as u64;
    }
    Trace {
        app_package: base.app_package.clone(),
        env_label: "failure".into(),
        events,
    }
}

/// A random rooted tree given as parent links (`parent[0] = None`,
/// `parent[i] < i`), plus a SIB weight for a random subset of nodes.
pub struct RandomTree {
    pub parent: Vec<Option<usize>>,
    pub sib_weight: BTreeMap<usize, u64>,
}

pub fn random_tree_shape<R: Rng>(rng: &mut R, max_nodes: usize) -> RandomTree {
    let n = rng.gen_range(1..=max_nodes);
    let parent: Vec<Option<usize>> = (0..n)
        .map(|i| {
            if i == 0 {
                None
            } else {
                Some(rng.gen_range(0..i))
            }
        })
        .collect();
    let mut sib_weight = BTreeMap::new();
    let carriers = rng.gen_range(1..=n.min(5));
    for _ in 0..carriers {
        let node = rng.gen_range(0..n);
        sib_weight.insert(node, rng.gen_range(1..=6));
    }
    RandomTree { parent, sib_weight }
}

/// Turns a tree shape into a failure trace whose call tree has exactly that
/// shape (plus one framework leaf under every node) and one SIB per carrier.
/// Node `i` becomes app method `com.app.N{i}.run()`.
pub fn realize_tree(shape: &RandomTree) -> (Trace, Vec<fixlocus_core::Sib>) {
    let n = shape.parent.len();
    let path = |mut i: usize| {
        let mut p = vec![i];
        while let Some(par) = shape.parent[i] {
            p.push(par);
            i = par;
        }
        p.reverse();
        p
    };
    let root = MethodRef::synthetic_root();
    let mut t = Trace::new(APP, "failure");
    let mut stacks = Vec::with_capacity(n);
    for i in 0..n {
        let mut stack = vec![StackFrame::new(root.clone(), APP)];
        stack.extend(
            path(i)
                .into_iter()
                .map(|j| StackFrame::new(m(&format!("com.app.N{j}.run()")), APP)),
        );
        t.events.push(TraceEvent {
            seq: i as u64,
            thread: 1,
            direction: Direction::ApiCall,
            callee: m("android.util.Log.d(String,String)"),
            args: vec![],
            ret: ReturnValue::Void,
            stack: stack.clone(),
        });
        stacks.push(stack);
    }
    let sibs = shape
        .sib_weight
        .iter()
        .enumerate()
        .map(|(id, (&node, &w))| fixlocus_core::Sib {
            id,
            events: vec![t.events[node].clone(); w as usize],
            weight: w,
            anchor_stack: stacks[node].clone(),
            origin_kind: fixlocus_core::HunkKind::Inserted,
        })
        .collect();
    (t, sibs)
}

/// Minimal DOT reader for the emitter's output: vertex labels by name and
/// the edge list.
pub fn parse_dot(text: &str) -> (BTreeMap<String, String>, Vec<(String, String)>) {
    let mut vertices = BTreeMap::new();
    let mut edges = Vec::new();
    for line in text.lines().map(str::trim) {
        if let Some((from, to)) = line.strip_suffix(';').and_then(|l| l.split_once(" -> ")) {
            edges.push((from.to_owned(), to.to_owned()));
        } else if let Some((name, rest)) = line.split_once(" [label=\"") {
            let mut label = String::new();
            let mut chars = rest.chars();
            while let Some(c) = chars.next() {
                match c {
                    '\\' => match chars.next() {
                        Some('n') => label.push('\n'),
                        Some(o) => label.push(o),
                        None => break,
                    },
                    '"' => break,
                    c => label.push(c),
                }
            }
            vertices.insert(name.to_owned(), label);
        }
    }
    (vertices, edges)
}
