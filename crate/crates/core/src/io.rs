//! Trace and method-list file formats, value normalization, and the
//! boundary-method filter used to prepare instrumentation lists.
//!
//! Trace files are line oriented:
//!
//! ```text
//! #trace v1 app=<package> env=<label>
//! seq<TAB>thread<TAB>direction<TAB>callee<TAB>args<TAB>ret<TAB>stack
//! ```
//!
//! `args` is `-` when empty, otherwise `;`-separated values. `ret` is
//! `void`, `?` (unrecorded) or a value. `stack` holds comma-separated
//! canonical method references, outermost first. Inside values, `\` escapes
//! the next character (`\t`, `\n`, `\r` for control characters), and a value
//! that would read as one of the reserved tokens `-`, `void`, `?` is written
//! with a leading backslash.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::BufRead;
use std::sync::LazyLock;

use regex::Regex;
use thiserror::Error;

use crate::model::{
    is_valid_package, validate_trace, Direction, MethodRef, ReturnValue, StackFrame, Trace,
    TraceEvent, Violation,
};

#[derive(Debug, Error)]
pub enum TraceIoError {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("trace violates {} invariant(s): {}", .0.len(), join_violations(.0))]
    InvariantViolation(Vec<Violation>),
    #[error("no boundary method matches app package `{0}`")]
    EmptyResult(String),
    #[error("invalid normalization pattern `{pattern}`: {reason}")]
    BadPattern { pattern: String, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

const TRACE_MAGIC: &str = "#trace v1 ";
const METHODS_MAGIC: &str = "#methods app=";

/// Rewrites volatile substrings of recorded values so that equal behaviour
/// yields equal text.
///
/// The default rules turn `TypeName@hexdigits` into `TypeName@<id>` and any
/// decimal run longer than 12 digits into `<ts>`. Extra rules are applied
/// after the defaults, in the order given.
#[derive(Debug, Clone)]
pub struct Normalizer {
    rules: Vec<(Regex, String)>,
}

static DEFAULT_RULES: LazyLock<Normalizer> = LazyLock::new(|| Normalizer {
    rules: vec![
        (
            Regex::new(r"\b([A-Za-z_$][A-Za-z0-9_$.]*)@[0-9a-fA-F]+\b").unwrap(),
            "${1}@<id>".to_owned(),
        ),
        (Regex::new(r"\b[0-9]{13,}\b").unwrap(), "<ts>".to_owned()),
    ],
});

impl Default for Normalizer {
    fn default() -> Self {
        DEFAULT_RULES.clone()
    }
}

impl Normalizer {
    /// Adds a user rule. Occurrences of `pattern` are replaced by
    /// `replacement`, which may refer to capture groups as `$1`.
    pub fn with_rule(mut self, pattern: &str, replacement: &str) -> Result<Self, TraceIoError> {
        let re = Regex::new(pattern).map_err(|e| TraceIoError::BadPattern {
            pattern: pattern.to_owned(),
            reason: e.to_string(),
        })?;
        self.rules.push((re, replacement.to_owned()));
        Ok(self)
    }

    /// Reads a pattern file: one `regex` or `regex<TAB>replacement` per
    /// line; blank lines and lines starting with `#` are skipped. The
    /// replacement defaults to `<*>`.
    pub fn from_pattern_file(text: &str) -> Result<Self, TraceIoError> {
        let mut n = Normalizer::default();
        for line in text.lines() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (pat, rep) = line.split_once('\t').unwrap_or((line, "<*>"));
            n = n.with_rule(pat, rep)?;
        }
        Ok(n)
    }

    pub fn apply(&self, raw: &str) -> String {
        let mut s = raw.to_owned();
        for (re, rep) in &self.rules {
            if re.is_match(&s) {
                s = re.replace_all(&s, rep.as_str()).into_owned();
            }
        }
        s
    }

    pub fn apply_to_event(&self, ev: &mut TraceEvent) {
        for a in &mut ev.args {
            *a = self.apply(a);
        }
        if let ReturnValue::Value(v) = &mut ev.ret {
            *v = self.apply(v);
        }
    }

    pub fn apply_to_trace(&self, trace: &mut Trace) {
        for ev in &mut trace.events {
            self.apply_to_event(ev);
        }
    }
}

/// Normalizes a single value with the default rules.
pub fn normalize_value(raw: &str) -> String {
    DEFAULT_RULES.apply(raw)
}

fn escape_value(v: &str, out: &mut String) {
    if matches!(v, "-" | "void" | "?") {
        out.push('\\');
    }
    for c in v.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            ';' => out.push_str("\\;"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
}

/// Splits on unescaped `;` and decodes escapes.
fn unescape_values(field: &str) -> Result<Vec<String>, String> {
    let mut values = vec![String::new()];
    let mut chars = field.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                let cur = values.last_mut().unwrap();
                match chars.next() {
                    Some('t') => cur.push('\t'),
                    Some('n') => cur.push('\n'),
                    Some('r') => cur.push('\r'),
                    Some(other) => cur.push(other),
                    None => return Err("dangling escape at end of field".into()),
                }
            }
            ';' => values.push(String::new()),
            c => values.last_mut().unwrap().push(c),
        }
    }
    Ok(values)
}

fn split_stack(field: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, c) in field.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                parts.push(&field[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&field[start..]);
    parts
}

fn parse_header(line: &str) -> Result<(String, String), String> {
    let rest = line
        .strip_prefix(TRACE_MAGIC)
        .ok_or("expected header `#trace v1 app=<package> env=<label>`")?;
    let rest = rest
        .strip_prefix("app=")
        .ok_or("header is missing `app=`")?;
    let (app, env) = match rest.split_once(' ') {
        Some((app, env)) => (
            app,
            env.strip_prefix("env=").ok_or("header is missing `env=`")?,
        ),
        None => return Err("header is missing `env=`".into()),
    };
    if !is_valid_package(app) {
        return Err(format!("invalid app package `{app}`"));
    }
    Ok((app.to_owned(), env.to_owned()))
}

fn parse_event(line: &str, app: &str) -> Result<TraceEvent, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 7 {
        return Err(format!(
            "expected 7 tab-separated fields (seq, thread, direction, callee, args, ret, stack), found {}",
            fields.len()
        ));
    }
    let seq = fields[0]
        .parse::<u64>()
        .map_err(|_| format!("invalid seq `{}`", fields[0]))?;
    let thread = fields[1]
        .parse::<u64>()
        .map_err(|_| format!("invalid thread id `{}`", fields[1]))?;
    let direction: Direction = fields[2].parse()?;
    let callee: MethodRef = fields[3].parse().map_err(|e| format!("callee: {e}"))?;
    let args = match fields[4] {
        "-" => Vec::new(),
        f => unescape_values(f)?,
    };
    let ret = match fields[5] {
        "void" => ReturnValue::Void,
        "?" => ReturnValue::Unrecorded,
        f => {
            let mut v = unescape_values(f)?;
            if v.len() != 1 {
                return Err("return value contains an unescaped `;`".into());
            }
            ReturnValue::Value(v.pop().unwrap())
        }
    };
    if fields[6].is_empty() {
        return Err("missing stack field".into());
    }
    let stack = split_stack(fields[6])
        .into_iter()
        .map(|s| {
            s.parse::<MethodRef>()
                .map(|m| StackFrame::new(m, app))
                .map_err(|e| format!("stack: {e}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TraceEvent {
        seq,
        thread,
        direction,
        callee,
        args,
        ret,
        stack,
    })
}

/// Parses a trace without checking model invariants. Values are normalized
/// with `normalizer`.
pub fn parse_trace_unchecked<R: BufRead>(
    reader: R,
    normalizer: &Normalizer,
) -> Result<Trace, TraceIoError> {
    let mut lines = reader.lines().enumerate();
    let (app, env) = match lines.next() {
        Some((_, line)) => parse_header(line?.trim_end_matches('\r'))
            .map_err(|reason| TraceIoError::MalformedLine { line: 1, reason })?,
        None => {
            return Err(TraceIoError::MalformedLine {
                line: 1,
                reason: "empty input, expected a `#trace v1` header".into(),
            })
        }
    };
    let mut trace = Trace::new(app, env);
    for (idx, line) in lines {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let mut ev = parse_event(line, &trace.app_package).map_err(|reason| {
            TraceIoError::MalformedLine {
                line: idx + 1,
                reason,
            }
        })?;
        normalizer.apply_to_event(&mut ev);
        trace.events.push(ev);
    }
    Ok(trace)
}

/// Parses and validates a trace using the default normalization rules.
pub fn parse_trace<R: BufRead>(reader: R) -> Result<Trace, TraceIoError> {
    parse_trace_with(reader, &Normalizer::default())
}

pub fn parse_trace_with<R: BufRead>(
    reader: R,
    normalizer: &Normalizer,
) -> Result<Trace, TraceIoError> {
    let trace = parse_trace_unchecked(reader, normalizer)?;
    let violations = validate_trace(&trace);
    if violations.is_empty() {
        Ok(trace)
    } else {
        Err(TraceIoError::InvariantViolation(violations))
    }
}

pub fn parse_trace_str(text: &str) -> Result<Trace, TraceIoError> {
    parse_trace(text.as_bytes())
}

pub fn write_trace(trace: &Trace) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{TRACE_MAGIC}app={} env={}",
        trace.app_package, trace.env_label
    )
    .unwrap();
    for ev in &trace.events {
        write!(
            out,
            "{}\t{}\t{}\t{}\t",
            ev.seq, ev.thread, ev.direction, ev.callee
        )
        .unwrap();
        if ev.args.is_empty() {
            out.push('-');
        } else {
            for (i, a) in ev.args.iter().enumerate() {
                if i > 0 {
                    out.push(';');
                }
                escape_value(a, &mut out);
            }
        }
        out.push('\t');
        match &ev.ret {
            ReturnValue::Void => out.push_str("void"),
            ReturnValue::Unrecorded => out.push('?'),
            ReturnValue::Value(v) => escape_value(v, &mut out),
        }
        out.push('\t');
        for (i, f) in ev.stack.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{}", f.method).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Methods that must be instrumented to capture the boundary calls of one
/// app.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodList {
    pub app_package: String,
    pub methods: BTreeSet<MethodRef>,
}

/// Keeps the callees of events that really cross the boundary of
/// `app_package`: API calls from app code into framework code and callbacks
/// from framework code into app code.
pub fn filter_boundary_methods(
    full_trace: &Trace,
    app_package: &str,
) -> Result<MethodList, TraceIoError> {
    let methods: BTreeSet<MethodRef> = full_trace
        .events
        .iter()
        .filter(|e| e.is_boundary_for(app_package))
        .map(|e| e.callee.clone())
        .collect();
    if methods.is_empty() {
        return Err(TraceIoError::EmptyResult(app_package.to_owned()));
    }
    Ok(MethodList {
        app_package: app_package.to_owned(),
        methods,
    })
}

pub fn write_method_list(list: &MethodList) -> String {
    let mut out = format!("{METHODS_MAGIC}{}\n", list.app_package);
    for m in &list.methods {
        writeln!(out, "{m}").unwrap();
    }
    out
}

pub fn parse_method_list(text: &str) -> Result<MethodList, TraceIoError> {
    let mut lines = text.lines().enumerate();
    let malformed = |line: usize, reason: String| TraceIoError::MalformedLine { line, reason };
    let app = lines
        .next()
        .and_then(|(_, l)| l.trim_end_matches('\r').strip_prefix(METHODS_MAGIC))
        .ok_or_else(|| malformed(1, "expected header `#methods app=<package>`".into()))?;
    let mut methods = BTreeSet::new();
    for (idx, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let m = line
            .parse::<MethodRef>()
            .map_err(|e| malformed(idx + 1, e.to_string()))?;
        methods.insert(m);
    }
    Ok(MethodList {
        app_package: app.to_owned(),
        methods,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "#trace v1 app=com.app env=API 22\n\
0\t1\tCALLBACK\tcom.app.Main.onCreate(Bundle)\tnull\tvoid\t<root>.Main.main(),android.app.Activity.performCreate(Bundle)\n\
1\t1\tAPI_CALL\tandroid.os.Handler.post(Runnable)\tRunnable@1f2e\ttrue\t<root>.Main.main(),android.app.Activity.performCreate(Bundle),com.app.Main.onCreate(Bundle)\n";

    #[test]
    fn parses_header_and_events() {
        let t = parse_trace_str(SAMPLE).unwrap();
        assert_eq!(t.app_package, "com.app");
        assert_eq!(t.env_label, "API 22");
        assert_eq!(t.events.len(), 2);
        assert_eq!(t.events[1].args, vec!["Runnable@<id>".to_owned()]);
        assert_eq!(t.events[1].ret, ReturnValue::Value("true".into()));
        assert_eq!(t.events[1].stack.len(), 3);
    }

    #[test]
    fn missing_stack_field_is_malformed_at_that_line() {
        let text = "#trace v1 app=com.app env=x\n\
0\t1\tCALLBACK\tcom.app.Main.onCreate(Bundle)\tnull\tvoid\n";
        match parse_trace_str(text) {
            Err(TraceIoError::MalformedLine { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn out_of_order_events_fail_validation() {
        let text = SAMPLE.replacen("\n0\t", "\n7\t", 1);
        match parse_trace_str(&text) {
            Err(TraceIoError::InvariantViolation(v)) => {
                assert!(v.iter().any(|x| x.rule.as_str() == "seq sorted"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_trace_writes_header_only() {
        let t = Trace::new("com.app", "API 23");
        assert_eq!(write_trace(&t), "#trace v1 app=com.app env=API 23\n");
        assert_eq!(parse_trace_str(&write_trace(&t)).unwrap(), t);
    }

    #[test]
    fn reserved_and_special_values_survive() {
        let mut t = parse_trace_str(SAMPLE).unwrap();
        t.events[0].args = vec![
            "-".into(),
            "void".into(),
            "a;b".into(),
            "tab\there".into(),
            "".into(),
        ];
        t.events[1].ret = ReturnValue::Value("?".into());
        let text = write_trace(&t);
        assert_eq!(parse_trace_str(&text).unwrap(), t);
        t.events[0].args = vec![String::new()];
        assert_eq!(parse_trace_str(&write_trace(&t)).unwrap(), t);
    }

    #[test]
    fn normalization_rules() {
        assert_eq!(normalize_value("Intent@3ac4f1"), "Intent@<id>");
        assert_eq!(normalize_value("1571304958123"), "<ts>");
        assert_eq!(normalize_value("DENIED"), "DENIED");
        assert_eq!(normalize_value("123456789012"), "123456789012");
        assert_eq!(
            normalize_value("[android.content.Intent@ab12, at 1571304958123]"),
            "[android.content.Intent@<id>, at <ts>]"
        );
        assert_eq!(normalize_value("user@example"), "user@example");
    }

    #[test]
    fn user_patterns_apply_after_defaults() {
        let n = Normalizer::from_pattern_file(
            "# uuids\n[0-9a-f]{8}-[0-9a-f]{4}\t<uuid>\nsession=\\w+\n",
        )
        .unwrap();
        assert_eq!(n.apply("id 1234abcd-9f9f x"), "id <uuid> x");
        assert_eq!(n.apply("session=abc"), "<*>");
        assert!(Normalizer::from_pattern_file("(unclosed").is_err());
    }

    fn boundary_trace() -> Trace {
        let text = "#trace v1 app=app env=full\n\
0\t1\tAPI_CALL\tfw.X.f()\t-\tvoid\t<root>.Main.main(),app.A.m()\n\
1\t1\tCALLBACK\tapp.A.cb()\t-\tvoid\t<root>.Main.main(),fw.X.g()\n\
2\t1\tAPI_CALL\tfw.X.f()\t-\tvoid\t<root>.Main.main(),app.A.m()\n";
        parse_trace_str(text).unwrap()
    }

    #[test]
    fn filter_keeps_boundary_callees_once() {
        let list = filter_boundary_methods(&boundary_trace(), "app").unwrap();
        let got: Vec<String> = list.methods.iter().map(|m| m.to_string()).collect();
        assert_eq!(got, vec!["app.A.cb()", "fw.X.f()"]);
    }

    #[test]
    fn filter_with_wrong_prefix_is_empty() {
        match filter_boundary_methods(&boundary_trace(), "other") {
            Err(TraceIoError::EmptyResult(p)) => assert_eq!(p, "other"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn filter_excludes_internal_calls_in_full_traces() {
        let text = "#trace v1 app=app env=full\n\
0\t1\tCALLBACK\tapp.A.helper()\t-\tvoid\t<root>.Main.main(),app.A.m()\n\
1\t1\tAPI_CALL\tfw.X.inner()\t-\tvoid\t<root>.Main.main(),fw.X.g()\n\
2\t1\tAPI_CALL\tfw.X.f()\t-\tvoid\t<root>.Main.main(),app.A.m()\n";
        let t = parse_trace_unchecked(text.as_bytes(), &Normalizer::default()).unwrap();
        let list = filter_boundary_methods(&t, "app").unwrap();
        assert_eq!(list.methods.len(), 1);
        assert_eq!(list.methods.iter().next().unwrap().to_string(), "fw.X.f()");
    }

    #[test]
    fn method_list_round_trip() {
        let list = filter_boundary_methods(&boundary_trace(), "app").unwrap();
        let text = write_method_list(&list);
        assert!(text.starts_with("#methods app=app\n"));
        assert_eq!(parse_method_list(&text).unwrap(), list);
    }
}
