//! Boundary-call trace data model.
//!
//! A [`Trace`] records only interactions that cross the app/framework border:
//! API calls (app code invoking a framework method) and callbacks (framework
//! code invoking an app method). Internal calls are not events, but every
//! event carries the full call stack that led to it, so the caller hierarchy
//! of app methods can still be reconstructed.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::io::Normalizer;

/// Package of the synthetic entry point used for traces that do not come
/// from an Android runtime.
pub const SYNTHETIC_ROOT_PACKAGE: &str = "<root>";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MethodRefError {
    #[error("method reference `{0}` is missing a `(descriptor)` suffix")]
    MissingDescriptor(String),
    #[error("method reference `{0}` must have the form package.Class.method(descriptor)")]
    MissingComponent(String),
    #[error("method reference `{text}` has an invalid {part}")]
    InvalidPart { text: String, part: &'static str },
}

/// Identity of a method: `package.Class.method(descriptor)`.
///
/// Ordering and equality follow the canonical text form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MethodRef {
    package: String,
    class: String,
    method: String,
    descriptor: String,
}

fn valid_ident(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| !c.is_whitespace() && !matches!(c, '.' | '(' | ')' | ',' | ';' | '\\' | '"'))
}

fn valid_package(s: &str) -> bool {
    !s.is_empty() && s.split('.').all(valid_ident)
}

fn valid_descriptor(s: &str) -> bool {
    s.chars()
        .all(|c| !c.is_control() && !matches!(c, '(' | ')' | ';' | '\\' | '"'))
}

impl MethodRef {
    pub fn new(
        package: impl Into<String>,
        class: impl Into<String>,
        method: impl Into<String>,
        descriptor: impl Into<String>,
    ) -> Result<Self, MethodRefError> {
        let m = MethodRef {
            package: package.into(),
            class: class.into(),
            method: method.into(),
            descriptor: descriptor.into(),
        };
        let text = || m.to_string();
        if !valid_package(&m.package) {
            return Err(MethodRefError::InvalidPart {
                text: text(),
                part: "package",
            });
        }
        if !valid_ident(&m.class) {
            return Err(MethodRefError::InvalidPart {
                text: text(),
                part: "class",
            });
        }
        if !valid_ident(&m.method) {
            return Err(MethodRefError::InvalidPart {
                text: text(),
                part: "method name",
            });
        }
        if !valid_descriptor(&m.descriptor) {
            return Err(MethodRefError::InvalidPart {
                text: text(),
                part: "descriptor",
            });
        }
        Ok(m)
    }

    /// The synthetic entry point `<root>.Main.main()`.
    pub fn synthetic_root() -> Self {
        MethodRef {
            package: SYNTHETIC_ROOT_PACKAGE.to_owned(),
            class: "Main".to_owned(),
            method: "main".to_owned(),
            descriptor: String::new(),
        }
    }

    pub fn package(&self) -> &str {
        &self.package
    }

    pub fn class(&self) -> &str {
        &self.class
    }

    pub fn method(&self) -> &str {
        &self.method
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn is_synthetic_root(&self) -> bool {
        self.package == SYNTHETIC_ROOT_PACKAGE
    }

    /// Whether this method belongs to `app_package` or one of its
    /// sub-packages. Matching is segment-wise: `com.app` does not own
    /// `com.application`.
    pub fn belongs_to(&self, app_package: &str) -> bool {
        package_within(&self.package, app_package)
    }

    pub fn origin(&self, app_package: &str) -> Origin {
        if self.belongs_to(app_package) {
            Origin::App
        } else {
            Origin::Framework
        }
    }

    /// `Class.method`, handy for short labels.
    pub fn short_name(&self) -> String {
        format!("{}.{}", self.class, self.method)
    }
}

pub(crate) fn package_within(package: &str, prefix: &str) -> bool {
    package == prefix
        || (package.len() > prefix.len()
            && package.starts_with(prefix)
            && package.as_bytes()[prefix.len()] == b'.')
}

pub(crate) fn is_valid_package(s: &str) -> bool {
    valid_package(s)
}

impl fmt::Display for MethodRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}.{}.{}({})",
            self.package, self.class, self.method, self.descriptor
        )
    }
}

impl FromStr for MethodRef {
    type Err = MethodRefError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let open = s
            .find('(')
            .filter(|_| s.ends_with(')'))
            .ok_or_else(|| MethodRefError::MissingDescriptor(s.to_owned()))?;
        let descriptor = &s[open + 1..s.len() - 1];
        let qualified = &s[..open];
        let missing = || MethodRefError::MissingComponent(s.to_owned());
        let (rest, method) = qualified.rsplit_once('.').ok_or_else(missing)?;
        let (package, class) = rest.rsplit_once('.').ok_or_else(missing)?;
        MethodRef::new(package, class, method, descriptor)
    }
}

impl PartialOrd for MethodRef {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MethodRef {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.to_string().cmp(&other.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// app -> framework
    ApiCall,
    /// framework -> app
    Callback,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::ApiCall => "API_CALL",
            Direction::Callback => "CALLBACK",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "API_CALL" => Ok(Direction::ApiCall),
            "CALLBACK" => Ok(Direction::Callback),
            other => Err(format!("unknown direction `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    App,
    Framework,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StackFrame {
    pub method: MethodRef,
    pub origin: Origin,
}

impl StackFrame {
    pub fn new(method: MethodRef, app_package: &str) -> Self {
        let origin = method.origin(app_package);
        StackFrame { method, origin }
    }
}

/// Recorded return value of a boundary call.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ReturnValue {
    Void,
    Unrecorded,
    Value(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub seq: u64,
    pub thread: u64,
    pub direction: Direction,
    pub callee: MethodRef,
    pub args: Vec<String>,
    pub ret: ReturnValue,
    /// Outermost (entry point) first, immediate caller of `callee` last.
    pub stack: Vec<StackFrame>,
}

impl TraceEvent {
    pub fn caller(&self) -> Option<&StackFrame> {
        self.stack.last()
    }

    /// Whether the event crosses the app/framework border in the direction
    /// it claims, judged against `app_package`. Unlike the validation rule,
    /// this also requires a callback to come from framework code so that
    /// internal app-to-app calls are rejected.
    pub fn is_boundary_for(&self, app_package: &str) -> bool {
        let Some(caller) = self.caller() else {
            return false;
        };
        let callee_app = self.callee.belongs_to(app_package);
        let caller_app = caller.method.belongs_to(app_package);
        match self.direction {
            Direction::ApiCall => !callee_app && caller_app,
            Direction::Callback => callee_app && !caller_app,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub app_package: String,
    pub env_label: String,
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn new(app_package: impl Into<String>, env_label: impl Into<String>) -> Self {
        Trace {
            app_package: app_package.into(),
            env_label: env_label.into(),
            events: Vec::new(),
        }
    }

    /// Entry-point method shared by every event's stack, if any event exists.
    pub fn entry_point(&self) -> Option<&MethodRef> {
        self.events
            .first()
            .and_then(|e| e.stack.first())
            .map(|f| &f.method)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    AppPackage,
    SeqSorted,
    SeqUnique,
    StackNonEmpty,
    CommonEntryPoint,
    Direction,
    FrameOrigin,
    NormalizedValues,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::AppPackage => "app package is a dotted identifier path",
            Rule::SeqSorted => "seq sorted",
            Rule::SeqUnique => "seq values unique",
            Rule::StackNonEmpty => "stack non-empty",
            Rule::CommonEntryPoint => "stack starts at the entry point",
            Rule::Direction => "direction matches callee and caller origin",
            Rule::FrameOrigin => "frame origin matches app package",
            Rule::NormalizedValues => "values normalized",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// `None` for trace-level rules.
    pub seq: Option<u64>,
    pub rule: Rule,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.seq {
            Some(seq) => write!(f, "seq {seq}: {} ({})", self.rule, self.detail),
            None => write!(f, "trace: {} ({})", self.rule, self.detail),
        }
    }
}

/// Checks every trace and event invariant. An empty result means the trace
/// is well formed.
pub fn validate_trace(trace: &Trace) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push =
        |seq: Option<u64>, rule: Rule, detail: String| out.push(Violation { seq, rule, detail });

    if !is_valid_package(&trace.app_package) {
        push(None, Rule::AppPackage, format!("`{}`", trace.app_package));
    }

    let normalizer = Normalizer::default();
    let entry = trace.entry_point();
    let mut seen = HashSet::new();
    let mut prev: Option<u64> = None;

    for ev in &trace.events {
        let seq = Some(ev.seq);
        if let Some(p) = prev {
            if ev.seq < p {
                push(seq, Rule::SeqSorted, format!("follows seq {p}"));
            }
        }
        if !seen.insert(ev.seq) {
            push(
                seq,
                Rule::SeqUnique,
                format!("seq {} appears more than once", ev.seq),
            );
        }
        prev = Some(ev.seq);

        let Some(caller) = ev.stack.last() else {
            push(seq, Rule::StackNonEmpty, "event has no stack".into());
            continue;
        };
        if let Some(entry) = entry {
            if &ev.stack[0].method != entry {
                push(
                    seq,
                    Rule::CommonEntryPoint,
                    format!("stack starts at {} instead of {entry}", ev.stack[0].method),
                );
            }
        }
        for frame in &ev.stack {
            if frame.origin != frame.method.origin(&trace.app_package) {
                push(
                    seq,
                    Rule::FrameOrigin,
                    format!("frame {} has origin {:?}", frame.method, frame.origin),
                );
            }
        }
        let callee_origin = ev.callee.origin(&trace.app_package);
        let caller_origin = caller.method.origin(&trace.app_package);
        match ev.direction {
            Direction::ApiCall => {
                if callee_origin != Origin::Framework || caller_origin != Origin::App {
                    push(
                        seq,
                        Rule::Direction,
                        format!(
                            "API_CALL to {} from {} must go from app to framework",
                            ev.callee, caller.method
                        ),
                    );
                }
            }
            Direction::Callback => {
                if callee_origin != Origin::App {
                    push(
                        seq,
                        Rule::Direction,
                        format!("CALLBACK target {} is not an app method", ev.callee),
                    );
                }
            }
        }
        let ret_text = match &ev.ret {
            ReturnValue::Value(v) => Some(v.as_str()),
            _ => None,
        };
        for v in ev.args.iter().map(String::as_str).chain(ret_text) {
            if normalizer.apply(v) != v {
                push(seq, Rule::NormalizedValues, format!("raw value `{v}`"));
            }
        }
    }
    out
}
