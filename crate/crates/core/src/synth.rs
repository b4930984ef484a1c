//! Synthetic baseline/failure trace pairs with a known fix locus.
//!
//! A scenario describes an app as a forest of methods. Forest roots are
//! invoked by the framework as callbacks from `android.os.Looper.loop()`;
//! each method body is an ordered list of calls, where calls to declared
//! app methods are internal (not recorded) and everything else is an API
//! call recorded as a boundary event. One incompatibility is injected into
//! the body of the injection site, and optional noise events are added
//! identically to both traces.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    is_valid_package, Direction, MethodRef, ReturnValue, StackFrame, Trace, TraceEvent,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SynthError {
    #[error("invalid scenario: {0}")]
    InvalidSpec(String),
    #[error("ground truth line {line}: {reason}")]
    MalformedTruth { line: usize, reason: String },
}

fn invalid(reason: impl Into<String>) -> SynthError {
    SynthError::InvalidSpec(reason.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IncompatibilityKind {
    /// The upgraded framework runs extra boundary calls.
    InsertBlock,
    /// Boundary calls of the old framework disappear.
    DeleteBlock,
    /// A block of calls is swapped for a different one.
    ReplaceBlock,
    /// A permission check is now denied: one inserted check plus a deleted
    /// block made of the resource request and its result callbacks.
    PermissionDenial,
}

impl IncompatibilityKind {
    pub const ALL: [IncompatibilityKind; 4] = [
        IncompatibilityKind::InsertBlock,
        IncompatibilityKind::DeleteBlock,
        IncompatibilityKind::ReplaceBlock,
        IncompatibilityKind::PermissionDenial,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodSpec {
    /// Canonical method reference inside the app package.
    pub name: String,
    /// Calls made by the method, in order.
    #[serde(default)]
    pub body: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub package: String,
    pub kind: IncompatibilityKind,
    pub injection_site: String,
    pub block_size: usize,
    #[serde(default)]
    pub noise: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_baseline_env")]
    pub baseline_env: String,
    #[serde(default = "default_failure_env")]
    pub failure_env: String,
    pub methods: Vec<MethodSpec>,
}

fn default_baseline_env() -> String {
    "baseline".into()
}

fn default_failure_env() -> String {
    "upgraded".into()
}

impl ScenarioSpec {
    pub fn from_toml(text: &str) -> Result<Self, SynthError> {
        toml::from_str(text).map_err(|e| invalid(e.message().to_owned()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario specs always serialize")
    }

    /// Random app shape with a seeded injection site.
    pub fn random(seed: u64, kind: IncompatibilityKind, block_size: usize, noise: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed);
        let package = format!("com.example.app{}", seed % 97);
        let n_methods = rng.gen_range(3..=12);
        let n_roots = rng.gen_range(1..=3.min(n_methods));

        let mut names = Vec::with_capacity(n_methods);
        let mut used = HashSet::new();
        while names.len() < n_methods {
            let class = CLASSES.choose(&mut rng).unwrap();
            let method = METHODS.choose(&mut rng).unwrap();
            let name = format!("{package}.{class}.{method}");
            if used.insert(name.clone()) {
                names.push(name);
            }
        }
        // parent[i] < i for non-roots, so the shape is a forest
        let mut bodies: Vec<Vec<String>> = vec![Vec::new(); n_methods];
        for (i, name) in names.iter().enumerate().skip(n_roots) {
            let parent = rng.gen_range(0..i);
            bodies[parent].push(name.clone());
        }
        for body in bodies.iter_mut() {
            let n_api = rng.gen_range(0..=3);
            for _ in 0..n_api {
                let api = TOPOLOGY_APIS.choose(&mut rng).unwrap().to_string();
                let pos = rng.gen_range(0..=body.len());
                body.insert(pos, api);
            }
        }
        let site = names[rng.gen_range(0..n_methods)].clone();
        ScenarioSpec {
            package,
            kind,
            injection_site: site,
            block_size,
            noise,
            seed,
            baseline_env: default_baseline_env(),
            failure_env: default_failure_env(),
            methods: names
                .into_iter()
                .zip(bodies)
                .map(|(name, body)| MethodSpec { name, body })
                .collect(),
        }
    }
}

const CLASSES: &[&str] = &[
    "MainActivity",
    "SettingsActivity",
    "LocationService",
    "WeatherRepository",
    "NetworkClient",
    "CacheManager",
    "UiController",
    "AlarmReceiver",
    "SyncAdapter",
    "MapFragment",
];

const METHODS: &[&str] = &[
    "onCreate(Bundle)",
    "onResume()",
    "onStart()",
    "refresh()",
    "load(String)",
    "update(int)",
    "render()",
    "fetchData()",
    "handleResult(Object)",
    "schedule(long)",
    "saveState()",
    "bind(View)",
];

const TOPOLOGY_APIS: &[&str] = &[
    "android.widget.TextView.setText(CharSequence)",
    "android.content.Context.getSharedPreferences(String,int)",
    "android.content.SharedPreferences.getString(String,String)",
    "android.view.View.setVisibility(int)",
    "android.net.ConnectivityManager.getActiveNetworkInfo()",
    "android.app.Activity.findViewById(int)",
    "android.content.Context.getSystemService(String)",
    "android.os.Handler.postDelayed(Runnable,long)",
];

const NOISE_APIS: &[&str] = &[
    "android.util.Log.d(String,String)",
    "android.os.SystemClock.uptimeMillis()",
    "android.content.Context.getResources()",
    "android.view.View.invalidate()",
    "android.content.res.Resources.getString(int)",
    "android.os.Looper.myLooper()",
];

const INSERTED_APIS: &[&str] = &[
    "android.app.AppOpsManager.checkOpNoThrow(int,int,String)",
    "android.os.StrictMode.noteSlowCall(String)",
    "android.content.pm.PackageManager.getPermissionInfo(String,int)",
    "android.app.ActivityManager.getRunningAppProcesses()",
    "android.os.UserManager.isUserUnlocked()",
    "android.app.job.JobScheduler.getAllPendingJobs()",
];

const REMOVED_APIS: &[&str] = &[
    "android.net.http.AndroidHttpClient.execute(HttpUriRequest)",
    "android.app.Notification.setLatestEventInfo(Context,CharSequence,CharSequence,PendingIntent)",
    "android.webkit.WebView.setPictureListener(PictureListener)",
    "android.hardware.Camera.open()",
    "android.text.ClipboardManager.setText(CharSequence)",
    "android.app.ActivityManager.getRecentTasks(int,int)",
];

const REPLACEMENT_APIS: &[&str] = &[
    "android.net.Network.openConnection(URL)",
    "android.app.Notification$Builder.build()",
    "android.hardware.camera2.CameraManager.openCamera(String,StateCallback,Handler)",
    "android.content.ClipboardManager.setPrimaryClip(ClipData)",
    "android.app.usage.UsageStatsManager.queryUsageStats(int,long,long)",
    "android.webkit.WebView.evaluateJavascript(String,ValueCallback)",
];

const ANCHOR_API: &str = "android.util.Log.i(String,String)";
const DISPATCHER: &str = "android.os.Looper.loop()";
const PERMISSION_CHECK: &str = "android.content.ContextWrapper.checkSelfPermission(String)";
const PERMISSION_NAME: &str = "android.permission.ACCESS_FINE_LOCATION";
const RESOURCE_REQUEST: &str =
    "android.location.LocationManager.requestLocationUpdates(String,long,float,LocationListener)";

/// Distinct method names taken from `pool`, extended with numbered classes
/// once the pool is exhausted.
fn block_names(pool: &[&str], n: usize) -> Vec<MethodRef> {
    (0..n)
        .map(|i| {
            let base: MethodRef = pool[i % pool.len()].parse().expect("valid pool entry");
            let round = i / pool.len();
            if round == 0 {
                base
            } else {
                MethodRef::new(
                    base.package(),
                    format!("{}{}", base.class(), round + 1),
                    base.method(),
                    base.descriptor(),
                )
                .expect("suffixing keeps the name valid")
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub app_package: String,
    pub fix_methods: BTreeSet<MethodRef>,
    pub sib_callees: BTreeSet<MethodRef>,
}

impl GroundTruth {
    pub fn fix_method_names(&self) -> BTreeSet<String> {
        self.fix_methods.iter().map(|m| m.to_string()).collect()
    }

    /// `#truth v1 app=<package>` then `fix<TAB>method` and `sib<TAB>method`
    /// lines, each group sorted.
    pub fn to_text(&self) -> String {
        let mut out = format!("#truth v1 app={}\n", self.app_package);
        for m in &self.fix_methods {
            writeln!(out, "fix\t{m}").unwrap();
        }
        for m in &self.sib_callees {
            writeln!(out, "sib\t{m}").unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, SynthError> {
        let bad = |line: usize, reason: &str| SynthError::MalformedTruth {
            line,
            reason: reason.to_owned(),
        };
        let mut lines = text.lines().enumerate();
        let app = lines
            .next()
            .and_then(|(_, l)| l.trim_end().strip_prefix("#truth v1 app="))
            .ok_or_else(|| bad(1, "expected header `#truth v1 app=<package>`"))?;
        let mut truth = GroundTruth {
            app_package: app.to_owned(),
            fix_methods: BTreeSet::new(),
            sib_callees: BTreeSet::new(),
        };
        for (idx, line) in lines {
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let (tag, m) = line
                .split_once('\t')
                .ok_or_else(|| bad(idx + 1, "expected `fix|sib<TAB>method`"))?;
            let m: MethodRef = m
                .parse()
                .map_err(|e: crate::model::MethodRefError| bad(idx + 1, &e.to_string()))?;
            match tag {
                "fix" => truth.fix_methods.insert(m),
                "sib" => truth.sib_callees.insert(m),
                _ => return Err(bad(idx + 1, "tag must be `fix` or `sib`")),
            };
        }
        if truth.fix_methods.is_empty() {
            return Err(bad(1, "no `fix` entry"));
        }
        Ok(truth)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub baseline: Trace,
    pub failure: Trace,
    pub truth: GroundTruth,
}

#[derive(Debug, Clone)]
struct Draft {
    direction: Direction,
    callee: MethodRef,
    args: Vec<String>,
    ret: ReturnValue,
    stack: Vec<MethodRef>,
}

impl Draft {
    fn api(callee: MethodRef, stack: &[MethodRef]) -> Self {
        Draft {
            direction: Direction::ApiCall,
            callee,
            args: Vec::new(),
            ret: ReturnValue::Void,
            stack: stack.to_vec(),
        }
    }

    /// Stack for a call issued right after this event by the same code.
    fn context(&self) -> Vec<MethodRef> {
        match self.direction {
            Direction::ApiCall => self.stack.clone(),
            Direction::Callback => {
                let mut s = self.stack.clone();
                s.push(self.callee.clone());
                s
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Slot {
    Event(Draft),
    /// Start of the injection site's body.
    Head(Vec<MethodRef>),
    /// Right after the injection site's first (anchor) API call.
    AfterAnchor,
}

struct Topology {
    methods: Vec<MethodRef>,
    bodies: Vec<Vec<MethodRef>>,
    index: HashMap<MethodRef, usize>,
    roots: Vec<usize>,
    parent: Vec<Option<usize>>,
}

fn parse_method(text: &str, what: &str) -> Result<MethodRef, SynthError> {
    text.parse()
        .map_err(|e| invalid(format!("{what} `{text}`: {e}")))
}

fn build_topology(spec: &ScenarioSpec) -> Result<Topology, SynthError> {
    if !is_valid_package(&spec.package) {
        return Err(invalid(format!(
            "package `{}` is not a dotted identifier path",
            spec.package
        )));
    }
    if spec.methods.is_empty() {
        return Err(invalid("topology declares no methods"));
    }
    let mut methods = Vec::new();
    let mut index = HashMap::new();
    for m in &spec.methods {
        let r = parse_method(&m.name, "method")?;
        if !r.belongs_to(&spec.package) {
            return Err(invalid(format!(
                "method {r} is outside package {}",
                spec.package
            )));
        }
        if index.insert(r.clone(), methods.len()).is_some() {
            return Err(invalid(format!("method {r} is declared twice")));
        }
        methods.push(r);
    }
    let mut bodies = Vec::new();
    let mut parent = vec![None; methods.len()];
    for (i, m) in spec.methods.iter().enumerate() {
        let mut body = Vec::new();
        for call in &m.body {
            let r = parse_method(call, "call")?;
            if r.belongs_to(&spec.package) {
                let Some(&child) = index.get(&r) else {
                    return Err(invalid(format!(
                        "{} calls undeclared app method {r}",
                        methods[i]
                    )));
                };
                if parent[child].replace(i).is_some() {
                    return Err(invalid(format!("method {r} has more than one call site")));
                }
            }
            body.push(r);
        }
        bodies.push(body);
    }
    let roots: Vec<usize> = (0..methods.len())
        .filter(|&i| parent[i].is_none())
        .collect();
    // Every method must hang below a root; otherwise the shape has a cycle.
    let mut seen = vec![false; methods.len()];
    let mut stack = roots.clone();
    while let Some(i) = stack.pop() {
        seen[i] = true;
        for c in &bodies[i] {
            if let Some(&ci) = index.get(c) {
                stack.push(ci);
            }
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(invalid(format!(
            "method {} is part of a call cycle",
            methods[i]
        )));
    }
    Ok(Topology {
        methods,
        bodies,
        index,
        roots,
        parent,
    })
}

struct Plan {
    slots: Vec<Slot>,
}

fn execute(
    topo: &Topology,
    m: usize,
    stack: &mut Vec<MethodRef>,
    site: usize,
    kind: IncompatibilityKind,
    slots: &mut Vec<Slot>,
) {
    stack.push(topo.methods[m].clone());
    let body = &topo.bodies[m];
    let mut rest: &[MethodRef] = body;
    if m == site {
        slots.push(Slot::Head(stack.clone()));
        if matches!(
            kind,
            IncompatibilityKind::DeleteBlock | IncompatibilityKind::PermissionDenial
        ) {
            // The removed block needs a surviving call of the site in front
            // of it so it anchors there.
            match body.first() {
                Some(first) if !topo.index.contains_key(first) => {
                    slots.push(Slot::Event(Draft::api(first.clone(), stack)));
                    rest = &body[1..];
                }
                _ => {
                    let anchor = ANCHOR_API.parse().unwrap();
                    slots.push(Slot::Event(Draft::api(anchor, stack)));
                }
            }
            slots.push(Slot::AfterAnchor);
        }
    }
    for call in rest {
        match topo.index.get(call) {
            Some(&child) => execute(topo, child, stack, site, kind, slots),
            None => slots.push(Slot::Event(Draft::api(call.clone(), stack))),
        }
    }
    stack.pop();
}

fn plan(spec: &ScenarioSpec, topo: &Topology, site: usize) -> Plan {
    let root = MethodRef::synthetic_root();
    let dispatcher: MethodRef = DISPATCHER.parse().unwrap();
    let mut slots = Vec::new();
    for &r in &topo.roots {
        let base = vec![root.clone(), dispatcher.clone()];
        slots.push(Slot::Event(Draft {
            direction: Direction::Callback,
            callee: topo.methods[r].clone(),
            args: Vec::new(),
            ret: ReturnValue::Void,
            stack: base.clone(),
        }));
        let mut stack = base;
        execute(topo, r, &mut stack, site, spec.kind, &mut slots);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..spec.noise {
        // Never in front of the first callback, so a previous event exists.
        let pos = rng.gen_range(1..=slots.len());
        let context = slots[..pos]
            .iter()
            .rev()
            .find_map(|s| match s {
                Slot::Event(d) => Some(d.context()),
                _ => None,
            })
            .expect("first slot is an event");
        let callee: MethodRef = NOISE_APIS.choose(&mut rng).unwrap().parse().unwrap();
        let mut d = Draft::api(callee, &context);
        if rng.gen_bool(0.5) {
            d.args = vec![format!("{}", rng.gen_range(0..1000))];
        }
        slots.insert(pos, Slot::Event(d));
    }
    Plan { slots }
}

struct Injection {
    head_baseline: Vec<Draft>,
    head_failure: Vec<Draft>,
    after_baseline: Vec<Draft>,
    after_failure: Vec<Draft>,
    sib_callees: Vec<MethodRef>,
}

fn injection(spec: &ScenarioSpec, site: &MethodRef, site_stack: &[MethodRef]) -> Injection {
    let k = spec.block_size;
    let api_block = |pool: &[&str]| -> Vec<Draft> {
        block_names(pool, k)
            .into_iter()
            .map(|c| Draft::api(c, site_stack))
            .collect()
    };
    let mut inj = Injection {
        head_baseline: Vec::new(),
        head_failure: Vec::new(),
        after_baseline: Vec::new(),
        after_failure: Vec::new(),
        sib_callees: Vec::new(),
    };
    match spec.kind {
        IncompatibilityKind::InsertBlock => {
            inj.head_failure = api_block(INSERTED_APIS);
            inj.sib_callees = block_names(INSERTED_APIS, k);
        }
        IncompatibilityKind::DeleteBlock => {
            inj.after_baseline = api_block(REMOVED_APIS);
            inj.sib_callees = block_names(REMOVED_APIS, k);
        }
        IncompatibilityKind::ReplaceBlock => {
            inj.head_baseline = api_block(REMOVED_APIS);
            inj.head_failure = api_block(REPLACEMENT_APIS);
            inj.sib_callees = block_names(REPLACEMENT_APIS, k);
        }
        IncompatibilityKind::PermissionDenial => {
            let check: MethodRef = PERMISSION_CHECK.parse().unwrap();
            let mut d = Draft::api(check.clone(), site_stack);
            d.args = vec![PERMISSION_NAME.to_owned()];
            d.ret = ReturnValue::Value("DENIED".into());
            inj.head_failure = vec![d];

            let request: MethodRef = RESOURCE_REQUEST.parse().unwrap();
            let mut req = Draft::api(request.clone(), site_stack);
            req.args = vec!["gps".into(), "1000".into(), "0.0".into(), "listener".into()];
            inj.after_baseline.push(req);
            let listener = listener_for(site);
            let dispatch = vec![MethodRef::synthetic_root(), DISPATCHER.parse().unwrap()];
            for i in 1..k {
                inj.after_baseline.push(Draft {
                    direction: Direction::Callback,
                    callee: listener.clone(),
                    args: vec![format!("Location[gps {i}]")],
                    ret: ReturnValue::Void,
                    stack: dispatch.clone(),
                });
            }
            inj.sib_callees = vec![check, request];
            if k > 1 {
                inj.sib_callees.push(listener);
            }
        }
    }
    inj
}

fn listener_for(site: &MethodRef) -> MethodRef {
    MethodRef::new(
        site.package(),
        site.class(),
        "onLocationChanged",
        "Location",
    )
    .expect("derived from a valid method")
}

fn realize(drafts: impl IntoIterator<Item = Draft>, app: &str, env: &str) -> Trace {
    let mut t = Trace::new(app, env);
    for (seq, d) in drafts.into_iter().enumerate() {
        t.events.push(TraceEvent {
            seq: seq as u64,
            thread: 1,
            direction: d.direction,
            callee: d.callee,
            args: d.args,
            ret: d.ret,
            stack: d
                .stack
                .into_iter()
                .map(|m| StackFrame::new(m, app))
                .collect(),
        });
    }
    t
}

/// Builds the trace pair and ground truth. Pure in `spec`, including seed.
pub fn generate_scenario(spec: &ScenarioSpec) -> Result<Scenario, SynthError> {
    if spec.block_size == 0 {
        return Err(invalid("block size must be at least 1"));
    }
    let topo = build_topology(spec)?;
    let site_ref = parse_method(&spec.injection_site, "injection site")?;
    let site = *topo
        .index
        .get(&site_ref)
        .ok_or_else(|| invalid(format!("injection site {site_ref} is not in the topology")))?;

    let plan = plan(spec, &topo, site);
    let site_stack = plan
        .slots
        .iter()
        .find_map(|s| match s {
            Slot::Head(st) => Some(st.clone()),
            _ => None,
        })
        .expect("every declared method executes");
    let inj = injection(spec, &site_ref, &site_stack);

    let used: HashSet<&MethodRef> = topo.bodies.iter().flatten().chain(&topo.methods).collect();
    if let Some(clash) = inj.sib_callees.iter().find(|c| used.contains(c)) {
        return Err(invalid(format!("topology uses reserved method {clash}")));
    }

    let mut baseline = Vec::new();
    let mut failure = Vec::new();
    for slot in plan.slots {
        match slot {
            Slot::Event(d) => {
                baseline.push(d.clone());
                failure.push(d);
            }
            Slot::Head(_) => {
                baseline.extend(inj.head_baseline.iter().cloned());
                failure.extend(inj.head_failure.iter().cloned());
            }
            Slot::AfterAnchor => {
                baseline.extend(inj.after_baseline.iter().cloned());
                failure.extend(inj.after_failure.iter().cloned());
            }
        }
    }

    let mut fix_methods = BTreeSet::from([site_ref.clone()]);
    if spec.kind == IncompatibilityKind::PermissionDenial {
        if let Some(p) = topo.parent[site] {
            fix_methods.insert(topo.methods[p].clone());
        }
    }
    Ok(Scenario {
        baseline: realize(baseline, &spec.package, &spec.baseline_env),
        failure: realize(failure, &spec.package, &spec.failure_env),
        truth: GroundTruth {
            app_package: spec.package.clone(),
            fix_methods,
            sib_callees: inj.sib_callees.into_iter().collect(),
        },
    })
}

/// Scenario spec of the built-in Good Weather analog.
pub fn goodweather_spec() -> ScenarioSpec {
    let p = "org.asdtm.goodweather";
    let m = |s: &str| format!("{p}.{s}");
    ScenarioSpec {
        package: p.to_owned(),
        kind: IncompatibilityKind::PermissionDenial,
        injection_site: m("MainActivity.gpsRequestLocation()"),
        block_size: 3,
        noise: 0,
        seed: 0,
        baseline_env: "API 22".into(),
        failure_env: "API 23".into(),
        methods: vec![
            MethodSpec {
                name: m("MainActivity.onCreate(Bundle)"),
                body: vec![
                    "android.app.Activity.setContentView(int)".into(),
                    "android.content.Context.getSystemService(String)".into(),
                    m("MainActivity.updateUI()"),
                ],
            },
            MethodSpec {
                name: m("MainActivity.updateUI()"),
                body: vec![
                    "android.content.Context.getSharedPreferences(String,int)".into(),
                    "android.widget.TextView.setText(CharSequence)".into(),
                ],
            },
            MethodSpec {
                name: m("MainActivity.onCreateOptionsMenu(Menu)"),
                body: vec!["android.view.MenuInflater.inflate(int,Menu)".into()],
            },
            MethodSpec {
                name: m("MainActivity.onOptionsItemSelected(MenuItem)"),
                body: vec![
                    "android.view.MenuItem.getItemId()".into(),
                    m("MainActivity.gpsRequestLocation()"),
                ],
            },
            MethodSpec {
                name: m("MainActivity.gpsRequestLocation()"),
                body: vec![
                    "android.app.ProgressDialog.show(Context,CharSequence,CharSequence)".into(),
                ],
            },
        ],
    }
}

/// Good Weather: location updates silently stop once the upgraded framework
/// denies the location permission that was implicitly granted before.
pub fn goodweather_scenario() -> Scenario {
    generate_scenario(&goodweather_spec()).expect("built-in scenario is valid")
}
