//! `fixlocus` command implementations.
//!
//! Each command returns `Ok(())` or a [`CliError`] whose
//! [`exit_code`](CliError::exit_code) is the process status. Data goes to
//! files or stdout; diagnostics and logs go to stderr.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, IsTerminal, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fixlocus_core::baselines::{
    naive_ranking, ochiai, parse_coverage_matrix, topk_report, ScenarioRankings, TopKReport,
};
use fixlocus_core::diff::sib_report;
use fixlocus_core::io::{parse_trace_unchecked, parse_trace_with, write_method_list};
use fixlocus_core::synth::{generate_scenario, goodweather_spec, GroundTruth, ScenarioSpec};
use fixlocus_core::{
    analyze, diff_traces, emit_csv, emit_dot, extract_sibs, filter_boundary_methods, write_trace,
    AnalysisError, DiffOptions, Normalizer, RankError, Trace, TraceIoError, TreeError,
};
use log::{info, warn};
use rayon::prelude::*;
use thiserror::Error;

pub const BASELINE_FILE: &str = "baseline.trace";
pub const FAILURE_FILE: &str = "failure.trace";
pub const TRUTH_FILE: &str = "truth.txt";
pub const COVERAGE_FILE: &str = "coverage.txt";

pub const TECHNIQUES: &[&str] = &["fixlocus", "naive", "ochiai"];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    EmptyFilter(String),
    #[error("no behavioral differences between baseline and failure traces")]
    NoDifferences,
    #[error("{0}")]
    EmptyRanking(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::EmptyFilter(_) => 2,
            CliError::NoDifferences => 3,
            CliError::EmptyRanking(_) => 4,
        }
    }
}

fn input(context: impl std::fmt::Display, err: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{context}: {err}"))
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Tree(TreeError::NoSibs) => CliError::NoDifferences,
            AnalysisError::Rank(RankError::EmptyRanking(_)) => {
                CliError::EmptyRanking(e.to_string())
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "fixlocus",
    version,
    about = "Rank the app methods to change after a framework upgrade breaks a test"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the boundary methods of an app found in a full trace.
    FilterMethods {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        app_package: String,
        /// Method list destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_name = "PATTERN_FILE")]
        normalize: Option<PathBuf>,
    },
    /// Report the suspicious invocation blocks between two traces.
    Detect {
        #[command(flatten)]
        pair: PairArgs,
        /// SIB report destination; stdout when omitted.
        #[arg(long)]
        out_report: Option<PathBuf>,
    },
    /// Rank candidate fix methods.
    Rank {
        #[command(flatten)]
        pair: PairArgs,
        /// Ranking CSV destination; stdout when omitted.
        #[arg(long)]
        out_csv: Option<PathBuf>,
        #[arg(long)]
        out_dot: Option<PathBuf>,
    },
    /// Compare localization techniques over a corpus of scenario directories.
    Compare {
        corpus: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "fixlocus,naive,ochiai")]
        techniques: Vec<String>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Report destination; stdout when omitted.
        #[arg(long)]
        out_report: Option<PathBuf>,
        #[arg(long)]
        value_sensitive: bool,
        #[arg(long, value_name = "PATTERN_FILE")]
        normalize: Option<PathBuf>,
    },
    /// Generate a baseline/failure trace pair with known fix methods.
    Synth {
        /// Scenario spec file, or `goodweather` for the built-in scenario.
        spec: String,
        out_dir: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Args)]
pub struct PairArgs {
    #[arg(long)]
    pub baseline: PathBuf,
    #[arg(long)]
    pub failure: PathBuf,
    /// Include normalized arguments and return values in the comparison.
    #[arg(long)]
    pub value_sensitive: bool,
    #[arg(long, value_name = "PATTERN_FILE")]
    pub normalize: Option<PathBuf>,
}

/// Settings shared by the analysis commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub value_sensitive: bool,
    pub normalizer: Normalizer,
    pub out_csv: Option<PathBuf>,
    pub out_dot: Option<PathBuf>,
    pub out_report: Option<PathBuf>,
    /// Always at least 1.
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            value_sensitive: false,
            normalizer: Normalizer::default(),
            out_csv: None,
            out_dot: None,
            out_report: None,
            jobs: 1,
        }
    }
}

impl RunConfig {
    fn diff_options(&self) -> DiffOptions {
        DiffOptions::value_sensitive(self.value_sensitive)
    }
}

fn load_normalizer(path: Option<&Path>) -> Result<Normalizer, CliError> {
    match path {
        None => Ok(Normalizer::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| input(p.display(), e))?;
            Normalizer::from_pattern_file(&text).map_err(|e| input(p.display(), e))
        }
    }
}

pub fn read_trace(path: &Path, normalizer: &Normalizer) -> Result<Trace, CliError> {
    let file = fs::File::open(path).map_err(|e| input(path.display(), e))?;
    parse_trace_with(io::BufReader::new(file), normalizer).map_err(|e| input(path.display(), e))
}

fn emit(dest: Option<&Path>, text: &str) -> Result<(), CliError> {
    match dest {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| input(dir.display(), e))?;
            }
            fs::write(p, text).map_err(|e| input(p.display(), e))?;
            info!("wrote {}", p.display());
            Ok(())
        }
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| input("stdout", e)),
    }
}

fn color_enabled() -> bool {
    std::env::var_os("FIXLOCUS_NO_COLOR").is_none() && io::stderr().is_terminal()
}

fn bold(s: &str) -> String {
    if color_enabled() {
        format!("\x1b[1m{s}\x1b[0m")
    } else {
        s.to_owned()
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::FilterMethods {
            trace,
            app_package,
            out,
            normalize,
        } => {
            let normalizer = load_normalizer(normalize.as_deref())?;
            cmd_filter_methods(&trace, &app_package, out.as_deref(), &normalizer)
        }
        Command::Detect { pair, out_report } => {
            let config = RunConfig {
                value_sensitive: pair.value_sensitive,
                normalizer: load_normalizer(pair.normalize.as_deref())?,
                out_report,
                ..RunConfig::default()
            };
            cmd_detect(&pair.baseline, &pair.failure, &config)
        }
        Command::Rank {
            pair,
            out_csv,
            out_dot,
        } => {
            let config = RunConfig {
                value_sensitive: pair.value_sensitive,
                normalizer: load_normalizer(pair.normalize.as_deref())?,
                out_csv,
                out_dot,
                ..RunConfig::default()
            };
            cmd_rank(&pair.baseline, &pair.failure, &config)
        }
        Command::Compare {
            corpus,
            techniques,
            jobs,
            out_report,
            value_sensitive,
            normalize,
        } => {
            if jobs == 0 {
                return Err(CliError::Input("--jobs must be at least 1".into()));
            }
            let config = RunConfig {
                value_sensitive,
                normalizer: load_normalizer(normalize.as_deref())?,
                out_report,
                jobs,
                ..RunConfig::default()
            };
            cmd_compare(&corpus, &techniques, &config).map(|_| ())
        }
        Command::Synth {
            spec,
            out_dir,
            seed,
        } => cmd_synth(&spec, &out_dir, seed),
    }
}

/// Method list of the boundary callees for `app_package`. The input may be
/// a full trace including internal calls, so model invariants are not
/// enforced.
pub fn cmd_filter_methods(
    trace: &Path,
    app_package: &str,
    out: Option<&Path>,
    normalizer: &Normalizer,
) -> Result<(), CliError> {
    let file = fs::File::open(trace).map_err(|e| input(trace.display(), e))?;
    let full = parse_trace_unchecked(io::BufReader::new(file), normalizer)
        .map_err(|e| input(trace.display(), e))?;
    let list = match filter_boundary_methods(&full, app_package) {
        Ok(l) => l,
        Err(e @ TraceIoError::EmptyResult(_)) => return Err(CliError::EmptyFilter(e.to_string())),
        Err(e) => return Err(input(trace.display(), e)),
    };
    info!("{} boundary methods", list.methods.len());
    emit(out, &write_method_list(&list))
}

pub fn cmd_detect(baseline: &Path, failure: &Path, config: &RunConfig) -> Result<(), CliError> {
    let base = read_trace(baseline, &config.normalizer)?;
    let fail = read_trace(failure, &config.normalizer)?;
    let hunks = diff_traces(&base, &fail, config.diff_options())
        .map_err(|e| CliError::Input(e.to_string()))?;
    let sibs = extract_sibs(&hunks, &base, &fail);
    if sibs.is_empty() {
        return Err(CliError::NoDifferences);
    }
    info!(
        "{} SIBs, total weight {}",
        sibs.len(),
        sibs.iter().map(|s| s.weight).sum::<u64>()
    );
    emit(config.out_report.as_deref(), &sib_report(&sibs))
}

/// Full pipeline. Nothing is written unless the ranking succeeds.
pub fn cmd_rank(baseline: &Path, failure: &Path, config: &RunConfig) -> Result<(), CliError> {
    let base = read_trace(baseline, &config.normalizer)?;
    let fail = read_trace(failure, &config.normalizer)?;
    let analysis = analyze::<f64>(&base, &fail, config.diff_options())?;
    let csv = emit_csv(&analysis.ranking);
    let dot = emit_dot(&analysis.tree);
    emit(config.out_csv.as_deref(), &csv)?;
    if let Some(p) = &config.out_dot {
        emit(Some(p), &dot)?;
    }
    if let Some(top) = analysis.ranking.first() {
        eprintln!(
            "{} {} ({:.6})",
            bold("top candidate:"),
            top.method,
            top.score.score
        );
    }
    Ok(())
}

fn scenario_dirs(corpus: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(corpus).map_err(|e| input(corpus.display(), e))?;
    let mut dirs = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| input(corpus.display(), e))?.path();
        if path.join(TRUTH_FILE).is_file() {
            dirs.push(path);
        }
    }
    dirs.sort();
    Ok(dirs)
}

/// Strips a `#<line>` statement suffix so statement-level coverage entities
/// compare against method-level ground truth.
fn entity_method(entity: &str) -> &str {
    entity.split_once('#').map_or(entity, |(m, _)| m)
}

fn rank_scenario(dir: &Path, techniques: &[String], config: &RunConfig) -> ScenarioRankings {
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut out = ScenarioRankings {
        name: name.clone(),
        ..Default::default()
    };
    match fs::read_to_string(dir.join(TRUTH_FILE))
        .map_err(|e| e.to_string())
        .and_then(|t| GroundTruth::parse(&t).map_err(|e| e.to_string()))
    {
        Ok(t) => out.truth = t.fix_method_names(),
        Err(e) => warn!("{name}: unreadable ground truth: {e}"),
    }
    let traces = read_trace(&dir.join(BASELINE_FILE), &config.normalizer)
        .and_then(|b| Ok((b, read_trace(&dir.join(FAILURE_FILE), &config.normalizer)?)));
    for tech in techniques {
        let ranking: Result<Vec<String>, String> = match tech.as_str() {
            "fixlocus" => traces
                .as_ref()
                .map_err(|e| e.to_string())
                .and_then(|(b, f)| {
                    analyze::<f64>(b, f, config.diff_options())
                        .map(|a| a.ranking.iter().map(|c| c.method.to_string()).collect())
                        .map_err(|e| e.to_string())
                }),
            "naive" => traces
                .as_ref()
                .map_err(|e| e.to_string())
                .and_then(|(b, f)| {
                    naive_ranking(b, f, config.diff_options())
                        .map(|r| r.iter().map(|m| m.to_string()).collect())
                        .map_err(|e| e.to_string())
                }),
            "ochiai" => {
                let path = dir.join(COVERAGE_FILE);
                if !path.is_file() {
                    info!("{name}: no coverage matrix, ochiai skipped");
                    out.rankings.insert(tech.clone(), None);
                    continue;
                }
                fs::read_to_string(&path)
                    .map_err(|e| e.to_string())
                    .and_then(|t| parse_coverage_matrix(&t).map_err(|e| e.to_string()))
                    .and_then(|m| ochiai::<f64>(&m).map_err(|e| e.to_string()))
                    .map(|scored| {
                        scored
                            .into_iter()
                            .filter(|(_, s)| *s > 0.0)
                            .map(|(e, _)| entity_method(&e).to_owned())
                            .collect()
                    })
            }
            other => Err(format!("unknown technique `{other}`")),
        };
        match ranking {
            Ok(r) => {
                out.rankings.insert(tech.clone(), Some(r));
            }
            Err(e) => {
                warn!("{name}: {tech} failed: {e}");
                out.rankings.insert(tech.clone(), None);
            }
        }
    }
    out
}

/// Evaluates every scenario directory under `corpus` (a directory holding
/// `truth.txt`) and writes the per-technique rank table.
pub fn cmd_compare(
    corpus: &Path,
    techniques: &[String],
    config: &RunConfig,
) -> Result<TopKReport, CliError> {
    if let Some(bad) = techniques
        .iter()
        .find(|t| !TECHNIQUES.contains(&t.as_str()))
    {
        return Err(CliError::Input(format!(
            "unknown technique `{bad}`; expected one of {}",
            TECHNIQUES.join(", ")
        )));
    }
    let dirs = scenario_dirs(corpus)?;
    if dirs.is_empty() {
        return Err(CliError::Input(format!(
            "{}: no scenarios",
            corpus.display()
        )));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.max(1))
        .build()
        .map_err(|e| CliError::Input(e.to_string()))?;
    let scenarios: Vec<ScenarioRankings> = pool.install(|| {
        dirs.par_iter()
            .map(|d| rank_scenario(d, techniques, config))
            .collect()
    });
    let report = topk_report(techniques, &scenarios);
    emit(config.out_report.as_deref(), &report.to_csv())?;
    let summary: BTreeMap<&str, _> = report
        .techniques
        .iter()
        .map(String::as_str)
        .zip(report.counts.iter().map(|c| c.top10))
        .collect();
    eprintln!("{} {summary:?}", bold("top-10 hits:"));
    Ok(report)
}

pub fn cmd_synth(spec: &str, out_dir: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let mut spec = if spec == "goodweather" {
        goodweather_spec()
    } else {
        let text = fs::read_to_string(spec).map_err(|e| input(spec, e))?;
        ScenarioSpec::from_toml(&text).map_err(|e| input(spec, e))?
    };
    if let Some(s) = seed {
        spec.seed = s;
    }
    let scenario = generate_scenario(&spec).map_err(|e| CliError::Input(e.to_string()))?;
    fs::create_dir_all(out_dir).map_err(|e| input(out_dir.display(), e))?;
    emit(
        Some(&out_dir.join(BASELINE_FILE)),
        &write_trace(&scenario.baseline),
    )?;
    emit(
        Some(&out_dir.join(FAILURE_FILE)),
        &write_trace(&scenario.failure),
    )?;
    emit(Some(&out_dir.join(TRUTH_FILE)), &scenario.truth.to_text())
}
