//! Experiment harness behind the `condgrad` binary.
//!
//! Subcommands: `run` (one solve, trace CSV), `experiment` (batch solves from
//! a TOML config with per-rule averages), `bounds` (trace against the
//! theoretical envelopes) and `check` (sampled constant diagnostics).

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::{CompositeProblem, FactorLaw, Family, Instance, InstanceSpec};
use crate::solver::{solve, SolverTrace, StepRule, Termination, DEFAULT_SCHEDULE_START};
use crate::theory::{self, Algorithm, RateBoundSpec, RateEnvelope, Regime};

/// Exit code for a config or usage error.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code when some run failed or missed its tolerance.
pub const EXIT_FAILURES: i32 = 1;

/// Step rule as written in a config; missing constants come from the
/// instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RuleConfig {
    ParamDependent {
        nu: Option<f64>,
        m_nu: Option<f64>,
    },
    Adaptive {
        #[serde(default = "default_l_init")]
        l_init: f64,
    },
    Diminishing {
        #[serde(default = "default_start")]
        start: usize,
    },
    Nesterov {
        #[serde(default = "default_start")]
        start: usize,
    },
    ShortStep {
        l: f64,
    },
}

fn default_start() -> usize {
    DEFAULT_SCHEDULE_START
}

fn default_l_init() -> f64 {
    1.0
}

impl RuleConfig {
    pub fn resolve(&self, problem: &dyn CompositeProblem) -> Result<StepRule> {
        let rule = match *self {
            RuleConfig::ParamDependent { nu, m_nu } => {
                let known = problem.constants();
                let nu = nu.or(known.nu);
                let m_nu = m_nu.or(known.m_nu);
                match (nu, m_nu) {
                    (Some(nu), Some(m_nu)) => StepRule::ParamDependent { nu, m_nu },
                    _ => {
                        return Err(Error::Config(
                            "param_dependent needs nu and m_nu; this family does not certify them".into(),
                        ))
                    }
                }
            }
            RuleConfig::Adaptive { l_init } => StepRule::AdaptiveLineSearch { l_init },
            RuleConfig::Diminishing { start } => StepRule::Diminishing { start },
            RuleConfig::Nesterov { start } => StepRule::NesterovDiminishing { start },
            RuleConfig::ShortStep { l } => StepRule::ShortStep { l },
        };
        rule.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(rule)
    }

    /// Label used in summaries and trace file names.
    pub fn label(&self) -> String {
        match *self {
            RuleConfig::ParamDependent { .. } => "param_dependent".into(),
            RuleConfig::Adaptive { l_init } => format!("adaptive_l{l_init}"),
            RuleConfig::Diminishing { start } => with_start("diminishing", start),
            RuleConfig::Nesterov { start } => with_start("nesterov", start),
            RuleConfig::ShortStep { l } => format!("short_step_l{l}"),
        }
    }
}

fn with_start(name: &str, start: usize) -> String {
    if start == DEFAULT_SCHEDULE_START {
        name.into()
    } else {
        format!("{name}_from{start}")
    }
}

/// One `[[experiment]]` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(flatten)]
    pub family: Family,
    pub rules: Vec<RuleConfig>,
    #[serde(default = "default_n_seeds")]
    pub n_seeds: usize,
    #[serde(default)]
    pub base_seed: u64,
    pub rel_gap_tol: f64,
    pub max_iter: Option<usize>,
    pub max_seconds: Option<f64>,
    /// Write one trace CSV per run under `<out-dir>/<name>/`.
    #[serde(default = "default_true")]
    pub write_traces: bool,
}

fn default_n_seeds() -> usize {
    1
}

fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_seeds == 0 {
            return Err(Error::Config(format!("{}: n_seeds must be at least 1", self.name)));
        }
        if !(self.rel_gap_tol > 0.0 && self.rel_gap_tol < 1.0) {
            return Err(Error::Config(format!("{}: rel_gap_tol must lie in (0, 1)", self.name)));
        }
        if self.rules.is_empty() {
            return Err(Error::Config(format!("{}: at least one rule is required", self.name)));
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::Config(format!("invalid experiment name {:?}", self.name)));
        }
        Ok(())
    }

    pub fn termination(&self) -> Termination {
        Termination { rel_gap_tol: Some(self.rel_gap_tol), max_iter: self.max_iter, max_seconds: self.max_seconds }
    }
}

#[derive(Debug, Clone, Deserialize)]
struct ConfigFile {
    experiment: Vec<ExperimentConfig>,
}

pub fn parse_config(text: &str) -> Result<Vec<ExperimentConfig>> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    for cfg in &file.experiment {
        cfg.validate()?;
    }
    Ok(file.experiment)
}

pub fn load_config(path: &Path) -> Result<Vec<ExperimentConfig>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Outcome of one (seed, rule) solve.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub seed: u64,
    pub rule: RuleConfig,
    pub result: std::result::Result<SolverTrace, String>,
}

impl RunResult {
    pub fn succeeded(&self) -> bool {
        matches!(&self.result, Ok(trace) if trace.status.is_success())
    }
}

/// Per-rule aggregate over the successful runs of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub experiment: String,
    pub family: Family,
    pub rule: String,
    pub runs: usize,
    pub successes: usize,
    pub avg_iterations: Option<f64>,
    pub avg_seconds: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub rows: Vec<SummaryRow>,
    pub runs: Vec<RunResult>,
}

impl ExperimentOutcome {
    pub fn all_succeeded(&self) -> bool {
        self.runs.iter().all(RunResult::succeeded)
    }
}

/// Generates each seed's instance once and solves it with every rule.
/// Seeds are processed in parallel; results come back in seed order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let term = cfg.termination();
    let seeds: Vec<u64> = (0..cfg.n_seeds as u64).map(|i| cfg.base_seed.wrapping_add(i)).collect();
    let per_seed: Vec<Result<Vec<RunResult>>> = seeds
        .par_iter()
        .map(|&seed| {
            let instance = InstanceSpec { family: cfg.family.clone(), seed }.generate()?;
            let x0 = instance.initial_point();
            let mut out = Vec::with_capacity(cfg.rules.len());
            for rule in &cfg.rules {
                let result =
                    rule.resolve(&instance).and_then(|r| solve(&instance, r, &x0, term)).map_err(|e| e.to_string());
                out.push(RunResult { seed, rule: *rule, result });
            }
            Ok(out)
        })
        .collect();
    let mut runs = Vec::new();
    for r in per_seed {
        runs.extend(r?);
    }
    let rows = summarize(cfg, &runs);
    Ok(ExperimentOutcome { rows, runs })
}

fn summarize(cfg: &ExperimentConfig, runs: &[RunResult]) -> Vec<SummaryRow> {
    cfg.rules
        .iter()
        .map(|rule| {
            let mine: Vec<&RunResult> = runs.iter().filter(|r| r.rule == *rule).collect();
            let ok: Vec<&SolverTrace> =
                mine.iter().filter(|r| r.succeeded()).filter_map(|r| r.result.as_ref().ok()).collect();
            let avg = |f: &dyn Fn(&SolverTrace) -> f64| {
                (!ok.is_empty()).then(|| ok.iter().map(|t| f(t)).sum::<f64>() / ok.len() as f64)
            };
            SummaryRow {
                experiment: cfg.name.clone(),
                family: cfg.family.clone(),
                rule: rule.label(),
                runs: mine.len(),
                successes: ok.len(),
                avg_iterations: avg(&|t| t.iterations() as f64),
                avg_seconds: avg(&|t| t.elapsed()),
            }
        })
        .collect()
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Trace CSV: `t,phi,delta,delta_star,tau,L,inner,elapsed_s`.
pub fn trace_csv(trace: &SolverTrace) -> String {
    let mut s = String::from("t,phi,delta,delta_star,tau,L,inner,elapsed_s\n");
    for r in &trace.records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.t,
            r.phi,
            r.delta,
            r.delta_star,
            opt(r.tau),
            opt(r.lipschitz),
            opt(r.inner),
            r.elapsed
        );
    }
    s
}

pub fn emit_trace_csv(trace: &SolverTrace, path: &Path) -> Result<()> {
    if trace.records.is_empty() {
        return Err(Error::Domain("cannot write an empty trace".into()));
    }
    write_file(path, &trace_csv(trace))
}

/// Bounds CSV: `t,phi_gap,envelope,delta_star,delta_star_bound,valid`.
///
/// `phi_star` is the reference optimal value. `valid` marks the iterations
/// inside the envelope's range of validity.
pub fn bounds_csv(trace: &SolverTrace, spec: &RateBoundSpec, rule: StepRule, phi_star: f64) -> Result<String> {
    let env = envelope_for(trace, spec, rule, phi_star)?;
    let mut s = String::from("t,phi_gap,envelope,delta_star,delta_star_bound,valid\n");
    for r in &trace.records {
        let envelope = env.phi_gap_bound(r.t);
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.t,
            r.phi - phi_star,
            opt(envelope),
            r.delta_star,
            opt(env.delta_star_bound(r.t)),
            envelope.is_some()
        );
    }
    Ok(s)
}

/// The theoretical envelope matching `rule` for this trace.
pub fn envelope_for(trace: &SolverTrace, spec: &RateBoundSpec, rule: StepRule, phi_star: f64) -> Result<RateEnvelope> {
    let gaps: Vec<f64> = trace.records.iter().map(|r| r.phi - phi_star).collect();
    match rule {
        StepRule::ParamDependent { .. } => RateEnvelope::new(spec, Algorithm::ParamDependent, &gaps, None, None),
        StepRule::AdaptiveLineSearch { l_init } => {
            let first = &trace.records[0];
            let tl0 = theory::tilde_l(first.delta, first.dist, spec.nu, spec.m_nu);
            RateEnvelope::new(spec, Algorithm::Adaptive, &gaps, Some(tl0), Some(l_init))
        }
        other => Err(Error::Domain(format!("no rate envelope for the {} rule", other.name()))),
    }
}

pub fn emit_bounds_csv(
    trace: &SolverTrace,
    spec: &RateBoundSpec,
    rule: StepRule,
    phi_star: f64,
    path: &Path,
) -> Result<()> {
    write_file(path, &bounds_csv(trace, spec, rule, phi_star)?)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, contents)?;
    Ok(())
}

/// Summary CSV with one row per (experiment, rule).
pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = String::from("experiment,family,params,rule,runs,successes,avg_iterations,avg_seconds\n");
    for r in rows {
        let (family, params) = family_echo(&r.family);
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.experiment,
            family,
            params,
            r.rule,
            r.runs,
            r.successes,
            opt(r.avg_iterations),
            opt(r.avg_seconds)
        );
    }
    s
}

fn family_echo(f: &Family) -> (&'static str, String) {
    match *f {
        Family::LqBall { n, q, p } => ("lq_ball", format!("n={n} q={q} p={p}")),
        Family::Entropy { m, n, p, lambda } => ("entropy", format!("m={m} n={n} p={p} lambda={lambda}")),
        Family::Nmf { n, m, k, alpha, lambda, v_law } => {
            ("nmf", format!("n={n} m={m} k={k} alpha={alpha} lambda={lambda} v_law={}", v_law_name(v_law)))
        }
    }
}

fn v_law_name(law: FactorLaw) -> &'static str {
    match law {
        FactorLaw::Normal => "normal",
        FactorLaw::HalfNormal => "half_normal",
    }
}

#[derive(Debug, Parser)]
#[command(name = "condgrad", version, about = "Conditional gradient methods for composite minimization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one generated instance and write its trace.
    Run(RunArgs),
    /// Run every experiment of a config file and print per-rule averages.
    Experiment(ExperimentArgs),
    /// Compare one run against its theoretical envelope.
    Bounds(BoundsArgs),
    /// Sampled checks of the Hölder and uniform-convexity constants.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    LqBall,
    Entropy,
    Nmf,
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub m: usize,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    /// Entry law of the NMF factor `Ṽ`.
    #[arg(long, value_enum, default_value = "normal")]
    pub v_law: VLawArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VLawArg {
    Normal,
    HalfNormal,
}

impl ProblemArgs {
    pub fn spec(&self) -> InstanceSpec {
        let family = match self.family {
            FamilyArg::LqBall => Family::LqBall { n: self.n, q: self.q, p: self.p },
            FamilyArg::Entropy => Family::Entropy { m: self.m, n: self.n, p: self.p, lambda: self.lambda },
            FamilyArg::Nmf => Family::Nmf {
                n: self.n,
                m: self.m,
                k: self.k,
                alpha: self.alpha,
                lambda: self.lambda,
                v_law: match self.v_law {
                    VLawArg::Normal => FactorLaw::Normal,
                    VLawArg::HalfNormal => FactorLaw::HalfNormal,
                },
            },
        };
        InstanceSpec { family, seed: self.seed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    ParamDependent,
    Adaptive,
    Diminishing,
    Nesterov,
    ShortStep,
}

#[derive(Debug, Clone, Args)]
pub struct RuleArgs {
    #[arg(long, value_enum, default_value = "adaptive")]
    pub rule: RuleArg,
    /// `L_{−1}` of the adaptive rule.
    #[arg(long, default_value_t = 1.0)]
    pub l_init: f64,
    /// `L` of the short-step rule.
    #[arg(long)]
    pub l: Option<f64>,
    /// Index of the first step of an open-loop schedule.
    #[arg(long, default_value_t = DEFAULT_SCHEDULE_START)]
    pub start: usize,
}

impl RuleArgs {
    pub fn config(&self) -> Result<RuleConfig> {
        Ok(match self.rule {
            RuleArg::ParamDependent => RuleConfig::ParamDependent { nu: None, m_nu: None },
            RuleArg::Adaptive => RuleConfig::Adaptive { l_init: self.l_init },
            RuleArg::Diminishing => RuleConfig::Diminishing { start: self.start },
            RuleArg::Nesterov => RuleConfig::Nesterov { start: self.start },
            RuleArg::ShortStep => {
                RuleConfig::ShortStep { l: self.l.ok_or_else(|| Error::Config("short_step needs --l".into()))? }
            }
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub rule: RuleArgs,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub max_seconds: Option<f64>,
    /// Directory for `trace.csv`; the trace goes to stdout otherwise.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "results")]
    pub out_dir: PathBuf,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Overrides every experiment's base seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides every experiment's tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Overrides every experiment's iteration cap.
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    /// Uniform convexity when the family certifies it, else bounded domain.
    Auto,
    Bounded,
    UniformlyConvex,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub rule: RuleArgs,
    #[arg(long, value_enum, default_value = "auto")]
    pub regime: RegimeArg,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    /// Tolerance of the reference solve that supplies `φ*`.
    #[arg(long, default_value_t = 1e-12)]
    pub reference_tol: f64,
    #[arg(long, default_value = "results")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value_t = 500)]
    pub pairs: usize,
}

/// Parses `std::env::args` and runs; returns the process exit code.
pub fn main_from_env() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Domain(_) => EXIT_CONFIG,
                _ => EXIT_FAILURES,
            }
        }
    }
}

pub fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Experiment(args) => cmd_experiment(&args),
        Command::Bounds(args) => cmd_bounds(&args),
        Command::Check(args) => cmd_check(&args),
    }
}

fn generate(args: &ProblemArgs) -> Result<Instance> {
    args.spec().generate().map_err(|e| Error::Config(e.to_string()))
}

fn cmd_run(args: &RunArgs) -> Result<i32> {
    let instance = generate(&args.problem)?;
    let rule = args.rule.config()?.resolve(&instance)?;
    let term = Termination { rel_gap_tol: Some(args.tol), max_iter: args.max_iter, max_seconds: args.max_seconds };
    let trace = solve(&instance, rule, &instance.initial_point(), term)?;
    match &args.out_dir {
        Some(dir) => {
            let path = dir.join("trace.csv");
            emit_trace_csv(&trace, &path)?;
            fs::write(dir.join("instance.json"), args.problem.spec().to_json())?;
            eprintln!("{} iterations, status {:?}, trace in {}", trace.iterations(), trace.status, path.display());
        }
        None => io::stdout().write_all(trace_csv(&trace).as_bytes())?,
    }
    Ok(if trace.status.is_success() { 0 } else { EXIT_FAILURES })
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<i32> {
    let mut configs = load_config(&args.config)?;
    for cfg in &mut configs {
        if let Some(seed) = args.seed {
            cfg.base_seed = seed;
        }
        if let Some(tol) = args.tol {
            cfg.rel_gap_tol = tol;
        }
        if let Some(cap) = args.max_iter {
            cfg.max_iter = Some(cap);
        }
        cfg.validate()?;
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(jobs);
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;

    let mut rows = Vec::new();
    let mut all_ok = true;
    for cfg in &configs {
        let outcome = pool.install(|| run_experiment(cfg))?;
        if cfg.write_traces {
            for run in &outcome.runs {
                if let Ok(trace) = &run.result {
                    let path = args.out_dir.join(&cfg.name).join(format!("{}_seed{}.csv", run.rule.label(), run.seed));
                    emit_trace_csv(trace, &path)?;
                }
            }
        }
        for run in &outcome.runs {
            match &run.result {
                Err(e) => eprintln!("{} seed {} {}: error: {e}", cfg.name, run.seed, run.rule.label()),
                Ok(trace) if !trace.status.is_success() => {
                    eprintln!("{} seed {} {}: stopped with {:?}", cfg.name, run.seed, run.rule.label(), trace.status)
                }
                Ok(_) => {}
            }
        }
        all_ok &= outcome.all_succeeded();
        rows.extend(outcome.rows);
    }
    let csv = summary_csv(&rows);
    write_file(&args.out_dir.join("summary.csv"), &csv)?;
    write_file(
        &args.out_dir.join("summary.json"),
        &serde_json::to_string_pretty(&rows).expect("summary rows serialize"),
    )?;
    print!("{csv}");
    Ok(if all_ok { 0 } else { EXIT_FAILURES })
}

/// Picks the rate regime for `instance` from its certified constants.
pub fn rate_spec(instance: &dyn CompositeProblem, regime: RegimeArg) -> Result<RateBoundSpec> {
    let c = instance.constants();
    let (Some(nu), Some(m_nu)) = (c.nu, c.m_nu) else {
        return Err(Error::Domain("this family has no certified Hölder constants".into()));
    };
    let uniform = match (c.kappa, c.rho) {
        (Some(kappa), Some(rho)) => Some(Regime::UniformlyConvex { kappa, rho }),
        _ => None,
    };
    let bounded = c.d_g.filter(|d| d.is_finite()).map(|d_g| Regime::BoundedDomain { d_g });
    let regime = match regime {
        RegimeArg::Auto => uniform.or(bounded),
        RegimeArg::UniformlyConvex => uniform,
        RegimeArg::Bounded => bounded,
    }
    .ok_or_else(|| Error::Domain("the requested regime is not certified for this family".into()))?;
    Ok(RateBoundSpec { nu, m_nu, regime })
}

fn cmd_bounds(args: &BoundsArgs) -> Result<i32> {
    let instance = generate(&args.problem)?;
    if !instance.is_convex() {
        return Err(Error::Domain("envelopes on the objective gap need a convex f".into()));
    }
    let spec = rate_spec(&instance, args.regime)?;
    let rule = args.rule.config()?.resolve(&instance)?;
    let x0 = instance.initial_point();
    let trace = solve(&instance, rule, &x0, Termination::rel_gap(args.tol).with_max_iter(args.max_iter))?;
    let reference = solve(
        &instance,
        StepRule::AdaptiveLineSearch { l_init: 1.0 },
        &x0,
        Termination::rel_gap(args.reference_tol).with_max_iter(args.max_iter),
    )?;
    let phi_star = trace.best_phi.min(reference.best_phi);
    let path = args.out_dir.join("bounds.csv");
    emit_bounds_csv(&trace, &spec, rule, phi_star, &path)?;
    let env = envelope_for(&trace, &spec, rule, phi_star)?;
    eprintln!(
        "A = {:e}, t0 = {}, shift = {}, phi* ~ {}, bounds in {}",
        env.constants.a,
        env.t0,
        env.shift,
        phi_star,
        path.display()
    );
    Ok(0)
}

fn cmd_check(args: &CheckArgs) -> Result<i32> {
    let instance = generate(&args.problem)?;
    let c = instance.constants();
    let seed = args.problem.seed;
    match (c.nu, c.m_nu) {
        (Some(nu), Some(m_nu)) => {
            let v = theory::check_holder(&instance, nu, m_nu, args.pairs, seed);
            println!("holder nu={nu} M={m_nu:e}: max relative violation {v:e}");
        }
        _ => println!("holder: no certified constants"),
    }
    match (c.kappa, c.rho) {
        (Some(kappa), Some(rho)) => {
            let v = theory::check_uniform_convexity(&instance, kappa, rho, args.pairs, seed)?;
            println!("uniform convexity kappa={kappa} rho={rho}: max violation {v:e}");
        }
        _ => {
            let rho = if let Family::LqBall { q, .. } = args.problem.spec().family { q.max(2.0) } else { 2.0 };
            let kappa = theory::estimate_uniform_convexity_modulus(&instance, rho, args.pairs, seed)?;
            println!("uniform convexity: no certified kappa; sampled estimate kappa={kappa:e} at rho={rho}");
        }
    }
    Ok(0)
}
