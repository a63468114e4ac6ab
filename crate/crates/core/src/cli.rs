//! Command-line driver.
//!
//! Run settings come from an optional TOML file and are overridden by flags.
//! `DUPDIV_OUTPUT_DIR` and `DUPDIV_WORKERS` supply defaults for the output
//! directory and worker count. Exit codes: 0 success, 1 runtime failure,
//! 2 configuration error, 3 verification failure.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::ensemble::{run_ensemble_with_workers, EnsembleConfig, Observable, SimulateConfig};
use crate::error::{Error, Result};
use crate::graph::InitialGraphSpec;
use crate::models::{ModelKind, ModelParams, ParamSchedule};
use crate::oracle::{enumerate_exact, expected_trajectory_a, DEFAULT_BRANCH_CAP};
use crate::output::{render_ensemble, render_json_report, render_oracle, render_table, render_trajectory, Metadata, OutputFormat};
use crate::theory::{GrowthClass, MeanBoundAsStated, RegimeConstants};
use crate::verify::{run_suite, Suite, SuiteReport, VerifyOptions, DEFAULT_SEED};

pub const ENV_OUTPUT_DIR: &str = "DUPDIV_OUTPUT_DIR";
pub const ENV_WORKERS: &str = "DUPDIV_WORKERS";

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "dupdiv", version, about = "Duplication-divergence random graphs with edge deletion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One seeded trajectory.
    Simulate(RunArgs),
    /// Replicate statistics over independent seeded trajectories.
    Ensemble(RunArgs),
    /// Exact expected trajectory of Model A.
    Oracle {
        #[command(flatten)]
        run: RunArgs,
        /// Emit the ensemble long schema with `source=oracle`.
        #[arg(long)]
        long: bool,
    },
    /// Regime constants and applicability flags for one triple.
    Theory(TheoryArgs),
    /// Run a named verification suite, or `all`.
    Verify(VerifyArgs),
    /// Exact outcome law of a few steps from a small graph.
    Enumerate(EnumerateArgs),
}

/// Settings shared by `simulate`, `ensemble` and `oracle`.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML file with run settings; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `a` or `b`.
    #[arg(long)]
    pub model: Option<String>,
    /// single_edge, edge_plus_isolated, complete:N, isolated:N or custom:N:a-b,...
    #[arg(long)]
    pub init: Option<String>,
    /// Parameter schedule, e.g. `static:p,q,r` or `adaptive_v1:0.75`.
    #[arg(long)]
    pub schedule: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    /// Final step index `m`.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replicates: Option<u64>,
    #[arg(long)]
    pub record_stride: Option<usize>,
    /// Comma-separated observables, e.g. `n0,frac_isolated,hist:3`.
    #[arg(long, value_delimiter = ',')]
    pub observables: Option<Vec<String>>,
    /// Number of leading histogram buckets per row.
    #[arg(long)]
    pub histogram_prefix: Option<usize>,
    /// Output file; defaults to stdout, or a file under $DUPDIV_OUTPUT_DIR.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Print the merged settings as TOML and exit.
    #[arg(long)]
    pub print_config: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Table,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct TheoryArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub q: f64,
    #[arg(long)]
    pub r: f64,
    #[arg(long, value_enum, default_value = "table")]
    pub format: ReportFormat,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Suite name, or `all`.
    pub suite: String,
    /// Retention probability for `thm34`.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum, default_value = "table")]
    pub format: ReportFormat,
}

#[derive(Debug, Clone, Args)]
pub struct EnumerateArgs {
    #[arg(long, default_value = "single_edge")]
    pub init: String,
    #[arg(long, default_value = "a")]
    pub model: String,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub q: f64,
    #[arg(long)]
    pub r: f64,
    /// Number of steps to expand.
    #[arg(long, default_value_t = 1)]
    pub steps: usize,
    /// Refuse to expand more branches than this.
    #[arg(long, default_value_t = DEFAULT_BRANCH_CAP)]
    pub cap: u128,
}

/// Settings file. Every key is optional; unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_stride: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observables: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub histogram_prefix: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(format!("bad config file: {e}")))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("flat optional fields serialize to TOML")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config `{}`: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Values set in `other` replace values in `self`.
    pub fn overlay(self, other: RunConfig) -> Self {
        Self {
            model: other.model.or(self.model),
            init: other.init.or(self.init),
            schedule: other.schedule.or(self.schedule),
            p: other.p.or(self.p),
            q: other.q.or(self.q),
            r: other.r.or(self.r),
            steps: other.steps.or(self.steps),
            seed: other.seed.or(self.seed),
            replicates: other.replicates.or(self.replicates),
            record_stride: other.record_stride.or(self.record_stride),
            observables: other.observables.or(self.observables),
            histogram_prefix: other.histogram_prefix.or(self.histogram_prefix),
            output: other.output.or(self.output),
            format: other.format.or(self.format),
            workers: other.workers.or(self.workers),
        }
    }

    /// File values (if any) overlaid with flags.
    pub fn from_args(args: &RunArgs) -> Result<Self> {
        let base = match &args.config {
            Some(path) => Self::load(path)?,
            None => Self::default(),
        };
        let flags = RunConfig {
            model: args.model.clone(),
            init: args.init.clone(),
            schedule: args.schedule.clone(),
            p: args.p,
            q: args.q,
            r: args.r,
            steps: args.steps,
            seed: args.seed,
            replicates: args.replicates,
            record_stride: args.record_stride,
            observables: args.observables.clone(),
            histogram_prefix: args.histogram_prefix,
            output: args.output.clone(),
            format: args.format.clone(),
            workers: args.workers,
        };
        Ok(base.overlay(flags))
    }

    pub fn model(&self) -> Result<ModelKind> {
        self.model.as_deref().unwrap_or("a").parse()
    }

    pub fn init(&self) -> Result<InitialGraphSpec> {
        self.init.as_deref().unwrap_or("single_edge").parse()
    }

    /// Either an explicit `schedule` or the static triple `p, q, r`.
    pub fn schedule(&self) -> Result<ParamSchedule> {
        let triple = [("p", self.p), ("q", self.q), ("r", self.r)];
        match &self.schedule {
            Some(s) => {
                if let Some((name, _)) = triple.iter().find(|(_, v)| v.is_some()) {
                    return Err(Error::Config(format!(
                        "`{name}` cannot be combined with `schedule`; put the triple in the schedule"
                    )));
                }
                let sched: ParamSchedule = s.parse()?;
                sched.validate()?;
                Ok(sched)
            }
            None => {
                let mut vals = [0.0; 3];
                for (slot, (name, v)) in vals.iter_mut().zip(triple) {
                    *slot = v.ok_or_else(|| Error::Config(format!("missing `{name}` (or give a `schedule`)")))?;
                }
                Ok(ParamSchedule::Static(ModelParams::new(vals[0], vals[1], vals[2])?))
            }
        }
    }

    pub fn format(&self) -> Result<OutputFormat> {
        self.format.as_deref().map_or(Ok(OutputFormat::Csv), str::parse)
    }

    pub fn observables(&self) -> Result<Vec<Observable>> {
        match &self.observables {
            Some(list) => list.iter().map(|s| s.trim().parse()).collect(),
            None => {
                let mut v = Observable::default_set();
                if let Some(k) = self.histogram_prefix.filter(|&k| k > 0) {
                    v.push(Observable::HistogramPrefix(k - 1));
                }
                Ok(v)
            }
        }
    }

    /// Flag or file value, then `DUPDIV_WORKERS`.
    pub fn workers(&self) -> Result<Option<usize>> {
        let w = match self.workers {
            Some(w) => Some(w),
            None => match std::env::var(ENV_WORKERS) {
                Ok(s) => Some(
                    s.trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("{ENV_WORKERS} = `{s}` is not a count")))?,
                ),
                Err(_) => None,
            },
        };
        match w {
            Some(0) => Err(Error::Config("workers must be at least 1".into())),
            w => Ok(w),
        }
    }

    fn steps(&self) -> usize {
        self.steps.unwrap_or(1000)
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn simulate_config(&self) -> Result<SimulateConfig> {
        let cfg = SimulateConfig {
            model: self.model()?,
            init: self.init()?,
            schedule: self.schedule()?,
            m_max: self.steps(),
            seed: self.seed(),
            record_stride: self.record_stride.unwrap_or(1),
            histogram_prefix: self.histogram_prefix.unwrap_or(0),
        };
        cfg.dynamics()?.validate()?;
        check_horizon(&cfg.init, cfg.m_max, cfg.record_stride)?;
        Ok(cfg)
    }

    pub fn ensemble_config(&self) -> Result<EnsembleConfig> {
        let cfg = EnsembleConfig {
            model: self.model()?,
            init: self.init()?,
            schedule: self.schedule()?,
            m_max: self.steps(),
            replicates: self.replicates.unwrap_or(30),
            base_seed: self.seed(),
            record_stride: self.record_stride.unwrap_or(1),
            observables: self.observables()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn oracle_config(&self) -> Result<OracleConfig> {
        if self.model()? != ModelKind::A {
            return Err(Error::Config("the expectation oracle covers Model A only".into()));
        }
        let ParamSchedule::Static(params) = self.schedule()? else {
            return Err(Error::Config("the expectation oracle needs a fixed triple".into()));
        };
        let cfg = OracleConfig {
            init: self.init()?,
            params,
            m_max: self.steps(),
            record_stride: self.record_stride.unwrap_or(1),
            histogram_prefix: self.histogram_prefix.unwrap_or(0),
        };
        check_horizon(&cfg.init, cfg.m_max, cfg.record_stride)?;
        Ok(cfg)
    }
}

fn check_horizon(init: &InitialGraphSpec, m_max: usize, stride: usize) -> Result<()> {
    let m0 = init.vertex_count();
    if m0 == 0 {
        return Err(Error::Config("initial graph is empty".into()));
    }
    if m_max < m0 {
        return Err(Error::Config(format!("steps = {m_max} is below the initial vertex count {m0}")));
    }
    if stride == 0 {
        return Err(Error::Config("record_stride must be at least 1".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub init: InitialGraphSpec,
    pub params: ModelParams,
    pub m_max: usize,
    pub record_stride: usize,
    pub histogram_prefix: usize,
}

/// Where a run's output goes.
fn destination(cfg: &RunConfig, command: &str, format: OutputFormat) -> Option<PathBuf> {
    cfg.output.clone().or_else(|| {
        std::env::var_os(ENV_OUTPUT_DIR).map(|dir| {
            let ext = match format {
                OutputFormat::Csv => "csv",
                OutputFormat::Json => "json",
            };
            PathBuf::from(dir).join(format!("{command}.{ext}"))
        })
    })
}

fn emit(dest: Option<PathBuf>, text: &str) -> Result<()> {
    match dest {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            fs::write(&path, text)?;
            Ok(())
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn print_config(cfg: &RunConfig) -> Result<()> {
    emit(None, &cfg.to_toml_string())
}

fn cmd_simulate(args: &RunArgs) -> Result<u8> {
    let cfg = RunConfig::from_args(args)?;
    if args.print_config {
        print_config(&cfg)?;
        return Ok(0);
    }
    let sim = cfg.simulate_config()?;
    let format = cfg.format()?;
    let traj = sim.run()?;
    emit(destination(&cfg, "simulate", format), &render_trajectory(&traj, &Metadata::new(&sim), format))?;
    Ok(0)
}

fn cmd_ensemble(args: &RunArgs) -> Result<u8> {
    let cfg = RunConfig::from_args(args)?;
    if args.print_config {
        print_config(&cfg)?;
        return Ok(0);
    }
    let ens = cfg.ensemble_config()?;
    let format = cfg.format()?;
    let stats = run_ensemble_with_workers(&ens, cfg.workers()?)?;
    eprintln!("ensemble: {} replicates in {:.2?}", ens.replicates, stats.elapsed);
    emit(destination(&cfg, "ensemble", format), &render_ensemble(&stats, &Metadata::new(&ens), format))?;
    Ok(0)
}

fn cmd_oracle(args: &RunArgs, long: bool) -> Result<u8> {
    let cfg = RunConfig::from_args(args)?;
    if args.print_config {
        print_config(&cfg)?;
        return Ok(0);
    }
    let oc = cfg.oracle_config()?;
    let format = cfg.format()?;
    let rows = expected_trajectory_a(&oc.init, &oc.params, oc.m_max, oc.record_stride, oc.histogram_prefix)?;
    emit(destination(&cfg, "oracle", format), &render_oracle(&rows, &Metadata::new(&oc), format, long))?;
    Ok(0)
}

fn growth_label(g: GrowthClass) -> String {
    g.to_string()
}

fn theory_table(c: &RegimeConstants) -> Vec<(String, String)> {
    let mut rows: Vec<(String, String)> = vec![
        ("p".into(), c.p.to_string()),
        ("q".into(), c.q.to_string()),
        ("r".into(), c.r.to_string()),
        ("tau".into(), c.tau.to_string()),
        ("kappa".into(), c.kappa.to_string()),
        ("u".into(), c.u.to_string()),
        ("v".into(), c.v.to_string()),
        ("V".into(), c.big_v.to_string()),
    ];
    match c.rho {
        Some((lo, hi)) => {
            rows.push(("rho0".into(), lo.to_string()));
            rows.push(("rho1".into(), hi.to_string()));
        }
        None => rows.push(("rho0, rho1".into(), "undefined".into())),
    }
    rows.extend([
        ("theta0".into(), c.theta.0.to_string()),
        ("theta1".into(), c.theta.1.to_string()),
        ("u'".into(), c.u_prime.to_string()),
        ("v'".into(), c.v_prime.to_string()),
        ("V'".into(), c.big_v_prime.to_string()),
    ]);
    rows.push((
        "mean bound".into(),
        match &c.mean_bound_as_stated {
            MeanBoundAsStated::Applicable { lower, upper, .. } => format!("[{lower}, {upper}]"),
            MeanBoundAsStated::Inapplicable { u } => format!("inapplicable (u = {u})"),
        },
    ));
    rows.extend([
        ("thm32".into(), c.thm32.to_string()),
        ("corollary item 1".into(), c.corollary_item1.to_string()),
        ("corollary item 2".into(), c.corollary_item2.to_string()),
        ("u > 0".into(), c.u_positive.to_string()),
        ("psi1 growth".into(), growth_label(c.growth.0)),
        ("psi2 growth".into(), growth_label(c.growth.1)),
    ]);
    rows
}

fn cmd_theory(args: &TheoryArgs) -> Result<u8> {
    let c = RegimeConstants::new(args.p, args.q, args.r)?;
    let text = match args.format {
        ReportFormat::Table => render_table(&theory_table(&c)),
        ReportFormat::Json => render_json_report(&Metadata::new(&ModelParams::new(args.p, args.q, args.r)?), &c),
    };
    emit(None, &text)?;
    Ok(0)
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8> {
    let suites: Vec<Suite> = if args.suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![args.suite.parse()?]
    };
    if let Some(r) = args.r {
        ModelParams::new(1.0, 1.0, r)?;
    }
    if args.workers == Some(0) {
        return Err(Error::Config("workers must be at least 1".into()));
    }
    let opts = VerifyOptions {
        seed: args.seed,
        workers: args.workers,
        r: args.r,
    };
    let mut reports: Vec<SuiteReport> = Vec::new();
    for s in suites {
        let start = std::time::Instant::now();
        let rep = run_suite(s, &opts)?;
        eprintln!("{}: {:.2?}", s, start.elapsed());
        if args.format == ReportFormat::Table {
            emit(None, &rep.to_string())?;
        }
        reports.push(rep);
    }
    if args.format == ReportFormat::Json {
        emit(None, &render_json_report(&Metadata::new(&opts.seed), &reports))?;
    }
    Ok(if reports.iter().all(|r| r.passed) { 0 } else { EXIT_VERIFY })
}

fn cmd_enumerate(args: &EnumerateArgs) -> Result<u8> {
    let init: InitialGraphSpec = args.init.parse()?;
    let model: ModelKind = args.model.parse()?;
    let params = ModelParams::new(args.p, args.q, args.r)?;
    let dist = enumerate_exact(&init, &params, args.steps, model, args.cap)?;
    #[derive(Serialize)]
    struct EnumerateConfig<'a> {
        init: &'a InitialGraphSpec,
        model: ModelKind,
        params: ModelParams,
        steps: usize,
    }
    let meta = Metadata::new(&EnumerateConfig {
        init: &init,
        model,
        params,
        steps: args.steps,
    });
    let mut text = format!(
        "# schema_version={}\n# artifact_version={}\n# rng={}\n# config={}\nprobability,histogram\n",
        meta.schema_version, meta.artifact_version, meta.rng, meta.config
    );
    for (h, w) in &dist.support {
        text.push_str(&format!("{w},\"{h}\"\n"));
    }
    emit(None, &text)?;
    Ok(0)
}

/// Dispatches one parsed command line and maps the outcome to an exit code.
pub fn run(cli: Cli) -> ExitCode {
    let outcome = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Ensemble(a) => cmd_ensemble(a),
        Command::Oracle { run, long } => cmd_oracle(run, *long),
        Command::Theory(a) => cmd_theory(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Enumerate(a) => cmd_enumerate(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { EXIT_CONFIG } else { EXIT_RUNTIME })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let file = RunConfig::from_toml_str("p = 0.2\nq = 0.5\nr = 1.0\nsteps = 50\n").unwrap();
        let flags = RunConfig {
            p: Some(0.7),
            ..Default::default()
        };
        let merged = file.overlay(flags);
        assert_eq!(merged.p, Some(0.7));
        assert_eq!(merged.steps, Some(50));
        assert_eq!(
            merged.schedule().unwrap(),
            ParamSchedule::Static(ModelParams::new(0.7, 0.5, 1.0).unwrap())
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml_str("pp = 1.0\n").unwrap_err().is_config_error());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = RunConfig {
            model: Some("b".into()),
            schedule: Some("adaptive_v2:1".into()),
            steps: Some(300),
            observables: Some(vec!["n0".into(), "hist:2".into()]),
            ..Default::default()
        };
        assert_eq!(RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
    }

    #[test]
    fn schedule_resolution_errors() {
        let missing = RunConfig {
            p: Some(0.5),
            q: Some(0.5),
            ..Default::default()
        };
        assert!(missing.schedule().unwrap_err().to_string().contains("`r`"));
        let both = RunConfig {
            schedule: Some("static:0.1,0.2,0.3".into()),
            q: Some(0.5),
            ..Default::default()
        };
        assert!(both.schedule().unwrap_err().is_config_error());
        let bad = RunConfig {
            p: Some(1.5),
            q: Some(0.5),
            r: Some(0.5),
            ..Default::default()
        };
        let e = bad.schedule().unwrap_err();
        assert!(e.is_config_error() && e.to_string().contains("`p`"));
    }

    #[test]
    fn theory_table_example() {
        let c = RegimeConstants::new(0.6, 0.9, 1.0).unwrap();
        let rows = theory_table(&c);
        let get = |k: &str| rows.iter().find(|(n, _)| n == k).unwrap().1.clone();
        assert!((get("rho0").parse::<f64>().unwrap() - 0.1).abs() < 1e-12);
        assert!((get("rho1").parse::<f64>().unwrap() - 0.15).abs() < 1e-12);
        assert!(get("thm32").starts_with("true"));
    }

    #[test]
    fn cli_parses() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
