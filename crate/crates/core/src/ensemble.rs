//! Seeded Monte Carlo over independent trajectories.
//!
//! Replicate `i` always draws from `RngStream(base_seed, i)`. Replicates run
//! in parallel in fixed-size batches and are folded into the running
//! statistics in index order, so results do not depend on the worker count.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::InitialGraphSpec;
use crate::models::{
    run_trajectory, Dynamics, ModelKind, ModelParams, ParamSchedule, RecordSpec, Trajectory, TrajectoryRow,
};
use crate::rng::{RngStream, RNG_ALGORITHM};
use crate::theory::{self, RegimeConstants};

const BATCH: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    /// `c_m` with `u = 1 - 2q(1-r)`.
    C,
    /// `alpha_m` with the model's `r`.
    Alpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Observable {
    /// `N_{m,0}`.
    Isolated,
    /// `N_{m,0} / m`.
    FracIsolated,
    /// `N_{m,0} / N_m`.
    FracIsolatedOfN,
    /// `N_m`.
    VertexCount,
    Edges,
    /// `N_{m,0}, ..., N_{m,K}`.
    HistogramPrefix(usize),
    Psi1,
    Psi2,
    WeightedIsolated(Weight),
}

impl Observable {
    /// Output column names contributed by this observable.
    pub fn columns(&self) -> Vec<String> {
        match self {
            Observable::HistogramPrefix(k) => (0..=*k).map(|j| format!("n_{j}")).collect(),
            Observable::WeightedIsolated(Weight::C) => vec!["c_n0".into()],
            Observable::WeightedIsolated(Weight::Alpha) => vec!["alpha_n0".into()],
            other => vec![other.to_string()],
        }
    }

    fn histogram_prefix(&self) -> usize {
        match self {
            Observable::HistogramPrefix(k) => k + 1,
            _ => 0,
        }
    }

    pub fn default_set() -> Vec<Observable> {
        vec![
            Observable::Isolated,
            Observable::FracIsolated,
            Observable::FracIsolatedOfN,
            Observable::VertexCount,
            Observable::Psi1,
            Observable::Psi2,
        ]
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Isolated => f.write_str("n0"),
            Observable::FracIsolated => f.write_str("frac_isolated"),
            Observable::FracIsolatedOfN => f.write_str("frac_isolated_of_n"),
            Observable::VertexCount => f.write_str("n"),
            Observable::Edges => f.write_str("edges"),
            Observable::HistogramPrefix(k) => write!(f, "hist:{k}"),
            Observable::Psi1 => f.write_str("psi1"),
            Observable::Psi2 => f.write_str("psi2"),
            Observable::WeightedIsolated(Weight::C) => f.write_str("weighted_n0:c"),
            Observable::WeightedIsolated(Weight::Alpha) => f.write_str("weighted_n0:alpha"),
        }
    }
}

impl FromStr for Observable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "n0" => Observable::Isolated,
            "frac_isolated" => Observable::FracIsolated,
            "frac_isolated_of_n" => Observable::FracIsolatedOfN,
            "n" => Observable::VertexCount,
            "edges" => Observable::Edges,
            "psi1" => Observable::Psi1,
            "psi2" => Observable::Psi2,
            "weighted_n0:c" => Observable::WeightedIsolated(Weight::C),
            "weighted_n0:alpha" => Observable::WeightedIsolated(Weight::Alpha),
            other => match other.strip_prefix("hist:") {
                Some(k) => Observable::HistogramPrefix(
                    k.parse()
                        .map_err(|_| Error::Config(format!("bad histogram prefix in `{other}`")))?,
                ),
                None => return Err(Error::Config(format!("unknown observable `{other}`"))),
            },
        })
    }
}

impl TryFrom<String> for Observable {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Observable> for String {
    fn from(o: Observable) -> String {
        o.to_string()
    }
}

fn dynamics_for(model: ModelKind, schedule: &ParamSchedule) -> Result<Dynamics> {
    match (model, schedule) {
        (ModelKind::A, ParamSchedule::Static(p)) => Ok(Dynamics::ModelA(*p)),
        (ModelKind::A, other) => Err(Error::Config(format!(
            "Model A takes a fixed triple, got schedule `{other}`"
        ))),
        (ModelKind::B, s) => Ok(Dynamics::ModelB(s.clone())),
    }
}

/// One seeded trajectory. Uses the same stream as replicate 0 of an
/// ensemble with `base_seed = seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub model: ModelKind,
    pub init: InitialGraphSpec,
    pub schedule: ParamSchedule,
    pub m_max: usize,
    pub seed: u64,
    pub record_stride: usize,
    /// Number of leading histogram buckets written per row.
    pub histogram_prefix: usize,
}

impl SimulateConfig {
    pub fn dynamics(&self) -> Result<Dynamics> {
        dynamics_for(self.model, &self.schedule)
    }

    pub fn run(&self) -> Result<Trajectory> {
        run_trajectory(
            &self.dynamics()?,
            &self.init,
            self.m_max,
            RngStream::new(self.seed, 0),
            &RecordSpec {
                stride: self.record_stride,
                histogram_prefix: self.histogram_prefix,
            },
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub model: ModelKind,
    pub init: InitialGraphSpec,
    /// Model A requires a `static` schedule.
    pub schedule: ParamSchedule,
    pub m_max: usize,
    pub replicates: u64,
    pub base_seed: u64,
    pub record_stride: usize,
    pub observables: Vec<Observable>,
}

impl EnsembleConfig {
    pub fn dynamics(&self) -> Result<Dynamics> {
        dynamics_for(self.model, &self.schedule)
    }

    pub fn static_params(&self) -> Option<ModelParams> {
        match self.schedule {
            ParamSchedule::Static(p) => Some(p),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.dynamics()?.validate()?;
        let m0 = self.init.vertex_count();
        if m0 == 0 {
            return Err(Error::Config("initial graph is empty".into()));
        }
        if self.m_max < m0 {
            return Err(Error::Config(format!(
                "m_max = {} is below the initial vertex count {m0}",
                self.m_max
            )));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        if self.record_stride == 0 {
            return Err(Error::Config("record_stride must be at least 1".into()));
        }
        if self.observables.is_empty() {
            return Err(Error::Config("no observables requested".into()));
        }
        for o in &self.observables {
            if let Observable::WeightedIsolated(w) = o {
                self.weight_at(*w, m0)?;
            }
        }
        Ok(())
    }

    /// Recorded step indices.
    pub fn times(&self) -> Vec<usize> {
        let m0 = self.init.vertex_count();
        let mut t: Vec<usize> = (m0..=self.m_max).step_by(self.record_stride).collect();
        if t.last() != Some(&self.m_max) {
            t.push(self.m_max);
        }
        t
    }

    pub fn columns(&self) -> Vec<String> {
        self.observables.iter().flat_map(Observable::columns).collect()
    }

    fn weight_at(&self, w: Weight, m: usize) -> Result<f64> {
        let Some(ModelParams { q, r, .. }) = self.static_params().filter(|_| self.model == ModelKind::A) else {
            return Err(Error::Config("weighted observables need Model A with a fixed triple".into()));
        };
        let m0 = self.init.vertex_count();
        match w {
            Weight::C => theory::martingale_weight_c(m, m0, theory::u_const(q, r)),
            Weight::Alpha => theory::alpha_weight(m, m0, r),
        }
        .map_err(|e| Error::Config(format!("weight unavailable: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`; zero for one replicate.
    pub stderr: f64,
    pub n: u64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy)]
struct Accumulator {
    n: u64,
    mean: f64,
    m2: f64,
    min: f64,
    max: f64,
}

impl Default for Accumulator {
    fn default() -> Self {
        Self {
            n: 0,
            mean: 0.0,
            m2: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

impl Accumulator {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    fn summary(&self) -> Summary {
        let stderr = if self.n > 1 {
            (self.m2.max(0.0) / (self.n - 1) as f64).sqrt() / (self.n as f64).sqrt()
        } else {
            0.0
        };
        Summary {
            mean: self.mean,
            stderr,
            n: self.n,
            min: self.min,
            max: self.max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub config: EnsembleConfig,
    pub rng: &'static str,
    pub times: Vec<usize>,
    pub columns: Vec<String>,
    /// `cells[t][c]` summarizes column `c` at `times[t]`.
    pub cells: Vec<Vec<Summary>>,
    /// Wall time; never written to output files.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl EnsembleStats {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// `(m, summary)` pairs for one column.
    pub fn series(&self, name: &str) -> Option<Vec<(usize, Summary)>> {
        let c = self.column(name)?;
        Some(self.times.iter().zip(&self.cells).map(|(&m, row)| (m, row[c])).collect())
    }

    pub fn final_summary(&self, name: &str) -> Option<Summary> {
        let c = self.column(name)?;
        self.cells.last().map(|row| row[c])
    }
}

fn observe(row: &TrajectoryRow, observables: &[Observable], weights: &[Vec<f64>], t: usize, out: &mut Vec<f64>) {
    let mut w = 0;
    for o in observables {
        match o {
            Observable::Isolated => out.push(row.isolated as f64),
            Observable::FracIsolated => out.push(row.frac_isolated()),
            Observable::FracIsolatedOfN => out.push(row.frac_isolated_of_n()),
            Observable::VertexCount => out.push(row.vertices as f64),
            Observable::Edges => out.push(row.edges as f64),
            Observable::HistogramPrefix(k) => out.extend(row.histogram_prefix[..=*k].iter().map(|&c| c as f64)),
            Observable::Psi1 => out.push(row.psi1),
            Observable::Psi2 => out.push(row.psi2),
            Observable::WeightedIsolated(_) => {
                out.push(weights[w][t] * row.isolated as f64);
                w += 1;
            }
        }
    }
}

/// Runs the ensemble on the global rayon pool.
pub fn run_ensemble(config: &EnsembleConfig) -> Result<EnsembleStats> {
    run_ensemble_with_workers(config, None)
}

/// Runs the ensemble on a dedicated pool of `workers` threads (`None`: rayon default).
pub fn run_ensemble_with_workers(config: &EnsembleConfig, workers: Option<usize>) -> Result<EnsembleStats> {
    config.validate()?;
    let start = Instant::now();
    let dynamics = config.dynamics()?;
    let times = config.times();
    let columns = config.columns();
    let weights: Vec<Vec<f64>> = config
        .observables
        .iter()
        .filter_map(|o| match o {
            Observable::WeightedIsolated(w) => Some(*w),
            _ => None,
        })
        .map(|w| times.iter().map(|&m| config.weight_at(w, m)).collect())
        .collect::<Result<_>>()?;
    let record = RecordSpec {
        stride: config.record_stride,
        histogram_prefix: config.observables.iter().map(Observable::histogram_prefix).max().unwrap_or(0),
    };

    let simulate = |i: u64| -> Result<Vec<f64>> {
        let traj = run_trajectory(&dynamics, &config.init, config.m_max, RngStream::new(config.base_seed, i), &record)
            .map_err(|e| Error::Replicate {
                index: i,
                source: Box::new(e),
            })?;
        debug_assert_eq!(traj.rows.len(), times.len());
        let mut flat = Vec::with_capacity(times.len() * columns.len());
        for (t, row) in traj.rows.iter().enumerate() {
            observe(row, &config.observables, &weights, t, &mut flat);
        }
        Ok(flat)
    };

    let mut acc = vec![Accumulator::default(); times.len() * columns.len()];
    let mut run_batches = || -> Result<()> {
        let mut lo = 0;
        while lo < config.replicates {
            let hi = (lo + BATCH).min(config.replicates);
            let batch: Vec<Result<Vec<f64>>> = (lo..hi).into_par_iter().map(simulate).collect();
            for result in batch {
                for (a, x) in acc.iter_mut().zip(result?) {
                    a.push(x);
                }
            }
            lo = hi;
        }
        Ok(())
    };
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?
            .install(run_batches)?,
        None => run_batches()?,
    }

    let cells = acc
        .chunks(columns.len())
        .map(|row| row.iter().map(Accumulator::summary).collect())
        .collect();
    Ok(EnsembleStats {
        config: config.clone(),
        rng: RNG_ALGORITHM,
        times,
        columns,
        cells,
        elapsed: start.elapsed(),
    })
}

/// Outcome of one theory comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", content = "detail", rename_all = "snake_case")]
pub enum Verdict {
    Pass(String),
    Fail(String),
    Inapplicable(String),
}

impl Verdict {
    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail(_))
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass(_))
    }

    fn from_check(ok: bool, detail: String) -> Self {
        if ok {
            Verdict::Pass(detail)
        } else {
            Verdict::Fail(detail)
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass(d) => write!(f, "pass: {d}"),
            Verdict::Fail(d) => write!(f, "FAIL: {d}"),
            Verdict::Inapplicable(d) => write!(f, "inapplicable: {d}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Slack on interval endpoints for the fraction of isolated vertices.
    pub interval: f64,
    /// Slack on `|N_{m,k}/m - a_k|`.
    pub limit: f64,
    /// Leading fraction of recorded times skipped by monotonicity checks.
    pub burn_in: f64,
    /// Multiple of the standard error allowed by monotonicity and flatness checks.
    pub stderr_mult: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            interval: 0.05,
            limit: 0.01,
            burn_in: 0.1,
            stderr_mult: 2.0,
        }
    }
}

fn missing(name: &str) -> Verdict {
    Verdict::Inapplicable(format!("column `{name}` was not recorded"))
}

/// Final mean of `frac_isolated` inside `[lo - tol, hi + tol]`.
pub fn check_final_interval(stats: &EnsembleStats, lo: f64, hi: f64, tol: f64) -> Verdict {
    let Some(s) = stats.final_summary("frac_isolated") else {
        return missing("frac_isolated");
    };
    Verdict::from_check(
        s.mean >= lo - tol && s.mean <= hi + tol,
        format!("mean {} at m = {} vs [{lo}, {hi}] +- {tol}", s.mean, stats.config.m_max),
    )
}

/// Consecutive recorded means after burn-in never rise by more than
/// `mult` times the larger of the two standard errors.
pub fn check_non_increasing(stats: &EnsembleStats, column: &str, tol: &Tolerances) -> Verdict {
    monotone(stats, column, Skip::Fraction(tol.burn_in), tol.stderr_mult, 1.0)
}

/// Mirror image of [`check_non_increasing`].
pub fn check_non_decreasing(stats: &EnsembleStats, column: &str, tol: &Tolerances) -> Verdict {
    monotone(stats, column, Skip::Fraction(tol.burn_in), tol.stderr_mult, -1.0)
}

/// As [`check_non_increasing`] over the recorded times `m >= from`.
pub fn check_non_increasing_from(stats: &EnsembleStats, column: &str, from: usize, mult: f64) -> Verdict {
    monotone(stats, column, Skip::FromStep(from), mult, 1.0)
}

/// As [`check_non_decreasing`] over the recorded times `m >= from`.
pub fn check_non_decreasing_from(stats: &EnsembleStats, column: &str, from: usize, mult: f64) -> Verdict {
    monotone(stats, column, Skip::FromStep(from), mult, -1.0)
}

#[derive(Clone, Copy)]
enum Skip {
    Fraction(f64),
    FromStep(usize),
}

fn monotone(stats: &EnsembleStats, column: &str, skip: Skip, mult: f64, dir: f64) -> Verdict {
    let Some(series) = stats.series(column) else {
        return missing(column);
    };
    let skip = match skip {
        Skip::Fraction(f) => (series.len() as f64 * f).floor() as usize,
        Skip::FromStep(from) => series.partition_point(|(m, _)| *m < from),
    };
    let mut worst = f64::NEG_INFINITY;
    let mut worst_at = 0;
    for w in series[skip.min(series.len())..].windows(2) {
        let (a, b) = (w[0].1, w[1].1);
        let slack = mult * a.stderr.max(b.stderr);
        let excess = dir * (b.mean - a.mean) - slack;
        if excess > worst {
            worst = excess;
            worst_at = w[1].0;
        }
    }
    let what = if dir > 0.0 { "rise" } else { "drop" };
    Verdict::from_check(
        worst <= 0.0,
        format!(
            "{column}: largest {what} beyond {mult} stderr is {worst:e} at m = {worst_at} ({} comparisons)",
            series.len().saturating_sub(skip + 1)
        ),
    )
}

/// Every recorded mean within `mult` standard errors of `expected`.
pub fn check_flat(stats: &EnsembleStats, column: &str, expected: f64, tol: &Tolerances) -> Verdict {
    let Some(series) = stats.series(column) else {
        return missing(column);
    };
    let (mut worst, mut worst_at) = (0.0f64, 0usize);
    for (m, s) in &series {
        let dev = (s.mean - expected).abs();
        let z = if s.stderr > 0.0 {
            dev / s.stderr
        } else if dev <= 1e-12 * expected.abs().max(1.0) {
            0.0
        } else {
            f64::INFINITY
        };
        if z > worst {
            worst = z;
            worst_at = *m;
        }
    }
    Verdict::from_check(
        worst <= tol.stderr_mult,
        format!("{column}: max |mean - {expected}| / stderr = {worst:.3} at m = {worst_at}"),
    )
}

/// `mean N_{m,k} / m` against `a_k` at the final time.
pub fn check_limit_sequence(stats: &EnsembleStats, r: f64, tol: f64) -> Verdict {
    let k_max = stats.columns.iter().filter(|c| c.starts_with("n_")).count();
    if k_max == 0 {
        return missing("n_k");
    }
    let a = match theory::limit_sequence_a(r, k_max - 1) {
        Ok(a) => a,
        Err(e) => return Verdict::Inapplicable(e.to_string()),
    };
    let m = stats.config.m_max as f64;
    let mut worst = (0.0f64, 0usize);
    for (k, ak) in a.iter().enumerate() {
        let s = stats.final_summary(&format!("n_{k}")).expect("prefix column");
        let dev = (s.mean / m - ak).abs();
        if dev > worst.0 {
            worst = (dev, k);
        }
    }
    Verdict::from_check(
        worst.0 <= tol,
        format!("max_k |N_k/m - a_k| = {:e} at k = {} (tol {tol})", worst.0, worst.1),
    )
}

/// `mean N_{m,0} <= bound[m - m0]` at every recorded time.
pub fn check_below_bound(stats: &EnsembleStats, bound: &[f64]) -> Verdict {
    let Some(series) = stats.series("n0") else {
        return missing("n0");
    };
    let m0 = stats.config.init.vertex_count();
    let mut worst = (f64::NEG_INFINITY, 0usize);
    for (m, s) in &series {
        let gap = s.mean - bound[m - m0];
        if gap > worst.0 {
            worst = (gap, *m);
        }
    }
    Verdict::from_check(
        worst.0 <= 0.0,
        format!("max(mean N0 - bound) = {} at m = {}", worst.0, worst.1),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryReport {
    pub verdicts: Vec<(String, Verdict)>,
}

impl TheoryReport {
    pub fn any_fail(&self) -> bool {
        self.verdicts.iter().any(|(_, v)| v.is_fail())
    }
}

/// Runs every comparison whose regime applies to the ensemble's configuration.
pub fn compare_to_theory(stats: &EnsembleStats, tol: &Tolerances) -> TheoryReport {
    let cfg = &stats.config;
    let m0 = cfg.init.vertex_count();
    let mut verdicts = Vec::new();
    let params = cfg.static_params();
    let model_a = cfg.model == ModelKind::A;

    let thm32 = match (model_a, params) {
        (true, Some(ModelParams { p, q, r })) if m0 >= 2 => match RegimeConstants::new(p, q, r) {
            Ok(c) if c.thm32.holds => match c.rho {
                Some((lo, hi)) => check_final_interval(stats, lo, hi, tol.interval),
                None => Verdict::Inapplicable("rho undefined".into()),
            },
            Ok(c) => Verdict::Inapplicable(c.thm32.to_string()),
            Err(e) => Verdict::Inapplicable(e.to_string()),
        },
        _ => Verdict::Inapplicable("needs Model A, a fixed triple and m0 >= 2".into()),
    };
    verdicts.push(("rho_interval".to_string(), thm32));

    let thm33 = match (model_a, params) {
        (true, Some(ModelParams { p, q, r })) if p == 1.0 && m0 >= 2 => match theory::theta_interval(q, r) {
            Ok((lo, hi)) => check_final_interval(stats, lo, hi, tol.interval),
            Err(e) => Verdict::Inapplicable(e.to_string()),
        },
        _ => Verdict::Inapplicable("needs Model A with p = 1 and m0 >= 2".into()),
    };
    verdicts.push(("theta_interval".to_string(), thm33));

    let thm34 = match (model_a, params) {
        (true, Some(ModelParams { p, q, r })) if p == 1.0 && q == 1.0 => check_limit_sequence(stats, r, tol.limit),
        _ => Verdict::Inapplicable("needs Model A with p = q = 1".into()),
    };
    verdicts.push(("limit_sequence".to_string(), thm34));

    let martingale = match (model_a, params) {
        (true, Some(ModelParams { p, q, .. })) if p == 0.0 && q == 1.0 => {
            let start = cfg.init.build().map(|g| g.isolated_count() as f64).unwrap_or(f64::NAN);
            check_flat(stats, "alpha_n0", start, tol)
        }
        _ => Verdict::Inapplicable("needs Model A with p = 0, q = 1".into()),
    };
    verdicts.push(("alpha_martingale".to_string(), martingale));

    let supermartingale = if !model_a && cfg.schedule.is_adaptive() {
        check_non_increasing(stats, "n0", tol)
    } else {
        Verdict::Inapplicable("needs Model B with an adaptive schedule".into())
    };
    verdicts.push(("adaptive_supermartingale".to_string(), supermartingale));

    let bounded = if model_a || cfg.schedule.is_adaptive() {
        Verdict::Inapplicable("needs Model B with a deterministic schedule".into())
    } else {
        match (
            theory::prop37_condition(&cfg.schedule, m0, cfg.m_max),
            cfg.init.build(),
        ) {
            (Ok(rep), Ok(g)) if rep.side_condition_holds() => {
                match theory::prop37_isolated_bound(&cfg.schedule, g.isolated_count() as f64, m0, cfg.m_max) {
                    Ok(bound) => check_below_bound(stats, &bound),
                    Err(e) => Verdict::Inapplicable(e.to_string()),
                }
            }
            (Err(e), _) | (_, Err(e)) => Verdict::Inapplicable(e.to_string()),
            (Ok(rep), Ok(_)) => Verdict::Inapplicable(format!(
                "side condition fails at k = {:?}",
                rep.side_condition_violation
            )),
        }
    };
    verdicts.push(("bounded_isolated".to_string(), bounded));

    TheoryReport { verdicts }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(p: f64, q: f64, r: f64, reps: u64, m_max: usize) -> EnsembleConfig {
        EnsembleConfig {
            model: ModelKind::A,
            init: InitialGraphSpec::SingleEdge,
            schedule: ParamSchedule::Static(ModelParams::new(p, q, r).unwrap()),
            m_max,
            replicates: reps,
            base_seed: 17,
            record_stride: 10,
            observables: Observable::default_set(),
        }
    }

    #[test]
    fn observable_names_round_trip() {
        for o in [
            Observable::Isolated,
            Observable::FracIsolated,
            Observable::FracIsolatedOfN,
            Observable::VertexCount,
            Observable::Edges,
            Observable::HistogramPrefix(4),
            Observable::Psi1,
            Observable::Psi2,
            Observable::WeightedIsolated(Weight::C),
            Observable::WeightedIsolated(Weight::Alpha),
        ] {
            assert_eq!(o.to_string().parse::<Observable>().unwrap(), o);
        }
        assert!("hist:x".parse::<Observable>().is_err());
        assert_eq!(Observable::HistogramPrefix(2).columns(), ["n_0", "n_1", "n_2"]);
    }

    #[test]
    fn forced_dynamics_have_zero_spread() {
        let stats = run_ensemble(&cfg(0.0, 1.0, 1.0, 5, 60)).unwrap();
        for (_, s) in stats.series("frac_isolated").unwrap() {
            assert_eq!((s.mean, s.stderr, s.n), (0.0, 0.0, 5));
        }
        let stats = run_ensemble(&cfg(0.4, 0.6, 0.3, 1, 60)).unwrap();
        assert!(stats.cells.iter().flatten().all(|s| s.stderr == 0.0));
    }

    #[test]
    fn times_include_both_ends() {
        let c = cfg(0.5, 0.5, 0.5, 1, 25);
        assert_eq!(c.times(), vec![2, 12, 22, 25]);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let c = cfg(0.3, 0.8, 0.6, 150, 120);
        let a = run_ensemble_with_workers(&c, Some(1)).unwrap();
        let b = run_ensemble_with_workers(&c, Some(3)).unwrap();
        assert_eq!(a.cells, b.cells);
        assert_eq!(a.times, b.times);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut c = cfg(0.3, 0.8, 0.6, 0, 120);
        assert!(run_ensemble(&c).unwrap_err().is_config_error());
        c.replicates = 2;
        c.m_max = 1;
        assert!(run_ensemble(&c).is_err());
        c.m_max = 10;
        c.model = ModelKind::A;
        c.schedule = ParamSchedule::AdaptiveV1 { r: 0.75 };
        assert!(run_ensemble(&c).is_err());
        c.model = ModelKind::B;
        c.observables = vec![Observable::WeightedIsolated(Weight::Alpha)];
        assert!(run_ensemble(&c).is_err());
    }

    #[test]
    fn failed_replicate_reports_its_index() {
        let c = EnsembleConfig {
            model: ModelKind::B,
            init: InitialGraphSpec::SingleEdge,
            schedule: "custom:2:0.5,0.5,0.5;0.5,0.5,0.5".parse().unwrap(),
            m_max: 30,
            replicates: 3,
            base_seed: 0,
            record_stride: 1,
            observables: vec![Observable::Isolated],
        };
        match run_ensemble(&c).unwrap_err() {
            Error::Replicate { index, .. } => assert_eq!(index, 0),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn theory_comparison_picks_applicable_checks() {
        let mut c = cfg(0.6, 0.9, 1.0, 30, 1000);
        c.record_stride = 100;
        let stats = run_ensemble(&c).unwrap();
        let rep = compare_to_theory(&stats, &Tolerances::default());
        let by_name = |n: &str| rep.verdicts.iter().find(|(k, _)| k == n).unwrap().1.clone();
        assert!(by_name("rho_interval").is_pass(), "{}", by_name("rho_interval"));
        assert!(matches!(by_name("theta_interval"), Verdict::Inapplicable(_)));
        assert!(matches!(by_name("adaptive_supermartingale"), Verdict::Inapplicable(_)));
    }

    #[test]
    fn summary_statistics() {
        let mut a = Accumulator::default();
        for x in [1.0, 2.0, 3.0, 4.0] {
            a.push(x);
        }
        let s = a.summary();
        assert_eq!((s.mean, s.min, s.max, s.n), (2.5, 1.0, 4.0, 4));
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((s.stderr - sd / 2.0).abs() < 1e-15);
    }
}
