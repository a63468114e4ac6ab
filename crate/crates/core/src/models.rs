//! Step kernels for Model A and Model B and the parameter schedules that
//! drive Model B.
//!
//! Step index convention: the step with index `m` turns `G_{m-1}` into
//! `G_m`. The initial graph is `G_{m0}` with `m0` its vertex count. Model A
//! has exactly `m` vertices after step `m`; Model B draws its triple
//! `(p_{m-1}, q_{m-1}, r_{m-1})` from the schedule evaluated on `G_{m-1}`.
//!
//! Random draws within one step happen in a fixed order: step type, then
//! the parent (or deletion target), then the parent link, then one
//! retention draw per parent neighbor in ascending id order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::graph::{EvolvingGraph, InitialGraphSpec, VertexId};
use crate::rng::{RngStream, StepRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Probability of erasing each copied neighbor edge.
    pub p: f64,
    /// Probability that a step is a duplication step.
    pub q: f64,
    /// Probability of keeping the child-parent edge.
    pub r: f64,
}

impl ModelParams {
    pub fn new(p: f64, q: f64, r: f64) -> Result<Self> {
        Ok(Self {
            p: check_probability("p", p)?,
            q: check_probability("q", q)?,
            r: check_probability("r", r)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.p, self.q, self.r).map(|_| ())
    }
}

impl fmt::Display for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={} q={} r={}", self.p, self.q, self.r)
    }
}

/// Rule producing `r_k` in a power-law schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RetentionRule {
    /// `r_k = max(1/2, 1 - k^{-q_exponent})`.
    MaxHalf,
    /// `r_k = 1 - 1/(2 q_k)`, clamped to `[0, 1]`.
    FromQ,
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ParamSchedule {
    Static(ModelParams),
    /// `p_k = k^{-p_exponent}`, `q_k = 1 - k^{-q_exponent}`.
    PowerLaw {
        p_exponent: f64,
        q_exponent: f64,
        r_rule: RetentionRule,
    },
    /// `q_k` at equality in the first adaptive condition, `p_k` at the
    /// clamped upper bound of the matching `p` condition.
    AdaptiveV1 { r: f64 },
    /// Same construction for the second adaptive condition pair.
    AdaptiveV2 { r: f64 },
    /// Explicit triples; entry `i` applies at index `k = first_k + i`.
    Custom {
        first_k: usize,
        table: Vec<ModelParams>,
    },
}

/// Lower bound on `q_k` in the first adaptive condition:
/// `(1 + (2r - 1)/2 * x)^{-1}` with `x = N_{k,0}/N_k`.
pub fn adaptive_v1_q_bound(r: f64, x: f64) -> f64 {
    1.0 / (1.0 + 0.5 * (2.0 * r - 1.0) * x)
}

/// Upper bound on `p_k` in the first adaptive condition (meaningful for `r < 1`):
/// `(2r-1)/(1-r) * x - 2/(1-r) * (1-q)/q`.
pub fn adaptive_v1_p_bound(r: f64, q: f64, x: f64) -> f64 {
    (2.0 * r - 1.0) / (1.0 - r) * x - 2.0 / (1.0 - r) * (1.0 - q) / q
}

/// Lower bound on `q_k` in the second adaptive condition:
/// `(1 - x/2) / (1 - (1-r) x)`.
pub fn adaptive_v2_q_bound(r: f64, x: f64) -> f64 {
    (1.0 - 0.5 * x) / (1.0 - (1.0 - r) * x)
}

/// Upper bound on `p_k` in the second adaptive condition (meaningful for `r < 1`):
/// `((1 - 2q(1-r)) x - 2(1-q)) / (q (1-r))`.
pub fn adaptive_v2_p_bound(r: f64, q: f64, x: f64) -> f64 {
    ((1.0 - 2.0 * q * (1.0 - r)) * x - 2.0 * (1.0 - q)) / (q * (1.0 - r))
}

/// Clamps into `[0, 1]`, absorbing round-off within 1e-12 of either end.
fn clamp_unit(v: f64) -> f64 {
    if v <= 1e-12 {
        0.0
    } else if v >= 1.0 - 1e-12 {
        1.0
    } else {
        v
    }
}

impl ParamSchedule {
    pub fn validate(&self) -> Result<()> {
        match self {
            ParamSchedule::Static(params) => params.validate(),
            ParamSchedule::PowerLaw {
                p_exponent,
                q_exponent,
                r_rule,
            } => {
                for (field, v) in [("p_exponent", *p_exponent), ("q_exponent", *q_exponent)] {
                    if !v.is_finite() || v < 0.0 {
                        return Err(Error::Parameter {
                            field,
                            value: v,
                            reason: "exponent must be finite and non-negative",
                        });
                    }
                }
                if let RetentionRule::Constant(r) = r_rule {
                    check_probability("r", *r)?;
                }
                Ok(())
            }
            ParamSchedule::AdaptiveV1 { r } | ParamSchedule::AdaptiveV2 { r } => {
                check_probability("r", *r)?;
                if *r < 0.5 {
                    return Err(Error::Config(format!(
                        "adaptive schedules need r >= 1/2, got {r}"
                    )));
                }
                Ok(())
            }
            ParamSchedule::Custom { table, .. } => {
                if table.is_empty() {
                    return Err(Error::Config("custom schedule table is empty".into()));
                }
                table.iter().try_for_each(ModelParams::validate)
            }
        }
    }

    /// True when the triples depend on the graph state.
    pub fn is_adaptive(&self) -> bool {
        matches!(self, ParamSchedule::AdaptiveV1 { .. } | ParamSchedule::AdaptiveV2 { .. })
    }

    /// The triple with index `k`, i.e. the one used by step `k + 1`, given
    /// the current graph `G_k`.
    pub fn params_at(&self, k: usize, g: &EvolvingGraph) -> Result<ModelParams> {
        let fail = |reason: String| Error::Schedule { step: k + 1, reason };
        let triple = match self {
            ParamSchedule::Static(params) => *params,
            ParamSchedule::PowerLaw {
                p_exponent,
                q_exponent,
                r_rule,
            } => {
                if k == 0 {
                    return Err(fail("power-law schedules need k >= 1".into()));
                }
                let kf = k as f64;
                let p = kf.powf(-p_exponent);
                let q = 1.0 - kf.powf(-q_exponent);
                let r = match r_rule {
                    RetentionRule::MaxHalf => (1.0 - kf.powf(-q_exponent)).max(0.5),
                    RetentionRule::FromQ => {
                        if q > 0.0 {
                            (1.0 - 0.5 / q).clamp(0.0, 1.0)
                        } else {
                            0.0
                        }
                    }
                    RetentionRule::Constant(r) => *r,
                };
                ModelParams { p, q, r }
            }
            ParamSchedule::AdaptiveV1 { r } => {
                let x = isolated_fraction(g);
                let q = adaptive_v1_q_bound(*r, x);
                let p = if *r >= 1.0 { 0.0 } else { clamp_unit(adaptive_v1_p_bound(*r, q, x)) };
                ModelParams { p, q, r: *r }
            }
            ParamSchedule::AdaptiveV2 { r } => {
                let x = isolated_fraction(g);
                let q = adaptive_v2_q_bound(*r, x);
                let p = if *r >= 1.0 { 0.0 } else { clamp_unit(adaptive_v2_p_bound(*r, q, x)) };
                ModelParams { p, q, r: *r }
            }
            ParamSchedule::Custom { first_k, table } => {
                let i = k
                    .checked_sub(*first_k)
                    .filter(|i| *i < table.len())
                    .ok_or_else(|| {
                        fail(format!(
                            "custom table covers k in {}..{}",
                            first_k,
                            first_k + table.len()
                        ))
                    })?;
                table[i]
            }
        };
        for (name, v) in [("p", triple.p), ("q", triple.q), ("r", triple.r)] {
            if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
                return Err(fail(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        Ok(triple)
    }

    /// Triple used by step `m` (index `m - 1`).
    pub fn params_for_step(&self, m: usize, g: &EvolvingGraph) -> Result<ModelParams> {
        if m == 0 {
            return Err(Error::Schedule {
                step: 0,
                reason: "step indices start at 1".into(),
            });
        }
        self.params_at(m - 1, g)
    }
}

fn isolated_fraction(g: &EvolvingGraph) -> f64 {
    g.isolated_count() as f64 / g.vertex_count() as f64
}

impl fmt::Display for ParamSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamSchedule::Static(pr) => write!(f, "static:{},{},{}", pr.p, pr.q, pr.r),
            ParamSchedule::PowerLaw {
                p_exponent,
                q_exponent,
                r_rule,
            } => {
                write!(f, "power_law:{p_exponent},{q_exponent},")?;
                match r_rule {
                    RetentionRule::MaxHalf => f.write_str("max_half"),
                    RetentionRule::FromQ => f.write_str("from_q"),
                    RetentionRule::Constant(r) => write!(f, "const={r}"),
                }
            }
            ParamSchedule::AdaptiveV1 { r } => write!(f, "adaptive_v1:{r}"),
            ParamSchedule::AdaptiveV2 { r } => write!(f, "adaptive_v2:{r}"),
            ParamSchedule::Custom { first_k, table } => {
                write!(f, "custom:{first_k}:")?;
                for (i, pr) in table.iter().enumerate() {
                    if i > 0 {
                        f.write_str(";")?;
                    }
                    write!(f, "{},{},{}", pr.p, pr.q, pr.r)?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for ParamSchedule {
    type Err = Error;

    /// `static:p,q,r` | `power_law:a1,a2,{max_half|from_q|const=r}` |
    /// `adaptive_v1:r` | `adaptive_v2:r` | `custom:first_k:p,q,r;p,q,r;...`
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |why: &str| Error::Config(format!("schedule `{s}`: {why}"));
        let num = |t: &str| -> Result<f64> {
            t.trim()
                .parse::<f64>()
                .map_err(|_| bad("expected a number"))
        };
        let triple = |t: &str| -> Result<ModelParams> {
            let parts: Vec<&str> = t.split(',').collect();
            if parts.len() != 3 {
                return Err(bad("expected `p,q,r`"));
            }
            ModelParams::new(num(parts[0])?, num(parts[1])?, num(parts[2])?)
        };
        let (kind, arg) = s.split_once(':').ok_or_else(|| bad("missing `:`"))?;
        let schedule = match kind {
            "static" => ParamSchedule::Static(triple(arg)?),
            "power_law" => {
                let parts: Vec<&str> = arg.split(',').collect();
                if parts.len() != 3 {
                    return Err(bad("expected `a1,a2,rule`"));
                }
                let r_rule = match parts[2].trim() {
                    "max_half" => RetentionRule::MaxHalf,
                    "from_q" => RetentionRule::FromQ,
                    other => match other.strip_prefix("const=") {
                        Some(v) => RetentionRule::Constant(num(v)?),
                        None => return Err(bad("unknown r rule")),
                    },
                };
                ParamSchedule::PowerLaw {
                    p_exponent: num(parts[0])?,
                    q_exponent: num(parts[1])?,
                    r_rule,
                }
            }
            "adaptive_v1" => ParamSchedule::AdaptiveV1 { r: num(arg)? },
            "adaptive_v2" => ParamSchedule::AdaptiveV2 { r: num(arg)? },
            "custom" => {
                let (first, rows) = arg.split_once(':').ok_or_else(|| bad("expected `first_k:rows`"))?;
                let first_k = first.trim().parse().map_err(|_| bad("bad first_k"))?;
                let table = rows
                    .split(';')
                    .filter(|t| !t.trim().is_empty())
                    .map(triple)
                    .collect::<Result<Vec<_>>>()?;
                ParamSchedule::Custom { first_k, table }
            }
            _ => return Err(bad("unknown schedule kind")),
        };
        schedule.validate()?;
        Ok(schedule)
    }
}

impl TryFrom<String> for ParamSchedule {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ParamSchedule> for String {
    fn from(s: ParamSchedule) -> String {
        s.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Duplication,
    /// Model A: wipe a vertex's edges and append an isolated vertex.
    DeletionAddition,
    /// Model B: wipe a vertex's edges.
    Deletion,
}

/// Audit record for one step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepOutcome {
    pub kind: StepKind,
    pub parent_or_target: VertexId,
    pub new_vertex: Option<VertexId>,
    /// Parent-neighbor edges the child kept (duplication only).
    pub edges_kept: usize,
    pub parent_link_kept: bool,
    /// Edges wiped from the target (deletion kinds only).
    pub edges_removed: usize,
    pub isolated_delta: i64,
}

fn duplication_step(g: &mut EvolvingGraph, p: f64, r: f64, rng: &mut StepRng) -> StepOutcome {
    let before = g.isolated_count() as i64;
    let parent = VertexId(rng.uniform_index(g.vertex_count()) as u32);
    let link = rng.bernoulli(r);
    let retain = 1.0 - p;
    let neighbors = g.neighbors(parent);
    let kept: Vec<u32> = if retain >= 1.0 {
        neighbors.to_vec()
    } else if retain <= 0.0 {
        Vec::new()
    } else {
        neighbors.iter().copied().filter(|_| rng.bernoulli(retain)).collect()
    };
    let edges_kept = kept.len();
    let child = g.attach_child(parent, link, kept);
    StepOutcome {
        kind: StepKind::Duplication,
        parent_or_target: parent,
        new_vertex: Some(child),
        edges_kept,
        parent_link_kept: link,
        edges_removed: 0,
        isolated_delta: g.isolated_count() as i64 - before,
    }
}

fn wipe_step(g: &mut EvolvingGraph, add_vertex: bool, rng: &mut StepRng) -> StepOutcome {
    let before = g.isolated_count() as i64;
    let target = VertexId(rng.uniform_index(g.vertex_count()) as u32);
    let removed = g.isolate_vertex(target).expect("target drawn from vertex range");
    let new_vertex = add_vertex.then(|| g.add_isolated_vertex());
    StepOutcome {
        kind: if add_vertex {
            StepKind::DeletionAddition
        } else {
            StepKind::Deletion
        },
        parent_or_target: target,
        new_vertex,
        edges_kept: 0,
        parent_link_kept: false,
        edges_removed: removed,
        isolated_delta: g.isolated_count() as i64 - before,
    }
}

fn require_nonempty(g: &EvolvingGraph) -> Result<()> {
    if g.vertex_count() == 0 {
        Err(Error::Contract("cannot step an empty graph".into()))
    } else {
        Ok(())
    }
}

/// One Model A step. The deletion-and-addition branch wipes the target
/// before appending the new isolated vertex.
pub fn step_model_a(g: &mut EvolvingGraph, params: &ModelParams, rng: &mut StepRng) -> Result<StepOutcome> {
    require_nonempty(g)?;
    Ok(if rng.bernoulli(params.q) {
        duplication_step(g, params.p, params.r, rng)
    } else {
        wipe_step(g, true, rng)
    })
}

/// One Model B step with an explicit triple.
pub fn step_model_b_with(g: &mut EvolvingGraph, params: &ModelParams, rng: &mut StepRng) -> Result<StepOutcome> {
    require_nonempty(g)?;
    Ok(if rng.bernoulli(params.q) {
        duplication_step(g, params.p, params.r, rng)
    } else {
        wipe_step(g, false, rng)
    })
}

/// Step `m` of Model B. The schedule is evaluated (and validated) before
/// the graph is touched.
pub fn step_model_b(
    g: &mut EvolvingGraph,
    schedule: &ParamSchedule,
    m: usize,
    rng: &mut StepRng,
) -> Result<StepOutcome> {
    require_nonempty(g)?;
    let params = schedule.params_for_step(m, g)?;
    step_model_b_with(g, &params, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    A,
    B,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::A => "A",
            ModelKind::B => "B",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(ModelKind::A),
            "B" | "b" => Ok(ModelKind::B),
            other => Err(Error::Config(format!("unknown model `{other}` (expected A or B)"))),
        }
    }
}

/// What drives a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub enum Dynamics {
    ModelA(ModelParams),
    ModelB(ParamSchedule),
}

impl Dynamics {
    pub fn kind(&self) -> ModelKind {
        match self {
            Dynamics::ModelA(_) => ModelKind::A,
            Dynamics::ModelB(_) => ModelKind::B,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Dynamics::ModelA(p) => p.validate(),
            Dynamics::ModelB(s) => s.validate(),
        }
    }

    /// Advances `g` by step `m`.
    pub fn step(&self, g: &mut EvolvingGraph, m: usize, rng: &mut StepRng) -> Result<StepOutcome> {
        match self {
            Dynamics::ModelA(params) => step_model_a(g, params, rng),
            Dynamics::ModelB(schedule) => step_model_b(g, schedule, m, rng),
        }
    }
}

/// What to record along a trajectory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordSpec {
    /// Record every `stride` steps after `m0`; `m0` and `m_max` are always recorded.
    pub stride: usize,
    /// Number of leading histogram buckets `N_0..N_{K}` kept per row (`K + 1`).
    pub histogram_prefix: usize,
}

impl Default for RecordSpec {
    fn default() -> Self {
        Self {
            stride: 1,
            histogram_prefix: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub m: usize,
    /// `N_m`.
    pub vertices: usize,
    pub edges: u64,
    /// `N_{m,0}`.
    pub isolated: u64,
    pub histogram_prefix: Vec<u64>,
    /// `sum_k k N_{m,k} / N_m`.
    pub psi1: f64,
    /// `sum_k k^2 N_{m,k} / N_m`.
    pub psi2: f64,
}

impl TrajectoryRow {
    fn capture(m: usize, g: &EvolvingGraph, prefix: usize) -> Self {
        let h = g.histogram();
        let n = g.vertex_count() as f64;
        Self {
            m,
            vertices: g.vertex_count(),
            edges: g.edge_count(),
            isolated: g.isolated_count(),
            histogram_prefix: (0..prefix).map(|k| h.get(k)).collect(),
            psi1: h.moment(1) / n,
            psi2: h.moment(2) / n,
        }
    }

    /// `N_{m,0} / m`.
    pub fn frac_isolated(&self) -> f64 {
        self.isolated as f64 / self.m as f64
    }

    /// `N_{m,0} / N_m`.
    pub fn frac_isolated_of_n(&self) -> f64 {
        self.isolated as f64 / self.vertices as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub m0: usize,
    pub rows: Vec<TrajectoryRow>,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectoryRow {
        self.rows.last().expect("a trajectory always records m0")
    }
}

/// Steps `dynamics` from `init` until the step index reaches `m_max`.
pub fn run_trajectory(
    dynamics: &Dynamics,
    init: &InitialGraphSpec,
    m_max: usize,
    stream: RngStream,
    record: &RecordSpec,
) -> Result<Trajectory> {
    dynamics.validate()?;
    let g = init.build()?;
    run_from_graph(dynamics, g, m_max, stream, record).map(|(t, _)| t)
}

/// As [`run_trajectory`] but from an explicit graph; also returns the final graph.
pub fn run_from_graph(
    dynamics: &Dynamics,
    mut g: EvolvingGraph,
    m_max: usize,
    stream: RngStream,
    record: &RecordSpec,
) -> Result<(Trajectory, EvolvingGraph)> {
    let m0 = g.vertex_count();
    if m_max < m0 {
        return Err(Error::Config(format!(
            "m_max = {m_max} is below the initial vertex count {m0}"
        )));
    }
    if record.stride == 0 {
        return Err(Error::Config("record stride must be at least 1".into()));
    }
    let mut rng = stream.generator();
    let mut rows = vec![TrajectoryRow::capture(m0, &g, record.histogram_prefix)];
    for m in m0 + 1..=m_max {
        dynamics.step(&mut g, m, &mut rng)?;
        if (m - m0).is_multiple_of(record.stride) || m == m_max {
            rows.push(TrajectoryRow::capture(m, &g, record.histogram_prefix));
        }
    }
    Ok((Trajectory { m0, rows }, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DegreeHistogram;

    fn h(pairs: &[(usize, u64)]) -> DegreeHistogram {
        DegreeHistogram::from_pairs(pairs)
    }

    fn k2() -> EvolvingGraph {
        InitialGraphSpec::SingleEdge.build().unwrap()
    }

    fn params(p: f64, q: f64, r: f64) -> ModelParams {
        ModelParams::new(p, q, r).unwrap()
    }

    #[test]
    fn params_are_validated() {
        assert!(ModelParams::new(1.5, 0.5, 0.5).is_err());
        let err = ModelParams::new(0.5, -0.1, 0.5).unwrap_err();
        assert!(err.to_string().contains("`q`"), "{err}");
        assert!(ModelParams::new(0.5, 0.5, f64::NAN).is_err());
    }

    #[test]
    fn model_a_forced_examples() {
        for seed in 0..5 {
            let mut rng = RngStream::new(seed, 0).generator();
            let mut g = k2();
            step_model_a(&mut g, &params(0.0, 1.0, 1.0), &mut rng).unwrap();
            assert_eq!(g.histogram(), &h(&[(2, 3)]));

            let mut g = k2();
            step_model_a(&mut g, &params(1.0, 1.0, 0.0), &mut rng).unwrap();
            assert_eq!(g.histogram(), &h(&[(0, 1), (1, 2)]));

            let mut g = k2();
            let out = step_model_a(&mut g, &params(0.3, 0.0, 0.4), &mut rng).unwrap();
            assert_eq!(out.kind, StepKind::DeletionAddition);
            assert_eq!(g.histogram(), &h(&[(0, 3)]));
            assert_eq!(out.isolated_delta, 3);
            assert!(out.new_vertex.is_some());
        }
    }

    #[test]
    fn model_b_examples() {
        let mut rng = RngStream::new(3, 0).generator();
        let mut g = k2();
        step_model_b(&mut g, &ParamSchedule::Static(params(0.0, 1.0, 1.0)), 3, &mut rng).unwrap();
        assert_eq!(g.histogram(), &h(&[(2, 3)]));

        let mut g = k2();
        let out = step_model_b(&mut g, &ParamSchedule::Static(params(0.5, 0.0, 0.5)), 3, &mut rng).unwrap();
        assert_eq!(out.kind, StepKind::Deletion);
        assert_eq!(out.new_vertex, None);
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.histogram(), &h(&[(0, 2)]));
    }

    #[test]
    fn bad_schedule_value_fails_before_mutation() {
        let schedule = ParamSchedule::Custom {
            first_k: 2,
            table: vec![ModelParams { p: 0.5, q: 1.2, r: 0.5 }],
        };
        let mut g = k2();
        let before = g.clone();
        let mut rng = RngStream::new(0, 0).generator();
        let err = step_model_b(&mut g, &schedule, 3, &mut rng).unwrap_err();
        assert!(matches!(err, Error::Schedule { .. }), "{err}");
        assert_eq!(g, before);
        // Outside the table as well.
        assert!(step_model_b(&mut g, &schedule, 9, &mut rng).is_err());
    }

    #[test]
    fn adaptive_schedule_examples() {
        let iso3 = InitialGraphSpec::Isolated(3).build().unwrap();
        let v1 = ParamSchedule::AdaptiveV1 { r: 1.0 };
        let t = v1.params_at(3, &iso3).unwrap();
        assert!((t.q - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(t.p, 0.0);

        let v2 = ParamSchedule::AdaptiveV2 { r: 1.0 };
        assert!((v2.params_at(3, &iso3).unwrap().q - 0.5).abs() < 1e-15);

        // Upper bound of the first p condition evaluated at q = 1.
        assert!((adaptive_v1_p_bound(0.75, 1.0, 1.0) - 2.0).abs() < 1e-12);
        assert_eq!(clamp_unit(adaptive_v1_p_bound(0.75, 1.0, 1.0)), 1.0);

        // No isolated vertices: every step duplicates, nothing is erased.
        let t = ParamSchedule::AdaptiveV1 { r: 0.75 }.params_at(2, &k2()).unwrap();
        assert_eq!((t.p, t.q), (0.0, 1.0));
        let t = ParamSchedule::AdaptiveV2 { r: 0.75 }.params_at(2, &k2()).unwrap();
        assert_eq!((t.p, t.q), (0.0, 1.0));

        assert!(ParamSchedule::AdaptiveV1 { r: 0.4 }.validate().is_err());
        assert!("adaptive_v2:0.3".parse::<ParamSchedule>().is_err());
    }

    #[test]
    fn adaptive_v1_equality_pins_p_to_zero() {
        let g = InitialGraphSpec::EdgePlusIsolated.build().unwrap();
        for r in [0.5, 0.6, 0.75, 0.9] {
            let t = ParamSchedule::AdaptiveV1 { r }.params_at(3, &g).unwrap();
            assert_eq!(t.p, 0.0, "r = {r}");
            assert!(t.q >= 2.0 / 3.0);
        }
    }

    #[test]
    fn adaptive_v2_keeps_isolated_count_a_supermartingale_in_one_step() {
        // E[dN0 | G] from the Model B isolated-count recursion must be <= 0.
        let g = InitialGraphSpec::Custom {
            vertices: 6,
            edges: vec![(0, 1), (1, 2), (3, 4)],
        }
        .build()
        .unwrap();
        let n = g.vertex_count() as f64;
        let hist = g.histogram();
        for r in [0.5, 0.7, 0.9] {
            let t = ParamSchedule::AdaptiveV2 { r }.params_at(6, &g).unwrap();
            let x0 = hist.get(0) as f64 / n;
            let x1 = hist.get(1) as f64 / n;
            let tail: f64 = (1..hist.len()).map(|j| hist.get(j) as f64 / n * t.p.powi(j as i32)).sum();
            let drift = t.q * (1.0 - 2.0 * t.r) * x0 + t.q * (1.0 - t.r) * tail + (1.0 - t.q) * (1.0 + x1 - x0);
            assert!(drift <= 1e-12, "r={r} drift={drift}");
        }
    }

    #[test]
    fn power_law_schedule() {
        let g = k2();
        let s: ParamSchedule = "power_law:2,2,const=0.5".parse().unwrap();
        let t = s.params_at(4, &g).unwrap();
        assert!((t.p - 1.0 / 16.0).abs() < 1e-15);
        assert!((t.q - 15.0 / 16.0).abs() < 1e-15);
        assert_eq!(t.r, 0.5);
        let s: ParamSchedule = "power_law:2,1.5,max_half".parse().unwrap();
        assert_eq!(s.params_at(2, &g).unwrap().r, 1.0 - 2f64.powf(-1.5));
        assert_eq!(s.params_at(1, &g).unwrap().r, 0.5);
        let s: ParamSchedule = "power_law:2,2,from_q".parse().unwrap();
        let t = s.params_at(4, &g).unwrap();
        assert!((t.r - (1.0 - 0.5 / t.q)).abs() < 1e-15);
        assert!(s.params_at(0, &g).is_err());
    }

    #[test]
    fn schedule_strings_round_trip() {
        for text in [
            "static:0.2,0.9,1",
            "power_law:2,2,const=0.5",
            "power_law:1.5,3,max_half",
            "adaptive_v1:0.75",
            "adaptive_v2:1",
            "custom:3:0.1,0.5,1;0,1,0.5",
        ] {
            let s: ParamSchedule = text.parse().unwrap();
            assert_eq!(s.to_string(), text);
        }
        assert!("static:0.2,0.9".parse::<ParamSchedule>().is_err());
        assert!("spline:1".parse::<ParamSchedule>().is_err());
    }

    #[test]
    fn trajectory_examples() {
        let record = RecordSpec::default();
        let t = run_trajectory(
            &Dynamics::ModelA(params(1.0, 1.0, 0.0)),
            &InitialGraphSpec::SingleEdge,
            100,
            RngStream::new(9, 0),
            &record,
        )
        .unwrap();
        assert_eq!(t.last().m, 100);
        assert_eq!(t.last().isolated, 98);

        let t = run_trajectory(
            &Dynamics::ModelA(params(0.4, 0.6, 0.3)),
            &InitialGraphSpec::EdgePlusIsolated,
            300,
            RngStream::new(1, 2),
            &record,
        )
        .unwrap();
        assert!(t.rows.iter().all(|row| row.vertices == row.m));
        assert_eq!(t.rows.len(), 298);

        let t = run_trajectory(
            &Dynamics::ModelB(ParamSchedule::Static(params(0.5, 1.0, 0.5))),
            &InitialGraphSpec::SingleEdge,
            200,
            RngStream::new(1, 2),
            &record,
        )
        .unwrap();
        assert!(t.rows.iter().all(|row| row.vertices == row.m));
    }

    #[test]
    fn trajectory_rejects_short_horizon_and_zero_stride() {
        let d = Dynamics::ModelA(params(0.5, 0.5, 0.5));
        assert!(run_trajectory(&d, &InitialGraphSpec::Complete(5), 4, RngStream::new(0, 0), &RecordSpec::default()).is_err());
        let zero = RecordSpec { stride: 0, histogram_prefix: 0 };
        assert!(run_trajectory(&d, &InitialGraphSpec::SingleEdge, 4, RngStream::new(0, 0), &zero).is_err());
    }

    #[test]
    fn q_one_never_increases_isolated_count() {
        for (seed, r) in [(1u64, 0.0), (2, 0.5), (3, 1.0)] {
            let t = run_trajectory(
                &Dynamics::ModelA(params(0.5, 1.0, r)),
                &InitialGraphSpec::Isolated(4),
                400,
                RngStream::new(seed, 0),
                &RecordSpec::default(),
            )
            .unwrap();
            // A child may be born isolated (+1), but no existing vertex loses edges;
            // what cannot happen is an existing non-isolated vertex becoming isolated.
            for w in t.rows.windows(2) {
                assert!(w[1].isolated <= w[0].isolated + 1);
            }
        }
        // q = r = 1 from an isolated-free start: N_0 stays 0.
        let t = run_trajectory(
            &Dynamics::ModelA(params(0.7, 1.0, 1.0)),
            &InitialGraphSpec::Complete(3),
            500,
            RngStream::new(4, 0),
            &RecordSpec::default(),
        )
        .unwrap();
        assert!(t.rows.iter().all(|row| row.isolated == 0));
    }

    #[test]
    fn identical_streams_give_identical_trajectories() {
        let d = Dynamics::ModelB(ParamSchedule::AdaptiveV2 { r: 0.7 });
        let rec = RecordSpec { stride: 7, histogram_prefix: 4 };
        let a = run_trajectory(&d, &InitialGraphSpec::EdgePlusIsolated, 700, RngStream::new(5, 11), &rec).unwrap();
        let b = run_trajectory(&d, &InitialGraphSpec::EdgePlusIsolated, 700, RngStream::new(5, 11), &rec).unwrap();
        assert_eq!(a, b);
        let c = run_trajectory(&d, &InitialGraphSpec::EdgePlusIsolated, 700, RngStream::new(5, 12), &rec).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn model_b_vertex_count_is_binomial() {
        let (m0, m_max, q) = (3usize, 203usize, 0.6);
        let d = Dynamics::ModelB(ParamSchedule::Static(params(0.4, q, 0.5)));
        let counts: Vec<f64> = (0..1000)
            .map(|i| {
                let t = run_trajectory(&d, &InitialGraphSpec::EdgePlusIsolated, m_max, RngStream::new(77, i), &RecordSpec {
                    stride: m_max,
                    histogram_prefix: 0,
                })
                .unwrap();
                (t.last().vertices - m0) as f64
            })
            .collect();
        let n = counts.len() as f64;
        let mean = counts.iter().sum::<f64>() / n;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let expected = (m_max - m0) as f64 * q;
        assert!((mean - expected).abs() <= 4.0 * (var / n).sqrt(), "mean {mean} vs {expected}");
        let binom_var = (m_max - m0) as f64 * q * (1.0 - q);
        assert!((var / binom_var - 1.0).abs() < 0.15, "variance {var} vs {binom_var}");
    }

    proptest::proptest! {
        #[test]
        fn model_a_keeps_n_equal_to_m(
            p in 0.0..=1.0f64, q in 0.0..=1.0f64, r in 0.0..=1.0f64, seed in proptest::prelude::any::<u64>()
        ) {
            let t = run_trajectory(
                &Dynamics::ModelA(params(p, q, r)),
                &InitialGraphSpec::EdgePlusIsolated,
                120,
                RngStream::new(seed, 0),
                &RecordSpec { stride: 1, histogram_prefix: 0 },
            )
            .unwrap();
            for row in &t.rows {
                proptest::prop_assert_eq!(row.vertices, row.m);
            }
        }

        #[test]
        fn q_one_only_grows_isolated_count_by_births(
            p in 0.0..=1.0f64, r in 0.0..=1.0f64, seed in proptest::prelude::any::<u64>(), model_b in proptest::prelude::any::<bool>()
        ) {
            let d = if model_b {
                Dynamics::ModelB(ParamSchedule::Static(params(p, 1.0, r)))
            } else {
                Dynamics::ModelA(params(p, 1.0, r))
            };
            let t = run_trajectory(&d, &InitialGraphSpec::EdgePlusIsolated, 150, RngStream::new(seed, 0), &RecordSpec::default())
                .unwrap();
            for w in t.rows.windows(2) {
                proptest::prop_assert!(w[1].isolated <= w[0].isolated + 1);
                proptest::prop_assert!(w[1].edges >= w[0].edges);
            }
        }
    }
}
