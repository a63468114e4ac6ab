//! Deterministic ground truth for Model A.
//!
//! Because Model A has exactly `m - 1` vertices before step `m`, the
//! conditional drift of every `N_{m,k}` is linear in the `N_{m-1,j}` and the
//! recursion closes under expectation. Model B does not close (its vertex
//! count is random and sits in the denominator), so for Model B only the
//! exact one-step law and brute-force enumeration are offered.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{DegreeHistogram, EvolvingGraph, InitialGraphSpec, VertexId};
use crate::models::{ModelKind, ModelParams};

/// Trailing expected counts below this are dropped.
const NEGLIGIBLE: f64 = 1e-250;
/// Binomial tails are cut once a term falls below this fraction of the mode.
const BINOMIAL_TAIL: f64 = 1e-18;

pub const DEFAULT_BRANCH_CAP: u128 = 1_000_000;

/// Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

/// Real-valued `E N_{m,k}` for `k = 0..len`; entries past `len` are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedHistogram {
    m: usize,
    values: Vec<f64>,
}

impl ExpectedHistogram {
    pub fn new(m: usize, values: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::Contract("expected histogram needs m >= 1".into()));
        }
        if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(Error::Numeric(format!("E N_{{{m},{k}}} = {v}")));
        }
        if values.len() > m {
            return Err(Error::Contract(format!(
                "{} degree buckets exceed the {m} possible at time {m}",
                values.len()
            )));
        }
        Ok(Self { m, values })
    }

    pub fn from_histogram(h: &DegreeHistogram) -> Result<Self> {
        Self::new(h.total() as usize, h.counts().iter().map(|&c| c as f64).collect())
    }

    pub fn from_graph(g: &EvolvingGraph) -> Result<Self> {
        Self::from_histogram(g.histogram())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, k: usize) -> f64 {
        self.values.get(k).copied().unwrap_or(0.0)
    }

    /// `sum_k E N_{m,k}`, which equals `m` for Model A.
    pub fn mass(&self) -> f64 {
        self.values.iter().copied().collect::<CompensatedSum>().value()
    }

    pub fn psi(&self, order: u32) -> f64 {
        psi_moment(self, order)
    }
}

/// `psi_order(m) = sum_k k^order E N_{m,k} / m`.
pub fn psi_moment(e: &ExpectedHistogram, order: u32) -> f64 {
    let s: CompensatedSum = e
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| (k as f64).powi(order as i32) * v)
        .collect();
    s.value() / e.m as f64
}

/// Normalized `Bin(j, s)` pmf restricted to where it is non-negligible.
#[derive(Debug, Clone)]
struct BinomialRow {
    start: usize,
    pmf: Vec<f64>,
}

impl BinomialRow {
    fn new(j: usize, s: f64) -> Self {
        if s <= 0.0 {
            return Self { start: 0, pmf: vec![1.0] };
        }
        if s >= 1.0 {
            return Self { start: j, pmf: vec![1.0] };
        }
        let odds = s / (1.0 - s);
        let mode = (((j + 1) as f64 * s).floor() as usize).min(j);
        let mut up = Vec::new();
        let mut w = 1.0;
        for k in mode..j {
            w *= (j - k) as f64 / (k + 1) as f64 * odds;
            if w < BINOMIAL_TAIL {
                break;
            }
            up.push(w);
        }
        let mut down = Vec::new();
        let mut w = 1.0;
        for k in (1..=mode).rev() {
            w *= k as f64 / (j - k + 1) as f64 / odds;
            if w < BINOMIAL_TAIL {
                break;
            }
            down.push(w);
        }
        let start = mode - down.len();
        let mut pmf: Vec<f64> = down.into_iter().rev().collect();
        pmf.push(1.0);
        pmf.extend(up);
        let total = pmf.iter().copied().collect::<CompensatedSum>().value();
        pmf.iter_mut().for_each(|x| *x /= total);
        Self { start, pmf }
    }
}

/// Iterates the Model A expectation recursion, caching binomial rows and
/// carrying a per-bucket compensation term across steps.
#[derive(Debug, Clone)]
pub struct ExpectationPropagator {
    params: ModelParams,
    rows: Vec<BinomialRow>,
    state: ExpectedHistogram,
    comp: Vec<f64>,
}

impl ExpectationPropagator {
    pub fn new(start: ExpectedHistogram, params: ModelParams) -> Result<Self> {
        params.validate()?;
        let comp = vec![0.0; start.values.len()];
        Ok(Self {
            params,
            rows: Vec::new(),
            state: start,
            comp,
        })
    }

    pub fn state(&self) -> &ExpectedHistogram {
        &self.state
    }

    pub fn into_state(self) -> ExpectedHistogram {
        self.state
    }

    fn row(&mut self, j: usize) -> &BinomialRow {
        let retain = 1.0 - self.params.p;
        while self.rows.len() <= j {
            let next = self.rows.len();
            self.rows.push(BinomialRow::new(next, retain));
        }
        &self.rows[j]
    }

    /// Advances from `m - 1` to `m`.
    pub fn step(&mut self) -> Result<()> {
        let ModelParams { p, q, r } = self.params;
        let n = self.state.m;
        let nf = n as f64;
        let old_len = self.state.values.len();
        let new_len = (old_len + 1).min(n + 1);

        // B[k] = sum_j e_j P(Bin(j, 1-p) = k): the child's degree law before
        // the parent link, weighted by the parent's degree.
        let mut child = vec![0.0; new_len];
        for j in 0..old_len {
            let ej = self.state.values[j];
            if ej == 0.0 {
                continue;
            }
            let row = self.row(j);
            for (i, w) in row.pmf.iter().enumerate() {
                child[row.start + i] += ej * w;
            }
        }

        let e = |k: usize| self.state.values.get(k).copied().unwrap_or(0.0);
        let mut next = vec![0.0; new_len];
        let mut comp = vec![0.0; new_len];
        for k in 0..new_len {
            let kf = k as f64;
            let (loss, gain) = if k == 0 {
                (
                    q * r + (1.0 - q),
                    q * (1.0 - r) * child[0] + (1.0 - q) * (2.0 * nf + e(1)),
                )
            } else {
                (
                    q * r + q * (1.0 - p) * kf + (1.0 - q) * (kf + 1.0),
                    e(k - 1) * q * (r + (1.0 - p) * (kf - 1.0))
                        + q * (1.0 - r) * child[k]
                        + q * r * child[k - 1]
                        + (1.0 - q) * (kf + 1.0) * e(k + 1),
                )
            };
            // Written as decay plus gain so that every term stays non-negative.
            let decay = (1.0 - loss / nf).max(0.0);
            let mut acc = CompensatedSum {
                sum: e(k) * decay,
                comp: self.comp.get(k).copied().unwrap_or(0.0) * decay,
            };
            acc.add(gain / nf);
            next[k] = acc.sum;
            comp[k] = acc.comp;
            if !next[k].is_finite() {
                return Err(Error::Numeric(format!("E N_{{{},{k}}} is not finite", n + 1)));
            }
        }
        while next.len() > 1 && next.last().is_some_and(|v| *v < NEGLIGIBLE) {
            next.pop();
            comp.pop();
        }
        self.state = ExpectedHistogram {
            m: n + 1,
            values: next.iter().zip(&comp).map(|(v, c)| v + c).collect(),
        };
        self.comp = next
            .iter()
            .zip(&comp)
            .zip(&self.state.values)
            .map(|((v, c), s)| (v - s) + c)
            .collect();
        Ok(())
    }
}

/// One step of the Model A expectation recursion from time `m - 1` to `m`.
pub fn expected_step_a(e: &ExpectedHistogram, params: &ModelParams) -> Result<ExpectedHistogram> {
    let mut prop = ExpectationPropagator::new(e.clone(), *params)?;
    prop.step()?;
    Ok(prop.into_state())
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub m: usize,
    /// `E N_{m,0}`.
    pub isolated: f64,
    /// `E N_{m,0} / m`.
    pub frac_isolated: f64,
    pub psi1: f64,
    pub psi2: f64,
    /// `sum_k E N_{m,k} - m`.
    pub mass_error: f64,
    pub histogram_prefix: Vec<f64>,
}

impl OracleRow {
    fn capture(e: &ExpectedHistogram, prefix: usize) -> Self {
        let m = e.m;
        Self {
            m,
            isolated: e.get(0),
            frac_isolated: e.get(0) / m as f64,
            psi1: e.psi(1),
            psi2: e.psi(2),
            mass_error: e.mass() - m as f64,
            histogram_prefix: (0..prefix).map(|k| e.get(k)).collect(),
        }
    }
}

/// Expected trajectory of Model A from `init` to `m_max`, recorded at `m0`,
/// every `stride` steps, and at `m_max`.
pub fn expected_trajectory_a(
    init: &InitialGraphSpec,
    params: &ModelParams,
    m_max: usize,
    stride: usize,
    histogram_prefix: usize,
) -> Result<Vec<OracleRow>> {
    let mut rows = Vec::new();
    expected_run_a(init, params, m_max, |e| {
        let m0 = init.vertex_count();
        if (e.m - m0).is_multiple_of(stride.max(1)) || e.m == m_max {
            rows.push(OracleRow::capture(e, histogram_prefix));
        }
    })?;
    Ok(rows)
}

/// Runs the recursion to `m_max`, handing every intermediate histogram
/// (including the initial one) to `visit`; returns the final histogram.
pub fn expected_run_a(
    init: &InitialGraphSpec,
    params: &ModelParams,
    m_max: usize,
    mut visit: impl FnMut(&ExpectedHistogram),
) -> Result<ExpectedHistogram> {
    let start = ExpectedHistogram::from_graph(&init.build()?)?;
    if m_max < start.m {
        return Err(Error::Config(format!(
            "m_max = {m_max} is below the initial vertex count {}",
            start.m
        )));
    }
    let mut prop = ExpectationPropagator::new(start, *params)?;
    visit(prop.state());
    while prop.state().m < m_max {
        prop.step()?;
        visit(prop.state());
    }
    Ok(prop.into_state())
}

/// Finite law over degree histograms.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    pub support: Vec<(DegreeHistogram, f64)>,
}

impl OutcomeDistribution {
    pub fn total_probability(&self) -> f64 {
        self.support.iter().map(|(_, w)| *w).collect::<CompensatedSum>().value()
    }

    /// `E N_k` under this law.
    pub fn expected_count(&self, k: usize) -> f64 {
        self.support
            .iter()
            .map(|(h, w)| h.get(k) as f64 * w)
            .collect::<CompensatedSum>()
            .value()
    }

    /// `E[f(h)]`.
    pub fn expectation(&self, f: impl Fn(&DegreeHistogram) -> f64) -> f64 {
        self.support
            .iter()
            .map(|(h, w)| f(h) * w)
            .collect::<CompensatedSum>()
            .value()
    }

    fn from_weighted_graphs(graphs: BTreeMap<EvolvingGraph, f64>) -> Self {
        let mut merged: BTreeMap<DegreeHistogram, CompensatedSum> = BTreeMap::new();
        for (g, w) in graphs {
            merged.entry(g.histogram().clone()).or_default().add(w);
        }
        Self {
            support: merged.into_iter().map(|(h, w)| (h, w.value())).collect(),
        }
    }
}

/// Number of branches one step from `g` expands into.
pub fn step_branch_count(g: &EvolvingGraph) -> u128 {
    let n = g.vertex_count() as u128;
    let dup: u128 = (0..g.vertex_count())
        .map(|v| {
            let d = g.degree(VertexId(v as u32)) as u32 + 1;
            if d >= 127 {
                u128::MAX / 4
            } else {
                1u128 << d
            }
        })
        .fold(0u128, |a, b| a.saturating_add(b));
    dup.saturating_add(n)
}

fn check_cap(branches: u128, cap: u128) -> Result<()> {
    if branches > cap {
        Err(Error::BranchCap { branches, cap })
    } else {
        Ok(())
    }
}

/// Every concrete successor of `g` with its probability. Zero-probability
/// branches are skipped.
pub fn successor_graphs(
    g: &EvolvingGraph,
    params: &ModelParams,
    model: ModelKind,
    cap: u128,
) -> Result<Vec<(EvolvingGraph, f64)>> {
    params.validate()?;
    if g.vertex_count() == 0 {
        return Err(Error::Contract("cannot step an empty graph".into()));
    }
    check_cap(step_branch_count(g), cap)?;
    let ModelParams { p, q, r } = *params;
    let pick = 1.0 / g.vertex_count() as f64;
    let mut out = Vec::new();
    if q > 0.0 {
        for v in 0..g.vertex_count() {
            let parent = VertexId(v as u32);
            let nbrs = g.neighbors(parent);
            for link in [false, true] {
                let w_link = if link { r } else { 1.0 - r };
                if w_link == 0.0 {
                    continue;
                }
                for mask in 0u64..(1u64 << nbrs.len()) {
                    let kept_count = mask.count_ones() as i32;
                    let w = q
                        * pick
                        * w_link
                        * (1.0 - p).powi(kept_count)
                        * p.powi(nbrs.len() as i32 - kept_count);
                    if w == 0.0 {
                        continue;
                    }
                    let kept: Vec<u32> = nbrs
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(_, &u)| u)
                        .collect();
                    let mut child = g.clone();
                    child.attach_child(parent, link, kept);
                    out.push((child, w));
                }
            }
        }
    }
    if q < 1.0 {
        for v in 0..g.vertex_count() {
            let mut child = g.clone();
            child.isolate_vertex(VertexId(v as u32))?;
            if model == ModelKind::A {
                child.add_isolated_vertex();
            }
            out.push((child, (1.0 - q) * pick));
        }
    }
    Ok(out)
}

/// Exact law of the successor degree histogram given `g`.
pub fn conditional_step_distribution(
    g: &EvolvingGraph,
    params: &ModelParams,
    model: ModelKind,
    cap: u128,
) -> Result<OutcomeDistribution> {
    let mut merged: BTreeMap<EvolvingGraph, f64> = BTreeMap::new();
    for (child, w) in successor_graphs(g, params, model, cap)? {
        *merged.entry(child).or_default() += w;
    }
    Ok(OutcomeDistribution::from_weighted_graphs(merged))
}

/// Exact law of the degree histogram after `steps` steps of a static
/// triple, by expanding concrete graphs (histograms are not a Markov state).
pub fn enumerate_exact(
    init: &InitialGraphSpec,
    params: &ModelParams,
    steps: usize,
    model: ModelKind,
    cap: u128,
) -> Result<OutcomeDistribution> {
    let mut layer: BTreeMap<EvolvingGraph, f64> = BTreeMap::new();
    layer.insert(init.build()?, 1.0);
    for _ in 0..steps {
        let branches = layer
            .keys()
            .map(step_branch_count)
            .fold(0u128, |a, b| a.saturating_add(b));
        check_cap(branches, cap)?;
        let mut next: BTreeMap<EvolvingGraph, CompensatedSum> = BTreeMap::new();
        for (g, w) in &layer {
            for (child, wc) in successor_graphs(g, params, model, u128::MAX)? {
                next.entry(child).or_default().add(w * wc);
            }
        }
        layer = next.into_iter().map(|(g, s)| (g, s.value())).collect();
    }
    Ok(OutcomeDistribution::from_weighted_graphs(layer))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncrementBound {
    pub k: usize,
    /// `E[(N_{m,k} - N_{m-1,k})^2 | G_{m-1}]`, computed exactly.
    pub lhs: f64,
    pub rhs: f64,
}

impl IncrementBound {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + 1e-12)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncrementBoundReport {
    /// `sum_j j^2 N_{m-1,j} / N_{m-1}`.
    pub second_moment: f64,
    pub bounds: Vec<IncrementBound>,
}

impl IncrementBoundReport {
    pub fn all_hold(&self) -> bool {
        self.bounds.iter().all(IncrementBound::holds)
    }
}

/// Compares the exact conditional second moment of each one-step increment
/// of `N_{.,k}` (Model A, `k = 0..=k_max`) with its closed-form bound:
/// `5(1-q) S + 5` for `k = 0` and `(3 + 2q) S + 4` otherwise.
pub fn check_squared_increment_bounds(
    g: &EvolvingGraph,
    params: &ModelParams,
    k_max: usize,
    cap: u128,
) -> Result<IncrementBoundReport> {
    let dist = conditional_step_distribution(g, params, ModelKind::A, cap)?;
    let before = g.histogram();
    let s = before.moment(2) / g.vertex_count() as f64;
    let q = params.q;
    let bounds = (0..=k_max)
        .map(|k| {
            let base = before.get(k) as f64;
            let lhs = dist.expectation(|h| (h.get(k) as f64 - base).powi(2));
            let rhs = if k == 0 {
                5.0 * (1.0 - q) * s + 5.0
            } else {
                (3.0 + 2.0 * q) * s + 4.0
            };
            IncrementBound { k, lhs, rhs }
        })
        .collect();
    Ok(IncrementBoundReport {
        second_moment: s,
        bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(p: f64, q: f64, r: f64) -> ModelParams {
        ModelParams::new(p, q, r).unwrap()
    }

    fn k2_expected() -> ExpectedHistogram {
        ExpectedHistogram::new(2, vec![0.0, 2.0]).unwrap()
    }

    #[test]
    fn one_step_from_k2_by_hand() {
        for &(p, q, r) in &[(0.3, 0.7, 0.5), (0.0, 0.2, 1.0), (1.0, 0.5, 0.0), (0.9, 1.0, 0.1)] {
            let e = expected_step_a(&k2_expected(), &params(p, q, r)).unwrap();
            assert_eq!(e.m(), 3);
            let want0 = q * (1.0 - r) * p + 3.0 * (1.0 - q);
            assert!((e.get(0) - want0).abs() < 1e-14, "{p} {q} {r}");
            // Degree two: the linked parent, the retained neighbor, or a child with both edges.
            let want2 = q * (r + (1.0 - p) + r * (1.0 - p));
            assert!((e.get(2) - want2).abs() < 1e-14, "{p} {q} {r}");
            assert!((e.mass() - 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn forced_cases() {
        let e = expected_step_a(&k2_expected(), &params(1.0, 1.0, 0.0)).unwrap();
        assert_eq!(e.get(0), 1.0);
        let e = expected_step_a(&k2_expected(), &params(0.0, 1.0, 1.0)).unwrap();
        assert_eq!(e.get(0), 0.0);
        assert_eq!(e.get(2), 3.0);
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi_moment(&k2_expected(), 1), 1.0);
        assert_eq!(psi_moment(&k2_expected(), 2), 1.0);
        let e = ExpectedHistogram::new(3, vec![1.0, 2.0]).unwrap();
        assert!((psi_moment(&e, 1) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_histograms() {
        assert!(ExpectedHistogram::new(2, vec![f64::NAN]).is_err());
        assert!(ExpectedHistogram::new(2, vec![-1.0, 3.0]).is_err());
        assert!(ExpectedHistogram::new(2, vec![0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn forced_trajectory_and_golden_fraction() {
        let rows = expected_trajectory_a(&InitialGraphSpec::SingleEdge, &params(1.0, 1.0, 0.0), 100, 1, 0).unwrap();
        assert!((rows.last().unwrap().frac_isolated - 0.98).abs() < 1e-12);

        let rows = expected_trajectory_a(&InitialGraphSpec::SingleEdge, &params(0.6, 0.9, 1.0), 1000, 100, 0).unwrap();
        let last = rows.last().unwrap();
        assert_eq!(last.m, 1000);
        assert!((0.08..=0.17).contains(&last.frac_isolated), "{}", last.frac_isolated);
    }

    #[test]
    fn q_one_r_one_is_monotone() {
        for init in [InitialGraphSpec::Isolated(4), InitialGraphSpec::EdgePlusIsolated] {
            let rows = expected_trajectory_a(&init, &params(0.4, 1.0, 1.0), 400, 1, 0).unwrap();
            assert!(rows.windows(2).all(|w| w[1].isolated <= w[0].isolated));
        }
    }

    #[test]
    fn binomial_rows_are_normalized() {
        for &(j, s) in &[(0, 0.5), (1, 0.3), (7, 0.99), (60, 0.5), (61, 0.01), (5000, 0.5), (3000, 0.999)] {
            let row = BinomialRow::new(j, s);
            let total: f64 = row.pmf.iter().sum();
            assert!((total - 1.0).abs() < 1e-13, "j={j}");
            let mean: f64 = row.pmf.iter().enumerate().map(|(i, w)| (row.start + i) as f64 * w).sum();
            assert!((mean - j as f64 * s).abs() < 1e-9 * (1.0 + j as f64), "j={j}");
        }
        // Small rows agree with the closed form.
        let row = BinomialRow::new(4, 0.3);
        assert_eq!(row.start, 0);
        let c = [1.0, 4.0, 6.0, 4.0, 1.0];
        for (k, w) in row.pmf.iter().enumerate() {
            let exact = c[k] * 0.3f64.powi(k as i32) * 0.7f64.powi(4 - k as i32);
            assert!((w - exact).abs() < 1e-14 * exact);
        }
    }

    #[test]
    fn conditional_law_of_k2() {
        let g = InitialGraphSpec::SingleEdge.build().unwrap();
        let (p, r) = (0.3, 0.6);
        let d = conditional_step_distribution(&g, &params(p, 1.0, r), ModelKind::A, DEFAULT_BRANCH_CAP).unwrap();
        assert!((d.total_probability() - 1.0).abs() < 1e-15);
        assert!((d.expected_count(0) - (1.0 - r) * p).abs() < 1e-15);
        let prob_of = |pairs: &[(usize, u64)]| {
            let h = DegreeHistogram::from_pairs(pairs);
            d.support.iter().find(|(x, _)| *x == h).map_or(0.0, |(_, w)| *w)
        };
        assert!((prob_of(&[(0, 1), (1, 2)]) - (1.0 - r) * p).abs() < 1e-15);
        assert!((prob_of(&[(2, 3)]) - r * (1.0 - p)).abs() < 1e-15);
        // Child degree one through either route gives a path on three vertices.
        assert!((prob_of(&[(1, 2), (2, 1)]) - (r * p + (1.0 - r) * (1.0 - p))).abs() < 1e-15);

        let d = conditional_step_distribution(&g, &params(0.4, 0.0, 0.4), ModelKind::A, DEFAULT_BRANCH_CAP).unwrap();
        assert_eq!(d.support, vec![(DegreeHistogram::from_pairs(&[(0, 3)]), 1.0)]);

        let iso2 = InitialGraphSpec::Isolated(2).build().unwrap();
        let d = conditional_step_distribution(&iso2, &params(0.4, 1.0, 0.25), ModelKind::A, DEFAULT_BRANCH_CAP).unwrap();
        assert_eq!(d.support.len(), 2);
        assert!((d.expected_count(0) - (3.0 * 0.75 + 0.25)).abs() < 1e-15);
    }

    #[test]
    fn branch_cap_is_enforced() {
        let g = InitialGraphSpec::Complete(8).build().unwrap();
        let err = conditional_step_distribution(&g, &params(0.5, 0.5, 0.5), ModelKind::A, 100).unwrap_err();
        match err {
            Error::BranchCap { branches, cap } => {
                assert_eq!(branches, 8 * 256 + 8);
                assert_eq!(cap, 100);
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn enumeration_matches_one_step_law_and_oracle() {
        let pr = params(0.3, 0.7, 0.5);
        let g = InitialGraphSpec::SingleEdge.build().unwrap();
        let one = enumerate_exact(&InitialGraphSpec::SingleEdge, &pr, 1, ModelKind::A, DEFAULT_BRANCH_CAP).unwrap();
        let direct = conditional_step_distribution(&g, &pr, ModelKind::A, DEFAULT_BRANCH_CAP).unwrap();
        assert_eq!(one.support.len(), direct.support.len());
        for ((h1, w1), (h2, w2)) in one.support.iter().zip(&direct.support) {
            assert_eq!(h1, h2);
            assert!((w1 - w2).abs() < 1e-15);
        }
        let e = expected_step_a(&k2_expected(), &pr).unwrap();
        assert!((one.expected_count(0) - e.get(0)).abs() < 1e-12);
        for steps in 0..=3 {
            let d = enumerate_exact(&InitialGraphSpec::SingleEdge, &pr, steps, ModelKind::B, DEFAULT_BRANCH_CAP).unwrap();
            assert!((d.total_probability() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn increment_bound_examples() {
        let k2 = InitialGraphSpec::SingleEdge.build().unwrap();
        for &(p, q, r) in &[(0.0, 0.0, 0.0), (0.5, 0.5, 0.5), (1.0, 1.0, 1.0)] {
            let rep = check_squared_increment_bounds(&k2, &params(p, q, r), 3, DEFAULT_BRANCH_CAP).unwrap();
            assert_eq!(rep.second_moment, 1.0);
            assert!(rep.all_hold());
            assert!((rep.bounds[0].rhs - (5.0 * (1.0 - q) + 5.0)).abs() < 1e-15);
        }
        let iso3 = InitialGraphSpec::Isolated(3).build().unwrap();
        let rep = check_squared_increment_bounds(&iso3, &params(0.5, 1.0, 0.5), 0, DEFAULT_BRANCH_CAP).unwrap();
        assert!(rep.bounds[0].lhs <= 1.0);
        let tri = InitialGraphSpec::Complete(3).build().unwrap();
        let rep = check_squared_increment_bounds(&tri, &params(0.5, 0.5, 0.5), 2, DEFAULT_BRANCH_CAP).unwrap();
        assert_eq!(rep.bounds[2].rhs, 4.0 * 4.0 + 4.0);
        assert!(rep.all_hold());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn mass_is_conserved(p in 0.0..=1.0f64, q in 0.0..=1.0f64, r in 0.0..=1.0f64, steps in 1usize..300) {
            let e = expected_run_a(&InitialGraphSpec::EdgePlusIsolated, &params(p, q, r), 3 + steps, |_| ()).unwrap();
            prop_assert!((e.mass() - e.m() as f64).abs() <= 1e-9 * e.m() as f64);
            prop_assert!(e.values().iter().all(|v| *v >= 0.0));
        }

        #[test]
        fn enumeration_probabilities_sum_to_one(p in 0.0..=1.0f64, q in 0.0..=1.0f64, r in 0.0..=1.0f64) {
            for steps in 0..=3 {
                let d = enumerate_exact(&InitialGraphSpec::EdgePlusIsolated, &params(p, q, r), steps, ModelKind::A, DEFAULT_BRANCH_CAP).unwrap();
                prop_assert!((d.total_probability() - 1.0).abs() < 1e-12);
                prop_assert!(d.support.iter().all(|(_, w)| *w >= 0.0));
            }
        }
    }
}
