//! Evolving simple graphs with an incrementally maintained degree histogram.
//!
//! Vertex ids are dense: a graph with `N` vertices uses ids `0..N`, and ids
//! are never recycled. Vertex `i` here corresponds to label `i + 1` in the
//! usual 1-based presentation of the models.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Counts of vertices by degree. Trailing zero buckets are never stored, so
/// two histograms compare equal exactly when all counts agree.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DegreeHistogram {
    counts: Vec<u64>,
}

impl DegreeHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a histogram from `(degree, count)` pairs; repeated degrees add up.
    pub fn from_pairs(pairs: &[(usize, u64)]) -> Self {
        let mut h = Self::new();
        for &(k, c) in pairs {
            h.add(k, c);
        }
        h
    }

    pub fn from_degrees<I: IntoIterator<Item = usize>>(degrees: I) -> Self {
        let mut h = Self::new();
        for d in degrees {
            h.increment(d);
        }
        h
    }

    /// `N_k`; zero beyond the stored range.
    #[inline]
    pub fn get(&self, k: usize) -> u64 {
        self.counts.get(k).copied().unwrap_or(0)
    }

    /// Number of stored buckets (one past the maximum degree present).
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `sum_k k^order * N_k` as a float.
    pub fn moment(&self, order: u32) -> f64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(k, &c)| (k as f64).powi(order as i32) * c as f64)
            .sum()
    }

    /// `sum_k k * N_k`, exact.
    pub fn degree_sum(&self) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(k, &c)| k as u64 * c)
            .sum()
    }

    fn add(&mut self, k: usize, c: u64) {
        if c == 0 {
            return;
        }
        if k >= self.counts.len() {
            self.counts.resize(k + 1, 0);
        }
        self.counts[k] += c;
    }

    #[inline]
    fn increment(&mut self, k: usize) {
        if k >= self.counts.len() {
            self.counts.resize(k + 1, 0);
        }
        self.counts[k] += 1;
    }

    #[inline]
    fn decrement(&mut self, k: usize) {
        debug_assert!(self.get(k) > 0, "histogram bucket {k} underflow");
        self.counts[k] -= 1;
        while self.counts.last() == Some(&0) {
            self.counts.pop();
        }
    }

    #[inline]
    fn shift(&mut self, from: usize, to: usize) {
        self.increment(to);
        self.decrement(from);
    }
}

impl fmt::Display for DegreeHistogram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        let mut first = true;
        for (k, &c) in self.counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{k}:{c}")?;
        }
        f.write_str("}")
    }
}

/// How to build the graph a run starts from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InitialGraphSpec {
    /// K2.
    SingleEdge,
    /// An edge `0-1` plus the isolated vertex `2`.
    EdgePlusIsolated,
    Complete(usize),
    Isolated(usize),
    Custom {
        vertices: usize,
        edges: Vec<(u32, u32)>,
    },
}

impl InitialGraphSpec {
    pub fn vertex_count(&self) -> usize {
        match self {
            InitialGraphSpec::SingleEdge => 2,
            InitialGraphSpec::EdgePlusIsolated => 3,
            InitialGraphSpec::Complete(n) | InitialGraphSpec::Isolated(n) => *n,
            InitialGraphSpec::Custom { vertices, .. } => *vertices,
        }
    }

    pub fn build(&self) -> Result<EvolvingGraph> {
        EvolvingGraph::from_spec(self)
    }
}

impl fmt::Display for InitialGraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialGraphSpec::SingleEdge => f.write_str("single_edge"),
            InitialGraphSpec::EdgePlusIsolated => f.write_str("edge_plus_isolated"),
            InitialGraphSpec::Complete(n) => write!(f, "complete:{n}"),
            InitialGraphSpec::Isolated(n) => write!(f, "isolated:{n}"),
            InitialGraphSpec::Custom { vertices, edges } => {
                write!(f, "custom:{vertices}:")?;
                for (i, (a, b)) in edges.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}-{b}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for InitialGraphSpec {
    type Err = Error;

    /// Accepts `single_edge`, `edge_plus_isolated`, `complete:N`, `isolated:N`
    /// and `custom:N:a-b,c-d,...`. `complete(N)` / `isolated(N)` also parse.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |why: &str| Error::InvalidSpec(format!("`{s}`: {why}"));
        let parse_count = |t: &str| -> Result<usize> {
            let n: usize = t
                .trim()
                .parse()
                .map_err(|_| bad("vertex count is not a non-negative integer"))?;
            if n == 0 {
                return Err(bad("an initial graph needs at least one vertex"));
            }
            if n > u32::MAX as usize {
                return Err(bad("vertex count too large"));
            }
            Ok(n)
        };
        match s {
            "single_edge" => return Ok(InitialGraphSpec::SingleEdge),
            "edge_plus_isolated" => return Ok(InitialGraphSpec::EdgePlusIsolated),
            _ => {}
        }
        let (head, rest) = match s.find([':', '(']) {
            Some(i) => (&s[..i], &s[i..]),
            None => return Err(bad("unknown preset")),
        };
        let arg = if let Some(inner) = rest.strip_prefix('(') {
            inner
                .strip_suffix(')')
                .ok_or_else(|| bad("missing `)`"))?
        } else {
            &rest[1..]
        };
        match head {
            "complete" => Ok(InitialGraphSpec::Complete(parse_count(arg)?)),
            "isolated" => Ok(InitialGraphSpec::Isolated(parse_count(arg)?)),
            "custom" => {
                let (n, list) = arg.split_once(':').unwrap_or((arg, ""));
                let vertices = parse_count(n)?;
                let mut edges = Vec::new();
                for item in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                    let (a, b) = item
                        .split_once('-')
                        .ok_or_else(|| bad("edges must look like `a-b`"))?;
                    let a: u32 = a.trim().parse().map_err(|_| bad("bad edge endpoint"))?;
                    let b: u32 = b.trim().parse().map_err(|_| bad("bad edge endpoint"))?;
                    edges.push((a, b));
                }
                validate_edge_list(vertices, &edges)?;
                Ok(InitialGraphSpec::Custom { vertices, edges })
            }
            _ => Err(bad("unknown preset")),
        }
    }
}

/// Rejects self-loops, duplicates (either orientation) and out-of-range
/// endpoints without materializing the graph.
fn validate_edge_list(n: usize, edges: &[(u32, u32)]) -> Result<()> {
    let mut seen = std::collections::HashSet::with_capacity(edges.len());
    for &(a, b) in edges {
        if a as usize >= n || b as usize >= n {
            return Err(Error::InvalidSpec(format!(
                "edge {a}-{b} has an endpoint outside 0..{n}"
            )));
        }
        if a == b {
            return Err(Error::InvalidSpec(format!("edge {a}-{b} is a self-loop")));
        }
        if !seen.insert((a.min(b), a.max(b))) {
            return Err(Error::InvalidSpec(format!("edge {a}-{b} is a duplicate")));
        }
    }
    Ok(())
}

impl TryFrom<String> for InitialGraphSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<InitialGraphSpec> for String {
    fn from(spec: InitialGraphSpec) -> String {
        spec.to_string()
    }
}

/// Undirected simple graph whose vertex set only grows.
///
/// Adjacency lists are kept sorted ascending. Since a new vertex always gets
/// the largest id, attaching it is a push onto each neighbor's list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EvolvingGraph {
    adjacency: Vec<Vec<u32>>,
    histogram: DegreeHistogram,
    edge_count: u64,
}

impl EvolvingGraph {
    pub fn from_spec(spec: &InitialGraphSpec) -> Result<Self> {
        match spec {
            InitialGraphSpec::SingleEdge => Self::from_edges(2, &[(0, 1)]),
            InitialGraphSpec::EdgePlusIsolated => Self::from_edges(3, &[(0, 1)]),
            InitialGraphSpec::Complete(n) => {
                Self::check_count(*n)?;
                let n = *n as u32;
                let edges: Vec<(u32, u32)> = (0..n)
                    .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                    .collect();
                Self::from_edges(n as usize, &edges)
            }
            InitialGraphSpec::Isolated(n) => {
                Self::check_count(*n)?;
                Self::from_edges(*n, &[])
            }
            InitialGraphSpec::Custom { vertices, edges } => Self::from_edges(*vertices, edges),
        }
    }

    fn check_count(n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::InvalidSpec("graph needs at least one vertex".into()));
        }
        if n > u32::MAX as usize {
            return Err(Error::InvalidSpec("vertex count too large".into()));
        }
        Ok(())
    }

    /// Builds a graph on `n` vertices, rejecting self-loops, duplicate edges
    /// (in either orientation) and out-of-range endpoints.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        Self::check_count(n)?;
        validate_edge_list(n, edges)?;
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in edges {
            adjacency[a as usize].push(b);
            adjacency[b as usize].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let histogram = DegreeHistogram::from_degrees(adjacency.iter().map(Vec::len));
        Ok(Self {
            adjacency,
            histogram,
            edge_count: edges.len() as u64,
        })
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    #[inline]
    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    #[inline]
    pub fn histogram(&self) -> &DegreeHistogram {
        &self.histogram
    }

    /// `N_0`.
    #[inline]
    pub fn isolated_count(&self) -> u64 {
        self.histogram.get(0)
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v.index()].len()
    }

    /// Neighbors of `v` in ascending id order.
    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[u32] {
        &self.adjacency[v.index()]
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v.index() < self.vertex_count()
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.contains(a) && self.adjacency[a.index()].binary_search(&b.0).is_ok()
    }

    /// Edges as `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count as usize);
        for (a, list) in self.adjacency.iter().enumerate() {
            for &b in list {
                if (a as u32) < b {
                    out.push((a as u32, b));
                }
            }
        }
        out
    }

    fn require_vertex(&self, v: VertexId) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "vertex {v} does not exist (graph has {} vertices)",
                self.vertex_count()
            )))
        }
    }

    fn next_id(&self) -> u32 {
        u32::try_from(self.vertex_count()).expect("vertex id space exhausted")
    }

    /// Adds a child of `parent` adjacent to `kept_neighbors` (which must be
    /// neighbors of `parent`) and, if `keep_parent_link`, to `parent` itself.
    pub fn add_duplicate(
        &mut self,
        parent: VertexId,
        keep_parent_link: bool,
        kept_neighbors: &[VertexId],
    ) -> Result<VertexId> {
        self.require_vertex(parent)?;
        let mut kept: Vec<u32> = kept_neighbors.iter().map(|v| v.0).collect();
        kept.sort_unstable();
        if let Some(w) = kept.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Contract(format!(
                "neighbor {} listed twice in kept set",
                w[0]
            )));
        }
        let parent_adj = &self.adjacency[parent.index()];
        if let Some(u) = kept.iter().find(|u| parent_adj.binary_search(u).is_err()) {
            return Err(Error::Contract(format!(
                "kept vertex {u} is not a neighbor of parent {parent}"
            )));
        }
        Ok(self.attach_child(parent, keep_parent_link, kept))
    }

    /// Unchecked core of [`add_duplicate`](Self::add_duplicate): `kept` must be
    /// ascending and a subset of the parent's neighbors. The vector becomes
    /// the child's adjacency list.
    pub(crate) fn attach_child(&mut self, parent: VertexId, keep_parent_link: bool, kept: Vec<u32>) -> VertexId {
        let child = self.next_id();
        let mut child_adj = kept;
        for &u in &child_adj {
            let list = &mut self.adjacency[u as usize];
            let d = list.len();
            list.push(child);
            self.histogram.shift(d, d + 1);
        }
        if keep_parent_link {
            let pos = child_adj.partition_point(|&u| u < parent.0);
            child_adj.insert(pos, parent.0);
            let list = &mut self.adjacency[parent.index()];
            let d = list.len();
            list.push(child);
            self.histogram.shift(d, d + 1);
        }
        self.edge_count += child_adj.len() as u64;
        self.histogram.increment(child_adj.len());
        self.adjacency.push(child_adj);
        VertexId(child)
    }

    /// Removes every edge at `v`; returns how many were removed.
    pub fn isolate_vertex(&mut self, v: VertexId) -> Result<usize> {
        self.require_vertex(v)?;
        let former = std::mem::take(&mut self.adjacency[v.index()]);
        let d = former.len();
        if d == 0 {
            return Ok(0);
        }
        for &u in &former {
            let list = &mut self.adjacency[u as usize];
            let du = list.len();
            let pos = list
                .binary_search(&v.0)
                .expect("adjacency symmetry violated");
            list.remove(pos);
            self.histogram.shift(du, du - 1);
        }
        self.histogram.shift(d, 0);
        self.edge_count -= d as u64;
        Ok(d)
    }

    pub fn add_isolated_vertex(&mut self) -> VertexId {
        let id = self.next_id();
        self.adjacency.push(Vec::new());
        self.histogram.increment(0);
        VertexId(id)
    }

    /// Histogram rebuilt from adjacency, ignoring the maintained one.
    pub fn recompute_histogram(&self) -> DegreeHistogram {
        DegreeHistogram::from_degrees(self.adjacency.iter().map(Vec::len))
    }

    /// Full structural audit. O(N + E log E); meant for tests and debugging.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.vertex_count();
        let mut degree_sum = 0u64;
        for (a, list) in self.adjacency.iter().enumerate() {
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Contract(format!("adjacency of {a} not strictly ascending")));
            }
            if list.len() > n.saturating_sub(1) {
                return Err(Error::Contract(format!("vertex {a} has degree above N-1")));
            }
            for &b in list {
                if b as usize == a {
                    return Err(Error::Contract(format!("self-loop at {a}")));
                }
                if b as usize >= n || self.adjacency[b as usize].binary_search(&(a as u32)).is_err() {
                    return Err(Error::Contract(format!("edge {a}-{b} is not symmetric")));
                }
            }
            degree_sum += list.len() as u64;
        }
        if self.recompute_histogram() != self.histogram {
            return Err(Error::Contract("maintained histogram is stale".into()));
        }
        if self.histogram.total() != n as u64 {
            return Err(Error::Contract("histogram mass differs from vertex count".into()));
        }
        if degree_sum != 2 * self.edge_count || self.histogram.degree_sum() != degree_sum {
            return Err(Error::Contract("handshake identity violated".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn h(pairs: &[(usize, u64)]) -> DegreeHistogram {
        DegreeHistogram::from_pairs(pairs)
    }

    fn path3() -> EvolvingGraph {
        EvolvingGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn presets() {
        let g = InitialGraphSpec::SingleEdge.build().unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.histogram(), &h(&[(1, 2)]));

        let g = InitialGraphSpec::EdgePlusIsolated.build().unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.histogram(), &h(&[(0, 1), (1, 2)]));

        let g = InitialGraphSpec::Complete(4).build().unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_count(), 6);
        assert_eq!(g.histogram(), &h(&[(3, 4)]));

        let g = InitialGraphSpec::Isolated(1).build().unwrap();
        assert_eq!(g.histogram(), &h(&[(0, 1)]));
    }

    #[test]
    fn custom_spec_errors_name_the_edge() {
        let err = EvolvingGraph::from_edges(3, &[(0, 0)]).unwrap_err();
        assert!(err.to_string().contains("0-0"), "{err}");
        let err = EvolvingGraph::from_edges(3, &[(0, 1), (1, 0)]).unwrap_err();
        assert!(err.to_string().contains("1-0"), "{err}");
        let err = EvolvingGraph::from_edges(3, &[(0, 5)]).unwrap_err();
        assert!(err.to_string().contains("0-5"), "{err}");
        assert!(EvolvingGraph::from_edges(0, &[]).is_err());
    }

    #[test]
    fn spec_parsing() {
        assert_eq!("single_edge".parse::<InitialGraphSpec>().unwrap(), InitialGraphSpec::SingleEdge);
        assert_eq!("complete(5)".parse::<InitialGraphSpec>().unwrap(), InitialGraphSpec::Complete(5));
        assert_eq!("isolated:3".parse::<InitialGraphSpec>().unwrap(), InitialGraphSpec::Isolated(3));
        let c: InitialGraphSpec = "custom:4:0-1, 2-3".parse().unwrap();
        assert_eq!(c.to_string(), "custom:4:0-1,2-3");
        assert_eq!(c.to_string().parse::<InitialGraphSpec>().unwrap(), c);
        assert!("custom:2:0-0".parse::<InitialGraphSpec>().is_err());
        assert!("complete:0".parse::<InitialGraphSpec>().is_err());
        assert!("triangle".parse::<InitialGraphSpec>().is_err());
        assert!("complete(3".parse::<InitialGraphSpec>().is_err());
    }

    #[test]
    fn duplicate_examples() {
        let mut g = InitialGraphSpec::SingleEdge.build().unwrap();
        let c = g.add_duplicate(VertexId(0), true, &[VertexId(1)]).unwrap();
        assert_eq!(c, VertexId(2));
        assert_eq!(g.histogram(), &h(&[(2, 3)]));

        let mut g = InitialGraphSpec::SingleEdge.build().unwrap();
        g.add_duplicate(VertexId(0), false, &[]).unwrap();
        assert_eq!(g.histogram(), &h(&[(0, 1), (1, 2)]));

        let mut g = path3();
        let c = g.add_duplicate(VertexId(1), true, &[VertexId(0)]).unwrap();
        assert_eq!(g.degree(c), 2);
        assert_eq!(g.histogram(), &h(&[(1, 1), (2, 2), (3, 1)]));
        g.check_invariants().unwrap();
    }

    #[test]
    fn duplicate_rejects_non_neighbors() {
        let mut g = path3();
        let err = g.add_duplicate(VertexId(0), true, &[VertexId(2)]).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
        assert!(g.add_duplicate(VertexId(9), true, &[]).is_err());
        assert!(g.add_duplicate(VertexId(1), true, &[VertexId(0), VertexId(0)]).is_err());
        assert_eq!(g.vertex_count(), 3);
    }

    #[test]
    fn isolate_examples() {
        let mut g = InitialGraphSpec::SingleEdge.build().unwrap();
        assert_eq!(g.isolate_vertex(VertexId(0)).unwrap(), 1);
        assert_eq!(g.histogram(), &h(&[(0, 2)]));

        let mut g = InitialGraphSpec::Complete(3).build().unwrap();
        assert_eq!(g.isolate_vertex(VertexId(0)).unwrap(), 2);
        assert_eq!(g.histogram(), &h(&[(0, 1), (1, 2)]));

        let before = g.clone();
        assert_eq!(g.isolate_vertex(VertexId(0)).unwrap(), 0);
        assert_eq!(g, before);
        assert!(g.isolate_vertex(VertexId(3)).is_err());
    }

    #[test]
    fn add_isolated_examples() {
        let mut g = InitialGraphSpec::SingleEdge.build().unwrap();
        assert_eq!(g.add_isolated_vertex(), VertexId(2));
        assert_eq!(g.histogram(), &h(&[(0, 1), (1, 2)]));

        let mut g = InitialGraphSpec::Isolated(1).build().unwrap();
        g.add_isolated_vertex();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.histogram(), &h(&[(0, 2)]));

        let mut g = InitialGraphSpec::Complete(3).build().unwrap();
        g.add_isolated_vertex();
        assert_eq!(g.histogram(), &h(&[(0, 1), (2, 3)]));
    }

    #[test]
    fn histogram_display() {
        assert_eq!(h(&[(0, 1), (1, 2)]).to_string(), "{0:1, 1:2}");
        assert_eq!(DegreeHistogram::new().to_string(), "{}");
    }

    /// Random mutation sequences of length >= 1000, audited after every op.
    #[test]
    fn random_mutation_sequences_keep_histogram_exact() {
        for seed in 0..8u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut g = InitialGraphSpec::EdgePlusIsolated.build().unwrap();
            for _ in 0..1200 {
                let n = g.vertex_count() as u32;
                match rng.gen_range(0..3) {
                    0 => {
                        let parent = VertexId(rng.gen_range(0..n));
                        let kept: Vec<VertexId> = g
                            .neighbors(parent)
                            .iter()
                            .filter(|_| rng.gen_bool(0.6))
                            .map(|&u| VertexId(u))
                            .collect();
                        let link = rng.gen_bool(0.7);
                        g.add_duplicate(parent, link, &kept).unwrap();
                    }
                    1 => {
                        g.isolate_vertex(VertexId(rng.gen_range(0..n))).unwrap();
                    }
                    _ => {
                        g.add_isolated_vertex();
                    }
                }
                assert_eq!(g.recompute_histogram(), *g.histogram());
                assert_eq!(g.histogram().degree_sum(), 2 * g.edge_count());
            }
            g.check_invariants().unwrap();
        }
    }

    proptest! {
        #[test]
        fn duplicate_then_isolate_child_restores_histogram(
            edges in proptest::collection::btree_set((0u32..7, 0u32..7), 0..15),
            parent in 0u32..7,
            link in any::<bool>(),
            mask in any::<u8>(),
        ) {
            let edges: Vec<(u32, u32)> = edges.into_iter().filter(|(a, b)| a < b).collect();
            let mut g = EvolvingGraph::from_edges(7, &edges).unwrap();
            let kept: Vec<VertexId> = g
                .neighbors(VertexId(parent))
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << (i % 8)) != 0)
                .map(|(_, &u)| VertexId(u))
                .collect();
            let before = g.histogram().clone();
            let child = g.add_duplicate(VertexId(parent), link, &kept).unwrap();
            g.check_invariants().unwrap();
            g.isolate_vertex(child).unwrap();
            g.check_invariants().unwrap();
            let mut expected = before;
            expected.increment(0);
            prop_assert_eq!(g.histogram(), &expected);
        }

        #[test]
        fn spec_strings_round_trip(n in 1usize..50, pick in 0u8..4) {
            let spec = match pick {
                0 => InitialGraphSpec::SingleEdge,
                1 => InitialGraphSpec::EdgePlusIsolated,
                2 => InitialGraphSpec::Complete(n),
                _ => InitialGraphSpec::Isolated(n),
            };
            prop_assert_eq!(spec.to_string().parse::<InitialGraphSpec>().unwrap(), spec);
        }
    }
}
