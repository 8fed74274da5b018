//! Balanced bipartite graphs, edge sets, matchings and weight assignments.
//!
//! Edges are stored in a canonical lexicographically sorted list and referred
//! to by their index in that list. Every "first edge" tie-break in the crate is
//! relative to this order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};

/// Largest supported number of vertices per side.
pub const MAX_N: usize = 16;

pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BipartiteGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    #[serde(skip)]
    index: BTreeMap<(usize, usize), EdgeId>,
}

impl BipartiteGraph {
    /// Builds a graph with `n` vertices per side. The edge list is sorted into
    /// canonical order; duplicates and out-of-range endpoints are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(input_err!("n must be positive"));
        }
        if n > MAX_N {
            return Err(Error::TooLarge(format!("n = {n} exceeds the supported maximum {MAX_N}")));
        }
        let mut edges: Vec<(usize, usize)> = edges.into_iter().collect();
        for &(u, v) in &edges {
            if u >= n || v >= n {
                return Err(input_err!("edge ({u}, {v}) out of range for n = {n}"));
            }
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(input_err!("duplicate edge ({}, {})", w[0].0, w[0].1));
        }
        let index = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        Ok(Self { n, edges, index })
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::new(n, (0..n).flat_map(|u| (0..n).map(move |v| (u, v))))
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, [])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> (usize, usize) {
        self.edges[id]
    }

    pub fn edge_id(&self, u: usize, v: usize) -> Option<EdgeId> {
        self.index.get(&(u, v)).copied()
    }

    /// The graph with edge `id` deleted. Edge ids above `id` shift down by one.
    pub fn without_edge(&self, id: EdgeId) -> Result<Self> {
        self.check_edge(id)?;
        let edges = self.edges.iter().enumerate().filter(|&(i, _)| i != id).map(|(_, &e)| e);
        Self::new(self.n, edges)
    }

    pub(crate) fn check_edge(&self, id: EdgeId) -> Result<()> {
        if id >= self.edges.len() {
            return Err(input_err!("edge index {id} out of range ({} edges)", self.edges.len()));
        }
        Ok(())
    }

    /// Parses the text format: `n m` on the first line, then `m` lines of `u v`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| input_err!("empty graph file"))?;
        let (n, m) = parse_pair(header)?;
        let mut edges = Vec::with_capacity(m);
        for line in lines.by_ref().take(m) {
            edges.push(parse_pair(line)?);
        }
        if edges.len() != m {
            return Err(input_err!("expected {m} edge lines, found {}", edges.len()));
        }
        if lines.next().is_some() {
            return Err(input_err!("trailing lines after {m} edges"));
        }
        Self::new(n, edges)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        for (u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

fn parse_pair(line: &str) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace();
    let mut next = || -> Result<usize> {
        let tok = it.next().ok_or_else(|| input_err!("expected two integers in {line:?}"))?;
        tok.parse().map_err(|_| input_err!("not a non-negative integer: {tok:?}"))
    };
    let a = next()?;
    let b = next()?;
    if it.next().is_some() {
        return Err(input_err!("expected two integers in {line:?}"));
    }
    Ok((a, b))
}

impl fmt::Display for BipartiteGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G(n={}, E={:?})", self.n, self.edges)
    }
}

/// A set of edge ids of a parent graph with `universe` edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct EdgeSet {
    universe: usize,
    ids: BTreeSet<EdgeId>,
}

impl EdgeSet {
    pub fn empty(graph: &BipartiteGraph) -> Self {
        Self { universe: graph.num_edges(), ids: BTreeSet::new() }
    }

    pub fn from_ids(graph: &BipartiteGraph, ids: impl IntoIterator<Item = EdgeId>) -> Result<Self> {
        let ids: BTreeSet<EdgeId> = ids.into_iter().collect();
        if let Some(&bad) = ids.iter().find(|&&i| i >= graph.num_edges()) {
            return Err(input_err!("edge index {bad} out of range ({} edges)", graph.num_edges()));
        }
        Ok(Self { universe: graph.num_edges(), ids })
    }

    pub fn from_pairs(graph: &BipartiteGraph, pairs: &[(usize, usize)]) -> Result<Self> {
        let ids = pairs
            .iter()
            .map(|&(u, v)| graph.edge_id(u, v).ok_or_else(|| input_err!("({u}, {v}) is not an edge")))
            .collect::<Result<Vec<_>>>()?;
        Self::from_ids(graph, ids)
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: EdgeId) -> bool {
        self.ids.contains(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.ids.iter().copied()
    }

    pub fn pairs(&self, graph: &BipartiteGraph) -> Vec<(usize, usize)> {
        self.iter().map(|e| graph.edge(e)).collect()
    }

    fn check_same_parent(&self, other: &EdgeSet) -> Result<()> {
        if self.universe != other.universe {
            return Err(input_err!(
                "edge sets belong to different graphs ({} vs {} edges)",
                self.universe,
                other.universe
            ));
        }
        Ok(())
    }
}

/// `M1 Δ M2 = (M1 ∖ M2) ∪ (M2 ∖ M1)`.
pub fn symmetric_difference(a: &EdgeSet, b: &EdgeSet) -> Result<EdgeSet> {
    a.check_same_parent(b)?;
    Ok(EdgeSet { universe: a.universe, ids: a.ids.symmetric_difference(&b.ids).copied().collect() })
}

/// `M ⊕ S = (M ∪ S) ∖ (M ∩ S)`. The result need not be a matching.
pub fn xor_apply(m: &EdgeSet, s: &EdgeSet) -> Result<EdgeSet> {
    symmetric_difference(m, s)
}

/// True iff no two edges of `set` share an endpoint.
pub fn validate_matching(graph: &BipartiteGraph, set: &EdgeSet) -> Result<bool> {
    if set.universe != graph.num_edges() {
        return Err(input_err!("edge set does not belong to this graph"));
    }
    let mut left = vec![false; graph.n()];
    let mut right = vec![false; graph.n()];
    for id in set.iter() {
        graph.check_edge(id)?;
        let (u, v) = graph.edge(id);
        if std::mem::replace(&mut left[u], true) || std::mem::replace(&mut right[v], true) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// An edge set certified to be a matching of its parent graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matching(EdgeSet);

impl Matching {
    pub fn new(graph: &BipartiteGraph, set: EdgeSet) -> Result<Self> {
        if !validate_matching(graph, &set)? {
            return Err(input_err!("edge set {:?} is not a matching", set.pairs(graph)));
        }
        Ok(Self(set))
    }

    pub fn from_pairs(graph: &BipartiteGraph, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::new(graph, EdgeSet::from_pairs(graph, pairs)?)
    }

    pub fn empty(graph: &BipartiteGraph) -> Self {
        Self(EdgeSet::empty(graph))
    }

    pub fn edges(&self) -> &EdgeSet {
        &self.0
    }

    pub fn into_edges(self) -> EdgeSet {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: EdgeId) -> bool {
        self.0.contains(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.0.iter()
    }

    pub fn pairs(&self, graph: &BipartiteGraph) -> Vec<(usize, usize)> {
        self.0.pairs(graph)
    }

    pub fn weight(&self, weights: &[u64]) -> u64 {
        self.iter().map(|e| weights[e]).sum()
    }

    /// Left and right matched flags.
    pub fn covered(&self, graph: &BipartiteGraph) -> (Vec<bool>, Vec<bool>) {
        let mut left = vec![false; graph.n()];
        let mut right = vec![false; graph.n()];
        for (u, v) in self.pairs(graph) {
            left[u] = true;
            right[v] = true;
        }
        (left, right)
    }
}

/// Non-negative integer weights, one per edge, each below `2^bits`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightAssignment {
    weights: Vec<u64>,
    bits: u32,
}

impl WeightAssignment {
    pub fn new(weights: Vec<u64>, bits: u32) -> Result<Self> {
        if bits == 0 || bits > 63 {
            return Err(input_err!("weight width must be in 1..=63 bits, got {bits}"));
        }
        if let Some(&w) = weights.iter().find(|&&w| w >> bits != 0) {
            return Err(input_err!("weight {w} does not fit in {bits} bits"));
        }
        Ok(Self { weights, bits })
    }

    /// Smallest width that holds every entry (at least one bit).
    pub fn fitted(weights: Vec<u64>) -> Self {
        let max = weights.iter().copied().max().unwrap_or(0);
        let bits = (64 - max.leading_zeros()).max(1);
        Self { weights, bits }
    }

    pub fn for_graph(graph: &BipartiteGraph, weights: Vec<u64>, bits: u32) -> Result<Self> {
        if weights.len() != graph.num_edges() {
            return Err(input_err!(
                "expected {} weights, got {}",
                graph.num_edges(),
                weights.len()
            ));
        }
        Self::new(weights, bits)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn values(&self) -> &[u64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `W(S) = Σ_{e ∈ S} W(e)`.
    pub fn total(&self, set: &EdgeSet) -> u64 {
        set.iter().map(|e| self.weights[e]).sum()
    }

    /// Weights with entry `id` dropped, aligned with `graph.without_edge(id)`.
    pub fn without(&self, id: EdgeId) -> Vec<u64> {
        self.weights.iter().enumerate().filter(|&(i, _)| i != id).map(|(_, &w)| w).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComponentKind {
    EvenCycle,
    EvenPath,
    /// Odd path whose end edges both lie in the first matching's complement,
    /// i.e. it augments the first matching.
    AugmentingFirst,
    AugmentingSecond,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub kind: ComponentKind,
    pub edges: Vec<EdgeId>,
}

/// Splits `H = M1 Δ M2` into connected components and labels each one.
pub fn classify_components(
    graph: &BipartiteGraph,
    h: &EdgeSet,
    m1: &Matching,
    m2: &Matching,
) -> Result<Vec<Component>> {
    if symmetric_difference(m1.edges(), m2.edges())? != *h {
        return Err(input_err!("H is not the symmetric difference of the two matchings"));
    }
    let n = graph.n();
    // vertex ids: left u -> u, right v -> n + v
    let mut incident: Vec<Vec<EdgeId>> = vec![Vec::new(); 2 * n];
    for e in h.iter() {
        let (u, v) = graph.edge(e);
        incident[u].push(e);
        incident[n + v].push(e);
    }
    let ends = |e: EdgeId| {
        let (u, v) = graph.edge(e);
        [u, n + v]
    };

    let mut seen = vec![false; graph.num_edges()];
    let mut out = Vec::new();
    for start in h.iter() {
        if seen[start] {
            continue;
        }
        let mut comp = Vec::new();
        let mut verts = BTreeSet::new();
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(e) = stack.pop() {
            comp.push(e);
            for x in ends(e) {
                verts.insert(x);
                for &f in &incident[x] {
                    if !seen[f] {
                        seen[f] = true;
                        stack.push(f);
                    }
                }
            }
        }
        comp.sort_unstable();
        for &x in &verts {
            let deg = incident[x].len();
            let in_m1 = incident[x].iter().filter(|&&e| m1.contains(e)).count();
            if deg > 2 || in_m1 > 1 || deg - in_m1 > 1 {
                return Err(Error::Internal(format!("component at vertex {x} is not alternating")));
            }
        }
        let in_m1 = comp.iter().filter(|&&e| m1.contains(e)).count();
        let in_m2 = comp.len() - in_m1;
        let is_cycle = verts.iter().all(|&x| incident[x].len() == 2);
        let kind = match (is_cycle, in_m1.cmp(&in_m2)) {
            (true, std::cmp::Ordering::Equal) => ComponentKind::EvenCycle,
            (false, std::cmp::Ordering::Equal) => ComponentKind::EvenPath,
            (false, std::cmp::Ordering::Less) if in_m2 == in_m1 + 1 => ComponentKind::AugmentingFirst,
            (false, std::cmp::Ordering::Greater) if in_m1 == in_m2 + 1 => ComponentKind::AugmentingSecond,
            _ => return Err(Error::Internal(format!("unclassifiable component {comp:?}"))),
        };
        out.push(Component { kind, edges: comp });
    }
    Ok(out)
}

/// `⌈log₂ x⌉`, with `ceil_log2(0) = ceil_log2(1) = 0`.
pub fn ceil_log2(x: usize) -> u32 {
    if x <= 1 {
        0
    } else {
        usize::BITS - (x - 1).leading_zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k22() -> BipartiteGraph {
        BipartiteGraph::complete(2).unwrap()
    }

    fn set(g: &BipartiteGraph, pairs: &[(usize, usize)]) -> EdgeSet {
        EdgeSet::from_pairs(g, pairs).unwrap()
    }

    #[test]
    fn canonical_order_and_rejections() {
        let g = BipartiteGraph::new(2, [(1, 0), (0, 1), (0, 0)]).unwrap();
        assert_eq!(g.edges(), &[(0, 0), (0, 1), (1, 0)]);
        assert!(matches!(BipartiteGraph::new(2, [(0, 0), (0, 0)]), Err(Error::Input(_))));
        assert!(matches!(BipartiteGraph::new(2, [(2, 0)]), Err(Error::Input(_))));
        assert!(matches!(BipartiteGraph::new(MAX_N + 1, []), Err(Error::TooLarge(_))));
        assert!(BipartiteGraph::new(0, []).is_err());
    }

    #[test]
    fn validate_matching_cases() {
        let g = k22();
        assert!(validate_matching(&g, &set(&g, &[(0, 0), (1, 1)])).unwrap());
        assert!(!validate_matching(&g, &set(&g, &[(0, 0), (0, 1)])).unwrap());
        assert!(validate_matching(&g, &EdgeSet::empty(&g)).unwrap());
        assert!(EdgeSet::from_ids(&g, [7]).is_err());
    }

    #[test]
    fn symmetric_difference_cases() {
        let g = k22();
        let m = set(&g, &[(0, 0), (1, 1)]);
        assert!(symmetric_difference(&m, &m).unwrap().is_empty());
        assert_eq!(
            symmetric_difference(&set(&g, &[(0, 0)]), &set(&g, &[(1, 1)])).unwrap(),
            set(&g, &[(0, 0), (1, 1)])
        );
        assert_eq!(
            symmetric_difference(&m, &set(&g, &[(0, 1), (1, 1)])).unwrap(),
            set(&g, &[(0, 0), (0, 1)])
        );
        let other = BipartiteGraph::complete(3).unwrap();
        assert!(symmetric_difference(&m, &EdgeSet::empty(&other)).is_err());
    }

    #[test]
    fn xor_identity_and_cancel() {
        let g = k22();
        let m = set(&g, &[(0, 1)]);
        assert_eq!(xor_apply(&m, &EdgeSet::empty(&g)).unwrap(), m);
        assert!(xor_apply(&m, &m).unwrap().is_empty());
    }

    #[test]
    fn xor_with_augmenting_path_grows_matching() {
        // path L0-R0-L1-R1 with M = {(1,0)}; augmenting path (0,0),(1,0),(1,1)
        let g = BipartiteGraph::new(2, [(0, 0), (1, 0), (1, 1)]).unwrap();
        let m = set(&g, &[(1, 0)]);
        let p = set(&g, &[(0, 0), (1, 0), (1, 1)]);
        let grown = xor_apply(&m, &p).unwrap();
        assert!(validate_matching(&g, &grown).unwrap());
        assert_eq!(grown.len(), 2);
    }

    #[test]
    fn classify_examples() {
        let g = k22();
        let empty = Matching::empty(&g);
        assert!(classify_components(&g, &EdgeSet::empty(&g), &empty, &empty).unwrap().is_empty());

        let m1 = Matching::from_pairs(&g, &[(0, 0)]).unwrap();
        let m2 = Matching::from_pairs(&g, &[(0, 1)]).unwrap();
        let h = symmetric_difference(m1.edges(), m2.edges()).unwrap();
        let comps = classify_components(&g, &h, &m1, &m2).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].kind, ComponentKind::EvenPath);

        let m2 = Matching::from_pairs(&g, &[(0, 0)]).unwrap();
        let h = symmetric_difference(empty.edges(), m2.edges()).unwrap();
        let comps = classify_components(&g, &h, &empty, &m2).unwrap();
        assert_eq!(comps[0].kind, ComponentKind::AugmentingFirst);

        let a = Matching::from_pairs(&g, &[(0, 0), (1, 1)]).unwrap();
        let b = Matching::from_pairs(&g, &[(0, 1), (1, 0)]).unwrap();
        let h = symmetric_difference(a.edges(), b.edges()).unwrap();
        assert_eq!(classify_components(&g, &h, &a, &b).unwrap()[0].kind, ComponentKind::EvenCycle);
        assert!(classify_components(&g, &EdgeSet::empty(&g), &a, &b).is_err());
    }

    #[test]
    fn text_format_roundtrip_and_errors() {
        let g = BipartiteGraph::parse("3 2\n0 1\n2 2\n").unwrap();
        assert_eq!(BipartiteGraph::parse(&g.to_text()).unwrap(), g);
        assert!(BipartiteGraph::parse("2 2\n0 0\n0 0\n").is_err());
        assert!(BipartiteGraph::parse("2 2\n0 0\n").is_err());
        assert!(BipartiteGraph::parse("2 1\n0 x\n").is_err());
    }

    #[test]
    fn ceil_log2_values() {
        let got: Vec<u32> = [1, 2, 3, 4, 5, 8, 9, 16].iter().map(|&x| ceil_log2(x)).collect();
        assert_eq!(got, vec![0, 1, 2, 2, 3, 3, 4, 4]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn sets() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
            (proptest::collection::vec(0usize..9, 0..9), proptest::collection::vec(0usize..9, 0..9))
        }

        proptest! {
            #[test]
            fn sym_diff_commutes_and_counts((a, b) in sets()) {
                let g = BipartiteGraph::complete(3).unwrap();
                let a = EdgeSet::from_ids(&g, a).unwrap();
                let b = EdgeSet::from_ids(&g, b).unwrap();
                let ab = symmetric_difference(&a, &b).unwrap();
                prop_assert_eq!(&ab, &symmetric_difference(&b, &a).unwrap());
                let common = a.iter().filter(|&e| b.contains(e)).count();
                prop_assert_eq!(ab.len(), a.len() + b.len() - 2 * common);
                prop_assert_eq!(xor_apply(&ab, &b).unwrap(), a);
            }
        }
    }
}
