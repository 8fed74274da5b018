//! Extraction of the unique minimum-weight matching of a given size.
//!
//! A size-`k` matching problem on `G` is turned into a perfect matching problem
//! on an extended graph `G'` that pads each side with `n − k` new vertices and
//! connects them by complete bipartite cliques to the original vertices of the
//! other side. Clique edges weigh the product of their endpoint indices, which
//! isolates their completion; original edges are scaled so the original weight
//! always dominates the clique contribution.
//!
//! Perfect matchings are then read off the Edmonds matrix `N[i][j] = 2^{W'(i,j)}`:
//! with `w*` the 2-adic valuation of `det N`, edge `(i, j)` is in the isolated
//! matching iff `|det N^{ij}| · 2^{W'(i,j)} / 2^{w*}` is odd.

use serde::{Deserialize, Serialize};

use crate::det::{PowerMatrix, ValuationOracle};
use crate::error::{input_err, Error, Result};
use crate::graph::{BipartiteGraph, EdgeId, EdgeSet, Matching};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Backend {
    /// Edmonds matrix determinant with the minor-parity membership test.
    #[default]
    Determinant,
    /// Enumeration of all size-`k` matchings.
    Combinatorial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ScaleMode {
    /// One more than the largest total clique weight a perfect matching can carry.
    #[default]
    Tight,
    /// `10 n^4`.
    Quartic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtEdge {
    /// Position in `L'` (0-based; originals first).
    pub left: usize,
    /// Position in `R'` (0-based; originals first).
    pub right: usize,
    pub weight: u64,
    /// The edge of `G` this came from, or `None` for clique edges.
    pub origin: Option<EdgeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtendedGraph {
    pub n: usize,
    pub k: usize,
    /// Vertices per side of `G'`, i.e. `2n − k`.
    pub side: usize,
    pub scale: u64,
    pub edges: Vec<ExtEdge>,
}

impl ExtendedGraph {
    /// 1-based global index of left position `p`.
    pub fn left_index(&self, p: usize) -> u64 {
        p as u64 + 1
    }

    /// 1-based global index of right position `p`.
    pub fn right_index(&self, p: usize) -> u64 {
        (self.side + p) as u64 + 1
    }

    pub fn edmonds_matrix(&self) -> PowerMatrix {
        let mut m = vec![vec![None; self.side]; self.side];
        for e in &self.edges {
            m[e.left][e.right] = Some(e.weight);
        }
        PowerMatrix::new(m)
    }

    /// Every perfect matching of `G'`, as edge positions into `self.edges`.
    /// Exponential; test and debugging use only.
    pub fn perfect_matchings(&self) -> Vec<Vec<usize>> {
        let mut by_left: Vec<Vec<usize>> = vec![Vec::new(); self.side];
        for (i, e) in self.edges.iter().enumerate() {
            by_left[e.left].push(i);
        }
        let mut out = Vec::new();
        let mut used = vec![false; self.side];
        let mut cur = Vec::new();
        fn rec(
            g: &ExtendedGraph,
            by_left: &[Vec<usize>],
            l: usize,
            used: &mut [bool],
            cur: &mut Vec<usize>,
            out: &mut Vec<Vec<usize>>,
        ) {
            if l == g.side {
                out.push(cur.clone());
                return;
            }
            for &i in &by_left[l] {
                let r = g.edges[i].right;
                if !used[r] {
                    used[r] = true;
                    cur.push(i);
                    rec(g, by_left, l + 1, used, cur, out);
                    cur.pop();
                    used[r] = false;
                }
            }
        }
        rec(self, &by_left, 0, &mut used, &mut cur, &mut out);
        out
    }
}

fn overflow() -> Error {
    Error::TooLarge("extended edge weight overflows 64 bits".into())
}

/// Builds `G'` and `W'` for size `k`.
pub fn extend_to_perfect(
    graph: &BipartiteGraph,
    k: usize,
    weights: &[u64],
    mode: ScaleMode,
) -> Result<ExtendedGraph> {
    let n = graph.n();
    if k > n {
        return Err(input_err!("k = {k} exceeds n = {n}"));
    }
    if weights.len() != graph.num_edges() {
        return Err(input_err!("expected {} weights, got {}", graph.num_edges(), weights.len()));
    }
    let pad = n - k;
    let side = 2 * n - k;
    let mut ext = ExtendedGraph { n, k, side, scale: 0, edges: Vec::new() };

    let mut clique = Vec::with_capacity(4 * n * pad);
    for u in 0..n {
        for j in 0..pad {
            clique.push((u, n + j));
        }
    }
    for i in 0..pad {
        for v in 0..n {
            clique.push((n + i, v));
        }
    }

    ext.scale = match mode {
        ScaleMode::Quartic => 10 * (n as u64).pow(4),
        ScaleMode::Tight => {
            // each new right vertex meets one original left vertex (index ≤ n),
            // each new left vertex meets one original right vertex (index ≤ 3n − k)
            let new_right: u64 = (0..pad).map(|j| n as u64 * ext.right_index(n + j)).sum();
            let max_right = ext.right_index(n - 1);
            let new_left: u64 = (0..pad).map(|i| ext.left_index(n + i) * max_right).sum();
            new_right + new_left + 1
        }
    };

    for (id, &(u, v)) in graph.edges().iter().enumerate() {
        let weight = weights[id].checked_mul(ext.scale).ok_or_else(overflow)?;
        ext.edges.push(ExtEdge { left: u, right: v, weight, origin: Some(id) });
    }
    for (l, r) in clique {
        let weight = ext.left_index(l) * ext.right_index(r);
        ext.edges.push(ExtEdge { left: l, right: r, weight, origin: None });
    }
    Ok(ext)
}

/// Reverse pairing `l_i ↔ r_{s+1−i}` of a clique with weights `u·v`.
pub fn clique_unique_matching(left: &[u64], right: &[u64]) -> Result<Vec<(u64, u64)>> {
    if left.len() != right.len() {
        return Err(input_err!("clique sides differ: {} vs {}", left.len(), right.len()));
    }
    if left.windows(2).any(|w| w[0] >= w[1]) || right.windows(2).any(|w| w[0] >= w[1]) {
        return Err(input_err!("index lists must be strictly increasing"));
    }
    Ok(left.iter().copied().zip(right.iter().rev().copied()).collect())
}

/// Extracts the isolated perfect matching of `G'` by the minor-parity test.
/// Returns positions into `ext.edges`.
pub fn extract_isolated_perfect(ext: &ExtendedGraph) -> Result<Vec<usize>> {
    let matrix = ext.edmonds_matrix();
    let oracle = ValuationOracle::new(&matrix);
    let Some(min_weight) = oracle.det_valuation() else {
        return Err(Error::PromiseViolation("det(N) = 0: no isolated perfect matching".into()));
    };
    let mut chosen = Vec::with_capacity(ext.side);
    for (i, e) in ext.edges.iter().enumerate() {
        // an edge heavier than the minimum matching cannot belong to it
        if e.weight > min_weight {
            continue;
        }
        let target = min_weight - e.weight;
        if oracle.minor_valuation_below(e.left, e.right, target + 1) == Some(target) {
            chosen.push(i);
        }
    }

    let mut left = vec![false; ext.side];
    let mut right = vec![false; ext.side];
    let mut total = 0u64;
    for &i in &chosen {
        let e = &ext.edges[i];
        if std::mem::replace(&mut left[e.left], true) || std::mem::replace(&mut right[e.right], true) {
            return Err(Error::PromiseViolation("membership test selected overlapping edges".into()));
        }
        total += e.weight;
    }
    if chosen.len() != ext.side || total != min_weight {
        return Err(Error::PromiseViolation(format!(
            "membership test produced {} edges of weight {total}, expected a perfect matching of weight {min_weight}",
            chosen.len()
        )));
    }
    if !unique_minimum(ext, &chosen) {
        return Err(Error::PromiseViolation("minimum-weight perfect matching of G' is not unique".into()));
    }
    Ok(chosen)
}

/// A perfect matching is the unique minimum iff every alternating cycle has
/// positive weight (matched edges counted negatively).
fn unique_minimum(ext: &ExtendedGraph, chosen: &[usize]) -> bool {
    let side = ext.side;
    let nodes = 2 * side;
    let mut dist = vec![vec![i128::MAX; nodes]; nodes];
    let mut matched = vec![false; ext.edges.len()];
    for &i in chosen {
        matched[i] = true;
    }
    for (i, e) in ext.edges.iter().enumerate() {
        let w = e.weight as i128;
        let (from, to, w) = if matched[i] { (side + e.right, e.left, -w) } else { (e.left, side + e.right, w) };
        dist[from][to] = dist[from][to].min(w);
    }
    positive_cycles(dist)
}

/// The unique minimum-weight size-`k` matching of `G` under `weights`.
pub fn extract_isolated_size_k(
    graph: &BipartiteGraph,
    k: usize,
    weights: &[u64],
    backend: Backend,
) -> Result<Matching> {
    if weights.len() != graph.num_edges() {
        return Err(input_err!("expected {} weights, got {}", graph.num_edges(), weights.len()));
    }
    if k == 0 {
        return Ok(Matching::empty(graph));
    }
    if k > graph.n() {
        return Err(Error::PromiseViolation(format!("no matching of size {k} with n = {}", graph.n())));
    }
    let ids = match backend {
        Backend::Determinant => {
            let ext = extend_to_perfect(graph, k, weights, ScaleMode::Tight)?;
            let chosen = extract_isolated_perfect(&ext)?;
            chosen.into_iter().filter_map(|i| ext.edges[i].origin).collect::<Vec<_>>()
        }
        Backend::Combinatorial => unique_min_size_k(graph, k, weights)?,
    };
    let set = EdgeSet::from_ids(graph, ids)?;
    let matching = Matching::new(graph, set).map_err(|_| Error::PromiseViolation("extracted set is not a matching".into()))?;
    if matching.len() != k {
        return Err(Error::PromiseViolation(format!(
            "extracted matching has size {}, expected {k}",
            matching.len()
        )));
    }
    if !unique_minimum_size_k(graph, &matching, weights) {
        return Err(Error::PromiseViolation(format!("weights do not isolate a size-{k} matching")));
    }
    Ok(matching)
}

/// Flow-residual certificate: a size-`k` matching is the unique minimum iff
/// every cycle is strictly positive, where `s` reaches unmatched left vertices,
/// matched left vertices return to `s`, and symmetrically on the right with `t`.
/// Cycles through `s` or `t` swap an endpoint and keep the size.
fn unique_minimum_size_k(graph: &BipartiteGraph, matching: &Matching, weights: &[u64]) -> bool {
    let n = graph.n();
    let (s, t) = (2 * n, 2 * n + 1);
    let nodes = 2 * n + 2;
    let mut dist = vec![vec![i128::MAX; nodes]; nodes];
    let (lcov, rcov) = matching.covered(graph);
    for u in 0..n {
        let (a, b) = if lcov[u] { (u, s) } else { (s, u) };
        dist[a][b] = 0;
    }
    for v in 0..n {
        let (a, b) = if rcov[v] { (t, n + v) } else { (n + v, t) };
        dist[a][b] = 0;
    }
    for (e, &(u, v)) in graph.edges().iter().enumerate() {
        let w = weights[e] as i128;
        let (a, b, w) = if matching.contains(e) { (n + v, u, -w) } else { (u, n + v, w) };
        dist[a][b] = dist[a][b].min(w);
    }
    positive_cycles(dist)
}

/// Floyd–Warshall over an adjacency matrix (`i128::MAX` = no arc); true iff
/// every closed walk has strictly positive weight.
fn positive_cycles(mut dist: Vec<Vec<i128>>) -> bool {
    let nodes = dist.len();
    for via in 0..nodes {
        for a in 0..nodes {
            let da = dist[a][via];
            if da == i128::MAX {
                continue;
            }
            for b in 0..nodes {
                let db = dist[via][b];
                if db != i128::MAX && da + db < dist[a][b] {
                    dist[a][b] = da + db;
                }
            }
        }
    }
    (0..nodes).all(|v| dist[v][v] > 0)
}

/// Depth-first enumeration over left vertices keeping the minimum and its multiplicity.
fn unique_min_size_k(graph: &BipartiteGraph, k: usize, weights: &[u64]) -> Result<Vec<EdgeId>> {
    let n = graph.n();
    let mut adj: Vec<Vec<(usize, EdgeId)>> = vec![Vec::new(); n];
    for (id, &(u, v)) in graph.edges().iter().enumerate() {
        adj[u].push((v, id));
    }
    struct Search<'a> {
        adj: &'a [Vec<(usize, EdgeId)>],
        weights: &'a [u64],
        k: usize,
        used: Vec<bool>,
        cur: Vec<EdgeId>,
        best: Option<(u64, Vec<EdgeId>)>,
        ties: usize,
    }
    impl Search<'_> {
        fn go(&mut self, u: usize, weight: u64) {
            if self.cur.len() == self.k {
                match &self.best {
                    Some((w, _)) if weight > *w => {}
                    Some((w, _)) if weight == *w => self.ties += 1,
                    _ => {
                        self.best = Some((weight, self.cur.clone()));
                        self.ties = 1;
                    }
                }
                return;
            }
            if self.adj.len() - u < self.k - self.cur.len() {
                return;
            }
            for &(v, id) in &self.adj[u] {
                if !self.used[v] {
                    self.used[v] = true;
                    self.cur.push(id);
                    self.go(u + 1, weight + self.weights[id]);
                    self.cur.pop();
                    self.used[v] = false;
                }
            }
            self.go(u + 1, weight);
        }
    }
    let mut s = Search { adj: &adj, weights, k, used: vec![false; n], cur: Vec::new(), best: None, ties: 0 };
    s.go(0, 0);
    match (s.best, s.ties) {
        (None, _) => Err(Error::PromiseViolation(format!("no matching of size {k} exists"))),
        (Some((_, m)), 1) => Ok(m),
        (Some((w, _)), t) => Err(Error::PromiseViolation(format!("{t} matchings of size {k} share minimum weight {w}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k22() -> BipartiteGraph {
        BipartiteGraph::complete(2).unwrap()
    }

    // canonical order (0,0),(0,1),(1,0),(1,1)
    const W_EX: [u64; 4] = [1, 2, 3, 5];

    #[test]
    fn extension_shapes() {
        let g = k22();
        let ext = extend_to_perfect(&g, 2, &W_EX, ScaleMode::Tight).unwrap();
        assert_eq!(ext.side, 2);
        assert_eq!(ext.scale, 1);
        assert_eq!(ext.edges.iter().map(|e| e.weight).collect::<Vec<_>>(), W_EX.to_vec());

        let ext = extend_to_perfect(&g, 1, &W_EX, ScaleMode::Tight).unwrap();
        assert_eq!(ext.side, 3);
        assert_eq!(ext.edges.len(), 4 + 4);
        // global indices: left 1,2 | new left 3 | right 4,5 | new right 6
        assert_eq!(ext.left_index(2), 3);
        assert_eq!(ext.right_index(0), 4);
        assert_eq!(ext.right_index(2), 6);
        let quartic = extend_to_perfect(&g, 1, &W_EX, ScaleMode::Quartic).unwrap();
        assert_eq!(quartic.scale, 160);
        assert!(extend_to_perfect(&g, 3, &W_EX, ScaleMode::Tight).is_err());
    }

    #[test]
    fn clique_examples() {
        assert_eq!(clique_unique_matching(&[1], &[2]).unwrap(), vec![(1, 2)]);
        assert_eq!(clique_unique_matching(&[1, 2], &[3, 4]).unwrap(), vec![(1, 4), (2, 3)]);
        assert!(clique_unique_matching(&[1, 2], &[3]).is_err());
        assert!(clique_unique_matching(&[2, 1], &[3, 4]).is_err());
    }

    #[test]
    fn perfect_extraction_examples() {
        let single = BipartiteGraph::new(1, [(0, 0)]).unwrap();
        let ext = extend_to_perfect(&single, 1, &[9], ScaleMode::Tight).unwrap();
        assert_eq!(extract_isolated_perfect(&ext).unwrap(), vec![0]);

        let g = k22();
        let ext = extend_to_perfect(&g, 2, &W_EX, ScaleMode::Tight).unwrap();
        let chosen = extract_isolated_perfect(&ext).unwrap();
        let pairs: Vec<_> = chosen.iter().map(|&i| g.edge(ext.edges[i].origin.unwrap())).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 0)]);

        let ext = extend_to_perfect(&g, 2, &[4, 4, 4, 4], ScaleMode::Tight).unwrap();
        assert!(extract_isolated_perfect(&ext).unwrap_err().is_promise_violation());
    }

    #[test]
    fn size_k_examples_both_backends() {
        let g = k22();
        for backend in [Backend::Determinant, Backend::Combinatorial] {
            assert!(extract_isolated_size_k(&g, 0, &W_EX, backend).unwrap().is_empty());
            let m1 = extract_isolated_size_k(&g, 1, &W_EX, backend).unwrap();
            assert_eq!(m1.pairs(&g), vec![(0, 0)]);
            let m2 = extract_isolated_size_k(&g, 2, &W_EX, backend).unwrap();
            assert_eq!(m2.pairs(&g), vec![(0, 1), (1, 0)]);
            assert!(extract_isolated_size_k(&g, 1, &[0, 0, 0, 0], backend).unwrap_err().is_promise_violation());
            let star = BipartiteGraph::new(2, [(0, 0), (0, 1)]).unwrap();
            assert!(extract_isolated_size_k(&star, 2, &[1, 2], backend).unwrap_err().is_promise_violation());
        }
    }
}
