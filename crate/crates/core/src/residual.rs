//! Residual graphs of matchings, minimum-weight paths, threshold edges and the
//! weight-recovery formula.
//!
//! The residual graph of a matching `M` has a source `s`, a sink `t`, and
//!
//! * `s → u` for every unmatched left vertex, `v → t` for every unmatched right vertex (weight 0),
//! * `v → u` for every `(u, v) ∈ M` (weight `−W(u, v)`),
//! * `u → v` for every `(u, v) ∈ E ∖ M` (weight `W(u, v)`).
//!
//! `s`-`t` paths correspond one-to-one to augmenting paths, with equal weights.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};
use crate::graph::{BipartiteGraph, EdgeId, Matching};
use crate::isolation::{extract_isolated_size_k, Backend};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Node {
    Source,
    Sink,
    Left(usize),
    Right(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArcOrigin {
    Source,
    Sink,
    /// Reversed arc of a matched edge.
    Matched(EdgeId),
    Unmatched(EdgeId),
}

impl ArcOrigin {
    pub fn edge(&self) -> Option<EdgeId> {
        match *self {
            ArcOrigin::Matched(e) | ArcOrigin::Unmatched(e) => Some(e),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arc {
    pub from: Node,
    pub to: Node,
    pub weight: i64,
    pub origin: ArcOrigin,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualGraph {
    n: usize,
    arcs: Vec<Arc>,
    /// Arc index carrying edge `e`, per edge id.
    edge_arc: Vec<usize>,
}

impl ResidualGraph {
    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn num_nodes(&self) -> usize {
        2 * self.n + 2
    }

    pub fn node_index(&self, v: Node) -> usize {
        match v {
            Node::Source => 0,
            Node::Sink => 1,
            Node::Left(u) => 2 + u,
            Node::Right(r) => 2 + self.n + r,
        }
    }

    pub fn arc_for_edge(&self, e: EdgeId) -> &Arc {
        &self.arcs[self.edge_arc[e]]
    }

    /// One line per arc: `from to weight origin`.
    pub fn dump(&self) -> String {
        let name = |v: Node| match v {
            Node::Source => "s".to_string(),
            Node::Sink => "t".to_string(),
            Node::Left(u) => format!("L{u}"),
            Node::Right(r) => format!("R{r}"),
        };
        let mut out = String::new();
        for a in &self.arcs {
            let origin = match a.origin {
                ArcOrigin::Source => "source".to_string(),
                ArcOrigin::Sink => "sink".to_string(),
                ArcOrigin::Matched(e) => format!("matched:{e}"),
                ArcOrigin::Unmatched(e) => format!("unmatched:{e}"),
            };
            let _ = writeln!(out, "{} {} {} {}", name(a.from), name(a.to), a.weight, origin);
        }
        out
    }
}

fn signed(w: u64) -> Result<i64> {
    i64::try_from(w).map_err(|_| Error::TooLarge(format!("weight {w} exceeds i64")))
}

pub fn build_residual(graph: &BipartiteGraph, matching: &Matching, weights: &[u64]) -> Result<ResidualGraph> {
    if weights.len() != graph.num_edges() {
        return Err(input_err!("expected {} weights, got {}", graph.num_edges(), weights.len()));
    }
    if matching.edges().universe() != graph.num_edges() {
        return Err(input_err!("matching does not belong to this graph"));
    }
    let n = graph.n();
    let (lcov, rcov) = matching.covered(graph);
    let mut arcs = Vec::new();
    for u in (0..n).filter(|&u| !lcov[u]) {
        arcs.push(Arc { from: Node::Source, to: Node::Left(u), weight: 0, origin: ArcOrigin::Source });
    }
    for v in (0..n).filter(|&v| !rcov[v]) {
        arcs.push(Arc { from: Node::Right(v), to: Node::Sink, weight: 0, origin: ArcOrigin::Sink });
    }
    let mut edge_arc = Vec::with_capacity(graph.num_edges());
    for (e, &(u, v)) in graph.edges().iter().enumerate() {
        edge_arc.push(arcs.len());
        let w = signed(weights[e])?;
        arcs.push(if matching.contains(e) {
            Arc { from: Node::Right(v), to: Node::Left(u), weight: -w, origin: ArcOrigin::Matched(e) }
        } else {
            Arc { from: Node::Left(u), to: Node::Right(v), weight: w, origin: ArcOrigin::Unmatched(e) }
        });
    }
    Ok(ResidualGraph { n, arcs, edge_arc })
}

/// Minimum weight over `a`-`b` walks of at most `|arcs|` arcs, ignoring the
/// arc at index `skip`. Equals the minimum simple-path weight when the graph
/// has no non-positive cycles.
pub fn min_weight_path_excluding(r: &ResidualGraph, a: Node, b: Node, skip: Option<usize>) -> Option<i64> {
    let mut dist: Vec<Option<i64>> = vec![None; r.num_nodes()];
    dist[r.node_index(a)] = Some(0);
    for _ in 0..r.arcs.len() {
        let mut changed = false;
        for (i, arc) in r.arcs.iter().enumerate() {
            if Some(i) == skip {
                continue;
            }
            let Some(d) = dist[r.node_index(arc.from)] else { continue };
            let to = r.node_index(arc.to);
            let cand = d + arc.weight;
            if dist[to].is_none_or(|cur| cand < cur) {
                dist[to] = Some(cand);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    dist[r.node_index(b)]
}

pub fn min_weight_path(r: &ResidualGraph, a: Node, b: Node) -> Option<i64> {
    min_weight_path_excluding(r, a, b, None)
}

/// As [`min_weight_path`], but first checks that every cycle is strictly positive.
pub fn min_weight_path_checked(r: &ResidualGraph, a: Node, b: Node) -> Result<Option<i64>> {
    if let Some(w) = min_cycle_weight(r) {
        if w <= 0 {
            return Err(Error::Precondition(format!("residual graph has a cycle of weight {w}")));
        }
    }
    Ok(min_weight_path(r, a, b))
}

/// Minimum weight of a closed walk (Floyd–Warshall on the diagonal), or `None`
/// if the graph is acyclic. A value `≤ 0` means a non-positive cycle exists.
pub fn min_cycle_weight(r: &ResidualGraph) -> Option<i64> {
    let n = r.num_nodes();
    let mut d: Vec<Vec<Option<i64>>> = vec![vec![None; n]; n];
    for a in &r.arcs {
        let (i, j) = (r.node_index(a.from), r.node_index(a.to));
        if d[i][j].is_none_or(|x| a.weight < x) {
            d[i][j] = Some(a.weight);
        }
    }
    for m in 0..n {
        for i in 0..n {
            let Some(im) = d[i][m] else { continue };
            for j in 0..n {
                if let Some(mj) = d[m][j] {
                    let c = im + mj;
                    if d[i][j].is_none_or(|x| c < x) {
                        d[i][j] = Some(c);
                    }
                }
            }
        }
    }
    (0..n).filter_map(|i| d[i][i]).min()
}

/// Berge: the matching is maximum iff `t` is unreachable from `s`.
pub fn is_maximum(graph: &BipartiteGraph, matching: &Matching, weights: &[u64]) -> Result<bool> {
    let r = build_residual(graph, matching, weights)?;
    let mut seen = vec![false; r.num_nodes()];
    let mut stack = vec![r.node_index(Node::Source)];
    seen[stack[0]] = true;
    while let Some(x) = stack.pop() {
        for a in r.arcs.iter().filter(|a| r.node_index(a.from) == x) {
            let y = r.node_index(a.to);
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    Ok(!seen[r.node_index(Node::Sink)])
}

/// First edge of `E ∖ M`, in canonical order, lying on some but not every
/// minimum-weight `s`-`t` path of the residual graph.
pub fn find_threshold_edge(graph: &BipartiteGraph, matching: &Matching, weights: &[u64]) -> Result<Option<EdgeId>> {
    let r = build_residual(graph, matching, weights)?;
    Ok(threshold_in(&r))
}

fn threshold_in(r: &ResidualGraph) -> Option<EdgeId> {
    let best = min_weight_path(r, Node::Source, Node::Sink)?;
    for (i, arc) in r.arcs.iter().enumerate() {
        let ArcOrigin::Unmatched(e) = arc.origin else { continue };
        let (Some(su), Some(vt)) = (min_weight_path(r, Node::Source, arc.from), min_weight_path(r, arc.to, Node::Sink))
        else {
            continue;
        };
        if su + arc.weight + vt != best {
            continue;
        }
        if min_weight_path_excluding(r, Node::Source, Node::Sink, Some(i)) == Some(best) {
            return Some(e);
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IsolationOutcome {
    /// No matching of size `k + 1` exists.
    Bot,
    /// The weights isolate a matching of size `k + 1`.
    Isolated,
    /// Isolation fails at `k + 1`; the edge is outside the size-`k` matching.
    Threshold(EdgeId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub outcome: IsolationOutcome,
    /// The isolated size-`k` matching the check was based on.
    pub matching: Matching,
}

/// Decides, given that `weights` isolate a size-`k` matching, what happens at `k + 1`.
pub fn check_k_plus_1(graph: &BipartiteGraph, k: usize, weights: &[u64], backend: Backend) -> Result<CheckResult> {
    let matching = extract_isolated_size_k(graph, k, weights, backend)?;
    let r = build_residual(graph, &matching, weights)?;
    let outcome = if min_weight_path(&r, Node::Source, Node::Sink).is_none() {
        IsolationOutcome::Bot
    } else {
        match threshold_in(&r) {
            Some(e) => IsolationOutcome::Threshold(e),
            None => IsolationOutcome::Isolated,
        }
    };
    Ok(CheckResult { outcome, matching })
}

/// Recovers `W(e)` for a threshold edge `e ∉ M^k` from the remaining weights.
///
/// `weights_without_e` is aligned with `graph.without_edge(e)`.
pub fn recover_weight(
    graph: &BipartiteGraph,
    k: usize,
    weights_without_e: &[u64],
    e: EdgeId,
    backend: Backend,
) -> Result<i64> {
    graph.check_edge(e)?;
    if weights_without_e.len() + 1 != graph.num_edges() {
        return Err(input_err!("expected {} weights, got {}", graph.num_edges() - 1, weights_without_e.len()));
    }
    let sub = graph.without_edge(e)?;
    let sub_matching = extract_isolated_size_k(&sub, k, weights_without_e, backend)?;
    let lift = |i: EdgeId| if i >= e { i + 1 } else { i };
    let matching = Matching::new(graph, crate::graph::EdgeSet::from_ids(graph, sub_matching.iter().map(lift))?)?;

    let mut weights = Vec::with_capacity(graph.num_edges());
    weights.extend_from_slice(&weights_without_e[..e]);
    weights.push(0);
    weights.extend_from_slice(&weights_without_e[e..]);
    let r = build_residual(graph, &matching, &weights)?;
    let idx = r.edge_arc[e];
    let arc = &r.arcs[idx];
    let missing = |what: &str| Error::Internal(format!("{what} is unreachable while recovering edge {e}"));
    let st = min_weight_path_excluding(&r, Node::Source, Node::Sink, Some(idx)).ok_or_else(|| missing("t"))?;
    let su = min_weight_path_excluding(&r, Node::Source, arc.from, Some(idx)).ok_or_else(|| missing("u"))?;
    let vt = min_weight_path_excluding(&r, arc.to, Node::Sink, Some(idx)).ok_or_else(|| missing("t from v"))?;
    Ok(st - (su + vt))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k22() -> BipartiteGraph {
        BipartiteGraph::complete(2).unwrap()
    }

    #[test]
    fn residual_single_edge() {
        let g = BipartiteGraph::new(1, [(0, 0)]).unwrap();
        let r = build_residual(&g, &Matching::empty(&g), &[7]).unwrap();
        let got: Vec<_> = r.arcs().iter().map(|a| (a.from, a.to, a.weight)).collect();
        assert_eq!(
            got,
            vec![
                (Node::Source, Node::Left(0), 0),
                (Node::Right(0), Node::Sink, 0),
                (Node::Left(0), Node::Right(0), 7),
            ]
        );
        assert_eq!(min_weight_path(&r, Node::Source, Node::Sink), Some(7));

        let m = Matching::from_pairs(&g, &[(0, 0)]).unwrap();
        let r = build_residual(&g, &m, &[7]).unwrap();
        assert_eq!(r.arcs().len(), 1);
        assert_eq!((r.arcs()[0].from, r.arcs()[0].to, r.arcs()[0].weight), (Node::Right(0), Node::Left(0), -7));
    }

    #[test]
    fn residual_k22_partial() {
        let g = k22();
        let m = Matching::from_pairs(&g, &[(0, 0)]).unwrap();
        let r = build_residual(&g, &m, &[3, 1, 1, 1]).unwrap();
        assert_eq!(r.arc_for_edge(0).weight, -3);
        assert_eq!((r.arc_for_edge(0).from, r.arc_for_edge(0).to), (Node::Right(0), Node::Left(0)));
        assert!(r.arcs().iter().any(|a| a.from == Node::Source && a.to == Node::Left(1)));
        assert!(r.arcs().iter().any(|a| a.from == Node::Right(1) && a.to == Node::Sink));
        assert_eq!(r.arcs().len(), 6);
        assert!(r.dump().contains("R0 L0 -3 matched:0"));
    }

    #[test]
    fn path_queries() {
        let empty = BipartiteGraph::empty(2).unwrap();
        let r = build_residual(&empty, &Matching::empty(&empty), &[]).unwrap();
        assert_eq!(min_weight_path(&r, Node::Source, Node::Sink), None);

        let g = k22();
        let r = build_residual(&g, &Matching::empty(&g), &[1, 1, 1, 1]).unwrap();
        assert_eq!(min_weight_path_checked(&r, Node::Source, Node::Sink).unwrap(), Some(1));

        // a zero cycle: K22 with the perfect matching {(0,0),(1,1)} and equal weights
        let m = Matching::from_pairs(&g, &[(0, 0), (1, 1)]).unwrap();
        let r = build_residual(&g, &m, &[1, 1, 1, 1]).unwrap();
        assert_eq!(min_cycle_weight(&r), Some(0));
        assert!(matches!(min_weight_path_checked(&r, Node::Source, Node::Sink), Err(Error::Precondition(_))));
    }

    #[test]
    fn maximality() {
        let g = k22();
        let w = [1, 1, 1, 1];
        assert!(is_maximum(&g, &Matching::from_pairs(&g, &[(0, 0), (1, 1)]).unwrap(), &w).unwrap());
        assert!(!is_maximum(&g, &Matching::empty(&g), &w).unwrap());
        let path = BipartiteGraph::new(2, [(0, 0), (1, 0), (1, 1)]).unwrap();
        let m = Matching::from_pairs(&path, &[(1, 0)]).unwrap();
        assert!(!is_maximum(&path, &m, &[1, 1, 1]).unwrap());
    }

    #[test]
    fn threshold_examples() {
        let g = k22();
        assert_eq!(find_threshold_edge(&g, &Matching::empty(&g), &[1, 1, 1, 1]).unwrap(), Some(0));
        // unique minimum edge, tied runners-up
        assert_eq!(find_threshold_edge(&g, &Matching::empty(&g), &[1, 2, 2, 5]).unwrap(), None);
    }

    #[test]
    fn check_examples() {
        let g = k22();
        for backend in [Backend::Determinant, Backend::Combinatorial] {
            let w = [1, 2, 3, 5];
            assert_eq!(check_k_plus_1(&g, 2, &w, backend).unwrap().outcome, IsolationOutcome::Bot);
            assert_eq!(check_k_plus_1(&g, 1, &w, backend).unwrap().outcome, IsolationOutcome::Isolated);
            let eq = [4, 4, 4, 4];
            assert_eq!(check_k_plus_1(&g, 0, &eq, backend).unwrap().outcome, IsolationOutcome::Threshold(0));
        }
    }

    #[test]
    fn recover_examples() {
        let g = k22();
        assert_eq!(recover_weight(&g, 0, &[1, 1, 1], 0, Backend::Determinant).unwrap(), 1);
        // weight-0 threshold edge: (0,0) and (1,1) both weigh 0
        let w = [0u64, 3, 3, 0];
        let check = check_k_plus_1(&g, 0, &w, Backend::Combinatorial).unwrap();
        assert_eq!(check.outcome, IsolationOutcome::Threshold(0));
        assert_eq!(recover_weight(&g, 0, &[3, 3, 0], 0, Backend::Combinatorial).unwrap(), 0);
    }
}
