//! Brute-force ground truth.
//!
//! Everything here is computed by enumerating edge subsets directly. This
//! module depends only on the graph data model, never on the algorithms it is
//! used to check.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, EdgeId};

/// Largest `n` the enumeration accepts.
pub const ORACLE_MAX_N: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SizeReport {
    pub k: usize,
    pub count: usize,
    pub min_weight: Option<u64>,
    /// Every size-`k` matching of minimum weight, as sorted edge ids.
    pub minimizers: Vec<Vec<EdgeId>>,
    pub isolated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub max_size: usize,
    pub by_size: Vec<SizeReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matchings: Option<Vec<Vec<EdgeId>>>,
}

impl OracleReport {
    pub fn size(&self, k: usize) -> Option<&SizeReport> {
        self.by_size.get(k)
    }
}

/// Every matching of `graph` (including the empty one), by include/exclude
/// recursion over the edge list.
pub fn all_matchings(graph: &BipartiteGraph) -> Result<Vec<Vec<EdgeId>>> {
    if graph.n() > ORACLE_MAX_N {
        return Err(Error::TooLarge(format!("oracle enumeration refuses n = {} > {ORACLE_MAX_N}", graph.n())));
    }
    fn rec(edges: &[(usize, usize)], i: usize, lmask: u32, rmask: u32, cur: &mut Vec<EdgeId>, out: &mut Vec<Vec<EdgeId>>) {
        if i == edges.len() {
            out.push(cur.clone());
            return;
        }
        rec(edges, i + 1, lmask, rmask, cur, out);
        let (u, v) = edges[i];
        if lmask & (1 << u) == 0 && rmask & (1 << v) == 0 {
            cur.push(i);
            rec(edges, i + 1, lmask | 1 << u, rmask | 1 << v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(graph.edges(), 0, 0, 0, &mut Vec::new(), &mut out);
    Ok(out)
}

/// Enumerates all matchings and summarizes them per size. Without weights,
/// every edge weighs zero. `only_k` restricts the summary to one size.
pub fn brute_force_matchings(
    graph: &BipartiteGraph,
    weights: Option<&[u64]>,
    only_k: Option<usize>,
    keep_all: bool,
) -> Result<OracleReport> {
    let all = all_matchings(graph)?;
    let weight_of = |m: &[EdgeId]| -> u64 { weights.map_or(0, |w| m.iter().map(|&e| w[e]).sum()) };
    let max_size = all.iter().map(Vec::len).max().unwrap_or(0);
    let mut by_size = Vec::new();
    for k in 0..=graph.n() {
        if only_k.is_some_and(|x| x != k) {
            by_size.push(SizeReport { k, count: 0, min_weight: None, minimizers: vec![], isolated: false });
            continue;
        }
        let of_size: Vec<&Vec<EdgeId>> = all.iter().filter(|m| m.len() == k).collect();
        let min_weight = of_size.iter().map(|m| weight_of(m)).min();
        let minimizers: Vec<Vec<EdgeId>> =
            of_size.iter().filter(|m| Some(weight_of(m)) == min_weight).map(|m| (*m).clone()).collect();
        by_size.push(SizeReport { k, count: of_size.len(), min_weight, isolated: minimizers.len() == 1, minimizers });
    }
    Ok(OracleReport { max_size, by_size, matchings: keep_all.then_some(all) })
}

/// True iff exactly one size-`k` matching attains the minimum weight.
pub fn oracle_is_isolating(graph: &BipartiteGraph, k: usize, weights: &[u64]) -> Result<bool> {
    if k > graph.n() {
        return Ok(false);
    }
    let r = brute_force_matchings(graph, Some(weights), Some(k), false)?;
    Ok(r.by_size[k].isolated)
}

/// The unique minimizer at size `k`, if there is exactly one.
pub fn oracle_unique_minimizer(graph: &BipartiteGraph, k: usize, weights: &[u64]) -> Result<Option<Vec<EdgeId>>> {
    if k > graph.n() {
        return Ok(None);
    }
    let r = brute_force_matchings(graph, Some(weights), Some(k), false)?;
    let s = &r.by_size[k];
    Ok(s.isolated.then(|| s.minimizers[0].clone()))
}

pub fn oracle_max_matching_size(graph: &BipartiteGraph) -> Result<usize> {
    Ok(all_matchings(graph)?.iter().map(Vec::len).max().unwrap_or(0))
}

/// `(maximum size, minimum weight among maximum matchings)`.
pub fn oracle_min_weight_max_matching(graph: &BipartiteGraph, weights: &[u64]) -> Result<(usize, u64)> {
    let all = all_matchings(graph)?;
    let max = all.iter().map(Vec::len).max().unwrap_or(0);
    let best = all
        .iter()
        .filter(|m| m.len() == max)
        .map(|m| m.iter().map(|&e| weights[e]).sum::<u64>())
        .min()
        .unwrap_or(0);
    Ok((max, best))
}

/// Verdict per size `0..=n`: whether `weights` isolate a size-`k` matching.
pub fn isolation_table(graph: &BipartiteGraph, weights: &[u64]) -> Result<Vec<bool>> {
    let r = brute_force_matchings(graph, Some(weights), None, false)?;
    Ok(r.by_size.iter().map(|s| s.isolated).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        let k22 = BipartiteGraph::complete(2).unwrap();
        let r = brute_force_matchings(&k22, None, None, true).unwrap();
        assert_eq!(r.max_size, 2);
        assert_eq!(r.by_size[2].count, 2);
        assert_eq!(r.by_size[1].count, 4);
        assert_eq!(r.matchings.unwrap().len(), 7);

        let empty = BipartiteGraph::empty(3).unwrap();
        assert_eq!(brute_force_matchings(&empty, None, None, false).unwrap().max_size, 0);

        let k33 = BipartiteGraph::complete(3).unwrap();
        assert_eq!(brute_force_matchings(&k33, None, None, false).unwrap().by_size[3].count, 6);
        assert!(all_matchings(&BipartiteGraph::empty(9).unwrap()).is_err());
    }

    #[test]
    fn isolation_examples() {
        let g = BipartiteGraph::complete(2).unwrap();
        assert!(oracle_is_isolating(&g, 2, &[1, 2, 3, 5]).unwrap());
        assert!(!oracle_is_isolating(&g, 1, &[4, 4, 4, 4]).unwrap());
        let star = BipartiteGraph::new(2, [(0, 0), (0, 1)]).unwrap();
        assert!(!oracle_is_isolating(&star, 2, &[1, 2]).unwrap());
        assert!(oracle_is_isolating(&star, 0, &[1, 1]).unwrap());
        assert_eq!(oracle_unique_minimizer(&g, 2, &[1, 2, 3, 5]).unwrap(), Some(vec![1, 2]));
    }
}
