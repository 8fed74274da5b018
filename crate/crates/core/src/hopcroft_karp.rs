//! Direct maximum matching algorithms used when enough tape has been freed.

use std::collections::VecDeque;

use crate::error::Result;
use crate::graph::{BipartiteGraph, EdgeId, EdgeSet, Matching};

const NIL: usize = usize::MAX;

/// Maximum matching by Hopcroft–Karp phases of shortest augmenting paths.
pub fn hopcroft_karp(graph: &BipartiteGraph) -> Matching {
    let n = graph.n();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v) in graph.edges() {
        adj[u].push(v);
    }
    let mut match_l = vec![NIL; n];
    let mut match_r = vec![NIL; n];
    let mut dist = vec![0usize; n];

    loop {
        let mut queue = VecDeque::new();
        for u in 0..n {
            if match_l[u] == NIL {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = NIL;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                match match_r[v] {
                    NIL => found = true,
                    w if dist[w] == NIL => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            break;
        }
        for u in 0..n {
            if match_l[u] == NIL {
                augment(u, &adj, &mut match_l, &mut match_r, &mut dist);
            }
        }
    }

    let ids = (0..n).filter(|&u| match_l[u] != NIL).map(|u| graph.edge_id(u, match_l[u]).unwrap());
    Matching::new(graph, EdgeSet::from_ids(graph, ids).unwrap()).expect("augmentation keeps a matching")
}

fn augment(u: usize, adj: &[Vec<usize>], match_l: &mut [usize], match_r: &mut [usize], dist: &mut [usize]) -> bool {
    for &v in &adj[u] {
        let w = match_r[v];
        if w == NIL || (dist[w] == dist[u] + 1 && augment(w, adj, match_l, match_r, dist)) {
            match_l[u] = v;
            match_r[v] = u;
            return true;
        }
    }
    dist[u] = NIL;
    false
}

/// A maximum matching of minimum total weight, by successive shortest
/// augmenting paths (Bellman–Ford on the alternating-weight residual graph).
pub fn min_weight_maximum_matching(graph: &BipartiteGraph, weights: &[u64]) -> Result<Matching> {
    let n = graph.n();
    let mut matched: Vec<bool> = vec![false; graph.num_edges()];
    loop {
        let mut match_l = vec![NIL; n];
        let mut match_r = vec![NIL; n];
        for (e, &(u, v)) in graph.edges().iter().enumerate() {
            if matched[e] {
                match_l[u] = e;
                match_r[v] = e;
            }
        }
        // nodes: left u -> u, right v -> n + v
        let mut dist = vec![i128::MAX; 2 * n];
        let mut pred: Vec<Option<EdgeId>> = vec![None; 2 * n];
        for u in 0..n {
            if match_l[u] == NIL {
                dist[u] = 0;
            }
        }
        for _ in 0..2 * n {
            let mut changed = false;
            for (e, &(u, v)) in graph.edges().iter().enumerate() {
                let w = weights[e] as i128;
                let (from, to, cost) = if matched[e] { (n + v, u, -w) } else { (u, n + v, w) };
                if dist[from] != i128::MAX && dist[from] + cost < dist[to] {
                    dist[to] = dist[from] + cost;
                    pred[to] = Some(e);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let end = (0..n).filter(|&v| match_r[v] == NIL && dist[n + v] != i128::MAX).min_by_key(|&v| dist[n + v]);
        let Some(v) = end else { break };
        let mut node = n + v;
        loop {
            let e = pred[node].expect("reached nodes have a predecessor");
            matched[e] = !matched[e];
            let (u, rv) = graph.edge(e);
            node = if node == n + rv { u } else { n + rv };
            if node < n && match_l[node] == NIL {
                break;
            }
        }
    }
    let ids = matched.iter().enumerate().filter(|(_, &m)| m).map(|(e, _)| e);
    Matching::new(graph, EdgeSet::from_ids(graph, ids)?)
}
