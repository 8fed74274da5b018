//! Deterministic instance generators for tests, benches and the CLI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::driver::DriverConfig;
use crate::error::{input_err, Error, Result};
use crate::graph::BipartiteGraph;
use crate::tape::{init_tape, write_weight, CatalyticTape, TapeInit, TapeLayout};

/// Largest `n` for which every graph can be listed.
pub const EXHAUSTIVE_MAX_N: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    RandomGnp,
    Complete,
    Path,
    Star,
    /// Random graph with at least two edges under all-equal weights, so the
    /// very first check already finds a threshold edge.
    CraftedNonisolating,
    /// The graph whose edge bitmask is `seed mod 2^(n²)`.
    ExhaustiveSmall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    TapeRandom,
    AllEqual,
    DistinctPowers,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    pub n: usize,
    pub edge_prob: f64,
    pub weight_mode: WeightMode,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(family: Family, n: usize, weight_mode: WeightMode, seed: u64) -> Self {
        Self { family, n, edge_prob: 0.5, weight_mode, seed }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedInstance {
    pub graph: BipartiteGraph,
    pub config: DriverConfig,
    pub tape: CatalyticTape,
}

impl GeneratedInstance {
    pub fn layout(&self) -> TapeLayout {
        self.config.layout(&self.graph).expect("generated config is valid")
    }
}

/// Graph with edge `(u, v)` present iff bit `u·n + v` of `mask` is set.
pub fn graph_from_mask(n: usize, mask: u64) -> Result<BipartiteGraph> {
    let edges = (0..n * n).filter(|i| mask >> i & 1 == 1).map(|i| (i / n, i % n));
    BipartiteGraph::new(n, edges)
}

/// All `2^(n²)` bipartite graphs with `n` vertices per side.
pub fn exhaustive_graphs(n: usize) -> Result<Vec<BipartiteGraph>> {
    if n > EXHAUSTIVE_MAX_N {
        return Err(Error::TooLarge(format!("2^{} graphs for n = {n}", n * n)));
    }
    (0..1u64 << (n * n)).map(|mask| graph_from_mask(n, mask)).collect()
}

fn random_gnp(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Result<BipartiteGraph> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    BipartiteGraph::new(n, edges)
}

fn build_graph(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Result<BipartiteGraph> {
    let n = spec.n;
    match spec.family {
        Family::RandomGnp => random_gnp(rng, n, spec.edge_prob),
        Family::Complete => BipartiteGraph::complete(n),
        Family::Path => {
            let edges = (0..n).flat_map(|i| std::iter::once((i, i)).chain((i + 1 < n).then_some((i + 1, i))));
            BipartiteGraph::new(n, edges)
        }
        Family::Star => BipartiteGraph::new(n, (0..n).map(|v| (0, v))),
        Family::CraftedNonisolating => {
            if n < 2 {
                return Err(input_err!("crafted-nonisolating needs n ≥ 2"));
            }
            let g = random_gnp(rng, n, spec.edge_prob)?;
            if g.num_edges() >= 2 {
                return Ok(g);
            }
            let mut edges = g.edges().to_vec();
            for extra in [(0, 0), (0, 1)] {
                if edges.len() < 2 && !edges.contains(&extra) {
                    edges.push(extra);
                }
            }
            BipartiteGraph::new(n, edges)
        }
        Family::ExhaustiveSmall => {
            if n > EXHAUSTIVE_MAX_N {
                return Err(Error::TooLarge(format!("exhaustive-small supports n ≤ {EXHAUSTIVE_MAX_N}")));
            }
            graph_from_mask(n, spec.seed % (1u64 << (n * n)))
        }
    }
}

/// Builds a graph and a tape whose weight fields follow the weight mode; the
/// reserve region is always seeded random.
pub fn generate(spec: &GeneratorSpec) -> Result<GeneratedInstance> {
    if !(0.0..=1.0).contains(&spec.edge_prob) {
        return Err(input_err!("edge probability {} outside [0, 1]", spec.edge_prob));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let graph = build_graph(spec, &mut rng)?;
    let weight_mode = match spec.family {
        Family::CraftedNonisolating => WeightMode::AllEqual,
        _ => spec.weight_mode,
    };
    let mut config = DriverConfig::small(&graph);
    if weight_mode == WeightMode::DistinctPowers {
        let m = graph.num_edges() as u32;
        if m > 40 {
            return Err(Error::TooLarge(format!("distinct powers for {m} edges")));
        }
        config.weight_bits = config.weight_bits.max(m);
    }
    let layout = config.layout(&graph)?;
    let mut tape = init_tape(&layout, &TapeInit::Seed(rng.gen()))?;
    match weight_mode {
        WeightMode::TapeRandom => {}
        WeightMode::AllEqual => {
            let value = rng.gen_range(0..1u64 << layout.weight_bits);
            for e in 0..graph.num_edges() {
                write_weight(&mut tape, &layout, e, value)?;
            }
        }
        WeightMode::DistinctPowers => {
            for e in 0..graph.num_edges() {
                write_weight(&mut tape, &layout, e, 1 << e)?;
            }
        }
    }
    // the generated contents are the tape's initial state
    let tape = CatalyticTape::new(tape.bits().to_bitvec());
    Ok(GeneratedInstance { graph, config, tape })
}
