//! Minimum-weight maximum matching with user-supplied edge weights.
//!
//! Input weights are scaled by `K = |E|·(2^b − 1) + 1` and the tape weights
//! are added underneath. Any two matchings that differ in input weight differ
//! by at least `K` in combined weight, more than the tape part can make up, so
//! the matching the loop isolates is also input-minimal.

use serde::Serialize;

use crate::driver::{run_view, DriverConfig, RunReport, WeightView};
use crate::error::{input_err, Error, Result};
use crate::graph::BipartiteGraph;
use crate::isolation::Backend;
use crate::tape::CatalyticTape;

/// Largest combined weight accepted, keeping extension scales well inside `u64`.
const MAX_COMBINED: u64 = 1 << 40;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CombinedWeights {
    pub input: Vec<u64>,
    pub catalytic: Vec<u64>,
    pub scale: u64,
}

impl CombinedWeights {
    /// Smallest scale that dominates any sum of `num_edges` tape weights of `weight_bits` bits.
    pub fn scale_for(num_edges: usize, weight_bits: u32) -> u64 {
        num_edges as u64 * ((1u64 << weight_bits) - 1) + 1
    }

    pub fn new(input: Vec<u64>, catalytic: Vec<u64>, weight_bits: u32) -> Result<Self> {
        if input.len() != catalytic.len() {
            return Err(input_err!("{} input weights for {} edges", input.len(), catalytic.len()));
        }
        if let Some(&c) = catalytic.iter().find(|&&c| c >> weight_bits != 0) {
            return Err(input_err!("tape weight {c} exceeds {weight_bits} bits"));
        }
        let scale = Self::scale_for(input.len(), weight_bits);
        check_range(&input, scale)?;
        Ok(Self { input, catalytic, scale })
    }

    pub fn combined(&self) -> Vec<u64> {
        self.input.iter().zip(&self.catalytic).map(|(&w, &c)| w * self.scale + c).collect()
    }

    /// Tape part of a combined weight on edge `e`.
    pub fn catalytic_part(&self, e: usize, combined: u64) -> Option<u64> {
        combined.checked_sub(self.input[e] * self.scale)
    }
}

fn check_range(input: &[u64], scale: u64) -> Result<()> {
    let max = input.iter().copied().max().unwrap_or(0);
    match max.checked_mul(scale).and_then(|x| x.checked_add(scale)) {
        Some(x) if x <= MAX_COMBINED => Ok(()),
        _ => Err(Error::TooLarge(format!("input weight {max} times scale {scale} is too large"))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtensionReport {
    #[serde(flatten)]
    pub run: RunReport,
    pub input_weight: u64,
    pub scale: u64,
}

/// Maximum matching of minimum total `input` weight, computed by the
/// catalytic loop over combined weights. The tape is restored on return.
///
/// Runs on the combinatorial backend regardless of `config.backend`: the
/// scaled weights are far too large for `2^w` determinant entries.
pub fn min_weight_max_matching(
    graph: &BipartiteGraph,
    input: &[u64],
    tape: &mut CatalyticTape,
    config: &DriverConfig,
) -> Result<ExtensionReport> {
    if input.len() != graph.num_edges() {
        return Err(input_err!("{} input weights for {} edges", input.len(), graph.num_edges()));
    }
    let scale = CombinedWeights::scale_for(graph.num_edges(), config.weight_bits);
    check_range(input, scale)?;
    let config = config.clone().with_backend(Backend::Combinatorial);
    let run = run_view(graph, tape, &config, WeightView { input: Some((input, scale)) })?;
    let input_weight = run.result.weight(input);
    Ok(ExtensionReport { run, input_weight, scale })
}
