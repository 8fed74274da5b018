//! A length-decreasing compressor for weight strings of a fixed graph, its
//! decompressor, and an extractor that turns any string the pair fails to
//! round-trip into a maximum matching.
//!
//! An input string holds one weight per edge, each `⌈log₂(n+1)⌉ + 2⌈log₂ n⌉ + 1`
//! bits wide. If the weights isolate matchings up to some size `k*` but not at
//! `k* + 1`, the weight of a threshold edge `e*` is redundant: it is dropped and
//! a `(k*, e*)` record one bit shorter is appended. Otherwise the weights
//! isolate a maximum matching, and the compressor gives up (all zeros).

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};
use crate::graph::{BipartiteGraph, EdgeId, Matching};
use crate::isolation::{extract_isolated_size_k, Backend};
use crate::residual::{check_k_plus_1, is_maximum, recover_weight, IsolationOutcome};
use crate::tape::{push_uint, read_uint, seeded_bits, Bits, PackedRecord, RecordWidths};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LossyInstance {
    graph: BipartiteGraph,
    record: RecordWidths,
    backend: Backend,
}

impl LossyInstance {
    pub fn new(graph: BipartiteGraph) -> Result<Self> {
        if graph.num_edges() == 0 {
            return Err(input_err!("lossy coding needs at least one edge"));
        }
        let record = RecordWidths::for_n(graph.n());
        Ok(Self { graph, record, backend: Backend::Combinatorial })
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn graph(&self) -> &BipartiteGraph {
        &self.graph
    }

    pub fn field_bits(&self) -> u32 {
        self.record.total() + 1
    }

    pub fn record_bits(&self) -> u32 {
        self.record.total()
    }

    /// `f(n) = |E| · field_bits`.
    pub fn input_len(&self) -> usize {
        self.graph.num_edges() * self.field_bits() as usize
    }

    pub fn output_len(&self) -> usize {
        self.input_len() - 1
    }

    pub fn decode_weights(&self, x: &Bits) -> Result<Vec<u64>> {
        if x.len() != self.input_len() {
            return Err(input_err!("expected {} bits, got {}", self.input_len(), x.len()));
        }
        let f = self.field_bits() as usize;
        Ok(x.chunks(f).map(read_uint).collect())
    }

    pub fn encode_weights(&self, weights: &[u64]) -> Result<Bits> {
        if weights.len() != self.graph.num_edges() {
            return Err(input_err!("expected {} weights, got {}", self.graph.num_edges(), weights.len()));
        }
        let mut out = Bits::with_capacity(self.input_len());
        for &w in weights {
            push_uint(&mut out, w, self.field_bits())?;
        }
        Ok(out)
    }

    fn default_output(&self) -> Bits {
        Bits::repeat(false, self.input_len())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompOutcome {
    Compressed { k: usize, edge: EdgeId, output: Bits },
    NotCompressible,
}

/// Compresses, reporting which case applied.
pub fn lossy_comp_outcome(inst: &LossyInstance, x: &Bits) -> Result<CompOutcome> {
    let weights = inst.decode_weights(x)?;
    let graph = &inst.graph;
    for k in 0..=graph.n() {
        let check = match check_k_plus_1(graph, k, &weights, inst.backend) {
            Ok(c) => c,
            Err(Error::PromiseViolation(_)) => continue,
            Err(e) => return Err(e),
        };
        match check.outcome {
            IsolationOutcome::Bot => break,
            IsolationOutcome::Isolated => {}
            IsolationOutcome::Threshold(e) => {
                let f = inst.field_bits() as usize;
                let mut output = Bits::with_capacity(inst.output_len());
                for (i, field) in x.chunks(f).enumerate() {
                    if i != e {
                        output.extend_from_bitslice(field);
                    }
                }
                let (u, v) = graph.edge(e);
                output.extend_from_bitslice(&PackedRecord { k, u, v }.encode(inst.record)?);
                debug_assert_eq!(output.len(), inst.output_len());
                return Ok(CompOutcome::Compressed { k, edge: e, output });
            }
        }
    }
    Ok(CompOutcome::NotCompressible)
}

pub fn lossy_comp(inst: &LossyInstance, x: &Bits) -> Result<Bits> {
    Ok(match lossy_comp_outcome(inst, x)? {
        CompOutcome::Compressed { output, .. } => output,
        CompOutcome::NotCompressible => Bits::repeat(false, inst.output_len()),
    })
}

/// Total decompressor. Strings that are not a genuine compression map to the
/// all-zero weight string.
pub fn lossy_decomp(inst: &LossyInstance, y: &Bits) -> Result<Bits> {
    if y.len() != inst.output_len() {
        return Err(input_err!("expected {} bits, got {}", inst.output_len(), y.len()));
    }
    Ok(reconstruct(inst, y).unwrap_or_else(|| inst.default_output()))
}

fn reconstruct(inst: &LossyInstance, y: &Bits) -> Option<Bits> {
    let graph = &inst.graph;
    let split = y.len() - inst.record_bits() as usize;
    let rec = PackedRecord::decode(&y[split..], inst.record);
    let e = graph.edge_id(rec.u, rec.v)?;
    if rec.k > graph.n() {
        return None;
    }
    let f = inst.field_bits() as usize;
    let without: Vec<u64> = y[..split].chunks(f).map(read_uint).collect();
    let value = recover_weight(graph, rec.k, &without, e, inst.backend).ok()?;
    if value < 0 || (value as u64) >> f != 0 {
        return None;
    }
    let mut x = Bits::with_capacity(inst.input_len());
    x.extend_from_bitslice(&y[..e * f]);
    push_uint(&mut x, value as u64, f as u32).ok()?;
    x.extend_from_bitslice(&y[e * f..split]);
    // only accept strings that compress back to exactly this record
    match lossy_comp_outcome(inst, &x).ok()? {
        CompOutcome::Compressed { output, .. } if output == *y => Some(x),
        _ => None,
    }
}

/// Maximum matching from a string the compressor cannot round-trip.
///
/// Walks `k = 0, 1, …` while the weights keep isolating a size-`k` matching.
/// Under the promise the walk reaches a maximum matching; if it stops short,
/// the weights were compressible and the promise was false.
pub fn a2_extract(inst: &LossyInstance, x: &Bits) -> Result<Matching> {
    let weights = inst.decode_weights(x)?;
    let graph = &inst.graph;
    let mut current = Matching::empty(graph);
    for k in 0..=graph.n() {
        let m = match extract_isolated_size_k(graph, k, &weights, inst.backend) {
            Ok(m) => m,
            Err(Error::PromiseViolation(msg)) => {
                return Err(Error::Contract(format!(
                    "extraction stopped at size {k} below a maximum matching ({msg}); the input round-trips"
                )))
            }
            Err(e) => return Err(e),
        };
        if is_maximum(graph, &m, &weights)? {
            return Ok(m);
        }
        current = m;
    }
    Err(Error::Internal(format!("walk passed n without a maximum matching (last size {})", current.len())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveMode {
    Exhaustive,
    Random,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveReport {
    pub witness: Bits,
    pub samples_tried: u64,
    pub roundtrip_failures_found: u64,
}

pub fn roundtrips(inst: &LossyInstance, x: &Bits) -> Result<bool> {
    Ok(lossy_decomp(inst, &lossy_comp(inst, x)?)? == *x)
}

/// Finds `x` with `Decomp(Comp(x)) ≠ x`.
///
/// Exhaustive mode scans strings in increasing order and stops at the first
/// witness. Random mode draws `samples` strings (continuing past that until a
/// witness turns up) and counts every failure among them.
pub fn lossy_solve(inst: &LossyInstance, mode: SolveMode, samples: u64, seed: u64) -> Result<SolveReport> {
    let len = inst.input_len();
    match mode {
        SolveMode::Exhaustive => {
            if len > 40 {
                return Err(Error::TooLarge(format!("exhaustive search over 2^{len} strings")));
            }
            for i in 0..(1u64 << len) {
                let mut x = Bits::with_capacity(len);
                push_uint(&mut x, i, len as u32)?;
                if !roundtrips(inst, &x)? {
                    return Ok(SolveReport { witness: x, samples_tried: i + 1, roundtrip_failures_found: 1 });
                }
            }
            Err(Error::Internal("every string round-trips, contradicting pigeonhole".into()))
        }
        SolveMode::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut witness = None;
            let mut failures = 0;
            let mut tried = 0u64;
            while tried < samples || witness.is_none() {
                let x = seeded_bits(rng.next_u64(), len);
                tried += 1;
                if !roundtrips(inst, &x)? {
                    failures += 1;
                    witness.get_or_insert(x);
                }
                if tried > samples.max(1) * 1_000_000 {
                    return Err(Error::Internal("random search found no witness".into()));
                }
            }
            Ok(SolveReport { witness: witness.unwrap(), samples_tried: tried, roundtrip_failures_found: failures })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k22() -> LossyInstance {
        LossyInstance::new(BipartiteGraph::complete(2).unwrap()).unwrap()
    }

    #[test]
    fn widths() {
        let inst = k22();
        assert_eq!((inst.field_bits(), inst.record_bits()), (5, 4));
        assert_eq!((inst.input_len(), inst.output_len()), (20, 19));
        let single = LossyInstance::new(BipartiteGraph::new(1, [(0, 0)]).unwrap()).unwrap();
        assert_eq!((single.field_bits(), single.input_len(), single.output_len()), (2, 2, 1));
        assert!(LossyInstance::new(BipartiteGraph::empty(2).unwrap()).is_err());
    }

    #[test]
    fn equal_weights_compress_and_roundtrip() {
        let inst = k22();
        let x = inst.encode_weights(&[3, 3, 3, 3]).unwrap();
        match lossy_comp_outcome(&inst, &x).unwrap() {
            CompOutcome::Compressed { k, edge, output } => {
                assert_eq!((k, edge), (0, 0));
                assert_eq!(output.len(), 19);
            }
            other => panic!("{other:?}"),
        }
        assert!(roundtrips(&inst, &x).unwrap());
        assert!(a2_extract(&inst, &x).is_err());
    }

    #[test]
    fn isolating_weights_do_not_compress() {
        let inst = k22();
        let x = inst.encode_weights(&[1, 2, 4, 8]).unwrap();
        assert_eq!(lossy_comp_outcome(&inst, &x).unwrap(), CompOutcome::NotCompressible);
        let y = lossy_comp(&inst, &x).unwrap();
        assert_eq!(y.len(), 19);
        assert!(y.not_any());
        assert_ne!(lossy_decomp(&inst, &y).unwrap(), x);
        let m = a2_extract(&inst, &x).unwrap();
        assert_eq!(m.pairs(inst.graph()), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn decomp_is_total() {
        let inst = k22();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let y = seeded_bits(rng.next_u64(), inst.output_len());
            assert_eq!(lossy_decomp(&inst, &y).unwrap().len(), inst.input_len());
        }
        assert!(lossy_decomp(&inst, &Bits::repeat(false, 3)).is_err());
    }

    #[test]
    fn single_vertex_never_compresses() {
        let inst = LossyInstance::new(BipartiteGraph::new(1, [(0, 0)]).unwrap()).unwrap();
        for i in 0..4u64 {
            let mut x = Bits::new();
            push_uint(&mut x, i, 2).unwrap();
            assert_eq!(lossy_comp_outcome(&inst, &x).unwrap(), CompOutcome::NotCompressible);
            assert_eq!(a2_extract(&inst, &x).unwrap().len(), 1);
        }
    }

    #[test]
    fn solver_finds_witness() {
        let inst = k22();
        for mode in [SolveMode::Exhaustive, SolveMode::Random] {
            let report = lossy_solve(&inst, mode, 16, 9).unwrap();
            assert!(!roundtrips(&inst, &report.witness).unwrap());
            assert_eq!(a2_extract(&inst, &report.witness).unwrap().len(), 2);
        }
    }
}
