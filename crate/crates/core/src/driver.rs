//! The catalytic matching loop.
//!
//! Weights are read straight off the tape. The loop grows `k` while the tape
//! weights keep isolating; when isolation fails at `k + 1` a threshold edge's
//! weight is erased (it is recoverable from the others), a reserve weight takes
//! its place, and the freed reserve slot records `(k, e)`. After the answer is
//! found every compression is undone in reverse order and the tape is checked
//! against its initial snapshot.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, EdgeId, Matching, WeightAssignment};
use crate::hopcroft_karp::{hopcroft_karp, min_weight_maximum_matching};
use crate::isolation::Backend;
use crate::residual::{check_k_plus_1, recover_weight, IsolationOutcome};
use crate::tape::{account_free, read_weights, restore_check, write_weight, CatalyticTape, PackedRecord, TapeLayout};

/// Compressions before the direct algorithm takes over, in test configurations.
pub const SMALL_FALLBACK_THRESHOLD: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DriverConfig {
    pub weight_bits: u32,
    pub num_reserves: usize,
    pub fallback_threshold: usize,
    pub force_fallback: bool,
    pub record_trace: bool,
    pub backend: Backend,
}

impl DriverConfig {
    /// Default widths, `num_reserves` from the layout default and the fallback
    /// threshold equal to it.
    pub fn for_graph(graph: &BipartiteGraph) -> Self {
        let layout = TapeLayout::for_graph(graph);
        Self {
            weight_bits: layout.weight_bits,
            num_reserves: layout.num_reserves,
            fallback_threshold: layout.num_reserves,
            force_fallback: false,
            record_trace: false,
            backend: Backend::default(),
        }
    }

    /// Minimum legal field width and a small fallback threshold.
    pub fn small(graph: &BipartiteGraph) -> Self {
        Self {
            weight_bits: TapeLayout::min_weight_bits(graph.n()),
            num_reserves: SMALL_FALLBACK_THRESHOLD,
            fallback_threshold: SMALL_FALLBACK_THRESHOLD,
            ..Self::for_graph(graph)
        }
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    /// Layout with no scratch region.
    pub fn layout(&self, graph: &BipartiteGraph) -> Result<TapeLayout> {
        TapeLayout::new(graph, self.weight_bits, self.num_reserves, 0)
    }

    /// Layout whose scratch region absorbs the rest of a `len`-bit tape.
    pub fn layout_for_len(&self, graph: &BipartiteGraph, len: usize) -> Result<TapeLayout> {
        self.layout(graph)?.fit_to(len)
    }

    fn validate(&self) -> Result<()> {
        if self.fallback_threshold > self.num_reserves {
            return Err(Error::Input(format!(
                "fallback threshold {} exceeds the {} reserve slots",
                self.fallback_threshold, self.num_reserves
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompressionRecord {
    pub c: usize,
    pub k: usize,
    pub edge: EdgeId,
    pub slot: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceEvent {
    Check { c: usize, k: usize, weights: Vec<u64>, outcome: IsolationOutcome },
    Comp(CompressionRecord),
    Fallback { c: usize },
    Decomp(CompressionRecord),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub matching: Vec<(usize, usize)>,
    pub matching_size: usize,
    pub compressions: usize,
    pub fallback_fired: bool,
    pub tape_restored: bool,
    pub freed_bits_peak: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceEvent>>,
    #[serde(skip)]
    pub result: Matching,
}

/// How tape weights become the weights the algorithm sees.
#[derive(Debug, Clone, Copy)]
pub(crate) struct WeightView<'a> {
    /// Per-edge input weights and their scale.
    pub input: Option<(&'a [u64], u64)>,
}

impl WeightView<'_> {
    pub const PLAIN: WeightView<'static> = WeightView { input: None };

    fn combine(&self, tape: &WeightAssignment) -> Vec<u64> {
        match self.input {
            None => tape.values().to_vec(),
            Some((input, scale)) => tape.values().iter().zip(input).map(|(&c, &w)| w * scale + c).collect(),
        }
    }

    /// Tape component of a recovered combined weight.
    fn tape_part(&self, e: EdgeId, combined: i64) -> i64 {
        match self.input {
            None => combined,
            Some((input, scale)) => combined - (input[e] * scale) as i64,
        }
    }

    fn fallback(&self, graph: &BipartiteGraph) -> Result<Matching> {
        match self.input {
            None => Ok(hopcroft_karp(graph)),
            Some((input, _)) => min_weight_maximum_matching(graph, input),
        }
    }
}

fn promise_to_internal(e: Error) -> Error {
    match e {
        Error::PromiseViolation(msg) => Error::Internal(format!("isolation invariant broken: {msg}")),
        other => other,
    }
}

/// Erases the weight of a threshold edge at size `k` using reserve slot `c`.
pub fn comp(
    tape: &mut CatalyticTape,
    layout: &TapeLayout,
    graph: &BipartiteGraph,
    k: usize,
    c: usize,
    backend: Backend,
) -> Result<CompressionRecord> {
    comp_view(tape, layout, graph, k, c, backend, WeightView::PLAIN)
}

pub(crate) fn comp_view(
    tape: &mut CatalyticTape,
    layout: &TapeLayout,
    graph: &BipartiteGraph,
    k: usize,
    c: usize,
    backend: Backend,
    view: WeightView<'_>,
) -> Result<CompressionRecord> {
    let weights = view.combine(&read_weights(tape, layout));
    match check_k_plus_1(graph, k, &weights, backend)?.outcome {
        IsolationOutcome::Threshold(e) => comp_at(tape, layout, graph, k, c, e),
        other => Err(Error::Contract(format!("comp requires a threshold edge at k = {k}, got {other:?}"))),
    }
}

fn comp_at(
    tape: &mut CatalyticTape,
    layout: &TapeLayout,
    graph: &BipartiteGraph,
    k: usize,
    c: usize,
    e: EdgeId,
) -> Result<CompressionRecord> {
    if c >= layout.num_reserves {
        return Err(Error::Contract(format!("reserve slot {c} does not exist")));
    }
    let reserve = tape.read_reserve(layout, c);
    let (u, v) = graph.edge(e);
    let packed = PackedRecord { k, u, v }.encode(layout.record())?;
    write_weight(tape, layout, e, reserve)?;
    let slot = tape.slot_bits_mut(layout, c);
    slot.fill(false);
    slot[..packed.len()].copy_from_bitslice(&packed);
    account_free(tape, layout.padding_bits() as i64)?;
    Ok(CompressionRecord { c, k, edge: e, slot: c })
}

/// Inverts [`comp`]: recovers the erased weight and moves the reserve back.
pub fn decomp(
    tape: &mut CatalyticTape,
    layout: &TapeLayout,
    graph: &BipartiteGraph,
    record: &CompressionRecord,
    backend: Backend,
) -> Result<()> {
    decomp_view(tape, layout, graph, record, backend, WeightView::PLAIN)
}

pub(crate) fn decomp_view(
    tape: &mut CatalyticTape,
    layout: &TapeLayout,
    graph: &BipartiteGraph,
    record: &CompressionRecord,
    backend: Backend,
    view: WeightView<'_>,
) -> Result<()> {
    if record.slot >= layout.num_reserves {
        return Err(Error::Contract(format!("reserve slot {} does not exist", record.slot)));
    }
    let widths = layout.record();
    let slot = tape.read_slot_bits(layout, record.slot);
    let stored = PackedRecord::decode(slot, widths);
    if slot[widths.total() as usize..].any() {
        return Err(Error::Contract(format!("reserve slot {} holds no compression record", record.slot)));
    }
    if graph.edge_id(stored.u, stored.v) != Some(record.edge) || stored.k != record.k {
        return Err(Error::Contract(format!(
            "slot {} records (k={}, e=({}, {})), expected (k={}, e={:?})",
            record.slot,
            stored.k,
            stored.u,
            stored.v,
            record.k,
            graph.edge(record.edge)
        )));
    }
    let padding = layout.padding_bits() as u64;
    if tape.freed_bits() < padding {
        return Err(Error::Contract("no outstanding compression to undo".into()));
    }

    let tape_weights = read_weights(tape, layout);
    let combined = WeightAssignment::fitted(view.combine(&tape_weights));
    let e = record.edge;
    let recovered = recover_weight(graph, record.k, &combined.without(e), e, backend)
        .map_err(|err| Error::Corruption(format!("cannot recover weight of edge {e}: {err}")))?;
    let value = view.tape_part(e, recovered);
    if value < 0 || (value as u64) >> layout.weight_bits != 0 {
        return Err(Error::Corruption(format!("recovered weight {value} for edge {e} is out of range")));
    }
    let reserve = tape_weights.values()[e];
    tape.write_reserve(layout, record.slot, reserve)?;
    write_weight(tape, layout, e, value as u64)?;
    account_free(tape, -(padding as i64))
}

/// Direct maximum matching, used once enough space has been freed.
pub fn fallback_direct(graph: &BipartiteGraph) -> Matching {
    hopcroft_karp(graph)
}

/// Computes a maximum matching of `graph` using the tape contents as weights,
/// then restores the tape.
pub fn run_clp_match(graph: &BipartiteGraph, tape: &mut CatalyticTape, config: &DriverConfig) -> Result<RunReport> {
    run_view(graph, tape, config, WeightView::PLAIN)
}

pub(crate) fn run_view(
    graph: &BipartiteGraph,
    tape: &mut CatalyticTape,
    config: &DriverConfig,
    view: WeightView<'_>,
) -> Result<RunReport> {
    config.validate()?;
    let layout = config.layout_for_len(graph, tape.len())?;
    let mut trace = config.record_trace.then(Vec::new);
    let mut records: Vec<CompressionRecord> = Vec::new();
    let mut fallback_fired = false;

    let result = if config.force_fallback || config.fallback_threshold == 0 {
        fallback_fired = true;
        if let Some(t) = trace.as_mut() {
            t.push(TraceEvent::Fallback { c: 0 });
        }
        view.fallback(graph)?
    } else {
        let mut k = 0;
        loop {
            let weights = view.combine(&read_weights(tape, &layout));
            let check = check_k_plus_1(graph, k, &weights, config.backend).map_err(promise_to_internal)?;
            if let Some(t) = trace.as_mut() {
                t.push(TraceEvent::Check { c: records.len(), k, weights, outcome: check.outcome });
            }
            match check.outcome {
                IsolationOutcome::Bot => break check.matching,
                IsolationOutcome::Isolated => k += 1,
                IsolationOutcome::Threshold(e) => {
                    let record = comp_at(tape, &layout, graph, k, records.len(), e)?;
                    if let Some(t) = trace.as_mut() {
                        t.push(TraceEvent::Comp(record));
                    }
                    records.push(record);
                    k = 0;
                    if records.len() >= config.fallback_threshold {
                        fallback_fired = true;
                        if let Some(t) = trace.as_mut() {
                            t.push(TraceEvent::Fallback { c: records.len() });
                        }
                        break view.fallback(graph)?;
                    }
                }
            }
        }
    };

    let freed_bits_peak = tape.freed_peak();
    for record in records.iter().rev() {
        decomp_view(tape, &layout, graph, record, config.backend, view)?;
        if let Some(t) = trace.as_mut() {
            t.push(TraceEvent::Decomp(*record));
        }
    }

    Ok(RunReport {
        matching: result.pairs(graph),
        matching_size: result.len(),
        compressions: records.len(),
        fallback_fired,
        tape_restored: restore_check(tape),
        freed_bits_peak,
        trace,
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tape::{init_tape, read_weight, TapeInit};

    fn k22_setup(init: TapeInit) -> (BipartiteGraph, DriverConfig, TapeLayout, CatalyticTape) {
        let g = BipartiteGraph::complete(2).unwrap();
        let config = DriverConfig::small(&g);
        let layout = config.layout(&g).unwrap();
        let tape = init_tape(&layout, &init).unwrap();
        (g, config, layout, tape)
    }

    #[test]
    fn comp_on_equal_weights() {
        let (g, _, layout, mut tape) = k22_setup(TapeInit::Zeros);
        assert_eq!(layout.weight_bits, 6);
        tape.write_reserve(&layout, 0, 7).unwrap();
        let mut tape = CatalyticTape::new(tape.bits().to_bitvec());
        let record = comp(&mut tape, &layout, &g, 0, 0, Backend::Determinant).unwrap();
        assert_eq!(record, CompressionRecord { c: 0, k: 0, edge: 0, slot: 0 });
        assert_eq!(read_weight(&tape, &layout, 0), 7);
        // k = 0 in 2 bits, u = 0 and v = 0 in 1 bit each, then 2 zero bits
        assert!(tape.read_slot_bits(&layout, 0).not_any());
        assert_eq!(tape.freed_bits(), 2);

        decomp(&mut tape, &layout, &g, &record, Backend::Determinant).unwrap();
        assert!(restore_check(&tape));
        assert_eq!(tape.freed_bits(), 0);
    }

    #[test]
    fn comp_rejected_without_threshold() {
        let (g, _, layout, mut tape) = k22_setup(TapeInit::Zeros);
        for (i, w) in [1u64, 2, 4, 8].into_iter().enumerate() {
            write_weight(&mut tape, &layout, i, w).unwrap();
        }
        assert!(matches!(comp(&mut tape, &layout, &g, 0, 0, Backend::Combinatorial), Err(Error::Contract(_))));
    }

    #[test]
    fn decomp_on_untouched_tape() {
        let (g, _, layout, mut tape) = k22_setup(TapeInit::Ones);
        let record = CompressionRecord { c: 0, k: 0, edge: 0, slot: 0 };
        assert!(matches!(decomp(&mut tape, &layout, &g, &record, Backend::Combinatorial), Err(Error::Contract(_))));
        let (g, _, layout, mut tape) = k22_setup(TapeInit::Zeros);
        assert!(matches!(decomp(&mut tape, &layout, &g, &record, Backend::Combinatorial), Err(Error::Contract(_))));
        assert!(restore_check(&tape));
    }

    #[test]
    fn run_examples() {
        let empty = BipartiteGraph::empty(2).unwrap();
        let config = DriverConfig::small(&empty);
        let mut tape = init_tape(&config.layout(&empty).unwrap(), &TapeInit::Seed(1)).unwrap();
        let report = run_clp_match(&empty, &mut tape, &config).unwrap();
        assert_eq!((report.matching_size, report.compressions, report.tape_restored), (0, 0, true));

        let (g, config, layout, mut tape) = k22_setup(TapeInit::Zeros);
        for (i, w) in [1u64, 2, 4, 8].into_iter().enumerate() {
            write_weight(&mut tape, &layout, i, w).unwrap();
        }
        let mut tape = CatalyticTape::new(tape.bits().to_bitvec());
        let report = run_clp_match(&g, &mut tape, &config).unwrap();
        assert_eq!((report.matching_size, report.compressions, report.tape_restored), (2, 0, true));

        let (g, config, _, mut tape) = k22_setup(TapeInit::Zeros);
        let report = run_clp_match(&g, &mut tape, &config).unwrap();
        assert_eq!(report.matching_size, 2);
        assert!(report.compressions >= 1);
        assert!(report.tape_restored);
        assert_eq!(report.freed_bits_peak, 2 * report.compressions as u64);
    }

    #[test]
    fn forced_fallback() {
        let (g, mut config, _, mut tape) = k22_setup(TapeInit::Seed(5));
        config.force_fallback = true;
        let report = run_clp_match(&g, &mut tape, &config).unwrap();
        assert!(report.fallback_fired);
        assert_eq!(report.matching_size, 2);
        assert!(report.tape_restored);
    }

    #[test]
    fn fallback_direct_sizes() {
        assert_eq!(fallback_direct(&BipartiteGraph::complete(3).unwrap()).len(), 3);
        assert_eq!(fallback_direct(&BipartiteGraph::new(3, [(0, 0), (0, 1), (0, 2)]).unwrap()).len(), 1);
    }

    #[test]
    fn threshold_above_reserves_rejected() {
        let (g, mut config, _, mut tape) = k22_setup(TapeInit::Zeros);
        config.fallback_threshold = config.num_reserves + 1;
        assert!(matches!(run_clp_match(&g, &mut tape, &config), Err(Error::Input(_))));
    }
}
