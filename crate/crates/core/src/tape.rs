//! Simulated catalytic tape.
//!
//! The tape is a fixed-length bit string laid out as three contiguous regions:
//!
//! ```text
//! | weight fields (|E| x b) | reserve slots (R x b) | scratch |
//! ```
//!
//! Every field is read and written big-endian. The tape keeps an immutable
//! snapshot of its initial contents so restoration can be checked bit-for-bit.

use bitvec::prelude::*;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};
use crate::graph::{ceil_log2, BipartiteGraph, EdgeId, WeightAssignment};

pub type Bits = BitVec<u8, Msb0>;

/// Bits needed for a compression record: `k` then the two edge endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordWidths {
    pub k_bits: u32,
    pub endpoint_bits: u32,
}

impl RecordWidths {
    pub fn for_n(n: usize) -> Self {
        Self { k_bits: ceil_log2(n + 1), endpoint_bits: ceil_log2(n) }
    }

    pub fn total(&self) -> u32 {
        self.k_bits + 2 * self.endpoint_bits
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TapeLayout {
    pub n: usize,
    pub weight_bits: u32,
    pub num_weights: usize,
    pub num_reserves: usize,
    pub scratch_bits: usize,
}

impl TapeLayout {
    /// Smallest field width that fits a record plus at least two freed bits.
    pub fn min_weight_bits(n: usize) -> u32 {
        RecordWidths::for_n(n).total() + 2
    }

    /// `max(5⌈log₂ n⌉, min_weight_bits(n))`.
    pub fn default_weight_bits(n: usize) -> u32 {
        (5 * ceil_log2(n)).max(Self::min_weight_bits(n))
    }

    /// `⌈|E|·√(2n) / (2⌈log₂ n⌉)⌉ + 1`.
    pub fn default_num_reserves(graph: &BipartiteGraph) -> usize {
        let log = (2 * ceil_log2(graph.n())).max(1) as f64;
        let t = graph.num_edges() as f64 * (2.0 * graph.n() as f64).sqrt();
        (t / log).ceil() as usize + 1
    }

    pub fn for_graph(graph: &BipartiteGraph) -> Self {
        Self::new(
            graph,
            Self::default_weight_bits(graph.n()),
            Self::default_num_reserves(graph),
            0,
        )
        .expect("default layout is valid")
    }

    pub fn new(
        graph: &BipartiteGraph,
        weight_bits: u32,
        num_reserves: usize,
        scratch_bits: usize,
    ) -> Result<Self> {
        let min = Self::min_weight_bits(graph.n());
        if weight_bits < min {
            return Err(input_err!(
                "weight field width {weight_bits} below the minimum {min} for n = {}",
                graph.n()
            ));
        }
        if weight_bits > 40 {
            return Err(input_err!("weight field width {weight_bits} exceeds 40 bits"));
        }
        if num_reserves == 0 {
            return Err(input_err!("at least one reserve slot is required"));
        }
        Ok(Self { n: graph.n(), weight_bits, num_weights: graph.num_edges(), num_reserves, scratch_bits })
    }

    pub fn record(&self) -> RecordWidths {
        RecordWidths::for_n(self.n)
    }

    /// Zero bits left in a reserve slot after it holds a record.
    pub fn padding_bits(&self) -> u32 {
        self.weight_bits - self.record().total()
    }

    pub fn weight_offset(&self, index: usize) -> usize {
        index * self.weight_bits as usize
    }

    pub fn reserve_region_start(&self) -> usize {
        self.num_weights * self.weight_bits as usize
    }

    pub fn reserve_offset(&self, slot: usize) -> usize {
        self.reserve_region_start() + slot * self.weight_bits as usize
    }

    pub fn scratch_start(&self) -> usize {
        self.reserve_offset(self.num_reserves)
    }

    pub fn total_bits(&self) -> usize {
        self.scratch_start() + self.scratch_bits
    }

    /// Same layout with the scratch region grown so the tape is `len` bits.
    pub fn fit_to(&self, len: usize) -> Result<Self> {
        let fixed = self.scratch_start();
        if len < fixed {
            return Err(input_err!("tape of {len} bits is shorter than the {fixed} bits the layout needs"));
        }
        Ok(Self { scratch_bits: len - fixed, ..self.clone() })
    }
}

/// A packed `(k, u, v)` record as stored in a reserve slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackedRecord {
    pub k: usize,
    pub u: usize,
    pub v: usize,
}

impl PackedRecord {
    pub fn encode(&self, widths: RecordWidths) -> Result<Bits> {
        let mut out = Bits::new();
        push_uint(&mut out, self.k as u64, widths.k_bits)?;
        push_uint(&mut out, self.u as u64, widths.endpoint_bits)?;
        push_uint(&mut out, self.v as u64, widths.endpoint_bits)?;
        Ok(out)
    }

    pub fn decode(bits: &BitSlice<u8, Msb0>, widths: RecordWidths) -> Self {
        let kb = widths.k_bits as usize;
        let eb = widths.endpoint_bits as usize;
        Self {
            k: read_uint(&bits[..kb]) as usize,
            u: read_uint(&bits[kb..kb + eb]) as usize,
            v: read_uint(&bits[kb + eb..kb + 2 * eb]) as usize,
        }
    }
}

pub fn push_uint(out: &mut Bits, value: u64, width: u32) -> Result<()> {
    if width < 64 && value >> width != 0 {
        return Err(input_err!("value {value} does not fit in {width} bits"));
    }
    for i in (0..width).rev() {
        out.push((value >> i) & 1 == 1);
    }
    Ok(())
}

pub fn read_uint(bits: &BitSlice<u8, Msb0>) -> u64 {
    bits.iter().fold(0u64, |acc, b| (acc << 1) | *b as u64)
}

pub(crate) fn write_uint(bits: &mut BitSlice<u8, Msb0>, value: u64) {
    let width = bits.len();
    for (i, mut bit) in bits.iter_mut().enumerate() {
        *bit = (value >> (width - 1 - i)) & 1 == 1;
    }
}

/// Source of the initial tape contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TapeInit {
    Bits(Bits),
    Hex(String),
    Seed(u64),
    Zeros,
    Ones,
}

#[derive(Debug, Clone)]
pub struct CatalyticTape {
    bits: Bits,
    snapshot: Bits,
    freed_bits: u64,
    freed_peak: u64,
}

impl CatalyticTape {
    pub fn new(initial: Bits) -> Self {
        Self { snapshot: initial.clone(), bits: initial, freed_bits: 0, freed_peak: 0 }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &BitSlice<u8, Msb0> {
        &self.bits
    }

    pub fn snapshot(&self) -> &BitSlice<u8, Msb0> {
        &self.snapshot
    }

    pub fn freed_bits(&self) -> u64 {
        self.freed_bits
    }

    pub fn freed_peak(&self) -> u64 {
        self.freed_peak
    }

    /// Direct mutable access, for tests that tamper with the tape.
    pub fn bits_mut(&mut self) -> &mut BitSlice<u8, Msb0> {
        &mut self.bits
    }

    pub fn to_hex(&self) -> String {
        bits_to_hex(&self.bits)
    }

    fn read_field(&self, start: usize, width: u32) -> u64 {
        read_uint(&self.bits[start..start + width as usize])
    }

    fn write_field(&mut self, start: usize, width: u32, value: u64) -> Result<()> {
        if value >> width != 0 {
            return Err(input_err!("value {value} overflows a {width}-bit field"));
        }
        write_uint(&mut self.bits[start..start + width as usize], value);
        Ok(())
    }

    pub(crate) fn read_slot_bits(&self, layout: &TapeLayout, slot: usize) -> &BitSlice<u8, Msb0> {
        let start = layout.reserve_offset(slot);
        &self.bits[start..start + layout.weight_bits as usize]
    }

    pub(crate) fn slot_bits_mut(&mut self, layout: &TapeLayout, slot: usize) -> &mut BitSlice<u8, Msb0> {
        let start = layout.reserve_offset(slot);
        &mut self.bits[start..start + layout.weight_bits as usize]
    }

    pub fn read_reserve(&self, layout: &TapeLayout, slot: usize) -> u64 {
        self.read_field(layout.reserve_offset(slot), layout.weight_bits)
    }

    pub fn write_reserve(&mut self, layout: &TapeLayout, slot: usize, value: u64) -> Result<()> {
        self.write_field(layout.reserve_offset(slot), layout.weight_bits, value)
    }
}

/// Builds a tape for `layout` from an explicit bit string or a generator.
pub fn init_tape(layout: &TapeLayout, initial: &TapeInit) -> Result<CatalyticTape> {
    let len = layout.total_bits();
    let bits = match initial {
        TapeInit::Bits(b) => b.clone(),
        TapeInit::Hex(h) => hex_to_bits(h)?,
        TapeInit::Seed(seed) => seeded_bits(*seed, len),
        TapeInit::Zeros => Bits::repeat(false, len),
        TapeInit::Ones => Bits::repeat(true, len),
    };
    if bits.len() != len {
        return Err(input_err!("tape has {} bits, layout requires {len}", bits.len()));
    }
    Ok(CatalyticTape::new(bits))
}

pub fn seeded_bits(seed: u64, len: usize) -> Bits {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bytes = vec![0u8; len.div_ceil(8)];
    rng.fill_bytes(&mut bytes);
    let mut bits = Bits::from_vec(bytes);
    bits.truncate(len);
    bits
}

/// Decodes every weight field; the tape is unchanged.
pub fn read_weights(tape: &CatalyticTape, layout: &TapeLayout) -> WeightAssignment {
    let values = (0..layout.num_weights).map(|i| read_weight(tape, layout, i)).collect();
    WeightAssignment::new(values, layout.weight_bits).expect("fields fit their width")
}

pub fn read_weight(tape: &CatalyticTape, layout: &TapeLayout, index: EdgeId) -> u64 {
    tape.read_field(layout.weight_offset(index), layout.weight_bits)
}

pub fn write_weight(tape: &mut CatalyticTape, layout: &TapeLayout, index: EdgeId, value: u64) -> Result<()> {
    if index >= layout.num_weights {
        return Err(input_err!("weight index {index} out of range"));
    }
    tape.write_field(layout.weight_offset(index), layout.weight_bits, value)
}

/// True iff the tape equals its initial contents bit-for-bit.
pub fn restore_check(tape: &CatalyticTape) -> bool {
    tape.bits == tape.snapshot
}

/// Adjusts the count of bits currently known to be zero and reusable.
pub fn account_free(tape: &mut CatalyticTape, delta_bits: i64) -> Result<()> {
    let next = tape.freed_bits as i64 + delta_bits;
    if next < 0 {
        return Err(Error::Internal(format!(
            "free-bit balance would drop to {next} (was {}, delta {delta_bits})",
            tape.freed_bits
        )));
    }
    tape.freed_bits = next as u64;
    tape.freed_peak = tape.freed_peak.max(tape.freed_bits);
    Ok(())
}

pub fn hex_to_bits(hex: &str) -> Result<Bits> {
    let hex = hex.trim().trim_start_matches("0x");
    let mut bits = Bits::with_capacity(hex.len() * 4);
    for c in hex.chars() {
        let nibble = c.to_digit(16).ok_or_else(|| input_err!("invalid hex digit {c:?}"))?;
        for i in (0..4).rev() {
            bits.push((nibble >> i) & 1 == 1);
        }
    }
    Ok(bits)
}

/// Hex encoding; a trailing partial nibble is padded with zero bits.
pub fn bits_to_hex(bits: &BitSlice<u8, Msb0>) -> String {
    bits.chunks(4)
        .map(|c| {
            let v = c.iter().fold(0u32, |acc, b| (acc << 1) | *b as u32) << (4 - c.len());
            char::from_digit(v, 16).unwrap()
        })
        .collect()
}
