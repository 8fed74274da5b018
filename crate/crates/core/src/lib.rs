//! Maximum bipartite matching with a catalytic tape.
//!
//! Edge weights are read from a tape of arbitrary initial contents. When they
//! fail to isolate a minimum-weight matching, a redundant weight is erased to
//! free space, and every change is undone before returning. The same
//! compression drives a lossy coding of weight strings whose failures yield
//! maximum matchings.

pub mod det;
pub mod driver;
pub mod error;
pub mod extensions;
pub mod generate;
pub mod graph;
pub mod hopcroft_karp;
pub mod isolation;
pub mod lossy;
pub mod oracle;
pub mod residual;
pub mod tape;

pub use driver::{run_clp_match, DriverConfig, RunReport};
pub use error::{Error, Result};
pub use extensions::{min_weight_max_matching, ExtensionReport};
pub use graph::{BipartiteGraph, EdgeId, EdgeSet, Matching, WeightAssignment};
pub use isolation::{extract_isolated_size_k, Backend, ScaleMode};
pub use lossy::{a2_extract, lossy_comp, lossy_decomp, lossy_solve, LossyInstance, SolveMode};
pub use residual::{check_k_plus_1, recover_weight, IsolationOutcome};
pub use tape::{Bits, CatalyticTape, TapeInit, TapeLayout};
