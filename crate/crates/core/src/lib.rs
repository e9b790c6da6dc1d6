//! Sparse recovery under ℓ1 noise: codebooks, measurement matrices, recovery
//! oracles, closed-form row-count bounds and a simulated one-way protocol
//! that turns a linear sketch into an Augmented Indexing decoder.
//!
//! The crate root re-exports the types shared by the CLI and benchmarks.

// `!(x > 0.0)` style guards are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod codes;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod measurement;
pub mod protocol;
pub mod recovery;

pub use bounds::{det_lower_bound, pigeonhole_count, pigeonhole_threshold, DetBoundParams};
pub use codes::{expand_to_binary, gv_construct, q_ary_entropy, GreedyOptions, QaryCode, SparseCodebook};
pub use error::{Error, Result};
pub use geometry::{sample_l1_ball, L1Ball};
pub use harness::seed::{derive_rng, TrialRng};
pub use harness::{run, ExperimentConfig, RunOutcome, Subcommand};
pub use measurement::{discretize, orthonormalize_rows, MeasurementMatrix};
pub use protocol::{run_protocol_trials, ProtocolConfig, ProtocolRun, Transcript};
pub use recovery::{nn_recover, NearestCodewordOracle, RecoveryOracle, TopKOracle, ZeroOracle};
