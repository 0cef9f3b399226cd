//! Streaming attention estimation in sublinear space, with the adversarial
//! stream constructions that show where sublinear space is impossible.
//!
//! The crate has three layers:
//!
//! - exact reference semantics ([`attention`]): softmax, full attention, and
//!   sliding-window attention with unmasked values, used as oracles;
//! - sublinear-space estimators: the sliding-window sampler with reservoir
//!   fallback and its median-of-means boosting ([`window`]), lazy Gumbel
//!   softmax sampling and the d = 1 streaming state ([`sampling`]), and
//!   seeded Gaussian projections ([`jl`]);
//! - adversarial stream generators and decoders ([`instances`], [`cluster`])
//!   that realize the hard instances behind the space/time arguments, plus
//!   serialization ([`iofmt`]), run reports ([`report`]), and the statistical
//!   check suites ([`checks`]) the CLI and acceptance tests share.

pub mod attention;
pub mod checks;
pub mod cluster;
pub mod error;
pub mod instances;
pub mod iofmt;
pub mod jl;
pub mod randkit;
pub mod report;
pub mod sampling;
pub mod vector;
pub mod window;

pub use attention::{
    attention_as_expectation, exact_attention, sliding_window_attention_exact,
    sliding_window_attention_for_query, softmax, KvCache, SlidingWindowSpec, SoftmaxDist,
};
pub use cluster::{covering_bound, greedy_cluster, ClusterAssignment};
pub use error::{Error, Result};
pub use instances::{
    bob_query, bob_window_query, build_benign, build_index_instance, build_time_family,
    build_time_sigma, build_window_instance, decode_instance, thresholds, BitMatrix,
    DecodeReport, HardInstance, InstanceKind, OracleNoise, Thresholds,
};
pub use jl::{dim_for, verify_pairwise, JlProjector, PreservationReport};
pub use sampling::{
    gumbel_draw, gumbel_max_sample, lazy_gumbel_sample, Reservoir, ScalarStreamState,
};
pub use vector::{TokenTriple, Vector};
pub use window::{
    boost_config, boosted_estimate, BoostConfig, SampleBranch, WindowEnsemble, WindowState,
};
