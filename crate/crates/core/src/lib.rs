//! Carrier-sensing tradeoff between hidden and exposed nodes in CSMA networks.
//!
//! The crate covers two complementary routes to per-node throughput:
//!
//! * an analytic route for line networks under the hard-core interaction
//!   model ([`partition`], [`roots`], [`throughput`], [`optimize`]), and
//! * a discrete-event simulator for arbitrary geometric topologies
//!   ([`topology`], [`simulate`]).
//!
//! [`report`] holds the CSV conventions shared by the command-line front end.

pub mod error;
pub mod optimize;
pub mod partition;
pub mod report;
pub mod roots;
pub mod simulate;
pub mod special;
pub mod throughput;
pub mod topology;

pub use error::{Error, Result};
pub use optimize::{
    big_f, optimal_beta_continuous, optimal_beta_finite, sigma_of_beta, threshold_interval,
    ThresholdResult,
};
pub use partition::{partition_bruteforce, partition_recursive, partition_spectral, PartitionTable};
pub use roots::{
    all_roots, convergence_radius, dominant_root, series_large_sigma, series_small_sigma,
    RootMethod, RootSet, SeriesValue,
};
pub use simulate::{simulate, Destination, SimConfig, SimStats};
pub use throughput::{
    blocked_exponent, hidden_exposed_sets, throughput_collision_free, throughput_finite, throughput_finite_with,
    throughput_infinite, Direction, ModelParams, NodeSets, ThroughputKind, ThroughputResult,
};
pub use topology::Topology;
