//! Granular-ball skeleton clustering (GBSK) for large point sets.
//!
//! The crate is `no_std` + `alloc` with the default `std` feature turned
//! off. With `std` enabled, per-sample ball generation and the final
//! point-labeling pass run on the rayon thread pool and step timings are
//! measured with a monotonic clock; results are identical either way.
//!
//! The pipeline, end to end:
//!
//! 1. draw `s` random sample sets of size `n * alpha` ([`dataset::sample`]);
//! 2. cover each sample with granular-balls and keep the top-`k` balls by
//!    density-peak score ([`ball::generate_balls`], [`peaks::identify_peak_balls`]);
//! 3. regenerate "key balls" over the pooled representative centers;
//! 4. link key balls into a forest where each ball points at its nearest
//!    denser neighbour ([`skeleton::construct_forest`]);
//! 5. label every point with the label of its nearest key ball.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod ball;
pub mod dataset;
mod error;
pub mod metrics;
mod par;
pub mod peaks;
pub mod pipeline;
pub mod rng;
pub mod skeleton;

pub use ball::{BallBudget, BallSet, GranularBall};
pub use dataset::{Dataset, Points, SampleSet, SyntheticSpec};
pub use error::{Error, Result};
pub use pipeline::{agbsk_params, run_ablation, run_gbsk, ClusteringResult, GbskParams, Variant};
pub use skeleton::{KeyBallSet, SkeletonForest};
