//! Tree-based optimization (TBO).
//!
//! The search box is split recursively. Each child is explored by a
//! region-local metaheuristic, one child is kept with a probability that
//! favours low cost, and the rest are discarded. Everything is generic over
//! the floating point type; aliases for `f64` and `f32` are provided below.

// `!(a < b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmarks;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod objective;
pub mod rng;
mod scalar;
pub mod subalgorithms;
pub mod tbo;

pub use benchmarks::{make_benchmark, reference_optimum, Benchmark, BenchmarkId};
pub use error::{Error, Result};
pub use geometry::{region_size, region_volume, uniform_in, Interval, Point, Region};
pub use objective::{quantize, Objective};
pub use rng::RngStream;
pub use scalar::Scalar;
pub use subalgorithms::{run_subalgorithm, Engine, EngineKind, SearchResult, SubAlgorithm, SubAlgorithmConfig};
pub use tbo::{run_tbo, required_depth, TboConfig, TboResult, TboVariant};

pub type Point64 = Point<f64>;
pub type Region64 = Region<f64>;
pub type Objective64 = Objective<f64>;
pub type SubAlgorithmConfig64 = SubAlgorithmConfig<f64>;
pub type TboConfig64 = TboConfig<f64>;
pub type TboResult64 = TboResult<f64>;

pub type Point32 = Point<f32>;
pub type Region32 = Region<f32>;
pub type Objective32 = Objective<f32>;
pub type SubAlgorithmConfig32 = SubAlgorithmConfig<f32>;
pub type TboConfig32 = TboConfig<f32>;
pub type TboResult32 = TboResult<f32>;
