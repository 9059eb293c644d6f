//! Lehmer-code and permutation search spaces, theoretical benchmarks,
//! LOP/QAP instances, elitist search heuristics and an experiment harness.

pub mod algorithms;
pub mod benchmarks;
pub mod error;
pub mod experiments;
pub mod lehmer;
pub mod perm;
pub mod problems;

pub use benchmarks::{Benchmark, Direction, FitnessValue, Objective};
pub use error::{Error, Result};
pub use lehmer::{decode, encode, LehmerCode};
pub use perm::{MoveScheme, Permutation};
