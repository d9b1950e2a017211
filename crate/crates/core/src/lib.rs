//! Projection-based sparsity regularization: a sampler that draws coordinate
//! masks from the weights themselves, the penalties built on those masks,
//! the numerical checks behind them, and a small training stack to compare
//! them against L1/L2.

pub mod analysis;
pub mod cli;
pub mod data;
pub mod error;
pub mod learn;
pub mod numerics;
pub mod penalty;
pub mod sampler;

pub use error::{Error, Result};
