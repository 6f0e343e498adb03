//! Record graphs of random walks, the ordered trees they produce, and the samplers and
//! statistics used to compare them with Galton–Watson families.

pub mod cli;
pub mod codec;
pub mod error;
pub mod increments;
pub mod output;
pub mod recorder;
pub mod samplers;
pub mod stats;
pub mod trees;
pub mod walk_analytics;

pub use error::{Error, Result};
