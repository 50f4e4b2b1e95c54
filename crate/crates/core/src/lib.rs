//! Open-world evaluation lab for knowledge graph completion.
//!
//! The crate bundles a closed-world kinship KG generator, open-world split
//! machinery, filtered ranking metrics, closed-form expectations of those
//! metrics under random fact missing, a Monte Carlo simulator of the same
//! probability model, and a parametric oracle model that drives sparse vs.
//! full evaluation on generated graphs.

pub mod analytic;
pub mod error;
pub mod grid;
pub mod kg;
pub mod metrics;
pub mod oracle;
pub mod seed;
pub mod sim;
pub mod split;

pub use error::{Error, Result};
