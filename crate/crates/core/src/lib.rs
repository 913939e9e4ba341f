//! Discrete decomposable graphical models: log-odds parametrizations,
//! reference priors and cut analysis.

pub mod cli;
pub mod cut;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod io;
pub mod lattice;
pub mod likelihood;
pub mod model;
pub mod oracle;
pub mod prior;
pub mod probs;
pub mod random;
pub mod table;
pub mod theta;
pub mod transform;
pub mod varset;

pub use error::{Error, Result};
