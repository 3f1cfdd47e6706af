//! File formats, the experiment harness and the command line for
//! shape-constrained symbolic regression on top of [`shapesr_core`].

pub mod csvio;
mod error;
pub mod experiment;
pub mod model;
pub mod problem;
pub mod report;

pub use error::{Error, Result};
pub use experiment::{run_batch, run_once, Algorithm, RunOptions, RunRecord};
pub use model::{ModelFile, SavedModel};
pub use problem::Problem;
