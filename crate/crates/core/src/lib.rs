//! Shape-constrained symbolic regression.
//!
//! Candidate models are certified against prior-knowledge constraints (output
//! bounds, monotonicity) by propagating interval bounds through the model and
//! its symbolic partial derivatives over the whole input box. Two solvers are
//! provided: a tree-based genetic programming system with optional
//! Levenberg-Marquardt parameter tuning ([`gp`]) and the
//! Interaction-Transformation evolutionary algorithm with its feasible /
//! infeasible two-population variant ([`itea`]).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the experiment
//! harness and the command line live in the `shapesr` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod constraints;
pub mod data;
mod error;
pub mod expr;
pub mod fitness;
pub mod gp;
pub mod interval;
pub mod itea;
pub mod linalg;
pub mod localopt;
pub mod math;
pub mod problems;
pub mod stats;

pub use constraints::{
    ConstraintOp, ConstraintSet, Feasibility, ShapeConstraint, ShapeModel, Sign,
};
pub use data::{Dataset, Matrix};
pub use error::Error;
pub use expr::Expr;
pub use fitness::{Model, ScaledModel, Scaling};
pub use interval::{Domain, Interval, UnaryFn};
pub use itea::{ItExpression, ItTerm, Transform};

/// Deterministic, portable RNG used by every stochastic routine.
pub type Rng = rand_chacha::ChaCha8Rng;

pub type Result<T> = core::result::Result<T, Error>;

/// Builds the crate RNG from a 64-bit seed.
pub fn seeded_rng(seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(seed)
}
