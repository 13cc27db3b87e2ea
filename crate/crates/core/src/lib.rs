pub mod error;
pub mod gaps;
pub mod harness;
pub mod linalg;
pub mod problems;
pub mod rng;
pub mod solvers;
pub mod subproblems;

pub use error::{Error, Result};
