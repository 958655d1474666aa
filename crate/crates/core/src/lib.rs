pub mod bounds;
pub mod error;
pub mod gaussian;
pub mod geometry;
pub mod harness;
pub mod links;
mod running;
pub mod solvers;

pub use error::{Error, Result};
