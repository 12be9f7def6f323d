pub mod analysis;
pub mod config;
pub mod error;
pub mod field;
pub mod integrators;
pub mod probes;
pub mod problem;

pub use error::{Error, Result};
