pub mod catalog;
pub mod characters;
pub mod cli;
pub mod duality;
pub mod error;
pub mod field;
pub mod fourier;
pub mod func_eq;
pub mod grid;
pub mod poly;
pub mod report;

pub use error::{Error, Result};
