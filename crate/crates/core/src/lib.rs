pub mod cauchy;
pub mod cli;
pub mod clifford;
pub mod edm;
pub mod error;
mod linalg;
pub mod grid;
pub mod metric;
pub mod random;
pub mod spinor;

pub use error::{Error, Result};
