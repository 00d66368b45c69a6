pub mod bloch;
pub mod cli;
pub mod error;
pub mod exec;
pub mod gibbs;
pub mod realspace;
pub mod scan;

pub use error::{Error, Result};
pub use exec::Execution;
