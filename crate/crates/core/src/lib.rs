pub mod ensemble;
pub mod error;
pub mod estimation;
pub mod harness;
pub mod hermitian;
pub mod stats;
pub mod symmetric;

pub use error::{Error, Result};
