pub mod arch;
pub mod cli;
pub mod compression;
pub mod error;
pub mod media;
pub mod runtime;
pub mod tensor;
pub mod trainer;

pub use error::{Error, Result};
