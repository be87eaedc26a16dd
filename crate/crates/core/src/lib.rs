pub mod cli;
pub mod codec;
pub mod error;
pub mod keying;
pub mod maps;
pub mod sim;

pub use error::{Error, Result};
