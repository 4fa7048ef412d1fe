pub mod basis;
pub mod channels;
pub mod cli;
pub mod ebt;
pub mod error;
pub mod extremality;
pub mod linalg;
pub mod states;

pub use error::{Error, Result};
