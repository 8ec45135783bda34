pub mod channels;
pub mod error;
pub mod measures;
pub mod protocols;
pub mod random;
pub mod states;
pub mod sweep;
pub mod tensor;

pub use error::{Error, Result};
