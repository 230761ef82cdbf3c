pub mod battery;
pub mod error;
pub mod inputs;
pub mod orthopoly;
pub mod pce;
pub mod pipeline;

pub use error::{Error, Result};
