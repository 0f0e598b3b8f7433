pub mod cli;
pub mod error;
pub mod io;
pub mod layouts;
pub mod optimize;
pub mod rng;
pub mod sar;
pub mod scan;
pub mod sim;
pub mod spatial;
pub mod weights;

pub use error::{Error, Result};
