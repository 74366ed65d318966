pub mod error;
pub mod fuzz;
pub mod gap;
pub mod generator;
pub mod io;
pub mod linalg;
pub mod models;
pub mod pipeline;
pub mod realop;
pub mod sampling;
pub mod standardize;
pub mod williamson;

pub use error::{Error, ErrorKind, Result};
