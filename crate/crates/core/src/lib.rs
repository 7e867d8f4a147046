pub mod catalog;
pub mod error;
pub mod indices;
pub mod mec;
pub mod orbit_model;
pub mod rational;
pub mod symplin;

pub use error::{Error, Result};
pub mod suites;
