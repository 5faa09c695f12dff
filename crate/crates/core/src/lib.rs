//! Divide-and-conquer quantum algorithms simulated classically with exact
//! cost accounting.

pub mod costmodel;
pub mod error;
pub mod ext;
pub mod frameworks;
pub mod geometry;
pub mod harness;
pub mod lds;
pub mod matrix;
pub mod oracle;
pub mod oracles;
pub mod qprimitives;
pub mod strings;

pub use error::{Error, Result};
