//! Pseudospectral laboratory for the one-dimensional rotating shallow water
//! system and its diffusive regularization.

pub mod error;
mod fft;
pub mod grid;
pub mod model;
pub mod diagnostics;
pub mod sym3;

pub use error::{Result, RswError};
