#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod copulas;
pub mod error;
pub mod estimation;
pub mod factor;
pub mod gaussian;
pub mod math;
pub mod rng;
pub mod stats;
pub mod surface;
pub mod tarch;

pub use error::{Error, Result};
