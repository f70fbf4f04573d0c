#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod fields;
pub mod galerkin;
pub mod material;

pub use error::{Error, Result};
