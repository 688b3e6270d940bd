// `!(x > 0.0)` style checks also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod grid;
pub mod mittag_leffler;
pub mod potentials;
pub mod solver;
pub mod splitting;

pub use error::{Error, Result};
