//! Monte Carlo verification, file formats and the command-line front end
//! for conservative lattice random walks. The samplers and closed forms live
//! in [`conwalk_core`], re-exported here as [`core`].

#![warn(missing_docs)]
// `!(x <= t)` style guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub use conwalk_core as core;

pub mod cli;
mod error;
pub mod formats;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
