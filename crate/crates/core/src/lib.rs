//! Samplers, exact oracles and closed-form quantities for conservative
//! (direction-persistent) random walks on the integer lattice `Z^d`.
//!
//! At step `n` the walk keeps its current direction with probability
//! `1 - p_n` and otherwise redraws it uniformly from the `2d` unit vectors
//! (possibly drawing the same one again). The turning probabilities `p_n`
//! come from a [`Schedule`].
//!
//! The crate is `no_std` and only needs `alloc`. File formats, statistical
//! tests and the command line front-end live in the `conwalk` crate.

#![no_std]
#![warn(missing_docs)]
// `!(x > 0.0)` style guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analytics;
mod error;
pub mod oracle;
pub mod rng;
pub mod schedule;
pub mod walk;
pub mod zigzag;

pub use error::{Error, Result};
pub use schedule::{Regime, RegimeClassification, Schedule, ScheduleKind};
pub use walk::{Direction, Path, TurnEvent, WalkState};
