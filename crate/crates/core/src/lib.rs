//! Shift-periodic interval maps and the random walks they generate.
//!
//! A map `F: R -> R` is shift-periodic when `F(x + 1) = F(x) + 1`. The
//! fractional part of an orbit evolves under the restricted map
//! `F_r(x) = {F(x)}` while the integer parts of the images accumulate into a
//! walk on `Z`. This crate provides the map representation, the walk and its
//! transition probabilities, the conjugacy that turns the walk into one with
//! independent increments, transfer operators for the invariant and
//! conditionally invariant densities, and the stable and continuous-time
//! scaling limits.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]
#![warn(missing_docs)]

extern crate alloc;

pub mod conjugacy;
mod error;
pub mod limits;
pub mod maps;
pub mod math;
pub mod rng;
pub mod stats;
pub mod transfer;
pub mod walk;

pub use error::{Error, Result};
pub use maps::{ExtendedReal, MonotoneBranch, Orientation, ShiftPeriodicMap};
