//! Identification, loop shaping and simulation for the rate loops of a
//! quadrotor tail-sitter.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! and the command line live in the companion `vtol` crate.

#![no_std]
// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod attitude;
pub mod control;
pub mod error;
pub mod harness;
pub mod lti;
pub mod plant;
pub mod sysid;

pub use error::{ControlError, HarnessError, LtiError, PlantError, SysIdError};
