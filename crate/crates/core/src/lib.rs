//! Spectral toolkit for Schrödinger operators with a magnetic step field.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// index loops read closer to the stencils they implement
#![allow(clippy::needless_range_loop)]

pub mod bandmin;
pub mod curvature;
pub mod error;
pub mod glfields;
pub mod moments;
pub mod optimize;
pub mod robin;
pub mod specdisc;
pub mod stepband;
pub mod verify;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
