#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! LOS/NLOS map prediction for a single mmWave cell whose blockers are
//! Poisson-distributed line segments.

pub mod config;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod harness;
pub mod layout_io;
pub mod model;
pub mod par;
pub mod quadrature;

pub use error::{Error, Result};
