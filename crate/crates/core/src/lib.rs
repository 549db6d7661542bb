//! Numerical experiments on discrete groups acting on rank-one model spaces:
//! closed-form geometry, Schottky and free-group presentations, orbit
//! counting, Patterson-Sullivan measures, and mixing/equidistribution
//! diagnostics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod format;
pub mod groups;
pub mod orbit;
pub mod presets;
pub mod psmeasure;
pub mod sampling;
pub mod spaces;
pub mod word;

pub use error::{Error, Result};
