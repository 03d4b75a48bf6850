#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod error;
pub mod linalg;

pub use error::{Result, SpreadError};
pub mod bounds;
pub mod continuum;
pub mod lanczos;
pub mod lie;
pub mod propagate;
pub mod rmt;
pub mod spread;
pub mod system;
