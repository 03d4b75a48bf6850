//! Closed forms for Hamiltonians in the su(2) and su(1,1) algebras.

mod su11;
mod su2;

pub use su11::{Su11Case, Su11Params, TransformedCoeffs, TruncatedRun};
pub use su2::Su2Params;

use crate::error::{Result, SpreadError};

fn check_nonnegative(name: &'static str, x: f64) -> Result<()> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(SpreadError::invalid(
            name,
            format!("must be finite and nonnegative, got {x}"),
        ));
    }
    Ok(())
}

fn check_positive(name: &'static str, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(SpreadError::invalid(
            name,
            format!("must be finite and positive, got {x}"),
        ));
    }
    Ok(())
}
