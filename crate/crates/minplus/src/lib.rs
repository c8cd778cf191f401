//! Exact algebra of piecewise-linear functions on a finite horizon.
//!
//! Functions are represented as ordered segments over `[0, horizon]` with
//! explicit jumps (a segment stores both the attained value at its start and
//! the right limit there) and all arithmetic is exact rational: no floats
//! anywhere except in the CSV export.
//!
//! The crate provides the operator families needed by worst-case delay
//! analysis: pointwise lattice/arithmetic operators, min-plus and max-plus
//! convolution, min-plus deconvolution over a bounded sup window, lower and
//! upper pseudo-inverses, non-decreasing and super-additive closures,
//! function composition, horizontal deviation, and crossing detection.

pub mod bound;
pub mod build;
pub mod csv;
pub mod func;
pub mod ops;
mod pieces;
pub mod rat;

pub use bound::{horizontal_deviation, sufficient_horizon};
pub use func::{PwFunction, Segment, Tail};
pub use ops::{
    add, compose, lower_pseudo_inverse, max2, max_of, max_plus_convolution, min2, min_of,
    min_plus_convolution, min_plus_deconvolution, nondecreasing_closure,
    nonneg_nondecreasing_closure, scale_x, scale_y, sub, super_additive_closure,
    upper_pseudo_inverse,
};
pub use rat::Rat;

/// Horizon bookkeeping for deconvolution and iteration: `t_star` is a time
/// beyond which every arrival curve in play is dominated by its service
/// curve, so sup windows and curve domains can be truncated there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HorizonPolicy {
    pub t_star: Rat,
}

impl HorizonPolicy {
    pub fn new(t_star: Rat) -> Result<Self> {
        if t_star <= rat::int(0) {
            return Err(Error::InvalidParameter(format!(
                "horizon must be positive, got {t_star}"
            )));
        }
        Ok(HorizonPolicy { t_star })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("horizon mismatch: {0} vs {1}")]
    HorizonMismatch(String, String),
    #[error("argument {arg} outside represented domain [0, {horizon}]")]
    OutsideDomain { arg: String, horizon: String },
    #[error("function not defined far enough: needs [0, {needed}], has [0, {has}]")]
    NotDefinedFarEnough { needed: String, has: String },
    #[error("expected a non-decreasing function ({0})")]
    NotNondecreasing(String),
    #[error("outer function not defined on inner's value range: needs {needed}, has {has}")]
    ComposeDomain { needed: String, has: String },
    #[error("no crossing within represented horizon")]
    NoCrossing,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid segment structure: {0}")]
    InvalidSegments(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
