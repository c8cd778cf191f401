//! Iterative refinement of per-flow DRR strict service curves.
//!
//! The residual curves of `drr-curves` assume every rival is always ready
//! to spend its whole quantum. When rivals are constrained by arrival
//! curves they cannot, and the slack can be folded back into the flow of
//! interest. Each refinement round bounds every rival's output with a
//! deconvolution against its current service curve, then recomputes each
//! flow's service curve with that interference discount; repeating the map
//! yields a pointwise nondecreasing sequence of strict service curves.
//!
//! Four mapping variants are provided, trading tightness for cost:
//!
//! * [`full_mapping`]: exact shares against every rival subset, with the
//!   complement's output bounds subtracted from the aggregate; exponential
//!   in the flow count but the tightest of the four.
//! * [`simple_mapping`]: one exact share against all rivals, with the
//!   interference slack added to the aggregate; linear cost.
//! * [`convex_full_mapping`] / [`convex_simple_mapping`]: same structure
//!   with the shares replaced by their best rate-latency relaxations.
//! * [`refined_mapping_with_max_service`]: the simple mapping with output
//!   bounds tightened by per-rival maximal service curves.
//!
//! [`iterate`] drives any of them to a fixpoint under a [`StopRule`];
//! [`system_horizon`] computes a time window on which every deconvolution
//! is exact, following the bounded-window protocol of `minplus`.
//!
//! All curves live on a shared window `[0, t*]` (arrival curves on
//! `[0, 2 t*]` so suprema over shifted arguments stay in range). The window
//! truncation of the deconvolution is exact when each arrival curve is
//! subadditive and crosses its flow's service curve within the window; the
//! crossing is checked at run time, subadditivity is the caller's contract
//! (token buckets, staircases and their sums and minima all qualify).

mod dump;
mod horizon;
mod iterate;
mod mapping;
mod types;

pub use dump::{refinement_log, write_history_csv};
pub use horizon::{pad_to_125_grid, system_horizon};
pub use iterate::{delay_bounds, fixpoint_at, iterate};
pub use mapping::{
    convex_full_mapping, convex_simple_mapping, full_mapping, full_mapping_capped,
    refined_mapping_with_max_service, refined_mapping_with_max_service_curves, simple_mapping,
    DEFAULT_SUBSET_CAP,
};
pub use types::{CurveSet, Init, InitTag, Method, StopMode, StopRule};

/// Errors reported by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An underlying curve operation failed.
    #[error(transparent)]
    Curve(#[from] minplus::Error),
    /// A scheduler-level curve construction failed.
    #[error(transparent)]
    Curves(#[from] drr_curves::Error),
    /// An arrival curve has not crossed the named flow's service curve by
    /// the end of the shared window, so the output bound cannot be trusted.
    #[error(
        "window too small: the arrival curve of flow {flow} has not crossed \
         its service curve by the end of the window"
    )]
    HorizonInsufficient { flow: usize },
    /// The named flow's arrival rate is at least its guaranteed long-run
    /// service rate: no window is ever sufficient.
    #[error("unstable system: flow {flow} arrives at least as fast as it is served")]
    Unstable { flow: usize },
    /// Exhaustive subset enumeration was refused.
    #[error(
        "{flows} flows exceed the subset enumeration cap of {cap}; \
         use the simple mapping instead"
    )]
    SubsetCapExceeded { flows: usize, cap: usize },
    /// An iteration produced a curve below its predecessor, which the
    /// theory rules out: a mapping is broken.
    #[error("internal invariant violated: flow {flow} regressed at iteration {iteration}")]
    NonMonotone { flow: usize, iteration: usize },
    /// An iteration produced a curve above the aggregate service curve,
    /// which no single flow can receive: a mapping is broken.
    #[error(
        "internal invariant violated: flow {flow} exceeds the aggregate \
         curve at iteration {iteration}"
    )]
    AboveAggregate { flow: usize, iteration: usize },
    /// Inputs are malformed (wrong counts, mismatched windows, bad rule).
    #[error("invalid input: {0}")]
    BadInput(String),
    /// Writing a curve dump or log failed.
    #[error("dump failed: {0}")]
    Io(#[from] std::io::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
