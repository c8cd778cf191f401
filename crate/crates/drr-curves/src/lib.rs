//! Strict service curves and worst-case delay bounds for Deficit Round-Robin.
//!
//! A DRR scheduler serves `n` flows over a shared link. Flow `i` owns a
//! quantum `Q_i` (credit added per round) and a maximum packet size
//! `l_max_i`. The aggregate output is lower-bounded by a strict service
//! curve `beta`. This crate turns those parameters into per-flow residual
//! service curves and delay bounds:
//!
//! * [`max_interference`] bounds the service stolen by one rival while the
//!   flow of interest stays backlogged; [`aggregate_work`] accumulates those
//!   bounds into the total-work function, and [`service_share`] inverts it.
//! * [`flow_service_curve`] composes the share with the aggregate curve,
//!   yielding the exact residual strict service curve for one flow.
//! * Affine relaxations ([`boyer_curve`], [`min_latency_curve`],
//!   [`convex_curve`]) trade tightness for closed forms.
//! * [`closed_form_delay`] evaluates the exact delay bound without curve
//!   machinery for token-bucket, grouped and staircase arrivals, and
//!   [`soni_delay_bound`] reproduces the corrected-interference comparator.
//! * [`max_service_curve`] bounds the service from above, which later lets
//!   interference bounds be sharpened per rival.
//!
//! All arithmetic is exact rational arithmetic from the `minplus` crate.

mod config;
mod delay;
mod interference;
mod max_service;
mod relaxations;
mod share;

pub use config::{DrrConfig, SubsetMask};
pub use delay::{
    arrival_curve, as_rate_latency, closed_form_delay, soni_delay_bound, ArrivalShape, SoniBound,
};
pub use interference::{
    aggregate_work, aggregate_work_left_value, aggregate_work_subset, aggregate_work_value,
    max_interference, max_interference_on, service_horizon, service_horizon_subset,
    service_horizon_to,
};
pub use max_service::{max_service_curve, max_service_curve_on};
pub use relaxations::{
    boyer_curve, convex_curve, interference_bound_concave, interference_bound_max_rate,
    interference_bound_min_latency, max_rate_share_params, min_latency_curve,
    min_latency_share_params,
};
pub use share::{
    flow_service_curve, service_curve_from_interference_bounds, service_share,
    service_share_subset, service_share_to,
};

/// Errors reported by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An underlying curve operation failed.
    #[error(transparent)]
    Curve(#[from] minplus::Error),
    /// The scheduler configuration is inconsistent.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    /// A flow index does not exist in the configuration.
    #[error("flow index {index} out of range for {flows} flows")]
    FlowOutOfRange { index: usize, flows: usize },
    /// Interference of a flow with itself was requested.
    #[error("flow {0} cannot interfere with itself")]
    SameFlow(usize),
    /// A rival subset is malformed for the given flow.
    #[error("invalid rival subset: {0}")]
    BadSubset(String),
    /// An arrival curve violates the stability condition of a closed form.
    #[error("arrival rate condition violated: {0}")]
    RateConditionViolated(String),
    /// The closed form requires a rate-latency aggregate service curve.
    #[error("aggregate service curve is not rate-latency")]
    ServiceNotRateLatency,
    /// The comparator requires a constant-rate aggregate service curve.
    #[error("aggregate service curve is not a constant-rate server")]
    ServiceNotConstantRate,
    /// A supplied per-rival interference bound is not actually a bound.
    #[error("interference bound for flow {rival} drops below the exact staircase")]
    BoundBelowExact { rival: usize },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
