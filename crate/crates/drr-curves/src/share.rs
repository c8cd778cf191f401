//! Guaranteed service share of one flow and the residual service curve.
//!
//! Inverting the total-work function answers: out of `y` bits served to the
//! aggregate, how many were necessarily for flow `i`? The inverse has a
//! closed form: a unit-rate ramp smoothed through the round-robin staircase
//! (one own quantum per full cycle) plus the partial credit of the first
//! round, capped at one quantum minus the worst residual deficit. Composing
//! the share with the aggregate service curve gives the residual strict
//! service curve of the flow.

use std::collections::BTreeMap;

use minplus::build::{constant, identity, make_rate_latency, smoothed_stair};
use minplus::ops::{add, compose, lower_pseudo_inverse, min2};
use minplus::rat::int;
use minplus::{PwFunction, Rat};
use num_traits::Zero;

use crate::config::{DrrConfig, SubsetMask};
use crate::interference::{
    aggregate_work_value, interference_on, service_horizon_to,
};
use crate::{Error, Result};

/// Guaranteed share of flow `i` against the rival set `mask`, as a function
/// of the service delivered to the whole set (flow plus rivals). Defined on
/// `[0, Y]` where `Y` is the total work at the point the total-work function
/// reaches `reach`, so the share covers at least `[0, reach]`.
pub fn service_share_to(
    cfg: &DrrConfig,
    i: usize,
    mask: SubsetMask,
    reach: &Rat,
) -> Result<PwFunction> {
    cfg.check_mask(i, mask)?;
    if *reach < Rat::zero() {
        return Err(Error::InvalidConfig(format!(
            "share reach must be nonnegative, got {reach}"
        )));
    }
    let x_star = service_horizon_to(cfg, i, mask, reach)?;
    let y_end = aggregate_work_value(cfg, i, mask, &x_star)?;
    let first_round = aggregate_work_value(cfg, i, mask, &Rat::zero())?;
    let own_credit = cfg.quantum(i) - cfg.d_max(i);
    let full_round = aggregate_work_value(cfg, i, mask, &own_credit)?;

    // Full cycles: a unit ramp delayed by the first complete round, smoothed
    // through a staircase of one own quantum per cycle of all quanta.
    let ramp_full = make_rate_latency(&int(1), &full_round, y_end.clone())?;
    let cycles = smoothed_stair(
        cfg.quantum(i),
        &cfg.q_tot_with(i, mask),
        ramp_full.value_end(),
    )?;
    let term_cycles = compose(&cycles, &ramp_full)?;

    // Partial credit of the opening round, at most one quantum minus the
    // worst residual deficit.
    let ramp_first = make_rate_latency(&int(1), &first_round, y_end.clone())?;
    let cap = constant(own_credit, y_end)?;
    let term_first = min2(&ramp_first, &cap)?;

    Ok(add(&term_cycles, &term_first)?)
}

/// [`service_share_to`] with the top of the aggregate service curve as the
/// reach, enough to compose the share with the aggregate curve itself.
pub fn service_share_subset(cfg: &DrrConfig, i: usize, mask: SubsetMask) -> Result<PwFunction> {
    service_share_to(cfg, i, mask, &cfg.beta().value_end())
}

/// [`service_share_subset`] against the full rival set.
pub fn service_share(cfg: &DrrConfig, i: usize) -> Result<PwFunction> {
    cfg.check_flow(i)?;
    service_share_subset(cfg, i, cfg.rivals(i)?)
}

/// Residual strict service curve of flow `i`: the guaranteed share composed
/// with the aggregate strict service curve, over time.
pub fn flow_service_curve(cfg: &DrrConfig, i: usize) -> Result<PwFunction> {
    let share = service_share(cfg, i)?;
    Ok(compose(&share, cfg.beta())?)
}

/// Residual service curve built from caller-supplied per-rival interference
/// bounds instead of the worst-case staircases.
///
/// `bounds` must hold one wide-sense increasing curve per rival of `i`, all
/// on a common service-domain horizon, each dominating the worst-case
/// staircase (a lower interference bound would be unsound, so it is
/// rejected). Replacing a staircase with a tighter upper bound on what the
/// rival can actually send yields a larger, still valid, residual curve.
pub fn service_curve_from_interference_bounds(
    cfg: &DrrConfig,
    i: usize,
    bounds: &BTreeMap<usize, PwFunction>,
) -> Result<PwFunction> {
    cfg.check_flow(i)?;
    let rivals = cfg.rivals(i)?;
    if bounds.len() != rivals.len() || !rivals.iter().all(|j| bounds.contains_key(&j)) {
        let have: Vec<usize> = bounds.keys().copied().collect();
        return Err(Error::BadSubset(format!(
            "expected one interference bound per rival {:?}, got {:?}",
            rivals.iter().collect::<Vec<_>>(),
            have
        )));
    }
    let mut horizon: Option<&Rat> = None;
    for (j, b) in bounds {
        b.require_nondecreasing("interference bound").map_err(Error::Curve)?;
        match horizon {
            None => horizon = Some(b.horizon()),
            Some(h) if h == b.horizon() => {}
            Some(h) => {
                return Err(Error::BadSubset(format!(
                    "interference bounds disagree on their horizon: {} vs {} (flow {})",
                    h,
                    b.horizon(),
                    j
                )))
            }
        }
    }
    let horizon = horizon.expect("at least one rival").clone();

    let mut work = identity(horizon.clone())?;
    for (j, b) in bounds {
        // Soundness: the bound must dominate the exact staircase everywhere.
        let exact = interference_on(cfg, i, *j, &horizon)?;
        if min2(b, &exact)? != exact {
            return Err(Error::BoundBelowExact { rival: *j });
        }
        work = add(&work, b)?;
    }

    let reach = cfg.beta().value_end();
    if work.value_end() < reach {
        return Err(Error::InvalidConfig(format!(
            "interference bounds stop at total work {}, below the aggregate curve reach {}",
            work.value_end(),
            reach
        )));
    }
    let share = lower_pseudo_inverse(&work)?;
    Ok(compose(&share, cfg.beta())?)
}
