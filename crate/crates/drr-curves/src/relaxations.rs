//! Affine relaxations of the interference staircases and the rate-latency
//! residual curves they induce.
//!
//! Two affine upper bounds on a rival's staircase are available: one that
//! credits rounds fractionally at the long-run rate (tight for large
//! backlogs, used by Boyer's classic bound) and one anchored at the origin
//! with the steepest per-round slope (tight for small backlogs). Their
//! minimum is concave. Pushing each through the share inversion gives
//! closed-form rate-latency residual curves; the pointwise maximum of the
//! two is the best convex relaxation.

use minplus::build::{affine, make_rate_latency};
use minplus::ops::{compose, max2, min2};
use minplus::{PwFunction, Rat};
use num_traits::Zero;

use crate::config::{DrrConfig, SubsetMask};
use crate::Result;

/// Affine bound on the interference of rival `j` against flow `i` with the
/// long-run slope `Q_j / Q_i`: every bit of own service is credited a
/// fractional round immediately.
pub fn interference_bound_max_rate(
    cfg: &DrrConfig,
    i: usize,
    j: usize,
    horizon: Rat,
) -> Result<PwFunction> {
    cfg.check_pair(i, j)?;
    let slope = cfg.quantum(j) / cfg.quantum(i);
    let intercept = &slope * cfg.d_max(i) + cfg.quantum(j) + cfg.d_max(j);
    Ok(affine(&slope, &intercept, horizon)?)
}

/// Affine bound on the interference of rival `j` against flow `i` that is
/// exact at the origin and climbs at `Q_j / (Q_i - d_i)` per own bit: the
/// first round completes after only `Q_i - d_i` own bits.
pub fn interference_bound_min_latency(
    cfg: &DrrConfig,
    i: usize,
    j: usize,
    horizon: Rat,
) -> Result<PwFunction> {
    cfg.check_pair(i, j)?;
    let slope = cfg.quantum(j) / (cfg.quantum(i) - cfg.d_max(i));
    let intercept = cfg.quantum(j) + cfg.d_max(j);
    Ok(affine(&slope, &intercept, horizon)?)
}

/// Pointwise minimum of the two affine bounds; concave and still above the
/// exact staircase.
pub fn interference_bound_concave(
    cfg: &DrrConfig,
    i: usize,
    j: usize,
    horizon: Rat,
) -> Result<PwFunction> {
    let a = interference_bound_max_rate(cfg, i, j, horizon.clone())?;
    let b = interference_bound_min_latency(cfg, i, j, horizon)?;
    Ok(min2(&a, &b)?)
}

/// Rate and latency of the share lower bound induced by the max-rate
/// relaxation against the rival set `mask`: rate `Q_i / sum of quanta`,
/// latency equal to the stacked offsets of the rival bounds.
pub fn max_rate_share_params(cfg: &DrrConfig, i: usize, mask: SubsetMask) -> Result<(Rat, Rat)> {
    cfg.check_mask(i, mask)?;
    let rate = cfg.quantum(i) / cfg.q_tot_with(i, mask);
    let d_i = cfg.d_max(i);
    let mut latency = Rat::zero();
    for j in mask.iter() {
        latency += cfg.quantum(j) / cfg.quantum(i) * &d_i + cfg.quantum(j) + cfg.d_max(j);
    }
    Ok((rate, latency))
}

/// Rate and latency of the share lower bound induced by the min-latency
/// relaxation: rate `(Q_i - d_i) / (sum of quanta - d_i)`, latency equal to
/// one quantum plus one residual deficit per rival.
pub fn min_latency_share_params(cfg: &DrrConfig, i: usize, mask: SubsetMask) -> Result<(Rat, Rat)> {
    cfg.check_mask(i, mask)?;
    let d_i = cfg.d_max(i);
    let own = cfg.quantum(i) - &d_i;
    let rate = &own / (cfg.q_tot_with(i, mask) - &d_i);
    let mut latency = Rat::zero();
    for j in mask.iter() {
        latency += cfg.quantum(j) + cfg.d_max(j);
    }
    Ok((rate, latency))
}

fn rate_latency_residual(cfg: &DrrConfig, rate: Rat, latency: Rat) -> Result<PwFunction> {
    let reach = cfg.beta().value_end();
    let share = make_rate_latency(&rate, &latency, reach)?;
    Ok(compose(&share, cfg.beta())?)
}

/// Boyer's residual service curve for flow `i`: the max-rate share bound
/// composed with the aggregate curve.
pub fn boyer_curve(cfg: &DrrConfig, i: usize) -> Result<PwFunction> {
    cfg.check_flow(i)?;
    let (rate, latency) = max_rate_share_params(cfg, i, cfg.rivals(i)?)?;
    rate_latency_residual(cfg, rate, latency)
}

/// Residual service curve from the min-latency share bound.
pub fn min_latency_curve(cfg: &DrrConfig, i: usize) -> Result<PwFunction> {
    cfg.check_flow(i)?;
    let (rate, latency) = min_latency_share_params(cfg, i, cfg.rivals(i)?)?;
    rate_latency_residual(cfg, rate, latency)
}

/// Pointwise maximum of the two rate-latency residuals: the tightest convex
/// relaxation available in closed form.
pub fn convex_curve(cfg: &DrrConfig, i: usize) -> Result<PwFunction> {
    let a = boyer_curve(cfg, i)?;
    let b = min_latency_curve(cfg, i)?;
    Ok(max2(&a, &b)?)
}

/// Historical sanity alias used in tests: the max-rate latency written as
/// deficit-weighted round-robin start-up cost. Algebraically identical to
/// the latency from [`max_rate_share_params`].
#[cfg(test)]
fn stacked_startup_latency(cfg: &DrrConfig, i: usize) -> Rat {
    let d_i = cfg.d_max(i);
    let q_i = cfg.quantum(i);
    let mut sum_d = Rat::zero();
    let mut sum_q = Rat::zero();
    for j in 0..cfg.flows() {
        if j != i {
            sum_d += cfg.d_max(j);
            sum_q += cfg.quantum(j);
        }
    }
    &sum_d + (minplus::rat::int(1) + &d_i / q_i) * &sum_q
}
