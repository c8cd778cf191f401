//! Closed-form delay bounds for common arrival shapes, and the
//! corrected-interference comparator bound.
//!
//! When the aggregate is a rate-latency server, the horizontal deviation
//! between the arrival curve and the exact residual service curve can be
//! evaluated with scalar arithmetic. The residual curve is the inverse of
//! the total-work staircase composed with the server, so the deviation at
//! backlog level `y` is `T + psi(y-) / c - t(y)`: between round completions
//! it declines (arrival rates are capped by the guaranteed share), and it
//! jumps up exactly when the accumulated arrivals finish a round. Only the
//! burst instant and round-completion instants compete for the supremum;
//! token buckets need just the first of them, staircase arrivals are scanned
//! under a declining linear envelope that seals the supremum.

use minplus::build::{make_stair, make_token_bucket};
use minplus::ops::min2;
use minplus::rat::{big, floor_int};
use minplus::{horizontal_deviation, PwFunction, Rat};
use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::config::DrrConfig;
use crate::interference::{aggregate_work_left_value, aggregate_work_value};
use crate::relaxations::boyer_curve;
use crate::{Error, Result};

/// Arrival shapes with a closed-form delay bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArrivalShape {
    /// `rate * t + burst` for `t > 0`, zero at the origin.
    TokenBucket { rate: Rat, burst: Rat },
    /// A token bucket smoothed by the packetized line it arrives on:
    /// `min(c * t + l_max_i, rate * t + burst)` where `c` is the rate of the
    /// rate-latency aggregate server and `l_max_i` the flow's maximum packet
    /// size. Requires `burst >= l_max_i`.
    GroupedTokenBucket { rate: Rat, burst: Rat },
    /// `height * ceil(t / period)`.
    Stair { height: Rat, period: Rat },
}

/// Extracts `(rate, latency)` when the curve is exactly `R * max(t - T, 0)`
/// with `R > 0`. The canonical segment form makes the test syntactic.
pub fn as_rate_latency(beta: &PwFunction) -> Option<(Rat, Rat)> {
    match beta.segments() {
        [s]
            if s.start.is_zero()
                && s.value.is_zero()
                && s.right_limit.is_zero()
                && s.slope > Rat::zero() =>
        {
            Some((s.slope.clone(), Rat::zero()))
        }
        [a, b]
            if a.start.is_zero()
                && a.value.is_zero()
                && a.right_limit.is_zero()
                && a.slope.is_zero()
                && b.value.is_zero()
                && b.right_limit.is_zero()
                && b.slope > Rat::zero() =>
        {
            Some((b.slope.clone(), b.start.clone()))
        }
        _ => None,
    }
}

/// Materializes the arrival curve described by `shape` for flow `i`.
pub fn arrival_curve(
    cfg: &DrrConfig,
    i: usize,
    shape: &ArrivalShape,
    horizon: Rat,
) -> Result<PwFunction> {
    cfg.check_flow(i)?;
    match shape {
        ArrivalShape::TokenBucket { rate, burst } => {
            Ok(make_token_bucket(rate, burst, horizon)?)
        }
        ArrivalShape::GroupedTokenBucket { rate, burst } => {
            let (c, _) = as_rate_latency(cfg.beta()).ok_or(Error::ServiceNotRateLatency)?;
            let line = make_token_bucket(&c, cfg.l_max(i), horizon.clone())?;
            let bucket = make_token_bucket(rate, burst, horizon)?;
            Ok(min2(&line, &bucket)?)
        }
        ArrivalShape::Stair { height, period } => Ok(make_stair(height, period, horizon)?),
    }
}

/// `v mod q` in `[0, q)` for non-negative `v` and positive `q`.
fn rat_mod(v: &Rat, q: &Rat) -> Rat {
    v - big(floor_int(&(v / q))) * q
}

fn rat_max(a: Rat, b: Rat) -> Rat {
    if a >= b {
        a
    } else {
        b
    }
}

/// Worst-case delay of flow `i` under `shape`, against the exact residual
/// service curve: equal to the horizontal deviation of the materialized
/// arrival curve from [`crate::flow_service_curve`], evaluated in closed
/// form.
///
/// Requires the aggregate curve to be rate-latency with rate `c`, and the
/// long-run arrival rate to stay within the flow's guaranteed share
/// `(Q_i / sum of quanta) * c`; otherwise the backlogged period need not
/// end and no finite bound exists.
pub fn closed_form_delay(cfg: &DrrConfig, i: usize, shape: &ArrivalShape) -> Result<Rat> {
    cfg.check_flow(i)?;
    let (c, lat) = as_rate_latency(cfg.beta()).ok_or(Error::ServiceNotRateLatency)?;
    let rivals = cfg.rivals(i)?;
    let share_rate = cfg.quantum(i) / cfg.q_tot() * &c;
    let d_i = cfg.d_max(i);
    let q_i = cfg.quantum(i);
    let work = |x: &Rat| aggregate_work_value(cfg, i, rivals, x);
    let work_left = |x: &Rat| aggregate_work_left_value(cfg, i, rivals, x);
    match shape {
        ArrivalShape::TokenBucket { rate, burst } => {
            if *rate < Rat::zero() || *burst < Rat::zero() {
                return Err(Error::InvalidConfig(format!(
                    "token bucket needs rate >= 0 and burst >= 0, got {rate}, {burst}"
                )));
            }
            if *rate > share_rate {
                return Err(Error::RateConditionViolated(format!(
                    "token-bucket rate {rate} exceeds the guaranteed share {share_rate}"
                )));
            }
            if rate.is_zero() && burst.is_zero() {
                // No arrivals at all.
                return Ok(Rat::zero());
            }
            if rate.is_zero() {
                // Arrivals freeze at the burst; a round completing exactly
                // there is never triggered, hence the left limit.
                return Ok(&lat + work_left(burst)? / &c);
            }
            // Candidate 1: right after the burst.
            let at_burst = work(burst)? / &c;
            // Candidate 2: arrivals complete the round the burst left open;
            // later completions never pay more because the rate condition
            // lets the share keep up round per round.
            let gap = q_i - rat_mod(&(burst + &d_i), q_i);
            let tau = &gap / rate;
            let at_round = work(&(burst + &gap))? / &c - &tau;
            Ok(&lat + rat_max(at_burst, at_round))
        }
        ArrivalShape::GroupedTokenBucket { rate, burst } => {
            if *burst < *cfg.l_max(i) {
                return Err(Error::InvalidConfig(format!(
                    "grouped arrival needs burst >= the maximum packet size, got {burst} < {}",
                    cfg.l_max(i)
                )));
            }
            if *rate < Rat::zero() {
                return Err(Error::InvalidConfig(format!(
                    "grouped arrival needs rate >= 0, got {rate}"
                )));
            }
            if *rate >= c {
                return Err(Error::RateConditionViolated(format!(
                    "grouped rate {rate} must stay below the line rate {c}"
                )));
            }
            if *rate > share_rate {
                return Err(Error::RateConditionViolated(format!(
                    "grouped rate {rate} exceeds the guaranteed share {share_rate}"
                )));
            }
            // While the line segment is the envelope, arrivals climb at the
            // server rate and the deviation only grows; the supremum of that
            // phase is reached where the bucket takes over.
            let l = cfg.l_max(i);
            let tau = (burst - l) / (&c - rate);
            let a_tau = &c * &tau + l;
            if rate.is_zero() {
                // The envelope freezes at the burst.
                return Ok(&lat + work_left(&a_tau)? / &c - &tau);
            }
            let at_kink = work(&a_tau)? / &c - &tau;
            // Afterwards the bucket piece behaves like a token bucket whose
            // next round completion is the only remaining competitor.
            let gap = q_i - rat_mod(&(&a_tau + &d_i), q_i);
            let tau_round = &tau + &gap / rate;
            let at_round = work(&(&a_tau + &gap))? / &c - &tau_round;
            Ok(&lat + rat_max(at_kink, at_round))
        }
        ArrivalShape::Stair { height, period } => {
            if *height <= Rat::zero() || *period <= Rat::zero() {
                return Err(Error::InvalidConfig(format!(
                    "staircase needs height > 0 and period > 0, got {height}, {period}"
                )));
            }
            if height / period > share_rate {
                return Err(Error::RateConditionViolated(format!(
                    "staircase rate {} exceeds the guaranteed share {share_rate}",
                    height / period
                )));
            }
            // The deviation right after the m-th step (m steps in, arrivals
            // frozen at m * height until the next one) is
            //   lat + work_left(m * height) / c - (m - 1) * period.
            // Steps sharing a round count decline by the period, so only
            // first-steps-after-a-round-completion compete, but unlike the
            // continuous shapes the overshoot past the round boundary varies
            // from round to round and a later completion can pay more. Scan
            // under the declining envelope
            //   lat + [m*height*(q_tot/q_i) + d_i*s/q_i + base]/c
            //       + period - m*period,
            // which dominates every later candidate; at the exact share
            // rate the envelope is flat and one full residue period of
            // (m * height mod q_i) decides.
            let mut rival_quanta = Rat::zero();
            let mut base = Rat::zero();
            for j in rivals.iter() {
                rival_quanta += cfg.quantum(j);
                base += cfg.quantum(j) + cfg.d_max(j);
            }
            let drift = period - height / &c * (Rat::one() + &rival_quanta / q_i);
            debug_assert!(drift >= Rat::zero());
            let envelope_head =
                (&d_i * &rival_quanta / q_i + &base) / &c + period;
            let residue_period: BigInt = (height / q_i).denom().clone();

            let mut best: Option<Rat> = None;
            let mut m = BigInt::one();
            loop {
                let m_rat = big(m.clone());
                let sent = height * &m_rat;
                let cand = work_left(&sent)? / &c - (&m_rat - Rat::one()) * period;
                if best.as_ref().map_or(true, |b| cand > *b) {
                    best = Some(cand);
                }
                m += 1;
                if drift.is_zero() {
                    if m > residue_period {
                        break;
                    }
                } else {
                    let m_rat = big(m.clone());
                    if &envelope_head - &m_rat * &drift <= *best.as_ref().expect("best set") {
                        break;
                    }
                }
            }
            Ok(&lat + best.expect("at least one candidate"))
        }
    }
}

/// The two-stage comparator bound and its parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SoniBound {
    /// Delay against Boyer's residual curve.
    pub boyer_delay: Rat,
    /// Interference over-counted by the residual-curve analysis: service the
    /// rivals are granted inside the bound window but can never fill.
    pub correction: Rat,
    /// `boyer_delay - correction`.
    pub delay: Rat,
}

/// Delay bound for flow `i` obtained by subtracting provably unused rival
/// service from Boyer's bound, following Soni, Migge, Boyer and Fumey.
///
/// Requires a constant-rate aggregate (`beta(t) = c t`) and one arrival
/// curve per flow; each rival's curve must be defined at least up to the
/// Boyer delay of flow `i`.
pub fn soni_delay_bound(
    cfg: &DrrConfig,
    i: usize,
    arrivals: &[PwFunction],
) -> Result<SoniBound> {
    cfg.check_flow(i)?;
    if arrivals.len() != cfg.flows() {
        return Err(Error::InvalidConfig(format!(
            "{} arrival curves for {} flows",
            arrivals.len(),
            cfg.flows()
        )));
    }
    let (c, lat) = as_rate_latency(cfg.beta()).ok_or(Error::ServiceNotRateLatency)?;
    if !lat.is_zero() {
        return Err(Error::ServiceNotConstantRate);
    }
    for a in arrivals {
        a.require_nondecreasing("arrival curve").map_err(Error::Curve)?;
    }
    let boyer = boyer_curve(cfg, i)?;
    let boyer_delay = horizontal_deviation(&arrivals[i], &boyer)?;

    // Instants when a rival first gets its head start and when full
    // round-robin cycles begin, on a server draining at rate c.
    let rivals = cfg.rivals(i)?;
    let mut head_start = Rat::zero();
    let mut rival_quanta = Rat::zero();
    for j in rivals.iter() {
        head_start += cfg.quantum(j) + cfg.d_max(j);
        rival_quanta += cfg.quantum(j);
    }
    let first_round = &head_start / &c;
    let cycles_from =
        &first_round + (cfg.quantum(i) - cfg.d_max(i) + &rival_quanta) / &c;
    let q_tot = cfg.q_tot();

    let mut correction = Rat::zero();
    for j in rivals.iter() {
        let mut granted = Rat::zero();
        if boyer_delay >= first_round {
            granted += cfg.quantum(j) + cfg.d_max(j);
        }
        if boyer_delay >= cycles_from {
            let full = big(floor_int(&(&c * (&boyer_delay - &cycles_from) / &q_tot)));
            granted += cfg.quantum(j) * (Rat::one() + full);
        }
        let offered = arrivals[j].eval(&boyer_delay)?;
        let unused = &granted - &offered;
        if unused > Rat::zero() {
            correction += unused / &c;
        }
    }
    let delay = &boyer_delay - &correction;
    Ok(SoniBound { boyer_delay, correction, delay })
}
