//! Worst-case interference of rival flows and the aggregate-work function.
//!
//! While flow `i` stays backlogged, a rival `j` can receive at most
//!
//! ```text
//! phi_ij(x) = floor((x + d_i) / Q_i) * Q_j + Q_j + d_j
//! ```
//!
//! bits of service before flow `i` has received `x` bits: each full round of
//! `i` (paced by its quantum and worst residual deficit) lets `j` drain one
//! quantum, plus the head start of one quantum and one residual deficit.
//! Summing over a rival set `J` and adding the flow's own `x` gives the
//! total-work function `psi`, whose pseudo-inverse is the share of service
//! guaranteed to flow `i`.

use minplus::build::identity;
use minplus::ops::add;
use minplus::rat::{big, floor_int, ceil_int};
use minplus::{PwFunction, Rat, Segment, Tail};
use num_traits::Zero;

use crate::config::{DrrConfig, SubsetMask};
use crate::Result;

/// Right-continuous staircase: `value0` on `[0, first)`, then a jump of
/// `jump` at `first + k * period` for every k >= 0 (the jump value is
/// attained). Requires `first > 0` and `period > 0`.
fn right_continuous_stair(
    value0: &Rat,
    jump: &Rat,
    first: &Rat,
    period: &Rat,
    horizon: &Rat,
) -> Result<PwFunction> {
    debug_assert!(*first > Rat::zero() && *period > Rat::zero());
    let mut segs = vec![Segment::cont(Rat::zero(), value0.clone(), Rat::zero())];
    let mut x = first.clone();
    let mut v = value0 + jump;
    while x <= *horizon {
        segs.push(Segment::cont(x.clone(), v.clone(), Rat::zero()));
        x += period;
        v += jump;
    }
    Ok(PwFunction::new(horizon.clone(), segs, Tail::Undefined)?)
}

/// The interference staircase of rival `j` against flow `i` on a custom
/// service-domain horizon.
pub(crate) fn interference_on(
    cfg: &DrrConfig,
    i: usize,
    j: usize,
    horizon: &Rat,
) -> Result<PwFunction> {
    let d_i = cfg.d_max(i);
    let d_j = cfg.d_max(j);
    let q_i = cfg.quantum(i);
    let q_j = cfg.quantum(j);
    // Jumps where (x + d_i) crosses a multiple of Q_i, first at Q_i - d_i.
    right_continuous_stair(&(q_j + &d_j), q_j, &(q_i - &d_i), q_i, horizon)
}

/// Maximum service rival `j` can steal while flow `i` stays backlogged,
/// as a function of the service already granted to flow `i`, materialized
/// up to the point where the total-work function reaches the top of the
/// aggregate service curve.
pub fn max_interference(cfg: &DrrConfig, i: usize, j: usize) -> Result<PwFunction> {
    cfg.check_pair(i, j)?;
    let horizon = service_horizon(cfg, i)?;
    interference_on(cfg, i, j, &horizon)
}

/// [`max_interference`] on a caller-chosen service-domain horizon, for
/// consumers that compose the staircase with curves of their own reach.
pub fn max_interference_on(
    cfg: &DrrConfig,
    i: usize,
    j: usize,
    horizon: &Rat,
) -> Result<PwFunction> {
    cfg.check_pair(i, j)?;
    if *horizon < Rat::zero() {
        return Err(crate::Error::InvalidConfig(format!(
            "interference horizon must be nonnegative, got {horizon}"
        )));
    }
    interference_on(cfg, i, j, horizon)
}

/// Scalar evaluation of the total-work function of flow `i` against the
/// rival set `mask`: `x` plus every rival's interference staircase at `x`.
pub fn aggregate_work_value(cfg: &DrrConfig, i: usize, mask: SubsetMask, x: &Rat) -> Result<Rat> {
    cfg.check_mask(i, mask)?;
    if *x < Rat::zero() {
        return Err(crate::Error::InvalidConfig(format!(
            "total-work function evaluated at negative service {x}"
        )));
    }
    let d_i = cfg.d_max(i);
    let rounds = big(floor_int(&((x + &d_i) / cfg.quantum(i))));
    let mut total = x.clone();
    for j in mask.iter() {
        total += &rounds * cfg.quantum(j) + cfg.quantum(j) + cfg.d_max(j);
    }
    Ok(total)
}

/// Left limit of the total-work function at `x`: rounds count only when
/// they complete strictly below `x`. At `x = 0` the attained value is
/// returned, as the domain starts there.
pub fn aggregate_work_left_value(
    cfg: &DrrConfig,
    i: usize,
    mask: SubsetMask,
    x: &Rat,
) -> Result<Rat> {
    cfg.check_mask(i, mask)?;
    if *x < Rat::zero() {
        return Err(crate::Error::InvalidConfig(format!(
            "total-work function evaluated at negative service {x}"
        )));
    }
    let d_i = cfg.d_max(i);
    let mut rounds = big(ceil_int(&((x + &d_i) / cfg.quantum(i)))) - Rat::from_integer(1.into());
    if rounds < Rat::zero() {
        rounds = Rat::zero();
    }
    let mut total = x.clone();
    for j in mask.iter() {
        total += &rounds * cfg.quantum(j) + cfg.quantum(j) + cfg.d_max(j);
    }
    Ok(total)
}

/// Smallest service amount `x` at which the total-work function of flow `i`
/// against `mask` reaches the target `y`. Curves over the service domain
/// only need to be materialized up to this point.
pub fn service_horizon_to(cfg: &DrrConfig, i: usize, mask: SubsetMask, y: &Rat) -> Result<Rat> {
    cfg.check_mask(i, mask)?;
    let base = aggregate_work_value(cfg, i, mask, &Rat::zero())?;
    let gap = y - &base;
    if gap <= Rat::zero() {
        return Ok(Rat::zero());
    }
    let d_i = cfg.d_max(i);
    let q_i = cfg.quantum(i);
    let mut step = Rat::zero();
    for j in mask.iter() {
        step += cfg.quantum(j);
    }
    // Between jumps the function climbs at slope 1; each jump adds `step`.
    // The crossing sits in the stretch whose one-sided supremum first meets
    // the gap, either inside the stretch or on the jump that opens it.
    let period = q_i + &step;
    let k = {
        let quot = (&gap + &step + &d_i) / &period;
        let k = big(ceil_int(&quot)) - Rat::from_integer(1.into());
        if k < Rat::zero() {
            Rat::zero()
        } else {
            k
        }
    };
    let interior = &gap - &k * &step;
    let jump_at = &k * q_i - &d_i;
    Ok(if interior >= jump_at { interior } else { jump_at })
}

/// [`service_horizon_to`] with the top of the aggregate service curve as
/// the target.
pub fn service_horizon_subset(cfg: &DrrConfig, i: usize, mask: SubsetMask) -> Result<Rat> {
    service_horizon_to(cfg, i, mask, &cfg.beta().value_end())
}

/// [`service_horizon_subset`] against the full rival set.
pub fn service_horizon(cfg: &DrrConfig, i: usize) -> Result<Rat> {
    service_horizon_subset(cfg, i, cfg.rivals(i)?)
}

/// Total-work function of flow `i` against the rival set `mask`: the service
/// the aggregate must deliver so that flow `i` is guaranteed `x` bits, as a
/// curve over `x`. Identity plus all rival staircases, materialized on the
/// subset's own service horizon.
pub fn aggregate_work_subset(cfg: &DrrConfig, i: usize, mask: SubsetMask) -> Result<PwFunction> {
    cfg.check_mask(i, mask)?;
    let horizon = service_horizon_subset(cfg, i, mask)?;
    let mut acc = identity(horizon.clone())?;
    for j in mask.iter() {
        acc = add(&acc, &interference_on(cfg, i, j, &horizon)?)?;
    }
    Ok(acc)
}

/// [`aggregate_work_subset`] against the full rival set.
pub fn aggregate_work(cfg: &DrrConfig, i: usize) -> Result<PwFunction> {
    cfg.check_flow(i)?;
    aggregate_work_subset(cfg, i, cfg.rivals(i)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use minplus::build::make_rate_latency;
    use minplus::rat::{frac, int};

    /// Three flows with 199-byte quanta, 100-byte packets, byte granularity,
    /// served at 100 Mb/s: all constants in bits and seconds.
    fn three_equal_flows() -> DrrConfig {
        let beta = make_rate_latency(&int(100_000_000), &int(0), frac(1, 1000)).unwrap();
        DrrConfig::new(
            vec![int(1592), int(1592), int(1592)],
            vec![int(800), int(800), int(800)],
            int(8),
            beta,
        )
        .unwrap()
    }

    #[test]
    fn interference_staircase_anchors() {
        let cfg = three_equal_flows();
        let phi = max_interference(&cfg, 0, 1).unwrap();
        // One quantum plus one residual deficit before any service.
        assert_eq!(phi.eval(&int(0)).unwrap(), int(2384));
        // After one full quantum of own service, one more rival quantum.
        assert_eq!(phi.eval(&int(800)).unwrap(), int(3976));
        assert_eq!(phi.left_limit(&int(800)).unwrap(), int(2384));
        assert_eq!(phi.eval(&int(2392)).unwrap(), int(5568));
    }

    #[test]
    fn total_work_matches_hand_values() {
        let cfg = three_equal_flows();
        let rivals = cfg.rivals(0).unwrap();
        assert_eq!(
            aggregate_work_value(&cfg, 0, rivals, &int(0)).unwrap(),
            int(4768)
        );
        assert_eq!(
            aggregate_work_value(&cfg, 0, rivals, &int(800)).unwrap(),
            int(8752)
        );
        let curve = aggregate_work(&cfg, 0).unwrap();
        assert_eq!(curve.eval(&int(800)).unwrap(), int(8752));
        assert_eq!(curve.eval(&int(0)).unwrap(), int(4768));
        assert_eq!(curve.left_limit(&int(800)).unwrap(), int(2384 * 2 + 800));
    }

    #[test]
    fn horizon_is_exact_preimage() {
        let cfg = three_equal_flows();
        let rivals = cfg.rivals(0).unwrap();
        // The aggregate curve tops out at 10^8 * 10^-3 = 100000 bits.
        let x = service_horizon(&cfg, 0).unwrap();
        let reach = aggregate_work_value(&cfg, 0, rivals, &x).unwrap();
        assert!(reach >= int(100_000));
        // Just below the horizon the total work stays short of the top.
        let eps = frac(1, 1_000_000);
        let before = aggregate_work_value(&cfg, 0, rivals, &(&x - &eps)).unwrap();
        assert!(before < int(100_000));
    }

    #[test]
    fn horizon_lands_on_jump_when_crossing_is_not_interior() {
        // One rival with a huge quantum: the crossing happens on a jump.
        let beta = make_rate_latency(&int(1), &int(0), int(6000)).unwrap();
        let cfg = DrrConfig::new(
            vec![int(100), int(5000)],
            vec![int(100), int(5000)],
            int(100),
            beta,
        )
        .unwrap();
        let x = service_horizon(&cfg, 0).unwrap();
        // Work at 0 is 5000 + 4900 = 9900 >= 6000 already.
        assert_eq!(x, int(0));
        let beta2 = make_rate_latency(&int(1), &int(0), int(20_000)).unwrap();
        let cfg2 = DrrConfig::new(
            vec![int(100), int(5000)],
            vec![int(100), int(5000)],
            int(100),
            beta2,
        )
        .unwrap();
        // Gap 20000 - 9900 = 10100; one jump of 5000 at x = 100 reaches
        // 100 + 5000 = 5100 < 10100, second jump at 200 reaches 10200.
        let x2 = service_horizon_subset(&cfg2, 0, cfg2.rivals(0).unwrap()).unwrap();
        assert_eq!(x2, int(200));
        let reach = aggregate_work_value(&cfg2, 0, cfg2.rivals(0).unwrap(), &x2).unwrap();
        assert!(reach >= int(20_000));
        let before =
            aggregate_work_value(&cfg2, 0, cfg2.rivals(0).unwrap(), &frac(19_999, 100)).unwrap();
        assert!(before < int(20_000));
    }

    #[test]
    fn horizon_to_extends_past_the_aggregate_reach() {
        let cfg = three_equal_flows();
        let rivals = cfg.rivals(0).unwrap();
        // Twice the aggregate reach needs strictly more own service, and the
        // total work there covers the target.
        let base = service_horizon(&cfg, 0).unwrap();
        let far = service_horizon_to(&cfg, 0, rivals, &int(200_000)).unwrap();
        assert!(far > base);
        let reach = aggregate_work_value(&cfg, 0, rivals, &far).unwrap();
        assert!(reach >= int(200_000));
        let eps = frac(1, 1_000_000);
        let before = aggregate_work_value(&cfg, 0, rivals, &(&far - &eps)).unwrap();
        assert!(before < int(200_000));
    }

    #[test]
    fn custom_horizon_staircase_matches_the_default() {
        let cfg = three_equal_flows();
        let default = max_interference(&cfg, 0, 1).unwrap();
        let wider = max_interference_on(&cfg, 0, 1, &(default.horizon() * int(2))).unwrap();
        assert_eq!(wider.restrict(default.horizon()).unwrap(), default);
        assert!(max_interference_on(&cfg, 0, 1, &int(-1)).is_err());
    }

    #[test]
    fn left_value_excludes_the_jump() {
        let cfg = three_equal_flows();
        let rivals = cfg.rivals(0).unwrap();
        // 800 sits exactly on a round completion: the left limit excludes it.
        assert_eq!(
            aggregate_work_left_value(&cfg, 0, rivals, &int(800)).unwrap(),
            int(5568)
        );
        assert_eq!(
            aggregate_work_value(&cfg, 0, rivals, &int(800)).unwrap(),
            int(8752)
        );
        // Off the jump, both sides agree.
        assert_eq!(
            aggregate_work_left_value(&cfg, 0, rivals, &int(900)).unwrap(),
            aggregate_work_value(&cfg, 0, rivals, &int(900)).unwrap()
        );
        assert_eq!(
            aggregate_work_left_value(&cfg, 0, rivals, &Rat::zero()).unwrap(),
            int(4768)
        );
    }

    #[test]
    fn empty_rival_set_gives_identity_work() {
        let cfg = three_equal_flows();
        let work = aggregate_work_subset(&cfg, 0, SubsetMask::EMPTY).unwrap();
        let h = work.horizon().clone();
        assert_eq!(h, int(100_000));
        assert_eq!(work.eval(&int(12_345)).unwrap(), int(12_345));
    }

    #[test]
    fn rejects_self_interference_and_bad_indexes() {
        let cfg = three_equal_flows();
        assert!(max_interference(&cfg, 1, 1).is_err());
        assert!(max_interference(&cfg, 0, 7).is_err());
        assert!(service_horizon(&cfg, 9).is_err());
    }
}
