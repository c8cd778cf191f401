//! Maximal service curves: upper bounds on what a rival can receive while
//! a given flow stays backlogged.
//!
//! While flow `i` is backlogged the scheduler keeps visiting it, so any
//! service granted to rival `j` is interleaved with `i`'s own quantum
//! rounds. Counting the aggregate output that must accompany `x` bits for
//! `j` gives a floor `psi_bar(x)`; inverting it against a line of maximal
//! rate `c` caps `j`'s share of any backlogged window.

use minplus::build::{affine, zero};
use minplus::ops::{compose, max2, min2, upper_pseudo_inverse};
use minplus::{PwFunction, Rat, Segment, Tail};
use num_traits::Zero;

use crate::config::DrrConfig;
use crate::{Error, Result};

/// The least aggregate output the server must have delivered, while flow
/// `i` stays backlogged, by the time rival `j` has received `x` bits:
/// `x` itself plus one full quantum of `i` per round `j` needed beyond its
/// first access, less the residue `i` may still carry. Left-continuous,
/// slope 1, and negative near the origin where `j`'s head start dominates.
fn rival_work_floor(cfg: &DrrConfig, i: usize, j: usize, x_cap: &Rat) -> Result<PwFunction> {
    let q_i = cfg.quantum(i);
    let q_j = cfg.quantum(j);
    let d_i = cfg.d_max(i);
    let d_j = cfg.d_max(j);
    let base = -(q_i + &d_i);
    let first_right = if d_j.is_zero() { -d_i.clone() } else { base.clone() };
    let mut segs = vec![Segment::new(Rat::zero(), base, first_right, Rat::from_integer(1.into()))];
    let mut m: u64 = 0;
    loop {
        let p = &d_j + Rat::from_integer(m.into()) * q_j;
        if p > *x_cap {
            break;
        }
        if p > Rat::zero() {
            let rounds_below = Rat::from_integer(m.into()) - Rat::from_integer(1.into());
            let attained = &p + &rounds_below * q_i - &d_i;
            let jumped = &attained + q_i;
            segs.push(Segment::new(p, attained, jumped, Rat::from_integer(1.into())));
        }
        m += 1;
    }
    PwFunction::new(x_cap.clone(), segs, Tail::Undefined).map_err(Error::Curve)
}

/// Maximal service curve for rival `j` over backlogged periods of flow `i`
/// at a server of constant maximal rate `c`, materialized on the time
/// window `[0, window]`: the total output within `t` is at most `c t`, and
/// inverting the aggregate-output floor of [`rival_work_floor`] turns that
/// into a cap on `j`'s share.
pub fn max_service_curve_on(
    cfg: &DrrConfig,
    i: usize,
    j: usize,
    c: &Rat,
    window: &Rat,
) -> Result<PwFunction> {
    cfg.check_pair(i, j)?;
    if *c <= Rat::zero() {
        return Err(Error::InvalidConfig(format!(
            "maximal rate must be positive, got {c}"
        )));
    }
    if *window <= Rat::zero() {
        return Err(Error::InvalidConfig(format!(
            "time window must be positive, got {window}"
        )));
    }
    // Enough x-range that the floor's value at the cap exceeds c * window.
    let x_cap = c * window + cfg.d_max(i) + cfg.quantum(j) + cfg.d_max(j);
    let floor = rival_work_floor(cfg, i, j, &x_cap)?;
    let clamped = max2(&floor, &zero(x_cap)?)?;
    let inverse = upper_pseudo_inverse(&clamped)?;
    let line = affine(c, &Rat::zero(), window.clone())?;
    let capped = compose(&inverse, &line)?;
    Ok(min2(&line, &capped)?)
}

/// [`max_service_curve_on`] over the time window of the configured
/// aggregate curve.
pub fn max_service_curve(cfg: &DrrConfig, i: usize, j: usize, c: &Rat) -> Result<PwFunction> {
    max_service_curve_on(cfg, i, j, c, &cfg.beta().horizon().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use minplus::build::make_rate_latency;
    use minplus::rat::int;

    fn two_flow_cfg() -> DrrConfig {
        // Quanta 4 and 2, packets up to 2 and 1, granularity 1, so the
        // residues are d_0 = 1 and d_1 = 0.
        let beta = make_rate_latency(&int(1), &int(0), int(12)).unwrap();
        DrrConfig::new(
            vec![int(4), int(2)],
            vec![int(2), int(1)],
            int(1),
            beta,
        )
        .unwrap()
    }

    #[test]
    fn work_floor_anchors() {
        let cfg = two_flow_cfg();
        let floor = rival_work_floor(&cfg, 0, 1, &int(15)).unwrap();
        // At the origin the rival still owes nothing: one full quantum of
        // flow 0 plus both residues below zero.
        assert_eq!(floor.eval(&int(0)).unwrap(), int(-5));
        // One deficit-free round credit: floor(Q_1 + d_1) = Q_1 + d_1 - d_0.
        assert_eq!(floor.eval(&int(2)).unwrap(), int(1));
        // Left-continuous: the round quantum lands just past each boundary.
        assert_eq!(floor.eval(&int(4)).unwrap(), int(7));
        assert_eq!(floor.eval(&int(5)).unwrap(), int(12));
    }

    #[test]
    fn max_service_hand_values() {
        let cfg = two_flow_cfg();
        let g = max_service_curve(&cfg, 0, 1, &int(1)).unwrap();
        assert_eq!(g.eval(&int(0)).unwrap(), int(0));
        assert_eq!(g.eval(&int(1)).unwrap(), int(1));
        assert_eq!(g.eval(&int(3)).unwrap(), int(2));
        assert_eq!(g.eval(&int(7)).unwrap(), int(4));
        assert_eq!(g.eval(&int(12)).unwrap(), int(5));
    }

    #[test]
    fn never_exceeds_the_line() {
        let cfg = two_flow_cfg();
        let g = max_service_curve(&cfg, 0, 1, &int(1)).unwrap();
        let line = affine(&int(1), &int(0), int(12)).unwrap();
        assert_eq!(min2(&g, &line).unwrap(), g);
        g.require_nondecreasing("max service curve").unwrap();
    }

    #[test]
    fn rejects_bad_arguments() {
        let cfg = two_flow_cfg();
        assert!(max_service_curve(&cfg, 0, 0, &int(1)).is_err());
        assert!(max_service_curve(&cfg, 0, 2, &int(1)).is_err());
        assert!(max_service_curve(&cfg, 0, 1, &int(0)).is_err());
        assert!(max_service_curve_on(&cfg, 0, 1, &int(1), &int(0)).is_err());
    }

    #[test]
    fn wider_window_extends_the_same_curve() {
        let cfg = two_flow_cfg();
        let short = max_service_curve(&cfg, 0, 1, &int(1)).unwrap();
        let long = max_service_curve_on(&cfg, 0, 1, &int(1), &int(24)).unwrap();
        assert_eq!(long.horizon(), &int(24));
        assert_eq!(long.restrict(short.horizon()).unwrap(), short);
    }
}
