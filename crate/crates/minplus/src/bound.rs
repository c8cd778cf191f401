//! Delay bound and horizon helpers built on top of the operator algebra.

use crate::build;
use crate::func::PwFunction;
use crate::ops::{compose, lower_pseudo_inverse, sub};
use crate::rat::Rat;
use crate::{Error, Result};
use num_traits::Zero;

/// Largest horizontal distance from the arrival curve to the service curve:
/// sup over t of the smallest d >= 0 with alpha(t) <= beta(t + d). Requires
/// alpha to be dominated by beta at the end of the common window, otherwise
/// the distance cannot be certified within the represented horizon.
pub fn horizontal_deviation(alpha: &PwFunction, beta: &PwFunction) -> Result<Rat> {
    alpha.require_nondecreasing("horizontal deviation, arrival curve")?;
    beta.require_nondecreasing("horizontal deviation, service curve")?;
    let h = if alpha.horizon() <= beta.horizon() {
        alpha.horizon().clone()
    } else {
        beta.horizon().clone()
    };
    let a = alpha.restrict(&h)?;
    if a.value_end() > beta.eval(&h)? {
        return Err(Error::NoCrossing);
    }
    let inv = lower_pseudo_inverse(beta)?;
    let lag = compose(&inv, &a)?;
    let id = build::identity(h)?;
    let dev = sub(&lag, &id)?;
    let s = dev.sup_value();
    Ok(if s > Rat::zero() { s } else { Rat::zero() })
}

/// Infimum of { s > 0 : alpha(s) <= beta(s) } over the common window. When
/// the dominance holds immediately after 0, the first positive breakpoint of
/// either curve (or the window end) is returned instead of the useless 0.
pub fn sufficient_horizon(alpha: &PwFunction, beta: &PwFunction) -> Result<Rat> {
    alpha.require_nondecreasing("sufficient horizon, arrival curve")?;
    beta.require_nondecreasing("sufficient horizon, service curve")?;
    let h = if alpha.horizon() <= beta.horizon() {
        alpha.horizon().clone()
    } else {
        beta.horizon().clone()
    };
    let d = sub(&beta.restrict(&h)?, &alpha.restrict(&h)?)?;
    let zero = Rat::zero();
    let n = d.seg_count();
    for (k, s) in d.segments().iter().enumerate() {
        if s.start > zero && s.value >= zero {
            return Ok(s.start.clone());
        }
        let e = d.seg_end(k);
        if e > s.start {
            if s.right_limit >= zero {
                if s.start.is_zero() {
                    return Ok(first_positive_breakpoint(alpha, beta, &h));
                }
                return Ok(s.start.clone());
            }
            if s.slope > zero {
                let root = &s.start - &s.right_limit / &s.slope;
                let attained_at_end = k + 1 == n;
                if root < e || (root == e && attained_at_end) {
                    return Ok(root);
                }
            }
        }
    }
    Err(Error::NoCrossing)
}

fn first_positive_breakpoint(alpha: &PwFunction, beta: &PwFunction, h: &Rat) -> Rat {
    let mut best = h.clone();
    for t in alpha.breakpoints().chain(beta.breakpoints()) {
        if *t > Rat::zero() && *t < best {
            best = t.clone();
        }
    }
    best
}
