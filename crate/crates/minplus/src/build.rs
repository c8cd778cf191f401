//! Constructors for the standard curve shapes.

use crate::func::{PwFunction, Segment, Tail};
use crate::rat::Rat;
use crate::{Error, Result};
use num_traits::Zero;

fn check_horizon(horizon: &Rat) -> Result<()> {
    if *horizon < Rat::zero() {
        return Err(Error::InvalidParameter(format!("negative horizon {horizon}")));
    }
    Ok(())
}

/// Constant function.
pub fn constant(v: Rat, horizon: Rat) -> Result<PwFunction> {
    check_horizon(&horizon)?;
    PwFunction::new(horizon, vec![Segment::cont(Rat::zero(), v, Rat::zero())], Tail::Undefined)
}

/// The zero function.
pub fn zero(horizon: Rat) -> Result<PwFunction> {
    constant(Rat::zero(), horizon)
}

/// t -> intercept + slope * t (continuous at 0, unlike a token bucket).
pub fn affine(slope: &Rat, intercept: &Rat, horizon: Rat) -> Result<PwFunction> {
    check_horizon(&horizon)?;
    PwFunction::new(
        horizon,
        vec![Segment::cont(Rat::zero(), intercept.clone(), slope.clone())],
        Tail::Undefined,
    )
}

/// The identity t -> t.
pub fn identity(horizon: Rat) -> Result<PwFunction> {
    affine(&Rat::from_integer(1.into()), &Rat::zero(), horizon)
}

/// Token bucket: 0 at t = 0, then b + r*t (burst jump at 0+).
pub fn make_token_bucket(r: &Rat, b: &Rat, horizon: Rat) -> Result<PwFunction> {
    check_horizon(&horizon)?;
    if *r < Rat::zero() || *b < Rat::zero() {
        return Err(Error::InvalidParameter(format!(
            "token bucket needs r >= 0 and b >= 0, got r={r}, b={b}"
        )));
    }
    PwFunction::new(
        horizon,
        vec![Segment::new(Rat::zero(), Rat::zero(), b.clone(), r.clone())],
        Tail::Undefined,
    )
}

/// Stair: a * ceil(t / b); 0 at t = 0, steps of height a every period b.
pub fn make_stair(a: &Rat, b: &Rat, horizon: Rat) -> Result<PwFunction> {
    check_horizon(&horizon)?;
    if *a <= Rat::zero() || *b <= Rat::zero() {
        return Err(Error::InvalidParameter(format!(
            "stair needs a > 0 and b > 0, got a={a}, b={b}"
        )));
    }
    let mut segs = Vec::new();
    let mut k = Rat::zero();
    let one = Rat::from_integer(1.into());
    loop {
        let start = &k * b;
        if start > horizon || (start == horizon && !k.is_zero()) {
            break;
        }
        segs.push(Segment::new(start, &k * a, (&k + &one) * a, Rat::zero()));
        k += &one;
    }
    PwFunction::new(horizon, segs, Tail::Undefined)
}

/// Rate-latency: R * max(t - T, 0).
pub fn make_rate_latency(rate: &Rat, latency: &Rat, horizon: Rat) -> Result<PwFunction> {
    check_horizon(&horizon)?;
    if *rate < Rat::zero() || *latency < Rat::zero() {
        return Err(Error::InvalidParameter(format!(
            "rate-latency needs R >= 0 and T >= 0, got R={rate}, T={latency}"
        )));
    }
    let mut segs = vec![Segment::cont(
        Rat::zero(),
        Rat::zero(),
        if latency.is_zero() { rate.clone() } else { Rat::zero() },
    )];
    if !latency.is_zero() && *latency < horizon {
        segs.push(Segment::cont(latency.clone(), Rat::zero(), rate.clone()));
    }
    PwFunction::new(horizon, segs, Tail::Undefined)
}

/// The unit-slope smoothing of a stair (the convolution of the identity
/// slope with a stair of height a and period b, a <= b, in closed form):
/// climbs at slope 1 from (kb, ka) up to (k+1)a, then holds until (k+1)b.
pub fn smoothed_stair(a: &Rat, b: &Rat, horizon: Rat) -> Result<PwFunction> {
    check_horizon(&horizon)?;
    if *a <= Rat::zero() || *b < *a {
        return Err(Error::InvalidParameter(format!(
            "smoothed stair needs 0 < a <= b, got a={a}, b={b}"
        )));
    }
    let mut segs = Vec::new();
    let mut k = Rat::zero();
    let one = Rat::from_integer(1.into());
    loop {
        let start = &k * b;
        if start > horizon || (start == horizon && !k.is_zero()) {
            break;
        }
        segs.push(Segment::cont(start.clone(), &k * a, one.clone()));
        let hold = &start + a;
        if *a < *b && hold < horizon {
            segs.push(Segment::cont(hold, (&k + &one) * a, Rat::zero()));
        }
        k += &one;
    }
    PwFunction::new(horizon, segs, Tail::Undefined)
}
