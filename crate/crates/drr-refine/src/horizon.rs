//! Shared time window on which the refinement's deconvolutions are exact.
//!
//! Every rival's output bound is a deconvolution whose supremum index is
//! only scanned up to the window end, which is exact once the rival's
//! arrival curve has crossed below its service curve. The window must
//! therefore cover the latest such crossing over all flows, taken against
//! any valid lower bounds on the service curves (coarser bounds cross
//! later, so they only enlarge the window). The crossing point is then
//! padded up to a round engineering value, since any upper bound works.

use drr_curves::DrrConfig;
use minplus::rat::int;
use minplus::{sufficient_horizon, HorizonPolicy, PwFunction, Rat};
use num_traits::Zero;

use crate::{Error, Result};

/// Slope of the last positive-width piece of `f`; zero for a point.
fn end_slope(f: &PwFunction) -> Rat {
    f.segments()
        .iter()
        .rev()
        .find(|s| s.start < *f.horizon())
        .map(|s| s.slope.clone())
        .unwrap_or_else(Rat::zero)
}

/// Smallest value of the form `{1, 2, 5} * 10^k` at or above `t`.
pub fn pad_to_125_grid(t: &Rat) -> Result<Rat> {
    if *t <= Rat::zero() {
        return Err(Error::BadInput(format!(
            "cannot pad a nonpositive window {t}"
        )));
    }
    let ten = int(10);
    // Decade of t: scale = 10^k with scale <= t < 10 * scale.
    let mut scale = int(1);
    while scale > *t {
        scale /= &ten;
    }
    while &scale * &ten <= *t {
        scale *= &ten;
    }
    for m in [1i64, 2, 5] {
        let candidate = &scale * int(m);
        if candidate >= *t {
            return Ok(candidate);
        }
    }
    Ok(scale * ten)
}

/// A time window sufficient for every deconvolution of the refinement to be
/// exact: the latest point at which some flow's arrival curve first drops
/// to its service lower bound, padded up to the engineering grid.
///
/// `lower_bounds` may be any per-flow curves known to stay at or below the
/// service curves that the iteration will produce (the iteration-zero
/// curves qualify, and so does any coarser closed form). Flows whose
/// arrival curve ends above its lower bound get a diagnosis: if the arrival
/// curve still climbs at least as fast as the flow's guaranteed long-run
/// rate (its quantum's share of the aggregate end rate), no window will
/// ever do and the system is reported unstable; otherwise the supplied
/// curves were simply materialized on too short a window. The local end
/// slope of the lower bound itself is no use here, as the exact residual
/// curves end on alternating ramps and plateaus.
pub fn system_horizon(
    cfg: &DrrConfig,
    arrivals: &[PwFunction],
    lower_bounds: &[PwFunction],
) -> Result<HorizonPolicy> {
    let n = cfg.flows();
    if arrivals.len() != n || lower_bounds.len() != n {
        return Err(Error::BadInput(format!(
            "{} arrival curves and {} lower bounds for {} flows",
            arrivals.len(),
            lower_bounds.len(),
            n
        )));
    }
    let mut worst = Rat::zero();
    for j in 0..n {
        arrivals[j]
            .require_nondecreasing("arrival curve")
            .map_err(Error::Curve)?;
        lower_bounds[j]
            .require_nondecreasing("service lower bound")
            .map_err(Error::Curve)?;
        match sufficient_horizon(&arrivals[j], &lower_bounds[j]) {
            Ok(t_j) => {
                if t_j > worst {
                    worst = t_j;
                }
            }
            Err(minplus::Error::NoCrossing) => {
                let guaranteed = cfg.quantum(j) / cfg.q_tot() * end_slope(cfg.beta());
                return if end_slope(&arrivals[j]) >= guaranteed {
                    Err(Error::Unstable { flow: j })
                } else {
                    Err(Error::HorizonInsufficient { flow: j })
                };
            }
            Err(e) => return Err(Error::Curve(e)),
        }
    }
    Ok(HorizonPolicy::new(pad_to_125_grid(&worst)?).map_err(Error::Curve)?)
}
