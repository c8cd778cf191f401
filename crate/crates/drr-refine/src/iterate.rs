//! Driving a mapping to a fixpoint.

use std::collections::HashMap;

use drr_curves::DrrConfig;
use minplus::bound::horizontal_deviation;
use minplus::ops::{max2, min2};
use minplus::{PwFunction, Rat};

use crate::mapping::{
    check_cap, check_window, convex_full_from_bounds, convex_simple_from_bounds, full_from_bounds,
    output_bounds, simple_from_bounds, DEFAULT_SUBSET_CAP,
};
use crate::types::{CurveSet, Init, Method, StopMode, StopRule};
use crate::{Error, Result};

/// Index of the first set in `history` whose successor repeats it
/// exactly, i.e. the iteration count at which the run went stationary.
pub fn fixpoint_at(history: &[CurveSet]) -> Option<usize> {
    history.windows(2).position(|w| w[0].curves == w[1].curves)
}

/// Worst-case delay bound per flow under `set`: the horizontal deviation
/// of each arrival curve from the flow's service curve.
pub fn delay_bounds(arrivals: &[PwFunction], set: &CurveSet) -> Result<Vec<Rat>> {
    if arrivals.len() != set.curves.len() {
        return Err(Error::BadInput(format!(
            "{} arrival curves for {} service curves",
            arrivals.len(),
            set.curves.len()
        )));
    }
    set.curves
        .iter()
        .enumerate()
        .map(|(i, f)| {
            horizontal_deviation(&arrivals[i], f).map_err(|e| match e {
                minplus::Error::NoCrossing => Error::HorizonInsufficient { flow: i },
                other => Error::Curve(other),
            })
        })
        .collect()
}

/// Runs `method` from `init` until `stop` says otherwise, returning the
/// whole trajectory including the starting set; when the run goes
/// stationary, the repeated set is kept so that [`fixpoint_at`] can see
/// it. Each step must improve or repeat every flow's curve without ever
/// crossing the aggregate; in exact arithmetic neither can fail, so a
/// violation is reported as a hard error rather than tolerated.
pub fn iterate(
    cfg: &DrrConfig,
    arrivals: &[PwFunction],
    init: &Init,
    method: Method,
    stop: &StopRule,
) -> Result<Vec<CurveSet>> {
    if matches!(method, Method::Full | Method::ConvexFull) {
        check_cap(cfg, DEFAULT_SUBSET_CAP)?;
    }
    let set0 = CurveSet {
        curves: init.curves(cfg)?,
        iteration: 0,
        method,
        init: init.tag(),
    };
    let t_star = check_window(cfg, arrivals, &set0)?;
    let beta = cfg.beta();
    for (i, f) in set0.curves.iter().enumerate() {
        if max2(f, beta)? != *beta {
            return Err(Error::AboveAggregate { flow: i, iteration: 0 });
        }
    }
    let mut history = vec![set0];
    let mut prev_delays = match stop.mode {
        StopMode::DelayThreshold if stop.max_iter > 0 => {
            Some(delay_bounds(arrivals, &history[0])?)
        }
        _ => None,
    };
    for m in 1..=stop.max_iter {
        let old = history.last().expect("history starts nonempty");
        let bounds = output_bounds(cfg, arrivals, &old.curves, &t_star)?;
        // Discounted aggregates depend only on the complement subset, so
        // all flows of one iteration share this cache.
        let mut inners: HashMap<u64, PwFunction> = HashMap::new();
        // Each flow's update reads only the previous iteration, so the
        // flows could run in parallel; kept sequential for determinism of
        // the shared cache and because single iterations dominate anyway.
        let mut next = Vec::with_capacity(cfg.flows());
        for i in 0..cfg.flows() {
            next.push(match method {
                Method::Full => full_from_bounds(cfg, &bounds, &old.curves[i], i, &mut inners)?,
                Method::Simple => simple_from_bounds(cfg, &bounds, &old.curves[i], i)?,
                Method::ConvexFull => {
                    convex_full_from_bounds(cfg, &bounds, &old.curves[i], i, &mut inners)?
                }
                Method::ConvexSimple => convex_simple_from_bounds(cfg, &bounds, &old.curves[i], i)?,
            });
        }
        for (i, f) in next.iter().enumerate() {
            if min2(f, &old.curves[i])? != old.curves[i] {
                return Err(Error::NonMonotone { flow: i, iteration: m });
            }
            if max2(f, beta)? != *beta {
                return Err(Error::AboveAggregate { flow: i, iteration: m });
            }
        }
        let stationary = next == old.curves;
        let init_tag = history[0].init;
        history.push(CurveSet { curves: next, iteration: m, method, init: init_tag });
        if stationary {
            break;
        }
        if stop.mode == StopMode::DelayThreshold {
            let now = delay_bounds(arrivals, history.last().expect("just pushed"))?;
            let prev = prev_delays.as_ref().expect("seeded before the loop");
            let improved = prev
                .iter()
                .zip(&now)
                .any(|(p, q)| &(p - q) >= &stop.delay_epsilon);
            prev_delays = Some(now);
            if !improved {
                break;
            }
        }
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use drr_curves::flow_service_curve;
    use minplus::build::{make_rate_latency, make_token_bucket};
    use minplus::rat::{frac, int};

    fn two_flow_cfg() -> DrrConfig {
        let beta = make_rate_latency(&int(1), &int(0), int(40)).unwrap();
        DrrConfig::new(vec![int(4), int(2)], vec![int(2), int(1)], int(1), beta).unwrap()
    }

    fn arrivals() -> Vec<PwFunction> {
        vec![
            make_token_bucket(&frac(1, 4), &int(2), int(80)).unwrap(),
            make_token_bucket(&frac(1, 8), &int(1), int(80)).unwrap(),
        ]
    }

    #[test]
    fn zero_iterations_returns_the_initialization_alone() {
        let cfg = two_flow_cfg();
        let history = iterate(
            &cfg,
            &arrivals(),
            &Init::Beta0,
            Method::Simple,
            &StopRule::max_iterations(0),
        )
        .unwrap();
        assert_eq!(history.len(), 1);
        assert_eq!(history[0].iteration, 0);
        assert_eq!(history[0].curves[0], flow_service_curve(&cfg, 0).unwrap());
        assert_eq!(fixpoint_at(&history), None);
    }

    #[test]
    fn history_is_monotone_and_indexed() {
        let cfg = two_flow_cfg();
        let history = iterate(
            &cfg,
            &arrivals(),
            &Init::Beta0,
            Method::Simple,
            &StopRule::max_iterations(5),
        )
        .unwrap();
        assert!(history.len() >= 2);
        for (m, set) in history.iter().enumerate() {
            assert_eq!(set.iteration, m);
            assert_eq!(set.method, Method::Simple);
        }
        for w in history.windows(2) {
            for i in 0..2 {
                let lo = min2(&w[1].curves[i], &w[0].curves[i]).unwrap();
                assert_eq!(lo, w[0].curves[i]);
            }
        }
        // Delay bounds improve weakly along the way.
        let before = delay_bounds(&arrivals(), &history[0]).unwrap();
        let after = delay_bounds(&arrivals(), history.last().unwrap()).unwrap();
        for i in 0..2 {
            assert!(after[i] <= before[i]);
        }
    }

    #[test]
    fn stationary_run_keeps_the_repeated_set() {
        // Silent rivals hand each flow the whole aggregate on the first
        // round, after which nothing moves: the duplicate set stays in
        // the history so the fixpoint index is visible.
        let cfg = two_flow_cfg();
        let silent = vec![
            minplus::build::zero(int(80)).unwrap(),
            minplus::build::zero(int(80)).unwrap(),
        ];
        let history = iterate(
            &cfg,
            &silent,
            &Init::Beta0,
            Method::Full,
            &StopRule::stationary(30).unwrap(),
        )
        .unwrap();
        assert_eq!(fixpoint_at(&history), Some(1));
        assert_eq!(history.len(), 3);
        for i in 0..2 {
            assert_eq!(history[1].curves[i], *cfg.beta());
            assert_eq!(history[2].curves[i], *cfg.beta());
        }
    }

    #[test]
    fn iteration_cap_without_stationarity_just_stops() {
        let cfg = two_flow_cfg();
        let history = iterate(
            &cfg,
            &arrivals(),
            &Init::Beta0,
            Method::Full,
            &StopRule::max_iterations(1),
        )
        .unwrap();
        assert_eq!(history.len(), 2);
        assert_eq!(history[1].iteration, 1);
    }

    #[test]
    fn delay_threshold_stops_once_gains_vanish() {
        let cfg = two_flow_cfg();
        let a = arrivals();
        let fine = iterate(
            &cfg,
            &a,
            &Init::Beta0,
            Method::Simple,
            &StopRule::stationary(40).unwrap(),
        )
        .unwrap();
        let coarse = iterate(
            &cfg,
            &a,
            &Init::Beta0,
            Method::Simple,
            &StopRule::delay_threshold(int(1), 40).unwrap(),
        )
        .unwrap();
        // A one-second threshold gives up no later than exact stationarity.
        assert!(coarse.len() <= fine.len());
        // Either way, the final delay bound is a valid bound from `fine`'s
        // trajectory: it appears somewhere along it.
        let last = delay_bounds(&a, coarse.last().unwrap()).unwrap();
        let settled = delay_bounds(&a, fine.last().unwrap()).unwrap();
        for i in 0..2 {
            assert!(last[i] >= settled[i]);
        }
    }

    #[test]
    fn external_initialization_must_stay_below_the_aggregate() {
        let cfg = two_flow_cfg();
        let too_high = minplus::build::affine(&int(2), &int(0), int(40)).unwrap();
        let init = Init::External(vec![too_high, flow_service_curve(&cfg, 1).unwrap()]);
        let err = iterate(
            &cfg,
            &arrivals(),
            &init,
            Method::Simple,
            &StopRule::stationary(5).unwrap(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::AboveAggregate { flow: 0, iteration: 0 }));
    }
}
