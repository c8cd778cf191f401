//! One application of each refinement mapping, per flow.
//!
//! Every variant shares the same skeleton. First each rival's output over
//! any interval is bounded by deconvolving its arrival curve against its
//! current service curve, over a sup window bounded by the shared window
//! end (exact once the arrival curve has crossed below the service curve,
//! which is checked up front). Then the flow's share machinery is re-run
//! with those bounds standing in for the worst case, and the result is
//! kept no smaller than the current curve.

use std::collections::{BTreeMap, HashMap};

use drr_curves::{
    interference_bound_max_rate, interference_bound_min_latency, max_interference_on,
    max_rate_share_params, max_service_curve_on, min_latency_share_params, service_share_to,
    DrrConfig, SubsetMask,
};
use minplus::build::{make_rate_latency, zero};
use minplus::ops::{
    add, compose, max2, min_plus_convolution, min_plus_deconvolution, nondecreasing_closure,
    nonneg_nondecreasing_closure, sub,
};
use minplus::{HorizonPolicy, PwFunction, Rat};
use num_traits::Zero;

use crate::types::CurveSet;
use crate::{Error, Result};

/// Flow counts above this refuse the subset-enumerating mappings, which
/// walk all `2^(n-1)` rival subsets per flow.
pub const DEFAULT_SUBSET_CAP: usize = 20;

fn check_flow(cfg: &DrrConfig, i: usize) -> Result<()> {
    if i >= cfg.flows() {
        return Err(Error::BadInput(format!(
            "flow index {i} out of range for {} flows",
            cfg.flows()
        )));
    }
    Ok(())
}

pub(crate) fn check_cap(cfg: &DrrConfig, cap: usize) -> Result<()> {
    if cfg.flows() > cap {
        return Err(Error::SubsetCapExceeded { flows: cfg.flows(), cap });
    }
    Ok(())
}

/// Window bookkeeping shared by every mapping: the iteration window is the
/// aggregate curve's horizon `t*`; current curves must live exactly on it,
/// and arrival curves must cover `[0, 2 t*]` so every shifted supremum
/// index stays in range. Returns `t*`.
pub(crate) fn check_window(
    cfg: &DrrConfig,
    arrivals: &[PwFunction],
    old: &CurveSet,
) -> Result<Rat> {
    let n = cfg.flows();
    if arrivals.len() != n {
        return Err(Error::BadInput(format!(
            "{} arrival curves for {n} flows",
            arrivals.len()
        )));
    }
    if old.curves.len() != n {
        return Err(Error::BadInput(format!(
            "{} current service curves for {n} flows",
            old.curves.len()
        )));
    }
    let t_star = cfg.beta().horizon().clone();
    let need = &t_star + &t_star;
    for (j, a) in arrivals.iter().enumerate() {
        a.require_nondecreasing("arrival curve")?;
        if *a.horizon() < need {
            return Err(Error::BadInput(format!(
                "arrival curve of flow {j} must cover the doubled window [0, {need}]; \
                 it stops at {}",
                a.horizon()
            )));
        }
    }
    for (i, f) in old.curves.iter().enumerate() {
        f.require_nondecreasing("current service curve")?;
        if *f.horizon() != t_star {
            return Err(Error::BadInput(format!(
                "service curve of flow {i} lives on [0, {}], the aggregate on [0, {t_star}]",
                f.horizon()
            )));
        }
    }
    Ok(t_star)
}

/// Upper bound on what flow `j` can offer the scheduler per interval: its
/// arrival curve deconvolved against its current service curve, clamped
/// nonnegative (an output bound is an arrival curve). The bounded sup
/// window is exact only once the arrival curve has crossed below the
/// service curve, so the crossing is demanded up front.
pub(crate) fn output_bound(
    arrival: &PwFunction,
    current: &PwFunction,
    t_star: &Rat,
    flow: usize,
) -> Result<PwFunction> {
    if arrival.eval(t_star)? > current.eval(t_star)? {
        return Err(Error::HorizonInsufficient { flow });
    }
    let policy = HorizonPolicy::new(t_star.clone())?;
    let dec = min_plus_deconvolution(arrival, current, t_star, &policy)?;
    Ok(max2(&dec, &zero(t_star.clone())?)?)
}

/// Output bounds for all flows at once.
pub(crate) fn output_bounds(
    cfg: &DrrConfig,
    arrivals: &[PwFunction],
    old: &[PwFunction],
    t_star: &Rat,
) -> Result<Vec<PwFunction>> {
    (0..cfg.flows())
        .map(|j| output_bound(&arrivals[j], &old[j], t_star, j))
        .collect()
}

/// Aggregate service left over once every flow in `jbar` (a bitmask of
/// flow indices) is debited its output bound: the nonnegative
/// nondecreasing closure of the difference.
fn discounted_aggregate(
    beta: &PwFunction,
    bounds: &[PwFunction],
    jbar: u64,
) -> Result<PwFunction> {
    let mut f = beta.clone();
    for (j, b) in bounds.iter().enumerate() {
        if jbar & (1u64 << j) != 0 {
            f = sub(&f, b)?;
        }
    }
    Ok(nonneg_nondecreasing_closure(&f)?)
}

/// One subset's contribution to the exhaustive mapping: the exact share
/// against the rivals inside the subset, fed with the aggregate discounted
/// by the rivals outside it.
fn exact_subset_term(
    cfg: &DrrConfig,
    i: usize,
    mask: SubsetMask,
    inner: &PwFunction,
) -> Result<PwFunction> {
    let reach = inner.value_end();
    if reach <= Rat::zero() {
        // The discounted aggregate vanished, and so does any share of it.
        return Ok(zero(inner.horizon().clone())?);
    }
    let share = service_share_to(cfg, i, mask, &reach)?;
    Ok(compose(&share, inner)?)
}

/// The rate-latency relaxation of the same subset share: pointwise max of
/// the max-rate and min-latency closed forms.
fn convex_subset_term(
    cfg: &DrrConfig,
    i: usize,
    mask: SubsetMask,
    inner: &PwFunction,
) -> Result<PwFunction> {
    let reach = inner.value_end();
    if reach <= Rat::zero() {
        return Ok(zero(inner.horizon().clone())?);
    }
    let (r1, t1) = max_rate_share_params(cfg, i, mask)?;
    let (r2, t2) = min_latency_share_params(cfg, i, mask)?;
    let share = max2(
        &make_rate_latency(&r1, &t1, reach.clone())?,
        &make_rate_latency(&r2, &t2, reach)?,
    )?;
    Ok(compose(&share, inner)?)
}

/// Walks every subset of flow `i`'s rivals, maxing the subset terms and
/// the current curve. `inners` caches the discounted aggregates by the
/// complement bitmask, which different flows of one iteration share.
fn subset_sweep(
    cfg: &DrrConfig,
    bounds: &[PwFunction],
    old_i: &PwFunction,
    i: usize,
    inners: &mut HashMap<u64, PwFunction>,
    term: impl Fn(&DrrConfig, usize, SubsetMask, &PwFunction) -> Result<PwFunction>,
) -> Result<PwFunction> {
    let all = cfg.rivals(i)?.bits();
    let mut best = old_i.clone();
    let mut j_bits = all;
    loop {
        let jbar = all & !j_bits;
        if !inners.contains_key(&jbar) {
            inners.insert(jbar, discounted_aggregate(cfg.beta(), bounds, jbar)?);
        }
        let mask = SubsetMask::from_bits(j_bits, cfg.flows(), i)?;
        let t = term(cfg, i, mask, &inners[&jbar])?;
        best = max2(&best, &t)?;
        if j_bits == 0 {
            break;
        }
        j_bits = (j_bits - 1) & all;
    }
    Ok(best)
}

pub(crate) fn full_from_bounds(
    cfg: &DrrConfig,
    bounds: &[PwFunction],
    old_i: &PwFunction,
    i: usize,
    inners: &mut HashMap<u64, PwFunction>,
) -> Result<PwFunction> {
    subset_sweep(cfg, bounds, old_i, i, inners, exact_subset_term)
}

pub(crate) fn convex_full_from_bounds(
    cfg: &DrrConfig,
    bounds: &[PwFunction],
    old_i: &PwFunction,
    i: usize,
    inners: &mut HashMap<u64, PwFunction>,
) -> Result<PwFunction> {
    subset_sweep(cfg, bounds, old_i, i, inners, convex_subset_term)
}

/// Which affine relaxation of the interference staircases a branch of the
/// convex simple mapping uses.
#[derive(Clone, Copy)]
enum AffineFamily {
    MaxRate,
    MinLatency,
}

/// The interference slack of flow `i`: per rival, how much of the
/// worst-case steal the rival's output bound cannot actually use, summed.
/// `phi` picks the per-rival steal bound (exact staircase or one of its
/// affine relaxations), as a curve over the flow's own service.
fn slack(
    cfg: &DrrConfig,
    bounds: &[PwFunction],
    old_i: &PwFunction,
    i: usize,
    phi: impl Fn(&DrrConfig, usize, usize, &Rat) -> Result<PwFunction>,
) -> Result<PwFunction> {
    let x_reach = old_i.value_end();
    let zero_f = zero(old_i.horizon().clone())?;
    let mut delta = zero_f.clone();
    for j in cfg.rivals(i)?.iter() {
        let steal = compose(&phi(cfg, i, j, &x_reach)?, old_i)?;
        let unused = max2(&sub(&steal, &bounds[j])?, &zero_f)?;
        delta = add(&delta, &unused)?;
    }
    Ok(delta)
}

/// Shared tail of the slack-based mappings: feed the aggregate plus slack
/// through a share curve, then keep the max with the current curve.
fn slack_term(inner_raw: PwFunction, share_at: impl FnOnce(&Rat) -> Result<PwFunction>) -> Result<PwFunction> {
    let inner = nondecreasing_closure(&inner_raw)?;
    let reach = inner.value_end();
    if reach <= Rat::zero() {
        return Ok(zero(inner.horizon().clone())?);
    }
    Ok(compose(&share_at(&reach)?, &inner)?)
}

pub(crate) fn simple_from_bounds(
    cfg: &DrrConfig,
    bounds: &[PwFunction],
    old_i: &PwFunction,
    i: usize,
) -> Result<PwFunction> {
    let delta = slack(cfg, bounds, old_i, i, |c, i, j, h| {
        Ok(max_interference_on(c, i, j, h)?)
    })?;
    let term = slack_term(add(cfg.beta(), &delta)?, |reach| {
        Ok(service_share_to(cfg, i, cfg.rivals(i)?, reach)?)
    })?;
    Ok(max2(old_i, &term)?)
}

fn affine_branch(
    cfg: &DrrConfig,
    bounds: &[PwFunction],
    old_i: &PwFunction,
    i: usize,
    family: AffineFamily,
) -> Result<PwFunction> {
    let delta = slack(cfg, bounds, old_i, i, |c, i, j, h| match family {
        AffineFamily::MaxRate => Ok(interference_bound_max_rate(c, i, j, h.clone())?),
        AffineFamily::MinLatency => Ok(interference_bound_min_latency(c, i, j, h.clone())?),
    })?;
    slack_term(add(cfg.beta(), &delta)?, |reach| {
        let (r, t) = match family {
            AffineFamily::MaxRate => max_rate_share_params(cfg, i, cfg.rivals(i)?)?,
            AffineFamily::MinLatency => min_latency_share_params(cfg, i, cfg.rivals(i)?)?,
        };
        Ok(make_rate_latency(&r, &t, reach.clone())?)
    })
}

pub(crate) fn convex_simple_from_bounds(
    cfg: &DrrConfig,
    bounds: &[PwFunction],
    old_i: &PwFunction,
    i: usize,
) -> Result<PwFunction> {
    let a = affine_branch(cfg, bounds, old_i, i, AffineFamily::MaxRate)?;
    let b = affine_branch(cfg, bounds, old_i, i, AffineFamily::MinLatency)?;
    Ok(max2(old_i, &max2(&a, &b)?)?)
}

/// One application of the exhaustive-subset mapping to flow `i`: for every
/// subset of its rivals, the exact share against the subset is fed with
/// the aggregate curve discounted by the complement's output bounds, and
/// the best subset wins. Never below the current curve. Cost is
/// exponential in the flow count; see [`DEFAULT_SUBSET_CAP`].
pub fn full_mapping(
    cfg: &DrrConfig,
    arrivals: &[PwFunction],
    old: &CurveSet,
    i: usize,
) -> Result<PwFunction> {
    full_mapping_capped(cfg, arrivals, old, i, DEFAULT_SUBSET_CAP)
}

/// [`full_mapping`] with an explicit subset cap.
pub fn full_mapping_capped(
    cfg: &DrrConfig,
    arrivals: &[PwFunction],
    old: &CurveSet,
    i: usize,
    cap: usize,
) -> Result<PwFunction> {
    check_flow(cfg, i)?;
    check_cap(cfg, cap)?;
    let t_star = check_window(cfg, arrivals, old)?;
    let bounds = output_bounds(cfg, arrivals, &old.curves, &t_star)?;
    full_from_bounds(cfg, &bounds, &old.curves[i], i, &mut HashMap::new())
}

/// One application of the slack-based mapping to flow `i`: the aggregate
/// curve is raised by the interference the rivals' output bounds leave
/// unused, then fed through the flow's exact share against all rivals.
/// Never below the current curve, and never above [`full_mapping`].
pub fn simple_mapping(
    cfg: &DrrConfig,
    arrivals: &[PwFunction],
    old: &CurveSet,
    i: usize,
) -> Result<PwFunction> {
    check_flow(cfg, i)?;
    let t_star = check_window(cfg, arrivals, old)?;
    let bounds = output_bounds(cfg, arrivals, &old.curves, &t_star)?;
    simple_from_bounds(cfg, &bounds, &old.curves[i], i)
}

/// [`full_mapping`] with every subset share replaced by its best
/// rate-latency relaxation; cheaper curves, result between
/// [`convex_simple_mapping`] and [`full_mapping`].
pub fn convex_full_mapping(
    cfg: &DrrConfig,
    arrivals: &[PwFunction],
    old: &CurveSet,
    i: usize,
) -> Result<PwFunction> {
    check_flow(cfg, i)?;
    check_cap(cfg, DEFAULT_SUBSET_CAP)?;
    let t_star = check_window(cfg, arrivals, old)?;
    let bounds = output_bounds(cfg, arrivals, &old.curves, &t_star)?;
    convex_full_from_bounds(cfg, &bounds, &old.curves[i], i, &mut HashMap::new())
}

/// [`simple_mapping`] run once per affine relaxation of the interference
/// staircases (slack and share from the same relaxation), keeping the
/// pointwise max of the two branches and the current curve.
pub fn convex_simple_mapping(
    cfg: &DrrConfig,
    arrivals: &[PwFunction],
    old: &CurveSet,
    i: usize,
) -> Result<PwFunction> {
    check_flow(cfg, i)?;
    let t_star = check_window(cfg, arrivals, old)?;
    let bounds = output_bounds(cfg, arrivals, &old.curves, &t_star)?;
    convex_simple_from_bounds(cfg, &bounds, &old.curves[i], i)
}

/// [`simple_mapping`] with output bounds tightened per rival: rival `j`'s
/// arrival curve is first smoothed by a caller-supplied maximal service
/// curve before the deconvolution. Each curve must genuinely bound the
/// service rival `j` can receive while flow `i` stays backlogged (that is
/// the caller's contract; a curve below the truth makes the result
/// unsound), be wide-sense increasing, and cover the doubled window.
pub fn refined_mapping_with_max_service_curves(
    cfg: &DrrConfig,
    arrivals: &[PwFunction],
    old: &CurveSet,
    i: usize,
    max_service: &BTreeMap<usize, PwFunction>,
) -> Result<PwFunction> {
    check_flow(cfg, i)?;
    let t_star = check_window(cfg, arrivals, old)?;
    let rivals = cfg.rivals(i)?;
    if max_service.len() != rivals.len() || !rivals.iter().all(|j| max_service.contains_key(&j)) {
        return Err(Error::BadInput(format!(
            "expected one maximal service curve per rival {:?}, got {:?}",
            rivals.iter().collect::<Vec<_>>(),
            max_service.keys().collect::<Vec<_>>()
        )));
    }
    let window = &t_star + &t_star;
    // The flow's own entry is never read by the slack; keep it harmless.
    let mut bounds = vec![zero(t_star.clone())?; cfg.flows()];
    for j in rivals.iter() {
        let g = &max_service[&j];
        g.require_nondecreasing("maximal service curve")?;
        if *g.horizon() < window {
            return Err(Error::BadInput(format!(
                "maximal service curve of rival {j} must cover the doubled window \
                 [0, {window}]; it stops at {}",
                g.horizon()
            )));
        }
        let smoothed = min_plus_convolution(&arrivals[j].restrict(&window)?, &g.restrict(&window)?)?;
        bounds[j] = output_bound(&smoothed, &old.curves[j], &t_star, j)?;
    }
    simple_from_bounds(cfg, &bounds, &old.curves[i], i)
}

/// [`refined_mapping_with_max_service_curves`] with the curves built from
/// a constant maximal service rate `c` of the shared server.
pub fn refined_mapping_with_max_service(
    cfg: &DrrConfig,
    arrivals: &[PwFunction],
    old: &CurveSet,
    i: usize,
    c: &Rat,
) -> Result<PwFunction> {
    check_flow(cfg, i)?;
    let window = cfg.beta().horizon() + cfg.beta().horizon();
    let mut curves = BTreeMap::new();
    for j in cfg.rivals(i)?.iter() {
        curves.insert(j, max_service_curve_on(cfg, i, j, c, &window)?);
    }
    refined_mapping_with_max_service_curves(cfg, arrivals, old, i, &curves)
}
