//! Shared test support: seeded random piecewise-linear function generators
//! and independent brute-force oracles for every operator. The oracles never
//! call the operator implementations; they reduce each definition to scalar
//! scans over an exhaustive candidate set (breakpoints and one-sided limits),
//! which is exact for piecewise-linear inputs.

#![allow(dead_code)]

use minplus::rat::{frac, Rat};
use minplus::{PwFunction, Segment, Tail};
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random rational in [lo, hi] with a small denominator.
pub fn rat_between(r: &mut ChaCha8Rng, lo: i64, hi: i64) -> Rat {
    let den = r.gen_range(1..=6i64);
    let num = r.gen_range(lo * den..=hi * den);
    frac(num, den)
}

/// Random rational in [0, h], for probe points.
pub fn probe_point(r: &mut ChaCha8Rng, h: &Rat) -> Rat {
    let den = r.gen_range(1..=9i64);
    let num = r.gen_range(0..=64 * den);
    h * frac(num, 64 * den)
}

/// Builds a random function with up to `max_segs` segments on [0, horizon].
/// `nondecreasing` constrains jumps and slopes; values start at a small
/// non-negative base either way so the result can serve as inner functions.
pub fn random_fn(r: &mut ChaCha8Rng, horizon: &Rat, max_segs: usize, nondecreasing: bool) -> PwFunction {
    let nseg = r.gen_range(1..=max_segs);
    let mut starts: BTreeSet<Rat> = BTreeSet::new();
    starts.insert(Rat::zero());
    let mut guard = 0;
    while starts.len() < nseg && guard < 100 {
        guard += 1;
        let den = r.gen_range(1..=6i64);
        let num = r.gen_range(1..(8 * den).max(2));
        let t = horizon * frac(num, 8 * den);
        if t > Rat::zero() && t < *horizon {
            starts.insert(t);
        }
    }
    let mut segs = Vec::new();
    let mut ext = rat_between(r, 0, 4); // extension of the previous stretch
    for t in &starts {
        let dv = if nondecreasing { rat_between(r, 0, 3) } else { rat_between(r, -3, 3) };
        let dj = if nondecreasing { rat_between(r, 0, 3) } else { rat_between(r, -3, 3) };
        let slope = if nondecreasing { rat_between(r, 0, 4) } else { rat_between(r, -4, 4) };
        let value = if t.is_zero() { ext.clone() } else { &ext + dv };
        let rlim = &value + dj;
        segs.push(Segment::new(t.clone(), value, rlim, slope));
        let seg = segs.last().unwrap();
        // track the extension up to the next start lazily; corrected below
        ext = seg.right_limit.clone();
    }
    // recompute extensions properly: value of segment k extends to start of k+1
    let starts_vec: Vec<Rat> = starts.iter().cloned().collect();
    let mut fixed = Vec::new();
    let mut ext = Rat::zero();
    for (k, s) in segs.iter().enumerate() {
        let (value, rlim) = if k == 0 {
            (s.value.clone(), s.right_limit.clone())
        } else {
            let dv = &s.value - &segs[k - 1].right_limit;
            let dj = &s.right_limit - &s.value;
            let v = &ext + dv;
            let rl = &v + dj;
            (v, rl)
        };
        let end = starts_vec.get(k + 1).cloned().unwrap_or_else(|| horizon.clone());
        ext = &rlim + &s.slope * (&end - &s.start);
        fixed.push(Segment::new(s.start.clone(), value, rlim, s.slope.clone()));
    }
    PwFunction::new(horizon.clone(), fixed, Tail::Undefined).expect("generated segments are valid")
}

/// A non-decreasing random function with f(0) = 0 and no jump at 0+
/// (the shape super-additive closure needs to stay finite).
pub fn random_zero_start(r: &mut ChaCha8Rng, horizon: &Rat, max_segs: usize) -> PwFunction {
    let f = random_fn(r, horizon, max_segs, true);
    let v0 = f.value_start();
    let segs = f
        .segments()
        .iter()
        .enumerate()
        .map(|(k, s)| {
            if k == 0 {
                Segment::new(s.start.clone(), Rat::zero(), Rat::zero(), s.slope.clone())
            } else {
                Segment::new(s.start.clone(), &s.value - &v0, &s.right_limit - &v0, s.slope.clone())
            }
        })
        .collect();
    PwFunction::new(horizon.clone(), segs, Tail::Undefined).unwrap()
}

fn consider(best: &mut Option<Rat>, v: Rat, upper: bool) {
    match best {
        None => *best = Some(v),
        Some(b) => {
            if (upper && v > *b) || (!upper && v < *b) {
                *best = Some(v);
            }
        }
    }
}

/// Brute-force (f conv g)(t): optimum of f(t-s)+g(s) over s in [0, t],
/// scanning attained values and one-sided limits at every breakpoint of the
/// scalar function s -> f(t-s)+g(s).
pub fn oracle_convolution(f: &PwFunction, g: &PwFunction, t: &Rat, upper: bool) -> Rat {
    let mut cands: BTreeSet<Rat> = BTreeSet::new();
    cands.insert(Rat::zero());
    cands.insert(t.clone());
    for s in g.breakpoints() {
        if *s <= *t {
            cands.insert(s.clone());
        }
    }
    for u in f.breakpoints() {
        let s = t - u;
        if s >= Rat::zero() && s <= *t {
            cands.insert(s);
        }
    }
    let mut best: Option<Rat> = None;
    for s in &cands {
        let u = t - s;
        consider(&mut best, f.eval(&u).unwrap() + g.eval(s).unwrap(), upper);
        if *s < *t {
            // limit as the split moves up from s
            let v = f.left_limit(&u).unwrap() + g.right_limit(s).unwrap();
            consider(&mut best, v, upper);
        }
        if *s > Rat::zero() {
            let v = f.right_limit(&u).unwrap() + g.left_limit(s).unwrap();
            consider(&mut best, v, upper);
        }
    }
    best.unwrap()
}

/// Brute-force (f deconv g)(t): sup of f(t+s)-g(s) over s in [0, s_max].
pub fn oracle_deconvolution(f: &PwFunction, g: &PwFunction, t: &Rat, s_max: &Rat) -> Rat {
    let mut cands: BTreeSet<Rat> = BTreeSet::new();
    cands.insert(Rat::zero());
    cands.insert(s_max.clone());
    for s in g.breakpoints() {
        if *s <= *s_max {
            cands.insert(s.clone());
        }
    }
    for u in f.breakpoints() {
        let s = u - t;
        if s >= Rat::zero() && s <= *s_max {
            cands.insert(s);
        }
    }
    let mut best: Option<Rat> = None;
    for s in &cands {
        let u = t + s;
        consider(&mut best, f.eval(&u).unwrap() - g.eval(s).unwrap(), true);
        if *s < *s_max {
            let v = f.right_limit(&u).unwrap() - g.right_limit(s).unwrap();
            consider(&mut best, v, true);
        }
        if *s > Rat::zero() {
            let v = f.left_limit(&u).unwrap() - g.left_limit(s).unwrap();
            consider(&mut best, v, true);
        }
    }
    best.unwrap()
}

/// Brute-force lower pseudo-inverse: first x where f reaches level y (as an
/// attained value or a limit; for non-decreasing f these infima coincide).
pub fn oracle_lower_inverse(f: &PwFunction, y: &Rat) -> Option<Rat> {
    let n = f.segments().len();
    for (k, s) in f.segments().iter().enumerate() {
        if s.value >= *y {
            return Some(s.start.clone());
        }
        let e = if k + 1 < n {
            f.segments()[k + 1].start.clone()
        } else {
            f.horizon().clone()
        };
        if e > s.start {
            if s.right_limit >= *y {
                return Some(s.start.clone());
            }
            if s.slope > Rat::zero() {
                let l_end = &s.right_limit + &s.slope * (&e - &s.start);
                if l_end >= *y {
                    return Some(&s.start + (y - &s.right_limit) / &s.slope);
                }
            }
        }
    }
    None
}

/// Brute-force upper pseudo-inverse: sup { x : f(x) <= y } as the first x
/// beyond which f stays above y, or the horizon if f never exceeds y.
pub fn oracle_upper_inverse(f: &PwFunction, y: &Rat) -> Rat {
    let n = f.segments().len();
    for (k, s) in f.segments().iter().enumerate() {
        if s.value > *y {
            return s.start.clone();
        }
        let e = if k + 1 < n {
            f.segments()[k + 1].start.clone()
        } else {
            f.horizon().clone()
        };
        if e > s.start {
            if s.right_limit > *y {
                return s.start.clone();
            }
            if s.slope > Rat::zero() {
                let l_end = &s.right_limit + &s.slope * (&e - &s.start);
                if l_end > *y {
                    return &s.start + (y - &s.right_limit) / &s.slope;
                }
            }
        }
    }
    f.horizon().clone()
}

/// Brute-force running sup of f over [0, t].
pub fn oracle_running_sup(f: &PwFunction, t: &Rat) -> Rat {
    let mut best = f.eval(t).unwrap();
    for s in f.breakpoints() {
        if *s > *t {
            break;
        }
        let v = f.eval(s).unwrap();
        if v > best {
            best = v;
        }
        if *s < *t {
            let v = f.right_limit(s).unwrap();
            if v > best {
                best = v;
            }
        }
        if *s > Rat::zero() {
            let v = f.left_limit(s).unwrap();
            if v > best {
                best = v;
            }
        }
    }
    // limit into t itself
    if *t > Rat::zero() {
        let v = f.left_limit(t).unwrap();
        if v > best {
            best = v;
        }
    }
    best
}

/// Brute-force horizontal deviation: the sup over t of
/// [first crossing of beta over alpha(t)] - t, scanning every breakpoint of
/// the deviation curve and its one-sided limits.
pub fn oracle_horizontal_deviation(alpha: &PwFunction, beta: &PwFunction) -> Rat {
    let h = if alpha.horizon() <= beta.horizon() {
        alpha.horizon().clone()
    } else {
        beta.horizon().clone()
    };
    let mut cands: BTreeSet<Rat> = BTreeSet::new();
    cands.insert(Rat::zero());
    cands.insert(h.clone());
    for t in alpha.breakpoints() {
        if *t <= h {
            cands.insert(t.clone());
        }
    }
    // preimages under alpha of the level values where beta changes shape
    let mut levels: BTreeSet<Rat> = BTreeSet::new();
    for x in beta.breakpoints() {
        levels.insert(beta.eval(x).unwrap());
        if *x < *beta.horizon() {
            levels.insert(beta.right_limit(x).unwrap());
        }
        if *x > Rat::zero() {
            // a jump in beta puts a kink in its inverse at the jump's
            // left-limit level
            levels.insert(beta.left_limit(x).unwrap());
        }
    }
    levels.insert(beta.value_end());
    let n = alpha.segments().len();
    for (k, s) in alpha.segments().iter().enumerate() {
        if s.slope <= Rat::zero() {
            continue;
        }
        let e = if k + 1 < n {
            alpha.segments()[k + 1].start.clone()
        } else {
            alpha.horizon().clone()
        };
        for y in &levels {
            if *y > s.right_limit {
                let t = &s.start + (y - &s.right_limit) / &s.slope;
                if t <= e && t <= h {
                    cands.insert(t);
                }
            }
        }
    }
    let dev_at = |y: &Rat, t: &Rat| -> Rat {
        let x = oracle_lower_inverse(beta, y).expect("dominated at horizon");
        let d = x - t;
        if d > Rat::zero() {
            d
        } else {
            Rat::zero()
        }
    };
    let mut best = Rat::zero();
    for t in &cands {
        let v = dev_at(&alpha.eval(t).unwrap(), t);
        if v > best {
            best = v;
        }
        if *t < h {
            // limit from the right: a climbing alpha approaches the level
            // from above, so the crossing jumps to where beta goes strictly
            // above the level.
            let y = alpha.right_limit(t).unwrap();
            let x = if alpha.slope_after(t).unwrap().is_zero() {
                oracle_lower_inverse(beta, &y).expect("dominated at horizon")
            } else {
                oracle_upper_inverse(beta, &y)
            };
            let d = x - t;
            if d > best {
                best = d;
            }
        }
        if *t > Rat::zero() {
            let v = dev_at(&alpha.left_limit(t).unwrap(), t);
            if v > best {
                best = v;
            }
        }
    }
    best
}
