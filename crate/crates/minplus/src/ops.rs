//! The operator algebra: pointwise lattice/arithmetic operators, min-plus
//! and max-plus convolution, deconvolution, pseudo-inverses, closures and
//! composition. Everything is exact; results are canonical `PwFunction`s.

use crate::func::{PwFunction, Segment, Tail};
use crate::pieces::{decompose, envelope, Piece};
use crate::rat::Rat;
use crate::{Error, HorizonPolicy, Result};
use num_traits::{One, Zero};
use std::collections::BTreeSet;

fn common_horizon<'a>(f: &'a PwFunction, g: &'a PwFunction) -> Result<&'a Rat> {
    if f.horizon() != g.horizon() {
        return Err(Error::HorizonMismatch(
            f.horizon().to_string(),
            g.horizon().to_string(),
        ));
    }
    Ok(f.horizon())
}

fn joint_tail(f: &PwFunction, g: &PwFunction) -> Tail {
    if f.tail() == Tail::PlusInfinity && g.tail() == Tail::PlusInfinity {
        Tail::PlusInfinity
    } else {
        Tail::Undefined
    }
}

/// Pointwise f + g on a common horizon.
pub fn add(f: &PwFunction, g: &PwFunction) -> Result<PwFunction> {
    pointwise(f, g, |a, b| a + b, joint_tail(f, g))
}

/// Pointwise f - g on a common horizon.
pub fn sub(f: &PwFunction, g: &PwFunction) -> Result<PwFunction> {
    pointwise(f, g, |a, b| a - b, Tail::Undefined)
}

fn pointwise(
    f: &PwFunction,
    g: &PwFunction,
    op: impl Fn(&Rat, &Rat) -> Rat,
    tail: Tail,
) -> Result<PwFunction> {
    let h = common_horizon(f, g)?.clone();
    let mut bps: BTreeSet<Rat> = f.breakpoints().cloned().collect();
    bps.extend(g.breakpoints().cloned());
    let mut segs: Vec<Segment> = Vec::new();
    for t in &bps {
        if *t == h {
            break;
        }
        segs.push(Segment::new(
            t.clone(),
            op(&f.eval(t)?, &g.eval(t)?),
            op(&f.right_limit(t)?, &g.right_limit(t)?),
            op(&f.slope_after(t)?, &g.slope_after(t)?),
        ));
    }
    let vh = op(&f.value_end(), &g.value_end());
    push_horizon_point(&mut segs, &h, vh);
    PwFunction::new(h, segs, tail)
}

/// Appends an explicit point at the horizon when the attained value there
/// differs from the extension of the last open stretch.
fn push_horizon_point(segs: &mut Vec<Segment>, h: &Rat, vh: Rat) {
    let extended = segs
        .last()
        .map(|s| &s.right_limit + &s.slope * (h - &s.start));
    if segs.is_empty() || extended.as_ref() != Some(&vh) {
        segs.push(Segment::cont(h.clone(), vh, Rat::zero()));
    }
}

/// t -> k * f(t).
pub fn scale_y(f: &PwFunction, k: &Rat) -> PwFunction {
    let segs = f
        .segments()
        .iter()
        .map(|s| Segment::new(s.start.clone(), &s.value * k, &s.right_limit * k, &s.slope * k))
        .collect();
    PwFunction::new(f.horizon().clone(), segs, f.tail()).expect("rescaled segments stay valid")
}

/// t -> f(k * t) for k > 0; the horizon shrinks to horizon / k.
pub fn scale_x(f: &PwFunction, k: &Rat) -> Result<PwFunction> {
    if *k <= Rat::zero() {
        return Err(Error::InvalidParameter(format!(
            "scale_x factor must be positive, got {k}"
        )));
    }
    let segs = f
        .segments()
        .iter()
        .map(|s| {
            Segment::new(&s.start / k, s.value.clone(), s.right_limit.clone(), &s.slope * k)
        })
        .collect();
    PwFunction::new(f.horizon() / k, segs, f.tail())
}

/// Pointwise minimum of two functions.
pub fn min2(f: &PwFunction, g: &PwFunction) -> Result<PwFunction> {
    let h = common_horizon(f, g)?.clone();
    let mut pieces = decompose(f);
    pieces.extend(decompose(g));
    envelope(pieces, &h, false, joint_tail(f, g))
}

/// Pointwise maximum of two functions.
pub fn max2(f: &PwFunction, g: &PwFunction) -> Result<PwFunction> {
    let h = common_horizon(f, g)?.clone();
    let mut pieces = decompose(f);
    pieces.extend(decompose(g));
    envelope(pieces, &h, true, joint_tail(f, g))
}

/// Pointwise minimum of a non-empty family on a common horizon.
pub fn min_of<'a>(fs: impl IntoIterator<Item = &'a PwFunction>) -> Result<PwFunction> {
    n_ary(fs, false)
}

/// Pointwise maximum of a non-empty family on a common horizon.
pub fn max_of<'a>(fs: impl IntoIterator<Item = &'a PwFunction>) -> Result<PwFunction> {
    n_ary(fs, true)
}

fn n_ary<'a>(fs: impl IntoIterator<Item = &'a PwFunction>, upper: bool) -> Result<PwFunction> {
    let fs: Vec<&PwFunction> = fs.into_iter().collect();
    let first = *fs
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty function family".into()))?;
    let mut pieces = Vec::new();
    let mut tail = first.tail();
    for f in &fs {
        common_horizon(first, f)?;
        pieces.extend(decompose(f));
        if f.tail() != Tail::PlusInfinity {
            tail = Tail::Undefined;
        }
    }
    envelope(pieces, first.horizon(), upper, tail)
}

/// (f (x) g)(t) = inf over s in [0, t] of f(t-s) + g(s); both operands must
/// be wide-sense increasing on the same horizon.
pub fn min_plus_convolution(f: &PwFunction, g: &PwFunction) -> Result<PwFunction> {
    f.require_nondecreasing("min-plus convolution, left operand")?;
    g.require_nondecreasing("min-plus convolution, right operand")?;
    convolution(f, g, false)
}

/// (f (x)bar g)(t) = sup over s in [0, t] of f(t-s) + g(s).
pub fn max_plus_convolution(f: &PwFunction, g: &PwFunction) -> Result<PwFunction> {
    convolution(f, g, true)
}

fn convolution(f: &PwFunction, g: &PwFunction, upper: bool) -> Result<PwFunction> {
    let h = common_horizon(f, g)?.clone();
    let pf = decompose(f);
    let pg = decompose(g);
    let mut pieces = Vec::with_capacity(pf.len() * pg.len() * 3);
    for a in &pf {
        for b in &pg {
            conv_pair(a, b, upper, &mut pieces);
        }
    }
    envelope(pieces, &h, upper, joint_tail(f, g))
}

/// Reduces one pair of pieces to its contribution along the anti-diagonal
/// t = u + s. For two open stretches the optimum walks the piece with the
/// extreme slope first (smallest for inf, largest for sup), giving two line
/// stretches and their junction value.
fn conv_pair(a: &Piece, b: &Piece, upper: bool, out: &mut Vec<Piece>) {
    match (a, b) {
        (Piece::Point { t: u, v: va }, Piece::Point { t: s, v: vb }) => {
            out.push(Piece::point(u + s, va + vb));
        }
        (Piece::Point { t: u, v: va }, Piece::Open { lo, hi, v0, slope })
        | (Piece::Open { lo, hi, v0, slope }, Piece::Point { t: u, v: va }) => {
            out.push(Piece::open(u + lo, u + hi, va + v0, slope.clone()));
        }
        (
            Piece::Open { lo: l1, hi: h1, v0: v1, slope: m1 },
            Piece::Open { lo: l2, hi: h2, v0: v2, slope: m2 },
        ) => {
            // Order so the first stretch has the optimal slope.
            let first_is_a = if upper { m1 >= m2 } else { m1 <= m2 };
            let (l1, h1, v1, m1, l2, h2, v2, m2) = if first_is_a {
                (l1, h1, v1, m1, l2, h2, v2, m2)
            } else {
                (l2, h2, v2, m2, l1, h1, v1, m1)
            };
            let lo = l1 + l2;
            let mid = h1 + l2;
            let hi = h1 + h2;
            let j = v1 + m1 * (h1 - l1) + v2;
            out.push(Piece::open(lo, mid.clone(), v1 + v2, m1.clone()));
            out.push(Piece::point(mid.clone(), j.clone()));
            out.push(Piece::open(mid, hi, j, m2.clone()));
        }
    }
}

/// (f (/) g)(t) = sup over s in [0, s_max] of f(t+s) - g(s), where s_max is
/// the policy horizon t_star. f must be represented on
/// [0, output_horizon + s_max]; g on [0, s_max], unless g is plus-infinity
/// beyond its horizon, in which case the tail cannot contribute to the sup
/// and s_max shrinks to g's horizon.
pub fn min_plus_deconvolution(
    f: &PwFunction,
    g: &PwFunction,
    output_horizon: &Rat,
    policy: &HorizonPolicy,
) -> Result<PwFunction> {
    if *output_horizon < Rat::zero() {
        return Err(Error::InvalidParameter(format!(
            "deconvolution output horizon must be nonnegative, got {output_horizon}"
        )));
    }
    let mut s_max = policy.t_star.clone();
    if *g.horizon() < s_max {
        if g.tail() == Tail::PlusInfinity {
            s_max = g.horizon().clone();
        } else {
            return Err(Error::NotDefinedFarEnough {
                needed: s_max.to_string(),
                has: g.horizon().to_string(),
            });
        }
    }
    let needed = output_horizon + &s_max;
    if *f.horizon() < needed {
        return Err(Error::NotDefinedFarEnough {
            needed: needed.to_string(),
            has: f.horizon().to_string(),
        });
    }
    let g = g.restrict(&s_max)?;
    let pf = decompose(f);
    let pg = decompose(&g);
    let mut pieces = Vec::with_capacity(pf.len() * pg.len() * 3);
    for a in &pf {
        for b in &pg {
            deconv_pair(a, b, &mut pieces);
        }
    }
    envelope(pieces, output_horizon, true, Tail::Undefined)
}

/// Contribution of one (f-piece, g-piece) pair along t = u - s, maximised
/// over the shift s inside the pair.
fn deconv_pair(a: &Piece, b: &Piece, out: &mut Vec<Piece>) {
    match (a, b) {
        (Piece::Point { t: u, v: va }, Piece::Point { t: s, v: vb }) => {
            out.push(Piece::point(u - s, va - vb));
        }
        (Piece::Open { lo, hi, v0, slope }, Piece::Point { t: s, v: vb }) => {
            out.push(Piece::open(lo - s, hi - s, v0 - vb, slope.clone()));
        }
        (Piece::Point { t: u, v: va }, Piece::Open { lo, hi, v0, slope }) => {
            let start = va - v0 - slope * (hi - lo);
            out.push(Piece::open(u - hi, u - lo, start, slope.clone()));
        }
        (
            Piece::Open { lo: l1, hi: h1, v0: v1, slope: m1 },
            Piece::Open { lo: l2, hi: h2, v0: v2, slope: m2 },
        ) => {
            let base = v1 - v2 - m2 * (h2 - l2);
            if m1 >= m2 {
                // Larger f-slope: push s toward the top of the g stretch
                // first, then ride the g slope.
                let lo = l1 - h2;
                let mid = h1 - h2;
                let hi = h1 - l2;
                let j = &base + m1 * (h1 - l1);
                out.push(Piece::open(lo, mid.clone(), base, m1.clone()));
                if mid < hi {
                    out.push(Piece::point(mid.clone(), j.clone()));
                    out.push(Piece::open(mid, hi, j, m2.clone()));
                }
            } else {
                // Smaller f-slope: the optimum starts at the bottom of the f
                // stretch, then rides the f slope.
                let lo = l1 - h2;
                let mid = l1 - l2;
                let hi = h1 - l2;
                let j = v1 - v2;
                out.push(Piece::open(lo, mid.clone(), base, m2.clone()));
                out.push(Piece::point(mid.clone(), j.clone()));
                out.push(Piece::open(mid, hi, j, m1.clone()));
            }
        }
    }
}

/// f^down(y) = inf { x : f(x) >= y } on the value range [0, f(horizon)].
/// Plateaus of f become jumps, jumps of f become plateaus.
pub fn lower_pseudo_inverse(f: &PwFunction) -> Result<PwFunction> {
    f.require_nondecreasing("lower pseudo-inverse")?;
    if f.value_start() < Rat::zero() {
        return Err(Error::InvalidParameter(
            "lower pseudo-inverse requires f(0) >= 0".into(),
        ));
    }
    let mut cur_y = Rat::zero();
    let mut x_at = Rat::zero();
    let mut segs: Vec<Segment> = Vec::new();
    for (k, s) in f.segments().iter().enumerate() {
        let e = f.seg_end(k);
        let level = if s.right_limit > s.value { &s.right_limit } else { &s.value };
        if *level > cur_y {
            segs.push(Segment::new(cur_y, x_at, s.start.clone(), Rat::zero()));
            cur_y = level.clone();
            x_at = s.start.clone();
        }
        if s.slope > Rat::zero() && e > s.start {
            let l_end = &s.right_limit + &s.slope * (&e - &s.start);
            segs.push(Segment::new(
                cur_y,
                x_at,
                s.start.clone(),
                Rat::one() / &s.slope,
            ));
            cur_y = l_end;
            x_at = e;
        }
    }
    if segs.is_empty() {
        segs.push(Segment::cont(Rat::zero(), Rat::zero(), Rat::zero()));
    }
    PwFunction::new(cur_y, segs, Tail::Undefined)
}

/// f^up(y) = sup { x : f(x) <= y }, with sup of the empty set taken as 0,
/// on the value range [0, f(horizon)]; f^up(f(horizon)) is the horizon.
pub fn upper_pseudo_inverse(f: &PwFunction) -> Result<PwFunction> {
    f.require_nondecreasing("upper pseudo-inverse")?;
    let mut cur_y = Rat::zero();
    let mut segs: Vec<Segment> = Vec::new();
    for (k, s) in f.segments().iter().enumerate() {
        let e = f.seg_end(k);
        let level = if s.right_limit > s.value { &s.right_limit } else { &s.value };
        if *level > cur_y {
            segs.push(Segment::cont(cur_y, s.start.clone(), Rat::zero()));
            cur_y = level.clone();
        }
        if s.slope > Rat::zero() && e > s.start {
            let l_end = &s.right_limit + &s.slope * (&e - &s.start);
            segs.push(Segment::cont(cur_y, s.start.clone(), Rat::one() / &s.slope));
            cur_y = l_end;
        }
    }
    // The top level always maps to the end of the time domain.
    push_horizon_point(&mut segs, &cur_y.clone(), f.horizon().clone());
    PwFunction::new(cur_y, segs, Tail::Undefined)
}

/// Running supremum f_up(t) = sup over s <= t of f(s); the smallest
/// wide-sense increasing function above f.
pub fn nondecreasing_closure(f: &PwFunction) -> Result<PwFunction> {
    let mut run = f.value_start();
    let mut segs: Vec<Segment> = Vec::new();
    let n = f.seg_count();
    for (k, s) in f.segments().iter().enumerate() {
        let e = f.seg_end(k);
        let mv = if s.value > run { s.value.clone() } else { run.clone() };
        if k + 1 == n && e == s.start {
            segs.push(Segment::cont(s.start.clone(), mv.clone(), Rat::zero()));
            run = mv;
            continue;
        }
        if s.slope < Rat::zero() {
            // Decreasing stretch: the running sup freezes at the entry limit.
            let top = if s.right_limit > mv { s.right_limit.clone() } else { mv.clone() };
            segs.push(Segment::new(s.start.clone(), mv, top.clone(), Rat::zero()));
            run = top;
        } else if s.right_limit >= mv {
            segs.push(Segment::new(
                s.start.clone(),
                mv,
                s.right_limit.clone(),
                s.slope.clone(),
            ));
            run = &s.right_limit + &s.slope * (&e - &s.start);
        } else {
            // Starts below the running sup; may cross back above inside.
            let l_end = &s.right_limit + &s.slope * (&e - &s.start);
            segs.push(Segment::cont(s.start.clone(), mv.clone(), Rat::zero()));
            if s.slope > Rat::zero() && l_end > mv {
                let x_cross = &s.start + (&mv - &s.right_limit) / &s.slope;
                segs.push(Segment::cont(x_cross, mv.clone(), s.slope.clone()));
                run = l_end;
            } else {
                run = mv;
            }
        }
    }
    PwFunction::new(f.horizon().clone(), segs, f.tail())
}

/// [f]^+_up: the smallest non-negative wide-sense increasing function above
/// f (clamp below at zero, then running supremum).
pub fn nonneg_nondecreasing_closure(f: &PwFunction) -> Result<PwFunction> {
    let zero = crate::build::constant(Rat::zero(), f.horizon().clone())?;
    nondecreasing_closure(&max2(f, &zero)?)
}

/// Super-additive closure: the least fixpoint of max-plus self-convolution
/// above f, computed by repeated squaring until the function stabilises on
/// its horizon. Requires f(0) = 0 and f wide-sense increasing.
pub fn super_additive_closure(f: &PwFunction) -> Result<PwFunction> {
    f.require_nondecreasing("super-additive closure")?;
    if !f.value_start().is_zero() {
        return Err(Error::InvalidParameter(
            "super-additive closure requires f(0) = 0".into(),
        ));
    }
    // a positive jump at 0+ makes the closure diverge: n parts of size t/n
    // contribute n times the jump
    if *f.horizon() > Rat::zero() && !f.right_limit(&Rat::zero())?.is_zero() {
        return Err(Error::InvalidParameter(
            "super-additive closure diverges: f jumps above 0 at 0+".into(),
        ));
    }
    let mut g = f.clone().with_tail(Tail::Undefined);
    for _ in 0..64 {
        let g2 = max_plus_convolution(&g, &g)?;
        if g2 == g {
            return Ok(g2);
        }
        g = g2;
    }
    Err(Error::Internal(
        "super-additive closure did not stabilise within 64 squarings".into(),
    ))
}

/// (outer o inner)(t) = outer(inner(t)). inner must be wide-sense increasing
/// with values inside outer's domain.
pub fn compose(outer: &PwFunction, inner: &PwFunction) -> Result<PwFunction> {
    inner.require_nondecreasing("composition, inner function")?;
    let y_min = inner.value_start();
    let y_max = inner.value_end();
    if y_min < Rat::zero() || y_max > *outer.horizon() {
        return Err(Error::ComposeDomain {
            needed: format!("[{y_min}, {y_max}]"),
            has: format!("[0, {}]", outer.horizon()),
        });
    }
    let ih = inner.horizon().clone();
    let mut bps: BTreeSet<Rat> = inner.breakpoints().cloned().collect();
    // Preimages of outer breakpoints under the strictly climbing stretches.
    for (k, s) in inner.segments().iter().enumerate() {
        if s.slope > Rat::zero() {
            let e = inner.seg_end(k);
            let ya = &s.right_limit;
            let ye = ya + &s.slope * (&e - &s.start);
            for u in outer.breakpoints() {
                if *u > *ya && *u < ye {
                    bps.insert(&s.start + (u - ya) / &s.slope);
                }
            }
        }
    }
    let mut segs: Vec<Segment> = Vec::new();
    for t in &bps {
        if *t == ih {
            break;
        }
        let v = outer.eval(&inner.eval(t)?)?;
        let y_plus = inner.right_limit(t)?;
        let mi = inner.slope_after(t)?;
        let (rlim, slope) = if mi.is_zero() {
            (outer.eval(&y_plus)?, Rat::zero())
        } else {
            (outer.right_limit(&y_plus)?, outer.slope_after(&y_plus)? * mi)
        };
        segs.push(Segment::new(t.clone(), v, rlim, slope));
    }
    let vh = outer.eval(&y_max)?;
    push_horizon_point(&mut segs, &ih, vh);
    PwFunction::new(ih, segs, Tail::Undefined)
}
