//! Internal decomposition of piecewise-linear functions into atomic pieces
//! and exact lower/upper envelope computation over a set of pieces.
//!
//! Every pointwise or (de)convolution operator reduces to: produce a bag of
//! pieces whose pointwise best (min or max) is the result, then call
//! `envelope`. A `Point` contributes a single value at a single coordinate;
//! an `Open` contributes a line on an open interval. Values approached but
//! not attained by the underlying optimisation are already folded into the
//! pieces by the callers, so the envelope itself is purely pointwise.

use crate::func::{PwFunction, Segment, Tail};
use crate::rat::Rat;
use crate::{Error, Result};
use num_traits::Zero;
use std::collections::BTreeSet;

#[derive(Clone, Debug)]
pub(crate) enum Piece {
    Point { t: Rat, v: Rat },
    /// Line on the open interval (lo, hi): value at t is v0 + slope*(t - lo),
    /// where v0 is the limit at lo from the right.
    Open { lo: Rat, hi: Rat, v0: Rat, slope: Rat },
}

impl Piece {
    pub(crate) fn point(t: Rat, v: Rat) -> Piece {
        Piece::Point { t, v }
    }

    pub(crate) fn open(lo: Rat, hi: Rat, v0: Rat, slope: Rat) -> Piece {
        debug_assert!(lo < hi);
        Piece::Open { lo, hi, v0, slope }
    }
}

/// Splits a function into pieces: one `Point` per attained breakpoint value,
/// one `Open` per affine stretch, plus the attained endpoint at the horizon.
pub(crate) fn decompose(f: &PwFunction) -> Vec<Piece> {
    let mut out = Vec::with_capacity(2 * f.seg_count() + 1);
    let n = f.seg_count();
    for (k, s) in f.segments().iter().enumerate() {
        out.push(Piece::point(s.start.clone(), s.value.clone()));
        let end = f.seg_end(k);
        if end > s.start {
            out.push(Piece::open(
                s.start.clone(),
                end.clone(),
                s.right_limit.clone(),
                s.slope.clone(),
            ));
            if k + 1 == n {
                let v_end = &s.right_limit + &s.slope * (&end - &s.start);
                out.push(Piece::point(end, v_end));
            }
        }
    }
    out
}

/// An open piece in line form y = c + slope*t, on (lo, hi).
#[derive(Clone, Debug)]
struct OpenLine {
    lo: Rat,
    hi: Rat,
    c: Rat,
    slope: Rat,
}

impl OpenLine {
    fn at(&self, t: &Rat) -> Rat {
        &self.c + &self.slope * t
    }
}

fn better(a: &Rat, b: &Rat, upper: bool) -> bool {
    if upper {
        a > b
    } else {
        a < b
    }
}

/// Pointwise lower (`upper == false`) or upper envelope of the pieces,
/// clipped to [0, horizon]. Fails if some sub-interval of the domain is not
/// covered by any piece; the operators that feed this guarantee coverage.
pub(crate) fn envelope(
    pieces: Vec<Piece>,
    horizon: &Rat,
    upper: bool,
    tail: Tail,
) -> Result<PwFunction> {
    let zero = Rat::zero();
    let mut points: Vec<(Rat, Rat)> = Vec::new();
    let mut opens: Vec<OpenLine> = Vec::new();

    for p in pieces {
        match p {
            Piece::Point { t, v } => {
                if t >= zero && t <= *horizon {
                    points.push((t, v));
                }
            }
            Piece::Open { lo, hi, v0, slope } => {
                // Clipping an open interval may cut off an interior point of
                // the original domain; re-emit it as an attained point so no
                // contribution is lost.
                let c = &v0 - &slope * &lo;
                let line = OpenLine { lo: lo.clone(), hi: hi.clone(), c, slope };
                let mut lo2 = lo;
                let mut hi2 = hi;
                if lo2 < zero {
                    if hi2 > zero {
                        points.push((zero.clone(), line.at(&zero)));
                    }
                    lo2 = zero.clone();
                }
                if hi2 > *horizon {
                    if lo2 < *horizon {
                        points.push((horizon.clone(), line.at(horizon)));
                    }
                    hi2 = horizon.clone();
                }
                if lo2 < hi2 {
                    opens.push(OpenLine { lo: lo2, hi: hi2, ..line });
                }
            }
        }
    }

    let mut bps: BTreeSet<Rat> = BTreeSet::new();
    bps.insert(zero.clone());
    bps.insert(horizon.clone());
    for (t, _) in &points {
        bps.insert(t.clone());
    }
    for o in &opens {
        bps.insert(o.lo.clone());
        bps.insert(o.hi.clone());
    }

    opens.sort_by(|a, b| a.lo.cmp(&b.lo));

    // Refine breakpoints until on every elementary interval a single line
    // dominates. Splits happen only at true crossings of two lines, so this
    // terminates.
    loop {
        let splits = find_splits(&bps, &opens, upper)?;
        if splits.is_empty() {
            break;
        }
        bps.extend(splits);
    }

    let bp_vec: Vec<Rat> = bps.iter().cloned().collect();
    points.sort_by(|a, b| a.0.cmp(&b.0));

    let mut segs: Vec<Segment> = Vec::new();
    let mut active: Vec<usize> = Vec::new();
    let mut next_open = 0usize;

    for (k, a) in bp_vec.iter().enumerate() {
        while next_open < opens.len() && opens[next_open].lo <= *a {
            active.push(next_open);
            next_open += 1;
        }
        let attained = best_attained(a, &points, &opens, &active, upper)?;
        if k + 1 == bp_vec.len() {
            // Horizon: append an explicit point if the attained value is not
            // the limit of the last stretch.
            let extended = segs.last().map(|s| &s.right_limit + &s.slope * (a - &s.start));
            if segs.is_empty() || extended.as_ref() != Some(&attained) {
                segs.push(Segment::cont(a.clone(), attained, Rat::zero()));
            }
            break;
        }
        let b = &bp_vec[k + 1];
        active.retain(|&i| opens[i].hi >= *b);
        let w = winner(&opens, &active, a, b, upper).ok_or_else(|| {
            Error::Internal(format!("envelope: no piece covers ({a}, {b})"))
        })?;
        let wline = &opens[w];
        segs.push(Segment::new(a.clone(), attained, wline.at(a), wline.slope.clone()));
    }

    PwFunction::new(horizon.clone(), segs, tail)
}

/// One pass over all elementary intervals, collecting exact crossing points
/// where the midpoint winner fails to dominate the whole interval.
fn find_splits(bps: &BTreeSet<Rat>, opens: &[OpenLine], upper: bool) -> Result<Vec<Rat>> {
    let bp_vec: Vec<&Rat> = bps.iter().collect();
    let mut splits: Vec<Rat> = Vec::new();
    let mut active: Vec<usize> = Vec::new();
    let mut next_open = 0usize;
    let two = Rat::from_integer(2.into());
    for k in 0..bp_vec.len().saturating_sub(1) {
        let a = bp_vec[k];
        let b = bp_vec[k + 1];
        while next_open < opens.len() && opens[next_open].lo <= *a {
            active.push(next_open);
            next_open += 1;
        }
        active.retain(|&i| opens[i].hi >= *b);
        let Some(w) = winner(opens, &active, a, b, upper) else {
            continue; // coverage gap: reported when segments are assembled
        };
        let m = (a + b) / &two;
        if let Some(t) = winner_tie_split(opens, &active, &m, w) {
            splits.push(t);
            continue;
        }
        // Dominance must also hold in the limits toward both endpoints.
        for e in [a, b] {
            let wv = opens[w].at(e);
            for &i in &active {
                if i == w {
                    continue;
                }
                let ov = opens[i].at(e);
                if better(&ov, &wv, upper) {
                    let t = crossing(&opens[w], &opens[i]);
                    if t > *a && t < *b {
                        splits.push(t);
                    }
                }
            }
        }
    }
    splits.sort();
    splits.dedup();
    Ok(splits)
}

/// Index of the best line at the interval midpoint, or None when the actives
/// are empty (a coverage gap, reported at segment build time).
fn winner(opens: &[OpenLine], active: &[usize], a: &Rat, b: &Rat, upper: bool) -> Option<usize> {
    let two = Rat::from_integer(2.into());
    let m = (a + b) / two;
    let mut best: Option<(usize, Rat)> = None;
    for &i in active {
        let v = opens[i].at(&m);
        match &best {
            None => best = Some((i, v)),
            Some((_, bv)) => {
                if better(&v, bv, upper) {
                    best = Some((i, v));
                }
            }
        }
    }
    best.map(|(i, _)| i)
}

/// If another active line ties with the winner at the midpoint but has a
/// different slope, the two lines cross exactly there: split at the midpoint.
fn winner_tie_split(opens: &[OpenLine], active: &[usize], m: &Rat, w: usize) -> Option<Rat> {
    let wv = opens[w].at(m);
    for &i in active {
        if i == w {
            continue;
        }
        if opens[i].at(m) == wv && opens[i].slope != opens[w].slope {
            return Some(m.clone());
        }
    }
    None
}

fn crossing(p: &OpenLine, q: &OpenLine) -> Rat {
    // p.c + p.slope*t == q.c + q.slope*t; slopes differ when called.
    (&q.c - &p.c) / (&p.slope - &q.slope)
}

/// Best attained value at coordinate `a`: points located exactly at `a` and
/// open pieces whose interval strictly contains `a`.
fn best_attained(
    a: &Rat,
    points: &[(Rat, Rat)],
    opens: &[OpenLine],
    active: &[usize],
    upper: bool,
) -> Result<Rat> {
    let mut best: Option<Rat> = None;
    let idx = points.partition_point(|(t, _)| t < a);
    for (t, v) in points[idx..].iter() {
        if t != a {
            break;
        }
        match &best {
            None => best = Some(v.clone()),
            Some(b) => {
                if better(v, b, upper) {
                    best = Some(v.clone());
                }
            }
        }
    }
    for &i in active {
        let o = &opens[i];
        if o.lo < *a && o.hi > *a {
            let v = o.at(a);
            match &best {
                None => best = Some(v),
                Some(b) => {
                    if better(&v, b, upper) {
                        best = Some(v);
                    }
                }
            }
        }
    }
    best.ok_or_else(|| Error::Internal(format!("envelope: no attained value at {a}")))
}
