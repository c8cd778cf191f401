//! The piecewise-linear function representation.

use crate::rat::{self, Rat};
use crate::{Error, Result};
use num_traits::Zero;
use std::fmt;

/// One piece of a piecewise-linear function.
///
/// A segment starting at `start` carries the attained value `f(start)` in
/// `value`, the right limit `f(start+)` in `right_limit` (these differ
/// exactly at a jump), and the `slope` of the affine piece that extends to
/// the next segment's start (or to the horizon for the last segment).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub start: Rat,
    pub value: Rat,
    pub right_limit: Rat,
    pub slope: Rat,
}

impl Segment {
    pub fn new(start: Rat, value: Rat, right_limit: Rat, slope: Rat) -> Self {
        Segment { start, value, right_limit, slope }
    }

    /// Continuous segment: value and right limit coincide.
    pub fn cont(start: Rat, value: Rat, slope: Rat) -> Self {
        Segment { start, value: value.clone(), right_limit: value, slope }
    }

    /// Value of the open affine piece at `t` in `(start, end]`.
    fn open_at(&self, t: &Rat) -> Rat {
        &self.right_limit + &self.slope * (t - &self.start)
    }
}

/// What the function means beyond its represented horizon.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tail {
    Undefined,
    PlusInfinity,
}

/// An exact piecewise-linear function on `[0, horizon]`, possibly with
/// upward or downward jumps at segment starts. Values are arbitrary
/// rationals; several operators additionally require their inputs to be
/// non-decreasing and check that explicitly.
///
/// The axis labels are contextual: the same type represents bits-over-time
/// curves, service-over-service mappings, and value-domain inverses.
#[derive(Clone, PartialEq, Eq)]
pub struct PwFunction {
    horizon: Rat,
    segments: Vec<Segment>,
    tail: Tail,
}

impl fmt::Debug for PwFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "PwFunction(horizon={}, tail={:?})", self.horizon, self.tail)?;
        for s in &self.segments {
            writeln!(
                f,
                "  t={} v={} r={} m={}",
                s.start, s.value, s.right_limit, s.slope
            )?;
        }
        Ok(())
    }
}

impl PwFunction {
    /// Builds a function from raw segments, validating structure and
    /// normalizing to a canonical form (collinear continuations merged, so
    /// structural equality is function equality).
    pub fn new(horizon: Rat, segments: Vec<Segment>, tail: Tail) -> Result<Self> {
        if horizon < Rat::zero() {
            return Err(Error::InvalidSegments(format!("negative horizon {horizon}")));
        }
        if segments.is_empty() {
            return Err(Error::InvalidSegments("no segments".into()));
        }
        if segments[0].start != Rat::zero() {
            return Err(Error::InvalidSegments(format!(
                "first segment starts at {}, not 0",
                segments[0].start
            )));
        }
        for w in segments.windows(2) {
            if w[0].start >= w[1].start {
                return Err(Error::InvalidSegments(format!(
                    "segment starts not strictly increasing: {} then {}",
                    w[0].start, w[1].start
                )));
            }
        }
        for (k, s) in segments.iter().enumerate() {
            if s.start > horizon {
                return Err(Error::InvalidSegments(format!(
                    "segment start {} beyond horizon {horizon}",
                    s.start
                )));
            }
            if s.start == horizon && k + 1 != segments.len() {
                return Err(Error::InvalidSegments(
                    "only the last segment may be a point at the horizon".into(),
                ));
            }
        }
        let mut f = PwFunction { horizon, segments, tail };
        f.normalize();
        Ok(f)
    }

    /// A single-point function: domain `[0, 0]`.
    pub fn point(value: Rat, tail: Tail) -> Self {
        PwFunction {
            horizon: Rat::zero(),
            segments: vec![Segment::cont(Rat::zero(), value, Rat::zero())],
            tail,
        }
    }

    fn normalize(&mut self) {
        // A point segment at the horizon has no open part; pin its fields.
        if let Some(last) = self.segments.last_mut() {
            if last.start == self.horizon {
                last.right_limit = last.value.clone();
                last.slope = Rat::zero();
            }
        }
        let mut out: Vec<Segment> = Vec::with_capacity(self.segments.len());
        for seg in self.segments.drain(..) {
            if let Some(prev) = out.last() {
                let left = prev.open_at(&seg.start);
                let continues = seg.value == left
                    && seg.right_limit == left
                    && (seg.slope == prev.slope || seg.start == self.horizon);
                if continues {
                    continue;
                }
            }
            out.push(seg);
        }
        self.segments = out;
    }

    pub fn horizon(&self) -> &Rat {
        &self.horizon
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn with_tail(mut self, tail: Tail) -> Self {
        self.tail = tail;
        self
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = &Rat> {
        self.segments.iter().map(|s| &s.start)
    }

    /// Index of the segment whose range contains `t` (greatest start <= t).
    fn locate(&self, t: &Rat) -> usize {
        match self.segments.binary_search_by(|s| s.start.cmp(t)) {
            Ok(k) => k,
            Err(k) => k - 1, // k >= 1 since first start is 0 <= t
        }
    }

    fn check_domain(&self, t: &Rat) -> Result<()> {
        if *t < Rat::zero() || *t > self.horizon {
            return Err(Error::OutsideDomain {
                arg: t.to_string(),
                horizon: self.horizon.to_string(),
            });
        }
        Ok(())
    }

    /// Exact value `f(t)` for `t` in `[0, horizon]`.
    pub fn eval(&self, t: &Rat) -> Result<Rat> {
        self.check_domain(t)?;
        let seg = &self.segments[self.locate(t)];
        Ok(if *t == seg.start { seg.value.clone() } else { seg.open_at(t) })
    }

    /// `f(t-)` for `t` in `(0, horizon]`.
    pub fn left_limit(&self, t: &Rat) -> Result<Rat> {
        self.check_domain(t)?;
        if t.is_zero() {
            return Err(Error::OutsideDomain { arg: "0-".into(), horizon: self.horizon.to_string() });
        }
        let k = self.locate(t);
        let seg = if self.segments[k].start == *t { &self.segments[k - 1] } else { &self.segments[k] };
        Ok(seg.open_at(t))
    }

    /// `f(t+)` for `t` in `[0, horizon)`.
    pub fn right_limit(&self, t: &Rat) -> Result<Rat> {
        self.check_domain(t)?;
        if *t == self.horizon {
            return Err(Error::OutsideDomain {
                arg: format!("{t}+"),
                horizon: self.horizon.to_string(),
            });
        }
        let seg = &self.segments[self.locate(t)];
        Ok(if *t == seg.start { seg.right_limit.clone() } else { seg.open_at(t) })
    }

    /// Slope of the affine piece on `(t, t + dt)` for `t` in `[0, horizon)`.
    pub fn slope_after(&self, t: &Rat) -> Result<Rat> {
        self.check_domain(t)?;
        if *t == self.horizon {
            return Err(Error::OutsideDomain {
                arg: format!("{t}+"),
                horizon: self.horizon.to_string(),
            });
        }
        Ok(self.segments[self.locate(t)].slope.clone())
    }

    /// `f(horizon)`.
    pub fn value_end(&self) -> Rat {
        let seg = self.segments.last().expect("nonempty");
        if seg.start == self.horizon { seg.value.clone() } else { seg.open_at(&self.horizon) }
    }

    /// `f(0)`.
    pub fn value_start(&self) -> Rat {
        self.segments[0].value.clone()
    }

    pub fn is_nondecreasing(&self) -> bool {
        for (k, s) in self.segments.iter().enumerate() {
            if s.slope < Rat::zero() || s.right_limit < s.value {
                return false;
            }
            if k > 0 && s.value < self.segments[k - 1].open_at(&s.start) {
                return false;
            }
        }
        true
    }

    pub fn require_nondecreasing(&self, what: &str) -> Result<()> {
        if self.is_nondecreasing() {
            Ok(())
        } else {
            Err(Error::NotNondecreasing(what.into()))
        }
    }

    /// Truncates the domain to `[0, h]`, `h <= horizon`. The tail beyond the
    /// new horizon is forgotten (becomes undefined).
    pub fn restrict(&self, h: &Rat) -> Result<PwFunction> {
        if *h > self.horizon || *h < Rat::zero() {
            return Err(Error::OutsideDomain {
                arg: h.to_string(),
                horizon: self.horizon.to_string(),
            });
        }
        let mut segs: Vec<Segment> = self
            .segments
            .iter()
            .take_while(|s| s.start <= *h)
            .cloned()
            .collect();
        if segs.is_empty() {
            segs.push(Segment::cont(Rat::zero(), self.eval(h)?, Rat::zero()));
        }
        PwFunction::new(h.clone(), segs, Tail::Undefined)
    }

    /// `f(t + d)` as a function of `t`, on `[0, horizon - d]`.
    pub fn shift_left(&self, d: &Rat) -> Result<PwFunction> {
        if *d < Rat::zero() || *d > self.horizon {
            return Err(Error::OutsideDomain {
                arg: d.to_string(),
                horizon: self.horizon.to_string(),
            });
        }
        if d.is_zero() {
            return Ok(self.clone());
        }
        let new_h = &self.horizon - d;
        let mut segs = Vec::new();
        let k0 = self.locate(d);
        let first = &self.segments[k0];
        if first.start == *d {
            let mut s = first.clone();
            s.start = Rat::zero();
            segs.push(s);
        } else {
            let v = first.open_at(d);
            segs.push(Segment::cont(Rat::zero(), v, first.slope.clone()));
        }
        for s in &self.segments[k0 + 1..] {
            let mut s2 = s.clone();
            s2.start = &s.start - d;
            if s2.start <= new_h {
                segs.push(s2);
            }
        }
        PwFunction::new(new_h, segs, self.tail)
    }

    /// Largest value over `[0, horizon]` counting one-sided limits (the
    /// supremum of a piecewise-linear function, which may be approached
    /// rather than attained at a jump).
    pub fn sup_value(&self) -> Rat {
        let mut best = self.value_start();
        for (k, s) in self.segments.iter().enumerate() {
            let end = self
                .segments
                .get(k + 1)
                .map(|n| n.start.clone())
                .unwrap_or_else(|| self.horizon.clone());
            for cand in [s.value.clone(), s.right_limit.clone(), s.open_at(&end)] {
                if cand > best {
                    best = cand;
                }
            }
        }
        best
    }

    /// Smallest value over `[0, horizon]` counting one-sided limits.
    pub fn inf_value(&self) -> Rat {
        let mut best = self.value_start();
        for (k, s) in self.segments.iter().enumerate() {
            let end = self
                .segments
                .get(k + 1)
                .map(|n| n.start.clone())
                .unwrap_or_else(|| self.horizon.clone());
            for cand in [s.value.clone(), s.right_limit.clone(), s.open_at(&end)] {
                if cand < best {
                    best = cand;
                }
            }
        }
        best
    }

    /// End of segment `k`: the next segment's start, or the horizon.
    pub(crate) fn seg_end(&self, k: usize) -> Rat {
        self.segments
            .get(k + 1)
            .map(|s| s.start.clone())
            .unwrap_or_else(|| self.horizon.clone())
    }

    pub(crate) fn seg_count(&self) -> usize {
        self.segments.len()
    }
}

/// Convenience for error messages and tests.
pub fn seg(start: i64, value: i64, right_limit: i64, slope: i64) -> Segment {
    Segment::new(rat::int(start), rat::int(value), rat::int(right_limit), rat::int(slope))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, int};

    fn f_simple() -> PwFunction {
        // 0 on [0,1], jump to 2 at 1+, slope 1 on (1,3]; horizon 3
        PwFunction::new(
            int(3),
            vec![seg(0, 0, 0, 0), Segment::new(int(1), int(0), int(2), int(1))],
            Tail::Undefined,
        )
        .unwrap()
    }

    #[test]
    fn eval_and_limits() {
        let f = f_simple();
        assert_eq!(f.eval(&int(0)).unwrap(), int(0));
        assert_eq!(f.eval(&int(1)).unwrap(), int(0));
        assert_eq!(f.right_limit(&int(1)).unwrap(), int(2));
        assert_eq!(f.eval(&int(2)).unwrap(), int(3));
        assert_eq!(f.left_limit(&int(1)).unwrap(), int(0));
        assert_eq!(f.left_limit(&int(2)).unwrap(), int(3));
        assert_eq!(f.value_end(), int(4));
        assert_eq!(f.eval(&frac(3, 2)).unwrap(), frac(5, 2));
        assert!(f.eval(&int(4)).is_err());
        assert!(f.is_nondecreasing());
    }

    #[test]
    fn normalization_merges_collinear() {
        let f = PwFunction::new(
            int(4),
            vec![seg(0, 0, 0, 1), seg(1, 1, 1, 1), seg(2, 2, 2, 2)],
            Tail::Undefined,
        )
        .unwrap();
        assert_eq!(f.seg_count(), 2);
        let g = PwFunction::new(int(4), vec![seg(0, 0, 0, 1), seg(2, 2, 2, 2)], Tail::Undefined)
            .unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn normalization_keeps_jumps() {
        let f = PwFunction::new(
            int(4),
            vec![seg(0, 0, 0, 1), Segment::new(int(1), int(1), int(2), int(1))],
            Tail::Undefined,
        )
        .unwrap();
        assert_eq!(f.seg_count(), 2);
    }

    #[test]
    fn validation_rejects_bad_structure() {
        assert!(PwFunction::new(int(2), vec![], Tail::Undefined).is_err());
        assert!(PwFunction::new(int(2), vec![seg(1, 0, 0, 0)], Tail::Undefined).is_err());
        assert!(
            PwFunction::new(int(2), vec![seg(0, 0, 0, 0), seg(0, 1, 1, 0)], Tail::Undefined)
                .is_err()
        );
        assert!(PwFunction::new(int(2), vec![seg(0, 0, 0, 0), seg(3, 1, 1, 0)], Tail::Undefined)
            .is_err());
    }

    #[test]
    fn restrict_and_shift() {
        let f = f_simple();
        let g = f.restrict(&int(2)).unwrap();
        assert_eq!(g.value_end(), int(3));
        assert_eq!(g.eval(&int(1)).unwrap(), int(0));
        let h = f.shift_left(&frac(3, 2)).unwrap();
        // h(t) = f(t + 1.5): h(0) = 2.5, slope 1, horizon 1.5
        assert_eq!(h.eval(&int(0)).unwrap(), frac(5, 2));
        assert_eq!(h.value_end(), int(4));
        assert_eq!(*h.horizon(), frac(3, 2));
    }

    #[test]
    fn point_at_horizon() {
        let f = PwFunction::new(
            int(2),
            vec![seg(0, 0, 0, 1), Segment::new(int(2), int(5), int(5), int(0))],
            Tail::Undefined,
        )
        .unwrap();
        assert_eq!(f.eval(&int(2)).unwrap(), int(5));
        assert_eq!(f.left_limit(&int(2)).unwrap(), int(2));
        assert_eq!(f.sup_value(), int(5));
        // a point at the horizon that just continues the line is dropped
        let g = PwFunction::new(
            int(2),
            vec![seg(0, 0, 0, 1), Segment::new(int(2), int(2), int(2), int(0))],
            Tail::Undefined,
        )
        .unwrap();
        assert_eq!(g.seg_count(), 1);
    }

    #[test]
    fn nonmonotone_detected() {
        let f = PwFunction::new(int(2), vec![seg(0, 0, 0, -1)], Tail::Undefined).unwrap();
        assert!(!f.is_nondecreasing());
        assert!(f.require_nondecreasing("test").is_err());
        let g = PwFunction::new(
            int(2),
            vec![seg(0, 0, 0, 1), Segment::new(int(1), int(0), int(0), int(1))],
            Tail::Undefined,
        )
        .unwrap();
        // drop from 1 to 0 at t=1
        assert!(!g.is_nondecreasing());
    }
}
