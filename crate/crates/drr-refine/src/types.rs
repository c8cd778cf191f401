//! Curve sets, initialization choices and stopping rules.

use drr_curves::{convex_curve, flow_service_curve, DrrConfig};
use minplus::rat::frac;
use minplus::{PwFunction, Rat};
use num_traits::Zero;

use crate::{Error, Result};

/// Which refinement mapping drives the iteration.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Method {
    /// Exact shares against every rival subset.
    Full,
    /// One exact share with an interference-slack correction.
    Simple,
    /// Rate-latency shares against every rival subset.
    ConvexFull,
    /// Rate-latency shares with the slack correction, one per relaxation.
    ConvexSimple,
}

impl Method {
    /// Stable lowercase tag, used in reports and dump file names.
    pub fn tag(self) -> &'static str {
        match self {
            Method::Full => "full",
            Method::Simple => "simple",
            Method::ConvexFull => "convex-full",
            Method::ConvexSimple => "convex-simple",
        }
    }
}

/// Where iteration zero came from.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum InitTag {
    /// Residual curves with every rival at full appetite.
    Beta0,
    /// Closed-form rate-latency relaxations of the same.
    Convex,
    /// Curves supplied by the caller.
    External,
}

impl InitTag {
    /// Stable lowercase tag.
    pub fn tag(self) -> &'static str {
        match self {
            InitTag::Beta0 => "beta0",
            InitTag::Convex => "convex",
            InitTag::External => "external",
        }
    }
}

/// Initialization choice for [`crate::iterate`].
#[derive(Clone, Debug)]
pub enum Init {
    /// Start from the worst-case residual curves.
    Beta0,
    /// Start from their convex relaxations.
    Convex,
    /// Start from caller-supplied strict service curves, one per flow, on
    /// the same window as the aggregate curve.
    External(Vec<PwFunction>),
}

impl Init {
    pub(crate) fn tag(&self) -> InitTag {
        match self {
            Init::Beta0 => InitTag::Beta0,
            Init::Convex => InitTag::Convex,
            Init::External(_) => InitTag::External,
        }
    }

    /// Materializes the iteration-zero curves for `cfg`.
    pub(crate) fn curves(&self, cfg: &DrrConfig) -> Result<Vec<PwFunction>> {
        match self {
            Init::Beta0 => (0..cfg.flows())
                .map(|i| flow_service_curve(cfg, i).map_err(Error::Curves))
                .collect(),
            Init::Convex => (0..cfg.flows())
                .map(|i| convex_curve(cfg, i).map_err(Error::Curves))
                .collect(),
            Init::External(curves) => {
                if curves.len() != cfg.flows() {
                    return Err(Error::BadInput(format!(
                        "{} external curves for {} flows",
                        curves.len(),
                        cfg.flows()
                    )));
                }
                for (i, f) in curves.iter().enumerate() {
                    f.require_nondecreasing("external service curve")
                        .map_err(Error::Curve)?;
                    if f.horizon() != cfg.beta().horizon() {
                        return Err(Error::BadInput(format!(
                            "external curve of flow {i} lives on [0, {}], aggregate on [0, {}]",
                            f.horizon(),
                            cfg.beta().horizon()
                        )));
                    }
                }
                Ok(curves.clone())
            }
        }
    }
}

/// One iteration's worth of per-flow strict service curves.
///
/// Invariants, enforced by [`crate::iterate`]: curves never regress between
/// consecutive iterations, and no curve exceeds the aggregate service
/// curve. Both violations are reported as hard errors rather than clamped,
/// since they can only come from a broken mapping.
#[derive(Clone, PartialEq, Debug)]
pub struct CurveSet {
    /// One strict service curve per flow, on the shared window.
    pub curves: Vec<PwFunction>,
    /// Position in the refinement sequence; the initialization is 0.
    pub iteration: usize,
    /// Mapping that drives the sequence.
    pub method: Method,
    /// Origin of iteration zero.
    pub init: InitTag,
}

/// When [`crate::iterate`] stops.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StopMode {
    /// Stop once an iteration reproduces its predecessor exactly.
    Stationary,
    /// Stop once no flow's delay bound improves by the threshold.
    DelayThreshold,
    /// Run a fixed number of iterations.
    MaxIterations,
}

/// Stopping rule for [`crate::iterate`].
#[derive(Clone, PartialEq, Debug)]
pub struct StopRule {
    pub mode: StopMode,
    /// Improvement threshold for [`StopMode::DelayThreshold`], in seconds.
    pub delay_epsilon: Rat,
    /// Hard cap on the number of mapping applications.
    pub max_iter: usize,
}

/// Default improvement threshold: a quarter of a microsecond.
pub(crate) fn default_delay_epsilon() -> Rat {
    frac(1, 4_000_000)
}

impl StopRule {
    /// Runs until two consecutive iterations coincide, or `max_iter`
    /// applications have been made. `max_iter` must be at least 1.
    pub fn stationary(max_iter: usize) -> Result<Self> {
        if max_iter == 0 {
            return Err(Error::BadInput(
                "a stationarity rule needs at least one iteration".into(),
            ));
        }
        Ok(StopRule {
            mode: StopMode::Stationary,
            delay_epsilon: default_delay_epsilon(),
            max_iter,
        })
    }

    /// Runs until no flow's delay bound improves by `epsilon` seconds, or
    /// `max_iter` applications have been made.
    pub fn delay_threshold(epsilon: Rat, max_iter: usize) -> Result<Self> {
        if epsilon <= Rat::zero() {
            return Err(Error::BadInput(format!(
                "delay threshold must be positive, got {epsilon}"
            )));
        }
        if max_iter == 0 {
            return Err(Error::BadInput(
                "a delay-threshold rule needs at least one iteration".into(),
            ));
        }
        Ok(StopRule {
            mode: StopMode::DelayThreshold,
            delay_epsilon: epsilon,
            max_iter,
        })
    }

    /// [`StopRule::delay_threshold`] with the default quarter-microsecond
    /// threshold.
    pub fn delay_threshold_default(max_iter: usize) -> Result<Self> {
        StopRule::delay_threshold(default_delay_epsilon(), max_iter)
    }

    /// Runs exactly `max_iter` applications (zero returns the
    /// initialization untouched), stopping early only on stationarity.
    pub fn max_iterations(max_iter: usize) -> Self {
        StopRule {
            mode: StopMode::MaxIterations,
            delay_epsilon: default_delay_epsilon(),
            max_iter,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use minplus::build::make_rate_latency;
    use minplus::rat::int;

    #[test]
    fn stop_rule_constructors_validate() {
        assert!(StopRule::stationary(0).is_err());
        assert!(StopRule::stationary(1).is_ok());
        assert!(StopRule::delay_threshold(Rat::zero(), 5).is_err());
        assert!(StopRule::delay_threshold(frac(1, 2), 0).is_err());
        let r = StopRule::delay_threshold_default(7).unwrap();
        assert_eq!(r.delay_epsilon, frac(1, 4_000_000));
        assert_eq!(StopRule::max_iterations(0).max_iter, 0);
    }

    #[test]
    fn tags_are_stable() {
        assert_eq!(Method::ConvexSimple.tag(), "convex-simple");
        assert_eq!(Method::Full.tag(), "full");
        assert_eq!(InitTag::Beta0.tag(), "beta0");
    }

    #[test]
    fn external_init_is_validated() {
        let beta = make_rate_latency(&int(10), &int(0), int(5)).unwrap();
        let cfg = DrrConfig::new(
            vec![int(4), int(4)],
            vec![int(2), int(2)],
            int(1),
            beta,
        )
        .unwrap();
        let good = make_rate_latency(&int(1), &int(1), int(5)).unwrap();
        let off_window = make_rate_latency(&int(1), &int(1), int(7)).unwrap();
        assert!(Init::External(vec![good.clone(), good.clone()]).curves(&cfg).is_ok());
        assert!(Init::External(vec![good.clone()]).curves(&cfg).is_err());
        assert!(Init::External(vec![good, off_window]).curves(&cfg).is_err());
    }
}
