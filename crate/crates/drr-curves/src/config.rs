//! Scheduler configuration and rival-subset masks.

use minplus::{PwFunction, Rat};
use num_traits::Zero;

use crate::{Error, Result};

/// A set of rival flows of some flow of interest, stored as a bitmask.
///
/// Invariant: the bit of the flow of interest itself is never set, and no
/// bit at or above the flow count is set. Constructors enforce this, which
/// is why they need the flow count and the flow of interest.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SubsetMask(u64);

impl SubsetMask {
    /// The empty rival set.
    pub const EMPTY: SubsetMask = SubsetMask(0);

    /// Builds a mask from raw bits, rejecting bits outside `0..flows` and
    /// the bit of `flow` itself.
    pub fn from_bits(bits: u64, flows: usize, flow: usize) -> Result<Self> {
        if flows > 64 {
            return Err(Error::BadSubset(format!(
                "bitmask subsets support at most 64 flows, got {flows}"
            )));
        }
        let all = if flows == 64 { u64::MAX } else { (1u64 << flows) - 1 };
        if bits & !all != 0 {
            return Err(Error::BadSubset(format!(
                "mask {bits:#x} has bits outside the {flows} configured flows"
            )));
        }
        if flow < 64 && bits & (1u64 << flow) != 0 {
            return Err(Error::BadSubset(format!(
                "mask {bits:#x} contains the flow of interest {flow}"
            )));
        }
        Ok(SubsetMask(bits))
    }

    /// All rivals of `flow`: every other flow in the configuration.
    pub fn rivals_of(flows: usize, flow: usize) -> Result<Self> {
        if flows > 64 {
            return Err(Error::BadSubset(format!(
                "bitmask subsets support at most 64 flows, got {flows}"
            )));
        }
        if flow >= flows {
            return Err(Error::FlowOutOfRange { index: flow, flows });
        }
        let all = if flows == 64 { u64::MAX } else { (1u64 << flows) - 1 };
        Ok(SubsetMask(all & !(1u64 << flow)))
    }

    /// Raw bits of the mask.
    pub fn bits(self) -> u64 {
        self.0
    }

    /// Whether flow `j` is in the set.
    pub fn contains(self, j: usize) -> bool {
        j < 64 && self.0 & (1u64 << j) != 0
    }

    /// Number of rivals in the set.
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Whether the set is empty.
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Iterates over the flow indices in the set, ascending.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..64usize).filter(move |j| bits & (1u64 << j) != 0)
    }
}

/// A Deficit Round-Robin scheduler instance.
///
/// Flow `i` has quantum `quanta[i]` and maximum packet size `l_max[i]`, both
/// in the same data unit as the curves (bits throughout this workspace).
/// `epsilon` is the smallest unit a packet length can take; the residual
/// deficit of a backlogged flow after a round is therefore at most
/// `l_max[i] - epsilon`, which is the constant this crate calls `d_max(i)`.
/// `beta` is a strict service curve for the aggregate of all flows, with
/// time horizon `beta.horizon()` seconds.
#[derive(Clone, Debug)]
pub struct DrrConfig {
    quanta: Vec<Rat>,
    l_max: Vec<Rat>,
    epsilon: Rat,
    beta: PwFunction,
}

impl DrrConfig {
    /// Validates and stores a configuration.
    ///
    /// Requirements: at least one flow and at most 64; `Q_i >= l_max_i > 0`
    /// (a quantum smaller than a packet can stall a round); `0 < epsilon <=
    /// min_i l_max_i`; `beta` wide-sense increasing with `beta(0) >= 0`.
    pub fn new(quanta: Vec<Rat>, l_max: Vec<Rat>, epsilon: Rat, beta: PwFunction) -> Result<Self> {
        let n = quanta.len();
        if n == 0 {
            return Err(Error::InvalidConfig("no flows configured".into()));
        }
        if n > 64 {
            return Err(Error::InvalidConfig(format!(
                "at most 64 flows are supported, got {n}"
            )));
        }
        if l_max.len() != n {
            return Err(Error::InvalidConfig(format!(
                "{} quanta but {} packet-size bounds",
                n,
                l_max.len()
            )));
        }
        if epsilon <= Rat::zero() {
            return Err(Error::InvalidConfig(format!(
                "packet-size granularity must be positive, got {epsilon}"
            )));
        }
        for i in 0..n {
            if l_max[i] <= Rat::zero() {
                return Err(Error::InvalidConfig(format!(
                    "flow {i}: maximum packet size must be positive, got {}",
                    l_max[i]
                )));
            }
            if quanta[i] < l_max[i] {
                return Err(Error::InvalidConfig(format!(
                    "flow {i}: quantum {} is below the maximum packet size {}",
                    quanta[i], l_max[i]
                )));
            }
            if epsilon > l_max[i] {
                return Err(Error::InvalidConfig(format!(
                    "flow {i}: granularity {epsilon} exceeds the maximum packet size {}",
                    l_max[i]
                )));
            }
        }
        beta.require_nondecreasing("aggregate service curve")
            .map_err(Error::Curve)?;
        if beta.value_start() < Rat::zero() {
            return Err(Error::InvalidConfig(format!(
                "aggregate service curve starts below zero: {}",
                beta.value_start()
            )));
        }
        Ok(DrrConfig { quanta, l_max, epsilon, beta })
    }

    /// Number of flows.
    pub fn flows(&self) -> usize {
        self.quanta.len()
    }

    /// Quantum of flow `i`. Panics if `i` is out of range.
    pub fn quantum(&self, i: usize) -> &Rat {
        &self.quanta[i]
    }

    /// Maximum packet size of flow `i`. Panics if `i` is out of range.
    pub fn l_max(&self, i: usize) -> &Rat {
        &self.l_max[i]
    }

    /// Smallest admissible packet size.
    pub fn epsilon(&self) -> &Rat {
        &self.epsilon
    }

    /// Largest residual deficit of flow `i`: `l_max_i - epsilon`.
    pub fn d_max(&self, i: usize) -> Rat {
        &self.l_max[i] - &self.epsilon
    }

    /// Sum of all quanta.
    pub fn q_tot(&self) -> Rat {
        let mut s = Rat::zero();
        for q in &self.quanta {
            s += q;
        }
        s
    }

    /// `Q_i` plus the quanta of the rivals in `mask`.
    pub fn q_tot_with(&self, i: usize, mask: SubsetMask) -> Rat {
        let mut s = self.quanta[i].clone();
        for j in mask.iter() {
            s += &self.quanta[j];
        }
        s
    }

    /// The aggregate strict service curve.
    pub fn beta(&self) -> &PwFunction {
        &self.beta
    }

    /// The full rival set of flow `i`.
    pub fn rivals(&self, i: usize) -> Result<SubsetMask> {
        SubsetMask::rivals_of(self.flows(), i)
    }

    pub(crate) fn check_flow(&self, i: usize) -> Result<()> {
        if i >= self.flows() {
            return Err(Error::FlowOutOfRange { index: i, flows: self.flows() });
        }
        Ok(())
    }

    pub(crate) fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        self.check_flow(i)?;
        self.check_flow(j)?;
        if i == j {
            return Err(Error::SameFlow(i));
        }
        Ok(())
    }

    pub(crate) fn check_mask(&self, i: usize, mask: SubsetMask) -> Result<()> {
        self.check_flow(i)?;
        // Re-validate the invariant in case the mask was built for another
        // configuration.
        SubsetMask::from_bits(mask.bits(), self.flows(), i)?;
        Ok(())
    }
}
