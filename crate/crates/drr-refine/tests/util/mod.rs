//! Shared fixtures: the three-flow measurement setup and a four-class
//! single-server configuration, both with exactly representable rates.

#![allow(dead_code)]

use drr_curves::DrrConfig;
use minplus::build::{make_rate_latency, make_token_bucket};
use minplus::rat::int;
use minplus::{PwFunction, Rat};

/// Three equal-quanta flows on a 100 Mb/s server: 1592-bit quanta,
/// 800-bit packets, byte-grain deficits.
pub fn three_flow_cfg_at(horizon: Rat) -> DrrConfig {
    let beta = make_rate_latency(&int(100_000_000), &int(0), horizon).unwrap();
    DrrConfig::new(
        vec![int(1592), int(1592), int(1592)],
        vec![int(800), int(800), int(800)],
        int(8),
        beta,
    )
    .unwrap()
}

/// Token buckets for the three flows: one heavy sender at 7.8125 Mb/s with a
/// five-packet burst against two light senders at 1.5625 Mb/s.
pub fn three_flow_arrivals(horizon: &Rat) -> Vec<PwFunction> {
    let rates = [int(7_812_500), int(1_562_500), int(1_562_500)];
    let bursts = [int(4000), int(800), int(800)];
    rates
        .iter()
        .zip(&bursts)
        .map(|(r, b)| make_token_bucket(r, b, horizon.clone()).unwrap())
        .collect()
}

/// Four traffic classes sharing a 5 Gb/s port with equal 16000-bit quanta
/// and mixed packet sizes, deficits at bit grain.
pub fn four_class_cfg_at(horizon: Rat) -> DrrConfig {
    let beta = make_rate_latency(&int(5_000_000_000), &int(0), horizon).unwrap();
    DrrConfig::new(
        vec![int(16000); 4],
        vec![int(3040), int(12000), int(12000), int(12000)],
        int(1),
        beta,
    )
    .unwrap()
}

/// The four classes' token buckets.
pub fn four_class_arrivals(horizon: &Rat) -> Vec<PwFunction> {
    let rates = [
        int(8_521_000),
        int(180_000_000),
        int(162_000_000),
        int(180_000_000),
    ];
    let bursts = [int(42_560), int(2_160_000), int(3_240_000), int(7_200_000)];
    rates
        .iter()
        .zip(&bursts)
        .map(|(r, b)| make_token_bucket(r, b, horizon.clone()).unwrap())
        .collect()
}
