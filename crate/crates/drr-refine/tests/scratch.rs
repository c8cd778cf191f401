mod util;

use drr_curves::flow_service_curve;
use drr_refine::{
    delay_bounds, fixpoint_at, iterate, system_horizon, Init, Method, StopRule,
};
use minplus::rat::{frac, int, to_decimal};

#[test]
fn explore_horizon() {
    let probe = frac(1, 1000);
    let cfg = util::three_flow_cfg_at(probe.clone());
    let lower: Vec<_> = (0..3).map(|i| flow_service_curve(&cfg, i).unwrap()).collect();
    let arrivals = util::three_flow_arrivals(&probe);
    for j in 0..3 {
        let t = minplus::bound::sufficient_horizon(&arrivals[j], &lower[j]).unwrap();
        println!("flow {j}: crossing at {t} = {} us", to_decimal(&(&t * &int(1_000_000)), 6));
    }
    let policy = system_horizon(&cfg, &arrivals, &lower).unwrap();
    println!(
        "padded: {} = {} us",
        policy.t_star,
        to_decimal(&(&policy.t_star * &int(1_000_000)), 6)
    );
}

#[test]
fn explore_fig6() {
    let t = frac(1, 5000);
    let cfg = util::three_flow_cfg_at(t.clone());
    let arrivals = util::three_flow_arrivals(&(&t + &t));
    let micro = int(1_000_000);
    for (name, method) in [
        ("full", Method::Full),
        ("simple", Method::Simple),
        ("convex-full", Method::ConvexFull),
        ("convex-simple", Method::ConvexSimple),
    ] {
        let stop = if method == Method::ConvexSimple {
            StopRule::delay_threshold_default(100).unwrap()
        } else {
            StopRule::stationary(40).unwrap()
        };
        let start = std::time::Instant::now();
        match iterate(&cfg, &arrivals, &Init::Beta0, method, &stop) {
            Ok(h) => {
                println!(
                    "{name}: len {} fixpoint {:?} elapsed {:?}",
                    h.len(),
                    fixpoint_at(&h),
                    start.elapsed()
                );
                for set in &h {
                    let d = delay_bounds(&arrivals, set).unwrap();
                    let ds: Vec<String> =
                        d.iter().map(|x| to_decimal(&(x * &micro), 6)).collect();
                    println!("  iter {:2}: {}", set.iteration, ds.join("  "));
                }
            }
            Err(e) => println!("{name}: ERROR {e}"),
        }
    }
}
