use mmsched_core::model::{throughput_of_schedule, verify_schedule, Network};
use mmsched_core::mtfs::{solve, solve_maxmin, solve_mtfs};
use mmsched_core::oracle::{oracle_maxmin, oracle_mtfs};
use proptest::prelude::*;

mod common;
use common::network;

fn check(net: &Network) -> Result<(), TestCaseError> {
    let mm = solve_maxmin(net).unwrap();
    let or = oracle_maxmin(net).unwrap();
    prop_assert!((mm.theta - or.theta).abs() <= 1e-6, "theta {} vs oracle {}", mm.theta, or.theta);
    let sol = solve_mtfs(&mm).unwrap();
    let ot = oracle_mtfs(net, mm.theta).unwrap();
    prop_assert!(
        (sol.network_throughput - ot.objective).abs() <= 1e-6,
        "tput {} vs oracle {}",
        sol.network_throughput,
        ot.objective
    );
    prop_assert!(verify_schedule(&sol.expanded, &sol.schedule).is_ok());
    prop_assert!(sol.schedule.active_slots() <= sol.expanded.num_mmbs() + 1);
    prop_assert!(sol.throughput.min() >= mm.theta - 1e-6);
    let or_sched = or.schedule();
    prop_assert!(verify_schedule(&or.expanded, &or_sched).is_ok());
    prop_assert!(throughput_of_schedule(&or.expanded, &or_sched).unwrap().min() >= or.theta - 1e-6);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn column_generation_matches_oracle(net in network(6, 3, false)) {
        check(&net)?;
    }

    #[test]
    fn multi_rf_matches_oracle(net in network(4, 2, true)) {
        check(&net)?;
    }

    #[test]
    fn capacity_scaling(net in network(6, 3, false), lambda in 0.1f64..10.0) {
        let a = solve(&net).unwrap();
        let b = solve(&net.scaled(lambda)).unwrap();
        prop_assert!((b.theta - lambda * a.theta).abs() <= 1e-7 * (1.0 + b.theta));
        prop_assert!((b.network_throughput - lambda * a.network_throughput).abs() <= 1e-7 * (1.0 + b.network_throughput));
    }

    #[test]
    fn monotone_in_rf_chains(net in network(5, 1, false)) {
        let mut last = 0.0;
        for r in 1..=3 {
            let t = solve_maxmin(&net.with_enb_rf(r).unwrap()).unwrap().theta;
            prop_assert!(t >= last - 1e-9);
            last = t;
        }
        let mut last = 0.0;
        for r in 1..=2 {
            let t = solve_maxmin(&net.with_mmbs_rf(r).unwrap()).unwrap().theta;
            prop_assert!(t >= last - 1e-9);
            last = t;
        }
    }
}
