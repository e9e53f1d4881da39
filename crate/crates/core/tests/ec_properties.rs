use mmsched_core::ec::{
    color_bound, color_multigraph, solve_ec, ColoringMultigraph, ConstraintVariant, EcConfig, EcSolution,
};
use mmsched_core::model::{link_time_of_schedule, verify_schedule, Network, NodeRole};
use mmsched_core::mtfs::{solve, solve_access};
use proptest::prelude::*;

mod common;
use common::{access_network, network};

fn w_plus_r(net: &Network) -> f64 {
    let w = net.nodes().iter().filter(|n| n.role != NodeRole::Enb).count();
    (w + net.enb_rf() as usize) as f64
}

fn check(net: &Network, sol: &EcSolution, theta_star: f64, tg: f64) -> Result<(), TestCaseError> {
    let m = &sol.metrics;
    prop_assert!(m.theta_relaxed >= theta_star - 1e-6, "relaxed {} < optimum {}", m.theta_relaxed, theta_star);
    prop_assert!(verify_schedule(sol.expanded(), sol.schedule()).is_ok());
    prop_assert!(m.realized_theta <= theta_star + 1e-6);
    let bound = (2.0 / 3.0) * theta_star / ((w_plus_r(net) + 1.0) * tg + 1.0);
    prop_assert!(m.realized_theta > bound, "realized {} <= bound {}", m.realized_theta, bound);
    prop_assert!(m.kappa <= color_bound(m.max_degree));

    // every scheduled copy shrinks by the same factor
    let realized = link_time_of_schedule(sol.expanded(), sol.schedule());
    let factor = 1.0 / (m.kappa as f64 * tg).max(1.0);
    for (l, &t) in sol.scheduled.expanded_time.as_slice().iter().enumerate() {
        let want = if t <= 1e-9 { 0.0 } else { t * factor };
        prop_assert!((realized.get(l) - want).abs() <= 1e-8, "link {l}: {} vs {}", realized.get(l), want);
    }
    Ok(())
}

fn granularity() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(0.5), Just(0.1), Just(0.05), Just(0.01)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn single_rf_bounds(net in network(6, 3, false), tg in granularity()) {
        let opt = solve(&net).unwrap();
        let sol = solve_ec(&net, &EcConfig::new(tg).unwrap()).unwrap();
        check(&net, &sol, opt.theta, tg)?;
        prop_assert!(sol.structure.degree_bound.is_some());
    }

    #[test]
    fn multi_rf_relaxation_and_validity(net in network(4, 2, true), tg in granularity()) {
        let opt = solve(&net).unwrap();
        let cfg = EcConfig::for_network(&net, tg).unwrap();
        let sol = solve_ec(&net, &cfg).unwrap();
        prop_assert!(sol.metrics.theta_relaxed >= opt.theta - 1e-6);
        prop_assert!(verify_schedule(sol.expanded(), sol.schedule()).is_ok());
        prop_assert!(sol.metrics.realized_theta <= opt.theta + 1e-6);
        prop_assert!(sol.metrics.kappa <= color_bound(sol.metrics.max_degree));
        if cfg.constraint_variant == ConstraintVariant::MultiRf {
            prop_assert!(sol.structure.degree_bound.is_none());
        }
    }

    #[test]
    fn access_bounds(net in access_network(4, 3), tg in granularity()) {
        let opt = solve_access(&net).unwrap();
        let cfg = EcConfig::for_network(&net, tg).unwrap();
        prop_assert_eq!(cfg.constraint_variant, ConstraintVariant::Access);
        let sol = solve_ec(&net, &cfg).unwrap();
        check(&net, &sol, opt.theta, tg)?;
    }

    #[test]
    fn coloring_random_multigraph(edges in prop::collection::vec((0usize..20, 0usize..20), 60)) {
        let mut gm = ColoringMultigraph::new(20);
        for (i, (u, v)) in edges.into_iter().enumerate() {
            if u != v {
                gm.add_edge(u, v, i, 1.0);
            }
        }
        let c = color_multigraph(&gm);
        prop_assert!(c.is_proper(&gm));
        prop_assert!(c.num_colors <= color_bound(gm.max_degree()));
        prop_assert!(c.num_colors >= gm.max_degree());
    }
}

#[test]
fn finer_granularity_meets_bound_at_each_step() {
    let net = Network::builder()
        .enb_rf(2)
        .mmbs(4)
        .link(0, 1, 6.0)
        .link(0, 2, 3.0)
        .link(1, 3, 4.0)
        .link(2, 4, 5.0)
        .link(3, 4, 2.0)
        .build()
        .unwrap();
    let opt = solve(&net).unwrap();
    for tg in [1.0, 0.3, 0.1, 0.01, 0.001] {
        let sol = solve_ec(&net, &EcConfig::new(tg).unwrap()).unwrap();
        let bound = (2.0 / 3.0) * opt.theta / ((w_plus_r(&net) + 1.0) * tg + 1.0);
        assert!(sol.metrics.realized_theta > bound, "t_g {tg}");
    }
}
