use mmsched_core::lp::{ColumnDescriptor, SimplexState, Tolerances};
use mmsched_core::matching::{brute_force_max_weight, WeightedGraph};
use mmsched_core::{solve, solve_maxmin, Matching};
use proptest::prelude::*;

mod common;
use common::network;

fn column_set(m: usize) -> impl Strategy<Value = (Vec<f64>, Vec<(Vec<f64>, f64)>)> {
    let rhs = prop::collection::vec(0.0f64..5.0, m);
    let cols = prop::collection::vec((prop::collection::vec(-3.0f64..3.0, m), -5.0f64..1.0), 1..30);
    (rhs, cols)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn basic_values_stay_feasible((rhs, cols) in (2usize..7).prop_flat_map(column_set)) {
        let m = rhs.len();
        let basis = (0..m).map(ColumnDescriptor::Surplus).collect();
        let ident = (0..m).map(|i| (0..m).map(|k| f64::from(u8::from(i == k))).collect()).collect();
        let mut st = SimplexState::new(basis, ident, vec![0.0; m], rhs, Tolerances::default()).unwrap();
        for (k, (col, cost)) in cols.into_iter().enumerate() {
            if st.reduced_cost(cost, &col) >= -1e-9 {
                continue;
            }
            if st.pivot(ColumnDescriptor::Matching(Matching::new(vec![k])), col, cost).is_err() {
                continue;
            }
            prop_assert!(st.min_value() >= -1e-9, "x_B min {}", st.min_value());
        }
    }

    #[test]
    fn final_basis_prices_out(net in network(5, 2, false)) {
        let mm = solve_maxmin(&net).unwrap();
        let ex = &mm.expanded;
        let p = mm.state.dual_variables();
        let conv = *p.last().unwrap();
        let row = |v: usize| mm.layout.row_of(ex.super_of(v)).map_or(0.0, |r| p[r]);
        let weights: Vec<f64> = ex.links().iter().map(|l| l.capacity * (row(l.dst) - row(l.src))).collect();
        let (_, best) = brute_force_max_weight(&WeightedGraph::from_network(ex, &weights)).unwrap();
        // matching columns cost 0, theta costs -1 and surplus columns 0
        prop_assert!(-best - conv >= -1e-7, "matching reduced cost {}", -best - conv);
        let dests: f64 = mm.layout.dests.iter().map(|&v| p[mm.layout.row_of(v).unwrap()]).sum();
        prop_assert!(dests - 1.0 >= -1e-7);
        for &v in &mm.layout.dests {
            prop_assert!(p[mm.layout.row_of(v).unwrap()] >= -1e-7);
        }
    }

    #[test]
    fn repeated_solves_are_identical(net in network(6, 3, false)) {
        let a = solve(&net).unwrap();
        let b = solve(&net).unwrap();
        prop_assert_eq!(a.theta.to_bits(), b.theta.to_bits());
        prop_assert_eq!(&a.schedule, &b.schedule);
        prop_assert_eq!(a.log.maxmin_pivots, b.log.maxmin_pivots);
        prop_assert_eq!(a.log.mtfs_pivots, b.log.mtfs_pivots);
    }
}
