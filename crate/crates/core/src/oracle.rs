//! Reference solver: every matching of a small expanded network becomes an
//! explicit LP column, solved with the dense simplex.

use crate::error::{Error, Result};
use crate::expansion::expand_auto;
use crate::lp::{solve_dense_lp, Bound, LinearProgram, LpError, Relation, Sense, Tolerances};
use crate::matching::enumerate_network_matchings;
use crate::mtfs::{column_of_matching, enb_capacity_of_matching, layout_of};
use crate::model::{Matching, Network, Schedule, Slot};

/// Largest expanded network the oracle accepts.
pub const ORACLE_MAX_NODES: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    /// Max-min throughput (for [`oracle_mtfs`], the floor that was imposed).
    pub theta: f64,
    /// LP objective: `theta` for max-min, eNB egress for MTFS.
    pub objective: f64,
    pub expanded: Network,
    /// Every matching of `expanded` with its LP time.
    pub matchings: Vec<Matching>,
    pub times: Vec<f64>,
}

impl OracleSolution {
    /// Schedule with one slot per matching of positive time, so the LP
    /// solution is read back as a convex combination of matchings.
    pub fn schedule(&self) -> Schedule {
        let mut slots: Vec<Slot> = self
            .matchings
            .iter()
            .zip(&self.times)
            .filter(|(_, t)| **t > 1e-12)
            .map(|(m, &t)| Slot { matching: m.clone(), duration: t })
            .collect();
        let total: f64 = slots.iter().map(|s| s.duration).sum();
        for s in &mut slots {
            s.duration /= total;
        }
        Schedule::new(slots)
    }
}

struct Columns {
    expanded: Network,
    matchings: Vec<Matching>,
    a: Vec<Vec<f64>>,
    dests: usize,
    relays: usize,
}

fn columns(net: &Network) -> Result<Columns> {
    let expanded = expand_auto(net)?;
    if expanded.num_nodes() > ORACLE_MAX_NODES {
        return Err(Error::TooLarge(format!(
            "{} expanded nodes (oracle limit {ORACLE_MAX_NODES})",
            expanded.num_nodes()
        )));
    }
    let (layout, _) = layout_of(&expanded)?;
    let rows: Vec<_> = layout.dests.iter().chain(&layout.relays).copied().collect();
    let matchings = enumerate_network_matchings(&expanded)?;
    let a = matchings.iter().map(|m| column_of_matching(&expanded, m, &rows)).collect();
    Ok(Columns { expanded, matchings, a, dests: layout.dests.len(), relays: layout.relays.len() })
}

fn base_lp(c: &Columns, extra: usize, sense: Sense) -> LinearProgram {
    let k = c.matchings.len();
    let mut lp = LinearProgram::new(k + extra, sense);
    for r in c.dests..c.dests + c.relays {
        let mut row = vec![0.0; k + extra];
        for j in 0..k {
            row[j] = c.a[j][r];
        }
        lp.add_row(row, Relation::Eq, 0.0);
    }
    let mut conv = vec![1.0; k + extra];
    for v in conv.iter_mut().skip(k) {
        *v = 0.0;
    }
    lp.add_row(conv, Relation::Eq, 1.0);
    lp
}

/// Max-min throughput by explicit LP over all matchings.
pub fn oracle_maxmin(net: &Network) -> Result<OracleSolution> {
    let c = columns(net)?;
    let k = c.matchings.len();
    let mut lp = base_lp(&c, 1, Sense::Maximize);
    lp.objective[k] = 1.0;
    lp.bounds[k] = Bound::FREE;
    for r in 0..c.dests {
        let mut row = vec![0.0; k + 1];
        for j in 0..k {
            row[j] = c.a[j][r];
        }
        row[k] = -1.0;
        lp.add_row(row, Relation::Ge, 0.0);
    }
    let sol = solve_dense_lp(&lp, &Tolerances::default())?;
    Ok(OracleSolution {
        theta: sol.x[k],
        objective: sol.objective,
        expanded: c.expanded,
        matchings: c.matchings,
        times: sol.x[..k].to_vec(),
    })
}

/// Maximum eNB egress with every destination at or above `theta`.
///
/// If `theta` (computed by another solver) is infeasible by rounding, the
/// floor is relaxed by `1e-9 * max(1, theta)` and the LP solved again.
pub fn oracle_mtfs(net: &Network, theta: f64) -> Result<OracleSolution> {
    let c = columns(net)?;
    let k = c.matchings.len();
    let solve_at = |floor: f64| {
        let mut lp = base_lp(&c, 0, Sense::Maximize);
        lp.objective = c.matchings.iter().map(|m| enb_capacity_of_matching(&c.expanded, m)).collect();
        for r in 0..c.dests {
            let row = (0..k).map(|j| c.a[j][r]).collect();
            lp.add_row(row, Relation::Ge, floor);
        }
        solve_dense_lp(&lp, &Tolerances::default())
    };
    let sol = match solve_at(theta) {
        Err(LpError::Infeasible) => solve_at(theta - 1e-9 * theta.max(1.0))?,
        other => other?,
    };
    Ok(OracleSolution { theta, objective: sol.objective, expanded: c.expanded, matchings: c.matchings, times: sol.x })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{throughput_of_schedule, verify_schedule};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-7 * (1.0 + b.abs())
    }

    #[test]
    fn star() {
        let net = Network::builder().mmbs(2).link(0, 1, 2.0).link(0, 2, 4.0).build().unwrap();
        let mm = oracle_maxmin(&net).unwrap();
        assert!(close(mm.theta, 4.0 / 3.0));
        assert!(close(oracle_mtfs(&net, mm.theta).unwrap().objective, 8.0 / 3.0));
        let r2 = net.with_enb_rf(2).unwrap();
        let mm2 = oracle_maxmin(&r2).unwrap();
        assert!(close(mm2.theta, 2.0));
        assert!(close(oracle_mtfs(&r2, mm2.theta).unwrap().objective, 6.0));
    }

    #[test]
    fn relay_triangle() {
        let net = Network::builder().mmbs(2).link(0, 1, 10.0).link(1, 2, 10.0).link(0, 2, 1.0).build().unwrap();
        let mm = oracle_maxmin(&net).unwrap();
        assert!(close(mm.theta, 10.0 / 3.0));
        assert!(close(oracle_mtfs(&net, mm.theta).unwrap().objective, 20.0 / 3.0));
    }

    #[test]
    fn single_link() {
        let net = Network::builder().mmbs(1).link(0, 1, 3.5).build().unwrap();
        assert!(close(oracle_maxmin(&net).unwrap().theta, 3.5));
    }

    #[test]
    fn access_two_ues() {
        let net =
            Network::builder().mmbs(1).ues(2).link(0, 1, 10.0).link(1, 2, 10.0).link(1, 3, 10.0).build().unwrap();
        assert!(close(oracle_maxmin(&net).unwrap().theta, 2.5));
    }

    #[test]
    fn round_trip_schedule() {
        let net = Network::builder()
            .enb_rf(2)
            .mmbs(3)
            .link(0, 1, 3.0)
            .link(0, 2, 5.0)
            .link(1, 3, 4.0)
            .link(2, 3, 2.0)
            .build()
            .unwrap();
        let mm = oracle_maxmin(&net).unwrap();
        let sched = mm.schedule();
        assert!(verify_schedule(&mm.expanded, &sched).is_ok());
        let tput = throughput_of_schedule(&mm.expanded, &sched).unwrap();
        assert!(tput.min() >= mm.theta - 1e-7);
    }

    #[test]
    fn too_large() {
        let net = Network::builder().enb_rf(4).mmbs(9).link(0, 1, 1.0).build();
        // unconnected mmBSs are fine for the size check, which comes first
        let err = oracle_maxmin(&net.unwrap()).unwrap_err();
        assert!(matches!(err, Error::TooLarge(_)));
    }
}
