//! Edge-coloring approximation: solve a link-time LP over necessary
//! schedule constraints, quantize link times into copies of length `t_g`,
//! and turn an edge coloring of the resulting multigraph into a schedule.

pub mod coloring;
pub mod lp;
pub mod schedule;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{throughput_of_schedule, LinkTimeVector, Network, NodeRole, Schedule, ThroughputVector};

pub use coloring::{color_bound, color_multigraph, ColoringMultigraph, EdgeColoring, MultiEdge};
pub use lp::{
    ec_access_link_time, ec_maxmin_link_time, ec_multirf_link_time, ec_tput_link_time, link_time_maxmin,
    link_time_tput, ConstraintInfo,
};
pub use schedule::{build_multigraph, cancel_flow_cycles, ec_schedule, ec_structure_bounds, EcSchedule, StructureReport};

/// Which necessary-constraint set the link-time LP uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintVariant {
    /// Single RF chain at every non-eNB node, `R` chains at the eNB.
    SingleRf,
    /// Per-node degree limits only; scheduled on the fully expanded graph.
    MultiRf,
    /// Like `SingleRf`, with UEs as destinations and mmBSs as relays.
    Access,
}

impl ConstraintVariant {
    /// The variant matching the network's shape.
    pub fn for_network(net: &Network) -> Self {
        if net.has_ues() {
            ConstraintVariant::Access
        } else if net.nodes().iter().any(|n| n.role == NodeRole::Mmbs && n.rf_chains > 1) {
            ConstraintVariant::MultiRf
        } else {
            ConstraintVariant::SingleRf
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcConfig {
    /// Quantization step `t_g`, in `(0, 1]`.
    pub granularity: f64,
    /// Link times at or below this are not scheduled.
    pub drop_tolerance: f64,
    pub constraint_variant: ConstraintVariant,
}

impl Default for EcConfig {
    fn default() -> Self {
        EcConfig { granularity: 0.01, drop_tolerance: 1e-9, constraint_variant: ConstraintVariant::SingleRf }
    }
}

impl EcConfig {
    pub fn new(granularity: f64) -> Result<Self> {
        let cfg = EcConfig { granularity, ..EcConfig::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Config with the variant picked from `net`.
    pub fn for_network(net: &Network, granularity: f64) -> Result<Self> {
        let cfg = EcConfig { granularity, constraint_variant: ConstraintVariant::for_network(net), ..EcConfig::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.granularity > 0.0 && self.granularity <= 1.0) {
            return Err(Error::InvalidConfig(format!("granularity {} not in (0, 1]", self.granularity)));
        }
        if !(self.drop_tolerance >= 0.0) {
            return Err(Error::InvalidConfig(format!("drop tolerance {} is negative", self.drop_tolerance)));
        }
        Ok(())
    }
}

/// Per-run numbers reported by [`solve_ec`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcMetrics {
    /// Optimum of the relaxed link-time LP; an upper bound on the optimum.
    pub theta_relaxed: f64,
    pub kappa: usize,
    pub max_degree: usize,
    pub num_edges: usize,
    pub num_vertices: usize,
    /// Minimum destination throughput of the produced schedule.
    pub realized_theta: f64,
    pub network_throughput: f64,
    /// True when the eNB RF count was clamped to its out-degree.
    pub r_clamped: bool,
    /// `(2/3) * theta_relaxed / ((W + R + 1) t_g + 1)`.
    pub guarantee: f64,
}

#[derive(Debug, Clone)]
pub struct EcSolution {
    /// Link times on the original network after cycle cancellation.
    pub link_time: LinkTimeVector,
    pub scheduled: EcSchedule,
    pub structure: StructureReport,
    pub throughput: ThroughputVector,
    pub metrics: EcMetrics,
}

impl EcSolution {
    pub fn expanded(&self) -> &Network {
        &self.scheduled.expanded
    }

    pub fn schedule(&self) -> &Schedule {
        &self.scheduled.schedule
    }
}

/// Runs the full approximation: max-min link-time LP, egress-maximizing LP
/// at that throughput, cycle cancellation, quantization and coloring.
pub fn solve_ec(net: &Network, cfg: &EcConfig) -> Result<EcSolution> {
    cfg.validate()?;
    let variant = cfg.constraint_variant;
    let (theta_relaxed, _, info) = link_time_maxmin(net, variant)?;
    let (_, t, _) = link_time_tput(net, theta_relaxed, variant)?;
    let link_time = cancel_flow_cycles(net, &t, cfg.drop_tolerance);
    let scheduled = ec_schedule(net, &link_time, cfg)?;
    let structure = ec_structure_bounds(&scheduled.multigraph, &scheduled.coloring, net, cfg)?;
    let throughput = throughput_of_schedule(&scheduled.expanded, &scheduled.schedule)?;
    let w = net.nodes().iter().filter(|n| n.role != NodeRole::Enb).count() as f64;
    let r = net.enb_rf() as f64;
    let guarantee = (2.0 / 3.0) * theta_relaxed / ((w + r + 1.0) * cfg.granularity + 1.0);
    let metrics = EcMetrics {
        theta_relaxed,
        kappa: scheduled.kappa,
        max_degree: structure.max_degree,
        num_edges: structure.num_edges,
        num_vertices: structure.num_vertices,
        realized_theta: throughput.min(),
        network_throughput: throughput.total(),
        r_clamped: info.r_clamped,
        guarantee,
    };
    Ok(EcSolution { link_time, scheduled, structure, throughput, metrics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::verify_schedule;

    #[test]
    fn config_validation() {
        assert!(EcConfig::new(0.0).is_err());
        assert!(EcConfig::new(1.5).is_err());
        assert!(EcConfig::new(1.0).is_ok());
    }

    #[test]
    fn variant_from_network() {
        let a = Network::builder().mmbs(1).ues(1).link(0, 1, 1.0).link(1, 2, 1.0).build().unwrap();
        assert_eq!(ConstraintVariant::for_network(&a), ConstraintVariant::Access);
        let m = Network::builder().mmbs_with_rf(1, 2).link(0, 1, 1.0).build().unwrap();
        assert_eq!(ConstraintVariant::for_network(&m), ConstraintVariant::MultiRf);
    }

    #[test]
    fn star_end_to_end() {
        let net = Network::builder().mmbs(2).link(0, 1, 2.0).link(0, 2, 2.0).build().unwrap();
        let sol = solve_ec(&net, &EcConfig::new(0.1).unwrap()).unwrap();
        assert!((sol.metrics.theta_relaxed - 1.0).abs() < 1e-9);
        assert!(verify_schedule(sol.expanded(), sol.schedule()).is_ok());
        assert!(sol.metrics.realized_theta > sol.metrics.guarantee);
        // ten copies meet at the eNB and fill exactly ten colors of 0.1
        assert!((sol.metrics.realized_theta - 1.0).abs() < 1e-9);
    }

    #[test]
    fn chain_with_coarse_granularity() {
        let net = Network::builder().mmbs(2).link(0, 1, 4.0).link(1, 2, 4.0).build().unwrap();
        let sol = solve_ec(&net, &EcConfig::new(0.5).unwrap()).unwrap();
        assert!(verify_schedule(sol.expanded(), sol.schedule()).is_ok());
        assert!(sol.metrics.realized_theta > sol.metrics.guarantee);
        assert!(sol.metrics.realized_theta <= sol.metrics.theta_relaxed + 1e-9);
    }
}
