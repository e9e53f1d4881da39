//! Max-min fair scheduling for mmWave backhaul and access networks.
//!
//! [`mtfs`] computes optimal schedules by column generation over
//! matchings; [`ec`] is the edge-coloring approximation; [`oracle`]
//! enumerates all matchings of small graphs for cross-checking.

pub mod channel;
pub mod ec;
pub mod error;
pub mod expansion;
pub mod lp;
pub mod matching;
pub mod model;
pub mod mtfs;
pub mod oracle;

pub use channel::{generate_grid, ChannelParams, ChannelState, GridScenario, ScenarioConfig, StateModel, StateSampling};
pub use ec::{solve_ec, ConstraintVariant, EcConfig, EcMetrics, EcSolution};
pub use error::{Error, Result};
pub use expansion::{collapse_schedule, expand_auto, expand_enb, expand_nodes};
pub use model::{
    check_connectivity, link_time_of_schedule, max_tput_baseline, throughput_of_schedule, verify_schedule, Link,
    LinkId, LinkTimeVector, Matching, Network, NetworkBuilder, Node, NodeId, NodeRole, Schedule, ScheduleReport,
    Slot, ThroughputVector,
};
pub use mtfs::{solve, solve_access, solve_maxmin, solve_mtfs, MaxMinSolution, MtfsSolution, SolveLog};
