use thiserror::Error;

use crate::lp::LpError;
use crate::model::{LinkId, NodeId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("slot {slot} is not a matching: node {node} is used by more than one link")]
    NonMatchingSlot { slot: usize, node: NodeId },
    #[error("slot {slot} references unknown link {link}")]
    UnknownLink { slot: usize, link: LinkId },
    #[error("node {node} has negative net flow {rate}")]
    NegativeNetFlow { node: NodeId, rate: f64 },
    #[error("the eNB has no outgoing links")]
    NoEnbLinks,
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("network is already expanded")]
    AlreadyExpanded,
    #[error("network must be expanded before this operation")]
    NotExpanded,
    #[error("super node {node} uses more than its RF chains in slot {slot}")]
    RfLimitViolated { node: NodeId, slot: usize },
    #[error("graph too large for exhaustive enumeration: {0}")]
    TooLarge(String),
    #[error("node {0} is not reachable from the eNB")]
    Disconnected(NodeId),
    #[error("UE {0} is not reachable from the eNB")]
    UnreachableUe(NodeId),
    #[error("network has no UEs")]
    NoUes,
    #[error("structural bound violated: {0}")]
    BoundViolated(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}
