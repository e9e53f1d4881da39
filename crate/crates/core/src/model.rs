//! Network, matching and schedule data model.
//!
//! A [`Network`] is a directed capacitated graph with a single gateway
//! (the eNB, always node 0 before expansion), a set of mmWave base stations
//! and optionally a layer of UEs. Expanded networks (see
//! [`crate::expansion`]) carry a super-node id on each node and an origin
//! link id on each link so that per-node quantities can be aggregated back
//! onto the original topology.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type LinkId = usize;

/// Absolute slack for schedule-length and feasibility checks.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeRole {
    #[serde(rename = "enb")]
    Enb,
    #[serde(rename = "mmbs")]
    Mmbs,
    #[serde(rename = "ue")]
    Ue,
}

impl fmt::Display for NodeRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeRole::Enb => "eNB",
            NodeRole::Mmbs => "mmBS",
            NodeRole::Ue => "UE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub role: NodeRole,
    #[serde(rename = "rf")]
    pub rf_chains: u32,
    /// Original node this expanded node belongs to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub super_node: Option<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub src: NodeId,
    pub dst: NodeId,
    #[serde(rename = "cap_gbps")]
    pub capacity: f64,
    /// Original link this expanded link was copied from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<LinkId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkDoc")]
pub struct Network {
    nodes: Vec<Node>,
    links: Vec<Link>,
    #[serde(default)]
    expanded: bool,
}

#[derive(Deserialize)]
struct NetworkDoc {
    nodes: Vec<Node>,
    links: Vec<Link>,
    #[serde(default)]
    expanded: bool,
}

impl TryFrom<NetworkDoc> for Network {
    type Error = Error;

    fn try_from(doc: NetworkDoc) -> Result<Self> {
        if doc.expanded {
            Network::from_expanded_parts(doc.nodes, doc.links)
        } else {
            Network::new(doc.nodes, doc.links)
        }
    }
}

impl Network {
    /// Builds an unexpanded network, validating every structural invariant.
    pub fn new(nodes: Vec<Node>, links: Vec<Link>) -> Result<Self> {
        let net = Network { nodes, links, expanded: false };
        net.validate()?;
        Ok(net)
    }

    pub(crate) fn from_expanded_parts(nodes: Vec<Node>, links: Vec<Link>) -> Result<Self> {
        let net = Network { nodes, links, expanded: true };
        net.validate()?;
        Ok(net)
    }

    pub fn builder() -> NetworkBuilder {
        NetworkBuilder::default()
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidNetwork(msg));
        if self.nodes.is_empty() {
            return bad("no nodes".into());
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id != i {
                return bad(format!("node ids must be dense and ordered, found {} at {i}", node.id));
            }
            if node.rf_chains == 0 {
                return bad(format!("node {i} has zero RF chains"));
            }
        }
        if self.nodes[0].role != NodeRole::Enb {
            return bad("node 0 must be the eNB".into());
        }
        if self.expanded {
            for node in &self.nodes {
                let Some(s) = node.super_node else {
                    return bad(format!("expanded node {} has no super node", node.id));
                };
                if (node.role == NodeRole::Enb) != (s == 0) {
                    return bad(format!("expanded node {} maps to the wrong super node", node.id));
                }
            }
        } else {
            let enbs = self.nodes.iter().filter(|n| n.role == NodeRole::Enb).count();
            if enbs != 1 {
                return bad(format!("expected exactly one eNB, found {enbs}"));
            }
        }
        let mut seen = HashSet::new();
        for (i, link) in self.links.iter().enumerate() {
            if link.src >= self.nodes.len() || link.dst >= self.nodes.len() {
                return bad(format!("link {i} references a missing node"));
            }
            if link.src == link.dst {
                return bad(format!("link {i} is a self loop"));
            }
            if !(link.capacity.is_finite() && link.capacity > 0.0) {
                return bad(format!("link {i} has non-positive capacity {}", link.capacity));
            }
            if self.nodes[link.dst].role == NodeRole::Enb {
                return bad(format!("link {i} enters the eNB"));
            }
            if self.nodes[link.src].role == NodeRole::Ue {
                return bad(format!("link {i} leaves a UE"));
            }
            if !self.expanded && !seen.insert((link.src, link.dst)) {
                return bad(format!("duplicate link {} -> {}", link.src, link.dst));
            }
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_links(&self) -> usize {
        self.links.len()
    }

    pub fn is_expanded(&self) -> bool {
        self.expanded
    }

    /// Super node of `id`; the node itself in an unexpanded network.
    pub fn super_of(&self, id: NodeId) -> NodeId {
        self.nodes[id].super_node.unwrap_or(id)
    }

    /// Original link of `id`; the link itself in an unexpanded network.
    pub fn origin_of(&self, id: LinkId) -> LinkId {
        self.links[id].origin.unwrap_or(id)
    }

    /// Number of super nodes (nodes of the unexpanded network).
    pub fn num_super_nodes(&self) -> usize {
        self.nodes.iter().map(|n| self.super_of(n.id)).max().map_or(0, |m| m + 1)
    }

    /// Role of every super node, indexed by super node id.
    pub fn super_roles(&self) -> Vec<NodeRole> {
        let mut roles = vec![NodeRole::Mmbs; self.num_super_nodes()];
        for n in &self.nodes {
            roles[self.super_of(n.id)] = n.role;
        }
        roles
    }

    /// RF chains of the original eNB.
    pub fn enb_rf(&self) -> u32 {
        if self.expanded {
            self.nodes.iter().filter(|n| n.role == NodeRole::Enb).count() as u32
        } else {
            self.nodes[0].rf_chains
        }
    }

    pub fn has_ues(&self) -> bool {
        self.nodes.iter().any(|n| n.role == NodeRole::Ue)
    }

    /// Number of mmBS super nodes.
    pub fn num_mmbs(&self) -> usize {
        self.super_roles().iter().filter(|r| **r == NodeRole::Mmbs).count()
    }

    /// Destination super nodes in ascending id order: UEs when present,
    /// otherwise mmBSs.
    pub fn destinations(&self) -> Vec<NodeId> {
        let want = if self.has_ues() { NodeRole::Ue } else { NodeRole::Mmbs };
        self.super_roles()
            .iter()
            .enumerate()
            .filter(|(_, r)| **r == want)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn out_links(&self, v: NodeId) -> impl Iterator<Item = (LinkId, &Link)> {
        self.links.iter().enumerate().filter(move |(_, l)| l.src == v)
    }

    /// Nodes (expanded ids) reachable from any eNB node along directed links.
    pub fn reachable_from_enb(&self) -> Vec<bool> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for l in &self.links {
            adj[l.src].push(l.dst);
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut queue: VecDeque<NodeId> = self
            .nodes
            .iter()
            .filter(|n| n.role == NodeRole::Enb)
            .map(|n| n.id)
            .collect();
        for &q in &queue {
            seen[q] = true;
        }
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// Copy of this network with every capacity multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Network {
        let mut out = self.clone();
        for l in &mut out.links {
            l.capacity *= factor;
        }
        out
    }

    /// Copy with the given RF chain count on every mmBS.
    pub fn with_mmbs_rf(&self, rf: u32) -> Result<Network> {
        if self.expanded {
            return Err(Error::AlreadyExpanded);
        }
        let mut out = self.clone();
        for n in &mut out.nodes {
            if n.role == NodeRole::Mmbs {
                n.rf_chains = rf.max(1);
            }
        }
        Ok(out)
    }

    /// Copy with the eNB RF chain count replaced.
    pub fn with_enb_rf(&self, rf: u32) -> Result<Network> {
        if self.expanded {
            return Err(Error::AlreadyExpanded);
        }
        let mut out = self.clone();
        out.nodes[0].rf_chains = rf.max(1);
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Convenience constructor for small hand-written topologies.
///
/// Node 0 is the eNB; mmBSs and UEs are numbered in the order they are added.
#[derive(Debug, Clone)]
pub struct NetworkBuilder {
    nodes: Vec<Node>,
    links: Vec<Link>,
}

impl Default for NetworkBuilder {
    fn default() -> Self {
        NetworkBuilder {
            nodes: vec![Node { id: 0, role: NodeRole::Enb, rf_chains: 1, super_node: None }],
            links: Vec::new(),
        }
    }
}

impl NetworkBuilder {
    pub fn enb_rf(mut self, rf: u32) -> Self {
        self.nodes[0].rf_chains = rf;
        self
    }

    fn push(mut self, role: NodeRole, count: usize, rf: u32) -> Self {
        for _ in 0..count {
            let id = self.nodes.len();
            self.nodes.push(Node { id, role, rf_chains: rf, super_node: None });
        }
        self
    }

    pub fn mmbs(self, count: usize) -> Self {
        self.push(NodeRole::Mmbs, count, 1)
    }

    pub fn mmbs_with_rf(self, count: usize, rf: u32) -> Self {
        self.push(NodeRole::Mmbs, count, rf)
    }

    pub fn ues(self, count: usize) -> Self {
        self.push(NodeRole::Ue, count, 1)
    }

    pub fn link(mut self, src: NodeId, dst: NodeId, capacity: f64) -> Self {
        self.links.push(Link { src, dst, capacity, origin: None });
        self
    }

    pub fn build(self) -> Result<Network> {
        Network::new(self.nodes, self.links)
    }
}

/// A set of links sharing no endpoint, stored as sorted link ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Matching(Vec<LinkId>);

impl Matching {
    pub fn new(mut links: Vec<LinkId>) -> Self {
        links.sort_unstable();
        links.dedup();
        Matching(links)
    }

    pub fn empty() -> Self {
        Matching(Vec::new())
    }

    pub fn links(&self) -> &[LinkId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, link: LinkId) -> bool {
        self.0.binary_search(&link).is_ok()
    }

    /// First node touched twice, or `None` if this is a matching of `net`.
    /// Link ids must be valid for `net`.
    pub fn conflict_in(&self, net: &Network) -> Option<NodeId> {
        let mut used = HashSet::new();
        for &l in &self.0 {
            let link = net.link(l);
            for v in [link.src, link.dst] {
                if !used.insert(v) {
                    return Some(v);
                }
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    #[serde(rename = "links")]
    pub matching: Matching,
    pub duration: f64,
}

/// Ordered slots of a unit-length frame.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub slots: Vec<Slot>,
}

impl Schedule {
    pub fn new(slots: Vec<Slot>) -> Self {
        Schedule { slots }
    }

    /// One idle slot covering the whole frame.
    pub fn idle() -> Self {
        Schedule { slots: vec![Slot { matching: Matching::empty(), duration: 1.0 }] }
    }

    pub fn total_duration(&self) -> f64 {
        self.slots.iter().map(|s| s.duration).sum()
    }

    /// Number of slots with at least one active link.
    pub fn active_slots(&self) -> usize {
        self.slots.iter().filter(|s| !s.matching.is_empty()).count()
    }

    /// Multiplies every duration by `factor`.
    pub fn scaled(&self, factor: f64) -> Schedule {
        Schedule {
            slots: self
                .slots
                .iter()
                .map(|s| Slot { matching: s.matching.clone(), duration: s.duration * factor })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Total active time per link, indexed by link id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkTimeVector(pub Vec<f64>);

impl LinkTimeVector {
    pub fn zeros(n: usize) -> Self {
        LinkTimeVector(vec![0.0; n])
    }

    pub fn get(&self, link: LinkId) -> f64 {
        self.0[link]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest violation of the per-node constraint `sum t_e <= rf(v)`,
    /// evaluated on nodes of `net` (expanded ids). Zero when satisfied.
    pub fn max_degree_excess(&self, net: &Network) -> f64 {
        let mut load = vec![0.0; net.num_nodes()];
        for (l, link) in net.links().iter().enumerate() {
            load[link.src] += self.0[l];
            load[link.dst] += self.0[l];
        }
        load.iter()
            .zip(net.nodes())
            .map(|(x, n)| x - n.rf_chains as f64)
            .fold(0.0, f64::max)
    }
}

/// Delivered rate per destination super node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputVector {
    pub nodes: Vec<NodeId>,
    pub rates: Vec<f64>,
}

impl ThroughputVector {
    pub fn min(&self) -> f64 {
        self.rates.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn total(&self) -> f64 {
        self.rates.iter().sum()
    }

    pub fn get(&self, node: NodeId) -> Option<f64> {
        self.nodes.iter().position(|&n| n == node).map(|i| self.rates[i])
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }
}

/// Net rate (in minus out) per super node, accumulated over all slots.
fn net_rates(net: &Network, sched: &Schedule) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rate = vec![0.0; net.num_super_nodes()];
    let mut scale = vec![0.0; net.num_super_nodes()];
    for (i, slot) in sched.slots.iter().enumerate() {
        check_slot(net, i, slot)?;
        for &l in slot.matching.links() {
            let link = net.link(l);
            let flow = slot.duration * link.capacity;
            rate[net.super_of(link.dst)] += flow;
            rate[net.super_of(link.src)] -= flow;
            scale[net.super_of(link.dst)] += flow.abs();
            scale[net.super_of(link.src)] += flow.abs();
        }
    }
    Ok((rate, scale))
}

fn check_slot(net: &Network, i: usize, slot: &Slot) -> Result<()> {
    if let Some(&link) = slot.matching.links().iter().find(|&&l| l >= net.num_links()) {
        return Err(Error::UnknownLink { slot: i, link });
    }
    match slot.matching.conflict_in(net) {
        Some(node) => Err(Error::NonMatchingSlot { slot: i, node }),
        None => Ok(()),
    }
}

/// Per-destination throughput delivered by `sched` on `net`.
///
/// Destinations are mmBSs for backhaul networks and UEs for access
/// networks. Relays (mmBSs in access networks) must not end up with a
/// negative net rate.
pub fn throughput_of_schedule(net: &Network, sched: &Schedule) -> Result<ThroughputVector> {
    let (rate, scale) = net_rates(net, sched)?;
    let roles = net.super_roles();
    let access = net.has_ues();
    for (v, r) in roles.iter().enumerate() {
        let checked = matches!(r, NodeRole::Ue) || (*r == NodeRole::Mmbs);
        if checked && rate[v] < -FEASIBILITY_TOL * scale[v].max(1.0) {
            return Err(Error::NegativeNetFlow { node: v, rate: rate[v] });
        }
    }
    let nodes = net.destinations();
    let rates = nodes
        .iter()
        .map(|&v| {
            debug_assert!(!access || roles[v] == NodeRole::Ue);
            rate[v].max(0.0)
        })
        .collect();
    Ok(ThroughputVector { nodes, rates })
}

/// Net rate at each mmBS relay of an access network (in minus out).
pub fn relay_net_rates(net: &Network, sched: &Schedule) -> Result<Vec<(NodeId, f64)>> {
    let (rate, _) = net_rates(net, sched)?;
    Ok(net
        .super_roles()
        .iter()
        .enumerate()
        .filter(|(_, r)| **r == NodeRole::Mmbs)
        .map(|(v, _)| (v, rate[v]))
        .collect())
}

/// Total active time of each link of `net` in `sched`.
pub fn link_time_of_schedule(net: &Network, sched: &Schedule) -> LinkTimeVector {
    let mut t = LinkTimeVector::zeros(net.num_links());
    for slot in &sched.slots {
        for &l in slot.matching.links() {
            if l < t.0.len() {
                t.0[l] += slot.duration;
            }
        }
    }
    t
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    UnknownLink { slot: usize, link: LinkId },
    NonMatchingSlot { slot: usize, node: NodeId },
    NonPositiveDuration { slot: usize, duration: f64 },
    LengthMismatch { total: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownLink { slot, link } => write!(f, "slot {slot}: unknown link {link}"),
            Violation::NonMatchingSlot { slot, node } => {
                write!(f, "slot {slot}: node {node} shared by two links")
            }
            Violation::NonPositiveDuration { slot, duration } => {
                write!(f, "slot {slot}: duration {duration} is not positive")
            }
            Violation::LengthMismatch { total } => write!(f, "slot durations sum to {total}, not 1"),
        }
    }
}

/// Outcome of [`verify_schedule`]; violations are listed in slot order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScheduleReport {
    pub violations: Vec<Violation>,
}

impl ScheduleReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

/// Checks that every slot is a matching of `net` with positive duration and
/// that the frame has unit length.
pub fn verify_schedule(net: &Network, sched: &Schedule) -> ScheduleReport {
    let mut violations = Vec::new();
    for (i, slot) in sched.slots.iter().enumerate() {
        match check_slot(net, i, slot) {
            Err(Error::UnknownLink { slot, link }) => {
                violations.push(Violation::UnknownLink { slot, link })
            }
            Err(Error::NonMatchingSlot { slot, node }) => {
                violations.push(Violation::NonMatchingSlot { slot, node })
            }
            _ => {}
        }
        if !(slot.duration > 0.0) {
            violations.push(Violation::NonPositiveDuration { slot: i, duration: slot.duration });
        }
    }
    let total = sched.total_duration();
    if !((total - 1.0).abs() <= FEASIBILITY_TOL) {
        violations.push(Violation::LengthMismatch { total });
    }
    ScheduleReport { violations }
}

/// Network throughput of the MAX-TPUT schedule: the `min(R, L)` strongest
/// eNB links active for the whole frame.
pub fn max_tput_baseline(net: &Network) -> Result<f64> {
    if net.is_expanded() {
        return Err(Error::AlreadyExpanded);
    }
    let mut caps: Vec<f64> = net.out_links(0).map(|(_, l)| l.capacity).collect();
    if caps.is_empty() {
        return Err(Error::NoEnbLinks);
    }
    caps.sort_by(|a, b| b.total_cmp(a));
    let take = (net.enb_rf() as usize).min(caps.len());
    Ok(caps[..take].iter().sum())
}

/// True when every non-eNB node is reachable from the eNB.
pub fn check_connectivity(net: &Network) -> bool {
    net.reachable_from_enb().into_iter().all(|r| r)
}
