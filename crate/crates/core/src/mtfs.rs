//! Optimal max-min throughput and maximum-throughput fair scheduling by
//! column generation over matchings.
//!
//! The master LP has one row per destination (mmBS, or UE in access
//! networks), one equality row per relay mmBS in access networks, and a
//! convexity row. Columns are matchings of the expanded network, the
//! throughput variable `theta` (or the artificial `y` in the second phase)
//! and one surplus per destination row. Entering matchings are priced by
//! maximum-weight matching on dual-derived link weights.

use std::collections::VecDeque;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::expand_auto;
use crate::lp::{ColumnDescriptor, SimplexState, Tolerances};
use crate::matching::{max_weight_matching, WeightedGraph};
use crate::model::{
    throughput_of_schedule, LinkId, Matching, Network, NodeId, NodeRole, Schedule, Slot, ThroughputVector,
};

/// Slots shorter than this are dropped and their time moved to the idle slot.
pub const MIN_SLOT_DURATION: f64 = 1e-9;

/// Row structure of the master LP.
#[derive(Debug, Clone, PartialEq)]
pub struct RowLayout {
    /// Destination super nodes; rows `0..dests.len()`.
    pub dests: Vec<NodeId>,
    /// Relay super nodes with a zero net-flow row (access networks only);
    /// rows follow the destination rows.
    pub relays: Vec<NodeId>,
    row_of: Vec<Option<usize>>,
}

impl RowLayout {
    fn new(dests: Vec<NodeId>, relays: Vec<NodeId>, num_super: usize) -> Self {
        let mut row_of = vec![None; num_super];
        for (i, &v) in dests.iter().chain(&relays).enumerate() {
            row_of[v] = Some(i);
        }
        RowLayout { dests, relays, row_of }
    }

    /// Rows excluding the convexity row.
    pub fn num_node_rows(&self) -> usize {
        self.dests.len() + self.relays.len()
    }

    /// Total rows including the convexity row.
    pub fn dim(&self) -> usize {
        self.num_node_rows() + 1
    }

    pub fn row_of(&self, super_node: NodeId) -> Option<usize> {
        self.row_of.get(super_node).copied().flatten()
    }
}

/// Net rate entry of `m` at every super node in `rows`: capacity entering
/// minus capacity leaving, summed over all copies of the super node.
pub fn column_of_matching(net: &Network, m: &Matching, rows: &[NodeId]) -> Vec<f64> {
    let mut index = vec![usize::MAX; net.num_super_nodes()];
    for (i, &v) in rows.iter().enumerate() {
        index[v] = i;
    }
    let mut col = vec![0.0; rows.len()];
    for &l in m.links() {
        let link = net.link(l);
        let (s, d) = (net.super_of(link.src), net.super_of(link.dst));
        if index[d] != usize::MAX {
            col[index[d]] += link.capacity;
        }
        if index[s] != usize::MAX {
            col[index[s]] -= link.capacity;
        }
    }
    col
}

/// Cumulative capacity of the eNB links in `m`.
pub fn enb_capacity_of_matching(net: &Network, m: &Matching) -> f64 {
    m.links()
        .iter()
        .map(|&l| net.link(l))
        .filter(|link| net.node(link.src).role == NodeRole::Enb)
        .map(|link| link.capacity)
        .sum()
}

/// Reduced costs of the three column families at the last pricing round.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Eta {
    pub matching: f64,
    pub theta: f64,
    pub surplus: f64,
}

impl Eta {
    pub fn min(&self) -> f64 {
        self.matching.min(self.theta).min(self.surplus)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SolveLog {
    pub maxmin_pivots: usize,
    pub mtfs_pivots: usize,
    pub pricing_calls: usize,
    pub maxmin_eta: Eta,
    pub mtfs_eta: Eta,
    pub wall_ms: f64,
}

/// The initial BFS-tree schedule and the basis built from it.
#[derive(Debug, Clone)]
pub struct InitialBasis {
    pub theta0: f64,
    /// One single-link slot per tree edge (zero-duration slots included for
    /// relays without destinations below them).
    pub tree: Vec<(LinkId, f64)>,
    pub state: SimplexState,
    pub layout: RowLayout,
}

impl InitialBasis {
    pub fn schedule(&self) -> Schedule {
        let slots = self
            .tree
            .iter()
            .filter(|(_, t)| *t > 0.0)
            .map(|&(l, t)| Slot { matching: Matching::new(vec![l]), duration: t })
            .collect();
        Schedule::new(slots)
    }
}

/// Super nodes that take part in the LP and the layout of their rows.
pub(crate) fn layout_of(net: &Network) -> Result<(RowLayout, Vec<bool>)> {
    let roles = net.super_roles();
    let reach = net.reachable_from_enb();
    let mut super_reach = vec![false; roles.len()];
    for n in net.nodes() {
        if reach[n.id] {
            super_reach[net.super_of(n.id)] = true;
        }
    }
    let access = net.has_ues();
    let mut dests = Vec::new();
    let mut relays = Vec::new();
    for (v, role) in roles.iter().enumerate() {
        match (role, access) {
            (NodeRole::Enb, _) => {}
            (NodeRole::Mmbs, false) | (NodeRole::Ue, true) => {
                if !super_reach[v] {
                    return Err(if access { Error::UnreachableUe(v) } else { Error::Disconnected(v) });
                }
                dests.push(v);
            }
            (NodeRole::Mmbs, true) => {
                if super_reach[v] {
                    relays.push(v);
                }
            }
            (NodeRole::Ue, false) => unreachable!("UEs imply access mode"),
        }
    }
    if dests.is_empty() {
        return Err(if access { Error::NoUes } else { Error::InvalidNetwork("no mmBS".into()) });
    }
    Ok((RowLayout::new(dests, relays, roles.len()), super_reach))
}

fn matching_column(net: &Network, layout: &RowLayout, m: &Matching) -> Vec<f64> {
    let mut col = vec![0.0; layout.dim()];
    for &l in m.links() {
        let link = net.link(l);
        if let Some(r) = layout.row_of(net.super_of(link.dst)) {
            col[r] += link.capacity;
        }
        if let Some(r) = layout.row_of(net.super_of(link.src)) {
            col[r] -= link.capacity;
        }
    }
    col[layout.num_node_rows()] = 1.0;
    col
}

fn theta_column(layout: &RowLayout) -> Vec<f64> {
    let mut col = vec![0.0; layout.dim()];
    for c in col.iter_mut().take(layout.dests.len()) {
        *c = -1.0;
    }
    col
}

fn surplus_column(layout: &RowLayout, k: usize) -> Vec<f64> {
    let mut col = vec![0.0; layout.dim()];
    col[k] = -1.0;
    col
}

/// BFS tree from the first eNB copy; one single-link slot per reached super
/// node with `t_e = theta0 * n_e / c_e`, where `n_e` counts the destinations
/// below `e`.
pub fn initial_schedule(net: &Network) -> Result<InitialBasis> {
    initial_with(net, Tolerances::default())
}

fn initial_with(net: &Network, tol: Tolerances) -> Result<InitialBasis> {
    if !net.is_expanded() {
        return Err(Error::NotExpanded);
    }
    let (layout, active) = layout_of(net)?;
    let supers = net.num_super_nodes();
    let enb1 = net.nodes().iter().find(|n| n.role == NodeRole::Enb).map(|n| n.id).ok_or(Error::NoEnbLinks)?;

    // super-node adjacency; parallel copies collapse to the lowest link id
    let mut adj: Vec<Vec<(NodeId, LinkId)>> = vec![Vec::new(); supers];
    for (l, link) in net.links().iter().enumerate() {
        let s = net.super_of(link.src);
        let d = net.super_of(link.dst);
        if net.node(link.src).role == NodeRole::Enb && link.src != enb1 {
            continue;
        }
        if !active[d] || (s != net.super_of(enb1) && !active[s]) {
            continue;
        }
        adj[s].push((d, l));
    }
    for a in &mut adj {
        a.sort();
        a.dedup_by_key(|e| e.0);
    }
    let root = net.super_of(enb1);
    let mut parent_link: Vec<Option<LinkId>> = vec![None; supers];
    let mut order = Vec::new();
    let mut seen = vec![false; supers];
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &(v, l) in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                parent_link[v] = Some(l);
                queue.push_back(v);
            }
        }
    }
    // destinations below each node, accumulated in reverse BFS order
    let mut below = vec![0usize; supers];
    for &v in &layout.dests {
        below[v] = 1;
    }
    for &v in order.iter().rev() {
        if let Some(l) = parent_link[v] {
            let p = net.super_of(net.link(l).src);
            below[p] += below[v];
        }
    }
    let tree: Vec<(NodeId, LinkId)> = order.iter().filter_map(|&v| parent_link[v].map(|l| (v, l))).collect();
    debug_assert_eq!(tree.len(), layout.num_node_rows());
    let denom: f64 = tree.iter().map(|&(v, l)| below[v] as f64 / net.link(l).capacity).sum();
    let theta0 = 1.0 / denom;

    let mut basis = Vec::with_capacity(layout.dim());
    let mut columns = Vec::with_capacity(layout.dim());
    for &(_, l) in &tree {
        let m = Matching::new(vec![l]);
        columns.push(matching_column(net, &layout, &m));
        basis.push(ColumnDescriptor::Matching(m));
    }
    basis.push(ColumnDescriptor::Theta);
    columns.push(theta_column(&layout));
    let mut costs = vec![0.0; layout.dim()];
    costs[layout.dim() - 1] = -1.0;
    let mut rhs = vec![0.0; layout.dim()];
    rhs[layout.num_node_rows()] = 1.0;
    let state = SimplexState::new(basis, columns, costs, rhs, tol)?;
    let tree = tree
        .iter()
        .map(|&(v, l)| (l, theta0 * below[v] as f64 / net.link(l).capacity))
        .collect();
    Ok(InitialBasis { theta0, tree, state, layout })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    MaxMin,
    Mtfs,
}

/// Column generation on one expanded network.
struct Master<'a> {
    net: &'a Network,
    layout: &'a RowLayout,
    usable: Vec<bool>,
    enb_link: Vec<bool>,
    pricing_calls: usize,
}

enum Entering {
    Matching(Matching, Vec<f64>, f64),
    Theta,
    Surplus(usize),
}

impl<'a> Master<'a> {
    fn new(net: &'a Network, layout: &'a RowLayout) -> Self {
        let usable = net
            .links()
            .iter()
            .map(|l| {
                let src_ok = net.node(l.src).role == NodeRole::Enb || layout.row_of(net.super_of(l.src)).is_some();
                src_ok && layout.row_of(net.super_of(l.dst)).is_some()
            })
            .collect();
        let enb_link = net.links().iter().map(|l| net.node(l.src).role == NodeRole::Enb).collect();
        Master { net, layout, usable, enb_link, pricing_calls: 0 }
    }

    fn price(&mut self, state: &SimplexState, phase: Phase) -> (Eta, Entering) {
        let p = state.dual_variables();
        let conv = p[self.layout.num_node_rows()];
        let row_p = |v: NodeId| self.layout.row_of(self.net.super_of(v)).map_or(0.0, |r| p[r]);
        let weights: Vec<f64> = self
            .net
            .links()
            .iter()
            .enumerate()
            .map(|(l, link)| {
                if !self.usable[l] {
                    return -1.0;
                }
                let mut w = link.capacity * (row_p(link.dst) - row_p(link.src));
                if phase == Phase::Mtfs && self.enb_link[l] {
                    w += link.capacity;
                }
                w
            })
            .collect();
        self.pricing_calls += 1;
        let (m, wsum) = max_weight_matching(&WeightedGraph::from_network(self.net, &weights));
        let dest_p = &p[..self.layout.dests.len()];
        let sum_p: f64 = dest_p.iter().sum();
        let (k_min, p_min) = dest_p
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (k, &v)| if v < best.1 { (k, v) } else { best });
        let eta = Eta {
            matching: -wsum - conv,
            theta: if phase == Phase::MaxMin { -1.0 + sum_p } else { sum_p },
            surplus: p_min,
        };
        let bland = state.bland_active();
        let tol = state.tolerances().optimality;
        let entering = if bland {
            // smallest improving variable in descriptor order
            if eta.theta < -tol {
                Entering::Theta
            } else if let Some(k) = dest_p.iter().position(|&v| v < -tol) {
                Entering::Surplus(k)
            } else {
                self.matching_entry(m, phase)
            }
        } else if eta.theta <= eta.surplus && eta.theta <= eta.matching {
            Entering::Theta
        } else if eta.surplus <= eta.matching {
            Entering::Surplus(k_min)
        } else {
            self.matching_entry(m, phase)
        };
        (eta, entering)
    }

    fn matching_entry(&self, m: Matching, phase: Phase) -> Entering {
        let col = matching_column(self.net, self.layout, &m);
        let cost = match phase {
            Phase::MaxMin => 0.0,
            Phase::Mtfs => -enb_capacity_of_matching(self.net, &m),
        };
        Entering::Matching(m, col, cost)
    }

    /// Runs pivots until no column prices out; the final verdict is taken
    /// on a freshly refactorized basis.
    fn run(&mut self, state: &mut SimplexState, phase: Phase) -> Result<Eta> {
        let tol = state.tolerances().optimality;
        let mut certified = false;
        loop {
            let (eta, entering) = self.price(state, phase);
            if eta.min() >= -tol {
                if certified {
                    return Ok(eta);
                }
                state.refactor()?;
                certified = true;
                continue;
            }
            certified = false;
            let (desc, col, cost) = match entering {
                Entering::Theta => {
                    let desc = if phase == Phase::MaxMin { ColumnDescriptor::Theta } else { ColumnDescriptor::ArtificialY };
                    let cost = if phase == Phase::MaxMin { -1.0 } else { 0.0 };
                    (desc, theta_column(self.layout), cost)
                }
                Entering::Surplus(k) => (ColumnDescriptor::Surplus(k), surplus_column(self.layout, k), 0.0),
                Entering::Matching(m, col, cost) => (ColumnDescriptor::Matching(m), col, cost),
            };
            state.pivot(desc, col, cost)?;
        }
    }
}

/// Result of the max-min phase; reusable as the starting basis of
/// [`solve_mtfs`].
#[derive(Debug, Clone)]
pub struct MaxMinSolution {
    pub theta: f64,
    pub expanded: Network,
    pub state: SimplexState,
    pub layout: RowLayout,
    pub log: SolveLog,
}

impl MaxMinSolution {
    /// Schedule read from the final max-min basis.
    pub fn schedule(&self) -> Schedule {
        schedule_from_basis(&self.state)
    }
}

#[derive(Debug, Clone)]
pub struct MtfsSolution {
    /// Max-min throughput the schedule guarantees.
    pub theta: f64,
    pub expanded: Network,
    /// Schedule on the links of `expanded`.
    pub schedule: Schedule,
    pub throughput: ThroughputVector,
    pub network_throughput: f64,
    pub log: SolveLog,
}

/// Slots from the basic matching columns, in basis order, plus an idle
/// slot holding the remaining frame time.
pub fn schedule_from_basis(state: &SimplexState) -> Schedule {
    let mut slots = Vec::new();
    for (desc, &x) in state.basis().iter().zip(state.values()) {
        if let ColumnDescriptor::Matching(m) = desc {
            if x >= MIN_SLOT_DURATION && !m.is_empty() {
                slots.push(Slot { matching: m.clone(), duration: x });
            }
        }
    }
    let used: f64 = slots.iter().map(|s| s.duration).sum();
    if used > 1.0 {
        for s in &mut slots {
            s.duration /= used;
        }
    } else if 1.0 - used >= MIN_SLOT_DURATION {
        slots.push(Slot { matching: Matching::empty(), duration: 1.0 - used });
    }
    Schedule::new(slots)
}

/// Maximum max-min throughput over all schedules of `net` (expanded
/// automatically).
pub fn solve_maxmin(net: &Network) -> Result<MaxMinSolution> {
    solve_maxmin_with(net, Tolerances::default())
}

pub fn solve_maxmin_with(net: &Network, tol: Tolerances) -> Result<MaxMinSolution> {
    let start = Instant::now();
    let expanded = expand_auto(net)?;
    let init = initial_with(&expanded, tol)?;
    let mut state = init.state;
    let layout = init.layout;
    let mut master = Master::new(&expanded, &layout);
    let eta = master.run(&mut state, Phase::MaxMin)?;
    let theta_pos = state.basis().iter().position(|d| *d == ColumnDescriptor::Theta);
    let theta = theta_pos.map_or(0.0, |i| state.values()[i]);
    let log = SolveLog {
        maxmin_pivots: state.pivots(),
        pricing_calls: master.pricing_calls,
        maxmin_eta: eta,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        ..SolveLog::default()
    };
    Ok(MaxMinSolution { theta, expanded, state, layout, log })
}

/// Maximizes eNB egress subject to every destination receiving at least the
/// max-min throughput, starting from the max-min basis.
pub fn solve_mtfs(mm: &MaxMinSolution) -> Result<MtfsSolution> {
    let start = Instant::now();
    let net = &mm.expanded;
    let layout = &mm.layout;
    let mut state = mm.state.clone();
    let pivots_before = state.pivots();
    let costs: Vec<f64> = state
        .basis()
        .iter()
        .map(|d| match d {
            ColumnDescriptor::Matching(m) => -enb_capacity_of_matching(net, m),
            _ => 0.0,
        })
        .collect();
    state.set_costs(costs);
    if let Some(i) = state.basis().iter().position(|d| *d == ColumnDescriptor::Theta) {
        state.relabel(i, ColumnDescriptor::ArtificialY, 0.0);
    }
    let mut rhs = vec![0.0; layout.dim()];
    for r in rhs.iter_mut().take(layout.dests.len()) {
        *r = mm.theta;
    }
    rhs[layout.num_node_rows()] = 1.0;
    state.set_rhs(rhs)?;
    let mut master = Master::new(net, layout);
    let eta = master.run(&mut state, Phase::Mtfs)?;
    let schedule = schedule_from_basis(&state);
    let throughput = throughput_of_schedule(net, &schedule)?;
    let network_throughput = throughput.total();
    let log = SolveLog {
        mtfs_pivots: state.pivots() - pivots_before,
        pricing_calls: mm.log.pricing_calls + master.pricing_calls,
        mtfs_eta: eta,
        wall_ms: mm.log.wall_ms + start.elapsed().as_secs_f64() * 1e3,
        ..mm.log.clone()
    };
    Ok(MtfsSolution { theta: mm.theta, expanded: net.clone(), schedule, throughput, network_throughput, log })
}

/// Max-min then maximum-throughput fair schedule in one call.
pub fn solve(net: &Network) -> Result<MtfsSolution> {
    solve_mtfs(&solve_maxmin(net)?)
}

/// Access-network variant: UEs are the destinations and every mmBS is a
/// pure relay with zero net flow.
pub fn solve_access(net: &Network) -> Result<MtfsSolution> {
    if !net.has_ues() {
        return Err(Error::NoUes);
    }
    solve(net)
}
