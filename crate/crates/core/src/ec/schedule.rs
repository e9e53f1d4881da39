//! From link times to a unit-frame schedule: reduce, expand, build the
//! coloring multigraph, color, and scale.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::{expand_enb, expand_nodes};
use crate::model::{LinkTimeVector, Matching, Network, NodeRole, Schedule, Slot};

use super::coloring::{color_bound, color_multigraph, ColoringMultigraph, EdgeColoring};
use super::{ConstraintVariant, EcConfig};

/// Removes directed cycles of positive flow `c_e t_e` by cancelling the
/// smallest flow around each cycle. Net rates at every node are unchanged
/// and no link time grows.
pub fn cancel_flow_cycles(net: &Network, t: &LinkTimeVector, tol: f64) -> LinkTimeVector {
    let mut t = t.clone();
    let n = net.num_nodes();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, l) in net.links().iter().enumerate() {
        out[l.src].push(e);
    }
    while let Some(cycle) = find_cycle(net, &out, &t, tol) {
        let delta = cycle.iter().map(|&e| net.link(e).capacity * t.0[e]).fold(f64::INFINITY, f64::min);
        let argmin = cycle
            .iter()
            .copied()
            .min_by(|&a, &b| (net.link(a).capacity * t.0[a]).total_cmp(&(net.link(b).capacity * t.0[b])))
            .expect("non-empty cycle");
        for &e in &cycle {
            t.0[e] = (t.0[e] - delta / net.link(e).capacity).max(0.0);
        }
        t.0[argmin] = 0.0;
    }
    t
}

fn find_cycle(net: &Network, out: &[Vec<usize>], t: &LinkTimeVector, tol: f64) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let n = net.num_nodes();
    let mut mark = vec![Mark::New; n];
    let mut via = vec![usize::MAX; n];
    for root in 0..n {
        if mark[root] != Mark::New {
            continue;
        }
        // iterative DFS with an explicit edge cursor per node
        let mut stack = vec![(root, 0usize)];
        mark[root] = Mark::Open;
        while let Some(&mut (v, ref mut k)) = stack.last_mut() {
            if *k == out[v].len() {
                mark[v] = Mark::Done;
                stack.pop();
                continue;
            }
            let e = out[v][*k];
            *k += 1;
            if t.0[e] <= tol {
                continue;
            }
            let w = net.link(e).dst;
            match mark[w] {
                Mark::New => {
                    mark[w] = Mark::Open;
                    via[w] = e;
                    stack.push((w, 0));
                }
                Mark::Open => {
                    let mut cycle = vec![e];
                    let mut x = v;
                    while x != w {
                        let f = via[x];
                        cycle.push(f);
                        x = net.link(f).src;
                    }
                    return Some(cycle);
                }
                Mark::Done => {}
            }
        }
    }
    None
}

/// Outcome of scheduling a link-time vector.
#[derive(Debug, Clone)]
pub struct EcSchedule {
    /// Expanded network the schedule's links refer to.
    pub expanded: Network,
    /// Link time of each expanded link before quantization, after tiny
    /// times are snapped and relay outflow is balanced.
    pub expanded_time: LinkTimeVector,
    pub multigraph: ColoringMultigraph,
    pub coloring: EdgeColoring,
    pub kappa: usize,
    /// Factor applied to every slot: `1 / max(1, kappa * t_g)`.
    pub scale: f64,
    pub schedule: Schedule,
}

/// Link times of the expanded network: a link between super nodes with
/// `k_s` and `k_d` copies gets `t / (k_s * k_d)` on each of its copies.
fn expand_times(net: &Network, expanded: &Network, t: &LinkTimeVector) -> LinkTimeVector {
    let mut copies = vec![0usize; net.num_nodes()];
    for n in expanded.nodes() {
        copies[expanded.super_of(n.id)] += 1;
    }
    LinkTimeVector(
        expanded
            .links()
            .iter()
            .enumerate()
            .map(|(l, link)| {
                let o = expanded.origin_of(l);
                let k = copies[expanded.super_of(link.src)] * copies[expanded.super_of(link.dst)];
                t.get(o) / k as f64
            })
            .collect(),
    )
}

/// Zeroes times at or below `drop_tolerance`, trims remainders that small
/// off the last full copy, then makes sure no node sends more than it
/// receives: nodes are visited in topological order of the positive-time
/// links and any excess outflow is scaled away. `t` must be cycle-free.
fn snap_and_balance(expanded: &Network, t: &mut LinkTimeVector, cfg: &EcConfig) {
    let tg = cfg.granularity;
    for x in t.0.iter_mut() {
        if *x <= cfg.drop_tolerance {
            *x = 0.0;
            continue;
        }
        let full = (*x / tg + 1e-9).floor();
        if *x - full * tg <= cfg.drop_tolerance {
            *x = (full * tg).min(*x);
        }
    }
    let roles = expanded.super_roles();
    let supers = roles.len();
    let mut indeg = vec![0usize; supers];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); supers];
    for (l, link) in expanded.links().iter().enumerate() {
        if t.0[l] > 0.0 {
            let (s, d) = (expanded.super_of(link.src), expanded.super_of(link.dst));
            out[s].push(l);
            indeg[d] += 1;
        }
    }
    let mut inflow = vec![0.0; supers];
    let mut ready: Vec<usize> = (0..supers).filter(|&v| indeg[v] == 0).collect();
    while let Some(v) = ready.pop() {
        if roles[v] != NodeRole::Enb {
            let outflow: f64 = out[v].iter().map(|&l| expanded.link(l).capacity * t.0[l]).sum();
            if outflow > inflow[v] {
                let k = if outflow > 0.0 { inflow[v] / outflow } else { 0.0 };
                for &l in &out[v] {
                    t.0[l] *= k;
                }
            }
        }
        for &l in &out[v] {
            let d = expanded.super_of(expanded.link(l).dst);
            inflow[d] += expanded.link(l).capacity * t.0[l];
            indeg[d] -= 1;
            if indeg[d] == 0 {
                ready.push(d);
            }
        }
    }
}

/// Edge copies of duration `t_g` plus one shorter remainder copy per link;
/// links at or below `drop_tolerance` are left out.
pub fn build_multigraph(expanded: &Network, t: &LinkTimeVector, cfg: &EcConfig) -> ColoringMultigraph {
    let tg = cfg.granularity;
    let mut gm = ColoringMultigraph::new(expanded.num_nodes());
    for (l, link) in expanded.links().iter().enumerate() {
        let te = t.get(l);
        if te <= cfg.drop_tolerance {
            continue;
        }
        let full = (te / tg + 1e-9).floor() as usize;
        for i in 0..full {
            // an exact multiple may overshoot by rounding; trim the last copy
            let d = if i + 1 == full { (te - (full - 1) as f64 * tg).min(tg) } else { tg };
            gm.add_edge(link.src, link.dst, l, d);
        }
        let rest = te - full as f64 * tg;
        if rest > cfg.drop_tolerance {
            gm.add_edge(link.src, link.dst, l, rest);
        }
    }
    gm
}

/// One slot of length `t_g` per color, split into sub-slots so that every
/// member link is active exactly for its copy's duration; the frame is
/// scaled down when `kappa * t_g > 1` and padded with an idle slot.
pub fn ec_schedule(net: &Network, t: &LinkTimeVector, cfg: &EcConfig) -> Result<EcSchedule> {
    cfg.validate()?;
    if t.len() != net.num_links() {
        return Err(Error::InvalidNetwork(format!("{} link times for {} links", t.len(), net.num_links())));
    }
    let expanded = match cfg.constraint_variant {
        ConstraintVariant::MultiRf => expand_nodes(net)?,
        _ => expand_enb(net)?,
    };
    let mut expanded_time = expand_times(net, &expanded, t);
    snap_and_balance(&expanded, &mut expanded_time, cfg);
    let multigraph = build_multigraph(&expanded, &expanded_time, cfg);
    let coloring = color_multigraph(&multigraph);
    let kappa = coloring.num_colors;
    let frame = (kappa as f64 * cfg.granularity).max(1.0);
    let scale = 1.0 / frame;

    let mut slots = Vec::new();
    for class in coloring.classes() {
        let mut members: Vec<(f64, usize)> =
            class.iter().map(|&e| (multigraph.edges[e].duration, multigraph.edges[e].link)).collect();
        members.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut done = 0.0;
        for i in 0..members.len() {
            let len = members[i].0 - done;
            if len <= 0.0 {
                continue;
            }
            let links: Vec<usize> = members[i..].iter().map(|m| m.1).collect();
            slots.push(Slot { matching: Matching::new(links), duration: len * scale });
            done = members[i].0;
        }
    }
    let used: f64 = slots.iter().map(|s| s.duration).sum();
    if 1.0 - used > 1e-12 {
        slots.push(Slot { matching: Matching::empty(), duration: 1.0 - used });
    }
    Ok(EcSchedule { expanded, expanded_time, multigraph, coloring, kappa, scale, schedule: Schedule::new(slots) })
}

/// Structural bounds on the coloring multigraph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub max_degree: usize,
    pub num_vertices: usize,
    pub num_edges: usize,
    pub kappa: usize,
    pub color_bound: usize,
    /// `W + R + 1/t_g - 1`; `None` when not applicable (multi-RF networks).
    pub degree_bound: Option<f64>,
    /// `W + R`.
    pub vertex_bound: Option<f64>,
    /// `(W^2 + (2R - 1) W + (W + R) / t_g) / 2`, strict.
    pub edge_bound: Option<f64>,
}

/// Checks the coloring count and, for single-RF eNB expansion, the degree,
/// vertex and edge bounds of the multigraph. `W` counts all non-eNB nodes.
pub fn ec_structure_bounds(
    gm: &ColoringMultigraph,
    coloring: &EdgeColoring,
    net: &Network,
    cfg: &EcConfig,
) -> Result<StructureReport> {
    let delta = gm.max_degree();
    let mut report = StructureReport {
        max_degree: delta,
        num_vertices: gm.num_vertices,
        num_edges: gm.edges.len(),
        kappa: coloring.num_colors,
        color_bound: color_bound(delta),
        degree_bound: None,
        vertex_bound: None,
        edge_bound: None,
    };
    if !coloring.is_proper(gm) {
        return Err(Error::BoundViolated("coloring is not proper".into()));
    }
    if report.kappa > report.color_bound {
        return Err(Error::BoundViolated(format!("{} colors > {}", report.kappa, report.color_bound)));
    }
    if cfg.constraint_variant == ConstraintVariant::MultiRf {
        return Ok(report);
    }
    let w = net.nodes().iter().filter(|n| n.role != NodeRole::Enb).count() as f64;
    let r = net.enb_rf() as f64;
    let tg = cfg.granularity;
    let db = w + r + 1.0 / tg - 1.0;
    let vb = w + r;
    let eb = 0.5 * (w * w + (2.0 * r - 1.0) * w + (w + r) / tg);
    report.degree_bound = Some(db);
    report.vertex_bound = Some(vb);
    report.edge_bound = Some(eb);
    let slack = 1e-6;
    if delta as f64 > db + slack {
        return Err(Error::BoundViolated(format!("max degree {delta} > {db}")));
    }
    if gm.num_vertices as f64 > vb + slack {
        return Err(Error::BoundViolated(format!("{} vertices > {vb}", gm.num_vertices)));
    }
    if gm.edges.len() as f64 >= eb + slack {
        return Err(Error::BoundViolated(format!("{} edges >= {eb}", gm.edges.len())));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{link_time_of_schedule, verify_schedule};

    fn cfg(tg: f64) -> EcConfig {
        EcConfig { granularity: tg, ..EcConfig::default() }
    }

    #[test]
    fn single_link_quantization() {
        let net = Network::builder().mmbs(1).link(0, 1, 5.0).build().unwrap();
        let out = ec_schedule(&net, &LinkTimeVector(vec![0.25]), &cfg(0.1)).unwrap();
        let durs: Vec<f64> = out.multigraph.edges.iter().map(|e| e.duration).collect();
        assert_eq!(durs.len(), 3);
        assert!((durs[0] - 0.1).abs() < 1e-12 && (durs[1] - 0.1).abs() < 1e-12 && (durs[2] - 0.05).abs() < 1e-12);
        assert_eq!(out.kappa, 3);
        assert_eq!(out.scale, 1.0);
        let realized = link_time_of_schedule(&out.expanded, &out.schedule);
        assert!((realized.get(0) - 0.25).abs() < 1e-12);
        assert!(verify_schedule(&out.expanded, &out.schedule).is_ok());
    }

    #[test]
    fn exact_multiple_has_no_empty_copy() {
        let net = Network::builder().mmbs(1).link(0, 1, 5.0).build().unwrap();
        let out = ec_schedule(&net, &LinkTimeVector(vec![0.3]), &cfg(0.1)).unwrap();
        assert_eq!(out.multigraph.edges.len(), 3);
    }

    #[test]
    fn overloaded_node_is_scaled() {
        // two links sharing node 1, each fully active
        let net = Network::builder().mmbs(2).link(0, 1, 5.0).link(1, 2, 5.0).build().unwrap();
        let out = ec_schedule(&net, &LinkTimeVector(vec![1.0, 1.0]), &cfg(0.5)).unwrap();
        assert_eq!(out.multigraph.max_degree(), 4);
        assert_eq!(out.kappa, 4);
        assert!((out.scale - 0.5).abs() < 1e-12);
        let realized = link_time_of_schedule(&out.expanded, &out.schedule);
        assert!((realized.get(0) - 0.5).abs() < 1e-12 && (realized.get(1) - 0.5).abs() < 1e-12);
        assert!(verify_schedule(&out.expanded, &out.schedule).is_ok());
    }

    #[test]
    fn zero_times_give_idle_frame() {
        let net = Network::builder().mmbs(1).link(0, 1, 5.0).build().unwrap();
        let out = ec_schedule(&net, &LinkTimeVector(vec![0.0]), &cfg(0.1)).unwrap();
        assert_eq!(out.kappa, 0);
        assert_eq!(out.schedule, Schedule::idle());
    }

    #[test]
    fn enb_time_split_over_copies() {
        let net = Network::builder().enb_rf(2).mmbs(1).link(0, 1, 5.0).build().unwrap();
        let out = ec_schedule(&net, &LinkTimeVector(vec![0.4]), &cfg(0.1)).unwrap();
        assert!(out.expanded_time.as_slice().iter().all(|&x| (x - 0.2).abs() < 1e-12));
        assert_eq!(out.multigraph.edges.len(), 4);
    }

    #[test]
    fn cycles_are_cancelled() {
        // 1 -> 2 -> 3 -> 1 carries a flow cycle on top of the eNB feed
        let net = Network::builder()
            .mmbs(3)
            .link(0, 1, 10.0)
            .link(1, 2, 5.0)
            .link(2, 3, 5.0)
            .link(3, 1, 2.0)
            .build()
            .unwrap();
        let t = LinkTimeVector(vec![0.5, 0.4, 0.3, 0.5]);
        let c = cancel_flow_cycles(&net, &t, 1e-12);
        // smallest cycle flow is 1.0 (link 3 -> 1); it disappears
        assert_eq!(c.get(3), 0.0);
        assert!((c.get(1) - 0.2).abs() < 1e-12 && (c.get(2) - 0.1).abs() < 1e-12);
        assert_eq!(c.get(0), 0.5);
    }

    #[test]
    fn relay_outflow_capped_by_inflow() {
        let net = Network::builder().mmbs(1).ues(1).link(0, 1, 2.0).link(1, 2, 4.0).build().unwrap();
        let c = EcConfig { constraint_variant: ConstraintVariant::Access, ..cfg(0.1) };
        let out = ec_schedule(&net, &LinkTimeVector(vec![0.5, 0.25 + 1e-7]), &c).unwrap();
        assert!((out.expanded_time.get(1) - 0.25).abs() < 1e-15);
        assert!(crate::model::throughput_of_schedule(&out.expanded, &out.schedule).is_ok());
    }

    #[test]
    fn tiny_remainder_is_trimmed() {
        let net = Network::builder().mmbs(1).link(0, 1, 5.0).build().unwrap();
        let out = ec_schedule(&net, &LinkTimeVector(vec![0.2 + 1e-10]), &cfg(0.1)).unwrap();
        assert_eq!(out.multigraph.edges.len(), 2);
        assert!((out.expanded_time.get(0) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn bound_formula() {
        // W = 4, R = 2, t_g = 0.5
        let net = Network::builder().enb_rf(2).mmbs(4).link(0, 1, 1.0).build().unwrap();
        let gm = ColoringMultigraph::new(6);
        let coloring = EdgeColoring { colors: vec![], num_colors: 0 };
        let rep = ec_structure_bounds(&gm, &coloring, &net, &cfg(0.5)).unwrap();
        assert_eq!(rep.degree_bound, Some(7.0));
    }
}
