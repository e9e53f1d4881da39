//! eNB and node expansion.
//!
//! Expansion replaces a node with `k` RF chains by `k` single-RF copies so
//! that the RF limit of every node is encoded by the matching constraint.
//! Copies of one super node get contiguous ids; every expanded link keeps
//! the id of the original link it was copied from.

use crate::error::{Error, Result};
use crate::model::{Link, LinkId, LinkTimeVector, Matching, Network, Node, NodeId, NodeRole, Schedule, Slot};

fn expand_with(net: &Network, copies: impl Fn(&Node) -> u32) -> Result<Network> {
    if net.is_expanded() {
        return Err(Error::AlreadyExpanded);
    }
    let mut first = Vec::with_capacity(net.num_nodes());
    let mut nodes = Vec::new();
    for node in net.nodes() {
        first.push(nodes.len());
        let k = copies(node);
        for _ in 0..k {
            nodes.push(Node {
                id: nodes.len(),
                role: node.role,
                rf_chains: if k > 1 || node.role == NodeRole::Enb { 1 } else { node.rf_chains },
                super_node: Some(node.id),
            });
        }
    }
    let mut links = Vec::new();
    for (l, link) in net.links().iter().enumerate() {
        let ks = copies(net.node(link.src)) as usize;
        let kd = copies(net.node(link.dst)) as usize;
        for i in 0..ks {
            for j in 0..kd {
                links.push(Link {
                    src: first[link.src] + i,
                    dst: first[link.dst] + j,
                    capacity: link.capacity,
                    origin: Some(l),
                });
            }
        }
    }
    Network::from_expanded_parts(nodes, links)
}

/// Replaces the eNB by `R` single-RF copies, each inheriting every eNB link.
pub fn expand_enb(net: &Network) -> Result<Network> {
    expand_with(net, |n| if n.role == NodeRole::Enb { n.rf_chains } else { 1 })
}

/// Replaces every node `v` by `R_v` copies; a link `(v, v')` becomes
/// `R_v * R_v'` links of the same capacity.
pub fn expand_nodes(net: &Network) -> Result<Network> {
    expand_with(net, |n| n.rf_chains)
}

/// Expands with [`expand_enb`] when every non-eNB node has one RF chain,
/// otherwise with [`expand_nodes`]. Already-expanded networks pass through.
pub fn expand_auto(net: &Network) -> Result<Network> {
    if net.is_expanded() {
        return Ok(net.clone());
    }
    if net.nodes().iter().all(|n| n.role == NodeRole::Enb || n.rf_chains == 1) {
        expand_enb(net)
    } else {
        expand_nodes(net)
    }
}

/// Expanded-schedule summary on the original links.
#[derive(Debug, Clone, PartialEq)]
pub struct Collapsed {
    /// Per slot, the distinct original links that are active.
    pub schedule: Schedule,
    /// Original link time; parallel copies add up, so multi-RF links may
    /// exceed one.
    pub link_time: LinkTimeVector,
}

/// Maps a schedule on an expanded network back onto the original links and
/// checks that no super node uses more links than it has RF chains.
pub fn collapse_schedule(expanded: &Network, sched: &Schedule) -> Result<Collapsed> {
    if !expanded.is_expanded() {
        return Err(Error::NotExpanded);
    }
    let supers = expanded.num_super_nodes();
    let mut rf = vec![0u32; supers];
    for n in expanded.nodes() {
        rf[expanded.super_of(n.id)] += 1;
    }
    let num_original = expanded.links().iter().filter_map(|l| l.origin).max().map_or(0, |m| m + 1);
    let mut link_time = LinkTimeVector::zeros(num_original);
    let mut slots = Vec::with_capacity(sched.slots.len());
    for (i, slot) in sched.slots.iter().enumerate() {
        let mut used = vec![0u32; supers];
        let mut originals: Vec<LinkId> = Vec::with_capacity(slot.matching.len());
        for &l in slot.matching.links() {
            if l >= expanded.num_links() {
                return Err(Error::UnknownLink { slot: i, link: l });
            }
            let link = expanded.link(l);
            for v in [link.src, link.dst] {
                let s: NodeId = expanded.super_of(v);
                used[s] += 1;
                if used[s] > rf[s] {
                    return Err(Error::RfLimitViolated { node: s, slot: i });
                }
            }
            let o = expanded.origin_of(l);
            link_time.0[o] += slot.duration;
            originals.push(o);
        }
        slots.push(Slot { matching: Matching::new(originals), duration: slot.duration });
    }
    Ok(Collapsed { schedule: Schedule::new(slots), link_time })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_enb_expansion() {
        let net = Network::builder().mmbs(2).link(0, 1, 3.0).link(1, 2, 4.0).build().unwrap();
        let x = expand_enb(&net).unwrap();
        assert!(x.is_expanded());
        assert_eq!(x.num_nodes(), 3);
        for (a, b) in x.links().iter().zip(net.links()) {
            assert_eq!((a.src, a.dst, a.capacity), (b.src, b.dst, b.capacity));
        }
        assert_eq!(expand_enb(&x), Err(Error::AlreadyExpanded));
    }

    #[test]
    fn two_rf_enb_star() {
        let net = Network::builder().enb_rf(2).mmbs(2).link(0, 1, 2.0).link(0, 2, 4.0).build().unwrap();
        let x = expand_enb(&net).unwrap();
        assert_eq!(x.num_nodes(), 4);
        let enb_side = x.links().iter().filter(|l| x.node(l.src).role == NodeRole::Enb).count();
        assert_eq!(enb_side, 4);
        assert_eq!(x.enb_rf(), 2);
        assert_eq!(x.num_super_nodes(), 3);
    }

    #[test]
    fn three_rf_degree_five() {
        let mut b = Network::builder().enb_rf(3).mmbs(5);
        for i in 1..=5 {
            b = b.link(0, i, i as f64);
        }
        let x = expand_enb(&b.build().unwrap()).unwrap();
        assert_eq!(x.num_links(), 15);
        for l in x.links() {
            assert_eq!(l.capacity, x.super_of(l.dst) as f64);
        }
    }

    #[test]
    fn node_expansion_counts() {
        let net = Network::builder().mmbs_with_rf(1, 2).mmbs_with_rf(1, 3).link(0, 1, 1.0).link(1, 2, 7.0).build().unwrap();
        let x = expand_nodes(&net).unwrap();
        let copies: Vec<_> = x.links().iter().filter(|l| l.origin == Some(1)).collect();
        assert_eq!(copies.len(), 6);
        assert!(copies.iter().all(|l| l.capacity == 7.0));

        let ones = Network::builder().mmbs(2).link(0, 1, 1.0).link(1, 2, 1.0).build().unwrap();
        assert_eq!(expand_nodes(&ones).unwrap().num_links(), 2);

        let tri = Network::builder()
            .enb_rf(2)
            .mmbs_with_rf(2, 2)
            .link(0, 1, 1.0)
            .link(0, 2, 1.0)
            .link(1, 2, 1.0)
            .build()
            .unwrap();
        let x = expand_nodes(&tri).unwrap();
        assert_eq!(x.num_nodes(), 6);
        assert_eq!(x.num_links(), 12);
    }

    #[test]
    fn collapse_checks_rf_limits() {
        let net = Network::builder().enb_rf(2).mmbs(3).link(0, 1, 1.0).link(0, 2, 1.0).link(0, 3, 1.0).build().unwrap();
        let x = expand_enb(&net).unwrap();
        // links in expansion order: (e1,m1),(e2,m1),(e1,m2),(e2,m2),(e1,m3),(e2,m3)
        let ok = Schedule::new(vec![Slot { matching: Matching::new(vec![0, 3]), duration: 1.0 }]);
        let c = collapse_schedule(&x, &ok).unwrap();
        assert_eq!(c.schedule.slots[0].matching.links(), &[0, 1]);
        assert_eq!(c.link_time.0, vec![1.0, 1.0, 0.0]);

        let bad = Schedule::new(vec![Slot { matching: Matching::new(vec![0, 3, 4]), duration: 1.0 }]);
        assert_eq!(collapse_schedule(&x, &bad), Err(Error::RfLimitViolated { node: 0, slot: 0 }));
    }

    #[test]
    fn collapse_identity() {
        let net = Network::builder().mmbs(2).link(0, 1, 1.0).link(1, 2, 1.0).build().unwrap();
        let x = expand_enb(&net).unwrap();
        let s = Schedule::new(vec![
            Slot { matching: Matching::new(vec![0]), duration: 0.25 },
            Slot { matching: Matching::new(vec![1]), duration: 0.75 },
        ]);
        assert_eq!(collapse_schedule(&x, &s).unwrap().schedule, s);
    }
}
