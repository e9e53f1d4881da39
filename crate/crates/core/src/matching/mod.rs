//! Exact maximum-weight matching (the column-generation pricing oracle) and
//! exhaustive matching enumeration (the test oracle).

mod blossom;

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{LinkId, Matching, Network};

/// Maximum vertex count accepted by [`enumerate_matchings`].
pub const ENUMERATION_MAX_VERTICES: usize = 16;
/// Maximum number of matchings [`enumerate_matchings`] will produce.
pub const ENUMERATION_MAX_MATCHINGS: usize = 1 << 20;

// Scaled weights stay below 2^50 so that doubled duals and slacks fit in i64.
const WEIGHT_BITS: i32 = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedEdge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
    pub link: LinkId,
}

/// Undirected view of a link set with one real weight per link. Parallel
/// edges (e.g. both directions of a link pair) are allowed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightedGraph {
    num_vertices: usize,
    edges: Vec<WeightedEdge>,
}

impl WeightedGraph {
    pub fn new(num_vertices: usize) -> Self {
        WeightedGraph { num_vertices, edges: Vec::new() }
    }

    /// One edge per link of `net`, weighted by `weights[link]`.
    pub fn from_network(net: &Network, weights: &[f64]) -> Self {
        assert_eq!(weights.len(), net.num_links());
        let mut g = WeightedGraph::new(net.num_nodes());
        for (l, link) in net.links().iter().enumerate() {
            g.add_edge(link.src, link.dst, weights[l], l);
        }
        g
    }

    pub fn add_edge(&mut self, u: usize, v: usize, weight: f64, link: LinkId) {
        assert!(u < self.num_vertices && v < self.num_vertices && u != v, "bad edge {u}-{v}");
        assert!(weight.is_finite(), "non-finite weight on link {link}");
        self.edges.push(WeightedEdge { u, v, weight, link });
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[WeightedEdge] {
        &self.edges
    }

    fn weight_of(&self, m: &Matching) -> f64 {
        let by_link: HashMap<LinkId, f64> = self.edges.iter().map(|e| (e.link, e.weight)).collect();
        m.links().iter().map(|l| by_link[l]).sum()
    }
}

/// Exact maximum-weight matching, including the empty matching (weight 0).
///
/// Edges with non-positive weight never improve a matching and are dropped
/// up front; of parallel edges only the heaviest (lowest link id on ties) is
/// kept. Weights are scaled to 50-bit integers before the blossom search, so
/// the result is exact up to that quantization. The returned weight is the
/// sum of the chosen links' original weights in ascending link order.
pub fn max_weight_matching(g: &WeightedGraph) -> (Matching, f64) {
    let mut best: HashMap<(usize, usize), WeightedEdge> = HashMap::new();
    for e in g.edges.iter().filter(|e| e.weight > 0.0) {
        let key = (e.u.min(e.v), e.u.max(e.v));
        best.entry(key)
            .and_modify(|cur| {
                if e.weight > cur.weight || (e.weight == cur.weight && e.link < cur.link) {
                    *cur = *e;
                }
            })
            .or_insert(*e);
    }
    if best.is_empty() {
        return (Matching::empty(), 0.0);
    }
    let mut kept: Vec<WeightedEdge> = best.into_values().collect();
    kept.sort_by_key(|e| e.link);

    // compact the vertex set to the endpoints of positive edges
    let mut index = vec![usize::MAX; g.num_vertices];
    let mut count = 0;
    for e in &kept {
        for x in [e.u, e.v] {
            if index[x] == usize::MAX {
                index[x] = count;
                count += 1;
            }
        }
    }
    let max_w = kept.iter().map(|e| e.weight).fold(0.0, f64::max);
    let exp = WEIGHT_BITS - max_w.log2().ceil() as i32;
    let scale = 2f64.powi(exp);
    let int_edges: Vec<(usize, usize, i64)> = kept
        .iter()
        .map(|e| (index[e.u], index[e.v], (e.weight * scale).round() as i64 * 2))
        .collect();
    let mate = blossom::solve(count, &int_edges);
    let mut links = Vec::new();
    for (k, e) in kept.iter().enumerate() {
        let (a, b, _) = int_edges[k];
        if mate[a] == b && mate[b] == a {
            links.push(e.link);
        }
    }
    let m = Matching::new(links);
    // a pair may be joined by one kept edge only, so no double counting
    let w = m.links().iter().map(|l| kept.iter().find(|e| e.link == *l).expect("kept").weight).sum();
    (m, w)
}

/// Every matching of `g` (as link sets), the empty matching first.
pub fn enumerate_matchings(g: &WeightedGraph) -> Result<Vec<Matching>> {
    if g.num_vertices > ENUMERATION_MAX_VERTICES {
        return Err(Error::TooLarge(format!(
            "{} vertices (limit {ENUMERATION_MAX_VERTICES})",
            g.num_vertices
        )));
    }
    let mut edges: Vec<(usize, usize, LinkId)> = g.edges.iter().map(|e| (e.u, e.v, e.link)).collect();
    edges.sort_by_key(|e| e.2);
    edges.dedup_by_key(|e| e.2);
    let mut out = Vec::new();
    let mut current = Vec::new();
    let mut used = vec![false; g.num_vertices];
    enumerate_from(&edges, 0, &mut used, &mut current, &mut out)?;
    Ok(out)
}

fn enumerate_from(
    edges: &[(usize, usize, LinkId)],
    start: usize,
    used: &mut [bool],
    current: &mut Vec<LinkId>,
    out: &mut Vec<Matching>,
) -> Result<()> {
    if out.len() >= ENUMERATION_MAX_MATCHINGS {
        return Err(Error::TooLarge(format!("more than {ENUMERATION_MAX_MATCHINGS} matchings")));
    }
    out.push(Matching::new(current.clone()));
    for k in start..edges.len() {
        let (u, v, l) = edges[k];
        if used[u] || used[v] {
            continue;
        }
        used[u] = true;
        used[v] = true;
        current.push(l);
        enumerate_from(edges, k + 1, used, current, out)?;
        current.pop();
        used[u] = false;
        used[v] = false;
    }
    Ok(())
}

/// Every matching of the links of `net`.
pub fn enumerate_network_matchings(net: &Network) -> Result<Vec<Matching>> {
    enumerate_matchings(&WeightedGraph::from_network(net, &vec![0.0; net.num_links()]))
}

/// Brute-force maximum weight over all matchings; test oracle for
/// [`max_weight_matching`].
pub fn brute_force_max_weight(g: &WeightedGraph) -> Result<(Matching, f64)> {
    let mut best = (Matching::empty(), 0.0);
    for m in enumerate_matchings(g)? {
        let w = g.weight_of(&m);
        if w > best.1 {
            best = (m, w);
        }
    }
    Ok(best)
}
