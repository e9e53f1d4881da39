//! Shared fixtures for the criterion benches.

use mmsched_core::ec::ColoringMultigraph;
use mmsched_core::matching::WeightedGraph;
use mmsched_core::{generate_grid, ChannelParams, GridScenario, Network};

/// Seeded `n x n` grid with the default scenario parameters.
pub fn grid(n: usize, seed: u64) -> Network {
    let scn = GridScenario { n, seed, ..GridScenario::default() };
    generate_grid(&scn, &ChannelParams::default()).expect("grid scenario")
}

/// Deterministic pseudo-random weighted graph (LCG, no external RNG).
pub fn weighted_graph(n: usize, edges: usize, seed: u64) -> WeightedGraph {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = move || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        s >> 33
    };
    let mut g = WeightedGraph::new(n);
    for l in 0..edges {
        let u = next() as usize % n;
        let v = (u + 1 + next() as usize % (n - 1)) % n;
        let w = 1.0 + (next() % 1000) as f64 / 100.0;
        g.add_edge(u, v, w, l);
    }
    g
}

/// Multigraph with `edges` edges spread over `n` vertices.
pub fn multigraph(n: usize, edges: usize, seed: u64) -> ColoringMultigraph {
    let g = weighted_graph(n, edges, seed);
    let mut gm = ColoringMultigraph::new(n);
    for e in g.edges() {
        gm.add_edge(e.u, e.v, e.link, 1.0);
    }
    gm
}
