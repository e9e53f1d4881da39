//! Multigraph edge coloring with at most `3 * ceil(Delta / 2)` colors.
//!
//! The base algorithm orients the multigraph along closed trails so that
//! every vertex has in- and out-degree at most `ceil(Delta / 2)`, colors the
//! resulting bipartite out/in graph with that many colors, and splits each
//! color class (a union of directed paths and cycles) into two colors plus a
//! third for the closing edge of odd cycles. A refinement pass then tries to
//! place those closing edges into existing colors, with Kempe-chain swaps.

use crate::model::LinkId;

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiEdge {
    pub u: usize,
    pub v: usize,
    /// Expanded link this copy belongs to.
    pub link: LinkId,
    /// Active time of the copy within its slot, at most the granularity.
    pub duration: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ColoringMultigraph {
    pub num_vertices: usize,
    pub edges: Vec<MultiEdge>,
}

impl ColoringMultigraph {
    pub fn new(num_vertices: usize) -> Self {
        ColoringMultigraph { num_vertices, edges: Vec::new() }
    }

    pub fn add_edge(&mut self, u: usize, v: usize, link: LinkId, duration: f64) {
        assert!(u != v && u < self.num_vertices && v < self.num_vertices, "bad edge {u}-{v}");
        self.edges.push(MultiEdge { u, v, link, duration });
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_vertices];
        for e in &self.edges {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        deg
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Vertices with at least one edge.
    pub fn num_active_vertices(&self) -> usize {
        self.degrees().into_iter().filter(|&d| d > 0).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeColoring {
    /// Color of each edge, in `0..num_colors`.
    pub colors: Vec<usize>,
    pub num_colors: usize,
}

impl EdgeColoring {
    /// No two edges of one color share a vertex.
    pub fn is_proper(&self, gm: &ColoringMultigraph) -> bool {
        if self.colors.len() != gm.edges.len() {
            return false;
        }
        let mut seen = std::collections::HashSet::new();
        for (e, &c) in gm.edges.iter().zip(&self.colors) {
            if c >= self.num_colors || !seen.insert((e.u, c)) || !seen.insert((e.v, c)) {
                return false;
            }
        }
        true
    }

    /// Edge indices of each color.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_colors];
        for (e, &c) in self.colors.iter().enumerate() {
            out[c].push(e);
        }
        out
    }
}

/// `3 * ceil(delta / 2)`.
pub fn color_bound(delta: usize) -> usize {
    3 * delta.div_ceil(2)
}

/// Proper edge coloring of `gm` using at most `3 * ceil(Delta / 2)` colors.
pub fn color_multigraph(gm: &ColoringMultigraph) -> EdgeColoring {
    let ends: Vec<(usize, usize)> = gm.edges.iter().map(|e| (e.u, e.v)).collect();
    let (base, third) = split_coloring(gm.num_vertices, &ends);
    let plain = compact(&base);
    let refined = compact(&refine(gm.num_vertices, &ends, &base, &third));
    let best = if refined.num_colors <= plain.num_colors { refined } else { plain };
    debug_assert!(best.is_proper(gm));
    debug_assert!(best.num_colors <= color_bound(gm.max_degree()));
    best
}

/// Renumbers colors densely in order of first use.
fn compact(colors: &[usize]) -> EdgeColoring {
    let max = colors.iter().copied().max().map_or(0, |m| m + 1);
    let mut map = vec![NONE; max];
    let mut next = 0;
    let mut out = Vec::with_capacity(colors.len());
    for &c in colors {
        if map[c] == NONE {
            map[c] = next;
            next += 1;
        }
        out.push(map[c]);
    }
    EdgeColoring { colors: out, num_colors: next }
}

/// Orients every edge so that in- and out-degrees are at most
/// `ceil(deg / 2)`, by walking closed trails after pairing odd vertices with
/// a dummy vertex. Returns `(tail, head)` per edge.
fn euler_orientation(n: usize, ends: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut deg = vec![0usize; n + 1];
    for &(u, v) in ends {
        deg[u] += 1;
        deg[v] += 1;
    }
    let mut all: Vec<(usize, usize)> = ends.to_vec();
    for v in 0..n {
        if deg[v] % 2 == 1 {
            all.push((v, n));
        }
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for (e, &(u, v)) in all.iter().enumerate() {
        adj[u].push(e);
        adj[v].push(e);
    }
    let mut used = vec![false; all.len()];
    let mut ptr = vec![0usize; n + 1];
    let mut oriented = vec![(0, 0); all.len()];
    for start in 0..=n {
        loop {
            while ptr[start] < adj[start].len() && used[adj[start][ptr[start]]] {
                ptr[start] += 1;
            }
            if ptr[start] == adj[start].len() {
                break;
            }
            // closed trail from `start`; every degree is even, so the walk
            // can only get stuck back at `start`
            let mut cur = start;
            loop {
                while ptr[cur] < adj[cur].len() && used[adj[cur][ptr[cur]]] {
                    ptr[cur] += 1;
                }
                if ptr[cur] == adj[cur].len() {
                    break;
                }
                let e = adj[cur][ptr[cur]];
                used[e] = true;
                let (a, b) = all[e];
                let next = if a == cur { b } else { a };
                oriented[e] = (cur, next);
                cur = next;
            }
            debug_assert_eq!(cur, start);
        }
    }
    oriented.truncate(ends.len());
    oriented
}

/// König edge coloring of a bipartite multigraph (`left`, `right` ids per
/// edge) with `d` colors, `d` at least the maximum degree.
fn bipartite_coloring(nl: usize, nr: usize, edges: &[(usize, usize)], d: usize) -> Vec<usize> {
    let mut at_l = vec![NONE; nl * d];
    let mut at_r = vec![NONE; nr * d];
    let mut color = vec![NONE; edges.len()];
    let free = |table: &[usize], x: usize| (0..d).find(|&c| table[x * d + c] == NONE).expect("degree within d");
    for (e, &(u, v)) in edges.iter().enumerate() {
        let a = free(&at_l, u);
        let chosen = if at_r[v * d + a] == NONE {
            a
        } else {
            let b = free(&at_r, v);
            if at_l[u * d + b] == NONE {
                b
            } else {
                // alternating a/b path from v, starting with its a-edge
                let mut path = Vec::new();
                let mut side_right = true;
                let mut x = v;
                let mut want = a;
                loop {
                    let f = if side_right { at_r[x * d + want] } else { at_l[x * d + want] };
                    if f == NONE {
                        break;
                    }
                    path.push(f);
                    let (fl, fr) = edges[f];
                    x = if side_right { fl } else { fr };
                    side_right = !side_right;
                    want = if want == a { b } else { a };
                }
                for &f in &path {
                    let (fl, fr) = edges[f];
                    at_l[fl * d + color[f]] = NONE;
                    at_r[fr * d + color[f]] = NONE;
                }
                for &f in &path {
                    let (fl, fr) = edges[f];
                    color[f] = if color[f] == a { b } else { a };
                    at_l[fl * d + color[f]] = f;
                    at_r[fr * d + color[f]] = f;
                }
                a
            }
        };
        color[e] = chosen;
        at_l[u * d + chosen] = e;
        at_r[v * d + chosen] = e;
    }
    color
}

/// Base coloring: colors `3c` and `3c + 1` alternate along the paths and
/// cycles of bipartite class `c`; `3c + 2` closes odd cycles. Returns the
/// colors and the indices of edges that got a closing color.
fn split_coloring(n: usize, ends: &[(usize, usize)]) -> (Vec<usize>, Vec<usize>) {
    if ends.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let oriented = euler_orientation(n, ends);
    let mut outd = vec![0usize; n];
    let mut ind = vec![0usize; n];
    for &(t, h) in &oriented {
        outd[t] += 1;
        ind[h] += 1;
    }
    let d = outd.iter().chain(&ind).copied().max().unwrap_or(0).max(1);
    let class = bipartite_coloring(n, n, &oriented, d);

    let mut colors = vec![NONE; ends.len()];
    let mut third = Vec::new();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); d];
    for (e, &c) in class.iter().enumerate() {
        members[c].push(e);
    }
    let mut out_edge = vec![NONE; n];
    let mut has_in = vec![false; n];
    for (c, edges) in members.iter().enumerate() {
        for &e in edges {
            let (t, h) = oriented[e];
            out_edge[t] = e;
            has_in[h] = true;
        }
        // paths first, from their tails
        for &e in edges {
            let (t, _) = oriented[e];
            if has_in[t] || colors[e] != NONE {
                continue;
            }
            let mut f = e;
            let mut k = 0;
            while f != NONE && colors[f] == NONE {
                colors[f] = 3 * c + k % 2;
                k += 1;
                f = out_edge[oriented[f].1];
            }
        }
        // remaining edges lie on cycles
        for &e in edges {
            if colors[e] != NONE {
                continue;
            }
            let mut cycle = Vec::new();
            let mut f = e;
            while colors[f] == NONE {
                colors[f] = 0;
                cycle.push(f);
                f = out_edge[oriented[f].1];
            }
            for (k, &f) in cycle.iter().enumerate() {
                colors[f] = 3 * c + k % 2;
            }
            if cycle.len() % 2 == 1 {
                let last = *cycle.last().expect("non-empty cycle");
                colors[last] = 3 * c + 2;
                third.push(last);
            }
        }
        for &e in edges {
            let (t, h) = oriented[e];
            out_edge[t] = NONE;
            has_in[h] = false;
        }
    }
    (colors, third)
}

/// Re-places the odd-cycle closing edges first-fit into colors already in
/// use, freeing a color by a Kempe swap when no common free color exists.
fn refine(n: usize, ends: &[(usize, usize)], base: &[usize], third: &[usize]) -> Vec<usize> {
    let mut colors = base.to_vec();
    let is_third: std::collections::HashSet<usize> = third.iter().copied().collect();
    let mut palette: Vec<usize> = Vec::new();
    let mut slot_of = vec![NONE; base.iter().copied().max().map_or(0, |m| m + 1)];
    for (e, &c) in base.iter().enumerate() {
        if !is_third.contains(&e) && slot_of[c] == NONE {
            slot_of[c] = palette.len();
            palette.push(c);
        }
    }
    // at[v][k]: edge of palette color k at v
    let cap = palette.len() + third.len();
    let mut at = vec![NONE; n * cap];
    let mut local = vec![NONE; ends.len()];
    for (e, &(u, v)) in ends.iter().enumerate() {
        if is_third.contains(&e) {
            continue;
        }
        let k = slot_of[base[e]];
        local[e] = k;
        at[u * cap + k] = e;
        at[v * cap + k] = e;
    }
    let mut used = palette.len();
    for &e in third {
        let (u, v) = ends[e];
        let common = (0..used).find(|&k| at[u * cap + k] == NONE && at[v * cap + k] == NONE);
        let k = match common {
            Some(k) => k,
            None => match kempe(&mut at, &mut local, ends, cap, used, u, v) {
                Some(k) => k,
                None => {
                    used += 1;
                    used - 1
                }
            },
        };
        local[e] = k;
        at[u * cap + k] = e;
        at[v * cap + k] = e;
    }
    for (e, c) in colors.iter_mut().enumerate() {
        *c = local[e];
    }
    colors
}

/// Frees a color at both `u` and `v` by swapping an alternating chain that
/// starts at `v` and does not reach `u`.
fn kempe(
    at: &mut [usize],
    local: &mut [usize],
    ends: &[(usize, usize)],
    cap: usize,
    used: usize,
    u: usize,
    v: usize,
) -> Option<usize> {
    let free_u: Vec<usize> = (0..used).filter(|&k| at[u * cap + k] == NONE).collect();
    let free_v: Vec<usize> = (0..used).filter(|&k| at[v * cap + k] == NONE).collect();
    for &a in &free_u {
        for &b in &free_v {
            // chain from v over a-edges then b-edges
            let mut chain = Vec::new();
            let mut x = v;
            let mut want = a;
            let mut hits_u = false;
            loop {
                let f = at[x * cap + want];
                if f == NONE {
                    break;
                }
                chain.push(f);
                let (p, q) = ends[f];
                x = if p == x { q } else { p };
                if x == u {
                    hits_u = true;
                    break;
                }
                want = if want == a { b } else { a };
            }
            if hits_u {
                continue;
            }
            for &f in &chain {
                let (p, q) = ends[f];
                at[p * cap + local[f]] = NONE;
                at[q * cap + local[f]] = NONE;
            }
            for &f in &chain {
                let (p, q) = ends[f];
                local[f] = if local[f] == a { b } else { a };
                at[p * cap + local[f]] = f;
                at[q * cap + local[f]] = f;
            }
            return Some(a);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> ColoringMultigraph {
        let mut g = ColoringMultigraph::new(n);
        for (i, &(u, v)) in edges.iter().enumerate() {
            g.add_edge(u, v, i, 1.0);
        }
        g
    }

    #[test]
    fn triangle_needs_three() {
        let g = graph(3, &[(0, 1), (1, 2), (2, 0)]);
        let c = color_multigraph(&g);
        assert!(c.is_proper(&g));
        assert_eq!(c.num_colors, 3);
    }

    #[test]
    fn parallel_edges() {
        let g = graph(2, &[(0, 1), (0, 1), (1, 0)]);
        let c = color_multigraph(&g);
        assert!(c.is_proper(&g));
        assert_eq!(c.num_colors, 3);
    }

    #[test]
    fn empty_graph() {
        let g = ColoringMultigraph::new(4);
        let c = color_multigraph(&g);
        assert_eq!(c.num_colors, 0);
    }

    #[test]
    fn bipartite_is_delta_colored_by_the_konig_step() {
        let edges = [(0, 1), (0, 1), (1, 2), (2, 3), (3, 0), (0, 2)];
        let oriented = euler_orientation(4, &edges);
        for (&(u, v), &(t, h)) in edges.iter().zip(&oriented) {
            assert!((u, v) == (t, h) || (u, v) == (h, t));
        }
        let mut out = [0; 4];
        let mut inn = [0; 4];
        for &(t, h) in &oriented {
            out[t] += 1;
            inn[h] += 1;
        }
        let deg = graph(4, &edges).degrees();
        for v in 0..4 {
            assert!(out[v] <= deg[v].div_ceil(2) && inn[v] <= deg[v].div_ceil(2));
        }
    }

    #[test]
    fn kempe_swap_frees_a_color() {
        // 0-3 sees color 0 at 0 and color 1 at 3; swapping the chain 3-4
        // frees color 1 at both ends
        let ends = [(0, 1), (3, 4), (0, 3)];
        let base = vec![0, 1, 2];
        let colors = refine(5, &ends, &base, &[2]);
        let c = compact(&colors);
        assert!(c.is_proper(&graph(5, &ends)));
        assert_eq!(c.num_colors, 2);
    }

    fn random_multigraph() -> impl Strategy<Value = ColoringMultigraph> {
        (2usize..=20).prop_flat_map(|n| {
            prop::collection::vec((0..n, 0..n), 0..=60).prop_map(move |es| {
                let es: Vec<_> = es.into_iter().filter(|(u, v)| u != v).collect();
                graph(n, &es)
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn proper_within_bound(g in random_multigraph()) {
            let c = color_multigraph(&g);
            prop_assert!(c.is_proper(&g));
            prop_assert!(c.num_colors <= color_bound(g.max_degree()));
            prop_assert!(c.num_colors >= g.max_degree());
        }

        #[test]
        fn base_split_alone_meets_bound(g in random_multigraph()) {
            let ends: Vec<_> = g.edges.iter().map(|e| (e.u, e.v)).collect();
            let (base, _) = split_coloring(g.num_vertices, &ends);
            let c = compact(&base);
            prop_assert!(c.is_proper(&g));
            prop_assert!(c.num_colors <= color_bound(g.max_degree()));
        }
    }
}
