use mmsched_core::model::Network;
use proptest::prelude::*;

/// Connected downlink network: a random arborescence from the eNB plus
/// random extra links.
pub fn network(max_mmbs: usize, max_rf: u32, mmbs_rf: bool) -> impl Strategy<Value = Network> {
    (1..=max_mmbs, 1..=max_rf).prop_flat_map(move |(w, r)| {
        let parents = prop::collection::vec(any::<prop::sample::Index>(), w);
        let extra = prop::collection::vec((1..=w, 1..=w, 1.0f64..10.0), 0..=2 * w);
        let caps = prop::collection::vec(1.0f64..10.0, w);
        let rfs = prop::collection::vec(1u32..=2, w);
        (Just(w), Just(r), parents, extra, caps, rfs).prop_map(move |(w, r, parents, extra, caps, rfs)| {
            let mut b = Network::builder().enb_rf(r);
            for v in 1..=w {
                b = if mmbs_rf { b.mmbs_with_rf(1, rfs[v - 1]) } else { b.mmbs(1) };
            }
            let mut pairs = std::collections::HashSet::new();
            for v in 1..=w {
                let p = parents[v - 1].index(v);
                pairs.insert((p, v));
                b = b.link(p, v, caps[v - 1]);
            }
            for (s, d, c) in extra {
                if s != d && pairs.insert((s, d)) {
                    b = b.link(s, d, c);
                }
            }
            b.build().unwrap()
        })
    })
}

/// Access network: a backhaul tree over `w` mmBSs plus UEs, each served by
/// one or two random non-UE nodes.
#[allow(dead_code)]
pub fn access_network(max_mmbs: usize, max_ues: usize) -> impl Strategy<Value = Network> {
    (1..=max_mmbs, 1..=max_ues, 1u32..=2).prop_flat_map(|(w, u, r)| {
        let parents = prop::collection::vec(any::<prop::sample::Index>(), w);
        let caps = prop::collection::vec(1.0f64..10.0, w);
        let serving = prop::collection::vec(
            (any::<prop::sample::Index>(), any::<prop::sample::Index>(), 1.0f64..10.0, 1.0f64..10.0),
            u,
        );
        (Just(w), Just(u), Just(r), parents, caps, serving).prop_map(|(w, u, r, parents, caps, serving)| {
            let mut b = Network::builder().enb_rf(r).mmbs(w).ues(u);
            for v in 1..=w {
                b = b.link(parents[v - 1].index(v), v, caps[v - 1]);
            }
            for (k, (a, c, ca, cc)) in serving.into_iter().enumerate() {
                let ue = w + 1 + k;
                let s1 = a.index(w + 1);
                let s2 = c.index(w + 1);
                b = b.link(s1, ue, ca);
                if s2 != s1 {
                    b = b.link(s2, ue, cc);
                }
            }
            b.build().unwrap()
        })
    })
}
