//! Link-time LPs over polynomially many necessary schedule constraints.

use crate::error::{Error, Result};
use crate::lp::{solve_dense_lp, LinearProgram, Relation, Sense, Tolerances};
use crate::model::{LinkTimeVector, Network, NodeRole};

use super::{ConstraintVariant, EcConfig};

/// Details of the constraint set that was built.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConstraintInfo {
    /// Non-eNB node count used for `nu` and the idle-RF coefficients.
    pub w: usize,
    /// eNB RF chains after clamping to the eNB degree.
    pub r_used: u32,
    /// True when `R > L` forced the clamp.
    pub r_clamped: bool,
    pub nu: usize,
}

struct Builder<'a> {
    net: &'a Network,
    lp: LinearProgram,
    theta: usize,
    nu: usize,
    info: ConstraintInfo,
}

enum Objective {
    MaxMin,
    Egress(f64),
}

impl<'a> Builder<'a> {
    // variables: t_e for every link, then theta, then t'_1..t'_nu
    fn new(net: &'a Network, variant: ConstraintVariant, objective: Objective) -> Result<Self> {
        if net.is_expanded() {
            return Err(Error::AlreadyExpanded);
        }
        let access = net.has_ues();
        match variant {
            ConstraintVariant::Access if !access => return Err(Error::NoUes),
            ConstraintVariant::SingleRf | ConstraintVariant::MultiRf if access => {
                return Err(Error::InvalidNetwork("network has UEs; use the access constraint set".into()))
            }
            _ => {}
        }
        let reach = net.reachable_from_enb();
        for v in net.nodes() {
            if !reach[v.id] {
                match v.role {
                    NodeRole::Ue => return Err(Error::UnreachableUe(v.id)),
                    NodeRole::Mmbs if !access => return Err(Error::Disconnected(v.id)),
                    _ => {}
                }
            }
        }
        let w = net.num_nodes() - 1;
        let l = net.out_links(0).count();
        let r = net.enb_rf();
        let r_used = r.min(l as u32).max(1);
        let nu = if variant == ConstraintVariant::MultiRf { 0 } else { w / 2 };
        let n_links = net.num_links();
        let mut lp = LinearProgram::new(n_links + 1 + nu, Sense::Maximize);
        let theta = n_links;
        match objective {
            Objective::MaxMin => lp.objective[theta] = 1.0,
            Objective::Egress(_) => {
                for (e, link) in net.links().iter().enumerate() {
                    if link.src == 0 {
                        lp.objective[e] = link.capacity;
                    }
                }
            }
        }
        let mut b = Builder {
            net,
            lp,
            theta,
            nu,
            info: ConstraintInfo { w, r_used, r_clamped: r_used < r, nu },
        };
        b.flow_rows(&objective);
        match variant {
            ConstraintVariant::MultiRf => b.simple_rows(),
            _ => b.idle_rf_rows(),
        }
        Ok(b)
    }

    fn flow_rows(&mut self, objective: &Objective) {
        let net = self.net;
        let access = net.has_ues();
        for v in 1..net.num_nodes() {
            let mut terms = Vec::new();
            for (e, link) in net.links().iter().enumerate() {
                if link.dst == v {
                    terms.push((e, link.capacity));
                } else if link.src == v {
                    terms.push((e, -link.capacity));
                }
            }
            let role = net.node(v).role;
            if access && role == NodeRole::Mmbs {
                self.lp.add_sparse_row(&terms, Relation::Eq, 0.0);
                continue;
            }
            match objective {
                Objective::MaxMin => {
                    terms.push((self.theta, -1.0));
                    self.lp.add_sparse_row(&terms, Relation::Ge, 0.0);
                }
                Objective::Egress(theta) => {
                    let floor = theta - 1e-9 * theta.max(1.0);
                    self.lp.add_sparse_row(&terms, Relation::Ge, floor);
                }
            }
        }
    }

    fn degree_terms(&self, v: usize) -> Vec<(usize, f64)> {
        self.net
            .links()
            .iter()
            .enumerate()
            .filter(|(_, l)| l.src == v || l.dst == v)
            .map(|(e, _)| (e, 1.0))
            .collect()
    }

    fn simple_rows(&mut self) {
        for v in 0..self.net.num_nodes() {
            let terms = self.degree_terms(v);
            let rf = self.net.node(v).rf_chains as f64;
            self.lp.add_sparse_row(&terms, Relation::Le, rf);
        }
    }

    fn idle_rf_rows(&mut self) {
        let first_k = self.theta + 1;
        let nu = self.nu;
        let (w, r) = (self.info.w as f64, self.info.r_used as f64);
        // sum t'_k <= 1
        let terms: Vec<_> = (0..nu).map(|k| (first_k + k, 1.0)).collect();
        if nu > 0 {
            self.lp.add_sparse_row(&terms, Relation::Le, 1.0);
        }
        // sum k t'_k = time of links among non-eNB nodes
        let mut terms: Vec<_> = (0..nu).map(|k| (first_k + k, (k + 1) as f64)).collect();
        for (e, link) in self.net.links().iter().enumerate() {
            if link.src != 0 && link.dst != 0 {
                terms.push((e, -1.0));
            }
        }
        self.lp.add_sparse_row(&terms, Relation::Eq, 0.0);
        // eNB time plus guaranteed idle RF time <= R
        let mut terms = self.degree_terms(0);
        for k in 0..nu {
            let idle = (r - w + 2.0 * (k + 1) as f64).max(0.0);
            if idle > 0.0 {
                terms.push((first_k + k, idle));
            }
        }
        self.lp.add_sparse_row(&terms, Relation::Le, r);
        for v in 1..self.net.num_nodes() {
            let terms = self.degree_terms(v);
            self.lp.add_sparse_row(&terms, Relation::Le, 1.0);
        }
    }

    fn solve(self) -> Result<(f64, LinkTimeVector, ConstraintInfo)> {
        let sol = solve_dense_lp(&self.lp, &Tolerances::default())?;
        let n = self.net.num_links();
        let t = sol.x[..n].iter().map(|v| v.max(0.0)).collect();
        Ok((sol.objective, LinkTimeVector(t), self.info))
    }
}

/// Relaxed max-min throughput and link times under the constraint set of
/// `variant`.
pub fn link_time_maxmin(
    net: &Network,
    variant: ConstraintVariant,
) -> Result<(f64, LinkTimeVector, ConstraintInfo)> {
    Builder::new(net, variant, Objective::MaxMin)?.solve()
}

/// Link times maximizing eNB egress with every destination at `theta` or
/// more under the constraint set of `variant`.
pub fn link_time_tput(
    net: &Network,
    theta: f64,
    variant: ConstraintVariant,
) -> Result<(f64, LinkTimeVector, ConstraintInfo)> {
    Builder::new(net, variant, Objective::Egress(theta))?.solve()
}

/// Relaxed max-min throughput under `cfg.constraint_variant`.
pub fn ec_maxmin_link_time(net: &Network, cfg: &EcConfig) -> Result<(f64, LinkTimeVector)> {
    link_time_maxmin(net, cfg.constraint_variant).map(|(theta, t, _)| (theta, t))
}

/// Link times maximizing eNB egress at the fixed max-min throughput `theta`.
pub fn ec_tput_link_time(net: &Network, theta: f64, cfg: &EcConfig) -> Result<LinkTimeVector> {
    link_time_tput(net, theta, cfg.constraint_variant).map(|(_, t, _)| t)
}

/// Relaxed max-min throughput with per-node RF budgets `sum t_e <= R_v`.
pub fn ec_multirf_link_time(net: &Network, _cfg: &EcConfig) -> Result<(f64, LinkTimeVector)> {
    link_time_maxmin(net, ConstraintVariant::MultiRf).map(|(theta, t, _)| (theta, t))
}

/// Relaxed UE max-min throughput; mmBSs are pure relays.
pub fn ec_access_link_time(net: &Network, _cfg: &EcConfig) -> Result<(f64, LinkTimeVector)> {
    link_time_maxmin(net, ConstraintVariant::Access).map(|(theta, t, _)| (theta, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-7 * (1.0 + b.abs())
    }

    fn star(r: u32) -> Network {
        Network::builder().enb_rf(r).mmbs(2).link(0, 1, 2.0).link(0, 2, 4.0).build().unwrap()
    }

    fn triangle() -> Network {
        Network::builder().mmbs(2).link(0, 1, 10.0).link(1, 2, 10.0).link(0, 2, 1.0).build().unwrap()
    }

    #[test]
    fn star_is_tight() {
        let cfg = EcConfig::default();
        let (theta, _) = ec_maxmin_link_time(&star(1), &cfg).unwrap();
        assert!(close(theta, 4.0 / 3.0));
        let t = ec_tput_link_time(&star(1), theta, &cfg).unwrap();
        assert!(close(2.0 * t.get(0) + 4.0 * t.get(1), 8.0 / 3.0));
        let (theta2, _) = ec_maxmin_link_time(&star(2), &cfg).unwrap();
        let t2 = ec_tput_link_time(&star(2), theta2, &cfg).unwrap();
        assert!(close(2.0 * t2.get(0) + 4.0 * t2.get(1), 6.0));
    }

    #[test]
    fn triangle_relays() {
        let cfg = EcConfig::default();
        let (theta, _) = ec_maxmin_link_time(&triangle(), &cfg).unwrap();
        assert!(close(theta, 10.0 / 3.0));
        let t = ec_tput_link_time(&triangle(), theta, &cfg).unwrap();
        let egress = 10.0 * t.get(0) + t.get(2);
        assert!(close(egress, 20.0 / 3.0));
    }

    #[test]
    fn no_contention_gives_min_capacity() {
        let net = Network::builder().enb_rf(3).mmbs(3).link(0, 1, 2.0).link(0, 2, 5.0).link(0, 3, 9.0).build().unwrap();
        let (theta, _) = ec_maxmin_link_time(&net, &EcConfig::default()).unwrap();
        assert!(close(theta, 2.0));
    }

    #[test]
    fn r_is_clamped_to_enb_degree() {
        let (_, _, info) = link_time_maxmin(&star(5), ConstraintVariant::SingleRf).unwrap();
        assert_eq!(info.r_used, 2);
        assert!(info.r_clamped);
    }

    #[test]
    fn multi_rf() {
        let cfg = EcConfig::default();
        let (theta, _) = ec_multirf_link_time(&star(1), &cfg).unwrap();
        assert!(close(theta, 4.0 / 3.0));
        let (base, _) = ec_multirf_link_time(&triangle(), &cfg).unwrap();
        let (more, _) = ec_multirf_link_time(&triangle().with_mmbs_rf(2).unwrap(), &cfg).unwrap();
        assert!(more >= base - 1e-9 && base >= 10.0 / 3.0 - 1e-9);
        // two chains per node: a link may carry up to two parallel copies,
        // so the eNB splits 2 units of time as 3a = 5(2 - a)
        let full = Network::builder().enb_rf(2).mmbs_with_rf(2, 2).link(0, 1, 3.0).link(0, 2, 5.0).link(1, 2, 1.0).build().unwrap();
        let (theta, t) = ec_multirf_link_time(&full, &cfg).unwrap();
        assert!(close(theta, 3.75));
        assert!(close(t.get(0), 1.25) && close(t.get(1), 0.75));
    }

    #[test]
    fn access_chain_and_two_paths() {
        let cfg = EcConfig { constraint_variant: ConstraintVariant::Access, ..EcConfig::default() };
        let chain = Network::builder().mmbs(1).ues(1).link(0, 1, 10.0).link(1, 2, 10.0).build().unwrap();
        let (theta, _) = ec_access_link_time(&chain, &cfg).unwrap();
        assert!(close(theta, 5.0));
        let two = Network::builder().enb_rf(2).mmbs(2).ues(1).link(0, 1, 10.0).link(0, 2, 10.0).link(1, 3, 10.0).link(2, 3, 10.0).build().unwrap();
        let (theta2, _) = ec_access_link_time(&two, &cfg).unwrap();
        assert!(theta2 >= theta - 1e-9);
        let no_ues = Network::builder().mmbs(1).link(0, 1, 1.0).build().unwrap();
        assert_eq!(ec_access_link_time(&no_ues, &cfg).unwrap_err(), Error::NoUes);
    }

    #[test]
    fn disconnected() {
        let net = Network::builder().mmbs(2).link(0, 1, 1.0).build().unwrap();
        assert_eq!(ec_maxmin_link_time(&net, &EcConfig::default()).unwrap_err(), Error::Disconnected(2));
    }
}
