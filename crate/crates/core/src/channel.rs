//! Path-loss channel model and randomized grid scenarios.
//!
//! Link capacities follow `PL(d) = alpha + 10 beta log10(d) + xi` with
//! LOS/NLOS parameter sets, a fixed transmit power and directivity gain,
//! thermal noise over the channel bandwidth and a minimum SNR below which
//! the link is in outage. Rates use the Shannon formula scaled by an
//! optional efficiency factor.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Link, Network, Node, NodeRole};

/// Name of the generator used by [`generate_grid`], reported in run metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha), seeded via seed_from_u64";

/// Distances below this are clamped; the path-loss reference distance.
pub const MIN_DISTANCE_M: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelState {
    Los,
    Nlos,
    Outage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelParams {
    pub alpha_los: f64,
    pub beta_los: f64,
    pub sigma_los: f64,
    pub alpha_nlos: f64,
    pub beta_nlos: f64,
    pub sigma_nlos: f64,
    /// Transmit power, dBm.
    pub p_tx: f64,
    /// Directivity gain, dB.
    pub g_x: f64,
    /// Hz.
    pub bandwidth: f64,
    /// kT0, dBm/Hz.
    pub noise_floor: f64,
    /// dB.
    pub noise_figure: f64,
    /// Minimum SNR, dB.
    pub sinr_threshold: f64,
    /// Hz; informational, the path-loss constants already encode it.
    pub carrier: f64,
    /// Fraction of the Shannon rate achieved.
    pub efficiency: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            alpha_los: 61.4,
            beta_los: 2.0,
            sigma_los: 5.8,
            alpha_nlos: 72.0,
            beta_nlos: 2.92,
            sigma_nlos: 8.7,
            p_tx: 30.0,
            g_x: 30.0,
            bandwidth: 1e9,
            noise_floor: -174.0,
            noise_figure: 4.0,
            sinr_threshold: -5.0,
            carrier: 28e9,
            efficiency: 1.0,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if self.sigma_los < 0.0 || self.sigma_nlos < 0.0 {
            return Err(Error::InvalidScenario("shadowing sigma must be non-negative".into()));
        }
        if !(self.bandwidth > 0.0) {
            return Err(Error::InvalidScenario("bandwidth must be positive".into()));
        }
        if !(self.efficiency > 0.0) {
            return Err(Error::InvalidScenario("efficiency must be positive".into()));
        }
        Ok(())
    }

    /// Noise power over the channel bandwidth, dBm.
    pub fn noise_dbm(&self) -> f64 {
        self.noise_floor + 10.0 * self.bandwidth.log10() + self.noise_figure
    }

    fn los_nlos(&self, state: ChannelState) -> Option<(f64, f64, f64)> {
        match state {
            ChannelState::Los => Some((self.alpha_los, self.beta_los, self.sigma_los)),
            ChannelState::Nlos => Some((self.alpha_nlos, self.beta_nlos, self.sigma_nlos)),
            ChannelState::Outage => None,
        }
    }

    /// Received SNR in dB, `None` in outage.
    pub fn snr_db(&self, d: f64, state: ChannelState, shadow_db: f64) -> Result<Option<f64>> {
        let Some((alpha, beta, _)) = self.los_nlos(state) else {
            if !(d > 0.0) {
                return Err(Error::NonPositiveDistance(d));
            }
            return Ok(None);
        };
        let pl = path_loss_with(alpha, beta, d, shadow_db)?;
        Ok(Some(self.p_tx + self.g_x - pl - self.noise_dbm()))
    }
}

fn path_loss_with(alpha: f64, beta: f64, d: f64, shadow_db: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::NonPositiveDistance(d));
    }
    Ok(alpha + 10.0 * beta * d.log10() + shadow_db)
}

/// Path loss in dB for the given state using the default parameter set.
pub fn path_loss(d: f64, state: ChannelState, shadow_db: f64) -> Result<f64> {
    path_loss_in(&ChannelParams::default(), d, state, shadow_db)
}

/// Path loss in dB for a LOS or NLOS link. Outage has no finite loss and is
/// reported as infinity.
pub fn path_loss_in(params: &ChannelParams, d: f64, state: ChannelState, shadow_db: f64) -> Result<f64> {
    match params.los_nlos(state) {
        Some((alpha, beta, _)) => path_loss_with(alpha, beta, d, shadow_db),
        None if d > 0.0 => Ok(f64::INFINITY),
        None => Err(Error::NonPositiveDistance(d)),
    }
}

/// Link rate in Gbps, or `None` when the link is in outage or below the
/// SNR threshold.
pub fn link_capacity(d: f64, state: ChannelState, shadow_db: f64, params: &ChannelParams) -> Result<Option<f64>> {
    let Some(snr) = params.snr_db(d, state, shadow_db)? else {
        return Ok(None);
    };
    if snr < params.sinr_threshold {
        return Ok(None);
    }
    let linear = 10f64.powf(snr / 10.0);
    Ok(Some(params.efficiency * params.bandwidth * (1.0 + linear).log2() / 1e9))
}

/// Distance-dependent LOS/NLOS/outage probabilities.
///
/// `p_out(d) = max(0, 1 - exp(-a_out d + b_out))`,
/// `p_los(d) = (1 - p_out(d)) exp(-d / los_scale)`, remainder NLOS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutageModel {
    pub a_out: f64,
    pub b_out: f64,
    pub los_scale: f64,
}

impl Default for OutageModel {
    fn default() -> Self {
        OutageModel { a_out: 1.0 / 30.0, b_out: 5.2, los_scale: 67.1 }
    }
}

impl OutageModel {
    pub fn probabilities(&self, d: f64) -> (f64, f64, f64) {
        let p_out = (1.0 - (-self.a_out * d + self.b_out).exp()).max(0.0);
        let p_los = (1.0 - p_out) * (-d / self.los_scale).exp();
        (p_los, 1.0 - p_out - p_los, p_out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateSampling {
    Stochastic(OutageModel),
    AllLos,
    AllNlos,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StateModel {
    pub sampling: StateSampling,
    /// Draw log-normal shadowing; when false `xi = 0`.
    pub shadowing: bool,
}

impl Default for StateModel {
    fn default() -> Self {
        StateModel { sampling: StateSampling::Stochastic(OutageModel::default()), shadowing: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridScenario {
    /// Grid side; `n * n` mmBSs.
    pub n: usize,
    /// Grid spacing, meters.
    pub d_g: f64,
    pub enb_rf: u32,
    pub mmbs_rf: u32,
    /// UEs dropped uniformly inside each mmBS grid cell.
    pub ues_per_mmbs: usize,
    pub seed: u64,
    /// Node pairs farther apart than this get no link.
    pub max_link_distance: f64,
    pub state_model: StateModel,
}

impl Default for GridScenario {
    fn default() -> Self {
        GridScenario {
            n: 4,
            d_g: 100.0,
            enb_rf: 10,
            mmbs_rf: 1,
            ues_per_mmbs: 0,
            seed: 1,
            max_link_distance: 200.0,
            state_model: StateModel::default(),
        }
    }
}

impl GridScenario {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidScenario(m.into()));
        if self.n < 2 {
            return bad("grid side n must be at least 2");
        }
        if !(self.d_g > 0.0) {
            return bad("grid spacing must be positive");
        }
        if self.enb_rf == 0 || self.mmbs_rf == 0 {
            return bad("RF chain counts must be positive");
        }
        if !(self.max_link_distance > 0.0) {
            return bad("link cutoff must be positive");
        }
        Ok(())
    }
}

/// Scenario plus channel parameters, as read from a config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub scenario: GridScenario,
    pub channel: ChannelParams,
}

impl ScenarioConfig {
    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

fn sample_state(rng: &mut ChaCha8Rng, model: &StateModel, d: f64) -> ChannelState {
    match &model.sampling {
        StateSampling::AllLos => ChannelState::Los,
        StateSampling::AllNlos => ChannelState::Nlos,
        StateSampling::Stochastic(m) => {
            let (p_los, p_nlos, _) = m.probabilities(d);
            let u: f64 = rng.random();
            if u < p_los {
                ChannelState::Los
            } else if u < p_los + p_nlos {
                ChannelState::Nlos
            } else {
                ChannelState::Outage
            }
        }
    }
}

/// Generates an `n x n` grid of mmBSs with the eNB at the grid center.
///
/// Channel state and shadowing are drawn once per unordered node pair in a
/// fixed pair order, so the result depends only on `(scn, params)`. Both
/// directions of a usable pair become links, except links into the eNB and
/// links out of UEs (downlink only). UEs, when requested, are placed
/// uniformly in the cell around their home mmBS.
pub fn generate_grid(scn: &GridScenario, params: &ChannelParams) -> Result<Network> {
    scn.validate()?;
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(scn.seed);
    let center = (scn.n as f64 - 1.0) * scn.d_g / 2.0;

    let mut pos = vec![(center, center)];
    let mut nodes = vec![Node { id: 0, role: NodeRole::Enb, rf_chains: scn.enb_rf, super_node: None }];
    for i in 0..scn.n {
        for j in 0..scn.n {
            let id = nodes.len();
            nodes.push(Node { id, role: NodeRole::Mmbs, rf_chains: scn.mmbs_rf, super_node: None });
            pos.push((i as f64 * scn.d_g, j as f64 * scn.d_g));
        }
    }
    let num_mmbs = nodes.len() - 1;
    for m in 0..num_mmbs {
        let (x, y) = pos[m + 1];
        for _ in 0..scn.ues_per_mmbs {
            let dx = (rng.random::<f64>() - 0.5) * scn.d_g;
            let dy = (rng.random::<f64>() - 0.5) * scn.d_g;
            let id = nodes.len();
            nodes.push(Node { id, role: NodeRole::Ue, rf_chains: 1, super_node: None });
            pos.push((x + dx, y + dy));
        }
    }

    let normal_los = Normal::new(0.0, params.sigma_los.max(0.0)).expect("finite sigma");
    let normal_nlos = Normal::new(0.0, params.sigma_nlos.max(0.0)).expect("finite sigma");
    let mut links = Vec::new();
    for a in 0..nodes.len() {
        for b in (a + 1)..nodes.len() {
            let (ra, rb) = (nodes[a].role, nodes[b].role);
            if ra == NodeRole::Ue && rb == NodeRole::Ue {
                continue;
            }
            let d = ((pos[a].0 - pos[b].0).powi(2) + (pos[a].1 - pos[b].1).powi(2)).sqrt();
            if d > scn.max_link_distance + 1e-9 {
                continue;
            }
            let d = d.max(MIN_DISTANCE_M);
            let state = sample_state(&mut rng, &scn.state_model, d);
            let shadow = match (scn.state_model.shadowing, state) {
                (true, ChannelState::Los) => normal_los.sample(&mut rng),
                (true, ChannelState::Nlos) => normal_nlos.sample(&mut rng),
                _ => 0.0,
            };
            let Some(cap) = link_capacity(d, state, shadow, params)? else {
                continue;
            };
            // downlink only: nothing enters the eNB, nothing leaves a UE
            if rb != NodeRole::Enb && ra != NodeRole::Ue {
                links.push(Link { src: a, dst: b, capacity: cap, origin: None });
            }
            if ra != NodeRole::Enb && rb != NodeRole::Ue {
                links.push(Link { src: b, dst: a, capacity: cap, origin: None });
            }
        }
    }
    Network::new(nodes, links)
}
