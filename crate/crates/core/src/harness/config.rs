use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::RewardWeights;
use crate::error::{Error, Result};
use crate::mdp::{MdpConfig, DEFAULT_STATE_CAP};
use crate::policies::PolicyKind;
use crate::scenario::Scenario;
use crate::stochastics::{ArrivalLaw, ArrivalProcess, ChannelChain};
use crate::topology::{
    build_random_topology, enumerate_maximal_sets_exhaustive, enumerate_transmission_sets,
    Topology, TransmissionSetMatrix,
};

/// The IEEE 802.11g data rates, Mbit/s.
pub const DOT11G_RATES_MBPS: [f64; 8] = [6.0, 9.0, 12.0, 18.0, 24.0, 36.0, 48.0, 54.0];

/// Harvested energy per packet on sensor links, µJ.
pub const SENSOR_ENERGY_UJ: [f64; 10] = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetEnumeration {
    #[default]
    Greedy,
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologyConfig {
    pub n_aps: usize,
    pub edge_prob: f64,
    pub max_stations: usize,
    pub max_sensors: usize,
    /// Fixed topology file; overrides the random parameters.
    pub file: Option<PathBuf>,
    /// Inline fixed topology; overrides the random parameters.
    pub explicit: Option<Topology>,
    pub set_enumeration: SetEnumeration,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        Self {
            n_aps: 10,
            edge_prob: 0.5,
            max_stations: 5,
            max_sensors: 5,
            file: None,
            explicit: None,
            set_enumeration: SetEnumeration::Greedy,
        }
    }
}

/// State values of one kind of link, either listed directly or derived from
/// data rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelProfile {
    pub values: Option<Vec<f64>>,
    pub rates_mbps: Option<Vec<f64>>,
    pub packet_bytes: f64,
    pub slot_ms: f64,
    /// Row-stochastic matrix; uniform when absent.
    pub transitions: Option<Vec<Vec<f64>>>,
}

impl Default for ChannelProfile {
    fn default() -> Self {
        Self {
            values: None,
            rates_mbps: None,
            packet_bytes: 150_000.0,
            slot_ms: 100.0,
            transitions: None,
        }
    }
}

impl ChannelProfile {
    pub fn from_values(values: Vec<f64>) -> Self {
        Self {
            values: Some(values),
            ..Self::default()
        }
    }

    /// 802.11g rates at 150 kB per packet and 100 ms slots, i.e. 0.5 to 4.5
    /// packets per slot before flooring. The two slowest rates fit no packet.
    pub fn dot11g() -> Self {
        Self {
            rates_mbps: Some(DOT11G_RATES_MBPS.to_vec()),
            ..Self::default()
        }
    }

    pub fn state_values(&self) -> Result<Vec<f64>> {
        match (&self.values, &self.rates_mbps) {
            (Some(v), None) => Ok(v.clone()),
            (None, Some(rates)) => {
                if !(self.packet_bytes > 0.0 && self.slot_ms > 0.0) {
                    return Err(Error::InvalidConfig(
                        "packet_bytes and slot_ms must be positive".into(),
                    ));
                }
                let bits_per_packet = self.packet_bytes * 8.0;
                Ok(rates
                    .iter()
                    .map(|r| r * 1e6 * self.slot_ms / 1000.0 / bits_per_packet)
                    .collect())
            }
            _ => Err(Error::InvalidConfig(
                "channel profile needs exactly one of `values` or `rates_mbps`".into(),
            )),
        }
    }

    pub fn chain(&self) -> Result<ChannelChain> {
        let values = self.state_values()?;
        match &self.transitions {
            Some(rows) => ChannelChain::new(values, rows.clone()),
            None => ChannelChain::uniform(values),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelsConfig {
    pub station: ChannelProfile,
    pub sensor: ChannelProfile,
}

impl Default for ChannelsConfig {
    fn default() -> Self {
        Self {
            station: ChannelProfile::dot11g(),
            sensor: ChannelProfile::from_values(SENSOR_ENERGY_UJ.to_vec()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrivalsConfig {
    /// Bernoulli success probability per queue and slot.
    pub p: f64,
    /// Packets delivered on success.
    pub batch: u32,
    /// Explicit count distribution; overrides `p` and `batch`.
    pub pmf: Option<Vec<f64>>,
}

impl Default for ArrivalsConfig {
    fn default() -> Self {
        Self {
            p: 0.5,
            batch: 1,
            pmf: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MdpSection {
    /// Simulated slots per run.
    #[serde(rename = "T")]
    pub horizon: usize,
    pub gamma: f64,
    #[serde(rename = "N")]
    pub samples: usize,
    #[serde(rename = "H")]
    pub depth: usize,
    pub gamma_d: f64,
    pub gamma_e: f64,
    pub q_max: Option<u32>,
    pub slot_fill_energy: bool,
    pub state_cap: usize,
}

impl Default for MdpSection {
    fn default() -> Self {
        let w = RewardWeights::default();
        Self {
            horizon: 10_000,
            gamma: 1.0,
            samples: 100,
            depth: 1,
            gamma_d: w.data,
            gamma_e: w.energy,
            q_max: None,
            slot_fill_energy: false,
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub runs: usize,
    pub seed: u64,
    pub policies: Vec<PolicyKind>,
    pub arrival_sweep: Vec<f64>,
    pub edge_sweep: Vec<f64>,
    /// Arrival probability held fixed during the interference sweep.
    pub fixed_load: f64,
    /// Horizons of the approximation-gap study.
    pub horizons: Vec<usize>,
    /// Sampling seeds per horizon in the gap study.
    pub gap_seeds: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            runs: 20,
            seed: 1,
            policies: PolicyKind::ALL.to_vec(),
            arrival_sweep: (1..=9).map(|k| k as f64 / 10.0).collect(),
            edge_sweep: (1..=10).map(|k| k as f64 / 10.0).collect(),
            fixed_load: 0.5,
            horizons: (1..=10).collect(),
            gap_seeds: 20,
        }
    }
}

/// Full experiment description, read from JSON.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub topology: TopologyConfig,
    pub channels: ChannelsConfig,
    pub arrivals: ArrivalsConfig,
    pub mdp: MdpSection,
    pub experiment: ExperimentSection,
}

impl ExperimentConfig {
    /// Ten APs, 10 000 slots, 20 runs.
    pub fn full() -> Self {
        Self::default()
    }

    /// Four APs, 2 000 slots, 5 runs.
    pub fn quick() -> Self {
        let mut cfg = Self::default();
        cfg.apply_quick();
        cfg
    }

    /// Shrinks a configuration to the quick profile; the gap study keeps at
    /// most 5 seeds.
    pub fn apply_quick(&mut self) {
        self.topology.n_aps = 4;
        self.mdp.horizon = 2_000;
        self.experiment.runs = 5;
        self.experiment.gap_seeds = self.experiment.gap_seeds.min(5);
    }

    /// The enumerable two-AP scenario used by the gap study.
    pub fn small_exact() -> Self {
        let sc = Scenario::small_exact();
        Self {
            topology: TopologyConfig {
                explicit: Some(sc.topology.clone()),
                ..TopologyConfig::default()
            },
            channels: ChannelsConfig {
                station: ChannelProfile::from_values(vec![1.0, 2.0]),
                sensor: ChannelProfile::from_values(vec![1.0, 2.0]),
            },
            arrivals: ArrivalsConfig {
                pmf: Some(vec![1.0 / 3.0; 3]),
                ..ArrivalsConfig::default()
            },
            mdp: MdpSection {
                samples: 1000,
                q_max: Some(2),
                ..MdpSection::default()
            },
            experiment: ExperimentSection {
                horizons: vec![1, 2, 4, 6],
                ..ExperimentSection::default()
            },
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        if e.runs == 0 {
            return Err(Error::InvalidConfig("runs must be at least 1".into()));
        }
        if e.policies.is_empty() {
            return Err(Error::InvalidConfig("policy list is empty".into()));
        }
        if e.arrival_sweep.is_empty() || e.edge_sweep.is_empty() || e.horizons.is_empty() {
            return Err(Error::InvalidConfig("sweep lists must be non-empty".into()));
        }
        if e.gap_seeds == 0 {
            return Err(Error::InvalidConfig("gap_seeds must be at least 1".into()));
        }
        for &p in e.arrival_sweep.iter().chain(&e.edge_sweep).chain([&e.fixed_load]) {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("probability {p} outside [0, 1]")));
            }
        }
        self.channels.station.chain()?;
        self.channels.sensor.chain()?;
        self.arrival_law(self.arrivals.p)?;
        self.mdp_config()?;
        Ok(())
    }

    pub fn weights(&self) -> Result<RewardWeights> {
        RewardWeights::new(self.mdp.gamma_d, self.mdp.gamma_e)
    }

    /// Solver settings with the configured run length as horizon.
    pub fn mdp_config(&self) -> Result<MdpConfig> {
        MdpConfig::new(
            self.mdp.horizon,
            self.mdp.gamma,
            self.mdp.samples,
            self.mdp.depth,
            self.weights()?,
        )
    }

    /// Arrival law with success probability `p`, unless a pmf is configured.
    pub fn arrival_law(&self, p: f64) -> Result<ArrivalLaw> {
        match &self.arrivals.pmf {
            Some(pmf) => ArrivalLaw::from_pmf(pmf.clone()),
            None => ArrivalLaw::bernoulli(p, self.arrivals.batch),
        }
    }

    /// Fixed topology when one is configured, otherwise a fresh random one.
    pub fn topology<R: Rng + ?Sized>(&self, edge_prob: f64, rng: &mut R) -> Result<Topology> {
        let t = &self.topology;
        if let Some(topo) = &t.explicit {
            return Ok(topo.clone());
        }
        if let Some(path) = &t.file {
            return Topology::load(path);
        }
        build_random_topology(t.n_aps, edge_prob, t.max_stations, t.max_sensors, rng)
    }

    pub fn has_fixed_topology(&self) -> bool {
        self.topology.explicit.is_some() || self.topology.file.is_some()
    }

    pub fn scenario(&self, topology: Topology, arrival_p: f64) -> Result<Scenario> {
        let ns = topology.n_stations();
        let nz = topology.n_sensors();
        Scenario::new(
            topology,
            vec![self.channels.station.chain()?; ns],
            vec![self.channels.sensor.chain()?; nz],
            ArrivalProcess::identical(ns, self.arrival_law(arrival_p)?),
            self.mdp.q_max,
            self.mdp.slot_fill_energy,
        )
    }

    pub fn actions(&self, topology: &Topology) -> Result<TransmissionSetMatrix> {
        match self.topology.set_enumeration {
            SetEnumeration::Greedy => Ok(enumerate_transmission_sets(topology.graph())),
            SetEnumeration::Exhaustive => enumerate_maximal_sets_exhaustive(topology.graph()),
        }
    }
}
