//! One slot of system evolution: transmission, queue update, energy delivery
//! and reward.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policies::{self, PolicyKind};
use crate::scenario::Scenario;
use crate::topology::{is_independent, ApId, StationId, Topology, TransmissionSet};

/// Station chosen by each active AP.
pub type Selections = BTreeMap<ApId, StationId>;

/// Queue length of every station, indexed by station ID.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QueueMatrix(pub Vec<u32>);

impl QueueMatrix {
    pub fn zeros(n_stations: usize) -> Self {
        Self(vec![0; n_stations])
    }

    #[inline]
    pub fn get(&self, s: StationId) -> u32 {
        self.0[s.0]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&q| q as u64).sum()
    }
}

/// Queue lengths plus the channel state index of every station and sensor
/// link.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SystemState {
    pub queues: QueueMatrix,
    pub station_channels: Vec<usize>,
    pub sensor_channels: Vec<usize>,
}

/// Weights of the per-slot reward `data * packets + energy * µJ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardWeights {
    pub data: f64,
    pub energy: f64,
}

impl RewardWeights {
    pub fn new(data: f64, energy: f64) -> Result<Self> {
        let w = Self { data, energy };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.data) || !ok(self.energy) {
            return Err(Error::InvalidConfig(
                "reward weights must be finite and non-negative".into(),
            ));
        }
        if self.data == 0.0 && self.energy == 0.0 {
            return Err(Error::InvalidConfig(
                "reward weights cannot both be zero".into(),
            ));
        }
        Ok(())
    }
}

impl Default for RewardWeights {
    /// One packet weighs like 100 µJ of delivered energy.
    fn default() -> Self {
        Self {
            data: 1.0,
            energy: 0.01,
        }
    }
}

/// Everything that happened in one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotResult {
    /// Packets sent by each AP (zero when inactive), indexed by AP ID.
    pub transmitted: Vec<u32>,
    pub total_transmitted: u64,
    /// Energy delivered to all sensors, µJ.
    pub energy: f64,
    /// Energy delivered to each sensor, µJ, indexed by sensor ID.
    pub sensor_energy: Vec<f64>,
    pub selections: Selections,
    pub next_queues: QueueMatrix,
    /// Packets discarded because a queue hit its capacity.
    pub dropped: u64,
}

/// Packets an AP sends to one station: the queue length capped by the
/// channel rate, rounded down to whole packets.
#[inline]
pub fn transmit_count(queue_len: u32, channel_rate: f64) -> u32 {
    let cap = if channel_rate.is_finite() && channel_rate > 0.0 {
        channel_rate.floor().min(u32::MAX as f64) as u32
    } else {
        0
    };
    queue_len.min(cap)
}

/// Total queue length at `ap`.
pub fn total_queue(topology: &Topology, queues: &QueueMatrix, ap: ApId) -> u64 {
    topology
        .stations_of(ap)
        .iter()
        .map(|&s| queues.get(s) as u64)
        .sum()
}

pub fn reward(result: &SlotResult, w: &RewardWeights) -> f64 {
    w.data * result.total_transmitted as f64 + w.energy * result.energy
}

/// Packets and per-sensor energy when `ap` serves `station` in `state`.
fn serve(sc: &Scenario, state: &SystemState, ap: ApId, station: StationId) -> (u32, f64) {
    let rate = sc.station_rate(state, station);
    let packets = transmit_count(state.queues.get(station), rate);
    let charged = if sc.slot_fill_energy {
        transmit_count(u32::MAX, rate)
    } else {
        packets
    } as f64;
    let energy = sc
        .topology
        .sensors_of(ap)
        .iter()
        .map(|&z| sc.sensor_energy(state, z) * charged)
        .sum();
    (packets, energy)
}

/// Advances the queues by one slot under `action`.
///
/// Each active AP serves its selected station from the packets queued at the
/// start of the slot; arrivals join afterwards and become servable next slot.
/// With a queue cap, post-arrival lengths are clipped and the excess counted
/// as drops.
pub fn step_slot(
    sc: &Scenario,
    state: &SystemState,
    action: &TransmissionSet,
    selections: &Selections,
    arrivals: &[u32],
) -> Result<SlotResult> {
    let topo = &sc.topology;
    if action.len() != topo.n_aps() {
        return Err(Error::InvalidConfig(format!(
            "action {action} does not match {} APs",
            topo.n_aps()
        )));
    }
    if !is_independent(topo.graph(), action) {
        return Err(Error::NotIndependent(action.to_string()));
    }
    if arrivals.len() != topo.n_stations() {
        return Err(Error::InvalidConfig(format!(
            "expected {} arrival counts, got {}",
            topo.n_stations(),
            arrivals.len()
        )));
    }

    let mut transmitted = vec![0u32; topo.n_aps()];
    let mut sensor_energy = vec![0.0; topo.n_sensors()];
    let mut departures = vec![0u32; topo.n_stations()];
    let mut active_selections = Selections::new();
    for ap in action.active_aps() {
        let station = *selections.get(&ap).ok_or(Error::MissingSelection(ap))?;
        if station.0 >= topo.n_stations() || topo.ap_of_station(station) != ap {
            return Err(Error::ForeignStation { ap, station });
        }
        let rate = sc.station_rate(state, station);
        let packets = transmit_count(state.queues.get(station), rate);
        let charged = if sc.slot_fill_energy {
            transmit_count(u32::MAX, rate)
        } else {
            packets
        } as f64;
        for &z in topo.sensors_of(ap) {
            sensor_energy[z.0] = sc.sensor_energy(state, z) * charged;
        }
        transmitted[ap.0] = packets;
        departures[station.0] = packets;
        active_selections.insert(ap, station);
    }

    let (next_queues, dropped) = sc.apply_queue_update(&state.queues, &departures, arrivals);
    Ok(SlotResult {
        total_transmitted: transmitted.iter().map(|&t| t as u64).sum(),
        energy: sensor_energy.iter().sum(),
        transmitted,
        sensor_energy,
        selections: active_selections,
        next_queues,
        dropped,
    })
}

/// One possible station choice of an active AP and what it yields.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ServiceOption {
    pub station: StationId,
    pub prob: f64,
    pub packets: u32,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct ApService {
    pub ap: ApId,
    /// Indexed by the random-policy pick; a single entry otherwise.
    pub options: Vec<ServiceOption>,
}

/// Service outcomes of every active AP for a fixed state and action, before
/// any exogenous randomness is drawn.
#[derive(Debug, Clone)]
pub(crate) struct ServicePlan {
    pub aps: Vec<ApService>,
    n_stations: usize,
}

impl ServicePlan {
    pub fn for_action(
        sc: &Scenario,
        state: &SystemState,
        action: &TransmissionSet,
        kind: PolicyKind,
    ) -> Result<Self> {
        let mut aps = Vec::with_capacity(action.active_count());
        for ap in action.active_aps() {
            let dist = policies::selection_distribution(kind, ap, sc, state)?;
            let options = dist
                .into_iter()
                .map(|(station, prob)| {
                    let (packets, energy) = serve(sc, state, ap, station);
                    ServiceOption {
                        station,
                        prob,
                        packets,
                        energy,
                    }
                })
                .collect();
            aps.push(ApService { ap, options });
        }
        Ok(Self {
            aps,
            n_stations: sc.topology.n_stations(),
        })
    }

    /// Reward averaged over the station-choice distribution.
    pub fn expected_reward(&self, w: &RewardWeights) -> f64 {
        self.aps
            .iter()
            .flat_map(|a| &a.options)
            .map(|o| o.prob * (w.data * o.packets as f64 + w.energy * o.energy))
            .sum()
    }

    /// Chosen option per active AP given random-policy picks (indexed by AP).
    #[inline]
    pub fn chosen<'a>(&'a self, picks: &'a [usize]) -> impl Iterator<Item = &'a ServiceOption> {
        self.aps.iter().map(move |a| {
            if a.options.len() == 1 {
                &a.options[0]
            } else {
                &a.options[picks[a.ap.0]]
            }
        })
    }

    pub fn departures_into(&self, picks: &[usize], out: &mut [u32]) {
        out.iter_mut().for_each(|d| *d = 0);
        for o in self.chosen(picks) {
            out[o.station.0] = o.packets;
        }
    }

    pub fn departures(&self, picks: &[usize]) -> Vec<u32> {
        let mut out = vec![0; self.n_stations];
        self.departures_into(picks, &mut out);
        out
    }

    /// Joint station choices across active APs with their probabilities.
    pub fn combinations(&self) -> Vec<(Vec<&ServiceOption>, f64)> {
        let mut combos: Vec<(Vec<&ServiceOption>, f64)> = vec![(Vec::new(), 1.0)];
        for a in &self.aps {
            combos = combos
                .into_iter()
                .flat_map(|(prefix, p)| {
                    a.options.iter().map(move |o| {
                        let mut next = prefix.clone();
                        next.push(o);
                        (next, p * o.prob)
                    })
                })
                .collect();
        }
        combos
    }
}
