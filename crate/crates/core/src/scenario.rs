//! A topology together with its channel chains, arrival laws and queue
//! limits: everything needed to simulate or solve the scheduling problem.

use rand::Rng;

use crate::dynamics::{QueueMatrix, SystemState};
use crate::error::{Error, Result};
use crate::stochastics::{ArrivalLaw, ArrivalProcess, ChannelChain, ExogenousDraw};
use crate::topology::{ConflictGraph, SensorId, StationId, Topology};

#[derive(Debug, Clone)]
pub struct Scenario {
    pub topology: Topology,
    /// Chain of each station link, indexed by station ID.
    pub station_chains: Vec<ChannelChain>,
    /// Chain of each sensor link, indexed by sensor ID.
    pub sensor_chains: Vec<ChannelChain>,
    pub arrivals: ArrivalProcess,
    /// Per-queue capacity; `None` means unbounded.
    pub queue_cap: Option<u32>,
    /// Credit sensors for a full slot of transmission whenever their AP is
    /// active, instead of only for the data packets actually sent.
    pub slot_fill_energy: bool,
}

impl Scenario {
    pub fn new(
        topology: Topology,
        station_chains: Vec<ChannelChain>,
        sensor_chains: Vec<ChannelChain>,
        arrivals: ArrivalProcess,
        queue_cap: Option<u32>,
        slot_fill_energy: bool,
    ) -> Result<Self> {
        if station_chains.len() != topology.n_stations() {
            return Err(Error::InvalidConfig(format!(
                "{} station chains for {} stations",
                station_chains.len(),
                topology.n_stations()
            )));
        }
        if sensor_chains.len() != topology.n_sensors() {
            return Err(Error::InvalidConfig(format!(
                "{} sensor chains for {} sensors",
                sensor_chains.len(),
                topology.n_sensors()
            )));
        }
        if arrivals.len() != topology.n_stations() {
            return Err(Error::InvalidConfig(format!(
                "{} arrival laws for {} stations",
                arrivals.len(),
                topology.n_stations()
            )));
        }
        if let Some(ap) = topology.aps().find(|&a| topology.stations_of(a).is_empty()) {
            return Err(Error::NoStations(ap));
        }
        Ok(Self {
            topology,
            station_chains,
            sensor_chains,
            arrivals,
            queue_cap,
            slot_fill_energy,
        })
    }

    /// Same chain on every station link, same chain on every sensor link,
    /// same arrival law on every queue.
    pub fn homogeneous(
        topology: Topology,
        station_chain: ChannelChain,
        sensor_chain: ChannelChain,
        arrival: ArrivalLaw,
        queue_cap: Option<u32>,
    ) -> Result<Self> {
        let ns = topology.n_stations();
        let nz = topology.n_sensors();
        Self::new(
            topology,
            vec![station_chain; ns],
            vec![sensor_chain; nz],
            ArrivalProcess::identical(ns, arrival),
            queue_cap,
            false,
        )
    }

    /// Two mutually interfering APs with two stations and one sensor each;
    /// queues hold at most two packets, every link has two equiprobable
    /// states {1, 2}, and 0, 1 or 2 packets arrive per queue with equal
    /// probability. 3^4 * 2^6 = 5184 states.
    pub fn small_exact() -> Self {
        let topology =
            Topology::from_counts(ConflictGraph::complete(2).expect("2 APs"), &[2, 2], &[1, 1])
                .expect("valid association");
        let chain = ChannelChain::uniform(vec![1.0, 2.0]).expect("valid chain");
        let third = 1.0 / 3.0;
        let arrival = ArrivalLaw::from_pmf(vec![third, third, third]).expect("valid pmf");
        Self::homogeneous(topology, chain.clone(), chain, arrival, Some(2))
            .expect("consistent scenario")
    }

    /// Channel rate of a station link in the current state, packets per slot.
    #[inline]
    pub fn station_rate(&self, state: &SystemState, s: StationId) -> f64 {
        self.station_chains[s.0].value(state.station_channels[s.0])
    }

    /// Energy per transmitted packet on a sensor link, µJ.
    #[inline]
    pub fn sensor_energy(&self, state: &SystemState, z: SensorId) -> f64 {
        self.sensor_chains[z.0].value(state.sensor_channels[z.0])
    }

    /// Empty queues, every link in its first channel state.
    pub fn empty_state(&self) -> SystemState {
        SystemState {
            queues: QueueMatrix::zeros(self.topology.n_stations()),
            station_channels: vec![0; self.station_chains.len()],
            sensor_channels: vec![0; self.sensor_chains.len()],
        }
    }

    /// Cold start: empty queues, channel states drawn uniformly per link.
    pub fn initial_state<R: Rng + ?Sized>(&self, rng: &mut R) -> SystemState {
        SystemState {
            queues: QueueMatrix::zeros(self.topology.n_stations()),
            station_channels: self
                .station_chains
                .iter()
                .map(|c| c.sample_initial(rng))
                .collect(),
            sensor_channels: self
                .sensor_chains
                .iter()
                .map(|c| c.sample_initial(rng))
                .collect(),
        }
    }

    /// Every cold-start state, each equally likely under [`Self::initial_state`].
    pub fn initial_states(&self) -> Vec<SystemState> {
        let radices: Vec<usize> = self
            .station_chains
            .iter()
            .chain(&self.sensor_chains)
            .map(ChannelChain::len)
            .collect();
        let count: usize = radices.iter().product();
        let ns = self.station_chains.len();
        (0..count)
            .map(|mut k| {
                let mut digits = vec![0; radices.len()];
                for (d, &r) in digits.iter_mut().zip(&radices).rev() {
                    *d = k % r;
                    k /= r;
                }
                let sensor_channels = digits.split_off(ns);
                SystemState {
                    queues: QueueMatrix::zeros(self.topology.n_stations()),
                    station_channels: digits,
                    sensor_channels,
                }
            })
            .collect()
    }

    /// Queue update `q - departures + arrivals`, clipped at the cap.
    /// Returns the new queues and the number of dropped packets.
    pub(crate) fn apply_queue_update(
        &self,
        queues: &QueueMatrix,
        departures: &[u32],
        arrivals: &[u32],
    ) -> (QueueMatrix, u64) {
        let mut dropped = 0u64;
        let next = queues
            .0
            .iter()
            .zip(departures)
            .zip(arrivals)
            .map(|((&q, &d), &a)| {
                let raw = (q - d) as u64 + a as u64;
                match self.queue_cap {
                    Some(cap) if raw > cap as u64 => {
                        dropped += raw - cap as u64;
                        cap
                    }
                    _ => raw.min(u32::MAX as u64) as u32,
                }
            })
            .collect();
        (QueueMatrix(next), dropped)
    }

    pub(crate) fn successor(
        &self,
        state: &SystemState,
        departures: &[u32],
        draw: &ExogenousDraw,
    ) -> SystemState {
        let (queues, _) = self.apply_queue_update(&state.queues, departures, &draw.arrivals);
        SystemState {
            queues,
            station_channels: draw.station_channels.clone(),
            sensor_channels: draw.sensor_channels.clone(),
        }
    }

    /// Moves every link one step along its chain.
    pub fn step_channels<R: Rng + ?Sized>(&self, state: &mut SystemState, rng: &mut R) {
        for (idx, chain) in state.station_channels.iter_mut().zip(&self.station_chains) {
            *idx = chain.sample_next(*idx, rng);
        }
        for (idx, chain) in state.sensor_channels.iter_mut().zip(&self.sensor_chains) {
            *idx = chain.sample_next(*idx, rng);
        }
    }
}
