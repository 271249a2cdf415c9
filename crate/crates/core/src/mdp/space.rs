use crate::dynamics::{QueueMatrix, SystemState};
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::stochastics::ChannelChain;
use crate::topology::{SensorId, StationId};

/// Default ceiling on the number of enumerated states.
pub const DEFAULT_STATE_CAP: usize = 10_000_000;

/// Perfect index over all `(queues, channels)` combinations of a scenario
/// with bounded queues.
///
/// Dimensions follow a canonical order: queues by (AP, station ID), then
/// station links in the same order, then sensor links by (AP, sensor ID).
/// The first dimension is the most significant digit, so the index splits as
/// `queue_block * channel_states + channel_block`.
#[derive(Debug, Clone)]
pub struct StateSpace {
    queue_radix: usize,
    queue_stride: Vec<usize>,
    station_link_stride: Vec<usize>,
    sensor_link_stride: Vec<usize>,
    station_link_radix: Vec<usize>,
    sensor_link_radix: Vec<usize>,
    station_order: Vec<StationId>,
    sensor_order: Vec<SensorId>,
    queue_states: usize,
    channel_states: usize,
}

impl StateSpace {
    pub fn new(sc: &Scenario, cap: usize) -> Result<Self> {
        let q_max = sc.queue_cap.ok_or_else(|| {
            Error::InvalidConfig("state enumeration needs a finite queue cap".into())
        })?;
        let topo = &sc.topology;
        let queue_radix = q_max as usize + 1;
        let ns = topo.n_stations();
        let nz = topo.n_sensors();

        let count = (queue_radix as f64).powi(ns as i32)
            * sc.station_chains
                .iter()
                .chain(&sc.sensor_chains)
                .map(|c| c.len() as f64)
                .product::<f64>();
        if count > cap as f64 {
            return Err(Error::StateCapExceeded { count, cap });
        }

        let station_order: Vec<StationId> = topo
            .aps()
            .flat_map(|a| topo.stations_of(a).iter().copied())
            .collect();
        let sensor_order: Vec<SensorId> = topo
            .aps()
            .flat_map(|a| topo.sensors_of(a).iter().copied())
            .collect();

        let station_link_radix: Vec<usize> =
            sc.station_chains.iter().map(ChannelChain::len).collect();
        let sensor_link_radix: Vec<usize> =
            sc.sensor_chains.iter().map(ChannelChain::len).collect();

        // channel block: least significant digit is the last sensor link
        let mut station_link_stride = vec![0; ns];
        let mut sensor_link_stride = vec![0; nz];
        let mut stride = 1;
        for &z in sensor_order.iter().rev() {
            sensor_link_stride[z.0] = stride;
            stride *= sensor_link_radix[z.0];
        }
        for &s in station_order.iter().rev() {
            station_link_stride[s.0] = stride;
            stride *= station_link_radix[s.0];
        }
        let channel_states = stride;

        let mut queue_stride = vec![0; ns];
        let mut qstride = 1;
        for &s in station_order.iter().rev() {
            queue_stride[s.0] = qstride * channel_states;
            qstride *= queue_radix;
        }

        Ok(Self {
            queue_radix,
            queue_stride,
            station_link_stride,
            sensor_link_stride,
            station_link_radix,
            sensor_link_radix,
            station_order,
            sensor_order,
            queue_states: qstride,
            channel_states,
        })
    }

    pub fn len(&self) -> usize {
        self.queue_states * self.channel_states
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn queue_states(&self) -> usize {
        self.queue_states
    }

    pub fn channel_states(&self) -> usize {
        self.channel_states
    }

    pub fn queue_cap(&self) -> u32 {
        (self.queue_radix - 1) as u32
    }

    /// Stations in canonical (most significant first) order.
    pub fn station_order(&self) -> &[StationId] {
        &self.station_order
    }

    pub fn sensor_order(&self) -> &[SensorId] {
        &self.sensor_order
    }

    pub(crate) fn queue_stride(&self, s: StationId) -> usize {
        self.queue_stride[s.0]
    }

    /// `(radix, stride)` of every link dimension inside the channel block.
    pub(crate) fn link_dims(&self) -> Vec<(usize, usize, LinkRef)> {
        self.station_order
            .iter()
            .map(|&s| {
                (
                    self.station_link_radix[s.0],
                    self.station_link_stride[s.0],
                    LinkRef::Station(s),
                )
            })
            .chain(self.sensor_order.iter().map(|&z| {
                (
                    self.sensor_link_radix[z.0],
                    self.sensor_link_stride[z.0],
                    LinkRef::Sensor(z),
                )
            }))
            .collect()
    }

    /// Channel-block index of the given link state indices.
    #[inline]
    pub fn channel_index(&self, station_channels: &[usize], sensor_channels: &[usize]) -> usize {
        station_channels
            .iter()
            .zip(&self.station_link_stride)
            .map(|(c, s)| c * s)
            .sum::<usize>()
            + sensor_channels
                .iter()
                .zip(&self.sensor_link_stride)
                .map(|(c, s)| c * s)
                .sum::<usize>()
    }

    pub fn index(&self, state: &SystemState) -> usize {
        let q: usize = state
            .queues
            .0
            .iter()
            .zip(&self.queue_stride)
            .map(|(&q, s)| q as usize * s)
            .sum();
        q + self.channel_index(&state.station_channels, &state.sensor_channels)
    }

    pub fn state(&self, index: usize) -> SystemState {
        let ns = self.queue_stride.len();
        let mut state = SystemState {
            queues: QueueMatrix::zeros(ns),
            station_channels: vec![0; ns],
            sensor_channels: vec![0; self.sensor_link_stride.len()],
        };
        self.decode_into(index, &mut state);
        state
    }

    pub fn decode_into(&self, index: usize, state: &mut SystemState) {
        for (i, &stride) in self.queue_stride.iter().enumerate() {
            state.queues.0[i] = ((index / stride) % self.queue_radix) as u32;
        }
        for (i, (&stride, &radix)) in self
            .station_link_stride
            .iter()
            .zip(&self.station_link_radix)
            .enumerate()
        {
            state.station_channels[i] = (index / stride) % radix;
        }
        for (i, (&stride, &radix)) in self
            .sensor_link_stride
            .iter()
            .zip(&self.sensor_link_radix)
            .enumerate()
        {
            state.sensor_channels[i] = (index / stride) % radix;
        }
    }

    pub fn states(&self) -> impl Iterator<Item = SystemState> + '_ {
        (0..self.len()).map(|i| self.state(i))
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum LinkRef {
    Station(StationId),
    Sensor(SensorId),
}

/// Every state of a bounded-queue scenario, in index order.
pub fn enumerate_state_space(sc: &Scenario, cap: usize) -> Result<Vec<SystemState>> {
    let space = StateSpace::new(sc, cap)?;
    Ok(space.states().collect())
}
