//! Random processes: per-link Markov channel chains, per-queue packet
//! arrivals, seeded RNG streams and one-slot outcome sampling.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::SystemState;
use crate::error::{Error, Result};
use crate::policies::PolicyKind;
use crate::scenario::Scenario;
use crate::topology::TransmissionSet;

const ROW_TOLERANCE: f64 = 1e-9;

/// Finite-state Markov chain for one link.
///
/// State values are packets per slot on station links and µJ per packet on
/// sensor links. The chain itself is immutable; the current state index lives
/// in [`SystemState`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelChain {
    values: Vec<f64>,
    transitions: Vec<f64>,
    cumulative: Vec<f64>,
}

impl ChannelChain {
    pub fn new(values: Vec<f64>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::InvalidChain("chain needs at least one state".into()));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidChain(format!(
                "state values must be finite and non-negative, got {v}"
            )));
        }
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidChain(format!(
                "transition matrix must be {n}x{n}"
            )));
        }
        let mut transitions = Vec::with_capacity(n * n);
        let mut cumulative = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                return Err(Error::InvalidChain(format!("row {i} has a negative entry")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::InvalidChain(format!("row {i} sums to {sum}")));
            }
            let mut acc = 0.0;
            for &p in row {
                acc += p;
                transitions.push(p);
                cumulative.push(acc);
            }
        }
        Ok(Self {
            values,
            transitions,
            cumulative,
        })
    }

    /// Every state moves to every state with probability `1 / n`.
    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::InvalidChain("chain needs at least one state".into()));
        }
        let p = 1.0 / n as f64;
        Self::new(values, vec![vec![p; n]; n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, state: usize) -> f64 {
        self.values[state]
    }

    #[inline]
    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.transitions[from * self.len() + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        let n = self.len();
        &self.transitions[from * n..(from + 1) * n]
    }

    /// Draws the successor of `current` from its transition row.
    pub fn sample_next<R: Rng + ?Sized>(&self, current: usize, rng: &mut R) -> usize {
        let n = self.len();
        let cdf = &self.cumulative[current * n..(current + 1) * n];
        sample_cdf(cdf, self.row(current), rng)
    }

    /// Uniform draw over the states, used for the initial channel condition.
    pub fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        rng.gen_range(0..self.len())
    }
}

/// Convenience wrapper matching the per-slot channel update.
pub fn step_channel<R: Rng + ?Sized>(chain: &ChannelChain, current: usize, rng: &mut R) -> usize {
    chain.sample_next(current, rng)
}

#[inline]
fn sample_cdf<R: Rng + ?Sized>(cdf: &[f64], pmf: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    match cdf.iter().position(|&c| u < c) {
        Some(i) => i,
        // rounding left the cumulative sum just below 1
        None => pmf.iter().rposition(|&p| p > 0.0).unwrap_or(0),
    }
}

/// Packet-count distribution of one queue per slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalLaw {
    pmf: Vec<f64>,
    cdf: Vec<f64>,
}

impl ArrivalLaw {
    /// `pmf[k]` is the probability that `k` packets arrive.
    pub fn from_pmf(pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::InvalidArrivals("empty pmf".into()));
        }
        if pmf.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidArrivals(format!("negative mass in {pmf:?}")));
        }
        let sum: f64 = pmf.iter().sum();
        if (sum - 1.0).abs() > ROW_TOLERANCE {
            return Err(Error::InvalidArrivals(format!("pmf sums to {sum}")));
        }
        let cdf = pmf
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        Ok(Self { pmf, cdf })
    }

    /// `batch` packets with probability `p`, otherwise none.
    pub fn bernoulli(p: f64, batch: u32) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArrivals(format!(
                "arrival probability {p} outside [0, 1]"
            )));
        }
        if batch == 0 {
            return Err(Error::InvalidArrivals("batch size must be at least 1".into()));
        }
        let mut pmf = vec![0.0; batch as usize + 1];
        pmf[0] = 1.0 - p;
        pmf[batch as usize] = p;
        Self::from_pmf(pmf)
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    /// `(count, probability)` pairs with positive probability.
    pub fn support(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.pmf
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(k, &p)| (k as u32, p))
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        sample_cdf(&self.cdf, &self.pmf, rng) as u32
    }
}

/// Independent arrival laws, one per station queue (indexed by station ID).
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalProcess {
    laws: Vec<ArrivalLaw>,
}

impl ArrivalProcess {
    pub fn new(laws: Vec<ArrivalLaw>) -> Self {
        Self { laws }
    }

    pub fn identical(n_stations: usize, law: ArrivalLaw) -> Self {
        Self {
            laws: vec![law; n_stations],
        }
    }

    pub fn len(&self) -> usize {
        self.laws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.laws.is_empty()
    }

    pub fn law(&self, station: usize) -> &ArrivalLaw {
        &self.laws[station]
    }

    pub fn laws(&self) -> &[ArrivalLaw] {
        &self.laws
    }

    /// Mean packets per slot of each queue.
    pub fn rates(&self) -> Vec<f64> {
        self.laws.iter().map(ArrivalLaw::mean).collect()
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [u32]) {
        for (slot, law) in out.iter_mut().zip(&self.laws) {
            *slot = law.sample(rng);
        }
    }
}

/// One draw per queue, in station-ID order.
pub fn sample_arrivals<R: Rng + ?Sized>(proc: &ArrivalProcess, rng: &mut R) -> Vec<u32> {
    let mut out = vec![0; proc.len()];
    proc.sample_into(rng, &mut out);
    out
}

/// Independent RNG streams for one simulation run.
///
/// Channels, arrivals and topology draw from their own streams so that runs
/// with different policies but the same seed see identical exogenous
/// trajectories.
#[derive(Debug, Clone)]
pub struct RunStreams {
    pub topology: ChaCha8Rng,
    pub channels: ChaCha8Rng,
    pub arrivals: ChaCha8Rng,
    pub selection: ChaCha8Rng,
    pub planner: ChaCha8Rng,
}

impl RunStreams {
    pub fn from_seed(seed: u64) -> Self {
        let stream = |id: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(id);
            rng
        };
        Self {
            topology: stream(1),
            channels: stream(2),
            arrivals: stream(3),
            selection: stream(4),
            planner: stream(5),
        }
    }
}

/// Mixes a base seed with an index (splitmix64 finalizer).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sampled successor state and its weight in the sample average.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeSample {
    pub state: SystemState,
    pub weight: f64,
}

/// Exogenous randomness of one slot: per-AP selection draws (random policy
/// only), per-queue arrivals and per-link next channel indices.
#[derive(Debug, Clone)]
pub(crate) struct ExogenousDraw {
    pub picks: Vec<usize>,
    pub arrivals: Vec<u32>,
    pub station_channels: Vec<usize>,
    pub sensor_channels: Vec<usize>,
}

impl ExogenousDraw {
    pub fn new(sc: &Scenario) -> Self {
        let topo = &sc.topology;
        Self {
            picks: vec![0; topo.n_aps()],
            arrivals: vec![0; topo.n_stations()],
            station_channels: vec![0; topo.n_stations()],
            sensor_channels: vec![0; topo.n_sensors()],
        }
    }

    /// Redraws everything. Draw order: random-policy picks for active APs in
    /// ID order, arrivals in station order, station links, sensor links.
    pub fn draw<R: RngCore + ?Sized>(
        &mut self,
        sc: &Scenario,
        state: &SystemState,
        action: &TransmissionSet,
        kind: PolicyKind,
        rng: &mut R,
    ) {
        if kind == PolicyKind::Random {
            for ap in action.active_aps() {
                self.picks[ap.0] = rng.gen_range(0..sc.topology.stations_of(ap).len());
            }
        }
        sc.arrivals.sample_into(rng, &mut self.arrivals);
        for (i, chain) in sc.station_chains.iter().enumerate() {
            self.station_channels[i] = chain.sample_next(state.station_channels[i], rng);
        }
        for (i, chain) in sc.sensor_chains.iter().enumerate() {
            self.sensor_channels[i] = chain.sample_next(state.sensor_channels[i], rng);
        }
    }
}

/// Draws `n` successors of `state` under `action` by simulating one slot
/// (station selection by `kind`, arrivals, channel transitions). Each sample
/// carries weight `1 / n`.
pub fn sample_outcomes<R: RngCore + ?Sized>(
    sc: &Scenario,
    state: &SystemState,
    action: &TransmissionSet,
    kind: PolicyKind,
    n: usize,
    rng: &mut R,
) -> Result<Vec<OutcomeSample>> {
    if n == 0 {
        return Err(Error::InvalidConfig("sample count must be at least 1".into()));
    }
    let plans = crate::dynamics::ServicePlan::for_action(sc, state, action, kind)?;
    let mut draw = ExogenousDraw::new(sc);
    let weight = 1.0 / n as f64;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        draw.draw(sc, state, action, kind, rng);
        let departures = plans.departures(&draw.picks);
        out.push(OutcomeSample {
            state: sc.successor(state, &departures, &draw),
            weight,
        });
    }
    Ok(out)
}
