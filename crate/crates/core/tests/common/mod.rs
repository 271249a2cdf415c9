//! Independent reference implementations used as test oracles. Nothing here
//! calls into the crate's dynamics, policy or solver code; scenarios are read
//! only through their public fields and accessors.

#![allow(dead_code)]

use std::collections::HashMap;

use apsched::dynamics::{QueueMatrix, RewardWeights, SystemState};
use apsched::policies::PolicyKind;
use apsched::scenario::Scenario;
use apsched::stochastics::{ArrivalLaw, ArrivalProcess, ChannelChain};
use apsched::topology::{ConflictGraph, SensorId, StationId, Topology};
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct RefSlot {
    pub transmitted: Vec<u32>,
    pub sensor_energy: Vec<f64>,
    pub next_queues: Vec<u32>,
    pub dropped: u64,
}

fn rate_of(sc: &Scenario, state: &SystemState, j: usize) -> f64 {
    sc.station_chains[j].values()[state.station_channels[j]]
}

fn whole_packets(rate: f64) -> u64 {
    if rate > 0.0 {
        rate.floor() as u64
    } else {
        0
    }
}

/// One slot written out longhand. `chosen[a]` is the station served by AP
/// `a` when `active[a]`.
pub fn reference_step(
    sc: &Scenario,
    state: &SystemState,
    active: &[bool],
    chosen: &[Option<usize>],
    arrivals: &[u32],
) -> RefSlot {
    let topo = &sc.topology;
    let n_aps = active.len();
    let nz = state.sensor_channels.len();
    let mut transmitted = vec![0u32; n_aps];
    let mut sensor_energy = vec![0.0; nz];
    let mut after_service: Vec<u64> = state.queues.0.iter().map(|&q| q as u64).collect();

    for a in 0..n_aps {
        if !active[a] {
            continue;
        }
        let j = chosen[a].expect("active AP without a station");
        let fits = whole_packets(rate_of(sc, state, j));
        let sent = (state.queues.0[j] as u64).min(fits);
        transmitted[a] = sent as u32;
        after_service[j] -= sent;
        let charged = if sc.slot_fill_energy { fits } else { sent };
        for (z, e) in sensor_energy.iter_mut().enumerate() {
            if topo.ap_of_sensor(SensorId(z)).0 == a {
                let eps = sc.sensor_chains[z].values()[state.sensor_channels[z]];
                *e = eps * charged as f64;
            }
        }
    }

    let mut dropped = 0;
    let next_queues = after_service
        .iter()
        .zip(arrivals)
        .map(|(&q, &arr)| {
            let raw = q + arr as u64;
            match sc.queue_cap {
                Some(cap) if raw > cap as u64 => {
                    dropped += raw - cap as u64;
                    cap
                }
                _ => raw as u32,
            }
        })
        .collect();
    RefSlot {
        transmitted,
        sensor_energy,
        next_queues,
        dropped,
    }
}

/// Distribution over the station an AP serves, by exhaustive scoring.
pub fn reference_choice(
    kind: PolicyKind,
    sc: &Scenario,
    state: &SystemState,
    ap: usize,
) -> Vec<(usize, f64)> {
    let mine: Vec<usize> = (0..sc.topology.n_stations())
        .filter(|&j| sc.topology.ap_of_station(StationId(j)).0 == ap)
        .collect();
    assert!(!mine.is_empty());
    if kind == PolicyKind::Random {
        let p = 1.0 / mine.len() as f64;
        return mine.into_iter().map(|j| (j, p)).collect();
    }
    let score = |j: usize| {
        let q = state.queues.0[j] as f64;
        let r = rate_of(sc, state, j);
        match kind {
            PolicyKind::MaxWeight => q * r,
            PolicyKind::MaxQueue => q,
            PolicyKind::MaxCsi => r,
            PolicyKind::Random => unreachable!(),
        }
    };
    let mut best = mine[0];
    for &j in &mine[1..] {
        if score(j) > score(best) {
            best = j;
        }
    }
    vec![(best, 1.0)]
}

/// Every joint station choice of the active APs with its probability.
pub fn choice_combinations(
    kind: PolicyKind,
    sc: &Scenario,
    state: &SystemState,
    active: &[bool],
) -> Vec<(Vec<Option<usize>>, f64)> {
    let mut combos = vec![(vec![None; active.len()], 1.0)];
    for (a, &on) in active.iter().enumerate() {
        if !on {
            continue;
        }
        let dist = reference_choice(kind, sc, state, a);
        combos = combos
            .into_iter()
            .flat_map(|(c, p)| {
                dist.iter().map(move |&(j, pj)| {
                    let mut c = c.clone();
                    c[a] = Some(j);
                    (c, p * pj)
                })
            })
            .collect();
    }
    combos
}

/// Cartesian product of independent finite distributions.
fn product(dists: &[Vec<(usize, f64)>]) -> Vec<(Vec<usize>, f64)> {
    let mut out = vec![(Vec::new(), 1.0)];
    for d in dists {
        out = out
            .into_iter()
            .flat_map(|(v, p)| {
                d.iter().filter(|(_, q)| *q > 0.0).map(move |&(x, q)| {
                    let mut v = v.clone();
                    v.push(x);
                    (v, p * q)
                })
            })
            .collect();
    }
    out
}

/// Every (next state, probability) pair after service has left the queues
/// at `after_service`.
pub fn successors(
    sc: &Scenario,
    state: &SystemState,
    after_service: &[u64],
) -> Vec<(SystemState, f64)> {
    let arrival_dists: Vec<Vec<(usize, f64)>> = sc
        .arrivals
        .laws()
        .iter()
        .map(|law| law.pmf().iter().copied().enumerate().collect())
        .collect();
    let station_dists: Vec<Vec<(usize, f64)>> = sc
        .station_chains
        .iter()
        .zip(&state.station_channels)
        .map(|(c, &i)| (0..c.len()).map(|k| (k, c.prob(i, k))).collect())
        .collect();
    let sensor_dists: Vec<Vec<(usize, f64)>> = sc
        .sensor_chains
        .iter()
        .zip(&state.sensor_channels)
        .map(|(c, &i)| (0..c.len()).map(|k| (k, c.prob(i, k))).collect())
        .collect();

    let mut out = Vec::new();
    for (arr, pa) in product(&arrival_dists) {
        let queues: Vec<u32> = after_service
            .iter()
            .zip(&arr)
            .map(|(&q, &x)| {
                let raw = q + x as u64;
                match sc.queue_cap {
                    Some(cap) => raw.min(cap as u64) as u32,
                    None => raw as u32,
                }
            })
            .collect();
        for (sta, ps) in product(&station_dists) {
            for (sen, pz) in product(&sensor_dists) {
                out.push((
                    SystemState {
                        queues: QueueMatrix(queues.clone()),
                        station_channels: sta.clone(),
                        sensor_channels: sen.clone(),
                    },
                    pa * ps * pz,
                ));
            }
        }
    }
    out
}

/// Finite-horizon expectimax by explicit successor enumeration.
pub struct Expectimax<'a> {
    pub sc: &'a Scenario,
    pub actions: Vec<Vec<bool>>,
    pub kind: PolicyKind,
    pub weights: RewardWeights,
    pub discount: f64,
    memo: HashMap<(usize, SystemState), f64>,
}

impl<'a> Expectimax<'a> {
    pub fn new(
        sc: &'a Scenario,
        actions: Vec<Vec<bool>>,
        kind: PolicyKind,
        weights: RewardWeights,
        discount: f64,
    ) -> Self {
        Self {
            sc,
            actions,
            kind,
            weights,
            discount,
            memo: HashMap::new(),
        }
    }

    /// Expected reward of action `a` with `steps` slots to go.
    pub fn q_value(&mut self, state: &SystemState, a: usize, steps: usize) -> f64 {
        let active = self.actions[a].clone();
        let mut total = 0.0;
        for (chosen, pc) in choice_combinations(self.kind, self.sc, state, &active) {
            let zero = vec![0u32; state.queues.0.len()];
            let slot = reference_step(self.sc, state, &active, &chosen, &zero);
            let r = self.weights.data * slot.transmitted.iter().map(|&t| t as f64).sum::<f64>()
                + self.weights.energy * slot.sensor_energy.iter().sum::<f64>();
            let mut future = 0.0;
            if steps > 1 {
                let after: Vec<u64> = slot.next_queues.iter().map(|&q| q as u64).collect();
                for (next, p) in successors(self.sc, state, &after) {
                    future += p * self.value(&next, steps - 1);
                }
            }
            total += pc * (r + self.discount * future);
        }
        total
    }

    pub fn value(&mut self, state: &SystemState, steps: usize) -> f64 {
        if steps == 0 {
            return 0.0;
        }
        let key = (steps, state.clone());
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let v = (0..self.actions.len())
            .map(|a| self.q_value(state, a, steps))
            .fold(f64::NEG_INFINITY, f64::max);
        self.memo.insert(key, v);
        v
    }
}

/// Best total discounted reward over every fixed action sequence on a model
/// with no randomness (point-mass arrivals, identity channel moves,
/// deterministic policy).
pub fn best_open_loop(
    sc: &Scenario,
    actions: &[Vec<bool>],
    kind: PolicyKind,
    weights: RewardWeights,
    discount: f64,
    start: &SystemState,
    steps: usize,
) -> f64 {
    let arrivals: Vec<u32> = sc
        .arrivals
        .laws()
        .iter()
        .map(|l| l.pmf().iter().position(|&p| p == 1.0).expect("point mass") as u32)
        .collect();
    let sequences = actions.len().pow(steps as u32);
    let mut best = f64::NEG_INFINITY;
    for mut code in 0..sequences {
        let mut state = start.clone();
        let mut total = 0.0;
        let mut factor = 1.0;
        for _ in 0..steps {
            let a = code % actions.len();
            code /= actions.len();
            let chosen: Vec<Option<usize>> = actions[a]
                .iter()
                .enumerate()
                .map(|(ap, &on)| {
                    on.then(|| {
                        let d = reference_choice(kind, sc, &state, ap);
                        assert_eq!(d.len(), 1);
                        d[0].0
                    })
                })
                .collect();
            let slot = reference_step(sc, &state, &actions[a], &chosen, &arrivals);
            total += factor
                * (weights.data * slot.transmitted.iter().map(|&t| t as f64).sum::<f64>()
                    + weights.energy * slot.sensor_energy.iter().sum::<f64>());
            factor *= discount;
            state.queues = QueueMatrix(slot.next_queues);
        }
        best = best.max(total);
    }
    best
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// Two mutually interfering APs, one station each, one sensor on the first.
/// Non-uniform channel rows and different arrival laws per queue.
pub fn two_ap_scenario(q_max: u32) -> Scenario {
    let topo =
        Topology::from_counts(ConflictGraph::complete(2).unwrap(), &[1, 1], &[1, 0]).unwrap();
    let fast = ChannelChain::new(vec![1.0, 2.5], vec![vec![0.7, 0.3], vec![0.4, 0.6]]).unwrap();
    let slow = ChannelChain::new(vec![1.0, 3.0], vec![vec![0.9, 0.1], vec![0.5, 0.5]]).unwrap();
    let sensor = ChannelChain::new(vec![20.0, 80.0], vec![vec![0.6, 0.4], vec![0.2, 0.8]]).unwrap();
    Scenario::new(
        topo,
        vec![fast, slow],
        vec![sensor],
        ArrivalProcess::new(vec![
            ArrivalLaw::bernoulli(0.4, 1).unwrap(),
            ArrivalLaw::from_pmf(vec![0.5, 0.3, 0.2]).unwrap(),
        ]),
        Some(q_max),
        false,
    )
    .unwrap()
}

/// Path graph of three APs; the middle AP has two stations and the only
/// sensor.
pub fn path_scenario(q_max: u32, slot_fill: bool) -> Scenario {
    let topo =
        Topology::from_counts(ConflictGraph::path(3).unwrap(), &[1, 2, 1], &[0, 1, 0]).unwrap();
    let chain = ChannelChain::new(vec![1.0, 2.0], vec![vec![0.8, 0.2], vec![0.3, 0.7]]).unwrap();
    let sensor = ChannelChain::uniform(vec![50.0, 100.0]).unwrap();
    Scenario::new(
        topo,
        vec![chain; 4],
        vec![sensor],
        ArrivalProcess::identical(4, ArrivalLaw::bernoulli(0.5, 1).unwrap()),
        Some(q_max),
        slot_fill,
    )
    .unwrap()
}

/// A scenario with no randomness: single-state channels, fixed arrivals.
pub fn deterministic_scenario(arrivals: &[u32], q_max: u32) -> Scenario {
    let topo =
        Topology::from_counts(ConflictGraph::complete(2).unwrap(), &[2, 1], &[1, 1]).unwrap();
    let rates = [2.0, 1.0, 3.0];
    let station_chains = rates
        .iter()
        .map(|&r| ChannelChain::uniform(vec![r]).unwrap())
        .collect();
    let sensor_chains = vec![
        ChannelChain::uniform(vec![40.0]).unwrap(),
        ChannelChain::uniform(vec![90.0]).unwrap(),
    ];
    let laws = arrivals
        .iter()
        .map(|&k| {
            let mut pmf = vec![0.0; k as usize + 1];
            pmf[k as usize] = 1.0;
            ArrivalLaw::from_pmf(pmf).unwrap()
        })
        .collect();
    Scenario::new(
        topo,
        station_chains,
        sensor_chains,
        ArrivalProcess::new(laws),
        Some(q_max),
        false,
    )
    .unwrap()
}

/// Random topology with `1..=max_aps` APs, random edges, 1 to 3 stations and
/// 0 to 2 sensors per AP, random chains and arrival laws.
pub fn random_scenario<R: Rng>(rng: &mut R, max_aps: usize, cap: Option<u32>) -> Scenario {
    let n = rng.gen_range(1..=max_aps);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(0.5) {
                edges.push((a, b));
            }
        }
    }
    let graph = ConflictGraph::new(n, edges).unwrap();
    let stations: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=3)).collect();
    let sensors: Vec<usize> = (0..n).map(|_| rng.gen_range(0..=2)).collect();
    let topo = Topology::from_counts(graph, &stations, &sensors).unwrap();
    let chain = |lo: f64, hi: f64, rng: &mut R| {
        let k = rng.gen_range(1..=4);
        let values = (0..k).map(|_| rng.gen_range(lo..hi)).collect();
        let rows = (0..k)
            .map(|_| {
                let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.01..1.0)).collect();
                let s: f64 = raw.iter().sum();
                let mut row: Vec<f64> = raw.iter().map(|x| x / s).collect();
                let head: f64 = row[..k - 1].iter().sum();
                row[k - 1] = 1.0 - head;
                row
            })
            .collect();
        ChannelChain::new(values, rows).unwrap()
    };
    let ns = topo.n_stations();
    let nz = topo.n_sensors();
    let station_chains = (0..ns).map(|_| chain(0.0, 6.0, rng)).collect();
    let sensor_chains = (0..nz).map(|_| chain(1.0, 100.0, rng)).collect();
    let laws = (0..ns)
        .map(|_| ArrivalLaw::bernoulli(rng.gen_range(0.0..=1.0), rng.gen_range(1..=3)).unwrap())
        .collect();
    let slot_fill = rng.gen_bool(0.3);
    Scenario::new(
        topo,
        station_chains,
        sensor_chains,
        ArrivalProcess::new(laws),
        cap,
        slot_fill,
    )
    .unwrap()
}

/// A uniformly random state of `sc` with queues up to `q_hi`.
pub fn random_state<R: Rng>(rng: &mut R, sc: &Scenario, q_hi: u32) -> SystemState {
    SystemState {
        queues: QueueMatrix(
            (0..sc.topology.n_stations())
                .map(|_| rng.gen_range(0..=q_hi))
                .collect(),
        ),
        station_channels: sc.station_chains.iter().map(|c| rng.gen_range(0..c.len())).collect(),
        sensor_channels: sc.sensor_chains.iter().map(|c| rng.gen_range(0..c.len())).collect(),
    }
}

/// Independent maximality-checked set list by brute force over bitmasks.
pub fn brute_force_maximal_sets(graph: &ConflictGraph) -> Vec<Vec<bool>> {
    let n = graph.n_aps();
    let independent = |mask: u32| {
        graph
            .edges()
            .iter()
            .all(|&(a, b)| mask & (1 << a.0) == 0 || mask & (1 << b.0) == 0)
    };
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if !independent(mask) {
            continue;
        }
        let maximal = (0..n).all(|k| mask & (1 << k) != 0 || !independent(mask | (1 << k)));
        if maximal {
            out.push((0..n).map(|k| mask & (1 << k) != 0).collect());
        }
    }
    out
}
