use super::config::ExperimentConfig;
use super::output::{format_sig, CsvRow};
use crate::dynamics::{step_slot, total_queue};
use crate::error::Result;
use crate::mdp::ApproxSolver;
use crate::policies::{select_all, PolicyKind};
use crate::stochastics::{sample_arrivals, RunStreams};

/// Knobs a sweep varies between runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunParams {
    pub arrival_p: f64,
    pub edge_prob: f64,
}

impl RunParams {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self {
            arrival_p: cfg.arrivals.p,
            edge_prob: cfg.topology.edge_prob,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotRecord {
    /// Mean over APs of the total queue length after the slot.
    pub mean_queue: f64,
    pub energy: f64,
    pub transmitted: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub policy: PolicyKind,
    pub seed: u64,
    pub slots: usize,
    /// Time average of the per-AP total queue, averaged over APs.
    pub mean_queue: f64,
    /// Energy delivered to all sensors over the run, µJ.
    pub total_energy: f64,
    pub sensor_energy: Vec<f64>,
    pub transmitted: u64,
    pub dropped: u64,
    pub per_slot: Vec<SlotRecord>,
}

impl CsvRow for RunMetrics {
    fn header() -> &'static [&'static str] {
        &[
            "policy",
            "seed",
            "slots",
            "mean_queue",
            "total_energy_uJ",
            "transmitted",
            "dropped",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.policy.to_string(),
            self.seed.to_string(),
            self.slots.to_string(),
            format_sig(self.mean_queue),
            format_sig(self.total_energy),
            self.transmitted.to_string(),
            self.dropped.to_string(),
        ]
    }
}

pub fn run_simulation(cfg: &ExperimentConfig, policy: PolicyKind, seed: u64) -> Result<RunMetrics> {
    run_simulation_with(cfg, RunParams::from_config(cfg), policy, seed)
}

/// Simulates `cfg.mdp.horizon` slots on a topology drawn from `seed`.
///
/// Each slot the receding-horizon planner picks a transmission set, active
/// APs pick stations by `policy`, arrivals join the queues and every link
/// moves along its chain. Topology, channel and arrival draws use separate
/// streams, so two policies run with the same seed face identical exogenous
/// randomness.
pub fn run_simulation_with(
    cfg: &ExperimentConfig,
    params: RunParams,
    policy: PolicyKind,
    seed: u64,
) -> Result<RunMetrics> {
    let mut streams = RunStreams::from_seed(seed);
    let topology = cfg.topology(params.edge_prob, &mut streams.topology)?;
    let actions = cfg.actions(&topology)?;
    let sc = cfg.scenario(topology, params.arrival_p)?;
    let mdp = cfg.mdp_config()?;
    let mut solver = ApproxSolver::new(&sc, &actions, &mdp, policy)?;

    let n_aps = sc.topology.n_aps();
    let slots = mdp.horizon;
    let mut state = sc.initial_state(&mut streams.channels);
    let mut metrics = RunMetrics {
        policy,
        seed,
        slots,
        mean_queue: 0.0,
        total_energy: 0.0,
        sensor_energy: vec![0.0; sc.topology.n_sensors()],
        transmitted: 0,
        dropped: 0,
        per_slot: Vec::with_capacity(slots),
    };
    let mut queue_sum = 0.0;

    for t in 0..slots {
        let a = if actions.len() == 1 {
            0
        } else {
            solver.reset();
            solver.evaluate(&state, slots - t, &mut streams.planner)?.1
        };
        let set = actions.get(a);
        let selections = select_all(policy, set, &state, &sc, &mut streams.selection)?;
        let arrivals = sample_arrivals(&sc.arrivals, &mut streams.arrivals);
        let result = step_slot(&sc, &state, set, &selections, &arrivals)?;

        state.queues = result.next_queues;
        sc.step_channels(&mut state, &mut streams.channels);

        let mean_queue = sc
            .topology
            .aps()
            .map(|ap| total_queue(&sc.topology, &state.queues, ap) as f64)
            .sum::<f64>()
            / n_aps as f64;
        queue_sum += mean_queue;
        metrics.total_energy += result.energy;
        for (acc, e) in metrics.sensor_energy.iter_mut().zip(&result.sensor_energy) {
            *acc += e;
        }
        metrics.transmitted += result.total_transmitted;
        metrics.dropped += result.dropped;
        metrics.per_slot.push(SlotRecord {
            mean_queue,
            energy: result.energy,
            transmitted: result.total_transmitted,
        });
    }
    if slots > 0 {
        metrics.mean_queue = queue_sum / slots as f64;
    }
    Ok(metrics)
}
