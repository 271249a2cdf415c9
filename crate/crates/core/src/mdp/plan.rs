use super::approx::ApproxSolver;
use super::exact::ValueTable;
use super::space::StateSpace;
use super::MdpConfig;
use crate::dynamics::{reward, step_slot, SystemState};
use crate::error::{Error, Result};
use crate::policies::{select_all, PolicyKind};
use crate::scenario::Scenario;
use crate::stochastics::{sample_arrivals, RunStreams};
use crate::topology::{TransmissionSet, TransmissionSetMatrix};

pub enum PlanMode<'a> {
    /// Follow the stored argmax of an exact value table.
    Exact {
        table: &'a ValueTable,
        space: &'a StateSpace,
    },
    /// Re-solve the sampled lookahead at every realized state.
    Approximate,
}

/// A realized schedule and the trajectory it produced.
#[derive(Debug, Clone)]
pub struct Schedule {
    pub actions: Vec<usize>,
    pub sets: Vec<TransmissionSet>,
    /// State at the start of every slot.
    pub states: Vec<SystemState>,
    pub rewards: Vec<f64>,
    pub total_reward: f64,
}

/// Forward pass over `cfg.horizon` slots from `start`.
///
/// Actions come from `mode`; station selection, arrivals and channel moves
/// draw from their own streams in `streams`.
pub fn plan_schedule(
    sc: &Scenario,
    actions: &TransmissionSetMatrix,
    start: &SystemState,
    cfg: &MdpConfig,
    kind: PolicyKind,
    mode: PlanMode<'_>,
    streams: &mut RunStreams,
) -> Result<Schedule> {
    if let PlanMode::Exact { table, .. } = &mode {
        if table.horizon() != cfg.horizon {
            return Err(Error::InvalidConfig(format!(
                "value table horizon {} does not match {}",
                table.horizon(),
                cfg.horizon
            )));
        }
    }
    let mut solver = match mode {
        PlanMode::Approximate => Some(ApproxSolver::new(sc, actions, cfg, kind)?),
        PlanMode::Exact { .. } => None,
    };

    let mut schedule = Schedule {
        actions: Vec::with_capacity(cfg.horizon),
        sets: Vec::with_capacity(cfg.horizon),
        states: Vec::with_capacity(cfg.horizon),
        rewards: Vec::with_capacity(cfg.horizon),
        total_reward: 0.0,
    };
    let mut state = start.clone();
    for t in 0..cfg.horizon {
        let a = match (&mode, solver.as_mut()) {
            (PlanMode::Exact { table, space }, _) => table.best_action(t, space.index(&state)),
            (PlanMode::Approximate, Some(solver)) => {
                solver.reset();
                solver.evaluate(&state, cfg.horizon - t, &mut streams.planner)?.1
            }
            (PlanMode::Approximate, None) => unreachable!(),
        };
        let set = actions.get(a);
        let selections = select_all(kind, set, &state, sc, &mut streams.selection)?;
        let arrivals = sample_arrivals(&sc.arrivals, &mut streams.arrivals);
        let result = step_slot(sc, &state, set, &selections, &arrivals)?;
        let r = reward(&result, &cfg.weights);

        schedule.actions.push(a);
        schedule.sets.push(set.clone());
        schedule.states.push(state.clone());
        schedule.rewards.push(r);
        schedule.total_reward += r;

        state.queues = result.next_queues;
        sc.step_channels(&mut state, &mut streams.channels);
    }
    Ok(schedule)
}
