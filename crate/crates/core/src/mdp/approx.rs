//! Sampled Bellman recursion truncated at a lookahead depth.

use std::collections::HashMap;

use rand::RngCore;

use super::space::StateSpace;
use super::MdpConfig;
use crate::dynamics::{ServicePlan, SystemState};
use crate::error::{Error, Result};
use crate::policies::PolicyKind;
use crate::scenario::Scenario;
use crate::stochastics::ExogenousDraw;
use crate::topology::TransmissionSetMatrix;

/// Largest state space for which the solver memoizes in dense arrays.
pub const DENSE_MEMO_MAX_STATES: usize = 2_000_000;
/// Ceiling on sampled outcomes for a lookahead without dense memoization.
pub const SPARSE_OUTCOME_CAP: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemoKind {
    /// Dense per-depth arrays over an enumerated state space.
    Dense,
    /// Hash map keyed by depth and state.
    Sparse,
}

enum Memo {
    Dense {
        space: StateSpace,
        levels: Vec<Vec<f64>>,
    },
    Sparse(HashMap<(usize, SystemState), f64>),
}

/// Approximate value estimator.
///
/// At a node with `d >= 2` steps to go, every action is scored as its
/// expected immediate reward plus the discounted mean value of `N` successors
/// drawn by simulating one slot. Nodes with one step to go take the best
/// immediate reward; depth zero is worth nothing. Each `(depth, state)` node
/// is estimated once and reused, which bounds the work by the number of
/// distinct nodes rather than `(actions * N)^d`.
pub struct ApproxSolver<'a> {
    sc: &'a Scenario,
    actions: &'a TransmissionSetMatrix,
    cfg: &'a MdpConfig,
    kind: PolicyKind,
    memo: Memo,
    draw: ExogenousDraw,
    departures: Vec<u32>,
}

impl<'a> ApproxSolver<'a> {
    /// Picks dense memoization when queues are capped and the state space is
    /// small enough, a hash map otherwise.
    pub fn new(
        sc: &'a Scenario,
        actions: &'a TransmissionSetMatrix,
        cfg: &'a MdpConfig,
        kind: PolicyKind,
    ) -> Result<Self> {
        let dense = sc.queue_cap.is_some()
            && StateSpace::new(sc, DENSE_MEMO_MAX_STATES).is_ok()
            && cfg.depth >= 2;
        let memo = if dense { MemoKind::Dense } else { MemoKind::Sparse };
        Self::with_memo(sc, actions, cfg, kind, memo)
    }

    pub fn with_memo(
        sc: &'a Scenario,
        actions: &'a TransmissionSetMatrix,
        cfg: &'a MdpConfig,
        kind: PolicyKind,
        memo: MemoKind,
    ) -> Result<Self> {
        cfg.validate_solver()?;
        if actions.is_empty() {
            return Err(Error::InvalidConfig("empty action matrix".into()));
        }
        let memo = match memo {
            MemoKind::Dense => {
                let space = StateSpace::new(sc, DENSE_MEMO_MAX_STATES)?;
                let levels = vec![Vec::new(); cfg.depth];
                Memo::Dense { space, levels }
            }
            MemoKind::Sparse => {
                let cost = ((actions.len() * cfg.samples) as f64).powi(cfg.depth as i32 - 1);
                if cost > SPARSE_OUTCOME_CAP {
                    return Err(Error::DepthCapExceeded {
                        depth: cfg.depth,
                        cost,
                        cap: SPARSE_OUTCOME_CAP,
                    });
                }
                Memo::Sparse(HashMap::new())
            }
        };
        Ok(Self {
            sc,
            actions,
            cfg,
            kind,
            memo,
            draw: ExogenousDraw::new(sc),
            departures: vec![0; sc.topology.n_stations()],
        })
    }

    /// Forgets every memoized estimate.
    pub fn reset(&mut self) {
        match &mut self.memo {
            Memo::Dense { levels, .. } => levels.iter_mut().for_each(Vec::clear),
            Memo::Sparse(map) => map.clear(),
        }
    }

    /// Estimated value and best action index with `steps` slots to go,
    /// truncated at the configured depth.
    pub fn evaluate<R: RngCore + ?Sized>(
        &mut self,
        state: &SystemState,
        steps: usize,
        rng: &mut R,
    ) -> Result<(f64, usize)> {
        let depth = steps.min(self.cfg.depth);
        if depth == 0 {
            return Ok((0.0, 0));
        }
        self.best(state, depth, rng)
    }

    fn best<R: RngCore + ?Sized>(
        &mut self,
        state: &SystemState,
        depth: usize,
        rng: &mut R,
    ) -> Result<(f64, usize)> {
        let mut best = (f64::NEG_INFINITY, 0);
        for a in 0..self.actions.len() {
            let q = self.q_value(state, a, depth, rng)?;
            if q > best.0 {
                best = (q, a);
            }
        }
        Ok(best)
    }

    fn q_value<R: RngCore + ?Sized>(
        &mut self,
        state: &SystemState,
        a: usize,
        depth: usize,
        rng: &mut R,
    ) -> Result<f64> {
        let action = self.actions.get(a);
        let plan = ServicePlan::for_action(self.sc, state, action, self.kind)?;
        let immediate = plan.expected_reward(&self.cfg.weights);
        if depth == 1 || self.cfg.discount == 0.0 {
            return Ok(immediate);
        }
        let n = self.cfg.samples;
        let mut total = 0.0;
        for _ in 0..n {
            self.draw.draw(self.sc, state, action, self.kind, rng);
            plan.departures_into(&self.draw.picks, &mut self.departures);
            total += self.child_value(state, depth - 1, rng)?;
        }
        Ok(immediate + self.cfg.discount * total / n as f64)
    }

    /// Value of the successor described by `self.draw` and `self.departures`.
    fn child_value<R: RngCore + ?Sized>(
        &mut self,
        parent: &SystemState,
        depth: usize,
        rng: &mut R,
    ) -> Result<f64> {
        match &mut self.memo {
            Memo::Dense { space, levels } => {
                let cap = space.queue_cap();
                let mut idx = space
                    .channel_index(&self.draw.station_channels, &self.draw.sensor_channels);
                for (s, (&q, &d)) in parent.queues.0.iter().zip(&self.departures).enumerate() {
                    let next = (q - d + self.draw.arrivals[s]).min(cap);
                    idx += next as usize * space.queue_stride(crate::topology::StationId(s));
                }
                let level = &mut levels[depth];
                if level.is_empty() {
                    level.resize(space.len(), f64::NAN);
                }
                let cached = level[idx];
                if !cached.is_nan() {
                    return Ok(cached);
                }
                let child = space.state(idx);
                let (v, _) = self.best(&child, depth, rng)?;
                if let Memo::Dense { levels, .. } = &mut self.memo {
                    levels[depth][idx] = v;
                }
                Ok(v)
            }
            Memo::Sparse(map) => {
                let child = self.sc.successor(parent, &self.departures, &self.draw);
                if let Some(&v) = map.get(&(depth, child.clone())) {
                    return Ok(v);
                }
                let (v, _) = self.best(&child, depth, rng)?;
                if let Memo::Sparse(map) = &mut self.memo {
                    map.insert((depth, child), v);
                }
                Ok(v)
            }
        }
    }
}

/// Approximate value and best action at stage `t` of a `cfg.horizon`-slot
/// problem, with lookahead `min(cfg.depth, horizon - t)`.
pub fn approx_value<R: RngCore + ?Sized>(
    sc: &Scenario,
    actions: &TransmissionSetMatrix,
    state: &SystemState,
    t: usize,
    cfg: &MdpConfig,
    kind: PolicyKind,
    rng: &mut R,
) -> Result<(f64, usize)> {
    if t > cfg.horizon {
        return Err(Error::InvalidConfig(format!(
            "stage {t} beyond horizon {}",
            cfg.horizon
        )));
    }
    let mut solver = ApproxSolver::new(sc, actions, cfg, kind)?;
    solver.evaluate(state, cfg.horizon - t, rng)
}
