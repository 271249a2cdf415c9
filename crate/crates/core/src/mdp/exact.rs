//! Backward induction over the enumerated state space.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use super::space::{LinkRef, StateSpace};
use super::MdpConfig;
use crate::dynamics::{ServicePlan, SystemState};
use crate::error::{Error, Result};
use crate::policies::PolicyKind;
use crate::scenario::Scenario;
use crate::topology::TransmissionSetMatrix;

const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Stage-indexed values and maximizing actions.
///
/// Stages run `0..horizon`; `values[horizon]` is the all-zero terminal stage.
#[derive(Debug, Clone)]
pub struct ValueTable {
    horizon: usize,
    values: Vec<Vec<f64>>,
    actions: Vec<Vec<u32>>,
}

impl ValueTable {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    #[inline]
    pub fn value(&self, stage: usize, state: usize) -> f64 {
        self.values[stage][state]
    }

    #[inline]
    pub fn best_action(&self, stage: usize, state: usize) -> usize {
        self.actions[stage][state] as usize
    }

    pub fn stage_values(&self, stage: usize) -> &[f64] {
        &self.values[stage]
    }

    /// Value of a `k`-slot problem, `k <= horizon`. Dynamics and rewards do
    /// not depend on the slot index, so this is stage `horizon - k`.
    pub fn values_to_go(&self, k: usize) -> &[f64] {
        &self.values[self.horizon - k]
    }

    /// Writes `stage,state_index,value,action_index` rows for every decision
    /// stage.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "stage,state_index,value,action_index")?;
        for (t, (vals, acts)) in self.values.iter().zip(&self.actions).enumerate() {
            for (i, (v, a)) in vals.iter().zip(acts).enumerate() {
                writeln!(w, "{t},{i},{},{a}", crate::harness::format_sig(*v))?;
            }
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }
}

/// Exact finite-horizon value iteration.
///
/// For every stage and state, each action is scored as its immediate reward
/// plus the discounted expectation of the next stage's value. Station choice
/// follows `kind`; for the random policy the expectation also runs over the
/// uniform station choice of every active AP. Channel links and arrivals are
/// independent, so the expectation is taken one dimension at a time.
pub fn exact_value_iteration(
    sc: &Scenario,
    space: &StateSpace,
    actions: &TransmissionSetMatrix,
    cfg: &MdpConfig,
    kind: PolicyKind,
) -> Result<ValueTable> {
    cfg.validate_solver()?;
    let n = space.len();
    let horizon = cfg.horizon;
    let mut values = vec![vec![0.0; n]; horizon + 1];
    let mut best = vec![Vec::new(); horizon];

    for t in (0..horizon).rev() {
        let next = channel_expectation(sc, space, &values[t + 1]);
        let stage: Vec<(f64, u32)> = (0..n)
            .into_par_iter()
            .map(|idx| backup(sc, space, actions, cfg, kind, &next, idx))
            .collect::<Result<_>>()?;
        let (v, a): (Vec<f64>, Vec<u32>) = stage.into_iter().unzip();
        values[t] = v;
        best[t] = a;
    }

    Ok(ValueTable {
        horizon,
        values,
        actions: best,
    })
}

/// Averages `values` over the next channel state of every link.
///
/// The result is laid out channel-major: entry `c * queue_states + q` holds
/// `sum_{c'} P(c' | c) * values[q, c']`.
fn channel_expectation(sc: &Scenario, space: &StateSpace, values: &[f64]) -> Vec<f64> {
    let nc = space.channel_states();
    let nq = space.queue_states();
    let dims = space.link_dims();
    let mut out = vec![0.0; values.len()];
    let mut cur = vec![0.0; nc];
    let mut tmp = vec![0.0; nc];
    for q in 0..nq {
        cur.copy_from_slice(&values[q * nc..(q + 1) * nc]);
        for &(radix, stride, link) in &dims {
            let chain = match link {
                LinkRef::Station(s) => &sc.station_chains[s.0],
                LinkRef::Sensor(z) => &sc.sensor_chains[z.0],
            };
            for (i, slot) in tmp.iter_mut().enumerate() {
                let c = (i / stride) % radix;
                let base = i - c * stride;
                *slot = chain
                    .row(c)
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(c2, &p)| p * cur[base + c2 * stride])
                    .sum();
            }
            std::mem::swap(&mut cur, &mut tmp);
        }
        for (c, v) in cur.iter().enumerate() {
            out[c * nq + q] = *v;
        }
    }
    out
}

fn backup(
    sc: &Scenario,
    space: &StateSpace,
    actions: &TransmissionSetMatrix,
    cfg: &MdpConfig,
    kind: PolicyKind,
    next: &[f64],
    idx: usize,
) -> Result<(f64, u32)> {
    let state = space.state(idx);
    let nq = space.queue_states();
    let c = idx % space.channel_states();
    let future = &next[c * nq..(c + 1) * nq];

    let mut best = (f64::NEG_INFINITY, 0u32);
    for (a, action) in actions.iter().enumerate() {
        let plan = ServicePlan::for_action(sc, &state, action, kind)?;
        let mut q_value = 0.0;
        for (combo, p) in plan.combinations() {
            let mut departures = vec![0u32; state.queues.0.len()];
            let mut immediate = 0.0;
            for o in &combo {
                departures[o.station.0] = o.packets;
                immediate += cfg.weights.data * o.packets as f64 + cfg.weights.energy * o.energy;
            }
            let expected = if cfg.discount == 0.0 {
                0.0
            } else {
                queue_expectation(sc, space, &state, &departures, future)?
            };
            q_value += p * (immediate + cfg.discount * expected);
        }
        if q_value > best.0 {
            best = (q_value, a as u32);
        }
    }
    Ok(best)
}

/// `sum_{q'} prod_i P_i(q'_i) * future[q']` with `P_i` the distribution of
/// queue `i` after departures and arrivals.
fn queue_expectation(
    sc: &Scenario,
    space: &StateSpace,
    state: &SystemState,
    departures: &[u32],
    future: &[f64],
) -> Result<f64> {
    let radix = space.queue_cap() as usize + 1;
    let cap = space.queue_cap();
    let mut buf = future.to_vec();
    let mut dist = vec![0.0; radix];
    // contract the least significant queue first
    for &s in space.station_order().iter().rev() {
        dist.iter_mut().for_each(|p| *p = 0.0);
        let base = state.queues.get(s) - departures[s.0];
        for (a, pa) in sc.arrivals.law(s.0).support() {
            dist[(base + a).min(cap) as usize] += pa;
        }
        let total: f64 = dist.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized(total));
        }
        let len = buf.len() / radix;
        for j in 0..len {
            buf[j] = dist
                .iter()
                .enumerate()
                .map(|(k, p)| p * buf[j * radix + k])
                .sum();
        }
        buf.truncate(len);
    }
    debug_assert_eq!(buf.len(), 1);
    Ok(buf[0])
}
