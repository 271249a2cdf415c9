use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::mean_std;
use super::output::{format_sig, CsvRow};
use super::sim::{run_simulation_with, RunParams};
use crate::error::{Error, Result};
use crate::policies::PolicyKind;
use crate::stochastics::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Arrival probability per queue.
    Arrival,
    /// Conflict-edge probability.
    Interference,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Arrival => "arrival",
            SweepAxis::Interference => "interference",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "arrival" => Ok(SweepAxis::Arrival),
            "interference" => Ok(SweepAxis::Interference),
            other => Err(Error::InvalidConfig(format!(
                "unknown sweep axis `{other}` (expected arrival or interference)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub axis_value: f64,
    pub policy: PolicyKind,
    pub mean_queue: f64,
    pub std_queue: f64,
    pub mean_energy: f64,
    pub std_energy: f64,
    pub runs: usize,
}

impl CsvRow for SweepRow {
    fn header() -> &'static [&'static str] {
        &[
            "axis",
            "axis_value",
            "policy",
            "mean_queue",
            "std_queue",
            "mean_energy_uJ",
            "std_energy_uJ",
            "runs",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.axis.to_string(),
            format_sig(self.axis_value),
            self.policy.to_string(),
            format_sig(self.mean_queue),
            format_sig(self.std_queue),
            format_sig(self.mean_energy),
            format_sig(self.std_energy),
            self.runs.to_string(),
        ]
    }
}

/// Runs every (axis value, policy, run) combination and summarizes each
/// (axis value, policy) pair over its runs.
///
/// Run `i` uses the same seed for every axis value and policy, so policies are
/// compared on identical topologies and exogenous trajectories, and random
/// topologies are coupled across edge probabilities.
pub fn run_sweep(cfg: &ExperimentConfig, axis: SweepAxis) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let e = &cfg.experiment;
    let values = match axis {
        SweepAxis::Arrival => &e.arrival_sweep,
        SweepAxis::Interference => &e.edge_sweep,
    };
    let jobs: Vec<(usize, PolicyKind, usize)> = (0..values.len())
        .flat_map(|v| {
            e.policies
                .iter()
                .flat_map(move |&p| (0..e.runs).map(move |r| (v, p, r)))
        })
        .collect();

    let results = jobs
        .par_iter()
        .map(|&(v, policy, run)| {
            let params = match axis {
                SweepAxis::Arrival => RunParams {
                    arrival_p: values[v],
                    edge_prob: cfg.topology.edge_prob,
                },
                SweepAxis::Interference => RunParams {
                    arrival_p: e.fixed_load,
                    edge_prob: values[v],
                },
            };
            run_simulation_with(cfg, params, policy, derive_seed(e.seed, run as u64))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(results
        .chunks(e.runs)
        .zip(jobs.chunks(e.runs))
        .map(|(runs, job)| {
            let (v, policy, _) = job[0];
            let queues: Vec<f64> = runs.iter().map(|m| m.mean_queue).collect();
            let energies: Vec<f64> = runs.iter().map(|m| m.total_energy).collect();
            let (mean_queue, std_queue) = mean_std(&queues);
            let (mean_energy, std_energy) = mean_std(&energies);
            SweepRow {
                axis,
                axis_value: values[v],
                policy,
                mean_queue,
                std_queue,
                mean_energy,
                std_energy,
                runs: runs.len(),
            }
        })
        .collect())
}
