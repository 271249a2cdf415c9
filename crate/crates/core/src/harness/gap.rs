use rand::SeedableRng;
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use super::output::{format_sig, CsvRow};
use super::{mean_std, median};
use crate::error::{Error, Result};
use crate::mdp::{
    compute_gap, exact_value_iteration, initial_expectation, ApproxSolver, MdpConfig, StateSpace,
};
use crate::policies::PolicyKind;
use crate::scenario::Scenario;
use crate::stochastics::{derive_seed, RunStreams};
use crate::topology::TransmissionSetMatrix;

/// Exact versus sampled expected reward for one horizon and policy.
#[derive(Debug, Clone, PartialEq)]
pub struct GapRow {
    pub horizon: usize,
    pub policy: PolicyKind,
    /// Expected reward under the cold-start distribution, exact recursion.
    pub exact_value: f64,
    /// Mean over seeds of the sampled estimate.
    pub approx_value: f64,
    /// Median gap over seeds, percent; `None` when the exact value is not
    /// positive.
    pub gap_pct: Option<f64>,
    pub gap_mean: Option<f64>,
    pub gap_std: Option<f64>,
    /// Gap of every seed, percent.
    pub gaps: Vec<f64>,
    pub seeds: usize,
}

impl CsvRow for GapRow {
    fn header() -> &'static [&'static str] {
        &[
            "horizon",
            "policy",
            "exact_value",
            "approx_value",
            "gap_pct",
            "seeds",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.horizon.to_string(),
            self.policy.to_string(),
            format_sig(self.exact_value),
            format_sig(self.approx_value),
            self.gap_pct.map_or_else(|| "NA".to_string(), format_sig),
            self.seeds.to_string(),
        ]
    }
}

/// Gap study on the configured scenario, which must have capped queues.
pub fn run_gap_study(cfg: &ExperimentConfig, horizons: &[usize]) -> Result<Vec<GapRow>> {
    cfg.validate()?;
    if cfg.mdp.q_max.is_none() {
        return Err(Error::InvalidConfig(
            "the gap study needs a finite mdp.q_max".into(),
        ));
    }
    let mut streams = RunStreams::from_seed(cfg.experiment.seed);
    let topology = cfg.topology(cfg.topology.edge_prob, &mut streams.topology)?;
    let actions = cfg.actions(&topology)?;
    let sc = cfg.scenario(topology, cfg.arrivals.p)?;
    let base = cfg.mdp_config()?;
    run_gap_study_on(
        &sc,
        &actions,
        &base,
        &cfg.experiment.policies,
        horizons,
        cfg.experiment.gap_seeds,
        cfg.experiment.seed,
        cfg.mdp.state_cap,
    )
}

/// For every policy: one exact table up to the longest horizon, then per seed
/// a sampled solver evaluated from every cold-start state at each horizon.
/// Seed `s` drives the same random stream for every policy.
#[allow(clippy::too_many_arguments)]
pub fn run_gap_study_on(
    sc: &Scenario,
    actions: &TransmissionSetMatrix,
    base: &MdpConfig,
    policies: &[PolicyKind],
    horizons: &[usize],
    seeds: usize,
    base_seed: u64,
    state_cap: usize,
) -> Result<Vec<GapRow>> {
    let max_h = *horizons
        .iter()
        .max()
        .ok_or_else(|| Error::InvalidConfig("no horizons given".into()))?;
    if horizons.contains(&0) {
        return Err(Error::InvalidConfig("horizons must be at least 1".into()));
    }
    let space = StateSpace::new(sc, state_cap)?;
    let starts = sc.initial_states();
    let cfg = MdpConfig {
        horizon: max_h,
        depth: max_h,
        ..*base
    };

    let mut rows = Vec::new();
    for &policy in policies {
        let table = exact_value_iteration(sc, &space, actions, &cfg, policy)?;
        let exact: Vec<f64> = horizons
            .iter()
            .map(|&h| initial_expectation(sc, &space, table.values_to_go(h)))
            .collect();

        // per_seed[s][k]: estimate of seed s at horizons[k]
        let per_seed = (0..seeds)
            .into_par_iter()
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(base_seed, s as u64));
                let mut solver = ApproxSolver::new(sc, actions, &cfg, policy)?;
                horizons
                    .iter()
                    .map(|&h| {
                        let mut total = 0.0;
                        for y0 in &starts {
                            total += solver.evaluate(y0, h, &mut rng)?.0;
                        }
                        Ok(total / starts.len() as f64)
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let approx: Vec<Vec<f64>> = (0..horizons.len())
            .map(|k| per_seed.iter().map(|row| row[k]).collect())
            .collect();

        for (k, &h) in horizons.iter().enumerate() {
            let gaps: Vec<f64> = approx[k]
                .iter()
                .filter_map(|&a| compute_gap(exact[k], a))
                .collect();
            let (gap_mean, gap_std) = if gaps.is_empty() {
                (None, None)
            } else {
                let (m, s) = mean_std(&gaps);
                (Some(m), Some(s))
            };
            rows.push(GapRow {
                horizon: h,
                policy,
                exact_value: exact[k],
                approx_value: mean_std(&approx[k]).0,
                gap_pct: median(&gaps),
                gap_mean,
                gap_std,
                gaps,
                seeds,
            });
        }
    }
    rows.sort_by_key(|r| {
        (
            r.horizon,
            policies.iter().position(|&p| p == r.policy).unwrap_or(usize::MAX),
        )
    });
    Ok(rows)
}
