//! Finite-horizon MDP: state enumeration, exact and sampled value
//! iteration, schedule planning and the approximation gap.

mod approx;
mod exact;
mod plan;
mod space;

pub use approx::{approx_value, ApproxSolver, MemoKind, DENSE_MEMO_MAX_STATES, SPARSE_OUTCOME_CAP};
pub use exact::{exact_value_iteration, ValueTable};
pub use plan::{plan_schedule, PlanMode, Schedule};
pub use space::{enumerate_state_space, StateSpace, DEFAULT_STATE_CAP};

use crate::dynamics::RewardWeights;
use crate::error::{Error, Result};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdpConfig {
    /// Number of decision slots.
    pub horizon: usize,
    pub discount: f64,
    /// Sampled successors per node of the approximate recursion.
    pub samples: usize,
    /// Lookahead depth of the approximate recursion.
    pub depth: usize,
    pub weights: RewardWeights,
}

impl MdpConfig {
    pub fn new(
        horizon: usize,
        discount: f64,
        samples: usize,
        depth: usize,
        weights: RewardWeights,
    ) -> Result<Self> {
        let cfg = Self {
            horizon,
            discount,
            samples,
            depth,
            weights,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidConfig("horizon must be at least 1".into()));
        }
        if self.depth > self.horizon {
            return Err(Error::InvalidConfig(format!(
                "lookahead depth {} exceeds horizon {}",
                self.depth, self.horizon
            )));
        }
        self.validate_solver()
    }

    /// Checks shared by the solvers; a zero horizon is allowed there.
    pub(crate) fn validate_solver(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.discount) {
            return Err(Error::InvalidConfig(format!(
                "discount {} outside [0, 1]",
                self.discount
            )));
        }
        if self.samples == 0 {
            return Err(Error::InvalidConfig("sample count must be at least 1".into()));
        }
        if self.depth == 0 {
            return Err(Error::InvalidConfig("lookahead depth must be at least 1".into()));
        }
        self.weights.validate()
    }
}

impl Default for MdpConfig {
    fn default() -> Self {
        Self {
            horizon: 10_000,
            discount: 1.0,
            samples: 100,
            depth: 1,
            weights: RewardWeights::default(),
        }
    }
}

/// Percentage distance of `approx` from `exact`; `None` unless `exact > 0`.
pub fn compute_gap(exact: f64, approx: f64) -> Option<f64> {
    (exact > 0.0).then(|| (exact - approx).abs() / exact * 100.0)
}

/// Exact and approximate expected reward for one horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub horizon: usize,
    pub exact: f64,
    pub approx: f64,
    pub gap_pct: Option<f64>,
}

impl GapReport {
    pub fn new(horizon: usize, exact: f64, approx: f64) -> Self {
        Self {
            horizon,
            exact,
            approx,
            gap_pct: compute_gap(exact, approx),
        }
    }
}

/// Mean of `values` over the cold-start distribution of `sc`.
pub fn initial_expectation(sc: &Scenario, space: &StateSpace, values: &[f64]) -> f64 {
    let starts = sc.initial_states();
    starts.iter().map(|s| values[space.index(s)]).sum::<f64>() / starts.len() as f64
}
