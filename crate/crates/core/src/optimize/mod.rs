//! Searches over ensembles and channels, and a brute-force grid oracle.
//!
//! Every search is a multi-start local search. Restart `r` draws from its
//! own ChaCha stream `(seed, r)`, so the result of a restart does not depend
//! on how many restarts run or on whether they run in parallel; the best
//! restart wins, ties going to the lowest index.

mod channel;
mod ensemble;
mod grid;
mod search;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{CqEnsemble, QuantumChannel};
use crate::exec::Execution;
use crate::rates::RateReport;
use crate::{Error, Result};

pub use channel::{optimize_channel_functional, optimize_channel_functional_with, Sense};
pub use ensemble::{optimize_theorem1, optimize_unassisted, project_to_marginal, Projection};
pub use grid::{grid_oracle, grid_oracle_unassisted, grid_size, GridCaps, GRID_POINT_CAP};

/// Search settings shared by all optimizers.
///
/// Each restart runs `penalty_stages` stages of coordinate search (one stage
/// for searches without a constraint), splitting `max_iters` sweeps evenly.
/// Step sizes start at `initial_step`, shrink by 4 per stage, double on a
/// successful move and halve on a failed one; a stage ends early once every
/// step is below `min_step`. Moves must improve the score by more than
/// `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Ensemble size cap; defaults to `2·dim(A)·dim(A')`.
    pub num_labels_max: Option<usize>,
    pub restarts: usize,
    pub max_iters: usize,
    pub penalty_weight: f64,
    pub penalty_stages: usize,
    pub initial_step: f64,
    pub min_step: f64,
    pub seed: u64,
    pub tolerance: f64,
    /// Kraus rank of searched channels; defaults to `din·dout`.
    pub kraus_rank: Option<usize>,
    /// Dimension of the purifying factor of ensemble members; defaults to
    /// the member dimension.
    pub purification_dim: Option<usize>,
    pub execution: Execution,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            num_labels_max: None,
            restarts: 8,
            max_iters: 200,
            penalty_weight: 10.0,
            penalty_stages: 4,
            initial_step: 0.5,
            min_step: 1e-7,
            seed: 0,
            tolerance: 1e-12,
            kraus_rank: None,
            purification_dim: None,
            execution: Execution::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive_int = [
            ("restarts", Some(self.restarts)),
            ("max_iters", Some(self.max_iters)),
            ("penalty_stages", Some(self.penalty_stages)),
            ("num_labels_max", self.num_labels_max),
            ("kraus_rank", self.kraus_rank),
            ("purification_dim", self.purification_dim),
        ];
        for (name, v) in positive_int {
            if v == Some(0) {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        let positive_real = [
            ("penalty_weight", self.penalty_weight),
            ("initial_step", self.initial_step),
            ("min_step", self.min_step),
            ("tolerance", self.tolerance),
        ];
        for (name, v) in positive_real {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    pub(crate) fn restart_rng(&self, restart: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(restart as u64);
        rng
    }
}

/// One improving sweep of the winning restart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub stage: usize,
    pub sweep: usize,
    pub value: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    /// Best value found; a lower bound (for maximisation) or upper bound
    /// (for minimisation) on the true optimum, never the optimum itself.
    pub best_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_ensemble: Option<CqEnsemble>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_channel: Option<QuantumChannel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<RateReport>,
    pub best_restart: usize,
    /// Final value of every restart; `None` where the restart failed.
    pub restart_values: Vec<Option<f64>>,
    pub evaluations: u64,
    pub trace: Vec<TraceEntry>,
}

pub(crate) struct RestartOutcome<W> {
    pub value: f64,
    pub witness: W,
    pub report: Option<RateReport>,
    pub evaluations: u64,
    pub trace: Vec<TraceEntry>,
}

/// Index of the best successful restart: largest `sign·value`, then lowest
/// index.
fn pick_best<W>(outcomes: &[Result<RestartOutcome<W>>], sign: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, o) in outcomes.iter().enumerate() {
        if let Ok(o) = o {
            let v = sign * o.value;
            if v.is_nan() {
                continue;
            }
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
    }
    best.map(|(i, _)| i)
}

pub(crate) fn merge<W>(
    outcomes: Vec<Result<RestartOutcome<W>>>,
    sign: f64,
    into: impl FnOnce(W, &mut OptResult),
) -> Result<OptResult> {
    let restart_values = outcomes.iter().map(|o| o.as_ref().ok().map(|o| o.value)).collect();
    let evaluations = outcomes.iter().filter_map(|o| o.as_ref().ok()).map(|o| o.evaluations).sum();
    let Some(best) = pick_best(&outcomes, sign) else {
        let mut errors = outcomes.into_iter().filter_map(|o| o.err());
        return Err(errors
            .next()
            .unwrap_or_else(|| Error::Infeasible("no restart produced a value".into())));
    };
    let winner = outcomes.into_iter().nth(best).expect("index in range").expect("successful restart");
    let mut result = OptResult {
        best_value: winner.value,
        best_ensemble: None,
        best_channel: None,
        report: winner.report,
        best_restart: best,
        restart_values,
        evaluations,
        trace: winner.trace,
    };
    into(winner.witness, &mut result);
    Ok(result)
}

#[cfg(test)]
mod tests;
