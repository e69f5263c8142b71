//! Searches over CPTP maps in Stinespring coordinates.
//!
//! A real vector is read as a complex `dout·r × din` matrix `X` and mapped to
//! the isometry `V = X (X†X)^{-1/2}`, whose Kraus operators define the
//! channel. Every point of the search space is therefore CPTP.

use serde::{Deserialize, Serialize};

use super::search::{compass_search, Eval, SearchParams};
use super::{merge, OptResult, OptimizerConfig, RestartOutcome, TraceEntry};
use crate::channels::QuantumChannel;
use crate::exec::map_indexed;
use crate::qcore::linalg::{self, c, CMatrix};
use crate::qcore::LabeledSpace;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Maximize,
    Minimize,
}

impl Sense {
    fn sign(self) -> f64 {
        match self {
            Sense::Maximize => 1.0,
            Sense::Minimize => -1.0,
        }
    }
}

struct Coordinates<'a> {
    input: &'a LabeledSpace,
    output: &'a LabeledSpace,
    din: usize,
    dout: usize,
    r: usize,
}

impl Coordinates<'_> {
    fn dim(&self) -> usize {
        2 * self.dout * self.r * self.din
    }

    fn decode(&self, x: &[f64]) -> Result<QuantumChannel> {
        let rows = self.dout * self.r;
        let m = CMatrix::from_fn(rows, self.din, |i, j| {
            let o = 2 * (i * self.din + j);
            c(x[o], x[o + 1])
        });
        let v = linalg::polar_isometry(&m);
        QuantumChannel::from_stinespring(self.input.clone(), self.output.clone(), &v, self.r)
    }

    fn encode(&self, ch: &QuantumChannel) -> Result<Vec<f64>> {
        if ch.input_dim() != self.din || ch.output_dim() != self.dout {
            return Err(Error::mismatch("warm-start channel", self.din * self.dout, ch.input_dim() * ch.output_dim()));
        }
        let kraus = ch.kraus();
        if kraus.len() > self.r {
            return Err(Error::Config(format!(
                "warm-start channel has {} Kraus operators, search rank is {}",
                kraus.len(),
                self.r
            )));
        }
        let mut x = vec![0.0; self.dim()];
        for (k, op) in kraus.iter().enumerate() {
            for o in 0..self.dout {
                for i in 0..self.din {
                    let idx = 2 * ((o * self.r + k) * self.din + i);
                    x[idx] = op[(o, i)].re;
                    x[idx + 1] = op[(o, i)].im;
                }
            }
        }
        Ok(x)
    }
}

/// Optimises `objective` over channels `input → output` with Kraus rank
/// `cfg.kraus_rank` (default `din·dout`).
pub fn optimize_channel_functional<F>(
    objective: F,
    input: &LabeledSpace,
    output: &LabeledSpace,
    sense: Sense,
    cfg: &OptimizerConfig,
) -> Result<OptResult>
where
    F: Fn(&QuantumChannel) -> Result<f64> + Sync,
{
    optimize_channel_functional_with(objective, input, output, sense, cfg, &[])
}

/// As [`optimize_channel_functional`], with restart `i` starting from
/// `warm_starts[i]` where given.
pub fn optimize_channel_functional_with<F>(
    objective: F,
    input: &LabeledSpace,
    output: &LabeledSpace,
    sense: Sense,
    cfg: &OptimizerConfig,
    warm_starts: &[QuantumChannel],
) -> Result<OptResult>
where
    F: Fn(&QuantumChannel) -> Result<f64> + Sync,
{
    cfg.validate()?;
    let (din, dout) = (input.total_dim(), output.total_dim());
    let r = cfg.kraus_rank.unwrap_or(din * dout);
    if dout * r < din {
        return Err(Error::Config(format!(
            "Kraus rank {r} is too small for a channel from dimension {din} to {dout}"
        )));
    }
    let coords = Coordinates { input, output, din, dout, r };
    let starts = warm_starts.iter().map(|w| coords.encode(w)).collect::<Result<Vec<_>>>()?;
    let sign = sense.sign();

    let outcomes = map_indexed(cfg.execution, cfg.restarts, |restart| {
        use rand::Rng;
        use rand_distr::StandardNormal;

        let mut rng = cfg.restart_rng(restart);
        let x0 = match starts.get(restart) {
            Some(x) => x.clone(),
            None => (0..coords.dim()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect(),
        };
        let mut f = |x: &[f64]| match coords.decode(x).and_then(|ch| objective(&ch)) {
            Ok(v) if v.is_finite() => Eval { score: -sign * v, value: v, residual: 0.0 },
            _ => Eval::rejected(),
        };
        let params = SearchParams {
            sweeps: cfg.max_iters,
            initial_step: cfg.initial_step,
            min_step: cfg.min_step,
            tolerance: cfg.tolerance,
        };
        let out = compass_search(&mut f, x0, &params, &mut rng);
        let channel = coords.decode(&out.x)?;
        let value = match out.best.value {
            v if v.is_finite() => v,
            _ => objective(&channel)?,
        };
        Ok(RestartOutcome {
            value,
            witness: channel,
            report: None,
            evaluations: out.evaluations,
            trace: out
                .improvements
                .iter()
                .map(|(sweep, e)| TraceEntry { stage: 0, sweep: *sweep, value: e.value, residual: 0.0 })
                .collect(),
        })
    });
    merge(outcomes, sign, |ch, result| result.best_channel = Some(ch))
}
