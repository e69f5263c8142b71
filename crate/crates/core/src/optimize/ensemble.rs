//! Ensemble searches for the assisted and unassisted rate functionals.
//!
//! Member `u` is the reduced state of a unit vector on
//! `member ⊗ purifying factor`, stored as a `dm × p` complex matrix `M` with
//! `C(u) = M M† / ‖M‖²`; probabilities are a softmax of real logits.

use serde::{Deserialize, Serialize};

use super::search::{compass_search, Eval, SearchParams};
use super::{merge, OptResult, OptimizerConfig, RestartOutcome, TraceEntry};
use crate::channels::{CqEnsemble, ResourceState, WiretapChannel};
use crate::exec::map_indexed;
use crate::qcore::linalg::{self, c, CMatrix, ZERO};
use crate::qcore::{uhlmann_fixup, DensityOperator, LabeledSpace};
use crate::rates::{marginal_constraint_residual, theorem1_rate, unassisted_rate, Compiled, RateReport, FEASIBILITY_TOL};
use crate::{Error, Result};

/// Logit given to members that a warm start leaves unused.
const UNUSED_LOGIT: f64 = -40.0;

/// Members with smaller probability are dropped from returned ensembles.
const PRUNE_PROB: f64 = 1e-12;

#[derive(Clone, Copy)]
enum Kind<'a> {
    Theorem1(&'a ResourceState),
    Unassisted,
}

struct Problem<'a> {
    kind: Kind<'a>,
    n: &'a WiretapChannel,
    space: LabeledSpace,
    /// Member dimension and purifying dimension.
    dm: usize,
    p: usize,
    /// Number of members searched over.
    k: usize,
    objective: Compiled,
}

impl<'a> Problem<'a> {
    fn new(kind: Kind<'a>, n: &'a WiretapChannel, cfg: &OptimizerConfig) -> Result<Self> {
        let da = n.input().total_dim();
        let (space, da_prime) = match kind {
            Kind::Theorem1(res) => {
                let mut f: Vec<(String, usize)> = n.input().factors().to_vec();
                f.push((res.reference().to_string(), res.alice_dim()));
                (LabeledSpace::new(f)?, res.alice_dim())
            }
            Kind::Unassisted => (n.input().clone(), 1),
        };
        let labels = cfg.num_labels_max.unwrap_or(2 * da * da_prime);
        let k = match kind {
            // One label is kept free for the correction member of the projection.
            Kind::Theorem1(_) if labels >= 2 => labels - 1,
            _ => labels,
        };
        let dm = space.total_dim();
        let objective = match kind {
            Kind::Theorem1(res) => Compiled::theorem1(n, res)?,
            Kind::Unassisted => Compiled::unassisted(n)?,
        };
        Ok(Self {
            objective,
            kind,
            n,
            space,
            dm,
            p: cfg.purification_dim.unwrap_or(dm),
            k,
        })
    }

    fn dim(&self) -> usize {
        self.k * (2 * self.dm * self.p + 1)
    }

    fn decode(&self, x: &[f64]) -> CqEnsemble {
        let (probs, members) = self.decode_raw(x);
        let states = members
            .into_iter()
            .map(|m| DensityOperator::from_raw(self.space.clone(), m))
            .collect();
        CqEnsemble::from_states(probs, states).expect("softmax probabilities are normalised")
    }

    fn decode_raw(&self, x: &[f64]) -> (Vec<f64>, Vec<CMatrix>) {
        let block = 2 * self.dm * self.p;
        let logits = &x[self.k * block..];
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = weights.iter().sum();
        let probs = weights.iter().map(|w| w / total).collect();
        let states = (0..self.k)
            .map(|u| {
                let v = &x[u * block..(u + 1) * block];
                let mut m = CMatrix::from_fn(self.dm, self.p, |i, j| {
                    let o = 2 * (i * self.p + j);
                    c(v[o], v[o + 1])
                });
                let norm2 = m.norm_squared();
                if !(norm2 > 1e-300) {
                    m = CMatrix::zeros(self.dm, self.p);
                    m[(0, 0)] = c(1.0, 0.0);
                }
                &m * m.adjoint() * c(1.0 / m.norm_squared(), 0.0)
            })
            .collect();
        (probs, states)
    }

    /// Coordinates of members given as states, with the given probabilities.
    fn encode(&self, states: &[CMatrix], probs: &[f64]) -> Vec<f64> {
        let block = 2 * self.dm * self.p;
        let mut x = vec![0.0; self.dim()];
        for (u, s) in states.iter().enumerate().take(self.k) {
            let (vals, vecs) = linalg::hermitian_eigen(s);
            for (j, &l) in vals.iter().enumerate().take(self.p) {
                let r = l.max(0.0).sqrt();
                for i in 0..self.dm {
                    let z = vecs[(i, j)] * r;
                    let o = u * block + 2 * (i * self.p + j);
                    x[o] = z.re;
                    x[o + 1] = z.im;
                }
            }
        }
        for u in 0..self.k {
            let q = probs.get(u).copied().unwrap_or(0.0);
            x[self.k * block + u] = if q > 0.0 { q.ln() } else { UNUSED_LOGIT };
        }
        x
    }

    fn score(&self, x: &[f64], weight: f64) -> Eval {
        let (probs, members) = self.decode_raw(x);
        let (value, residual) = self.objective.evaluate(&probs, &members);
        if !value.is_finite() {
            return Eval::rejected();
        }
        Eval {
            score: -value + weight * residual.powi(2),
            value,
            residual,
        }
    }

    fn warm_start(&self, restart: usize) -> Option<Vec<f64>> {
        let da = self.n.input().total_dim();
        match (self.kind, restart) {
            (Kind::Theorem1(res), 0) => {
                let states = weyl_modulations(res, da)?;
                let m = states.len().min(self.k);
                Some(self.encode(&states[..m], &vec![1.0 / m as f64; m]))
            }
            (Kind::Theorem1(res), 1) => {
                let m = da.min(self.k);
                let marginal = res.marginal().matrix();
                let states: Vec<CMatrix> = (0..m).map(|i| linalg::kron(&basis_projector(da, i), marginal)).collect();
                Some(self.encode(&states, &vec![1.0 / m as f64; m]))
            }
            (Kind::Unassisted, 0) => {
                let m = da.min(self.k);
                let states: Vec<CMatrix> = (0..m).map(|i| basis_projector(da, i)).collect();
                Some(self.encode(&states, &vec![1.0 / m as f64; m]))
            }
            _ => None,
        }
    }
}

fn basis_projector(d: usize, i: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, i)] = c(1.0, 0.0);
    m
}

/// `(W_{a,b} ⊗ id) φ₀` for the `r²` Weyl operators of the restricted `A'`,
/// with `A'` embedded into `A`; `None` when `dim A < r`.
fn weyl_modulations(res: &ResourceState, da: usize) -> Option<Vec<CMatrix>> {
    let r = res.alice_dim();
    if da < r {
        return None;
    }
    let phi = res.phi0().pure_amplitudes(1e-9)?;
    let mut out = Vec::with_capacity(r * r);
    for a in 0..r {
        for b in 0..r {
            // W = X^a Z^b embedded: |i⟩ ↦ ω^{bi} |i + a mod r⟩.
            let mut v = crate::qcore::CVector::from_element(da * r, ZERO);
            for i in 0..r {
                let phase = 2.0 * std::f64::consts::PI * (b * i) as f64 / r as f64;
                let w = c(phase.cos(), phase.sin());
                let row = (i + a) % r;
                for j in 0..r {
                    v[row * r + j] += w * phi[i * r + j];
                }
            }
            out.push(linalg::outer(&v));
        }
    }
    Some(out)
}

/// How [`project_to_marginal`] repaired an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    /// Already feasible.
    None,
    /// Mixed with one correction member carrying the missing marginal.
    CorrectionMember,
    /// Each member repaired to the exact marginal.
    MemberwiseUhlmann,
}

/// Makes the average `A'` marginal of an assisted ensemble equal `ζ^{A'}`.
///
/// Two repairs are tried and the better feasible one is kept: mixing in a
/// correction member `ρ_A ⊗ σ` of weight `t`, with `t` as small as positivity
/// of `σ = (ζ^{A'} − (1−t)·m)/t` allows, and replacing every member by its
/// Uhlmann repair with marginal `ζ^{A'}`.
pub fn project_to_marginal(
    ens: &CqEnsemble,
    n: &WiretapChannel,
    res: &ResourceState,
) -> Result<(CqEnsemble, RateReport, Projection)> {
    let before = theorem1_rate(ens, n, res)?;
    if before.constraint_residual == 0.0 {
        return Ok((ens.clone(), before, Projection::None));
    }
    let mut candidates = Vec::new();
    if let Some(mixed) = correction_member(ens, n, res)? {
        candidates.push((mixed.0, mixed.1, Projection::CorrectionMember));
    }
    let label = res.reference();
    let repaired = ens.map_states(|s| uhlmann_fixup(s, res.marginal(), &[label]).map(|f| f.state))?;
    let report = theorem1_rate(&repaired, n, res)?;
    candidates.push((repaired, report, Projection::MemberwiseUhlmann));

    candidates
        .into_iter()
        .filter(|(_, r, _)| r.constraint_residual <= FEASIBILITY_TOL && r.constraint_residual <= before.constraint_residual)
        .max_by(|a, b| a.1.rate.total_cmp(&b.1.rate))
        .ok_or_else(|| {
            Error::Infeasible(format!(
                "projection could not reach the marginal constraint (residual before {:.3e}, condition of ζ^A' {:.3e})",
                before.constraint_residual,
                res.condition_number()
            ))
        })
}

fn correction_member(
    ens: &CqEnsemble,
    n: &WiretapChannel,
    res: &ResourceState,
) -> Result<Option<(CqEnsemble, RateReport)>> {
    let space = ens.space();
    let last = space.len() - 1;
    let avg = ens.average();
    let m = linalg::partial_trace_matrix(avg.matrix(), &space.dims(), &[last]);
    let target = res.marginal().matrix();
    let inv = linalg::inv_sqrt_psd(target, 0.0);
    let lmax = linalg::hermitian_eigenvalues(&(&inv * &m * &inv))[0];
    let s = if lmax > 1.0 { 1.0 / lmax } else { 1.0 };
    let t = 1.0 - s;
    if !(t > 0.0) {
        return Ok(None);
    }
    let sigma = (target - &m * c(s, 0.0)) * c(1.0 / t, 0.0);
    let sigma = DensityOperator::from_raw(res.marginal().space().clone(), sigma).clamped();
    let da = space.total_dim() / space.factors()[last].1;
    let mut options: Vec<CMatrix> = vec![linalg::identity(da) * c(1.0 / da as f64, 0.0)];
    options.extend((0..da).map(|i| basis_projector(da, i)));

    let mut best: Option<(CqEnsemble, RateReport)> = None;
    for rho_a in options {
        let member = DensityOperator::from_raw(space.clone(), linalg::kron(&rho_a, sigma.matrix()));
        let mut labels = ens.labels().to_vec();
        labels.push(fresh_label(ens.labels()));
        let mut probs: Vec<f64> = ens.probs().iter().map(|q| q * s).collect();
        probs.push(t);
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|q| *q /= total);
        let mut states = ens.states().to_vec();
        states.push(member);
        let candidate = CqEnsemble::new(labels, probs, states)?;
        let report = theorem1_rate(&candidate, n, res)?;
        if best.as_ref().is_none_or(|(_, b)| report.rate > b.rate) {
            best = Some((candidate, report));
        }
    }
    Ok(best)
}

fn fresh_label(labels: &[String]) -> String {
    (labels.len()..)
        .map(|i| i.to_string())
        .find(|l| !labels.contains(l))
        .expect("unbounded range")
}

/// Drops members of negligible probability and renames labels `0, 1, ...`.
fn prune(ens: &CqEnsemble) -> Result<CqEnsemble> {
    let keep: Vec<usize> = (0..ens.len()).filter(|&u| ens.probs()[u] >= PRUNE_PROB).collect();
    let total: f64 = keep.iter().map(|&u| ens.probs()[u]).sum();
    let probs = keep.iter().map(|&u| ens.probs()[u] / total).collect();
    let states = keep.iter().map(|&u| ens.states()[u].clone()).collect();
    CqEnsemble::from_states(probs, states)
}

fn run_restart(problem: &Problem<'_>, cfg: &OptimizerConfig, restart: usize) -> Result<RestartOutcome<CqEnsemble>> {
    use rand::Rng;
    use rand_distr::StandardNormal;

    let mut rng = cfg.restart_rng(restart);
    let mut x = problem.warm_start(restart).unwrap_or_else(|| {
        let block = problem.k * 2 * problem.dm * problem.p;
        (0..problem.dim())
            .map(|i| {
                let g: f64 = rng.sample(StandardNormal);
                if i < block { g } else { 0.5 * g }
            })
            .collect()
    });
    let stages = match problem.kind {
        Kind::Theorem1(_) => cfg.penalty_stages,
        Kind::Unassisted => 1,
    };
    let sweeps = (cfg.max_iters / stages).max(1);
    let mut trace = Vec::new();
    let mut evaluations = 0;
    for stage in 0..stages {
        let weight = cfg.penalty_weight * 10f64.powi(stage as i32);
        let params = SearchParams {
            sweeps,
            initial_step: cfg.initial_step * 0.25f64.powi(stage as i32),
            min_step: cfg.min_step,
            tolerance: cfg.tolerance,
        };
        let mut f = |x: &[f64]| problem.score(x, weight);
        let out = compass_search(&mut f, x, &params, &mut rng);
        evaluations += out.evaluations;
        trace.extend(out.improvements.iter().map(|(sweep, e)| TraceEntry {
            stage,
            sweep: *sweep,
            value: e.value,
            residual: e.residual,
        }));
        x = out.x;
    }

    let ens = prune(&problem.decode(&x))?;
    let (ens, report) = match problem.kind {
        Kind::Theorem1(res) => {
            let (projected, _, _) = project_to_marginal(&ens, problem.n, res)?;
            let projected = prune(&projected)?;
            let report = theorem1_rate(&projected, problem.n, res)?;
            debug_assert!(report.constraint_residual <= marginal_constraint_residual(&ens, res)? + 1e-15);
            (projected, report)
        }
        Kind::Unassisted => {
            let report = unassisted_rate(&ens, problem.n)?;
            (ens, report)
        }
    };
    if !report.feasible {
        return Err(Error::Infeasible(format!(
            "restart {restart} ended with residual {:.3e}",
            report.constraint_residual
        )));
    }
    Ok(RestartOutcome {
        value: report.rate,
        witness: ens,
        report: Some(report),
        evaluations,
        trace,
    })
}

fn optimize(kind: Kind<'_>, n: &WiretapChannel, cfg: &OptimizerConfig) -> Result<OptResult> {
    cfg.validate()?;
    let problem = Problem::new(kind, n, cfg)?;
    let outcomes = map_indexed(cfg.execution, cfg.restarts, |r| run_restart(&problem, cfg, r));
    merge(outcomes, 1.0, |ens, result| result.best_ensemble = Some(ens))
}

/// Maximises the assisted rate `I(U:BB') − max(I(U:EE'), I(U:A'))` over
/// ensembles on `A ⊗ A''`; the returned ensemble meets the average
/// marginal constraint after the final projection.
pub fn optimize_theorem1(n: &WiretapChannel, res: &ResourceState, cfg: &OptimizerConfig) -> Result<OptResult> {
    optimize(Kind::Theorem1(res), n, cfg)
}

/// Maximises `I(U:B) − I(U:E)` over ensembles on the channel input.
pub fn optimize_unassisted(n: &WiretapChannel, cfg: &OptimizerConfig) -> Result<OptResult> {
    optimize(Kind::Unassisted, n, cfg)
}
