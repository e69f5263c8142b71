//! Resource measures of a bipartite state: the dense coding advantage, the
//! entanglement of purification, their duality on pure tripartite states and
//! the ensemble upper bound on the regularised entanglement of purification.
//!
//! Both measures are non-convex optimisations over channels. Reported values
//! are those of the best witness channel found, so `Δ` is a lower bound and
//! `E_P` an upper bound on the true quantity.

use serde::{Deserialize, Serialize};

use crate::channels::{apply_blockwise, CqEnsemble, QuantumChannel};
use crate::entropic::{holevo_quantity, matrix_entropy};
use crate::exec;
use crate::optimize::{optimize_channel_functional_with, OptResult, OptimizerConfig, Sense};
use crate::qcore::linalg::{c, CMatrix};
use crate::qcore::{partial_trace, permute, purify, DensityOperator, LabeledSpace, Purification, Tolerances};
use crate::{Error, Result};

/// Per-evaluation slack used when comparing optimised measures.
pub const MEASURE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureResult {
    pub value: f64,
    pub witness_channel: QuantumChannel,
    pub diagnostics: OptResult,
}

/// Output dimension caps; `None` selects `dim(A')²` for `Δ` and the
/// purifying dimension for `E_P`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureCaps {
    pub dim_a_cap: Option<usize>,
    pub dim_f_cap: Option<usize>,
}

fn bipartite(rho: &DensityOperator, what: &str) -> Result<(String, String)> {
    match rho.space().factors() {
        [(a, _), (b, _)] => Ok((a.clone(), b.clone())),
        _ => Err(Error::InvalidState(format!("{what} needs a bipartite state, got {}", rho.space()))),
    }
}

fn fresh_label(base: &str, taken: &[&str]) -> String {
    let mut l = base.to_string();
    while taken.contains(&l.as_str()) {
        l.push('\'');
    }
    l
}

fn check_cap(cap: usize, what: &str) -> Result<()> {
    if cap == 0 {
        return Err(Error::Config(format!("{what} must be at least 1")));
    }
    Ok(())
}

/// `V = [I; 0]` embedding dimension `din` into `dout ≥ din`.
fn embedding(input: LabeledSpace, output: LabeledSpace) -> Result<QuantumChannel> {
    let (din, dout) = (input.total_dim(), output.total_dim());
    let v = CMatrix::from_fn(dout, din, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) });
    QuantumChannel::isometry(input, output, v)
}

fn constant_pure(input: LabeledSpace, output: LabeledSpace) -> Result<QuantumChannel> {
    QuantumChannel::constant(input, &DensityOperator::basis(output, 0)?)
}

fn finish(diagnostics: OptResult) -> Result<MeasureResult> {
    let witness_channel = diagnostics
        .best_channel
        .clone()
        .ok_or_else(|| Error::Infeasible("no restart produced a channel".into()))?;
    Ok(MeasureResult {
        value: diagnostics.best_value,
        witness_channel,
        diagnostics,
    })
}

/// `Δ(A'⟩B') = max_Ω I(A⟩B')` over channels `Ω: A' → A`, `dim A = dim_a_cap`.
pub fn dense_coding_advantage(zeta_ab: &DensityOperator, dim_a_cap: usize, cfg: &OptimizerConfig) -> Result<MeasureResult> {
    let (a, b) = bipartite(zeta_ab, "dense coding advantage")?;
    check_cap(dim_a_cap, "dim_a_cap")?;
    let input = zeta_ab.space().subspace(&[a.as_str()])?;
    let output = LabeledSpace::single(fresh_label("A", &[&a, &b]), dim_a_cap)?;
    let (da, db) = (input.total_dim(), zeta_ab.space().dim_of(&b)?);
    // Ω acts on the trailing factor of B' ⊗ A'.
    let swapped = permute(zeta_ab, &[b.as_str(), a.as_str()])?.into_matrix();
    let s_b = matrix_entropy(partial_trace(zeta_ab, &[b.as_str()])?.matrix());
    let objective = |omega: &QuantumChannel| -> Result<f64> {
        let out = apply_blockwise(omega.kraus(), &swapped, db, da, dim_a_cap);
        Ok(s_b - matrix_entropy(&out))
    };
    let mut warm = Vec::new();
    if dim_a_cap >= da {
        warm.push(embedding(input.clone(), output.clone())?);
    }
    warm.push(constant_pure(input.clone(), output.clone())?);
    finish(optimize_channel_functional_with(objective, &input, &output, Sense::Maximize, cfg, &warm)?)
}

/// Purification `ψ^{CDE}` reduced to `C ⊗ E`, with `dim E`.
fn purified_ce(rho_cd: &DensityOperator, c_label: &str, e_label: &str) -> Result<(CMatrix, usize)> {
    let psi = purify(rho_cd, e_label, Purification::Minimal)?;
    let de = psi.space().dim_of(e_label)?;
    Ok((partial_trace(&psi, &[c_label, e_label])?.into_matrix(), de))
}

/// `E_P(C:D) = min_T S(CF)` over channels `T: E → F`, `dim F = dim_f_cap`,
/// where `ψ^{CDE}` is a minimal purification of `ρ^{CD}`.
pub fn entanglement_of_purification(rho_cd: &DensityOperator, dim_f_cap: usize, cfg: &OptimizerConfig) -> Result<MeasureResult> {
    entanglement_of_purification_from(rho_cd, dim_f_cap, cfg, None)
}

/// `E_P` at each cap in `caps` (ascending), each search warm-started from
/// the previous witness so the values are nonincreasing.
pub fn entanglement_of_purification_profile(
    rho_cd: &DensityOperator,
    caps: &[usize],
    cfg: &OptimizerConfig,
) -> Result<Vec<MeasureResult>> {
    if caps.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config("E_P caps must be ascending".into()));
    }
    let mut out: Vec<MeasureResult> = Vec::with_capacity(caps.len());
    for &cap in caps {
        let prev = out.last().map(|r| &r.witness_channel);
        let r = entanglement_of_purification_from(rho_cd, cap, cfg, prev)?;
        out.push(r);
    }
    Ok(out)
}

fn entanglement_of_purification_from(
    rho_cd: &DensityOperator,
    dim_f_cap: usize,
    cfg: &OptimizerConfig,
    previous: Option<&QuantumChannel>,
) -> Result<MeasureResult> {
    let (cl, dl) = bipartite(rho_cd, "entanglement of purification")?;
    check_cap(dim_f_cap, "dim_f_cap")?;
    let el = fresh_label("E", &[&cl, &dl]);
    let fl = fresh_label("F", &[&cl, &dl, &el]);
    let (rho_ce, de) = purified_ce(rho_cd, &cl, &el)?;
    let dc = rho_cd.space().dim_of(&cl)?;
    let input = LabeledSpace::single(el, de)?;
    let output = LabeledSpace::single(fl, dim_f_cap)?;
    let objective = |t: &QuantumChannel| -> Result<f64> {
        Ok(matrix_entropy(&apply_blockwise(t.kraus(), &rho_ce, dc, de, dim_f_cap)))
    };
    let mut warm = Vec::new();
    if let Some(prev) = previous {
        if prev.input_dim() == de && prev.output_dim() <= dim_f_cap {
            let lift = embedding(prev.output().clone(), output.clone())?;
            warm.push(
                prev.then(&lift)?
                    .with_input_labels(&input.labels().collect::<Vec<_>>())?,
            );
        }
    }
    if dim_f_cap >= de {
        warm.push(embedding(input.clone(), output.clone())?);
    }
    warm.push(constant_pure(input.clone(), output.clone())?);
    let rank = cfg.kraus_rank.unwrap_or(de * dim_f_cap);
    let warm: Vec<QuantumChannel> = warm.into_iter().filter(|w| w.kraus().len() <= rank).collect();
    finish(optimize_channel_functional_with(objective, &input, &output, Sense::Minimize, cfg, &warm)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualityReport {
    pub delta: MeasureResult,
    pub e_p: MeasureResult,
    pub s_bprime: f64,
    /// `|Δ(A'⟩B') + E_P(C':B') − S(B')|`.
    pub residual: f64,
}

/// Checks `Δ(A'⟩B') + E_P(C':B') = S(B')` on a pure state of `A' ⊗ B' ⊗ C'`,
/// computing both measures independently.
pub fn duality_residual(
    zeta_pure: &DensityOperator,
    partition: (&str, &str, &str),
    caps: MeasureCaps,
    cfg: &OptimizerConfig,
) -> Result<DualityReport> {
    let (a, b, cl) = partition;
    let labels: Vec<&str> = zeta_pure.space().labels().collect();
    let mut sorted = vec![a, b, cl];
    sorted.sort_unstable();
    let mut have = labels.clone();
    have.sort_unstable();
    if sorted != have {
        return Err(Error::space_mismatch("duality partition", format!("{a}⊗{b}⊗{cl}"), zeta_pure.space().to_string()));
    }
    let tol = Tolerances::default().tol_eq;
    if !zeta_pure.is_pure(tol) {
        return Err(Error::InvalidState(format!(
            "duality needs a pure state, purity deficit {:.3e}",
            1.0 - zeta_pure.purity()
        )));
    }
    let zeta_ab = partial_trace(zeta_pure, &[a, b])?;
    let rho_cb = permute(&partial_trace(zeta_pure, &[cl, b])?, &[cl, b])?;
    let da = zeta_pure.space().dim_of(a)?;
    let dim_a_cap = caps.dim_a_cap.unwrap_or(da * da);
    let (delta, e_p) = exec::join(
        cfg.execution,
        || dense_coding_advantage(&zeta_ab, dim_a_cap, cfg),
        || {
            let de = Purification::minimal_dim(&rho_cb);
            entanglement_of_purification(&rho_cb, caps.dim_f_cap.unwrap_or(de), cfg)
        },
    );
    let (delta, e_p) = (delta?, e_p?);
    let s_bprime = matrix_entropy(partial_trace(zeta_pure, &[b])?.matrix());
    Ok(DualityReport {
        residual: (delta.value + e_p.value - s_bprime).abs(),
        delta,
        e_p,
        s_bprime,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpBound {
    /// `Σ q(u) E_P(ρ_u) + I(U:CD)`.
    pub bound: f64,
    pub member_values: Vec<f64>,
    pub holevo: f64,
    /// `E_P` of the average state.
    pub e_p_average: f64,
    /// The bound lies below `E_P(ρ)` by more than the combined optimiser
    /// slack, which would witness non-additivity if the searches were exact.
    pub below_average: bool,
}

/// Upper bound on the regularised `E_P` of the average state of `ens`.
pub fn ep_ensemble_upper_bound(ens: &CqEnsemble, caps: MeasureCaps, cfg: &OptimizerConfig) -> Result<EpBound> {
    let ep = |rho: &DensityOperator| -> Result<f64> {
        let cap = caps.dim_f_cap.unwrap_or_else(|| Purification::minimal_dim(rho));
        Ok(entanglement_of_purification(rho, cap, cfg)?.value)
    };
    let member_values = ens.states().iter().map(ep).collect::<Result<Vec<_>>>()?;
    let e_p_average = ep(&ens.average())?;
    let holevo = holevo_quantity(ens).value;
    let bound = ens.probs().iter().zip(&member_values).map(|(q, v)| q * v).sum::<f64>() + holevo;
    let slack = MEASURE_TOL * (ens.len() + 1) as f64;
    Ok(EpBound {
        bound,
        member_values,
        holevo,
        e_p_average,
        below_average: bound < e_p_average - slack,
    })
}

#[cfg(test)]
mod tests;
