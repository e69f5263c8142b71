//! Exhaustive search over a discretised ensemble family, for validating the
//! optimizers on tiny instances.
//!
//! Members are pure states `Σ_j c_j e^{iφ_j} |j⟩` whose magnitudes come from
//! hyperspherical angles on the grid `(π/2)·a/(g−1)` and whose phases come
//! from `2π·b/g`; an ensemble is a multiset of `members` grid states with
//! probabilities on the simplex grid of step `1/simplex_steps`.

use serde::{Deserialize, Serialize};

use crate::channels::{apply, ResourceState, WiretapChannel};
use crate::entropic::matrix_entropy;
use crate::exec::{map_indexed, Execution};
use crate::qcore::linalg::{self, c, CMatrix, CVector};
use crate::qcore::{partial_trace, DensityOperator, LabeledSpace};
use crate::rates::FEASIBILITY_TOL;
use crate::{Error, Result};

/// Largest number of ensembles the oracle agrees to evaluate.
pub const GRID_POINT_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridCaps {
    pub angles: usize,
    pub members: usize,
    pub simplex_steps: usize,
    pub execution: Execution,
}

impl Default for GridCaps {
    fn default() -> Self {
        Self {
            angles: 12,
            members: 2,
            simplex_steps: 10,
            execution: Execution::default(),
        }
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n.saturating_sub(k));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

fn states_per_member(member_dim: usize, angles: usize) -> u128 {
    (angles as u128).saturating_pow(2 * (member_dim as u32).saturating_sub(1))
}

/// Number of ensembles the oracle would evaluate for members of dimension
/// `member_dim`.
pub fn grid_size(member_dim: usize, caps: &GridCaps) -> u128 {
    let s = states_per_member(member_dim, caps.angles);
    let k = caps.members as u128;
    binomial(s + k - 1, k).saturating_mul(binomial(caps.simplex_steps as u128 + k - 1, k - 1))
}

fn grid_states(d: usize, g: usize) -> Vec<CVector> {
    let count = states_per_member(d, g) as usize;
    (0..count)
        .map(|idx| {
            let mut rest = idx;
            let mut amps = CVector::zeros(d);
            let mut carry = 1.0;
            amps[0] = c(1.0, 0.0);
            for j in 0..d - 1 {
                let a = rest % g;
                rest /= g;
                let b = rest % g;
                rest /= g;
                let alpha = if g > 1 {
                    std::f64::consts::FRAC_PI_2 * a as f64 / (g - 1) as f64
                } else {
                    0.0
                };
                let phi = 2.0 * std::f64::consts::PI * b as f64 / g as f64;
                amps[j] *= carry * alpha.cos();
                carry *= alpha.sin();
                amps[j + 1] = c(phi.cos(), phi.sin());
            }
            amps[d - 1] *= carry;
            amps
        })
        .collect()
}

/// Per-state data the inner loop needs.
struct Cached {
    bob: Vec<CMatrix>,
    eve: Vec<CMatrix>,
    aprime: Vec<CMatrix>,
    s_bob: Vec<f64>,
    s_eve: Vec<f64>,
    s_aprime: Vec<f64>,
    /// `ζ^{A'}` for assisted searches.
    target: Option<CMatrix>,
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn holevo(weights: &[f64], members: &[&CMatrix], entropies: &[f64]) -> f64 {
    let d = members[0].nrows();
    let mut avg = CMatrix::zeros(d, d);
    let mut cond = 0.0;
    for ((w, m), s) in weights.iter().zip(members).zip(entropies) {
        if *w > 0.0 {
            avg += *m * c(*w, 0.0);
            cond += w * s;
        }
    }
    matrix_entropy(&avg) - cond
}

fn search(cache: &Cached, caps: &GridCaps) -> f64 {
    let s = cache.bob.len();
    let k = caps.members;
    let weights: Vec<Vec<f64>> = compositions(caps.simplex_steps, k)
        .into_iter()
        .map(|c| c.iter().map(|&w| w as f64 / caps.simplex_steps as f64).collect())
        .collect();
    let best = map_indexed(caps.execution, s, |first| {
        let mut idx = vec![first; k];
        let mut best = f64::NEG_INFINITY;
        visit(cache, &weights, &mut idx, 1, s, &mut best);
        best
    });
    best.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Fills `idx[pos..]` with every non-decreasing continuation.
fn visit(cache: &Cached, weights: &[Vec<f64>], idx: &mut [usize], pos: usize, s: usize, best: &mut f64) {
    if pos == idx.len() {
        for w in weights {
            if let Some(v) = evaluate(cache, idx, w) {
                *best = best.max(v);
            }
        }
        return;
    }
    for i in idx[pos - 1]..s {
        idx[pos] = i;
        visit(cache, weights, idx, pos + 1, s, best);
    }
}

fn evaluate(cache: &Cached, idx: &[usize], w: &[f64]) -> Option<f64> {
    fn pick<'m>(v: &'m [CMatrix], idx: &[usize]) -> Vec<&'m CMatrix> {
        idx.iter().map(|&i| &v[i]).collect()
    }
    let pick_s = |v: &[f64]| idx.iter().map(|&i| v[i]).collect::<Vec<_>>();
    let aprime = match &cache.target {
        Some(target) => {
            let members = pick(&cache.aprime, idx);
            let d = target.nrows();
            let mut avg = CMatrix::zeros(d, d);
            for (wi, m) in w.iter().zip(&members) {
                avg += *m * c(*wi, 0.0);
            }
            if linalg::trace_norm_hermitian(&(avg - target)) > FEASIBILITY_TOL {
                return None;
            }
            holevo(w, &members, &pick_s(&cache.s_aprime))
        }
        None => 0.0,
    };
    let bb = holevo(w, &pick(&cache.bob, idx), &pick_s(&cache.s_bob));
    let ee = holevo(w, &pick(&cache.eve, idx), &pick_s(&cache.s_eve));
    Some(bb - ee.max(aprime))
}

fn check_size(member_dim: usize, caps: &GridCaps) -> Result<()> {
    if caps.angles == 0 || caps.members == 0 || caps.simplex_steps == 0 {
        return Err(Error::Config("grid caps must be positive".into()));
    }
    let size = grid_size(member_dim, caps);
    if size > GRID_POINT_CAP {
        return Err(Error::ResourceLimit {
            what: format!(
                "grid oracle over {} members of dimension {member_dim} with {} angles",
                caps.members, caps.angles
            ),
            requested: size,
            cap: GRID_POINT_CAP,
        });
    }
    Ok(())
}

fn marginals(states: &[DensityOperator], keep: &[String]) -> Result<(Vec<CMatrix>, Vec<f64>)> {
    let mats = states
        .iter()
        .map(|s| partial_trace(s, keep).map(DensityOperator::into_matrix))
        .collect::<Result<Vec<_>>>()?;
    let ent = mats.iter().map(matrix_entropy).collect();
    Ok((mats, ent))
}

/// Best assisted rate over the grid, counting only ensembles that meet the
/// average marginal constraint. Returns `-∞` when no grid point is feasible.
pub fn grid_oracle(n: &WiretapChannel, res: &ResourceState, caps: &GridCaps) -> Result<f64> {
    let mut factors = n.input().factors().to_vec();
    factors.push((res.reference().to_string(), res.alice_dim()));
    let space = LabeledSpace::new(factors)?;
    let d = space.total_dim();
    check_size(d, caps)?;
    let states = grid_states(d, caps.angles)
        .iter()
        .map(|v| DensityOperator::from_pure(space.clone(), v))
        .collect::<Result<Vec<_>>>()?;
    let input_labels: Vec<&str> = n.input().labels().collect();
    let pushed = states
        .iter()
        .map(|s| {
            let after_n = apply(n.channel(), s, &input_labels)?;
            apply(res.z_channel(), &after_n, &[res.reference()])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut bob = n.bob().to_vec();
    bob.push(res.bob().to_string());
    let mut eve = n.eve().to_vec();
    eve.push(res.eve().to_string());
    let (bob_m, s_bob) = marginals(&pushed, &bob)?;
    let (eve_m, s_eve) = marginals(&pushed, &eve)?;
    let (ap_m, s_ap) = marginals(&states, &[res.reference().to_string()])?;
    let cache = Cached {
        bob: bob_m,
        eve: eve_m,
        aprime: ap_m,
        s_bob,
        s_eve,
        s_aprime: s_ap,
        target: Some(res.marginal().matrix().clone()),
    };
    Ok(search(&cache, caps))
}

/// Best unassisted rate `I(U:B) − I(U:E)` over the grid.
pub fn grid_oracle_unassisted(n: &WiretapChannel, caps: &GridCaps) -> Result<f64> {
    let d = n.input().total_dim();
    check_size(d, caps)?;
    let states = grid_states(d, caps.angles)
        .iter()
        .map(|v| DensityOperator::from_pure(n.input().clone(), v))
        .collect::<Result<Vec<_>>>()?;
    let labels: Vec<&str> = n.input().labels().collect();
    let pushed = states
        .iter()
        .map(|s| apply(n.channel(), s, &labels))
        .collect::<Result<Vec<_>>>()?;
    let (bob_m, s_bob) = marginals(&pushed, n.bob())?;
    let (eve_m, s_eve) = marginals(&pushed, n.eve())?;
    let cache = Cached {
        bob: bob_m,
        eve: eve_m,
        aprime: Vec::new(),
        s_bob,
        s_eve,
        s_aprime: Vec::new(),
        target: None,
    };
    Ok(search(&cache, caps))
}
