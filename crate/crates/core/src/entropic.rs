//! Entropies and information quantities, all in bits.

use serde::{Deserialize, Serialize};

use crate::channels::CqEnsemble;
use crate::qcore::linalg::{self, CMatrix};
use crate::qcore::{partial_trace, DensityOperator};
use crate::{Error, Result};

/// Eigenvalues below this contribute nothing to an entropy.
pub const ENTROPY_CUTOFF: f64 = 1e-14;

/// Members closer than this entrywise are treated as one state in
/// [`holevo_of_matrices`], which then returns exactly zero.
pub const IDENTICAL_MEMBER_TOL: f64 = 1e-14;

/// Logarithm used by every entropy in the crate.
#[inline]
pub fn log(x: f64) -> f64 {
    x.log2()
}

/// An information quantity together with the entropies it was formed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoQuantity {
    pub value: f64,
    pub components: Vec<(String, f64)>,
}

impl InfoQuantity {
    pub fn component(&self, name: &str) -> Option<f64> {
        self.components.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

/// `-Σ p log p` over entries above [`ENTROPY_CUTOFF`].
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    let s: f64 = probs
        .iter()
        .filter(|&&p| p >= ENTROPY_CUTOFF)
        .map(|&p| -p * log(p))
        .sum();
    s.max(0.0)
}

pub(crate) fn matrix_entropy(m: &CMatrix) -> f64 {
    shannon_entropy(&linalg::hermitian_eigenvalues(m))
}

pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    matrix_entropy(rho.matrix())
}

fn joined<S: AsRef<str>>(labels: &[S]) -> String {
    labels.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(" ")
}

fn check_disjoint<S: AsRef<str>>(rho: &DensityOperator, a: &[S], b: &[S]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySelection);
    }
    for l in a.iter().chain(b) {
        rho.space().position(l.as_ref())?;
    }
    if let Some(l) = a.iter().find(|x| b.iter().any(|y| y.as_ref() == x.as_ref())) {
        return Err(Error::Config(format!("partitions overlap on `{}`", l.as_ref())));
    }
    Ok(())
}

/// `I(A:B) = S(A) + S(B) − S(AB)` on the reduced state of `ρ` on `a ∪ b`.
pub fn mutual_information<S: AsRef<str>>(rho: &DensityOperator, part_a: &[S], part_b: &[S]) -> Result<InfoQuantity> {
    check_disjoint(rho, part_a, part_b)?;
    let union: Vec<&str> = part_a.iter().chain(part_b).map(AsRef::as_ref).collect();
    let joint = partial_trace(rho, &union)?;
    let sa = von_neumann_entropy(&partial_trace(&joint, part_a)?);
    let sb = von_neumann_entropy(&partial_trace(&joint, part_b)?);
    let sab = von_neumann_entropy(&joint);
    let (na, nb) = (joined(part_a), joined(part_b));
    Ok(InfoQuantity {
        value: sa + sb - sab,
        components: vec![
            (format!("S({na})"), sa),
            (format!("S({nb})"), sb),
            (format!("S({na} {nb})"), sab),
        ],
    })
}

/// `I(A⟩B) = S(B) − S(AB)` for a state with exactly two factors `A ⊗ B`.
pub fn coherent_information(rho: &DensityOperator) -> Result<f64> {
    let labels: Vec<&str> = rho.space().labels().collect();
    if labels.len() != 2 {
        return Err(Error::InvalidState(format!(
            "coherent information needs a bipartite state, got {}",
            rho.space()
        )));
    }
    coherent_information_between(rho, &labels[..1], &labels[1..])
}

/// `S(B) − S(AB)` on the reduced state of `ρ` on `a ∪ b`.
pub fn coherent_information_between<S: AsRef<str>>(rho: &DensityOperator, part_a: &[S], part_b: &[S]) -> Result<f64> {
    check_disjoint(rho, part_a, part_b)?;
    let union: Vec<&str> = part_a.iter().chain(part_b).map(AsRef::as_ref).collect();
    let joint = partial_trace(rho, &union)?;
    let sb = von_neumann_entropy(&partial_trace(&joint, part_b)?);
    Ok(sb - von_neumann_entropy(&joint))
}

/// `χ = S(Σ q ρ_u) − Σ q S(ρ_u)`.
pub fn holevo_information(ens: &CqEnsemble) -> f64 {
    holevo_quantity(ens).value
}

pub fn holevo_quantity(ens: &CqEnsemble) -> InfoQuantity {
    let mats: Vec<&CMatrix> = ens.states().iter().map(DensityOperator::matrix).collect();
    holevo_of_matrices(ens.probs(), &mats)
}

/// Holevo quantity of members given as raw matrices. Members that agree to
/// within [`IDENTICAL_MEMBER_TOL`] give exactly zero.
pub(crate) fn holevo_of_matrices(probs: &[f64], members: &[&CMatrix]) -> InfoQuantity {
    let first = members[0];
    let d = first.nrows();
    let mut avg = CMatrix::zeros(d, d);
    for (p, m) in probs.iter().zip(members) {
        avg += *m * linalg::c(*p, 0.0);
    }
    let s_avg = matrix_entropy(&avg);
    let identical = members.iter().all(|m| linalg::max_abs_diff(m, first) <= IDENTICAL_MEMBER_TOL);
    let s_cond = if identical {
        s_avg
    } else {
        probs
            .iter()
            .zip(members)
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, m)| p * matrix_entropy(m))
            .sum()
    };
    InfoQuantity {
        value: s_avg - s_cond,
        components: vec![("S(avg)".into(), s_avg), ("Σq S(ρ_u)".into(), s_cond)],
    }
}
