use crate::qcore::linalg::{self, c, CMatrix};
use crate::qcore::DensityOperator;
use crate::{Error, Result};

/// Eigenvalues of the average state at or below this are outside its support.
pub const SUPPORT_CUTOFF: f64 = 1e-12;

/// Pretty-good measurement `D_m = ρ̄^{-1/2} p_m ρ_m ρ̄^{-1/2}` with
/// `ρ̄ = Σ p_m ρ_m`, restricted to the support of `ρ̄`.
#[derive(Debug, Clone)]
pub struct Pgm {
    pub elements: Vec<CMatrix>,
}

pub fn pgm_decoder(states: &[DensityOperator], priors: &[f64]) -> Result<Pgm> {
    if let Some(first) = states.first() {
        if let Some(bad) = states.iter().find(|s| s.space().dims() != first.space().dims()) {
            return Err(Error::space_mismatch("decoder states", first.space().to_string(), bad.space().to_string()));
        }
    }
    let raw: Vec<CMatrix> = states.iter().map(|s| s.matrix().clone()).collect();
    pgm_from_matrices(&raw, priors)
}

pub(crate) fn pgm_from_matrices(states: &[CMatrix], priors: &[f64]) -> Result<Pgm> {
    if states.is_empty() || states.len() != priors.len() {
        return Err(Error::mismatch("decoder priors", states.len(), priors.len()));
    }
    let d = states[0].nrows();
    let mut avg = CMatrix::zeros(d, d);
    for (s, &p) in states.iter().zip(priors) {
        avg += s * c(p, 0.0);
    }
    if !(linalg::trace(&avg).re > SUPPORT_CUTOFF) {
        return Err(Error::InvalidState("average state of the decoder is zero".into()));
    }
    let root = linalg::inv_sqrt_psd(&linalg::hermitian_part(&avg), SUPPORT_CUTOFF);
    let elements = states
        .iter()
        .zip(priors)
        .map(|(s, &p)| linalg::hermitian_part(&(&root * s * &root * c(p, 0.0))))
        .collect();
    Ok(Pgm { elements })
}

impl Pgm {
    /// `Σ p_m Tr(ρ_m D_m)`.
    pub fn success_probability(&self, states: &[DensityOperator], priors: &[f64]) -> f64 {
        let raw: Vec<CMatrix> = states.iter().map(|s| s.matrix().clone()).collect();
        self.success_from_matrices(&raw, priors)
    }

    pub(crate) fn success_from_matrices(&self, states: &[CMatrix], priors: &[f64]) -> f64 {
        self.elements
            .iter()
            .zip(states)
            .zip(priors)
            .map(|((e, s), &p)| p * linalg::trace(&(s * e)).re)
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    /// Largest violation of `D_m ≥ 0` and `Σ D_m ≤ 1`; zero for a valid POVM.
    pub fn validity_defect(&self) -> f64 {
        let d = self.elements.first().map_or(0, CMatrix::nrows);
        let mut sum = CMatrix::zeros(d, d);
        let mut defect: f64 = 0.0;
        for e in &self.elements {
            let min = linalg::hermitian_eigenvalues(e).into_iter().fold(f64::INFINITY, f64::min);
            defect = defect.max(-min);
            sum += e;
        }
        let max = linalg::hermitian_eigenvalues(&sum).into_iter().fold(f64::NEG_INFINITY, f64::max);
        defect.max(max - 1.0).max(0.0)
    }
}
