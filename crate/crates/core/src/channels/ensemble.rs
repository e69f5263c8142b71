use serde::{Deserialize, Serialize};

use super::channel::{apply, QuantumChannel};
use crate::qcore::linalg::{c, CMatrix, ZERO};
use crate::qcore::{DensityOperator, LabeledSpace};
use crate::{Error, Result};

/// Tolerance on `Σ q(u) = 1`.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Finite ensemble `{q(u), ρ_u}` of states on a common space.
#[derive(Debug, Clone, PartialEq)]
pub struct CqEnsemble {
    labels: Vec<String>,
    probs: Vec<f64>,
    states: Vec<DensityOperator>,
}

impl CqEnsemble {
    pub fn new(labels: Vec<String>, probs: Vec<f64>, states: Vec<DensityOperator>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidEnsemble("empty ensemble".into()));
        }
        if labels.len() != states.len() || probs.len() != states.len() {
            return Err(Error::InvalidEnsemble(format!(
                "{} labels, {} probabilities, {} states",
                labels.len(),
                probs.len(),
                states.len()
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::InvalidEnsemble(format!("duplicate label `{l}`")));
            }
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidEnsemble(format!("invalid probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidEnsemble(format!("probabilities sum to {total}")));
        }
        let space = states[0].space();
        if let Some(s) = states.iter().find(|s| s.space() != space) {
            return Err(Error::InvalidEnsemble(format!(
                "member spaces differ: {} vs {}",
                space,
                s.space()
            )));
        }
        Ok(Self { labels, probs, states })
    }

    /// Labels `0, 1, 2, ...`.
    pub fn from_states(probs: Vec<f64>, states: Vec<DensityOperator>) -> Result<Self> {
        let labels = (0..states.len()).map(|i| i.to_string()).collect();
        Self::new(labels, probs, states)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn states(&self) -> &[DensityOperator] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn space(&self) -> &LabeledSpace {
        self.states[0].space()
    }

    /// `Σ q(u) ρ_u`.
    pub fn average(&self) -> DensityOperator {
        let d = self.states[0].dim();
        let mut m = CMatrix::zeros(d, d);
        for (p, s) in self.probs.iter().zip(&self.states) {
            m += s.matrix() * c(*p, 0.0);
        }
        DensityOperator::from_raw(self.space().clone(), m)
    }

    /// Applies `f` to every member, keeping labels and probabilities.
    pub fn map_states(&self, f: impl Fn(&DensityOperator) -> Result<DensityOperator>) -> Result<Self> {
        let states = self.states.iter().map(f).collect::<Result<Vec<_>>>()?;
        Self::new(self.labels.clone(), self.probs.clone(), states)
    }

    /// Same ensemble with members reordered by `order`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.len() {
            return Err(Error::mismatch("ensemble permutation", self.len(), order.len()));
        }
        Self::new(
            order.iter().map(|&i| self.labels[i].clone()).collect(),
            order.iter().map(|&i| self.probs[i]).collect(),
            order.iter().map(|&i| self.states[i].clone()).collect(),
        )
    }
}

/// Pushes every member through `ch` acting on the factors `on`.
pub fn ensemble_pushforward<S: AsRef<str>>(ens: &CqEnsemble, ch: &QuantumChannel, on: &[S]) -> Result<CqEnsemble> {
    ens.map_states(|s| apply(ch, s, on))
}

/// `Σ q(u) |u⟩⟨u| ⊗ ρ_u` on `register ⊗ member space`.
pub fn cq_state(ens: &CqEnsemble, register: &str) -> Result<DensityOperator> {
    let k = ens.len();
    let reg = LabeledSpace::single(register, k)?;
    let space = reg.concat(ens.space())?;
    let d = ens.states[0].dim();
    let mut m = CMatrix::from_element(k * d, k * d, ZERO);
    for (u, (p, s)) in ens.probs.iter().zip(&ens.states).enumerate() {
        m.view_mut((u * d, u * d), (d, d)).copy_from(&(s.matrix() * c(*p, 0.0)));
    }
    Ok(DensityOperator::from_raw(space, m))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnsembleWire {
    labels: Vec<String>,
    probs: Vec<f64>,
    states: Vec<DensityOperator>,
}

impl Serialize for CqEnsemble {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EnsembleWire {
            labels: self.labels.clone(),
            probs: self.probs.clone(),
            states: self.states.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CqEnsemble {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = EnsembleWire::deserialize(d)?;
        CqEnsemble::new(w.labels, w.probs, w.states).map_err(serde::de::Error::custom)
    }
}
