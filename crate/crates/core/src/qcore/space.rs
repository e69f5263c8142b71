use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Ordered list of named tensor factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<(String, usize)>", into = "Vec<(String, usize)>")]
pub struct LabeledSpace {
    factors: Vec<(String, usize)>,
}

impl LabeledSpace {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let factors: Vec<(String, usize)> =
            factors.into_iter().map(|(l, d)| (l.into(), d)).collect();
        for (i, (label, dim)) in factors.iter().enumerate() {
            if *dim == 0 {
                return Err(Error::InvalidSpace(format!("factor `{label}` has dimension 0")));
            }
            if factors[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self { factors })
    }

    /// Single-factor space.
    pub fn single(label: impl Into<String>, dim: usize) -> Result<Self> {
        Self::new([(label.into(), dim)])
    }

    /// The zero-factor space of dimension one.
    pub fn trivial() -> Self {
        Self { factors: Vec::new() }
    }

    pub fn factors(&self) -> &[(String, usize)] {
        &self.factors
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.factors.iter().map(|(l, _)| l.as_str())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|(_, d)| *d).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|(_, d)| *d).product()
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.factors.iter().any(|(l, _)| l == label)
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.factors[self.position(label)?].1)
    }

    /// Positions of `labels`, validated and sorted ascending.
    pub(crate) fn positions_sorted<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        if labels.is_empty() {
            return Err(Error::EmptySelection);
        }
        let mut pos = Vec::with_capacity(labels.len());
        for l in labels {
            let p = self.position(l.as_ref())?;
            if pos.contains(&p) {
                return Err(Error::DuplicateLabel(l.as_ref().to_string()));
            }
            pos.push(p);
        }
        pos.sort_unstable();
        Ok(pos)
    }

    /// Sub-space of the named factors in their original order.
    pub fn subspace<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let pos = self.positions_sorted(labels)?;
        Ok(Self {
            factors: pos.iter().map(|&p| self.factors[p].clone()).collect(),
        })
    }

    /// Labels not in `labels`, original order.
    pub fn complement<S: AsRef<str>>(&self, labels: &[S]) -> Vec<String> {
        self.factors
            .iter()
            .filter(|(l, _)| !labels.iter().any(|s| s.as_ref() == l))
            .map(|(l, _)| l.clone())
            .collect()
    }

    pub fn concat(&self, other: &Self) -> Result<Self> {
        if let Some((l, _)) = other.factors.iter().find(|(l, _)| self.contains(l)) {
            return Err(Error::DuplicateLabel(l.clone()));
        }
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Ok(Self { factors })
    }

    /// Same dimensions, new labels.
    pub fn relabeled<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        if labels.len() != self.factors.len() {
            return Err(Error::mismatch("relabel", self.factors.len(), labels.len()));
        }
        Self::new(
            labels
                .iter()
                .zip(&self.factors)
                .map(|(l, (_, d))| (l.as_ref().to_string(), *d)),
        )
    }

    /// Same factors, each label suffixed.
    pub fn suffixed(&self, suffix: &str) -> Self {
        Self {
            factors: self
                .factors
                .iter()
                .map(|(l, d)| (format!("{l}{suffix}"), *d))
                .collect(),
        }
    }
}

impl TryFrom<Vec<(String, usize)>> for LabeledSpace {
    type Error = Error;

    fn try_from(v: Vec<(String, usize)>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<LabeledSpace> for Vec<(String, usize)> {
    fn from(s: LabeledSpace) -> Self {
        s.factors
    }
}

impl std::fmt::Display for LabeledSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|(l, d)| format!("{l}[{d}]")).collect();
        if parts.is_empty() {
            write!(f, "()")
        } else {
            write!(f, "{}", parts.join("⊗"))
        }
    }
}
