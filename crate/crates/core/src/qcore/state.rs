use serde::{Deserialize, Serialize};

use super::linalg::{self, c, CMatrix, CVector, C64, ZERO};
use super::space::LabeledSpace;
use crate::{Error, Result};

/// Numerical tolerances for state validation and equality checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tol_herm: f64,
    pub tol_psd: f64,
    pub tol_trace: f64,
    pub tol_eq: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_herm: 1e-10,
            tol_psd: 1e-9,
            tol_trace: 1e-10,
            tol_eq: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [self.tol_herm, self.tol_psd, self.tol_trace, self.tol_eq];
        if all.iter().all(|t| t.is_finite() && *t >= 0.0) {
            Ok(())
        } else {
            Err(Error::Config(format!("tolerances must be finite and nonnegative: {self:?}")))
        }
    }
}

/// Hermitian, positive semidefinite, unit-trace operator on a labeled space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    space: LabeledSpace,
    matrix: CMatrix,
}

impl DensityOperator {
    /// Validates against the default [`Tolerances`]. The matrix is replaced by
    /// its Hermitian part; eigenvalues in `[-tol_psd, 0)` are accepted as-is
    /// (see [`DensityOperator::clamped`]).
    pub fn new(space: LabeledSpace, matrix: CMatrix) -> Result<Self> {
        Self::with_tolerances(space, matrix, &Tolerances::default())
    }

    pub fn with_tolerances(space: LabeledSpace, matrix: CMatrix, tol: &Tolerances) -> Result<Self> {
        tol.validate()?;
        let d = space.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::InvalidState(format!(
                "matrix is {}x{} but space {space} has dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("matrix has non-finite entries".into()));
        }
        let defect = linalg::hermiticity_defect(&matrix);
        if defect > tol.tol_herm {
            return Err(Error::InvalidState(format!(
                "not Hermitian: max |M - M†| entry is {defect:.3e} (tol_herm {:.1e})",
                tol.tol_herm
            )));
        }
        let tr = linalg::trace(&matrix).re;
        if (tr - 1.0).abs() > tol.tol_trace {
            return Err(Error::InvalidState(format!(
                "trace is {tr} (tol_trace {:.1e})",
                tol.tol_trace
            )));
        }
        let matrix = linalg::hermitian_part(&matrix);
        let min = linalg::hermitian_eigenvalues(&matrix)
            .last()
            .copied()
            .unwrap_or(0.0);
        if min < -tol.tol_psd {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite: smallest eigenvalue {min:.3e} (tol_psd {:.1e})",
                tol.tol_psd
            )));
        }
        Ok(Self { space, matrix })
    }

    /// Skips validation; the caller guarantees a valid state up to rounding.
    pub(crate) fn from_raw(space: LabeledSpace, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), space.total_dim());
        Self {
            space,
            matrix: linalg::hermitian_part(&matrix),
        }
    }

    /// Rank-one state `|ψ⟩⟨ψ|`; the vector is normalised.
    pub fn from_pure(space: LabeledSpace, amplitudes: &CVector) -> Result<Self> {
        if amplitudes.len() != space.total_dim() {
            return Err(Error::mismatch("pure state amplitudes", space.total_dim(), amplitudes.len()));
        }
        let norm = amplitudes.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState("zero or non-finite amplitude vector".into()));
        }
        let v = amplitudes / c(norm, 0.0);
        Ok(Self::from_raw(space, linalg::outer(&v)))
    }

    /// Computational basis state `|index⟩⟨index|`.
    pub fn basis(space: LabeledSpace, index: usize) -> Result<Self> {
        let d = space.total_dim();
        if index >= d {
            return Err(Error::mismatch("basis index", d, index));
        }
        let mut m = CMatrix::zeros(d, d);
        m[(index, index)] = linalg::ONE;
        Ok(Self { space, matrix: m })
    }

    pub fn maximally_mixed(space: LabeledSpace) -> Self {
        let d = space.total_dim();
        Self {
            matrix: CMatrix::identity(d, d) * c(1.0 / d as f64, 0.0),
            space,
        }
    }

    /// Diagonal state from a probability vector.
    pub fn from_diagonal(space: LabeledSpace, probs: &[f64]) -> Result<Self> {
        let d = space.total_dim();
        if probs.len() != d {
            return Err(Error::mismatch("diagonal state", d, probs.len()));
        }
        let m = CMatrix::from_diagonal(&CVector::from_iterator(d, probs.iter().map(|&p| c(p, 0.0))));
        Self::new(space, m)
    }

    pub fn space(&self) -> &LabeledSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn rank(&self, cutoff: f64) -> usize {
        self.eigenvalues().iter().filter(|&&l| l > cutoff).count()
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (1.0 - self.purity()).abs() <= tol
    }

    /// Amplitude vector of a rank-one state (up to a global phase).
    pub fn pure_amplitudes(&self, tol: f64) -> Option<CVector> {
        let (vals, vecs) = linalg::hermitian_eigen(&self.matrix);
        if (vals[0] - 1.0).abs() > tol {
            return None;
        }
        Some(vecs.column(0).into_owned())
    }

    /// Same matrix with new labels.
    pub fn relabeled<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        Ok(Self {
            space: self.space.relabeled(labels)?,
            matrix: self.matrix.clone(),
        })
    }

    /// Zeroes negative eigenvalues and renormalises.
    pub fn clamped(&self) -> Self {
        let (vals, vecs) = linalg::hermitian_eigen(&self.matrix);
        Self {
            space: self.space.clone(),
            matrix: clamp_spectrum(&vals, &vecs),
        }
    }

    /// Entrywise comparison of matrices on equal spaces.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        linalg::max_abs_diff(&self.matrix, &other.matrix)
    }
}

fn clamp_spectrum(vals: &[f64], vecs: &CMatrix) -> CMatrix {
    let total: f64 = vals.iter().map(|l| l.max(0.0)).sum();
    let n = vals.len();
    let mut scaled = vecs.clone();
    for (j, &l) in vals.iter().enumerate() {
        let s = l.max(0.0) / total;
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    linalg::hermitian_part(&(&scaled * vecs.adjoint()))
}

/// Wire format: `{"factors": [[label, dim], ...], "matrix": [[[re, im], ...], ...]}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct StateWire {
    pub factors: LabeledSpace,
    pub matrix: MatrixWire,
}

/// Row-major complex matrix as nested `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixWire(pub Vec<Vec<[f64; 2]>>);

impl MatrixWire {
    pub fn from_matrix(m: &CMatrix) -> Self {
        Self(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        )
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, |r| r.len());
        if let Some((i, r)) = self.0.iter().enumerate().find(|(_, r)| r.len() != cols) {
            return Err(Error::InvalidState(format!(
                "ragged matrix: row {i} has {} entries, row 0 has {cols}",
                r.len()
            )));
        }
        let mut m = CMatrix::from_element(rows, cols, ZERO);
        for (i, row) in self.0.iter().enumerate() {
            for (j, [re, im]) in row.iter().enumerate() {
                m[(i, j)] = C64::new(*re, *im);
            }
        }
        Ok(m)
    }
}

impl Serialize for DensityOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StateWire {
            factors: self.space.clone(),
            matrix: MatrixWire::from_matrix(&self.matrix),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = StateWire::deserialize(d)?;
        let m = wire.matrix.to_matrix().map_err(serde::de::Error::custom)?;
        DensityOperator::new(wire.factors, m).map_err(serde::de::Error::custom)
    }
}
