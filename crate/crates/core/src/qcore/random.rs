//! Random states and unitaries for tests, benches and optimizer restarts.

use rand::Rng;
use rand_distr::StandardNormal;

use super::linalg::{self, c, CMatrix, CVector};
use super::space::LabeledSpace;
use super::state::DensityOperator;

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> num_complex::Complex64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

/// Haar-random unit vector.
pub fn random_pure_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(dim, |_, _| gaussian_complex(rng));
    let n = v.norm();
    v / c(n, 0.0)
}

pub fn random_pure<R: Rng + ?Sized>(space: LabeledSpace, rng: &mut R) -> DensityOperator {
    let v = random_pure_vector(space.total_dim(), rng);
    DensityOperator::from_raw(space, linalg::outer(&v))
}

/// Induced-measure random state of the given rank (`G G† / Tr`).
pub fn random_density<R: Rng + ?Sized>(space: LabeledSpace, rank: usize, rng: &mut R) -> DensityOperator {
    let d = space.total_dim();
    let g = ginibre(d, rank.max(1), rng);
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m).re;
    DensityOperator::from_raw(space, m * c(1.0 / tr, 0.0))
}

/// Haar-random unitary.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    linalg::polar_isometry(&ginibre(dim, dim, rng))
}
