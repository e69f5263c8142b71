use super::linalg::{self, c, CMatrix, CVector, ZERO};
use super::space::LabeledSpace;
use super::state::DensityOperator;
use crate::{Error, Result};

/// Eigenvalues at or below this are treated as outside the support.
pub const RANK_CUTOFF: f64 = 1e-12;

/// `a ⊗ b` on the concatenated space.
pub fn tensor(a: &DensityOperator, b: &DensityOperator) -> Result<DensityOperator> {
    let space = a.space().concat(b.space())?;
    Ok(DensityOperator::from_raw(space, linalg::kron(a.matrix(), b.matrix())))
}

/// `ρ^{⊗n}` with factor labels suffixed by the copy index (`A` → `A_1`, ...).
pub fn tensor_power(rho: &DensityOperator, n: usize) -> Result<DensityOperator> {
    if n == 0 {
        return Err(Error::Config("tensor power needs n ≥ 1".into()));
    }
    let mut out = rho.relabeled(&rho.space().suffixed("_1").labels().collect::<Vec<_>>())?;
    for k in 2..=n {
        let copy = rho.relabeled(&rho.space().suffixed(&format!("_{k}")).labels().collect::<Vec<_>>())?;
        out = tensor(&out, &copy)?;
    }
    Ok(out)
}

/// Reduced state on `keep`; kept factors retain their original order.
pub fn partial_trace<S: AsRef<str>>(rho: &DensityOperator, keep: &[S]) -> Result<DensityOperator> {
    let pos = rho.space().positions_sorted(keep)?;
    let sub = rho.space().subspace(keep)?;
    let m = linalg::partial_trace_matrix(rho.matrix(), &rho.space().dims(), &pos);
    Ok(DensityOperator::from_raw(sub, m))
}

/// Reorders the tensor factors to the given label order (a permutation of
/// all labels).
pub fn permute<S: AsRef<str>>(rho: &DensityOperator, order: &[S]) -> Result<DensityOperator> {
    let space = rho.space();
    if order.len() != space.len() {
        return Err(Error::mismatch("factor permutation", space.len(), order.len()));
    }
    let mut perm = Vec::with_capacity(order.len());
    for l in order {
        let p = space.position(l.as_ref())?;
        if perm.contains(&p) {
            return Err(Error::DuplicateLabel(l.as_ref().to_string()));
        }
        perm.push(p);
    }
    let new_space = LabeledSpace::new(perm.iter().map(|&p| space.factors()[p].clone()))?;
    let m = linalg::permute_matrix(rho.matrix(), &space.dims(), &perm);
    Ok(DensityOperator::from_raw(new_space, m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purification {
    /// Auxiliary dimension equals the rank.
    Minimal,
    /// Auxiliary system isomorphic to the input, `Σ √λᵢ |i⟩|i⟩` in the
    /// eigenbasis; both marginals equal the input.
    Symmetric,
}

impl Purification {
    /// Auxiliary dimension of the minimal purification of `rho`.
    pub fn minimal_dim(rho: &DensityOperator) -> usize {
        linalg::hermitian_eigenvalues(rho.matrix())
            .iter()
            .filter(|&&l| l > RANK_CUTOFF)
            .count()
            .max(1)
    }
}

/// Purification vector on `ρ.space ⊗ aux` and the auxiliary dimension.
pub fn purification_vector(rho: &DensityOperator, mode: Purification) -> (CVector, usize) {
    let (vals, vecs) = linalg::hermitian_eigen(rho.matrix());
    let d = rho.dim();
    let rank = vals.iter().filter(|&&l| l > RANK_CUTOFF).count().max(1);
    let aux = match mode {
        Purification::Minimal => rank,
        Purification::Symmetric => d,
    };
    let mut psi = CVector::from_element(d * aux, ZERO);
    for (i, &l) in vals.iter().enumerate().take(rank) {
        let w = l.max(0.0).sqrt();
        for s in 0..d {
            let amp = vecs[(s, i)] * w;
            match mode {
                Purification::Minimal => psi[s * aux + i] += amp,
                Purification::Symmetric => {
                    for t in 0..d {
                        psi[s * aux + t] += amp * vecs[(t, i)];
                    }
                }
            }
        }
    }
    (psi, aux)
}

/// Rank-one purification of `rho` with a new factor `aux_label`.
pub fn purify(rho: &DensityOperator, aux_label: &str, mode: Purification) -> Result<DensityOperator> {
    if rho.space().contains(aux_label) {
        return Err(Error::DuplicateLabel(aux_label.to_string()));
    }
    let (psi, aux) = purification_vector(rho, mode);
    let space = rho.space().concat(&LabeledSpace::single(aux_label, aux)?)?;
    DensityOperator::from_pure(space, &psi)
}

fn check_same_dims(a: &DensityOperator, b: &DensityOperator) -> Result<()> {
    if a.space().dims() != b.space().dims() {
        return Err(Error::mismatch("state comparison", a.dim(), b.dim()));
    }
    Ok(())
}

/// `F(ρ, σ) = ‖√ρ √σ‖₁`.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_same_dims(rho, sigma)?;
    Ok(fidelity_matrix(rho.matrix(), sigma.matrix()))
}

pub(crate) fn fidelity_matrix(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    let prod = linalg::sqrt_psd(rho) * linalg::sqrt_psd(sigma);
    linalg::trace_norm(&prod).clamp(0.0, 1.0)
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_same_dims(rho, sigma)?;
    Ok((0.5 * linalg::trace_norm_hermitian(&(rho.matrix() - sigma.matrix()))).clamp(0.0, 1.0))
}

/// Trace norm `‖ρ − σ‖₁`.
pub fn trace_norm_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_same_dims(rho, sigma)?;
    Ok(linalg::trace_norm_hermitian(&(rho.matrix() - sigma.matrix())))
}

/// Outcome of [`uhlmann_fixup`].
#[derive(Debug, Clone)]
pub struct Fixup {
    pub state: DensityOperator,
    /// Trace distance between the input marginal and the target.
    pub marginal_distance: f64,
    /// `‖η − η̃‖₁`.
    pub correction: f64,
}

impl Fixup {
    /// `2√(2δ − δ²)` for the marginal trace distance δ.
    pub fn budget(&self) -> f64 {
        let d = self.marginal_distance;
        2.0 * (2.0 * d - d * d).max(0.0).sqrt()
    }
}

/// Repairs `eta_tilde` so that its marginal on `marginal_labels` equals
/// `target`, moving it by at most `2√(2δ − δ²)` in trace norm.
///
/// Both states are purified; the purification of `target` is aligned with
/// that of `eta_tilde` by the unitary from the polar decomposition of their
/// overlap operator, and the auxiliary system is traced out again.
pub fn uhlmann_fixup<S: AsRef<str>>(
    eta_tilde: &DensityOperator,
    target: &DensityOperator,
    marginal_labels: &[S],
) -> Result<Fixup> {
    let space = eta_tilde.space();
    let m_pos = space.positions_sorted(marginal_labels)?;
    let m_space = space.subspace(marginal_labels)?;
    if m_space.dims() != target.space().dims() {
        return Err(Error::mismatch("uhlmann target marginal", m_space.total_dim(), target.dim()));
    }
    let dims = space.dims();
    let x_pos: Vec<usize> = (0..dims.len()).filter(|p| !m_pos.contains(p)).collect();
    let current = linalg::partial_trace_matrix(eta_tilde.matrix(), &dims, &m_pos);
    let marginal_distance =
        (0.5 * linalg::trace_norm_hermitian(&(&current - target.matrix()))).clamp(0.0, 1.0);
    if marginal_distance == 0.0 {
        return Ok(Fixup {
            state: eta_tilde.clone(),
            marginal_distance,
            correction: 0.0,
        });
    }

    let dx: usize = x_pos.iter().map(|&p| dims[p]).product();
    let dm = m_space.total_dim();
    let total = dx * dm;
    // Order as X ⊗ M.
    let mut perm = x_pos.clone();
    perm.extend(&m_pos);
    let eta_xm = linalg::permute_matrix(eta_tilde.matrix(), &dims, &perm);
    // Canonical purification (√η ⊗ 1)|Γ⟩, as a matrix indexed [(x, m), a].
    let root = linalg::sqrt_psd(&eta_xm);
    // Rows m, columns (x, a).
    let psi_m = CMatrix::from_fn(dm, dx * total, |m, col| {
        let (x, a) = (col / total, col % total);
        root[(x * dm + m, a)]
    });
    let sqrt_target = linalg::sqrt_psd(target.matrix());
    let overlap = &sqrt_target * &psi_m;
    let svd = overlap.svd(true, true);
    let u = svd.u.expect("svd u");
    let v_t = svd.v_t.expect("svd v_t");
    let aligned = &sqrt_target * (u * v_t);
    let p = CMatrix::from_fn(total, total, |row, a| {
        let (x, m) = (row / dm, row % dm);
        aligned[(m, x * total + a)]
    });
    let fixed_xm = &p * p.adjoint();
    let inverse = inverse_permutation(&perm);
    let new_dims: Vec<usize> = perm.iter().map(|&q| dims[q]).collect();
    let fixed = linalg::permute_matrix(&fixed_xm, &new_dims, &inverse);
    let state = DensityOperator::from_raw(space.clone(), fixed);
    let correction = linalg::trace_norm_hermitian(&(state.matrix() - eta_tilde.matrix()));
    Ok(Fixup {
        state,
        marginal_distance,
        correction,
    })
}

pub(crate) fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}

/// Normalised `Σᵢ |i⟩|i⟩ / √d` on two factors of dimension `d`.
pub fn maximally_entangled(label_a: &str, label_b: &str, d: usize) -> Result<DensityOperator> {
    let space = LabeledSpace::new([(label_a, d), (label_b, d)])?;
    let mut v = CVector::from_element(d * d, ZERO);
    for i in 0..d {
        v[i * d + i] = c(1.0, 0.0);
    }
    DensityOperator::from_pure(space, &v)
}
