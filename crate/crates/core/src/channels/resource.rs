//! Resource states and their resource channels.
//!
//! For a resource `ζ` on `A' ⊗ B' ⊗ E'` with full-rank marginal
//! `ζ^{A'} = Σ λᵢ |wᵢ⟩⟨wᵢ|`, the symmetric purification
//! `φ₀ = Σ √λᵢ |wᵢ⟩|wᵢ⟩` on `A' ⊗ A''` determines a unique channel
//! `Z: A'' → B'E'` with `(id ⊗ Z) φ₀ = ζ`, obtained by reading off
//! `Z(|wᵢ⟩⟨wⱼ|) = ⟨wᵢ| ζ |wⱼ⟩ / √(λᵢ λⱼ)`. The same inversion maps a Choi
//! state `η = (ℰ ⊗ id) φ₀` back to its modulation `ℰ`.

use super::channel::{apply, QuantumChannel};
use super::choi::channel_from_action;
use crate::qcore::linalg::{self, c, CMatrix, CVector, ZERO};
use crate::qcore::{partial_trace, permute, DensityOperator, LabeledSpace, Tolerances};
use crate::{Error, Result};

/// Marginal eigenvalues at or below this are outside the support of `ζ^{A'}`.
pub const SUPPORT_CUTOFF: f64 = 1e-10;

/// Largest accepted `λ_max / λ_min` for the inversion weights.
pub const MAX_CONDITION: f64 = 1e10;

/// Eigen-data of a full-rank marginal and the inversion it induces.
#[derive(Debug, Clone)]
struct Weights {
    values: Vec<f64>,
    vectors: CMatrix,
}

impl Weights {
    fn new(marginal: &CMatrix) -> Result<Self> {
        let (values, vectors) = linalg::hermitian_eigen(marginal);
        let min = values.last().copied().unwrap_or(0.0);
        let max = values.first().copied().unwrap_or(0.0);
        if !(min > 0.0) || max / min > MAX_CONDITION {
            return Err(Error::IllConditioned {
                condition: if min > 0.0 { max / min } else { f64::INFINITY },
            });
        }
        Ok(Self { values, vectors })
    }

    fn condition(&self) -> f64 {
        self.values[0] / self.values[self.values.len() - 1]
    }

    fn dim(&self) -> usize {
        self.values.len()
    }

    fn phi0(&self) -> CVector {
        let r = self.dim();
        let mut v = CVector::from_element(r * r, ZERO);
        for (i, &l) in self.values.iter().enumerate() {
            let w = self.vectors.column(i);
            for s in 0..r {
                for t in 0..r {
                    v[s * r + t] += w[s] * w[t] * l.sqrt();
                }
            }
        }
        v
    }

    /// Linear map determined by `x = (id_ref ⊗ Φ)(φ₀)` where `x` is ordered as
    /// `ref ⊗ other`; returns `Φ(|a⟩⟨b|)` for all matrix units.
    fn invert(&self, x: &CMatrix, other: usize) -> impl Fn(usize, usize) -> CMatrix {
        let r = self.dim();
        // blocks[(i, j)] = ⟨wᵢ| x |wⱼ⟩ / √(λᵢ λⱼ)
        let mut blocks = Vec::with_capacity(r * r);
        for i in 0..r {
            for j in 0..r {
                let mut acc = CMatrix::zeros(other, other);
                for a in 0..r {
                    let wa = self.vectors[(a, i)].conj();
                    if wa == ZERO {
                        continue;
                    }
                    for b in 0..r {
                        let wb = self.vectors[(b, j)];
                        if wb == ZERO {
                            continue;
                        }
                        acc += x.view((a * other, b * other), (other, other)) * (wa * wb);
                    }
                }
                blocks.push(acc * c(1.0 / (self.values[i] * self.values[j]).sqrt(), 0.0));
            }
        }
        let vectors = self.vectors.clone();
        move |a, b| {
            let mut out = CMatrix::zeros(other, other);
            for i in 0..r {
                let wi = vectors[(a, i)].conj();
                if wi == ZERO {
                    continue;
                }
                for j in 0..r {
                    let wj = vectors[(b, j)];
                    if wj == ZERO {
                        continue;
                    }
                    out += &blocks[i * r + j] * (wi * wj);
                }
            }
            out
        }
    }
}

/// A resource state together with its symmetric purification and resource
/// channel.
#[derive(Debug, Clone)]
pub struct ResourceState {
    zeta: DensityOperator,
    alice: String,
    bob: String,
    eve: String,
    reference: String,
    support: CMatrix,
    working: DensityOperator,
    marginal: DensityOperator,
    phi0: DensityOperator,
    z_channel: QuantumChannel,
    full_rank: bool,
    weights: Weights,
}

impl ResourceState {
    /// `|0⟩⟨0|` on one-dimensional `A'`, `B'`, `E'`.
    pub fn trivial() -> Self {
        let space = LabeledSpace::new([("A'", 1), ("B'", 1), ("E'", 1)]).expect("static labels");
        channel_from_resource_state(&DensityOperator::basis(space, 0).expect("dim 1"))
            .expect("trivial resource is valid")
    }

    /// The state as given.
    pub fn zeta(&self) -> &DensityOperator {
        &self.zeta
    }

    /// `ζ` with `A'` restricted to the support of its marginal.
    pub fn working(&self) -> &DensityOperator {
        &self.working
    }

    /// `ζ^{A'}` on the restricted `A'`.
    pub fn marginal(&self) -> &DensityOperator {
        &self.marginal
    }

    /// Pure state on `A' ⊗ A''` with both marginals equal to [`Self::marginal`].
    pub fn phi0(&self) -> &DensityOperator {
        &self.phi0
    }

    pub fn z_channel(&self) -> &QuantumChannel {
        &self.z_channel
    }

    /// Isometry from the restricted `A'` into the original one (columns are
    /// marginal eigenvectors; the identity when the marginal had full rank).
    pub fn support(&self) -> &CMatrix {
        &self.support
    }

    pub fn full_rank(&self) -> bool {
        self.full_rank
    }

    pub fn condition_number(&self) -> f64 {
        self.weights.condition()
    }

    pub fn alice(&self) -> &str {
        &self.alice
    }

    pub fn bob(&self) -> &str {
        &self.bob
    }

    pub fn eve(&self) -> &str {
        &self.eve
    }

    /// Label of `A''`, the input of the resource channel.
    pub fn reference(&self) -> &str {
        &self.reference
    }

    /// Dimension of the restricted `A'`.
    pub fn alice_dim(&self) -> usize {
        self.marginal.dim()
    }

    /// `η = (ℰ ⊗ id_{A''}) φ₀`, ordered as `ℰ.output ⊗ A''`.
    pub fn choi_state(&self, modulation: &QuantumChannel) -> Result<DensityOperator> {
        let eta = apply(modulation, &self.phi0, &[self.alice.as_str()])?;
        let mut order: Vec<String> = modulation.output().labels().map(str::to_string).collect();
        order.push(self.reference.clone());
        permute(&eta, &order)
    }

    /// Inverse of [`Self::choi_state`].
    pub fn modulation_from_choi(&self, eta: &DensityOperator) -> Result<QuantumChannel> {
        modulation_with_weights(eta, &self.marginal, &self.weights, &Tolerances::default())
    }

    /// `(ℰ ⊗ id_{B'E'}) ζ`, ordered as `ℰ.output ⊗ B' ⊗ E'`.
    pub fn modulate(&self, modulation: &QuantumChannel) -> Result<DensityOperator> {
        let out = apply(modulation, &self.working, &[self.alice.as_str()])?;
        let mut order: Vec<String> = modulation.output().labels().map(str::to_string).collect();
        order.push(self.bob.clone());
        order.push(self.eve.clone());
        permute(&out, &order)
    }
}

/// Builds the resource channel of a tripartite state on `A' ⊗ B' ⊗ E'`
/// (factors in that order, labels taken from the state).
pub fn channel_from_resource_state(zeta: &DensityOperator) -> Result<ResourceState> {
    channel_from_resource_state_with(zeta, &Tolerances::default())
}

pub fn channel_from_resource_state_with(zeta: &DensityOperator, tol: &Tolerances) -> Result<ResourceState> {
    let space = zeta.space();
    if space.len() != 3 {
        return Err(Error::InvalidState(format!(
            "resource state needs exactly three factors (A', B', E'), got {space}"
        )));
    }
    let labels: Vec<String> = space.labels().map(str::to_string).collect();
    let (alice, bob, eve) = (labels[0].clone(), labels[1].clone(), labels[2].clone());
    let reference = format!("{alice}'");
    if labels.contains(&reference) {
        return Err(Error::DuplicateLabel(reference));
    }
    let da = space.factors()[0].1;
    let dbe = space.factors()[1].1 * space.factors()[2].1;

    let full_marginal = partial_trace(zeta, &[alice.as_str()])?;
    let (vals, vecs) = linalg::hermitian_eigen(full_marginal.matrix());
    let rank = vals.iter().filter(|&&l| l > SUPPORT_CUTOFF).count();
    if rank == 0 {
        return Err(Error::InvalidState("resource marginal on A' vanishes".into()));
    }
    let full_rank = rank == da;
    let support = if full_rank {
        linalg::identity(da)
    } else {
        vecs.columns(0, rank).into_owned()
    };
    let working_space = LabeledSpace::new([
        (alice.clone(), rank),
        (bob.clone(), space.factors()[1].1),
        (eve.clone(), space.factors()[2].1),
    ])?;
    let working = if full_rank {
        zeta.clone()
    } else {
        let lift = linalg::kron(&support, &linalg::identity(dbe));
        let m = lift.adjoint() * zeta.matrix() * &lift;
        let tr = linalg::trace(&m).re;
        DensityOperator::from_raw(working_space.clone(), m * c(1.0 / tr, 0.0))
    };
    let marginal = partial_trace(&working, &[alice.as_str()])?;
    let weights = Weights::new(marginal.matrix())?;

    let phi0_space = LabeledSpace::new([(alice.clone(), rank), (reference.clone(), rank)])?;
    let phi0 = DensityOperator::from_pure(phi0_space, &weights.phi0())?;

    let z_input = LabeledSpace::single(reference.clone(), rank)?;
    let z_output = working_space.subspace(&[bob.as_str(), eve.as_str()])?;
    let action = weights.invert(working.matrix(), dbe);
    let z_channel = channel_from_action(z_input, z_output, action, tol)?;

    let rebuilt = apply(&z_channel, &phi0, &[reference.as_str()])?;
    let residual = linalg::trace_norm_hermitian(&(rebuilt.matrix() - working.matrix()));
    if residual > tol.tol_eq {
        return Err(Error::NotCptp(format!(
            "resource channel reproduces ζ only to {residual:.3e} in trace norm (condition {:.3e})",
            weights.condition()
        )));
    }
    Ok(ResourceState {
        zeta: zeta.clone(),
        alice,
        bob,
        eve,
        reference,
        support,
        working,
        marginal,
        phi0,
        z_channel,
        full_rank,
        weights,
    })
}

/// Recovers the modulation `ℰ: A' → A` from its Choi state
/// `η = (ℰ ⊗ id)(φ₀)` on `A ⊗ A''`, where `φ₀` is the symmetric
/// purification of `zeta_marginal`. The last factor of `eta` is `A''`.
pub fn modulation_from_choi(eta: &DensityOperator, zeta_marginal: &DensityOperator) -> Result<QuantumChannel> {
    let weights = Weights::new(zeta_marginal.matrix())?;
    modulation_with_weights(eta, zeta_marginal, &weights, &Tolerances::default())
}

fn modulation_with_weights(
    eta: &DensityOperator,
    marginal: &DensityOperator,
    weights: &Weights,
    tol: &Tolerances,
) -> Result<QuantumChannel> {
    let space = eta.space();
    let n = space.len();
    if n < 2 {
        return Err(Error::InvalidState(format!("Choi state needs an output and a reference factor, got {space}")));
    }
    let r = weights.dim();
    if space.factors()[n - 1].1 != r {
        return Err(Error::mismatch("Choi reference factor", r, space.factors()[n - 1].1));
    }
    let dims = space.dims();
    let ref_marginal = linalg::partial_trace_matrix(eta.matrix(), &dims, &[n - 1]);
    let dev = linalg::trace_norm_hermitian(&(&ref_marginal - marginal.matrix()));
    if dev > tol.tol_eq {
        return Err(Error::InvalidState(format!(
            "Choi state marginal differs from ζ^A' by {dev:.3e} in trace norm"
        )));
    }
    let output = LabeledSpace::new(space.factors()[..n - 1].iter().cloned())?;
    let dout = output.total_dim();
    let mut perm = vec![n - 1];
    perm.extend(0..n - 1);
    let ref_first = linalg::permute_matrix(eta.matrix(), &dims, &perm);
    let action = weights.invert(&ref_first, dout);
    channel_from_action(marginal.space().clone(), output, action, tol)
}
