//! Single-letter rate functionals of the assisted wiretap setting.
//!
//! Ensembles for the assisted functionals have members `C(u)` on `A ⊗ A'`:
//! the leading factors match the channel input dimension by dimension and the
//! last factor is Alice's share of the resource, either on the full `A'` of
//! `ζ` or on its restriction to the support of `ζ^{A'}`.

use serde::{Deserialize, Serialize};

use crate::channels::{apply, cq_state, CqEnsemble, QuantumChannel, ResourceState, WiretapChannel};
use crate::entropic::{holevo_of_matrices, InfoQuantity};
use crate::qcore::linalg::{self, c, CMatrix, CVector};
use crate::qcore::{partial_trace, permute, DensityOperator, LabeledSpace};
use crate::{Error, Result};

/// Average-marginal residuals at or below this count as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// Label of the classical register in `β` and `γ`.
pub const REGISTER: &str = "U";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateMode {
    Theorem1,
    Trivial,
    Unassisted,
}

impl std::fmt::Display for RateMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RateMode::Theorem1 => "theorem1",
            RateMode::Trivial => "trivial",
            RateMode::Unassisted => "unassisted",
        })
    }
}

impl std::str::FromStr for RateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorem1" => Ok(RateMode::Theorem1),
            "trivial" => Ok(RateMode::Trivial),
            "unassisted" => Ok(RateMode::Unassisted),
            other => Err(Error::Config(format!(
                "unknown mode `{other}` (expected theorem1, trivial or unassisted)"
            ))),
        }
    }
}

/// Values in bits. Negative rates are kept as computed; the achievable rate
/// is `max(0, rate)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub mode: RateMode,
    pub rate: f64,
    pub i_u_bb: f64,
    pub i_u_ee: f64,
    pub i_u_aprime: f64,
    pub constraint_residual: f64,
    pub feasible: bool,
    /// Entropies behind the three mutual informations.
    pub components: Vec<(String, f64)>,
}

impl RateReport {
    fn assemble(
        mode: RateMode,
        bb: InfoQuantity,
        ee: InfoQuantity,
        aprime: Option<InfoQuantity>,
        constraint_residual: f64,
    ) -> Self {
        let mut components = Vec::new();
        let mut push = |name: &str, q: &InfoQuantity| {
            for (k, v) in &q.components {
                components.push((format!("{name} {k}"), *v));
            }
        };
        push("I(U:BB')", &bb);
        push("I(U:EE')", &ee);
        if let Some(a) = &aprime {
            push("I(U:A')", a);
        }
        let i_u_aprime = aprime.map_or(0.0, |a| a.value);
        let rate = match mode {
            RateMode::Theorem1 => bb.value - ee.value.max(i_u_aprime),
            RateMode::Trivial | RateMode::Unassisted => bb.value - ee.value,
        };
        Self {
            mode,
            rate,
            i_u_bb: bb.value,
            i_u_ee: ee.value,
            i_u_aprime,
            constraint_residual,
            feasible: constraint_residual <= FEASIBILITY_TOL,
            components,
        }
    }

    pub fn operational_rate(&self) -> f64 {
        self.rate.max(0.0)
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} rate {:.6} bits: I(U:BB')={:.6} I(U:EE')={:.6}",
            self.mode, self.rate, self.i_u_bb, self.i_u_ee
        );
        if self.mode == RateMode::Theorem1 {
            s.push_str(&format!(" I(U:A')={:.6}", self.i_u_aprime));
        }
        s.push_str(&format!(" residual={:.2e}", self.constraint_residual));
        if !self.feasible {
            s.push_str(" (infeasible)");
        }
        if self.rate < 0.0 {
            s.push_str(" (negative; achievable rate is 0)");
        }
        s
    }
}

/// Where the members of an assisted ensemble live relative to the resource.
struct Layout {
    /// Labels of `A` (the channel input) followed by `A''`.
    labels: Vec<String>,
    /// Members carry the full, rank-deficient `A'` and must be compressed.
    compress: bool,
}

fn layout(ens: &CqEnsemble, n: &QuantumChannel, res: &ResourceState) -> Result<Layout> {
    let dims = ens.space().dims();
    let nd = n.input().dims();
    if dims.len() != nd.len() + 1 || dims[..nd.len()] != nd[..] {
        return Err(Error::space_mismatch(
            "ensemble members (channel input ⊗ A')",
            format!("{}⊗A'", n.input()),
            ens.space().to_string(),
        ));
    }
    let last = dims[nd.len()];
    let full = res.zeta().space().factors()[0].1;
    let compress = if last == res.alice_dim() {
        false
    } else if last == full {
        true
    } else {
        return Err(Error::mismatch("A' factor of ensemble members", res.alice_dim(), last));
    };
    let mut labels: Vec<String> = n.input().labels().map(str::to_string).collect();
    labels.push(res.reference().to_string());
    Ok(Layout { labels, compress })
}

/// Member on `A ⊗ A''` with `A'` restricted to the support of `ζ^{A'}`.
fn working_member(member: &DensityOperator, layout: &Layout, res: &ResourceState) -> Result<DensityOperator> {
    let space = LabeledSpace::new(
        layout
            .labels
            .iter()
            .zip(member.space().dims())
            .map(|(l, d)| (l.clone(), d)),
    )?;
    if !layout.compress {
        return Ok(DensityOperator::from_raw(space, member.matrix().clone()));
    }
    let da = space.total_dim() / space.factors().last().map_or(1, |f| f.1);
    let lift = linalg::kron(&linalg::identity(da), res.support());
    let m = lift.adjoint() * member.matrix() * &lift;
    let tr = linalg::trace(&m).re;
    if !(tr > 0.0) {
        return Err(Error::Infeasible(
            "ensemble member has no weight on the support of ζ^A'".into(),
        ));
    }
    let mut dims = space.dims();
    *dims.last_mut().expect("non-empty") = res.alice_dim();
    let compressed = LabeledSpace::new(layout.labels.iter().cloned().zip(dims))?;
    Ok(DensityOperator::from_raw(compressed, m * c(1.0 / tr, 0.0)))
}

/// Output labels of `γ` after the register: Bob's, `B'`, Eve's, `E'`.
fn gamma_order(n: &WiretapChannel, res: &ResourceState) -> (Vec<String>, Vec<String>) {
    let mut bob = n.bob().to_vec();
    bob.push(res.bob().to_string());
    let mut eve = n.eve().to_vec();
    eve.push(res.eve().to_string());
    (bob, eve)
}

/// `(𝒩 ⊗ 𝒵) C` ordered as Bob, `B'`, Eve, `E'`.
fn push_member(
    member: &DensityOperator,
    layout: &Layout,
    n: &WiretapChannel,
    res: &ResourceState,
) -> Result<DensityOperator> {
    let w = working_member(member, layout, res)?;
    let after_n = apply(n.channel(), &w, &layout.labels[..layout.labels.len() - 1])?;
    let after_z = apply(res.z_channel(), &after_n, &[res.reference()])?;
    let (bob, eve) = gamma_order(n, res);
    let order: Vec<String> = bob.into_iter().chain(eve).collect();
    permute(&after_z, &order)
}

fn holevo_on(probs: &[f64], members: &[DensityOperator], keep: &[String]) -> Result<InfoQuantity> {
    let marginals = members
        .iter()
        .map(|m| partial_trace(m, keep).map(DensityOperator::into_matrix))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&CMatrix> = marginals.iter().collect();
    Ok(holevo_of_matrices(probs, &refs))
}

/// `β = Σ q(u) |u⟩⟨u| ⊗ C(u)` on `U ⊗ A ⊗ A'`.
pub fn build_beta(ens: &CqEnsemble) -> Result<DensityOperator> {
    cq_state(ens, REGISTER)
}

/// `γ = Σ q(u) |u⟩⟨u| ⊗ (𝒩 ⊗ 𝒵) C(u)` on `U ⊗ B ⊗ B' ⊗ E ⊗ E'`.
pub fn build_gamma(ens: &CqEnsemble, n: &WiretapChannel, res: &ResourceState) -> Result<DensityOperator> {
    let layout = layout(ens, n.channel(), res)?;
    let pushed = ens.map_states(|m| push_member(m, &layout, n, res))?;
    cq_state(&pushed, REGISTER)
}

/// `‖Σ q(u) Tr_A C(u) − ζ^{A'}‖₁`.
pub fn marginal_constraint_residual(ens: &CqEnsemble, res: &ResourceState) -> Result<f64> {
    let space = ens.space();
    let last = space.len() - 1;
    let d = space.factors()[last].1;
    let target = if d == res.alice_dim() {
        res.marginal().matrix().clone()
    } else {
        partial_trace(res.zeta(), &[res.alice()])?.into_matrix()
    };
    if target.nrows() != d {
        return Err(Error::mismatch("A' factor of ensemble members", target.nrows(), d));
    }
    let avg = ens.average();
    let marginal = linalg::partial_trace_matrix(avg.matrix(), &space.dims(), &[last]);
    Ok(linalg::trace_norm_hermitian(&(marginal - target)))
}

/// `I(U:BB')_γ − max(I(U:EE')_γ, I(U:A')_β)`.
pub fn theorem1_rate(ens: &CqEnsemble, n: &WiretapChannel, res: &ResourceState) -> Result<RateReport> {
    let layout = layout(ens, n.channel(), res)?;
    let members = ens
        .states()
        .iter()
        .map(|m| push_member(m, &layout, n, res))
        .collect::<Result<Vec<_>>>()?;
    let (bob, eve) = gamma_order(n, res);
    let bb = holevo_on(ens.probs(), &members, &bob)?;
    let ee = holevo_on(ens.probs(), &members, &eve)?;
    let last = ens.space().labels().last().expect("non-empty").to_string();
    let aprime = holevo_on(ens.probs(), ens.states(), &[last])?;
    let residual = marginal_constraint_residual(ens, res)?;
    Ok(RateReport::assemble(RateMode::Theorem1, bb, ee, Some(aprime), residual))
}

/// `I(U:BB') − I(U:EE')` for members `(𝒩∘ℰ_u ⊗ id_{B'E'}) ζ`.
pub fn trivial_rate(
    probs: &[f64],
    modulations: &[QuantumChannel],
    n: &WiretapChannel,
    res: &ResourceState,
) -> Result<RateReport> {
    if probs.len() != modulations.len() || modulations.is_empty() {
        return Err(Error::mismatch("modulations", probs.len(), modulations.len()));
    }
    let mut members = Vec::with_capacity(modulations.len());
    for e in modulations {
        if e.input_dim() != res.alice_dim() {
            return Err(Error::mismatch("modulation input (A')", res.alice_dim(), e.input_dim()));
        }
        if e.output().dims() != n.input().dims() {
            return Err(Error::space_mismatch(
                "modulation output",
                n.input().to_string(),
                e.output().to_string(),
            ));
        }
        let e = e.with_output_labels(&n.input().labels().collect::<Vec<_>>())?;
        let modulated = res.modulate(&e)?;
        let out = apply(n.channel(), &modulated, &n.input().labels().collect::<Vec<_>>())?;
        let (bob, eve) = gamma_order(n, res);
        let order: Vec<String> = bob.into_iter().chain(eve).collect();
        members.push(permute(&out, &order)?);
    }
    let (bob, eve) = gamma_order(n, res);
    let bb = holevo_on(probs, &members, &bob)?;
    let ee = holevo_on(probs, &members, &eve)?;
    Ok(RateReport::assemble(RateMode::Trivial, bb, ee, None, 0.0))
}

/// Trivial rate of the modulations recovered from the Choi states `C(u)`.
/// Every member must have the exact marginal `ζ^{A'}`.
pub fn trivial_rate_from_choi(ens: &CqEnsemble, n: &WiretapChannel, res: &ResourceState) -> Result<RateReport> {
    let layout = layout(ens, n.channel(), res)?;
    let modulations = ens
        .states()
        .iter()
        .map(|m| {
            let w = working_member(m, &layout, res)?;
            res.modulation_from_choi(&w).map_err(|e| match e {
                Error::InvalidState(msg) => Error::Infeasible(format!("member is not a Choi state of ζ^A': {msg}")),
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    trivial_rate(ens.probs(), &modulations, n, res)
}

/// `I(U:B) − I(U:E)` for an ensemble on the channel input.
pub fn unassisted_rate(ens: &CqEnsemble, n: &WiretapChannel) -> Result<RateReport> {
    if ens.space().dims() != n.input().dims() {
        return Err(Error::space_mismatch("ensemble members", n.input().to_string(), ens.space().to_string()));
    }
    let labels: Vec<&str> = ens.space().labels().collect();
    let members = ens
        .states()
        .iter()
        .map(|m| apply(n.channel(), m, &labels))
        .collect::<Result<Vec<_>>>()?;
    let bb = holevo_on(ens.probs(), &members, n.bob())?;
    let ee = holevo_on(ens.probs(), &members, n.eve())?;
    Ok(RateReport::assemble(RateMode::Unassisted, bb, ee, None, 0.0))
}

/// Diagonal state `Σ P(x,y,z) |x⟩⟨x| ⊗ |y⟩⟨y| ⊗ |z⟩⟨z|` on `A' ⊗ B' ⊗ E'`,
/// with `pmf[x][y][z]`.
pub fn classical_embed(pmf: &[Vec<Vec<f64>>]) -> Result<DensityOperator> {
    let dx = pmf.len();
    let dy = pmf.first().map_or(0, Vec::len);
    let dz = pmf.first().and_then(|r| r.first()).map_or(0, Vec::len);
    if dx == 0 || dy == 0 || dz == 0 {
        return Err(Error::InvalidState("empty joint distribution".into()));
    }
    let mut flat = Vec::with_capacity(dx * dy * dz);
    for row in pmf {
        if row.len() != dy || row.iter().any(|r| r.len() != dz) {
            return Err(Error::InvalidState("joint distribution is not rectangular".into()));
        }
        flat.extend(row.iter().flatten().copied());
    }
    if let Some(p) = flat.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
        return Err(Error::InvalidState(format!("negative or invalid probability {p}")));
    }
    let total: f64 = flat.iter().sum();
    if (total - 1.0).abs() > crate::channels::PROB_SUM_TOL {
        return Err(Error::InvalidState(format!("probabilities sum to {total}")));
    }
    let space = LabeledSpace::new([("A'", dx), ("B'", dy), ("E'", dz)])?;
    DensityOperator::from_diagonal(space, &flat)
}


/// One-letter data of the assisted code for each label `u`.
pub(crate) struct Letters {
    /// Bob's and Eve's parts of `(𝒩 ⊗ 𝒵) C(u)`.
    pub bob: Vec<CMatrix>,
    pub eve: Vec<CMatrix>,
    /// `C(u)` on `A ⊗ A''`, and the dimensions of `A` and `A''`.
    pub members: Vec<CMatrix>,
    pub member_dims: [usize; 2],
    /// `ζ^{A''}`.
    pub target: CMatrix,
}

pub(crate) fn letters(ens: &CqEnsemble, n: &WiretapChannel, res: &ResourceState) -> Result<Letters> {
    let layout = layout(ens, n.channel(), res)?;
    let (bob_labels, eve_labels) = gamma_order(n, res);
    let mut out = Letters {
        bob: Vec::with_capacity(ens.len()),
        eve: Vec::with_capacity(ens.len()),
        members: Vec::with_capacity(ens.len()),
        member_dims: [n.input().total_dim(), res.alice_dim()],
        target: res.marginal().matrix().clone(),
    };
    for m in ens.states() {
        let w = working_member(m, &layout, res)?;
        let pushed = push_member(m, &layout, n, res)?;
        out.bob.push(partial_trace(&pushed, &bob_labels)?.into_matrix());
        out.eve.push(partial_trace(&pushed, &eve_labels)?.into_matrix());
        out.members.push(w.into_matrix());
    }
    Ok(out)
}

/// Rate functional on raw member matrices, used as a search objective.
/// Members are on `A ⊗ A''` (assisted) or `A` (unassisted), unlabelled.
pub(crate) struct Compiled {
    /// Linear maps from row-major `vec C` to row-major Bob and Eve marginals.
    to_bob: (CMatrix, usize),
    to_eve: (CMatrix, usize),
    /// Member dims and the target `ζ^{A''}` for the assisted functional.
    assisted: Option<(Vec<usize>, CMatrix)>,
}

fn marginal_map(images: &[CMatrix], dims: &[usize], keep: &[usize]) -> (CMatrix, usize) {
    let d: usize = keep.iter().map(|&k| dims[k]).product();
    let mut map = CMatrix::zeros(d * d, images.len());
    for (col, img) in images.iter().enumerate() {
        let m = linalg::partial_trace_matrix(img, dims, keep);
        for i in 0..d {
            for j in 0..d {
                map[(i * d + j, col)] = m[(i, j)];
            }
        }
    }
    (map, d)
}

fn apply_map((map, d): &(CMatrix, usize), member: &CMatrix) -> CMatrix {
    let n = member.nrows();
    let v = CVector::from_fn(n * n, |k, _| member[(k / n, k % n)]);
    let w = map * v;
    CMatrix::from_fn(*d, *d, |i, j| w[i * d + j])
}

impl Compiled {
    fn from_channel(ch: &QuantumChannel, bob: &[String], eve: &[String]) -> Result<Self> {
        let out = ch.output();
        let positions = |ls: &[String]| ls.iter().map(|l| out.position(l)).collect::<Result<Vec<_>>>();
        let images = ch.action_on_matrix_units();
        let dims = out.dims();
        let mut bob = positions(bob)?;
        let mut eve = positions(eve)?;
        bob.sort_unstable();
        eve.sort_unstable();
        Ok(Self {
            to_bob: marginal_map(&images, &dims, &bob),
            to_eve: marginal_map(&images, &dims, &eve),
            assisted: None,
        })
    }

    pub(crate) fn theorem1(n: &WiretapChannel, res: &ResourceState) -> Result<Self> {
        let ch = n.channel().tensor(res.z_channel())?;
        let (bob, eve) = gamma_order(n, res);
        let mut c = Self::from_channel(&ch, &bob, &eve)?;
        let mut dims = n.input().dims();
        dims.push(res.alice_dim());
        c.assisted = Some((dims, res.marginal().matrix().clone()));
        Ok(c)
    }

    pub(crate) fn unassisted(n: &WiretapChannel) -> Result<Self> {
        Self::from_channel(n.channel(), n.bob(), n.eve())
    }

    /// Rate and average-marginal residual.
    pub(crate) fn evaluate(&self, probs: &[f64], members: &[CMatrix]) -> (f64, f64) {
        let holevo = |ms: &[CMatrix]| holevo_of_matrices(probs, &ms.iter().collect::<Vec<_>>()).value;
        let bob: Vec<CMatrix> = members.iter().map(|m| apply_map(&self.to_bob, m)).collect();
        let eve: Vec<CMatrix> = members.iter().map(|m| apply_map(&self.to_eve, m)).collect();
        let bb = holevo(&bob);
        let ee = holevo(&eve);
        let Some((dims, target)) = &self.assisted else {
            return (bb - ee, 0.0);
        };
        let last = [dims.len() - 1];
        let aprime: Vec<CMatrix> = members
            .iter()
            .map(|m| linalg::partial_trace_matrix(m, dims, &last))
            .collect();
        let mut avg = -target.clone();
        for (q, m) in probs.iter().zip(&aprime) {
            avg += m * c(*q, 0.0);
        }
        (bb - ee.max(holevo(&aprime)), linalg::trace_norm_hermitian(&avg))
    }
}
