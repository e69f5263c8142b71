use serde::{Deserialize, Serialize};

use crate::qcore::linalg::{self, c, CMatrix, ZERO};
use crate::qcore::{DensityOperator, LabeledSpace, MatrixWire};
use crate::{Error, Result};

/// Tolerance on `Σ K†K = 1` enforced at construction.
pub const CPTP_TOL: f64 = 1e-9;

/// CPTP map given by Kraus operators (`output_dim × input_dim`).
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    input: LabeledSpace,
    output: LabeledSpace,
    kraus: Vec<CMatrix>,
}

impl QuantumChannel {
    pub fn new(input: LabeledSpace, output: LabeledSpace, kraus: Vec<CMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidChannel("no Kraus operators".into()));
        }
        let (din, dout) = (input.total_dim(), output.total_dim());
        for (k, op) in kraus.iter().enumerate() {
            if op.nrows() != dout || op.ncols() != din {
                return Err(Error::InvalidChannel(format!(
                    "Kraus operator {k} is {}x{}, expected {dout}x{din}",
                    op.nrows(),
                    op.ncols()
                )));
            }
        }
        let ch = Self { input, output, kraus };
        let dev = ch.trace_preservation_defect();
        if !(dev <= CPTP_TOL) {
            return Err(Error::NotCptp(format!(
                "max |Σ K†K − 1| entry is {dev:.3e} (tol {CPTP_TOL:.0e})"
            )));
        }
        Ok(ch)
    }

    /// Rescales `K ← K (Σ K†K)^{-1/2}` before validation; for Kraus lists
    /// that are trace preserving up to numerical noise.
    pub fn new_normalized(input: LabeledSpace, output: LabeledSpace, kraus: Vec<CMatrix>) -> Result<Self> {
        let din = input.total_dim();
        let mut gram = CMatrix::zeros(din, din);
        for k in &kraus {
            gram += k.adjoint() * k;
        }
        let fix = linalg::inv_sqrt_psd(&gram, 1e-300);
        let kraus = kraus.into_iter().map(|k| k * &fix).collect();
        Self::new(input, output, kraus)
    }

    pub fn input(&self) -> &LabeledSpace {
        &self.input
    }

    pub fn output(&self) -> &LabeledSpace {
        &self.output
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn input_dim(&self) -> usize {
        self.input.total_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.output.total_dim()
    }

    pub fn trace_preservation_defect(&self) -> f64 {
        let din = self.input_dim();
        let mut gram = CMatrix::zeros(din, din);
        for k in &self.kraus {
            gram += k.adjoint() * k;
        }
        linalg::max_abs_diff(&gram, &linalg::identity(din))
    }

    /// Channel whose Stinespring isometry into `output ⊗ environment` is `v`
    /// (`dout·r × din`, environment index fastest).
    pub fn from_stinespring(input: LabeledSpace, output: LabeledSpace, v: &CMatrix, r: usize) -> Result<Self> {
        let (din, dout) = (input.total_dim(), output.total_dim());
        if v.nrows() != dout * r || v.ncols() != din {
            return Err(Error::mismatch("Stinespring isometry rows", dout * r, v.nrows()));
        }
        let kraus = (0..r)
            .map(|k| CMatrix::from_fn(dout, din, |o, i| v[(o * r + k, i)]))
            .collect();
        Self::new(input, output, kraus)
    }

    /// Random channel with `r` Kraus operators: the polar part of a Ginibre
    /// matrix taken as Stinespring isometry.
    pub fn random<R: rand::Rng + ?Sized>(input: LabeledSpace, output: LabeledSpace, r: usize, rng: &mut R) -> Result<Self> {
        let (din, dout) = (input.total_dim(), output.total_dim());
        if dout * r < din {
            return Err(Error::InvalidChannel(format!(
                "{r} Kraus operators of shape {dout}×{din} cannot be trace preserving"
            )));
        }
        let v = linalg::polar_isometry(&crate::qcore::random::ginibre(dout * r, din, rng));
        Self::from_stinespring(input, output, &v, r)
    }

    /// Identity map between spaces of equal total dimension.
    pub fn identity(input: LabeledSpace, output: LabeledSpace) -> Result<Self> {
        let d = input.total_dim();
        if output.total_dim() != d {
            return Err(Error::mismatch("identity channel", d, output.total_dim()));
        }
        Self::new(input, output, vec![linalg::identity(d)])
    }

    /// `ρ ↦ V ρ V†` for an isometry (or unitary) `V`.
    pub fn isometry(input: LabeledSpace, output: LabeledSpace, v: CMatrix) -> Result<Self> {
        Self::new(input, output, vec![v])
    }

    /// Discards the input and prepares `state`.
    pub fn constant(input: LabeledSpace, state: &DensityOperator) -> Result<Self> {
        let din = input.total_dim();
        let (vals, vecs) = linalg::hermitian_eigen(state.matrix());
        let mut kraus = Vec::new();
        for (i, &l) in vals.iter().enumerate() {
            if l <= 0.0 {
                continue;
            }
            let col = vecs.column(i) * c(l.sqrt(), 0.0);
            for j in 0..din {
                let mut k = CMatrix::zeros(state.dim(), din);
                k.set_column(j, &col);
                kraus.push(k);
            }
        }
        Self::new_normalized(input, state.space().clone(), kraus)
    }

    /// Outputs the maximally mixed state on `output`.
    pub fn completely_depolarizing(input: LabeledSpace, output: LabeledSpace) -> Result<Self> {
        Self::constant(input, &DensityOperator::maximally_mixed(output))
    }

    /// Kills off-diagonal entries in the computational basis.
    pub fn completely_dephasing(input: LabeledSpace, output: LabeledSpace) -> Result<Self> {
        let d = input.total_dim();
        if output.total_dim() != d {
            return Err(Error::mismatch("dephasing channel", d, output.total_dim()));
        }
        let kraus = (0..d)
            .map(|i| {
                let mut k = CMatrix::zeros(d, d);
                k[(i, i)] = linalg::ONE;
                k
            })
            .collect();
        Self::new(input, output, kraus)
    }

    /// Classical channel `|x⟩ ↦ Σ_y W(y|x) |y⟩⟨y|` followed by dephasing of the
    /// input; `transition[x][y] = W(y|x)`.
    pub fn classical(input: LabeledSpace, output: LabeledSpace, transition: &[Vec<f64>]) -> Result<Self> {
        let (din, dout) = (input.total_dim(), output.total_dim());
        if transition.len() != din || transition.iter().any(|r| r.len() != dout) {
            return Err(Error::InvalidChannel(format!("transition matrix must be {din}x{dout}")));
        }
        for (x, row) in transition.iter().enumerate() {
            let s: f64 = row.iter().sum();
            if row.iter().any(|&p| p < 0.0) || (s - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidChannel(format!("row {x} of the transition matrix is not a pmf")));
            }
        }
        let mut kraus = Vec::new();
        for (x, row) in transition.iter().enumerate() {
            for (y, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    let mut k = CMatrix::zeros(dout, din);
                    k[(y, x)] = c(p.sqrt(), 0.0);
                    kraus.push(k);
                }
            }
        }
        Self::new(input, output, kraus)
    }

    /// `self ⊗ other`, acting on the concatenated input spaces.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let input = self.input.concat(&other.input)?;
        let output = self.output.concat(&other.output)?;
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(linalg::kron(a, b));
            }
        }
        Self::new(input, output, kraus)
    }

    /// `after ∘ self`.
    pub fn then(&self, after: &Self) -> Result<Self> {
        if after.input.dims() != self.output.dims() {
            return Err(Error::mismatch("channel composition", self.output_dim(), after.input_dim()));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * after.kraus.len());
        for b in &after.kraus {
            for a in &self.kraus {
                kraus.push(b * a);
            }
        }
        Self::new_normalized(self.input.clone(), after.output.clone(), kraus)
    }

    pub fn with_input_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        Ok(Self {
            input: self.input.relabeled(labels)?,
            ..self.clone()
        })
    }

    pub fn with_output_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        Ok(Self {
            output: self.output.relabeled(labels)?,
            ..self.clone()
        })
    }

    /// `Σ K X K†` for an arbitrary operator on the input.
    pub fn apply_operator(&self, x: &CMatrix) -> CMatrix {
        let dout = self.output_dim();
        let mut out = CMatrix::zeros(dout, dout);
        for k in &self.kraus {
            out += k * x * k.adjoint();
        }
        out
    }

    /// Images of the matrix units `|a⟩⟨b|`, row-major in `(a, b)`.
    pub fn action_on_matrix_units(&self) -> Vec<CMatrix> {
        let din = self.input_dim();
        let mut out = Vec::with_capacity(din * din);
        for a in 0..din {
            for b in 0..din {
                let mut e = CMatrix::zeros(din, din);
                e[(a, b)] = linalg::ONE;
                out.push(self.apply_operator(&e));
            }
        }
        out
    }

    /// Largest entrywise deviation between the two maps on the matrix units;
    /// channel equality is action equality, not Kraus-list equality.
    pub fn action_distance(&self, other: &Self) -> Result<f64> {
        if self.input.dims() != other.input.dims() || self.output.dims() != other.output.dims() {
            return Err(Error::mismatch("channel comparison", self.input_dim(), other.input_dim()));
        }
        Ok(self
            .action_on_matrix_units()
            .iter()
            .zip(other.action_on_matrix_units())
            .map(|(a, b)| linalg::max_abs_diff(a, &b))
            .fold(0.0, f64::max))
    }

    /// Stinespring isometry `V = Σ_k K_k ⊗ |k⟩` into `output ⊗ environment`.
    pub fn stinespring(&self) -> CMatrix {
        let (din, dout, r) = (self.input_dim(), self.output_dim(), self.kraus.len());
        let mut v = CMatrix::zeros(dout * r, din);
        for (k, op) in self.kraus.iter().enumerate() {
            for o in 0..dout {
                for i in 0..din {
                    v[(o * r + k, i)] = op[(o, i)];
                }
            }
        }
        v
    }
}

/// Applies `ch` to the factors `on` of `rho`; the remaining factors pass
/// through. The result lives on `passthrough ⊗ ch.output`.
pub fn apply<S: AsRef<str>>(ch: &QuantumChannel, rho: &DensityOperator, on: &[S]) -> Result<DensityOperator> {
    let space = rho.space();
    if on.is_empty() {
        return Err(Error::EmptySelection);
    }
    let mut on_pos = Vec::with_capacity(on.len());
    for l in on {
        let p = space.position(l.as_ref())?;
        if on_pos.contains(&p) {
            return Err(Error::DuplicateLabel(l.as_ref().to_string()));
        }
        on_pos.push(p);
    }
    let on_dims: Vec<usize> = on_pos.iter().map(|&p| space.factors()[p].1).collect();
    if on_dims != ch.input.dims() {
        return Err(Error::DimensionMismatch {
            context: format!("channel input {} vs selected factors {:?}", ch.input, on_dims),
            expected: ch.input_dim(),
            found: on_dims.iter().product(),
        });
    }
    let pass_pos: Vec<usize> = (0..space.len()).filter(|p| !on_pos.contains(p)).collect();
    let pass_space = LabeledSpace::new(pass_pos.iter().map(|&p| space.factors()[p].clone()))?;
    let out_space = pass_space.concat(&ch.output)?;
    let mut perm = pass_pos.clone();
    perm.extend(&on_pos);
    let ordered = linalg::permute_matrix(rho.matrix(), &space.dims(), &perm);
    let out = apply_blockwise(&ch.kraus, &ordered, pass_space.total_dim(), ch.input_dim(), ch.output_dim());
    Ok(DensityOperator::from_raw(out_space, out))
}

/// `(1 ⊗ 𝒩)(ρ)` for `ρ` ordered as `passthrough ⊗ input`.
pub(crate) fn apply_blockwise(kraus: &[CMatrix], rho: &CMatrix, pass: usize, din: usize, dout: usize) -> CMatrix {
    if pass == 1 {
        let mut out = CMatrix::zeros(dout, dout);
        for k in kraus {
            out += k * rho * k.adjoint();
        }
        return out;
    }
    let mut out = CMatrix::from_element(pass * dout, pass * dout, ZERO);
    for p in 0..pass {
        for q in 0..pass {
            let block = rho.view((p * din, q * din), (din, din));
            let mut acc = CMatrix::zeros(dout, dout);
            for k in kraus {
                acc += k * block * k.adjoint();
            }
            out.view_mut((p * dout, q * dout), (dout, dout)).copy_from(&acc);
        }
    }
    out
}

/// Quantum wiretap channel `A → B ⊗ E`: a channel plus the split of its
/// output factors between Bob and Eve.
#[derive(Debug, Clone, PartialEq)]
pub struct WiretapChannel {
    channel: QuantumChannel,
    bob: Vec<String>,
    eve: Vec<String>,
}

impl WiretapChannel {
    pub fn new(channel: QuantumChannel, bob: Vec<String>, eve: Vec<String>) -> Result<Self> {
        let out = channel.output();
        for l in bob.iter().chain(&eve) {
            out.position(l)?;
        }
        if bob.iter().any(|b| eve.contains(b)) {
            return Err(Error::InvalidChannel("Bob and Eve share an output factor".into()));
        }
        if bob.len() + eve.len() != out.len() || bob.is_empty() || eve.is_empty() {
            return Err(Error::InvalidChannel(format!(
                "Bob {bob:?} and Eve {eve:?} must partition the output factors of {out}"
            )));
        }
        Ok(Self { channel, bob, eve })
    }

    /// First output factor is Bob's, the rest Eve's.
    pub fn from_channel(channel: QuantumChannel) -> Result<Self> {
        let labels: Vec<String> = channel.output().labels().map(str::to_string).collect();
        if labels.len() < 2 {
            return Err(Error::InvalidChannel(
                "wiretap channel output needs a Bob factor and an Eve factor".into(),
            ));
        }
        Self::new(channel, labels[..1].to_vec(), labels[1..].to_vec())
    }

    /// `ρ ↦ 𝒩_B(ρ) ⊗ |0⟩⟨0|_E` with a one-dimensional Eve.
    pub fn without_eve(channel: QuantumChannel, eve_label: &str) -> Result<Self> {
        let bob: Vec<String> = channel.output().labels().map(str::to_string).collect();
        let trivial = DensityOperator::basis(LabeledSpace::single(eve_label, 1)?, 0)?;
        let eve = QuantumChannel::constant(LabeledSpace::trivial(), &trivial)?;
        let output = channel.output().concat(eve.output())?;
        let kraus = channel.kraus().to_vec();
        let ch = QuantumChannel::new(channel.input().clone(), output, kraus)?;
        Self::new(ch, bob, vec![eve_label.to_string()])
    }

    pub fn channel(&self) -> &QuantumChannel {
        &self.channel
    }

    pub fn bob(&self) -> &[String] {
        &self.bob
    }

    pub fn eve(&self) -> &[String] {
        &self.eve
    }

    pub fn input(&self) -> &LabeledSpace {
        self.channel.input()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelWire {
    input: LabeledSpace,
    output: LabeledSpace,
    kraus: Vec<MatrixWire>,
}

impl Serialize for QuantumChannel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ChannelWire {
            input: self.input.clone(),
            output: self.output.clone(),
            kraus: self.kraus.iter().map(MatrixWire::from_matrix).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuantumChannel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = ChannelWire::deserialize(d)?;
        let kraus = wire
            .kraus
            .iter()
            .map(MatrixWire::to_matrix)
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        QuantumChannel::new(wire.input, wire.output, kraus).map_err(serde::de::Error::custom)
    }
}
