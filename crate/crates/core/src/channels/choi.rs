//! Choi-state view of channels, using the unit-trace convention
//! `J(𝒩) = (id ⊗ 𝒩)(Φ)` with `Φ` maximally entangled on `ref ⊗ input`.

use super::channel::QuantumChannel;
use crate::qcore::linalg::{self, c, CMatrix};
use crate::qcore::{DensityOperator, LabeledSpace, Tolerances};
use crate::{Error, Result};

/// Choi eigenvalues below this are dropped when extracting Kraus operators.
pub const KRAUS_RANK_CUTOFF: f64 = 1e-12;

/// Suffix marking the reference copy of an input factor in a Choi state.
pub const REF_SUFFIX: &str = "_ref";

/// Choi state on `input_ref ⊗ output`.
pub fn kraus_to_choi(ch: &QuantumChannel) -> Result<DensityOperator> {
    let din = ch.input_dim();
    let dout = ch.output_dim();
    let mut j = CMatrix::zeros(din * dout, din * dout);
    for (a, image) in ch.action_on_matrix_units().into_iter().enumerate() {
        let (row, col) = (a / din, a % din);
        j.view_mut((row * dout, col * dout), (dout, dout)).copy_from(&image);
    }
    let space = ch.input().suffixed(REF_SUFFIX).concat(ch.output())?;
    Ok(DensityOperator::from_raw(space, j * c(1.0 / din as f64, 0.0)))
}

/// Inverse of [`kraus_to_choi`]: the first `input.len()` factors of `choi`
/// are the reference copy, the rest the output.
pub fn choi_to_kraus(choi: &DensityOperator, input: &LabeledSpace) -> Result<QuantumChannel> {
    choi_to_kraus_with(choi, input, &Tolerances::default())
}

pub fn choi_to_kraus_with(choi: &DensityOperator, input: &LabeledSpace, tol: &Tolerances) -> Result<QuantumChannel> {
    let k = input.len();
    let factors = choi.space().factors();
    if factors.len() < k || factors[..k].iter().map(|f| f.1).collect::<Vec<_>>() != input.dims() {
        return Err(Error::mismatch("Choi reference factors", input.total_dim(), choi.dim()));
    }
    let output = LabeledSpace::new(factors[k..].iter().cloned())?;
    let din = input.total_dim();
    let dout = output.total_dim();
    let marginal = linalg::partial_trace_matrix(choi.matrix(), &choi.space().dims(), &(0..k).collect::<Vec<_>>());
    let expected = linalg::identity(din) * c(1.0 / din as f64, 0.0);
    let dev = linalg::trace_norm_hermitian(&(&marginal - &expected));
    if dev > tol.tol_eq {
        return Err(Error::InvalidChannel(format!(
            "Choi marginal on the reference is not 1/{din} (trace-norm deviation {dev:.3e})"
        )));
    }
    let (vals, vecs) = linalg::hermitian_eigen(choi.matrix());
    if let Some(&min) = vals.last() {
        if min < -tol.tol_psd {
            return Err(Error::NotCptp(format!("Choi state has eigenvalue {min:.3e}")));
        }
    }
    let mut kraus = Vec::new();
    for (idx, &l) in vals.iter().enumerate() {
        if l < KRAUS_RANK_CUTOFF {
            continue;
        }
        let scale = (din as f64 * l).sqrt();
        let v = vecs.column(idx);
        kraus.push(CMatrix::from_fn(dout, din, |o, i| v[i * dout + o] * scale));
    }
    QuantumChannel::new_normalized(input.clone(), output, kraus)
}

/// Channel from the images of the matrix units, `action(a, b) = 𝒩(|a⟩⟨b|)`.
/// Fails if the resulting map is not completely positive within `tol_psd`.
pub(crate) fn channel_from_action(
    input: LabeledSpace,
    output: LabeledSpace,
    action: impl Fn(usize, usize) -> CMatrix,
    tol: &Tolerances,
) -> Result<QuantumChannel> {
    let din = input.total_dim();
    let dout = output.total_dim();
    let mut j = CMatrix::zeros(din * dout, din * dout);
    for a in 0..din {
        for b in 0..din {
            let img = action(a, b);
            j.view_mut((a * dout, b * dout), (dout, dout)).copy_from(&img);
        }
    }
    let j = linalg::hermitian_part(&j) * c(1.0 / din as f64, 0.0);
    let min = linalg::hermitian_eigenvalues(&j).last().copied().unwrap_or(0.0);
    if min < -tol.tol_eq {
        return Err(Error::NotCptp(format!(
            "reconstructed map is not completely positive (Choi eigenvalue {min:.3e})"
        )));
    }
    let space = input.suffixed(REF_SUFFIX).concat(&output)?;
    let relaxed = Tolerances {
        tol_psd: tol.tol_eq.max(tol.tol_psd),
        ..*tol
    };
    choi_to_kraus_with(&DensityOperator::from_raw(space, j), &input, &relaxed).map_err(|e| match e {
        Error::InvalidChannel(msg) => Error::NotCptp(format!("reconstructed map is not trace preserving: {msg}")),
        other => other,
    })
}
