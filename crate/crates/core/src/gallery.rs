//! Worked-example scenarios.

use crate::channels::{channel_from_resource_state, CqEnsemble, QuantumChannel, WiretapChannel};
use crate::qcore::linalg::{self, c, CMatrix};
use crate::qcore::{maximally_entangled, tensor, DensityOperator, LabeledSpace};
use crate::rates::{classical_embed, RateMode};
use crate::scenario::Scenario;
use crate::{Error, Result};

/// Names accepted by [`build`]; `classical` uses [`DEFAULT_PMF`].
pub const NAMES: &[&str] = &["broadcast", "broadcast-bell", "trivial", "superdense", "classical", "classical-wiretap"];

/// `P(x, y, z)` for the default classical resource: a shared uniform bit
/// seen by Bob, and by Eve through a binary symmetric channel with
/// crossover 0.25.
pub const DEFAULT_PMF: [[[f64; 2]; 2]; 2] = [[[0.375, 0.125], [0.0, 0.0]], [[0.0, 0.0], [0.125, 0.375]]];

/// Crossover probabilities of the degraded classical wiretap example.
pub const BOB_CROSSOVER: f64 = 0.05;
pub const EVE_CROSSOVER: f64 = 0.2;

pub fn build(name: &str) -> Result<Scenario> {
    match name {
        "broadcast" => broadcast(),
        "broadcast-bell" => broadcast_bell(),
        "trivial" => trivial(),
        "superdense" => superdense(),
        "classical" => classical(&DEFAULT_PMF.iter().map(|x| x.iter().map(|y| y.to_vec()).collect()).collect::<Vec<_>>()),
        "classical-wiretap" => classical_wiretap(),
        other => Err(Error::Config(format!("unknown gallery `{other}`; available: {}", NAMES.join(", ")))),
    }
}

fn sp(label: &str, d: usize) -> Result<LabeledSpace> {
    LabeledSpace::single(label, d)
}

fn basis(label: &str, d: usize, i: usize) -> Result<DensityOperator> {
    DensityOperator::basis(sp(label, d)?, i)
}

fn trivial_zeta() -> Result<DensityOperator> {
    DensityOperator::basis(LabeledSpace::new([("A'", 1), ("B'", 1), ("E'", 1)])?, 0)
}

fn bell_zeta() -> Result<DensityOperator> {
    tensor(&maximally_entangled("A'", "B'", 2)?, &basis("E'", 1, 0)?)
}

/// Uniform basis states `|x⟩⟨x|_A ⊗ ρ` for a fixed `A''` state `ρ`.
fn basis_ensemble(d: usize, a2: &DensityOperator) -> Result<CqEnsemble> {
    let states = (0..d)
        .map(|x| tensor(&basis("A", d, x)?, a2))
        .collect::<Result<Vec<_>>>()?;
    CqEnsemble::from_states(vec![1.0 / d as f64; d], states)
}

fn pauli(k: usize) -> CMatrix {
    let (z, o) = (c(0.0, 0.0), c(1.0, 0.0));
    match k {
        0 => CMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        1 => CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        2 => CMatrix::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
        _ => CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// `(σ_k ⊗ 1) φ₀ (σ_k ⊗ 1)` on `A ⊗ A''`, uniform over the four Paulis.
fn pauli_choi_ensemble(zeta: &DensityOperator) -> Result<CqEnsemble> {
    let res = channel_from_resource_state(zeta)?;
    let phi0 = res.phi0();
    let space = LabeledSpace::new([("A", 2), (res.reference(), 2)])?;
    let states = (0..4)
        .map(|k| {
            let u = linalg::kron(&pauli(k), &linalg::identity(2));
            DensityOperator::new(space.clone(), &u * phi0.matrix() * u.adjoint())
        })
        .collect::<Result<Vec<_>>>()?;
    CqEnsemble::from_states(vec![0.25; 4], states)
}

/// `B|x⟩ = |x⟩_B |x⟩_E` on a qubit.
fn broadcast_channel() -> Result<QuantumChannel> {
    let mut v = CMatrix::zeros(4, 2);
    v[(0, 0)] = c(1.0, 0.0);
    v[(3, 1)] = c(1.0, 0.0);
    QuantumChannel::isometry(sp("A", 2)?, LabeledSpace::new([("B", 2), ("E", 2)])?, v)
}

pub fn broadcast() -> Result<Scenario> {
    let mut s = Scenario::new(
        "broadcast",
        "Qubit broadcast isometry |x> -> |x>_B |x>_E without assistance; its private capacity is zero.",
        broadcast_channel()?,
    );
    s.resource = Some(trivial_zeta()?);
    s.ensemble = Some(basis_ensemble(2, &basis("A''", 1, 0)?)?);
    s.mode = Some(RateMode::Unassisted);
    Ok(s)
}

pub fn broadcast_bell() -> Result<Scenario> {
    let zeta = bell_zeta()?;
    let mut s = Scenario::new(
        "broadcast-bell",
        "Qubit broadcast isometry assisted by a Bell pair between Alice and Bob; single-letter values are lower bounds.",
        broadcast_channel()?,
    );
    s.ensemble = Some(pauli_choi_ensemble(&zeta)?);
    s.resource = Some(zeta);
    s.mode = Some(RateMode::Theorem1);
    Ok(s)
}

/// Qubit amplitude damping with damping 0.3; the environment goes to Eve.
fn damping_channel() -> Result<QuantumChannel> {
    let g: f64 = 0.3;
    let mut v = CMatrix::zeros(4, 2);
    v[(0, 0)] = c(1.0, 0.0);
    v[(2, 1)] = c((1.0 - g).sqrt(), 0.0);
    v[(1, 1)] = c(g.sqrt(), 0.0);
    QuantumChannel::isometry(sp("A", 2)?, LabeledSpace::new([("B", 2), ("E", 2)])?, v)
}

pub fn trivial() -> Result<Scenario> {
    let mut s = Scenario::new(
        "trivial",
        "Amplitude damping wiretap channel with the trivial resource |0><0| on each of A', B', E'.",
        damping_channel()?,
    );
    s.resource = Some(trivial_zeta()?);
    s.ensemble = Some(basis_ensemble(2, &basis("A''", 1, 0)?)?);
    s.mode = Some(RateMode::Theorem1);
    Ok(s)
}

pub fn superdense() -> Result<Scenario> {
    let zeta = bell_zeta()?;
    let id = QuantumChannel::identity(sp("A", 2)?, sp("B", 2)?)?;
    let n = WiretapChannel::without_eve(id, "E")?;
    let mut s = Scenario::new(
        "superdense",
        "Noiseless qubit channel, no eavesdropper, Bell pair between Alice and Bob, Pauli modulations.",
        n.channel().clone(),
    );
    s.ensemble = Some(pauli_choi_ensemble(&zeta)?);
    s.resource = Some(zeta);
    s.mode = Some(RateMode::Theorem1);
    Ok(s)
}

/// Noiseless classical bit to Bob with a diagonal resource built from
/// `pmf[x][y][z]`.
pub fn classical(pmf: &[Vec<Vec<f64>>]) -> Result<Scenario> {
    let zeta = classical_embed(pmf)?;
    let res = channel_from_resource_state(&zeta)?;
    let deph = QuantumChannel::completely_dephasing(sp("A", 2)?, sp("B", 2)?)?;
    let n = WiretapChannel::without_eve(deph, "E")?;
    let marginal = res.marginal().relabeled(&[res.reference()])?;
    let mut s = Scenario::new(
        "classical",
        "Noiseless classical bit to Bob; the resource is the diagonal embedding of a joint distribution P(x,y,z).",
        n.channel().clone(),
    );
    s.ensemble = Some(basis_ensemble(2, &marginal)?);
    s.resource = Some(zeta);
    s.mode = Some(RateMode::Theorem1);
    Ok(s)
}

/// Physically degraded binary wiretap channel: Bob sees the input through
/// BSC(0.05) and Eve sees Bob's output through a further BSC, so that her
/// marginal channel is BSC(0.2).
pub fn classical_wiretap_channel() -> Result<QuantumChannel> {
    let p = BOB_CROSSOVER;
    let q = (EVE_CROSSOVER - p) / (1.0 - 2.0 * p);
    let bsc = |e: f64, a: usize, b: usize| if a == b { 1.0 - e } else { e };
    let transition: Vec<Vec<f64>> = (0..2)
        .map(|x| {
            (0..4)
                .map(|yz| bsc(p, x, yz / 2) * bsc(q, yz / 2, yz % 2))
                .collect()
        })
        .collect();
    QuantumChannel::classical(sp("A", 2)?, LabeledSpace::new([("B", 2), ("E", 2)])?, &transition)
}

pub fn classical_wiretap() -> Result<Scenario> {
    let mut s = Scenario::new(
        "classical-wiretap",
        "Degraded binary wiretap channel, Bob BSC(0.05) and Eve BSC(0.2), uniform input, no assistance.",
        classical_wiretap_channel()?,
    );
    s.resource = Some(trivial_zeta()?);
    s.ensemble = Some(basis_ensemble(2, &basis("A''", 1, 0)?)?);
    s.mode = Some(RateMode::Theorem1);
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropic::shannon_entropy;

    fn h(p: f64) -> f64 {
        shannon_entropy(&[p, 1.0 - p])
    }

    #[test]
    fn every_gallery_validates_and_roundtrips() {
        for name in NAMES {
            let s = build(name).unwrap();
            s.validate().unwrap();
            let back = Scenario::from_json(&s.to_json()).unwrap();
            assert_eq!(back.to_json(), s.to_json(), "{name}");
        }
        assert!(matches!(build("nope"), Err(Error::Config(msg)) if msg.contains("superdense")));
    }

    #[test]
    fn gallery_rates() {
        let superdense = build("superdense").unwrap().evaluate(RateMode::Theorem1).unwrap();
        assert!((superdense.rate - 2.0).abs() <= 1e-9);

        let broadcast = build("broadcast").unwrap().evaluate(RateMode::Unassisted).unwrap();
        assert!(broadcast.rate.abs() <= 1e-12);

        let trivial = build("trivial").unwrap();
        let rates: Vec<f64> = [RateMode::Theorem1, RateMode::Trivial, RateMode::Unassisted]
            .iter()
            .map(|&m| trivial.evaluate(m).unwrap().rate)
            .collect();
        assert!((rates[0] - rates[1]).abs() <= 1e-10 && (rates[0] - rates[2]).abs() <= 1e-10, "{rates:?}");

        let wiretap = build("classical-wiretap").unwrap().evaluate(RateMode::Theorem1).unwrap();
        let expected = h(EVE_CROSSOVER) - h(BOB_CROSSOVER);
        assert!((wiretap.rate - expected).abs() <= 1e-10, "{} vs {expected}", wiretap.rate);
        assert!((wiretap.i_u_ee - (1.0 - h(EVE_CROSSOVER))).abs() <= 1e-10);
    }

    #[test]
    fn classical_resource_marginals_match_pmf() {
        let s = build("classical").unwrap();
        let zeta = s.resource.as_ref().unwrap();
        let diag: Vec<f64> = (0..8).map(|i| zeta.matrix()[(i, i)].re).collect();
        let flat: Vec<f64> = DEFAULT_PMF.iter().flatten().flatten().copied().collect();
        assert_eq!(diag, flat);
        let r = s.evaluate(RateMode::Theorem1).unwrap();
        assert!(r.feasible);
        assert!((r.rate - 1.0).abs() <= 1e-10, "{}", r.rate);
    }

    #[test]
    fn broadcast_is_an_isometry_onto_copies() {
        let ch = broadcast_channel().unwrap();
        assert_eq!(ch.kraus().len(), 1);
        assert!(ch.trace_preservation_defect() < 1e-12);
        let k = &ch.kraus()[0];
        assert_eq!(k[(0, 0)], c(1.0, 0.0));
        assert_eq!(k[(3, 1)], c(1.0, 0.0));
    }
}
