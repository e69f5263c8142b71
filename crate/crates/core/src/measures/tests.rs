use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::channels::apply;
use crate::entropic::{coherent_information, coherent_information_between, von_neumann_entropy};
use crate::qcore::random::{random_density, random_pure, random_unitary};
use crate::qcore::{maximally_entangled, tensor};

fn sp(l: &str, d: usize) -> LabeledSpace {
    LabeledSpace::single(l, d).unwrap()
}

fn cfg() -> OptimizerConfig {
    OptimizerConfig {
        restarts: 3,
        max_iters: 40,
        seed: 3,
        ..OptimizerConfig::default()
    }
}

fn bell() -> DensityOperator {
    maximally_entangled("A'", "B'", 2).unwrap()
}

fn classical_correlated(a: &str, b: &str) -> DensityOperator {
    let space = LabeledSpace::new([(a, 2), (b, 2)]).unwrap();
    DensityOperator::from_diagonal(space, &[0.5, 0.0, 0.0, 0.5]).unwrap()
}

fn ghz() -> DensityOperator {
    let space = LabeledSpace::new([("A'", 2), ("B'", 2), ("C'", 2)]).unwrap();
    let mut v = crate::qcore::linalg::CVector::zeros(8);
    v[0] = c(0.5f64.sqrt(), 0.0);
    v[7] = c(0.5f64.sqrt(), 0.0);
    DensityOperator::from_pure(space, &v).unwrap()
}

/// `I(A⟩B')` of `(Ω ⊗ id) ζ` through the generic channel application.
fn delta_of(zeta: &DensityOperator, omega: &QuantumChannel) -> f64 {
    let labels: Vec<String> = zeta.space().labels().map(str::to_string).collect();
    let out = apply(omega, zeta, &labels[..1]).unwrap();
    let a = omega.output().labels().next().unwrap();
    coherent_information_between(&out, &[a], &[labels[1].as_str()]).unwrap()
}

/// `S(CF)` of `(id ⊗ T) ψ^{CDE}` through the generic channel application.
fn ep_of(rho: &DensityOperator, t: &QuantumChannel) -> f64 {
    let c_label = rho.space().labels().next().unwrap().to_string();
    let e = t.input().labels().next().unwrap().to_string();
    let psi = purify(rho, &e, Purification::Minimal).unwrap();
    let out = apply(t, &psi, &[e]).unwrap();
    let f = t.output().labels().next().unwrap().to_string();
    von_neumann_entropy(&partial_trace(&out, &[c_label, f]).unwrap())
}

#[test]
fn dense_coding_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let product = tensor(&random_density(sp("A'", 2), 2, &mut rng), &random_density(sp("B'", 2), 2, &mut rng)).unwrap();
    let r = dense_coding_advantage(&product, 4, &cfg()).unwrap();
    assert!(r.value.abs() <= 1e-4, "{}", r.value);

    let r = dense_coding_advantage(&bell(), 4, &cfg()).unwrap();
    assert!((r.value - 1.0).abs() <= 1e-3, "{}", r.value);

    let r = dense_coding_advantage(&classical_correlated("A'", "B'"), 4, &cfg()).unwrap();
    assert!(r.value.abs() <= 1e-3, "{}", r.value);
}

#[test]
fn dense_coding_witness_reproduces_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let zeta = random_density(LabeledSpace::new([("A'", 2), ("B'", 2)]).unwrap(), 2, &mut rng);
    let r = dense_coding_advantage(&zeta, 2, &cfg()).unwrap();
    assert!((delta_of(&zeta, &r.witness_channel) - r.value).abs() <= 1e-6);
    let identity = coherent_information(&zeta).unwrap();
    assert!(r.value >= identity - 1e-9, "{} < {identity}", r.value);
    assert!(r.witness_channel.trace_preservation_defect() < 1e-9);
}

#[test]
fn entanglement_of_purification_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    // Mixed C with pure D: E purifies C alone.
    let product = tensor(&random_density(sp("C", 2), 2, &mut rng), &random_pure(sp("D", 2), &mut rng)).unwrap();
    let r = entanglement_of_purification(&product, 2, &cfg()).unwrap();
    assert!(r.value.abs() <= 1e-4, "{}", r.value);

    let pure = random_pure(LabeledSpace::new([("C", 2), ("D", 3)]).unwrap(), &mut rng);
    let s_c = von_neumann_entropy(&partial_trace(&pure, &["C"]).unwrap());
    let r = entanglement_of_purification(&pure, 1, &cfg()).unwrap();
    assert!((r.value - s_c).abs() <= 1e-4, "{} vs {s_c}", r.value);

    let classical = classical_correlated("C", "D");
    for cap in [1, 2, 4] {
        let r = entanglement_of_purification(&classical, cap, &cfg()).unwrap();
        assert!((r.value - 1.0).abs() <= 1e-2, "cap {cap}: {}", r.value);
    }
}

#[test]
fn entanglement_of_purification_witness_and_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rho = random_density(LabeledSpace::new([("C", 2), ("D", 2)]).unwrap(), 2, &mut rng);
    let r = entanglement_of_purification(&rho, 2, &cfg()).unwrap();
    assert!((ep_of(&rho, &r.witness_channel) - r.value).abs() <= 1e-6);
    let s_c = von_neumann_entropy(&partial_trace(&rho, &["C"]).unwrap());
    let s_d = von_neumann_entropy(&partial_trace(&rho, &["D"]).unwrap());
    assert!(r.value >= -1e-9);
    assert!(r.value <= s_c.min(s_d) + 1e-9, "{} > min({s_c}, {s_d})", r.value);
}

#[test]
fn profile_is_nonincreasing_in_the_cap() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let rho = random_density(LabeledSpace::new([("C", 2), ("D", 2)]).unwrap(), 3, &mut rng);
    let profile = entanglement_of_purification_profile(&rho, &[1, 2, 3], &cfg()).unwrap();
    for w in profile.windows(2) {
        assert!(w[1].value <= w[0].value + 1e-12, "{} > {}", w[1].value, w[0].value);
    }
    assert!(entanglement_of_purification_profile(&rho, &[2, 1], &cfg()).is_err());
}

#[test]
fn duality_examples() {
    let bell_c = tensor(&bell(), &DensityOperator::basis(sp("C'", 1), 0).unwrap()).unwrap();
    let d = duality_residual(&bell_c, ("A'", "B'", "C'"), MeasureCaps::default(), &cfg()).unwrap();
    assert!((d.delta.value - 1.0).abs() <= 1e-3);
    assert!(d.e_p.value.abs() <= 1e-3);
    assert!((d.s_bprime - 1.0).abs() <= 1e-12);
    assert!(d.residual <= 1e-3, "{}", d.residual);

    let d = duality_residual(&ghz(), ("A'", "B'", "C'"), MeasureCaps::default(), &cfg()).unwrap();
    assert!(d.residual <= 1e-2, "{d:?}");

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let product = tensor(
        &tensor(&random_pure(sp("A'", 2), &mut rng), &random_pure(sp("B'", 2), &mut rng)).unwrap(),
        &random_pure(sp("C'", 2), &mut rng),
    )
    .unwrap();
    let d = duality_residual(&product, ("A'", "B'", "C'"), MeasureCaps::default(), &cfg()).unwrap();
    assert!(d.residual <= 1e-4, "{d:?}");
}

#[test]
fn duality_rejects_mixed_states_and_bad_partitions() {
    let mixed = tensor(&classical_correlated("A'", "B'"), &DensityOperator::basis(sp("C'", 2), 0).unwrap()).unwrap();
    assert!(matches!(
        duality_residual(&mixed, ("A'", "B'", "C'"), MeasureCaps::default(), &cfg()),
        Err(Error::InvalidState(_))
    ));
    assert!(duality_residual(&ghz(), ("A'", "B'", "X"), MeasureCaps::default(), &cfg()).is_err());
}

#[test]
fn ensemble_bound_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rho = random_density(LabeledSpace::new([("C", 2), ("D", 2)]).unwrap(), 2, &mut rng);
    let single = CqEnsemble::from_states(vec![1.0], vec![rho]).unwrap();
    let b = ep_ensemble_upper_bound(&single, MeasureCaps::default(), &cfg()).unwrap();
    assert_eq!(b.holevo, 0.0);
    assert_eq!(b.bound, b.e_p_average);

    let products: Vec<DensityOperator> = (0..2)
        .map(|_| tensor(&random_pure(sp("C", 2), &mut rng), &random_density(sp("D", 2), 2, &mut rng)).unwrap())
        .collect();
    let ens = CqEnsemble::from_states(vec![0.3, 0.7], products).unwrap();
    let b = ep_ensemble_upper_bound(&ens, MeasureCaps::default(), &cfg()).unwrap();
    for v in &b.member_values {
        assert!(v.abs() <= 1e-4, "{v}");
    }
    assert!((b.bound - holevo_quantity(&ens).value).abs() <= 1e-4);

    // Two orthogonal maximally entangled members.
    let phi = maximally_entangled("C", "D", 2).unwrap();
    let x = crate::qcore::linalg::kron(
        &CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
        &crate::qcore::linalg::identity(2),
    );
    let psi = DensityOperator::new(phi.space().clone(), &x * phi.matrix() * x.adjoint()).unwrap();
    let ens = CqEnsemble::from_states(vec![0.5, 0.5], vec![phi, psi]).unwrap();
    let b = ep_ensemble_upper_bound(&ens, MeasureCaps::default(), &cfg()).unwrap();
    let closed = 0.5 * 1.0 + 0.5 * 1.0 + 1.0;
    assert!((b.bound - closed).abs() <= 1e-4, "{} vs {closed}", b.bound);
    assert!(!b.below_average);
}

#[test]
fn measures_are_invariant_under_local_unitaries() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let u = crate::qcore::linalg::kron(&random_unitary(2, &mut rng), &random_unitary(2, &mut rng));
    let bell = bell();
    let rotated = DensityOperator::new(bell.space().clone(), &u * bell.matrix() * u.adjoint()).unwrap();
    let a = dense_coding_advantage(&bell, 4, &cfg()).unwrap().value;
    let b = dense_coding_advantage(&rotated, 4, &cfg()).unwrap().value;
    assert!((a - b).abs() <= 1e-6, "{a} vs {b}");

    let classical = classical_correlated("C", "D");
    let rotated = DensityOperator::new(classical.space().clone(), &u * classical.matrix() * u.adjoint()).unwrap();
    let a = entanglement_of_purification(&classical, 2, &cfg()).unwrap().value;
    let b = entanglement_of_purification(&rotated, 2, &cfg()).unwrap().value;
    assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
}

#[test]
fn configuration_errors() {
    assert!(matches!(dense_coding_advantage(&bell(), 0, &cfg()), Err(Error::Config(_))));
    assert!(matches!(entanglement_of_purification(&bell(), 0, &cfg()), Err(Error::Config(_))));
    assert!(dense_coding_advantage(&ghz(), 2, &cfg()).is_err());
}

#[test]
fn mixed_product_has_vanishing_ep() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let product = tensor(&random_density(sp("C", 2), 2, &mut rng), &random_density(sp("D", 2), 2, &mut rng)).unwrap();
    let r = entanglement_of_purification(&product, 4, &OptimizerConfig::default()).unwrap();
    assert!(r.value.abs() <= 1e-4, "{} after {} evaluations", r.value, r.diagnostics.evaluations);
}
