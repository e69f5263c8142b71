use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::linalg::{c, CMatrix, CVector};
use super::random::{random_density, random_pure};
use super::*;

fn qubit(label: &str) -> LabeledSpace {
    LabeledSpace::single(label, 2).unwrap()
}

fn ket(label: &str, i: usize) -> DensityOperator {
    DensityOperator::basis(qubit(label), i).unwrap()
}

#[test]
fn tensor_of_basis_states() {
    let s = tensor(&ket("A", 0), &ket("B", 1)).unwrap();
    let expected = DensityOperator::basis(LabeledSpace::new([("A", 2), ("B", 2)]).unwrap(), 1).unwrap();
    assert_eq!(s.matrix(), expected.matrix());
}

#[test]
fn tensor_of_maximally_mixed() {
    let s = tensor(
        &DensityOperator::maximally_mixed(qubit("A")),
        &DensityOperator::maximally_mixed(qubit("B")),
    )
    .unwrap();
    let expected = CMatrix::identity(4, 4) * c(0.25, 0.0);
    assert!(super::linalg::max_abs_diff(s.matrix(), &expected) < 1e-15);
}

#[test]
fn tensor_rejects_label_clash() {
    let err = tensor(&ket("A", 0), &ket("A", 1)).unwrap_err();
    assert!(matches!(err, crate::Error::DuplicateLabel(l) if l == "A"));
}

#[test]
fn tensor_spectrum_is_pairwise_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let a = random_density(qubit("A"), 2, &mut rng);
        let b = random_density(qubit("B"), 2, &mut rng);
        let mut expected: Vec<f64> = a
            .eigenvalues()
            .iter()
            .flat_map(|x| b.eigenvalues().into_iter().map(move |y| x * y))
            .collect();
        expected.sort_by(|x, y| y.total_cmp(x));
        let got = tensor(&a, &b).unwrap().eigenvalues();
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() < 1e-12, "{got:?} vs {expected:?}");
        }
    }
}

#[test]
fn bell_marginal_is_maximally_mixed() {
    let bell = maximally_entangled("A'", "A''", 2).unwrap();
    let m = partial_trace(&bell, &["A'"]).unwrap();
    let expected = DensityOperator::maximally_mixed(qubit("A'"));
    assert!(m.max_abs_diff(&expected) < 1e-15);
    assert_eq!(m.space(), expected.space());
}

#[test]
fn product_marginal() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = random_density(LabeledSpace::single("A", 3).unwrap(), 3, &mut rng);
    let b = random_density(qubit("B"), 2, &mut rng);
    let m = partial_trace(&tensor(&a, &b).unwrap(), &["A"]).unwrap();
    assert!(m.max_abs_diff(&a) < 1e-15);
}

#[test]
fn partial_trace_errors() {
    let bell = maximally_entangled("A", "B", 2).unwrap();
    assert!(matches!(partial_trace(&bell, &["C"]), Err(crate::Error::UnknownLabel(_))));
    let empty: [&str; 0] = [];
    assert!(matches!(partial_trace(&bell, &empty), Err(crate::Error::EmptySelection)));
}

#[test]
fn partial_trace_matches_naive_index_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let space = LabeledSpace::new([("A", 2), ("B", 2), ("C", 2)]).unwrap();
    for keep in 0..3 {
        let rho = random_pure(space.clone(), &mut rng);
        let m = rho.matrix();
        // Naive oracle: result[i][j] = Σ_{k,l} ρ[(i,k,l)][(j,k,l)] with the kept index
        // placed at position `keep` of the triple.
        let idx = |kept: usize, x: usize, y: usize| -> usize {
            let mut digits = [x, y];
            let mut full = [0usize; 3];
            let mut it = digits.iter_mut();
            for (p, slot) in full.iter_mut().enumerate() {
                *slot = if p == keep { kept } else { *it.next().unwrap() };
            }
            full[0] * 4 + full[1] * 2 + full[2]
        };
        let mut naive = CMatrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                for x in 0..2 {
                    for y in 0..2 {
                        naive[(i, j)] += m[(idx(i, x, y), idx(j, x, y))];
                    }
                }
            }
        }
        let label = ["A", "B", "C"][keep];
        let got = partial_trace(&rho, &[label]).unwrap();
        assert!(super::linalg::max_abs_diff(got.matrix(), &naive) < 1e-14);
    }
}

#[test]
fn symmetric_purification_of_maximally_mixed_is_bell() {
    let p = purify(&DensityOperator::maximally_mixed(qubit("A'")), "A''", Purification::Symmetric).unwrap();
    let bell = maximally_entangled("A'", "A''", 2).unwrap();
    assert!(p.max_abs_diff(&bell) < 1e-15);
    for keep in ["A'", "A''"] {
        let m = partial_trace(&p, &[keep]).unwrap();
        assert!(super::linalg::max_abs_diff(m.matrix(), &(CMatrix::identity(2, 2) * c(0.5, 0.0))) < 1e-15);
    }
}

#[test]
fn pure_input_purifies_to_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let psi = random_pure(LabeledSpace::single("A", 3).unwrap(), &mut rng);
    let p = purify(&psi, "R", Purification::Minimal).unwrap();
    assert_eq!(p.space().dim_of("R").unwrap(), 1);
    assert!(p.max_abs_diff(&tensor(&psi, &DensityOperator::basis(LabeledSpace::single("R", 1).unwrap(), 0).unwrap()).unwrap()) < 1e-12);
    let back = partial_trace(&p, &["A"]).unwrap();
    assert!(back.max_abs_diff(&psi) < 1e-12);
}

#[test]
fn purify_roundtrip_rank_three_qutrit() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rho = random_density(LabeledSpace::single("A", 3).unwrap(), 3, &mut rng);
    for mode in [Purification::Minimal, Purification::Symmetric] {
        let p = purify(&rho, "R", mode).unwrap();
        assert!(p.is_pure(1e-12));
        let back = partial_trace(&p, &["A"]).unwrap();
        assert!(trace_norm_distance(&back, &rho).unwrap() <= 1e-10);
    }
    assert!(purify(&rho, "A", Purification::Minimal).is_err());
}

#[test]
fn fidelity_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let rho = random_density(qubit("A"), 2, &mut rng);
    assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-12);
    assert!(fidelity(&ket("A", 0), &ket("A", 1)).unwrap().abs() < 1e-15);
    let mixed = DensityOperator::maximally_mixed(qubit("A"));
    // √⟨0|(I/2)|0⟩
    let expected = 0.5f64.sqrt();
    assert!((fidelity(&mixed, &ket("A", 0)).unwrap() - expected).abs() < 1e-12);
    assert!(fidelity(&mixed, &DensityOperator::maximally_mixed(LabeledSpace::single("A", 3).unwrap())).is_err());
}

#[test]
fn trace_distance_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rho = random_density(qubit("A"), 2, &mut rng);
    assert!(trace_distance(&rho, &rho).unwrap().abs() < 1e-15);
    assert!((trace_distance(&ket("A", 0), &ket("A", 1)).unwrap() - 1.0).abs() < 1e-15);
    for _ in 0..20 {
        let a = random_density(qubit("A"), 2, &mut rng);
        let b = random_density(qubit("A"), 2, &mut rng);
        // Traceless Hermitian 2x2: eigenvalues ±√(x² + |y|²).
        let diff = a.matrix() - b.matrix();
        let x = diff[(0, 0)].re;
        let y = diff[(0, 1)].norm();
        let oracle = 0.5 * 2.0 * (x * x + y * y).sqrt();
        assert!((trace_distance(&a, &b).unwrap() - oracle).abs() < 1e-12);
    }
}

#[test]
fn fuchs_van_de_graaf_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for k in 0..300 {
        let d = 2 + k % 3;
        let space = LabeledSpace::single("A", d).unwrap();
        let a = random_density(space.clone(), 1 + k % d, &mut rng);
        let b = random_density(space, 1 + (k / 3) % d, &mut rng);
        let f = fidelity(&a, &b).unwrap();
        let t = trace_distance(&a, &b).unwrap();
        assert!(1.0 - f <= t + 1e-9);
        assert!(t <= (1.0 - f * f).max(0.0).sqrt() + 1e-9);
    }
}

#[test]
fn uhlmann_noop_when_marginal_matches() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let eta = random_density(LabeledSpace::new([("A", 2), ("M", 2)]).unwrap(), 4, &mut rng);
    let target = partial_trace(&eta, &["M"]).unwrap();
    let fix = uhlmann_fixup(&eta, &target, &["M"]).unwrap();
    assert_eq!(fix.correction, 0.0);
    assert_eq!(fix.state, eta);
}

#[test]
fn uhlmann_fixes_product_state_within_budget() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let rho_a = random_density(qubit("A"), 2, &mut rng);
    let wrong = random_density(qubit("M"), 2, &mut rng);
    let target = random_density(qubit("M"), 2, &mut rng);
    let eta = tensor(&rho_a, &wrong).unwrap();
    let fix = uhlmann_fixup(&eta, &target, &["M"]).unwrap();
    let marginal = partial_trace(&fix.state, &["M"]).unwrap();
    assert!(trace_norm_distance(&marginal, &target).unwrap() <= 1e-8);
    assert!(fix.correction <= fix.budget() + 1e-12, "{} > {}", fix.correction, fix.budget());
    assert!(fix.state.trace() > 1.0 - 1e-12);
}

#[test]
fn uhlmann_on_depolarized_bell_marginal() {
    // η̃ = Bell state on X⊗M, target marginal depolarized by p = 0.01.
    let bell = maximally_entangled("X", "M", 2).unwrap();
    let p = 0.01;
    let target_m = CMatrix::from_row_slice(2, 2, &[c(0.5 + p / 4.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5 - p / 4.0, 0.0)]);
    let target = DensityOperator::new(qubit("M"), target_m).unwrap();
    let fix = uhlmann_fixup(&bell, &target, &["M"]).unwrap();
    let delta = fix.marginal_distance;
    assert!(delta <= 0.01);
    assert!(fix.correction <= 2.0 * (2.0 * delta).sqrt());
    let marginal = partial_trace(&fix.state, &["M"]).unwrap();
    assert!(trace_norm_distance(&marginal, &target).unwrap() <= 1e-8);
}

#[test]
fn uhlmann_rejects_unknown_label() {
    let bell = maximally_entangled("X", "M", 2).unwrap();
    let t = DensityOperator::maximally_mixed(qubit("M"));
    assert!(uhlmann_fixup(&bell, &t, &["Q"]).is_err());
}

#[test]
fn permute_roundtrip() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let space = LabeledSpace::new([("A", 2), ("B", 3), ("C", 2)]).unwrap();
    let rho = random_density(space, 5, &mut rng);
    let p = permute(&rho, &["C", "A", "B"]).unwrap();
    assert_eq!(p.space().dims(), vec![2, 2, 3]);
    let back = permute(&p, &["A", "B", "C"]).unwrap();
    assert_eq!(back.matrix(), rho.matrix());
    // Permutation commutes with partial trace.
    let m1 = partial_trace(&rho, &["A", "C"]).unwrap();
    let m2 = partial_trace(&p, &["A", "C"]).unwrap();
    let m2 = permute(&m2, &["A", "C"]).unwrap();
    assert!(m1.max_abs_diff(&m2) < 1e-15);
}

#[test]
fn validation_names_the_violated_invariant() {
    let space = qubit("A");
    let non_herm = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.3, 0.0), c(0.1, 0.0), c(0.5, 0.0)]);
    let err = DensityOperator::new(space.clone(), non_herm).unwrap_err().to_string();
    assert!(err.contains("Hermitian"), "{err}");
    let bad_trace = CMatrix::identity(2, 2) * c(0.4, 0.0);
    assert!(DensityOperator::new(space.clone(), bad_trace).unwrap_err().to_string().contains("trace"));
    let neg = CMatrix::from_row_slice(2, 2, &[c(1.2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.2, 0.0)]);
    assert!(DensityOperator::new(space, neg).unwrap_err().to_string().contains("semidefinite"));
}

#[test]
fn clamping_removes_negative_dust() {
    let space = qubit("A");
    let m = CMatrix::from_row_slice(2, 2, &[c(1.0 + 1e-12, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1e-12, 0.0)]);
    let rho = DensityOperator::new(space, m).unwrap();
    let cl = rho.clamped();
    assert!(cl.eigenvalues().iter().all(|&l| l >= 0.0));
    assert!((cl.trace() - 1.0).abs() < 1e-15);
}

#[test]
fn json_roundtrip_is_bit_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let rho = random_density(LabeledSpace::new([("A", 2), ("B", 3)]).unwrap(), 4, &mut rng);
    let first: DensityOperator = serde_json::from_str(&serde_json::to_string(&rho).unwrap()).unwrap();
    let text = serde_json::to_string(&first).unwrap();
    let second: DensityOperator = serde_json::from_str(&text).unwrap();
    assert_eq!(first.matrix(), second.matrix());
    assert_eq!(first.space(), second.space());
    assert!(text.starts_with("{\"factors\":[[\"A\",2],[\"B\",3]],\"matrix\":[[["));
}

#[test]
fn pure_amplitude_view() {
    let v = CVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
    let rho = DensityOperator::from_pure(qubit("A"), &v).unwrap();
    let amp = rho.pure_amplitudes(1e-12).unwrap();
    let overlap = (amp.adjoint() * &v)[(0, 0)].norm();
    assert!((overlap - 1.0).abs() < 1e-12);
    assert!(DensityOperator::maximally_mixed(qubit("A")).pure_amplitudes(1e-6).is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_then_trace_recovers_factor(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_density(LabeledSpace::single("A", da).unwrap(), da, &mut rng);
        let b = random_density(LabeledSpace::single("B", db).unwrap(), db, &mut rng);
        let back = partial_trace(&tensor(&a, &b).unwrap(), &["A"]).unwrap();
        prop_assert!(back.max_abs_diff(&a) <= 1e-12);
    }

    #[test]
    fn partial_trace_is_trace_preserving_and_positive(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(LabeledSpace::new([("A", 2), ("B", 3)]).unwrap(), 3, &mut rng);
        let m = partial_trace(&rho, &["B"]).unwrap();
        prop_assert!((m.trace() - 1.0).abs() < 1e-12);
        prop_assert!(m.eigenvalues().iter().all(|&l| l > -1e-12));
        prop_assert!(DensityOperator::new(m.space().clone(), m.matrix().clone()).is_ok());
    }
}
