use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::channels::{channel_from_resource_state, ResourceState, WiretapChannel};
use crate::entropic::von_neumann_entropy;
use crate::exec::Execution;
use crate::qcore::linalg::{self, c, CMatrix};
use crate::qcore::random::random_density;
use crate::qcore::{maximally_entangled, partial_trace, tensor, DensityOperator, LabeledSpace};
use crate::rates::{theorem1_rate, unassisted_rate};

fn sp(l: &str, d: usize) -> LabeledSpace {
    LabeledSpace::single(l, d).unwrap()
}

fn space(f: &[(&str, usize)]) -> LabeledSpace {
    LabeledSpace::new(f.iter().map(|(l, d)| (*l, *d))).unwrap()
}

fn identity_no_eve() -> WiretapChannel {
    WiretapChannel::without_eve(QuantumChannel::identity(sp("A", 2), sp("B", 2)).unwrap(), "E").unwrap()
}

fn broadcast() -> WiretapChannel {
    let mut v = CMatrix::zeros(4, 2);
    v[(0, 0)] = c(1.0, 0.0);
    v[(3, 1)] = c(1.0, 0.0);
    let ch = QuantumChannel::isometry(sp("A", 2), space(&[("B", 2), ("E", 2)]), v).unwrap();
    WiretapChannel::from_channel(ch).unwrap()
}

/// Completely depolarising to Bob, identity to Eve.
fn depolarize_bob() -> WiretapChannel {
    let bob = QuantumChannel::completely_depolarizing(LabeledSpace::trivial(), sp("B", 2)).unwrap();
    let eve = QuantumChannel::identity(sp("A", 2), sp("E", 2)).unwrap();
    let ch = bob.tensor(&eve).unwrap();
    let ch = QuantumChannel::new(sp("A", 2), ch.output().clone(), ch.kraus().to_vec()).unwrap();
    WiretapChannel::from_channel(ch).unwrap()
}

fn bell_resource() -> ResourceState {
    let bell = maximally_entangled("A'", "B'", 2).unwrap();
    channel_from_resource_state(&tensor(&bell, &DensityOperator::basis(sp("E'", 1), 0).unwrap()).unwrap()).unwrap()
}

fn quick() -> OptimizerConfig {
    OptimizerConfig {
        restarts: 4,
        max_iters: 60,
        seed: 7,
        ..OptimizerConfig::default()
    }
}

#[test]
fn config_validation_and_json() {
    assert!(OptimizerConfig::default().validate().is_ok());
    let bad = OptimizerConfig { restarts: 0, ..OptimizerConfig::default() };
    assert!(bad.validate().is_err());
    let bad = OptimizerConfig { tolerance: -1.0, ..OptimizerConfig::default() };
    assert!(bad.validate().is_err());
    let parsed: OptimizerConfig = serde_json::from_str(r#"{"restarts": 3, "seed": 9}"#).unwrap();
    assert_eq!(parsed.restarts, 3);
    assert_eq!(parsed.max_iters, OptimizerConfig::default().max_iters);
    assert!(serde_json::from_str::<OptimizerConfig>(r#"{"restart": 3}"#).is_err());
}

#[test]
fn theorem1_trivial_resource_identity() {
    let r = optimize_theorem1(&identity_no_eve(), &ResourceState::trivial(), &quick()).unwrap();
    assert!(r.best_value >= 1.0 - 1e-6, "{}", r.best_value);
    let report = r.report.as_ref().unwrap();
    assert!(report.feasible && report.constraint_residual <= 1e-6);
}

#[test]
fn theorem1_bell_resource_reaches_superdense_rate() {
    let res = bell_resource();
    let r = optimize_theorem1(&identity_no_eve(), &res, &quick()).unwrap();
    assert!(r.best_value >= 2.0 - 1e-3, "{}", r.best_value);
    let ens = r.best_ensemble.as_ref().unwrap();
    let again = theorem1_rate(ens, &identity_no_eve(), &res).unwrap();
    assert!((again.rate - r.best_value).abs() <= 1e-9);
    assert!(again.constraint_residual <= 1e-6);
}

#[test]
fn theorem1_symmetric_broadcast_is_not_positive() {
    let r = optimize_theorem1(&broadcast(), &ResourceState::trivial(), &quick()).unwrap();
    assert!(r.best_value <= 1e-6, "{}", r.best_value);
}

#[test]
fn theorem1_random_resource_is_feasible_and_reproducible() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let zeta = random_density(space(&[("A'", 2), ("B'", 2), ("E'", 2)]), 8, &mut rng);
    let res = channel_from_resource_state(&zeta).unwrap();
    let ch = QuantumChannel::random(sp("A", 2), space(&[("B", 2), ("E", 2)]), 2, &mut rng).unwrap();
    let n = WiretapChannel::from_channel(ch).unwrap();
    let cfg = OptimizerConfig { restarts: 3, max_iters: 24, ..quick() };
    let r = optimize_theorem1(&n, &res, &cfg).unwrap();
    let ens = r.best_ensemble.as_ref().unwrap();
    assert!(ens.len() <= 2 * 2 * 2);
    let again = theorem1_rate(ens, &n, &res).unwrap();
    assert!(again.constraint_residual <= 1e-6);
    assert!((again.rate - r.best_value).abs() <= 1e-9);

    // Round trip through JSON keeps the value.
    let text = serde_json::to_string(&r).unwrap();
    let back: OptResult = serde_json::from_str(&text).unwrap();
    let reloaded = theorem1_rate(back.best_ensemble.as_ref().unwrap(), &n, &res).unwrap();
    assert!((reloaded.rate - r.best_value).abs() <= 1e-9);
}

#[test]
fn results_are_deterministic_and_independent_of_execution() {
    let seq = OptimizerConfig { execution: Execution::Sequential, ..quick() };
    let par = OptimizerConfig { execution: Execution::Parallel, ..quick() };
    let res = bell_resource();
    let a = optimize_theorem1(&identity_no_eve(), &res, &seq).unwrap();
    let b = optimize_theorem1(&identity_no_eve(), &res, &par).unwrap();
    let c2 = optimize_theorem1(&identity_no_eve(), &res, &par).unwrap();
    assert_eq!(a, b);
    assert_eq!(b, c2);
}

#[test]
fn more_restarts_never_lower_the_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ch = QuantumChannel::random(sp("A", 2), space(&[("B", 2), ("E", 2)]), 2, &mut rng).unwrap();
    let n = WiretapChannel::from_channel(ch).unwrap();
    let mut last = f64::NEG_INFINITY;
    let mut previous: Vec<Option<f64>> = Vec::new();
    for restarts in 1..=4 {
        let r = optimize_unassisted(&n, &OptimizerConfig { restarts, max_iters: 30, ..quick() }).unwrap();
        assert!(r.best_value >= last);
        assert_eq!(r.restart_values[..previous.len()], previous[..]);
        last = r.best_value;
        previous = r.restart_values;
    }
}

#[test]
fn unassisted_examples() {
    let id = optimize_unassisted(&identity_no_eve(), &quick()).unwrap();
    assert!((id.best_value - 1.0).abs() < 1e-2);
    let oracle = grid_oracle_unassisted(&identity_no_eve(), &GridCaps::default()).unwrap();
    assert!((oracle - 1.0).abs() < 1e-2);

    let b = optimize_unassisted(&broadcast(), &quick()).unwrap();
    assert!(b.best_value.abs() < 1e-6, "{}", b.best_value);

    let depol = QuantumChannel::completely_depolarizing(sp("A", 2), space(&[("B", 2), ("E", 2)])).unwrap();
    let depol = WiretapChannel::from_channel(depol).unwrap();
    let d = optimize_unassisted(&depol, &quick()).unwrap();
    assert!(d.best_value.abs() < 1e-10);
    let again = unassisted_rate(d.best_ensemble.as_ref().unwrap(), &depol).unwrap();
    assert!((again.rate - d.best_value).abs() <= 1e-9);
}

#[test]
fn grid_oracle_examples() {
    let caps = GridCaps::default();
    let v = grid_oracle(&identity_no_eve(), &ResourceState::trivial(), &caps).unwrap();
    assert!((v - 1.0).abs() < 1e-2);
    let v = grid_oracle(&broadcast(), &ResourceState::trivial(), &caps).unwrap();
    assert!(v <= 1e-9);
    let v = grid_oracle_unassisted(&broadcast(), &caps).unwrap();
    assert!(v <= 1e-9);

    let n = depolarize_bob();
    let oracle = grid_oracle_unassisted(&n, &caps).unwrap();
    let opt = optimize_unassisted(&n, &quick()).unwrap();
    assert!(oracle <= opt.best_value + 1e-2);
}

#[test]
fn grid_oracle_refuses_large_grids() {
    let caps = GridCaps::default();
    let err = grid_oracle(&identity_no_eve(), &bell_resource(), &caps).unwrap_err();
    assert!(err.is_resource_limit());
    assert!(err.to_string().contains("cap is 10000000"), "{err}");
    assert_eq!(grid_size(2, &caps), 144 * 145 / 2 * 11);
}

#[test]
fn grid_states_are_normalised_and_cover_the_poles() {
    let n = identity_no_eve();
    let caps = GridCaps { angles: 4, members: 1, simplex_steps: 1, ..GridCaps::default() };
    // One member carries no information.
    assert!(grid_oracle_unassisted(&n, &caps).unwrap().abs() < 1e-12);
    assert_eq!(grid_size(3, &caps), 4u128.pow(4));
}

#[test]
fn channel_functional_examples() {
    let cfg = OptimizerConfig { restarts: 3, max_iters: 150, ..quick() };
    let constant = optimize_channel_functional(|_| Ok(0.25), &sp("A", 2), &sp("B", 2), Sense::Maximize, &cfg).unwrap();
    assert_eq!(constant.best_value, 0.25);
    let ch = constant.best_channel.as_ref().unwrap();
    assert!(ch.trace_preservation_defect() < 1e-10);

    let zero = DensityOperator::basis(sp("A", 2), 0).unwrap();
    let entropy = |ch: &QuantumChannel| Ok(von_neumann_entropy(&crate::channels::apply(ch, &zero, &["A"])?));
    let best = optimize_channel_functional(entropy, &sp("A", 2), &sp("B", 2), Sense::Maximize, &cfg).unwrap();
    assert!((best.best_value - 1.0).abs() < 1e-6, "{}", best.best_value);

    // Product ρ_B ⊗ ρ_D purified on E: min S(BF) over T: E → F reaches 0.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rho_b = random_density(sp("B", 2), 2, &mut rng);
    let rho_d = random_density(sp("D", 2), 2, &mut rng);
    let prod = tensor(&rho_b, &rho_d).unwrap();
    let psi = crate::qcore::purify(&prod, "E", crate::qcore::Purification::Minimal).unwrap();
    let be = partial_trace(&psi, &["B", "E"]).unwrap();
    let objective = |t: &QuantumChannel| {
        let omega = crate::channels::apply(t, &be, &["E"])?;
        Ok(von_neumann_entropy(&omega))
    };
    let e_dim = be.space().dim_of("E").unwrap();
    let cfg = OptimizerConfig { restarts: 4, max_iters: 300, kraus_rank: Some(2), ..quick() };
    let min = optimize_channel_functional(objective, &sp("E", e_dim), &sp("F", 2), Sense::Minimize, &cfg).unwrap();
    assert!(min.best_value <= 1e-4, "{}", min.best_value);
}

#[test]
fn stinespring_points_are_cptp() {
    let cfg = OptimizerConfig { restarts: 5, max_iters: 2, ..quick() };
    let r = optimize_channel_functional(
        |ch| Ok(ch.trace_preservation_defect()),
        &sp("A", 3),
        &sp("B", 2),
        Sense::Maximize,
        &cfg,
    )
    .unwrap();
    assert!(r.best_value <= 1e-10);
}

#[test]
fn warm_start_is_used() {
    let id = QuantumChannel::identity(sp("A", 2), sp("B", 2)).unwrap();
    let fid = move |ch: &QuantumChannel| Ok(-ch.action_distance(&QuantumChannel::identity(sp("A", 2), sp("B", 2))?)?);
    let cfg = OptimizerConfig { restarts: 1, max_iters: 1, ..quick() };
    let r = optimize_channel_functional_with(fid, &sp("A", 2), &sp("B", 2), Sense::Maximize, &cfg, &[id]).unwrap();
    assert!(r.best_value > -1e-12);
    let too_big = QuantumChannel::completely_depolarizing(sp("A", 2), sp("B", 2)).unwrap();
    let cfg = OptimizerConfig { kraus_rank: Some(1), ..cfg };
    assert!(optimize_channel_functional_with(|_| Ok(0.0), &sp("A", 2), &sp("B", 2), Sense::Maximize, &cfg, &[too_big]).is_err());
}

#[test]
fn projection_repairs_average_marginal() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let zeta = random_density(space(&[("A'", 2), ("B'", 2), ("E'", 2)]), 8, &mut rng);
    let res = channel_from_resource_state(&zeta).unwrap();
    let ch = QuantumChannel::random(sp("A", 2), space(&[("B", 2), ("E", 2)]), 2, &mut rng).unwrap();
    let n = WiretapChannel::from_channel(ch).unwrap();
    for _ in 0..10 {
        let states: Vec<_> = (0..3).map(|_| random_density(space(&[("A", 2), ("A''", 2)]), 4, &mut rng)).collect();
        let ens = CqEnsemble::from_states(vec![0.2, 0.3, 0.5], states).unwrap();
        let before = theorem1_rate(&ens, &n, &res).unwrap().constraint_residual;
        let (fixed, report, how) = project_to_marginal(&ens, &n, &res).unwrap();
        assert!(report.constraint_residual <= 1e-6);
        assert!(report.constraint_residual <= before);
        assert_ne!(how, Projection::None);
        assert!(fixed.len() <= ens.len() + 1);
        let avg = fixed.average();
        let m = partial_trace(&avg, &["A''"]).unwrap();
        assert!(linalg::trace_norm_hermitian(&(m.matrix() - res.marginal().matrix())) <= 1e-6);
    }
    let feasible = CqEnsemble::from_states(
        vec![1.0],
        vec![tensor(&random_density(sp("A", 2), 2, &mut rng), &res.marginal().relabeled(&["A''"]).unwrap()).unwrap()],
    )
    .unwrap();
    let (_, r, _) = project_to_marginal(&feasible, &n, &res).unwrap();
    assert!(r.constraint_residual < 1e-12);
}
