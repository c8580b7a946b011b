use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use tamperlab::qstate::linalg::*;
use tamperlab::qstate::*;

fn two_qubits() -> RegisterLayout {
    RegisterLayout::new(vec![Register::qubits("a", 1, 0), Register::qubits("b", 1, 1)]).unwrap()
}

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

#[test]
fn bell_pair_against_product() {
    let phi = CqState::quantum(two_qubits(), epr()).unwrap();
    let zz = CqState::pure(two_qubits(), &basis_ket(4, 0)).unwrap();
    let (td, fid) = metrics(&phi, &zz).unwrap();
    // Pure states: F = |<00|Phi>| = 1/sqrt 2 and ||.||_1 = 2 sqrt(1 - F^2).
    assert!((fid - 0.5f64.sqrt()).abs() < 1e-9);
    assert!((td - 2f64.sqrt()).abs() < 1e-9);
}

#[test]
fn purification_of_diagonal_state() {
    let rho = Mat::from_diagonal(&Vector::from_vec(vec![r(0.75), r(0.25)]));
    let p = canonical_purification(&rho).unwrap();
    let v = p.pure_vector().unwrap();
    assert!((v[0].re - 0.75f64.sqrt()).abs() < 1e-9);
    assert!((v[3].re - 0.5).abs() < 1e-9);
    assert!(v[1].norm() < 1e-12 && v[2].norm() < 1e-12);
    let back = p.tensor_and_trace(&["S"]).unwrap();
    assert!(max_abs_diff(&back.quantum_part(), &rho) < 1e-12);
}

#[test]
fn schmidt_rank_three() {
    let mut g = rng(3);
    let ua = haar_unitary(4, &mut g);
    let ub = haar_unitary(4, &mut g);
    let v = with_schmidt(&[0.5, 0.3, 0.2], &ua, &ub);
    let layout = RegisterLayout::new(vec![Register::qubits("a", 2, 0), Register::qubits("b", 2, 1)]).unwrap();
    let s = CqState::pure(layout, &v).unwrap();
    let prof = schmidt_structure(&s, &["a"]).unwrap();
    assert_eq!(prof.declared_number, Some(3));
    let mut sq: Vec<f64> = prof.coefficients.iter().map(|c| c * c).collect();
    sq.sort_by(|a, b| b.partial_cmp(a).unwrap());
    for (x, y) in sq.iter().zip([0.5, 0.3, 0.2]) {
        assert!((x - y).abs() < 1e-9);
    }
}

#[test]
fn mixed_states_have_no_schmidt_profile() {
    let s = CqState::quantum(two_qubits(), maximally_mixed(4)).unwrap();
    assert!(schmidt_structure(&s, &["a"]).is_err());
}

#[test]
fn bell_test_accepts_pairs_and_rejects_products() {
    let layout = RegisterLayout::new(vec![Register::qubits("e", 2, 0), Register::qubits("eh", 2, 1)]).unwrap();
    let pairs = CqState::quantum(layout.clone(), epr_block(2)).unwrap();
    let out = bell_test(&pairs, &["e"], &["eh"]).unwrap();
    assert!((out.accept_prob - 1.0).abs() < 1e-12);

    let mixed = CqState::quantum(layout.clone(), maximally_mixed(16)).unwrap();
    let out = bell_test(&mixed, &["e"], &["eh"]).unwrap();
    assert!((out.accept_prob - 1.0 / 16.0).abs() < 1e-12);

    let mut g = rng(5);
    for _ in 0..20 {
        let a = random_pure(4, &mut g);
        let b = random_pure(4, &mut g);
        let v = kron_vec(&a, &b);
        let p = bell_accept_pure(&v, 2);
        assert!(p <= 0.25 + 1e-12, "product state accepted with {p}");
        let dense = bell_test(&CqState::pure(layout.clone(), &v).unwrap(), &["e"], &["eh"]).unwrap();
        assert!((dense.accept_prob - p).abs() < 1e-10);
    }
}

#[test]
fn measurement_splits_branches() {
    let layout = RegisterLayout::new(vec![Register::qubits("q", 1, 0)]).unwrap();
    let plus = Vector::from_vec(vec![r(0.5f64.sqrt()), r(0.5f64.sqrt())]);
    let s = CqState::pure(layout, &plus).unwrap().measure("q").unwrap();
    assert_eq!(s.branches().len(), 2);
    for m in s.branches().values() {
        assert!((m.trace().re - 0.5).abs() < 1e-12);
    }
    assert!(s.layout().quantum().next().is_none());
}

#[test]
fn classical_marginals_sum_branches() {
    let layout = RegisterLayout::new(vec![Register::bits("x", 1, 0), Register::qubits("q", 1, 1)]).unwrap();
    let mut b = BTreeMap::new();
    b.insert(vec![0], projector(&basis_ket(2, 0)).scale(0.25));
    b.insert(vec![1], projector(&basis_ket(2, 1)).scale(0.75));
    let s = CqState::new(layout, b).unwrap();
    let q = s.tensor_and_trace(&["q"]).unwrap();
    assert!((q.quantum_part()[(1, 1)].re - 0.75).abs() < 1e-12);
    let x = s.tensor_and_trace(&["x"]).unwrap();
    assert_eq!(x.branches().len(), 2);
}

#[test]
fn invalid_states_are_rejected() {
    let bad = Mat::from_diagonal(&Vector::from_vec(vec![r(1.5), r(-0.5)]));
    let layout = RegisterLayout::new(vec![Register::qubits("q", 1, 0)]).unwrap();
    assert!(CqState::quantum(layout.clone(), bad).is_err());
    assert!(CqState::quantum(layout, identity(2)).is_err());
    assert!(RegisterLayout::new(vec![Register::qubits("q", 1, 0), Register::qubits("q", 1, 1)]).is_err());
    assert!(RegisterLayout::new(vec![Register::qubits("big", 12, 0)]).is_err());
}

#[test]
fn channel_basics() {
    let dep = Channel::depolarizing(4, 1.0);
    let rho = random_density(4, 2, &mut rng(1));
    assert!(max_abs_diff(&dep.apply(&rho), &maximally_mixed(4)) < 1e-12);

    let u = haar_unitary(2, &mut rng(2));
    let ch = Channel::unitary(u.clone(), vec![2]).unwrap();
    let back = ch.then(&Channel::unitary(u.adjoint(), vec![2]).unwrap()).unwrap();
    assert!(max_abs_diff(&back.superop(), &Channel::identity(vec![2]).superop()) < 1e-10);

    // Choi state of the identity is the maximally entangled state.
    assert!(max_abs_diff(&Channel::identity(vec![2]).choi(), &epr()) < 1e-12);

    let mut g = rng(4);
    let st = Channel::random_stinespring(vec![2, 2], 3, &mut g);
    st.validate(1e-9).unwrap();
    assert!(Channel::new(vec![identity(2).scale(2.0)], vec![2], vec![2], ChannelKind::Cptp).is_err());
}

#[test]
fn channel_on_subsystem_matches_embedding() {
    let mut g = rng(8);
    let ch = Channel::random_stinespring(vec![2], 2, &mut g);
    let rho = random_density(8, 8, &mut g);
    let layout = RegisterLayout::new(vec![
        Register::qubits("a", 1, 0),
        Register::qubits("b", 1, 1),
        Register::qubits("c", 1, 2),
    ])
    .unwrap();
    let s = CqState::quantum(layout, rho.clone()).unwrap();
    let out = s.apply_channel(&ch, &["b"]).unwrap().quantum_part();
    let full: Vec<Mat> = ch.kraus.iter().map(|k| kron_all(&[identity(2), k.clone(), identity(2)])).collect();
    let mut expect = zeros(8, 8);
    for k in &full {
        expect += k * &rho * k.adjoint();
    }
    assert!(max_abs_diff(&out, &expect) < 1e-12);
}

#[test]
fn reorder_roundtrip() {
    let mut g = rng(9);
    let rho = random_density(8, 3, &mut g);
    let layout = RegisterLayout::new(vec![
        Register::qubits("a", 1, 0),
        Register::qubits("b", 2, 1),
    ])
    .unwrap();
    let s = CqState::quantum(layout, rho).unwrap();
    let back = s.reorder(&["b", "a"]).unwrap().reorder(&["a", "b"]).unwrap();
    let (td, _) = metrics(&s, &back).unwrap();
    assert!(td < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_distance_contracts_under_channels(seed in any::<u64>()) {
        let mut g = rng(seed);
        let rho = random_density(4, 4, &mut g);
        let sigma = random_density(4, 2, &mut g);
        let ch = Channel::random_stinespring(vec![4], 2, &mut g);
        let before = trace_norm_herm(&(&rho - &sigma));
        let after = trace_norm_herm(&(ch.apply(&rho) - ch.apply(&sigma)));
        prop_assert!(after <= before + 1e-10);
    }

    #[test]
    fn fidelity_sandwiches_trace_distance(seed in any::<u64>()) {
        let mut g = rng(seed);
        let rho = random_density(4, 3, &mut g);
        let sigma = random_density(4, 4, &mut g);
        let f = fidelity(&rho, &sigma);
        let half_td = 0.5 * trace_norm_herm(&(&rho - &sigma));
        prop_assert!(1.0 - f <= half_td + 1e-9);
        prop_assert!(half_td <= (1.0 - f * f).max(0.0).sqrt() + 1e-9);
    }

    #[test]
    fn partial_trace_preserves_trace_and_positivity(seed in any::<u64>()) {
        let mut g = rng(seed);
        let rho = random_density(8, 5, &mut g);
        let m = partial_trace(&rho, &[2, 4], &[1]);
        prop_assert!((m.trace().re - 1.0).abs() < 1e-10);
        prop_assert!(is_psd(&m, 1e-10));
    }

    #[test]
    fn product_states_pass_bell_test_rarely(seed in any::<u64>(), n in 1usize..=3) {
        let mut g = rng(seed);
        let d = 1usize << n;
        let v = kron_vec(&random_pure(d, &mut g), &random_pure(d, &mut g));
        prop_assert!(bell_accept_pure(&v, n) <= 1.0 / d as f64 + 1e-12);
    }
}

#[test]
fn degenerate_projectors_have_finite_spectra() {
    for d in [8usize, 16] {
        let p = projector(&max_entangled(d));
        let v = eigvalsh(&p);
        assert!((v[v.len() - 1] - 1.0).abs() < 1e-10);
        assert!(v[0].abs() < 1e-10);
        let (_, vecs) = eigh(&p);
        assert!(vecs.iter().all(|z| z.re.is_finite()));
    }
}
