use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use tamperlab::pauli_clifford::*;
use tamperlab::qstate::linalg::*;
use tamperlab::qstate::{Channel, CqState, Register, RegisterLayout};

fn two_reg_state(rho: Mat, da: usize, db: usize) -> CqState {
    let layout = RegisterLayout::new(vec![Register::qudit("B", db, 0), Register::qudit("A", da, 1)]).unwrap();
    CqState::quantum(layout, rho).unwrap()
}

#[test]
fn group_sizes() {
    assert_eq!(enumerate_group(1, GroupKind::Pauli).unwrap().len(), 4);
    assert_eq!(enumerate_group(2, GroupKind::Pauli).unwrap().len(), 16);
    assert_eq!(enumerate_group(1, GroupKind::CliffordModPhase).unwrap().len(), 24);
    assert_eq!(clifford_group(2).unwrap().len(), 11520);
    assert!(enumerate_group(3, GroupKind::Pauli).is_err());
}

#[test]
fn enumerated_cliffords_are_unitary_and_normalize_paulis() {
    for c in clifford_group(1).unwrap() {
        let u = &c.unitary;
        assert!(max_abs_diff(&(u.adjoint() * u), &identity(2)) < 1e-9);
        for p in pauli_group(1) {
            assert!(c.conjugate_pauli(&p).is_some());
        }
    }
}

#[test]
fn symplectic_composition_matches_matrices_single_qubit() {
    for a in 0..4 {
        for b in 0..4 {
            for pa in 0..4u8 {
                let p = PauliOp { phase: pa, ..PauliOp::from_index(1, a) };
                let q = PauliOp::from_index(1, b);
                let prod = p.compose(&q);
                assert!(max_abs_diff(&prod.matrix(), &(p.matrix() * q.matrix())) < 1e-12);
            }
        }
    }
}

#[test]
fn labels_round_trip() {
    for label in ["IX", "YZ", "-XY", "iZZ", "-iYY"] {
        let p = PauliOp::from_label(label).unwrap();
        assert_eq!(PauliOp::from_label(&p.label()).unwrap().matrix(), p.matrix());
    }
    let y = PauliOp::from_label("Y").unwrap();
    assert!(max_abs_diff(&y.matrix(), &pauli_matrices()[2]) < 1e-15);
}

#[test]
fn uniform_conjugation_count_is_eight() {
    let group = clifford_group(1).unwrap();
    for a in 1..4 {
        for b in 1..4 {
            let p = PauliOp::from_index(1, a);
            let q = PauliOp::from_index(1, b);
            let count = group
                .iter()
                .filter(|c| {
                    // Equality modulo phase, as for the group itself.
                    let img = c.conjugate_pauli(&p).unwrap();
                    img.x == q.x && img.z == q.z
                })
                .count();
            assert_eq!(count, 8, "P={} Q={}", p.label(), q.label());
        }
    }
}

#[test]
fn pq_twirl_example_from_hand_computation() {
    let rho = kron(&projector(&basis_ket(2, 0)), &projector(&basis_ket(2, 0)));
    let s = two_reg_state(rho, 2, 2);
    let x = PauliOp::from_label("X").unwrap();
    let out = clifford_pq_twirl(&s, &["A"], &x, &x).unwrap();
    let mut expect = zeros(4, 4);
    expect[(0, 0)] = r(1.0 / 3.0);
    expect[(1, 1)] = r(2.0 / 3.0);
    assert!(max_abs_diff(&out.quantum_part(), &expect) < 1e-12);
}

#[test]
fn pq_twirl_closed_forms_all_pairs() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let rho = random_density(4, 4, &mut rng);
    let s = two_reg_state(rho, 2, 2);
    for a in 0..4 {
        for b in 0..4 {
            let p = PauliOp::from_index(1, a);
            let q = PauliOp::from_index(1, b);
            let brute = clifford_pq_twirl(&s, &["A"], &p, &q).unwrap();
            let closed = clifford_pq_twirl_closed_form(&s, &["A"], &p, &q).unwrap();
            assert!(max_abs_diff(&brute.quantum_part(), &closed.quantum_part()) < 1e-9);
        }
    }
}

#[test]
fn one_design_twirl_examples() {
    let plus = Vector::from_vec(vec![r(0.5f64.sqrt()), r(0.5f64.sqrt())]);
    let one = basis_ket(2, 1);
    let layout = RegisterLayout::new(vec![Register::qubits("A", 1, 0), Register::qubits("B", 1, 1)]).unwrap();
    let s = CqState::quantum(layout, kron(&projector(&plus), &projector(&one))).unwrap();
    let out = pauli_one_design_twirl(&s, &["A"]).unwrap();
    let expect = kron(&maximally_mixed(2), &projector(&one));
    assert!(max_abs_diff(&out.quantum_part(), &expect) < 1e-12);
}

#[test]
fn side_info_decomposition_examples() {
    // Identity attack: Phi1 = identity, Phi2 = 0.
    let id = Channel::identity(vec![2, 2]);
    let dec = twirl_with_side_info(&id, 1).unwrap();
    assert!(max_abs_diff(&dec.phi1.choi(), &Channel::identity(vec![2]).choi()) < 1e-12);
    assert!(dec.phi2.kraus.iter().all(|k| k.norm() < 1e-12));

    // X on A: Phi1 = 0, Phi2 = identity on E.
    let x = Channel::unitary(kron(&pauli_matrices()[1], &identity(2)), vec![2, 2]).unwrap();
    let dec = twirl_with_side_info(&x, 1).unwrap();
    assert!(dec.phi1.kraus.iter().all(|k| k.norm() < 1e-12));
    let s2 = tamperlab::qstate::linalg::superop(&dec.phi2.kraus);
    assert!(max_abs_diff(&s2, &identity(4)) < 1e-12);

    // Full depolarizer on A: identity component weight 1/4.
    let dep = Channel::depolarizing(2, 1.0).tensor(&Channel::identity(vec![2]));
    let dec = twirl_with_side_info(&dep, 1).unwrap();
    let s1 = tamperlab::qstate::linalg::superop(&dec.phi1.kraus);
    assert!(max_abs_diff(&s1, &identity(4).scale(0.25)) < 1e-12);
    assert!((dec.residual_bound - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn twirl_identity_matches_enumeration_and_bound() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    for n_a in 1..=2usize {
        let da = 1 << n_a;
        let de = 2;
        let dr = 2;
        let attack = Channel::random_stinespring(vec![da, de], 2, &mut rng);
        let dec = twirl_with_side_info(&attack, n_a).unwrap();
        // Phi1 + Phi2 is trace preserving.
        let mut all = dec.phi1.kraus.clone();
        all.extend(dec.phi2.kraus.iter().cloned());
        let mut s = zeros(de, de);
        for k in &all {
            s += k.adjoint() * k;
        }
        assert!(max_abs_diff(&s, &identity(de)) < 1e-8);
        let trials = if n_a == 1 { 20 } else { 3 };
        for _ in 0..trials {
            let rho = random_density(da * de * dr, 3, &mut rng);
            let brute = clifford_twirled_attack(&attack, n_a, &rho, dr).unwrap();
            let exact = dec.apply_exact(&rho, dr);
            assert!(max_abs_diff(&brute, &exact) < 1e-9);
            let approx = dec.apply_approx(&rho, dr);
            assert!(trace_norm_herm(&(brute - approx)) <= dec.residual_bound + 1e-6);
        }
    }
}

#[test]
fn transpose_trick() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    assert!(transpose_trick_check(&identity(2)));
    assert!(transpose_trick_check(&pauli_matrices()[1]));
    let c = random_clifford(2, &mut rng).unwrap();
    assert!(transpose_trick_check(&c));
}

#[test]
fn sampled_cliffords_normalize_paulis() {
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    for n in 1..=4 {
        for _ in 0..5 {
            let u = random_clifford(n, &mut rng).unwrap();
            let d = 1 << n;
            assert!(max_abs_diff(&(u.adjoint() * &u), &identity(d)) < 1e-9);
            let op = CliffordOp { n, unitary: u, source: CliffordSource::Sampled(0) };
            for idx in [1usize, 2, 3, (1 << (2 * n)) - 1] {
                assert!(op.conjugate_pauli(&PauliOp::from_index(n, idx)).is_some());
            }
        }
    }
}

#[test]
fn ideal_family_is_one_design() {
    let fam = KeyedUnitaryFamily::new(1, DesignGrade::Ideal).unwrap();
    let rho = projector(&basis_ket(2, 0));
    let mut acc = zeros(2, 2);
    for k in 0..fam.key_space {
        let c = fam.sample(k).unwrap();
        acc += &c.unitary * &rho * c.unitary.adjoint();
    }
    acc = acc.unscale(fam.key_space as f64);
    assert!(max_abs_diff(&acc, &maximally_mixed(2)) < 1e-9);
    assert!(!KeyedUnitaryFamily::new(1, DesignGrade::OneDesign).unwrap().supports_tamper_detection());
}
