use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use tamperlab::adversary::*;
use tamperlab::qstate::linalg::*;
use tamperlab::qstate::*;
use tamperlab::LabError;

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn three_qubits() -> RegisterLayout {
    RegisterLayout::new(vec![Register::qubits("a", 1, 0), Register::qubits("b", 1, 1), Register::qubits("c", 1, 2)]).unwrap()
}

fn shape(l: &RegisterLayout, s: usize) -> ShareShape {
    ShareShape::of(l, s)
}

/// Code registers plus a reference purifying them.
fn with_reference(code: &RegisterLayout) -> (RegisterLayout, usize) {
    let d = code.quantum_dim();
    let mut regs = code.registers().to_vec();
    regs.push(Register::qudit("ref", d, 99));
    (RegisterLayout::new(regs).unwrap(), d)
}

#[test]
fn identity_adversary_leaves_states_alone() {
    let l = three_qubits();
    let adv = Adversary::identity(&l).unwrap();
    let s = CqState::quantum(l.clone(), random_density(8, 3, &mut rng(1))).unwrap();
    let (td, _) = metrics(&adv.apply(&s).unwrap(), &s).unwrap();
    assert!(td < 1e-12);
}

#[test]
fn z_conjugation_on_one_share() {
    let l = three_qubits();
    let z = pauli_matrices()[3].clone();
    let maps = vec![
        LocalMap::quantum_only(&shape(&l, 0), Channel::unitary(z.clone(), vec![2]).unwrap()),
        LocalMap::identity(&shape(&l, 1)),
        LocalMap::identity(&shape(&l, 2)),
    ];
    let adv = Adversary::build_lo(&l, maps).unwrap();
    let plus = Vector::from_vec(vec![r(0.5f64.sqrt()), r(0.5f64.sqrt())]);
    let psi = kron_vec(&kron_vec(&plus, &basis_ket(2, 0)), &basis_ket(2, 0));
    let out = adv.apply(&CqState::pure(l.clone(), &psi).unwrap()).unwrap();
    let a = out.tensor_and_trace(&["a"]).unwrap().quantum_part();
    assert!((a[(0, 1)].re + 0.5).abs() < 1e-12);
}

#[test]
fn lo_choi_factorizes() {
    let l = three_qubits();
    let mut g = rng(2);
    let chans: Vec<Channel> = (0..3).map(|_| Channel::random_stinespring(vec![2], 3, &mut g)).collect();
    let maps = (0..3).map(|s| LocalMap::quantum_only(&shape(&l, s), chans[s].clone())).collect();
    let adv = Adversary::build_lo(&l, maps).unwrap();
    let (lr, d) = with_reference(&l);
    let phi = CqState::pure(lr, &max_entangled(d)).unwrap();
    let composite = adv.apply(&phi).unwrap().quantum_part();
    // Factors (out_a, ref_a, out_b, ref_b, out_c, ref_c) -> (a, b, c, ref).
    let product = kron_all(&[chans[0].choi(), chans[1].choi(), chans[2].choi()]);
    let expect = permute_factors(&product, &[2, 2, 2, 2, 2, 2], &[0, 2, 4, 1, 3, 5]);
    assert!(max_abs_diff(&composite, &expect) < 1e-12);
}

#[test]
fn malformed_lo_is_rejected() {
    let l = three_qubits();
    let wide = LocalMap::quantum_only(&shape(&l, 0), Channel::identity(vec![4]));
    let maps = vec![wide, LocalMap::identity(&shape(&l, 1)), LocalMap::identity(&shape(&l, 2))];
    assert!(Adversary::build_lo(&l, maps).is_err());
    let lossy = Channel::from_kraus_unchecked(vec![identity(2).scale(0.5)], vec![2], vec![2], ChannelKind::Cptp);
    let maps = vec![LocalMap::quantum_only(&shape(&l, 0), lossy), LocalMap::identity(&shape(&l, 1)), LocalMap::identity(&shape(&l, 2))];
    assert!(matches!(Adversary::build_lo(&l, maps), Err(LabError::BadChannel { .. })));
}

#[test]
fn zero_budgets_match_plain_local_operations() {
    let l = three_qubits();
    let mut g = rng(3);
    let maps: Vec<LocalMap> = (0..3).map(|s| LocalMap::quantum_only(&shape(&l, s), Channel::random_stinespring(vec![2], 2, &mut g))).collect();
    let lo = Adversary::build_lo(&l, maps.clone()).unwrap();
    let bounded = Adversary::build_lo_bounded(&l, maps, None, &[0, 0, 0]).unwrap();
    let s = CqState::quantum(l.clone(), random_density(8, 8, &mut g)).unwrap();
    let (td, _) = metrics(&lo.apply(&s).unwrap(), &bounded.apply(&s).unwrap()).unwrap();
    assert!(td < 1e-12);
}

fn epr_ancilla(shares: (usize, usize)) -> CqState {
    let l = RegisterLayout::new(vec![Register::qubits("e1", 1, shares.0), Register::qubits("e2", 1, shares.1)]).unwrap();
    CqState::quantum(l, epr()).unwrap()
}

#[test]
fn shared_pair_within_budget() {
    let l = three_qubits();
    let anc = epr_ancilla((0, 2));
    let full = l.concat(anc.layout()).unwrap();
    let mut g = rng(4);
    let maps = (0..3)
        .map(|s| {
            let sh = shape(&full, s);
            LocalMap::quantum_only(&sh, Channel::random_stinespring(sh.quantum_dims.clone(), 2, &mut g))
        })
        .collect();
    let adv = Adversary::build_lo_bounded(&l, maps, Some(anc), &[1, 0, 1]).unwrap();
    let s = CqState::quantum(l.clone(), maximally_mixed(8)).unwrap();
    let out = adv.apply(&s).unwrap();
    assert_eq!(out.layout(), &l);
    assert!((out.trace() - 1.0).abs() < 1e-10);
}

#[test]
fn budget_violation_is_reported() {
    let l = three_qubits();
    let al = RegisterLayout::new(vec![Register::qubits("e", 2, 0)]).unwrap();
    let anc = CqState::quantum(al, maximally_mixed(4)).unwrap();
    let full = l.concat(anc.layout()).unwrap();
    let maps = (0..3).map(|s| LocalMap::identity(&shape(&full, s))).collect();
    match Adversary::build_lo_bounded(&l, maps, Some(anc), &[1, 0, 0]) {
        Err(LabError::BudgetExceeded { share: 0, used: 2, budget: 1 }) => {}
        other => panic!("expected a budget error, got {other:?}"),
    }
}

fn two_qubit_shares() -> RegisterLayout {
    RegisterLayout::new(vec![Register::qubits("a", 1, 0), Register::qubits("b", 1, 1)]).unwrap()
}

#[test]
fn zero_round_strategy_is_identity() {
    let l = two_qubit_shares();
    let tree = LoccNode::finish(vec![LocalMap::identity(&shape(&l, 0)), LocalMap::identity(&shape(&l, 1))]);
    let adv = Adversary::build_locc(&l, tree, DEFAULT_ROUND_CAP).unwrap();
    let s = CqState::quantum(l.clone(), random_density(4, 2, &mut rng(5))).unwrap();
    let (td, _) = metrics(&adv.apply(&s).unwrap(), &s).unwrap();
    assert!(td < 1e-12);
    assert_eq!(adv.model, Model::Locc { rounds: 0 });
}

fn measure_then_flip(l: &RegisterLayout) -> LoccNode {
    let (sa, sb) = (shape(l, 0), shape(l, 1));
    let inst = Instrument::projective(&identity(2));
    let instrument = inst.branches.iter().map(|b| LocalMap::quantum_only(&sa, b.clone())).collect();
    let responses = (0..2)
        .map(|o| {
            let u = if o == 1 { pauli_matrices()[1].clone() } else { identity(2) };
            LoccNode::Finish(vec![LocalMap::identity(&sa), LocalMap::quantum_only(&sb, Channel::unitary(u, vec![2]).unwrap())])
        })
        .collect();
    LoccNode::Round { actor: 0, instrument, responses }
}

#[test]
fn classical_control_gives_two_transcripts() {
    let l = two_qubit_shares();
    let adv = Adversary::build_locc(&l, measure_then_flip(&l), DEFAULT_ROUND_CAP).unwrap();
    assert_eq!(adv.transcripts.len(), 2);
    // |+>|1> -> both transcripts leave b = a xor 1 ... check via the law.
    let plus = Vector::from_vec(vec![r(0.5f64.sqrt()), r(0.5f64.sqrt())]);
    let s = CqState::pure(l.clone(), &kron_vec(&plus, &basis_ket(2, 0))).unwrap();
    let law = adv.transcript_law(&s).unwrap();
    assert!((law[0] - 0.5).abs() < 1e-12 && (law[1] - 0.5).abs() < 1e-12);
    let out = adv.apply(&s).unwrap().quantum_part();
    // Outcome o leaves |o>|o>.
    assert!((out[(0, 0)].re - 0.5).abs() < 1e-12 && (out[(3, 3)].re - 0.5).abs() < 1e-12);
}

#[test]
fn teleportation_fragment_is_trace_preserving() {
    let l = RegisterLayout::new(vec![Register::qubits("a", 2, 0), Register::qubits("b", 1, 1)]).unwrap();
    let (sa, sb) = (shape(&l, 0), shape(&l, 1));
    let bell = cnot() * kron(&hadamard(), &identity(2));
    let inst = Instrument::projective(&bell);
    let instrument = inst.branches.iter().map(|b| LocalMap::quantum_only(&sa, b.clone())).collect();
    let ps = pauli_matrices();
    let responses = (0..4)
        .map(|o| {
            let fix = &ps[3].clone().pow((o >> 1) as u32) * ps[1].clone().pow((o & 1) as u32);
            LoccNode::Finish(vec![LocalMap::identity(&sa), LocalMap::quantum_only(&sb, Channel::unitary(fix, vec![2]).unwrap())])
        })
        .collect();
    let adv = Adversary::build_locc(&l, LoccNode::Round { actor: 0, instrument, responses }, DEFAULT_ROUND_CAP).unwrap();
    assert_eq!(adv.transcripts.len(), 4);
    let mut g = rng(6);
    for _ in 0..10 {
        let s = CqState::quantum(l.clone(), random_density(8, 3, &mut g)).unwrap();
        let total: f64 = adv.transcript_law(&s).unwrap().iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
    }
}

#[test]
fn unnormalized_instruments_and_deep_trees_fail() {
    let l = two_qubit_shares();
    let sa = shape(&l, 0);
    let half = Channel::from_kraus_unchecked(vec![projector(&basis_ket(2, 0))], vec![2], vec![2], ChannelKind::Cp);
    let tree = LoccNode::Round {
        actor: 0,
        instrument: vec![LocalMap::quantum_only(&sa, half)],
        responses: vec![LoccNode::Finish(vec![LocalMap::identity(&sa), LocalMap::identity(&shape(&l, 1))])],
    };
    assert!(Adversary::build_locc(&l, tree, DEFAULT_ROUND_CAP).is_err());
    assert!(Adversary::build_locc(&l, measure_then_flip(&l), 0).is_err());
}

#[test]
fn descriptors_roundtrip_through_json() {
    let l = two_qubit_shares();
    let adv = Adversary::build_locc(&l, measure_then_flip(&l), DEFAULT_ROUND_CAP).unwrap();
    let json = AdversaryDesc::from(&adv).to_json();
    let back = AdversaryDesc::from_json(&json).unwrap().to_adversary().unwrap();
    let s = CqState::quantum(l.clone(), random_density(4, 4, &mut rng(7))).unwrap();
    let (td, _) = metrics(&adv.apply(&s).unwrap(), &back.apply(&s).unwrap()).unwrap();
    assert!(td < 1e-12);
    assert!(json.contains("\"model\": \"locc\""));
}

#[test]
fn classical_relabel_moves_branches() {
    let l = RegisterLayout::new(vec![Register::bits("x", 1, 0), Register::qubits("q", 1, 1)]).unwrap();
    let sx = shape(&l, 0);
    let flip = LocalMap::relabel(&sx, &[1, 0], &[Channel::identity(vec![])]).unwrap();
    let adv = Adversary::build_lo(&l, vec![flip, LocalMap::identity(&shape(&l, 1))]).unwrap();
    let mut b = std::collections::BTreeMap::new();
    b.insert(vec![0], projector(&basis_ket(2, 0)));
    let s = CqState::new(l, b).unwrap();
    let out = adv.apply(&s).unwrap();
    assert!(out.branches().contains_key(&vec![1u64]));
}

/// Schmidt rank across the share cut never grows: every Kraus pair maps a
/// rank-R pure state to a vector of rank at most R.
#[test]
fn local_maps_keep_schmidt_bound() {
    let l = RegisterLayout::new(vec![Register::qubits("a", 2, 0), Register::qubits("b", 2, 1)]).unwrap();
    let mut g = rng(8);
    for rank in [1usize, 2, 4] {
        let coeffs = vec![1.0 / rank as f64; rank];
        let psi = with_schmidt(&coeffs, &haar_unitary(4, &mut g), &haar_unitary(4, &mut g));
        let adv = sample_lo(&l, &SamplerConfig::default(), &mut g).unwrap();
        for t in &adv.transcripts {
            let ka = t.maps[0].uniform_channel().unwrap();
            let kb = t.maps[1].uniform_channel().unwrap();
            for a in &ka.kraus {
                for b in &kb.kraus {
                    let v = kron(a, b) * &psi;
                    if v.norm() < 1e-9 {
                        continue;
                    }
                    let s = CqState::pure(l.clone(), &v.unscale(v.norm())).unwrap();
                    let prof = schmidt_structure(&s, &["a"]).unwrap();
                    assert!(prof.declared_number.unwrap() <= rank);
                }
            }
        }
    }
}

#[test]
fn epr_ancilla_sampler_pairs_shares() {
    let l = three_qubits();
    let anc = sampler::random_ancilla(&l, &[1, 0, 1], sampler::AncillaKind::Epr, &mut rng(9)).unwrap().unwrap();
    let m = anc.tensor_and_trace(&["anc0"]).unwrap().quantum_part();
    assert!(max_abs_diff(&m, &maximally_mixed(2)) < 1e-12);
}

#[test]
fn catalog_strategies_are_valid() {
    let l = two_qubit_shares();
    let cat = tampering_catalog(&l, 2, true, &mut rng(10)).unwrap();
    assert!(cat.len() > 20);
    let s = CqState::quantum(l.clone(), random_density(4, 4, &mut rng(11))).unwrap();
    for (_, adv) in &cat {
        assert!((adv.apply(&s).unwrap().trace() - 1.0).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sampled_adversaries_output_states(seed in any::<u64>()) {
        let mut g = rng(seed);
        let l = RegisterLayout::new(vec![Register::bits("x", 2, 0), Register::qubits("q", 1, 0), Register::qubits("z", 1, 1)]).unwrap();
        let mut b = std::collections::BTreeMap::new();
        for x in 0..4u64 {
            b.insert(vec![x], random_density(4, 2, &mut g).scale(0.25));
        }
        let s = CqState::new(l.clone(), b).unwrap();
        let adv = sample_lo(&l, &SamplerConfig::default(), &mut g).unwrap();
        let out = adv.apply(&s).unwrap();
        prop_assert!(out.validate(1e-8).is_ok());
        let bounded = sample_bounded(&l, &[1, 1], &SamplerConfig::default(), &mut g).unwrap();
        prop_assert!(bounded.apply(&s).unwrap().validate(1e-8).is_ok());
    }
}
