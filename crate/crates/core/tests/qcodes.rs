use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use tamperlab::adversary::sampler::random_local_channel;
use tamperlab::adversary::*;
use tamperlab::pauli_clifford::clifford_group;
use tamperlab::qcodes::engine::{self, Hook, KeyedAttack, KeyedSampler, KeyedShape};
use tamperlab::qcodes::keyed::bell_test_channel;
use tamperlab::qcodes::scheme::{effective_choi, encode_message, tampered_output, MESSAGE};
use tamperlab::qcodes::*;
use tamperlab::qstate::linalg::*;
use tamperlab::qstate::*;

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn assert_correct(code: &dyn CodingScheme) {
    let j = effective_choi(code, None).unwrap();
    let shape = KeyedShape { d_m: code.message_dim(), d_e: 1 };
    let diff = max_abs_diff(&j, &shape.phi());
    assert!(diff < 1e-9, "{} is not perfectly correct: {diff}", code.descriptor().name);
}

fn explicit_tdc(seed: u64) -> TdcCompiler {
    let inner = KeyedTwoSplit::new(KeyTable::pauli_xor(2, seed).unwrap());
    TdcCompiler::new(Box::new(inner), 1, None).unwrap()
}

#[test]
fn every_explicit_code_is_perfectly_correct() {
    let bit = BitNmcLocc2::new(2).unwrap();
    for b in 0..2 {
        let out = tampered_output(&bit, None, &projector(&basis_ket(2, b))).unwrap();
        assert!((out[(b, b)].re - 1.0).abs() < 1e-10);
    }
    assert_correct(&LeakyTwoSplit::new(0.3).unwrap());
    assert_correct(&KeyedTwoSplit::new(KeyTable::pauli_xor(1, 3).unwrap()));
    assert_correct(&KeyedTwoSplit::new(KeyTable::new(2, 1, 2, 4).unwrap()));
    assert_correct(&explicit_tdc(5));
    for wiring in [Tdc3Wiring::Figure, Tdc3Wiring::Text] {
        let key = KeyTable::pauli_xor(2, 6).unwrap();
        assert_correct(&Tdc3::new(key, 1, 1, wiring, 0).unwrap());
    }
}

#[test]
fn bit_code_encodings() {
    for n in 1..=3 {
        let code = BitNmcLocc2::new(n).unwrap();
        assert!(max_abs_diff(&code.enc1(), &code.enc1_branches()) < 1e-12);
        let d2 = 1usize << (2 * n);
        let gap = trace_norm_herm(&(code.enc1() - maximally_mixed(d2)));
        assert!(gap <= 4f64.powi(1 - n as i32) + 1e-12);
        let e1 = encode_message(&code, &projector(&basis_ket(2, 1))).unwrap().quantum_part();
        assert!(max_abs_diff(&e1, &code.enc1()) < 1e-12);
    }
    assert!(BitNmcLocc2::new(0).is_err());
}

#[test]
fn single_pauli_flip_probability() {
    for n in 1..=3 {
        let code = BitNmcLocc2::new(n).unwrap();
        let layout = code.code_layout();
        let paulis = pauli_matrices();
        let mut z = identity(1);
        for q in 0..n {
            z = kron(&z, &paulis[if q == 0 { 3 } else { 0 }]);
        }
        let d = 1 << n;
        let maps = vec![
            LocalMap::quantum_only(&ShareShape::of(&layout, 0), Channel::unitary(z, vec![d]).unwrap()),
            LocalMap::identity(&ShareShape::of(&layout, 1)),
        ];
        let adv = Adversary::build_lo(&layout, maps).unwrap();
        let expect = 1.0 / (4f64.powi(n as i32) - 1.0);
        let fast = code.flip_probability(&adv).unwrap();
        let out = tampered_output(&code, Some(&adv), &projector(&basis_ket(2, 1))).unwrap();
        assert!((fast - expect).abs() < 1e-10);
        assert!((out[(0, 0)].re - expect).abs() < 1e-10);
    }
}

#[test]
fn fast_flip_route_matches_dense_route_on_catalog() {
    let code = BitNmcLocc2::new(2).unwrap();
    let cat = tampering_catalog(&code.code_layout(), 1, true, &mut rng(1)).unwrap();
    for (name, adv) in cat.iter().step_by(7) {
        let fast = code.flip_probability(adv).unwrap();
        let dense = tampered_output(&code, Some(adv), &projector(&basis_ket(2, 1))).unwrap()[(0, 0)].re;
        assert!((fast - dense).abs() < 1e-9, "{name}: {fast} vs {dense}");
        assert!(fast <= 0.5 + 1e-9);
    }
}

#[test]
fn leaky_code_marginal_and_swap() {
    let q = 0.35;
    let code = LeakyTwoSplit::new(q).unwrap();
    let e0 = encode_message(&code, &projector(&basis_ket(2, 0))).unwrap();
    let e1 = encode_message(&code, &projector(&basis_ket(2, 1))).unwrap();
    let l0 = e0.tensor_and_trace(&["l"]).unwrap().quantum_part();
    let l1 = e1.tensor_and_trace(&["l"]).unwrap().quantum_part();
    assert!(((l0[(0, 0)] - l1[(0, 0)]).re - code.planted_bias()).abs() < 1e-12);

    let pi = projector(&basis_ket(2, 0));
    let adv = swap_attack(&code, 0, &pi).unwrap();
    let s = 0.5f64.sqrt();
    let plus = Vector::from_vec(vec![r(s), r(s)]);
    let minus = Vector::from_vec(vec![r(s), r(-s)]);
    let out = tampered_output(&code, Some(&adv), &projector(&plus)).unwrap();
    let f = (minus.adjoint() * out.view((0, 0), (2, 2)) * &minus)[(0, 0)].re.sqrt();
    assert!(f >= code.planted_bias() - 1e-12);
    assert!((f - q.sqrt()).abs() < 1e-9);

    let none = swap_attack(&code, 0, &zeros(2, 2)).unwrap();
    let same = tampered_output(&code, Some(&none), &projector(&plus)).unwrap();
    assert!((same[(0, 0)].re - 0.5).abs() < 1e-12 && (same[(0, 1)].re - 0.5).abs() < 1e-12);
    assert!(swap_attack(&code, 0, &identity(2).scale(0.5)).is_err());
}

#[test]
fn measure_and_prepare_decomposition() {
    let code = LeakyTwoSplit::new(0.6).unwrap();
    let (p0, p1) = (basis_ket(2, 0), basis_ket(2, 1));
    for (rr, l) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let chk = tamperlab::adversary::attacks::lambda2_check(&code, &p0, &p1, rr, l).unwrap();
        assert!(chk.remainder_gap < 1e-9);
        assert!(chk.remainder_min_eig > -1e-9);
        assert!((chk.remainder_trace - (1.0 - chk.delta_l / 2.0)).abs() < 1e-9);
    }
}

#[test]
fn substitution_yields_fixed_message() {
    let inner = KeyedTwoSplit::new(KeyTable::new(2, 1, 1, 9).unwrap());
    let code = TdcCompiler::new(Box::new(inner), 1, None).unwrap();
    let fixed = basis_ket(2, 0);
    let adv = substitution_attack(&code, &fixed, None).unwrap();
    let j = effective_choi(&code, Some(&adv)).unwrap();
    let shape = KeyedShape::new(1, 1);
    assert!(max_abs_diff(&j, &shape.replaced(&fixed).unwrap()) < 1e-9);
    // The copy needs more pre-shared qubits than a small budget allows.
    assert!(substitution_attack(&code, &fixed, Some(&[0, 1, 0])).is_err());
}

#[test]
fn two_source_marginals_are_maximally_mixed() {
    let key = KeyTable::pauli_xor(2, 11).unwrap();
    let code = Tdc3::new(key, 1, 1, Tdc3Wiring::Figure, 0).unwrap();
    let s = 0.5f64.sqrt();
    let msgs = [basis_ket(2, 0), Vector::from_vec(vec![r(s), r(-s)])];
    let enc: Vec<CqState> = msgs.iter().map(|m| encode_message(&code, &projector(m)).unwrap()).collect();
    for keep in [vec!["X", "Z"], vec!["Y", "Ehat", "Z"], vec!["X", "Y", "Ehat"]] {
        let a = enc[0].tensor_and_trace(&keep).unwrap();
        let b = enc[1].tensor_and_trace(&keep).unwrap();
        let (td, _) = metrics(&a, &b).unwrap();
        assert!(td < 1e-9, "{keep:?}: {td}");
    }
}

#[test]
fn engine_identity_and_fresh_forms() {
    let shape = KeyedShape::new(1, 2);
    let attack = KeyedAttack {
        p_same: 1.0,
        q: Hook::identity(8, 1),
        p: Some(Hook::identity(4, 1)),
        shared: identity(1),
    };
    assert!(max_abs_diff(&engine::effective(&shape, &attack).unwrap(), &shape.phi()) < 1e-12);
    let fresh = engine::j_fresh(&shape);
    assert!((fresh.trace().re - 1.0).abs() < 1e-12);
    let mut g = rng(3);
    let sampler = KeyedSampler { q_memory: 1, p_memory: 1, entangled: true, ..KeyedSampler::new(1, 2) };
    for _ in 0..20 {
        let a = sampler.sample(&mut g).unwrap();
        let j = engine::effective(&shape, &a).unwrap();
        assert!((j.trace().re - 1.0).abs() < 1e-9);
        assert!(is_psd(&j, 1e-9));
    }
}

/// Averages the keyed channel over the whole two-qubit Clifford group and
/// compares with the closed form.
#[test]
fn closed_form_matches_group_average() {
    let mut g = rng(12);
    let group = clifford_group(2).unwrap();
    let cfg = SamplerConfig { identity_weight: Some(0.3), ..SamplerConfig::default() };
    let q = random_local_channel(vec![8], &cfg, &mut g);
    let p = random_local_channel(vec![4], &cfg, &mut g);
    let shared = projector(&random_pure(4, &mut g));

    // Choi of the twirled q-map on (A, Wq), unnormalized: sum of vec(K) vec(K)^dag.
    let mut choi = zeros(64, 64);
    for c in group {
        let cu = kron(&c.unitary, &identity(2));
        for k in &q.kraus {
            let kk = cu.adjoint() * k * &cu;
            let v = Vector::from_iterator(64, kk.transpose().iter().copied());
            choi += &v * v.adjoint();
        }
    }
    choi.unscale_mut(group.len() as f64);
    let (vals, vecs) = eigh(&choi);
    let twirled: Vec<Mat> = vals
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 1e-12)
        .map(|(i, &v)| Mat::from_fn(8, 8, |a, b| vecs[(a * 8 + b, i)] * v.sqrt()))
        .collect();

    // Factors: M, E, Ehat, Mref, Wq, Wp.
    let dims = [2, 2, 2, 2, 2, 2];
    let phi_m = max_entangled(2);
    let psi = kron_all(&[projector(&phi_m), projector(&max_entangled(2)), shared.clone()]);
    // psi is ordered (M, Mref, E, Ehat, Wq, Wp); move to (M, E, Ehat, Mref, Wq, Wp).
    let rho = permute_factors(&psi, &dims, &[0, 2, 3, 1, 4, 5]);
    let rho = apply_kraus_on(&rho, &dims, &[0, 1, 4], &twirled);
    let rho = apply_kraus_on(&rho, &dims, &[2, 5], &p.kraus);
    let test = bell_test_channel(2, 1, 8, |m, e, h| (m * 2 + e) * 2 + h);
    let (out, nd) = test.apply_on(&rho, &dims, &[0, 1, 2]);
    let j = partial_trace(&out, &nd, &[0, 1]);

    let attack = KeyedAttack {
        p_same: 1.0,
        q: Hook::new(q.kraus.clone(), 4, 2).unwrap(),
        p: Some(Hook::new(p.kraus.clone(), 2, 2).unwrap()),
        shared,
    };
    let closed = engine::j_same(&KeyedShape::new(1, 1), &attack).unwrap();
    assert!(max_abs_diff(&j, &closed) < 1e-9, "gap {}", max_abs_diff(&j, &closed));
}

#[test]
fn compiler_rejects_oversized_trap() {
    let inner = KeyedTwoSplit::new(KeyTable::pauli_xor(1, 1).unwrap());
    assert!(TdcCompiler::new(Box::new(inner), 1, None).is_err());
    let key = KeyTable::pauli_xor(2, 1).unwrap();
    assert!(Tdc3::new(key, 1, 2, Tdc3Wiring::Figure, 0).is_err());
}

#[test]
fn descriptors_carry_bounds() {
    let d = explicit_tdc(1).descriptor();
    assert_eq!(d.shares, 3);
    assert!((d.bound.unwrap() - (1.0 + 1.0)).abs() < 1e-12);
    let _ = MESSAGE;
}
