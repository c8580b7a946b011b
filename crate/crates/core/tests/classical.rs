use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use tamperlab::classical::*;

#[test]
fn field_inverses_exhaustive() {
    for w in 1..=8 {
        let f = Gf2w::new(w).unwrap();
        for a in f.elements().skip(1) {
            let inv = f.inv(a).unwrap();
            assert_eq!(f.mul(a, inv), 1, "w={w} a={a}");
        }
    }
    assert!(Gf2w::new(9).is_err());
}

#[test]
fn shamir_correctness_and_privacy_exhaustive() {
    for parties in 2..=4usize {
        for w in 3..=4u32 {
            for t in 1..=parties {
                let s = Shamir::new(parties, t, w).unwrap();
                let q = 1usize << w;
                let rand_len = s.randomness_len();
                let draws = q.pow(rand_len as u32);
                // counts[party][secret][value]
                let mut counts = vec![vec![vec![0usize; q]; q]; parties];
                for secret in 0..q as u8 {
                    for r in 0..draws {
                        let coeffs: Vec<u8> = (0..rand_len).map(|i| ((r / q.pow(i as u32)) % q) as u8).collect();
                        let shares = s.share_with(secret, &coeffs);
                        // Every threshold subset reconstructs: check consecutive windows and reversed order.
                        for start in 0..=(parties - t) {
                            let sub: Vec<(usize, u8)> = (start..start + t).map(|i| (i, shares[i])).collect();
                            assert_eq!(s.reconstruct(&sub).unwrap(), secret);
                            let rev: Vec<(usize, u8)> = sub.iter().rev().copied().collect();
                            assert_eq!(s.reconstruct(&rev).unwrap(), secret);
                        }
                        for (i, &v) in shares.iter().enumerate() {
                            counts[i][secret as usize][v as usize] += 1;
                        }
                    }
                }
                if t >= 2 {
                    // A single share is uniform for every secret.
                    for party in &counts {
                        for per_secret in party {
                            assert!(per_secret.iter().all(|&c| c == draws / q));
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn shamir_rejects_small_field() {
    assert!(Shamir::new(4, 2, 2).is_err());
    assert!(Shamir::new(3, 2, 2).is_ok());
}

#[test]
fn identity_tampering_has_zero_error() {
    let code = ClassicalNmc::repetition_bit();
    let fam = FunctionFamily::Listed(vec![SplitFunctions::identity(1, 1)]);
    assert!(code.nm_error_exhaustive(false, &fam).unwrap().error < 1e-12);
    // The left share of the repetition code is the message itself, so the
    // augmented experiment sees it even without tampering.
    let aug = code.nm_error_exhaustive(true, &fam).unwrap().error;
    assert!((aug - 0.5).abs() < 1e-9, "{aug}");
}

#[test]
fn repetition_code_hand_enumeration() {
    let code = ClassicalNmc::repetition_bit();
    // f negates, g is the identity: (not m, m) always rejects, which is a
    // message-independent outcome.
    let neg = SplitFunctions { f: vec![1, 0], g: vec![0, 1] };
    let c = code.tampered_counts(&neg, false);
    assert_eq!(c, vec![vec![0, 0, 1], vec![0, 0, 1]]);
    assert!(code.nm_error_of_counts(&c, false).unwrap() < 1e-12);
    // f = identity, g = constant 0: m = 0 survives, m = 1 rejects. Any
    // split p*delta_m + q leaves distance 1/2 for one of the two messages.
    let half = SplitFunctions { f: vec![0, 1], g: vec![0, 0] };
    let c = code.tampered_counts(&half, false);
    assert_eq!(c, vec![vec![1, 0, 0], vec![0, 0, 1]]);
    assert!((code.nm_error_of_counts(&c, false).unwrap() - 0.5).abs() < 1e-9);
    // Full family: negating both shares flips the bit.
    let rep = code.nm_error_exhaustive(false, &FunctionFamily::All).unwrap();
    assert!((rep.error - 0.5).abs() < 1e-9);
    assert_eq!(rep.pairs, 16);
}

#[test]
fn flip_bias_matches_error_for_reject_free_codes() {
    // Decoders without a reject outcome: the two quantities coincide.
    let xor = ClassicalNmc::from_labels(1, 1, 1, vec![Some(0), Some(1), Some(1), Some(0)]).unwrap();
    let e = xor.nm_error_exhaustive(false, &FunctionFamily::All).unwrap().error;
    let b = xor.flip_bias(&FunctionFamily::All).unwrap();
    assert!((e - b.max(0.0)).abs() < 1e-12, "error {e} bias {b}");

    let mut rng = ChaCha20Rng::seed_from_u64(4);
    for _ in 0..6 {
        let labels: Vec<Option<u64>> = (0..16).map(|_| Some(rand::Rng::gen_range(&mut rng, 0..2))).collect();
        let Ok(code) = ClassicalNmc::from_labels(1, 2, 2, labels) else { continue };
        let e = code.nm_error_exhaustive(false, &FunctionFamily::All).unwrap().error;
        let b = code.flip_bias(&FunctionFamily::All).unwrap();
        assert!((e - b.max(0.0)).abs() < 1e-9, "error {e} bias {b}");
    }
    // With a reject outcome the bias only lower-bounds the error.
    let rep = ClassicalNmc::repetition_bit();
    let e = rep.nm_error_exhaustive(false, &FunctionFamily::All).unwrap().error;
    assert!(rep.flip_bias(&FunctionFamily::All).unwrap() <= e + 1e-12);
}

#[test]
fn augmented_error_dominates_and_subfamilies_are_monotone() {
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let code = search_tiny_nmc(1, (2, 2), 3, false, &mut rng).unwrap();
    let full = code.nm_error_exhaustive(false, &FunctionFamily::All).unwrap();
    let aug = code.nm_error_exhaustive(true, &FunctionFamily::All).unwrap();
    assert!(aug.error >= full.error - 1e-9);
    let sub = FunctionFamily::Listed(vec![SplitFunctions::identity(2, 2), full.worst.clone(), SplitFunctions {
        f: vec![0, 0, 0, 0],
        g: vec![3, 2, 1, 0],
    }]);
    let sub_err = code.nm_error_exhaustive(false, &sub).unwrap().error;
    assert!(sub_err <= full.error + 1e-12);
    assert!((sub_err - full.error).abs() < 1e-9, "worst pair is in the subfamily");
}

#[test]
fn search_returns_verified_codes() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let code = search_tiny_nmc(1, (2, 2), 6, false, &mut rng).unwrap();
    let recomputed = code.nm_error_exhaustive(false, &FunctionFamily::All).unwrap().error;
    assert_eq!(code.grade, NmGrade::Exhaustive);
    assert!((code.verified_error.unwrap() - recomputed).abs() < 1e-12);
    for m in 0..2 {
        for &(x, y) in code.codewords(m) {
            assert_eq!(code.decode(x, y), Some(m));
        }
    }

    let small = search_tiny_nmc(1, (1, 1), 20, false, &mut rng).unwrap();
    let e = small.verified_error.unwrap();
    assert!(e > 0.1, "one-bit shares cannot be close to non-malleable: {e}");
    let again = small.nm_error_exhaustive(false, &FunctionFamily::All).unwrap().error;
    assert!((again - e).abs() < 1e-12);

    assert!(search_tiny_nmc(3, (1, 1), 5, true, &mut rng).is_err());
}

#[test]
fn code_tables_round_trip_through_json() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let code = search_tiny_nmc(1, (2, 2), 2, false, &mut rng).unwrap();
    let json = serde_json::to_string(&code.to_table()).unwrap();
    let back = ClassicalNmc::from_table(&serde_json::from_str(&json).unwrap()).unwrap();
    for x in 0..4 {
        for y in 0..4 {
            assert_eq!(back.decode(x, y), code.decode(x, y));
        }
    }
    assert_eq!(back.verified_error, code.verified_error);
}

/// Independent oracle: grid search over (p, q) for three outcomes.
fn grid_fit(p0: [f64; 3], p1: [f64; 3], steps: usize) -> f64 {
    let h = 1.0 / steps as f64;
    let mut best = f64::INFINITY;
    for a in 0..=steps {
        for b in 0..=(steps - a) {
            for c in 0..=(steps - a - b) {
                let p = a as f64 * h;
                let q = [b as f64 * h, c as f64 * h, 1.0 - p - (b + c) as f64 * h];
                let tv = |pm: [f64; 3], m: usize| -> f64 {
                    (0..3).map(|o| (pm[o] - q[o] - if o == m { p } else { 0.0 }).abs()).sum::<f64>() * 0.5
                };
                best = best.min(tv(p0, 0).max(tv(p1, 1)));
            }
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]
    #[test]
    fn lp_fit_matches_grid_oracle(a in prop::array::uniform3(0.0f64..1.0), b in prop::array::uniform3(0.0f64..1.0)) {
        let norm = |v: [f64; 3]| { let s: f64 = v.iter().sum::<f64>() + 1e-9; [v[0] / s, v[1] / s, v[2] / s] };
        let (p0, p1) = (norm(a), norm(b));
        let lp = nm_fit_lp(&[p0.to_vec(), p1.to_vec()], 3, 1).unwrap();
        let grid = grid_fit(p0, p1, 60);
        prop_assert!(lp <= grid + 1e-9);
        prop_assert!(grid <= lp + 3.0 / 60.0);
    }

    #[test]
    fn planted_forms_fit_exactly(p in 0.0f64..1.0, d in prop::array::uniform3(0.01f64..1.0)) {
        let s: f64 = d.iter().sum();
        let q: Vec<f64> = d.iter().map(|v| (1.0 - p) * v / s).collect();
        let p0 = vec![q[0] + p, q[1], q[2]];
        let p1 = vec![q[0], q[1] + p, q[2]];
        prop_assert!(nm_fit_lp(&[p0, p1], 3, 1).unwrap() < 1e-9);
    }
}

#[test]
fn ideal_key_enforces_declared_law() {
    let key = IdealKeyNmc::new(2, 2, 2).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let mut hooks = vec![
        SplitFunctions::identity(2, 2),
        SplitFunctions { f: vec![1, 1, 1, 1], g: vec![2, 2, 2, 2] },
        SplitFunctions { f: vec![0, 1, 2, 3], g: vec![0, 0, 0, 0] },
    ];
    for _ in 0..20 {
        let f = (0..4).map(|_| rand::Rng::gen_range(&mut rng, 0..4)).collect();
        let g = (0..4).map(|_| rand::Rng::gen_range(&mut rng, 0..4)).collect();
        hooks.push(SplitFunctions { f, g });
    }
    for h in &hooks {
        let kt = key.analyze(h).unwrap();
        let measured = key.joint_law(h).unwrap();
        let declared = key.declared_law(kt.p_same(), key.tampered_rule(&kt));
        for (a, b) in measured.iter().flatten().zip(declared.iter().flatten()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
    let kt = key.analyze(&hooks[0]).unwrap();
    assert_eq!(kt.p_same(), 1.0);
    assert!(matches!(key.tampered_rule(&key.analyze(&hooks[1]).unwrap()), TamperedKey::Fixed(_)));
}

#[test]
fn extractor_inverter_properties() {
    let ext = LinearExtractor::new(4, 3, 2).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    for s in 0..ext.seeds() {
        for y in 0..4 {
            match ext.fiber(y, s) {
                Some(f) => {
                    for _ in 0..4 {
                        let w = ext.invert(y, s, &mut rng).unwrap();
                        assert_eq!(ext.extract(w, s), y);
                    }
                    // The fiber is exactly the preimage set.
                    let pre = (0..16).filter(|&w| ext.extract(w, s) == y).count() as u64;
                    assert_eq!(pre, f.size());
                }
                None => assert!((0..16).all(|w| ext.extract(w, s) != y)),
            }
        }
        let full_rank = (0..4).all(|y| ext.fiber(y, s).is_some());
        let image = (0..16).map(|w| ext.extract(w, s)).collect::<std::collections::BTreeSet<_>>().len();
        assert_eq!(full_rank, image == 4);
    }
}

#[test]
fn inverter_joint_law_is_exact() {
    // P[IExt(Ext(w, s), s) = w', s, Ext(w, s) = y] equals P[U = w', s, Ext(U, s) = y].
    let ext = LinearExtractor::new(4, 3, 2).unwrap();
    let seeds = ext.seeds() as usize;
    let mut lhs = vec![vec![vec![0.0f64; 4]; seeds]; 16];
    let mut rhs = vec![vec![vec![0.0f64; 4]; seeds]; 16];
    let w_total = 1.0 / (16 * seeds) as f64;
    for s in 0..seeds as u64 {
        for w in 0..16u64 {
            let y = ext.extract(w, s);
            rhs[w as usize][s as usize][y as usize] += w_total;
            let fiber = ext.fiber(y, s).unwrap();
            for j in 0..fiber.size() {
                let wp = fiber.element(j);
                lhs[wp as usize][s as usize][y as usize] += w_total / fiber.size() as f64;
            }
        }
    }
    for (a, b) in lhs.iter().flatten().flatten().zip(rhs.iter().flatten().flatten()) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn toy_extractor_measurements() {
    let ip = ToyNmExt::new(2).unwrap();
    assert!((ip.output_bias(SourceLaw::Uniform) - 0.125).abs() < 1e-15);
    assert!((ip.strong_error(SourceLaw::Constant(3)) - 0.5).abs() < 1e-15);
    assert!(ip.strong_error(SourceLaw::Uniform) < 0.5);
    let id = SplitFunctions::identity(2, 2);
    assert_eq!(ip.p_same(&id), 1.0);
    // Untampered, the only deviation is the bias of the extracted bit.
    assert!((ip.nm_error_of(&id) - 0.125).abs() < 1e-12);
    let mut rng = ChaCha20Rng::seed_from_u64(0);
    let m = ToyNmExt::new(1).unwrap().nm_error(0, &mut rng);
    assert_eq!(m.grade, NmGrade::Exhaustive);
    assert_eq!(m.pairs, 16);
    let h = ToyNmExt::new(3).unwrap().nm_error(50, &mut rng);
    assert_eq!(h.grade, NmGrade::Heuristic);
    assert!(h.error <= 1.0);
}
