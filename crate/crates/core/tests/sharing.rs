use std::collections::BTreeMap;

use itertools::Itertools;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use tamperlab::qcodes::BellParityHiding;
use tamperlab::qstate::linalg::*;
use tamperlab::sharing::*;
use tamperlab::sharing::tdss::{altered, TdssShares};

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn small_lrss() -> LrssScheme {
    LrssScheme::new(3, 2, 1, 1, 6, 3).unwrap()
}

// ---- triangle gadget ----

#[test]
fn routing_gives_each_position_one_register_of_each_encoding() {
    let routes = GadgetInstance::routing();
    assert_eq!(routes.len(), 9);
    for pos in 0..3 {
        let regs = GadgetInstance::position_registers(pos);
        assert_eq!(regs.len(), 3);
        let tdcs: Vec<usize> = regs.iter().map(|r| r.0).sorted().collect();
        assert_eq!(tdcs, vec![0, 1, 2]);
        assert!(regs.contains(&(pos, GadgetRegister::Q)));
        assert!(regs.contains(&((pos + 2) % 3, GadgetRegister::YEhat)));
        assert!(regs.contains(&((pos + 1) % 3, GadgetRegister::X)));
    }
}

#[test]
fn gadget_rejects_oversized_instances() {
    assert!(GadgetInstance::new([0, 1, 2], 3, 1).is_err());
    assert!(GadgetInstance::new([2, 1, 0], 1, 1).is_err());
    let g = GadgetInstance::new([0, 1, 2], 1, 1).unwrap();
    assert_eq!(g.footprint_qubits(), 15);
}

#[test]
fn gadget_honest_round_trip() {
    for lambda in [1, 2] {
        let g = GadgetInstance::new([0, 2, 4], lambda, 1).unwrap();
        for msgs in (0..3).map(|_| 0..2u64).multi_cartesian_product() {
            let m = [msgs[0], msgs[1], msgs[2]];
            assert_eq!(g.honest(m).unwrap(), Some(m));
        }
    }
}

#[test]
fn gadget_pairs_see_mixed_marginals() {
    for lambda in [1, 2] {
        let g = GadgetInstance::new([0, 1, 2], lambda, 1).unwrap();
        for missing in 0..3 {
            let rep = g.pairwise_independence(missing, [1, 0, 1]).unwrap();
            assert_eq!(rep.parts.len(), 3);
            assert!(rep.distance <= g.pairwise_bound() + 1e-9, "{rep:?}");
            assert!(rep.distance < 1e-9);
        }
    }
}

#[test]
fn gadget_share_wise_trials_are_probabilities() {
    let g = GadgetInstance::new([0, 1, 2], 1, 1).unwrap();
    let mut r = rng(11);
    for tdc in 0..3 {
        let trial = g.share_wise_trial(tdc, &mut r).unwrap();
        assert!((-1e-9..=1.0 + 1e-9).contains(&trial.wrong_probability));
        assert!(trial.residual >= -1e-9);
    }
    let id = g.share_wise_for(1, &g.identity_attack()).unwrap();
    assert!(id.wrong_probability < 1e-9 && id.residual < 1e-6);
}

// ---- tamper-detecting sharing ----

fn tdss(p: usize, t: usize) -> TdssScheme {
    TdssScheme::new(LrssScheme::new(p, t, 1, 1, 4, 3).unwrap(), 1, DecoderThreshold::TPlus2).unwrap()
}

#[test]
fn tdss_honest_reconstruction() {
    let s = tdss(5, 4);
    assert_eq!(s.triangles().len(), 10);
    for i in 0..5 {
        assert_eq!(s.party_slots(i).len(), 6);
    }
    let mut r = rng(3);
    let mut checked = 0;
    for m in 0..8u8 {
        let sh = s.share(m, &mut r);
        let v = s.honest_verdicts(&sh);
        let rejected = sh.classical.iter().any(|x| matches!(x, LrssShare::Rejected { .. }));
        for set in (0..5).combinations(4).chain(std::iter::once((0..5).collect())) {
            let out = s.reconstruct(&set, &v).unwrap();
            if rejected {
                assert_eq!(out, DecodeOutcome::RecRejected);
            } else {
                assert_eq!(out, DecodeOutcome::Message(m));
                checked += 1;
            }
        }
    }
    assert!(checked > 0);
    assert!(s.reconstruct(&[0, 1, 2], &BTreeMap::new()).is_err());
}

#[test]
fn tdss_decoder_size_rules() {
    let s = tdss(7, 5);
    assert_eq!(s.decode_size(), 7);
    let sh = s.share(3, &mut rng(5));
    let v = s.honest_verdicts(&sh);
    assert!(s.decode(&[0, 1, 2, 3, 4, 5], &v).is_err());
    assert!(s.share_rec(TdssMode::Full, &(0..7).collect::<Vec<_>>(), &v).is_err());
}

fn honest_shares(s: &TdssScheme, m: u8, seed: u64) -> TdssShares {
    let mut r = rng(seed);
    loop {
        let sh = s.share(m, &mut r);
        if sh.classical.iter().all(|x| matches!(x, LrssShare::Ok { .. })) {
            return sh;
        }
    }
}

#[test]
fn tdss_component_enumeration_never_outputs_wrong_when_middle_and_last_corners_hold() {
    let s = tdss(7, 5);
    let m = 5u8;
    let sh = honest_shares(&s, m, 17);
    let set: Vec<usize> = (0..7).collect();
    let honest = s.honest_verdicts(&sh);
    assert_eq!(s.decode(&set, &honest).unwrap(), DecodeOutcome::Message(m));
    let tris: Vec<[usize; 3]> = vec![[0, 1, 2], [3, 4, 5], [3, 4, 6], [3, 5, 6], [4, 5, 6]];
    let mut wrong = 0;
    for choice in tris.iter().map(|_| 0..9usize).multi_cartesian_product() {
        let mut v = honest.clone();
        for (tri, &c) in tris.iter().zip(&choice) {
            let verdict = if c == 8 { TriangleVerdict::Reject } else { TriangleVerdict::Accept(altered(tri, c, &sh.classical)) };
            v.insert(*tri, verdict);
        }
        let out = s.decode(&set, &v).unwrap();
        let tails_hold = choice.iter().all(|&c| c == 8 || c & 0b110 == 0);
        if let DecodeOutcome::Message(x) = out {
            if x != m {
                wrong += 1;
                assert!(!tails_hold, "wrong output with only first corners altered: {choice:?}");
            }
        }
    }
    // Altering a middle corner can fool the decoder, so the search is not vacuous.
    assert!(wrong > 0);
}

#[test]
fn tdss_component_law_sums_to_one() {
    let s = tdss(7, 5);
    let sh = honest_shares(&s, 2, 19);
    let set: Vec<usize> = (0..7).collect();
    let law = VerdictLaw::from_corners([(0.9, 0.05, 0.05), (0.97, 0.0, 0.03), (0.97, 0.0, 0.03)]);
    let laws: BTreeMap<[usize; 3], VerdictLaw> = s.triangles().into_iter().map(|t| (t, law.clone())).collect();
    let out = s.component_law(2, &sh, &set, &laws).unwrap();
    assert!((out.correct + out.abort + out.wrong - 1.0).abs() < 1e-9);
    assert!(out.wrong < 1e-12, "{out:?}");
    let again = s.component_law(2, &sh, &set, &laws).unwrap();
    assert_eq!(out.correct.to_bits(), again.correct.to_bits());
}

// ---- leakage-resilient sharing ----

#[test]
fn lrss_reconstructs_from_every_authorized_set() {
    let s = small_lrss();
    let mut r = rng(23);
    for m in 0..s.messages() as u8 {
        for _ in 0..20 {
            let sh = s.share(m, &mut r);
            for size in s.t..=s.p {
                for set in (0..s.p).combinations(size) {
                    let pts: Vec<(usize, LrssShare)> = set.iter().map(|&i| (i, sh[i].clone())).collect();
                    match &sh[0] {
                        LrssShare::Ok { .. } => assert_eq!(s.reconstruct(&pts).unwrap(), Some(m)),
                        LrssShare::Rejected { .. } => assert_eq!(s.reconstruct(&pts).unwrap(), None),
                    }
                }
            }
        }
    }
}

#[test]
fn lrss_share_index_round_trips() {
    let s = small_lrss();
    for idx in (0..s.share_values()).step_by(97).chain([s.share_values() - 1]) {
        assert_eq!(s.share_value_index(&s.share_from_index(idx)), idx);
    }
}

#[test]
fn lrss_constant_leak_reveals_nothing() {
    let s = small_lrss();
    let leak = LeakChannel::constant(&s, &maximally_mixed(2)).unwrap();
    let d = s.leakage_distance(0, 3, Some(0), Some(1), &leak).unwrap();
    assert!(d < 1e-10, "{d}");
}

#[test]
fn lrss_sampled_leaks_are_bounded_and_abort_is_rare() {
    let s = small_lrss();
    let errs = s.measured_errors().unwrap();
    let mut r = rng(29);
    for _ in 0..3 {
        let leak = LeakChannel::sample(&s, &mut r).unwrap();
        let d = s.leakage_distance(0, 1, Some(2), Some(0), &leak).unwrap();
        assert!((0.0..=1.0 + 1e-9).contains(&d), "{d}");
    }
    for m in 0..s.messages() as u8 {
        assert!(s.reject_probability(m) <= errs.reject_bound(s.p) + 1e-12);
    }
}

// ---- LOCC non-malleable sharing ----

#[test]
fn nmss_layout_and_partition() {
    let s = LoccNmssScheme::toy().unwrap();
    for i in 0..s.p() {
        assert_eq!(s.party_registers(i).len(), 2 * (s.p() - 1));
    }
    assert_eq!(s.partition(&[4, 0, 2]).unwrap(), vec![vec![0, 2, 4]]);
    assert_eq!(s.partition(&[0, 1, 2, 3]).unwrap(), vec![vec![0, 1], vec![2, 3]]);
    assert_eq!(s.partition(&[0, 1, 2, 3, 4]).unwrap(), vec![vec![0, 1], vec![2, 3, 4]]);
}

#[test]
fn nmss_honest_over_all_sets() {
    let s = LoccNmssScheme::toy().unwrap();
    for m in 0..8u8 {
        for coins in [0, 17, 63] {
            for size in 3..=5 {
                for set in (0..5).combinations(size) {
                    assert_eq!(s.honest(m, coins, &set).unwrap(), m);
                }
            }
        }
    }
}

#[test]
fn nmss_mock_reduction_factorizes() {
    let s = LoccNmssScheme::toy().unwrap();
    let mut r = rng(31);
    for _ in 0..3 {
        let adv = NmssMock::sample(&s, 1, &mut r);
        let rep = s.evaluate(&adv, &[0, 2, 3], true).unwrap();
        assert!(rep.factorization_tv.unwrap() < 1e-12);
        assert_eq!(rep.transcript_tv, 0.0);
        assert!(rep.residual <= rep.weighted_bound + 1e-7);
        let worst = rep.branch_residuals.iter().cloned().fold(0.0, f64::max);
        assert!(rep.residual <= worst + 1e-7);
    }
    let id = s.evaluate(&NmssMock::identity(), &[1, 2, 3, 4], false).unwrap();
    assert!(id.residual < 1e-7);
}

#[test]
fn nmss_hidden_transcript_within_bias_budget() {
    let s = LoccNmssScheme::toy().unwrap();
    let h = BellParityHiding::new(1).unwrap();
    let rep = s.hidden_transcript(&h, 0, 7, 2, &mut rng(37)).unwrap();
    assert!(rep.tv > 0.0 && rep.tv <= rep.bound + 1e-9, "{rep:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn verdict_laws_are_distributions(a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0) {
        let law = VerdictLaw::from_corners([(a * 0.5, a * 0.5, 1.0 - a), (b, 0.0, 1.0 - b), (c * 0.3, c * 0.7, 1.0 - c)]);
        let total: f64 = law.patterns.iter().sum::<f64>() + law.reject;
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn nmss_residual_is_convex_in_branches(seed in any::<u64>()) {
        let s = LoccNmssScheme::toy().unwrap();
        let adv = NmssMock::sample(&s, 2, &mut rng(seed));
        let rep = s.evaluate(&adv, &[0, 1, 4], false).unwrap();
        prop_assert!(rep.residual <= rep.weighted_bound + 1e-7);
    }
}
