//! Properties of complete protocol runs over arbitrary keys and seeds.

use proptest::prelude::*;
use qka_core::adversary::{attack_run, craft_fake_permutation, AttackGoal};
use qka_core::countermeasure::{attack_run_improved, mismatch, ImprovedConfig};
use qka_core::logical::NoiseModel;
use qka_core::protocol::{
    run_protocol, BackendKind, Permutation, ProtocolConfig, RunStatus, Transcript,
};
use qka_core::symbolic::{final_key, BitString, Dibit, DibitString};

fn dibits(n: usize) -> impl Strategy<Value = DibitString> {
    prop::collection::vec(0u8..4, n)
        .prop_map(|v| v.into_iter().map(|d| Dibit::new(d).unwrap()).collect())
}

fn instance(max_n: usize) -> impl Strategy<Value = (DibitString, DibitString, u64, NoiseModel)> {
    (1..=max_n).prop_flat_map(|n| {
        (
            dibits(n),
            dibits(n),
            any::<u64>(),
            prop::sample::select(NoiseModel::ALL.to_vec()),
        )
    })
}

fn permutation(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(|m| Permutation::from_mapping(m).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn honest_runs_agree_on_the_defined_key((ka, kb, seed, noise) in instance(8)) {
        let config = ProtocolConfig::new(ka.len(), noise).with_seed(seed);
        let out = run_protocol(&config, &ka, &kb, None).unwrap();
        prop_assert_eq!(out.status, RunStatus::Agreed);
        prop_assert!(out.keys_match());
        prop_assert_eq!(out.m_alice.as_ref(), out.m_bob.as_ref());
        prop_assert_eq!(out.bob_derived_ka.as_ref(), Some(&ka));
        let expected = final_key(&ka, &kb, out.m_alice.as_ref().unwrap()).unwrap();
        prop_assert_eq!(out.alice_final_key, Some(expected));
    }

    #[test]
    fn improved_honest_runs_agree((ka, kb, seed, noise) in instance(6)) {
        let config = ImprovedConfig::new(ProtocolConfig::new(ka.len(), noise).with_seed(seed));
        let out = run_protocol(config.config(), &ka, &kb, None).unwrap();
        prop_assert!(out.keys_match());
        prop_assert_eq!(out.bob_derived_ka, Some(ka));
    }

    #[test]
    fn reordered_goals_always_succeed_on_original((ka, kb, seed, noise) in instance(8), shuffle_seed in any::<u64>()) {
        let config = ProtocolConfig::new(ka.len(), noise).with_seed(seed);
        let honest = run_protocol(&config, &ka, &kb, None).unwrap();
        let m = honest.m_alice.unwrap();
        let codes = ka.xor(&m).unwrap();
        let mut rng = qka_core::rng_for(shuffle_seed, 0);
        let shuffle = Permutation::random(codes.len(), &mut rng);
        let target: DibitString = shuffle.apply(codes.as_slice()).unwrap().into();
        let goal = AttackGoal::KaPrime(target.xor(&m).unwrap());
        // Same seed, so the attacked run measures the same M.
        let run = attack_run(&config, &ka, &kb, &goal).unwrap();
        prop_assert!(run.attack.feasible);
        prop_assert!(run.succeeded());
        prop_assert_eq!(run.outcome.status, RunStatus::Agreed);
    }

    #[test]
    fn goals_outside_the_code_multiset_are_infeasible(
        (ka, kb, m) in (1usize..6).prop_flat_map(|n| (dibits(n), dibits(n), dibits(n))),
        target_seed in any::<u64>(),
    ) {
        let n = ka.len();
        let mut rng = qka_core::rng_for(target_seed, 0);
        let target = DibitString::random(n, &mut rng);
        let goal = AttackGoal::KaPrime(target.clone());
        let result = craft_fake_permutation(&goal, &ka, &kb, &m, &Permutation::identity(n)).unwrap();
        let mut have: Vec<u8> = ka.xor(&m).unwrap().iter().map(Dibit::value).collect();
        let mut want: Vec<u8> = target.xor(&m).unwrap().iter().map(Dibit::value).collect();
        have.sort_unstable();
        want.sort_unstable();
        prop_assert_eq!(result.feasible, have == want);
    }

    #[test]
    fn crafted_permutations_deliver_the_target(
        (ka, kb, m, used, shuffle) in (1usize..7)
            .prop_flat_map(|n| (dibits(n), dibits(n), dibits(n), permutation(n), permutation(n))),
    ) {
        let codes = ka.xor(&m).unwrap();
        let wanted: DibitString = shuffle.apply(codes.as_slice()).unwrap().into();
        let goal = AttackGoal::KaPrime(wanted.xor(&m).unwrap());
        let result = craft_fake_permutation(&goal, &ka, &kb, &m, &used).unwrap();
        prop_assert!(result.feasible);
        // Bob reads slot k from received position Π'(k).
        let received = used.apply(codes.as_slice()).unwrap();
        let fake = result.fake_perm.unwrap();
        let decoded: DibitString = (0..ka.len()).map(|k| received[fake.image(k)]).collect();
        prop_assert_eq!(decoded, wanted);
    }

    #[test]
    fn final_key_goals_need_consistent_halves(
        (ka, kb, m) in (1usize..6).prop_flat_map(|n| (dibits(n), dibits(n), dibits(n))),
        bits in prop::collection::vec(any::<bool>(), 24),
    ) {
        let n = ka.len();
        let key = BitString::new(bits[..4 * n].to_vec());
        let (first, second) = key.halves().unwrap();
        let consistent = first.to_dibits().unwrap().xor(&m).unwrap() == second.to_dibits().unwrap();
        let result = craft_fake_permutation(&AttackGoal::FinalKey(key), &ka, &kb, &m, &Permutation::identity(n)).unwrap();
        if !consistent {
            prop_assert!(!result.feasible);
        }
    }

    #[test]
    fn transcripts_round_trip((ka, kb, seed, noise) in instance(5)) {
        let config = ProtocolConfig::new(ka.len(), noise).with_seed(seed);
        let out = run_protocol(&config, &ka, &kb, None).unwrap();
        let text = out.transcript.to_jsonl();
        let back = Transcript::from_jsonl(&text).unwrap();
        prop_assert_eq!(&back, &out.transcript);
        prop_assert_eq!(back.to_jsonl(), text);
    }

    #[test]
    fn mismatch_composes_back_to_the_announcement(
        (truth, lie) in (1usize..8).prop_flat_map(|n| (permutation(n), permutation(n))),
    ) {
        let d = mismatch(&lie, &truth).unwrap();
        prop_assert_eq!(truth.compose(&d).unwrap(), lie);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn backends_agree_on_honest_outcomes((ka, kb, seed, noise) in instance(4)) {
        for backend in [BackendKind::Symbolic, BackendKind::StateVector] {
            let config = ProtocolConfig::new(ka.len(), noise).with_backend(backend).with_seed(seed);
            let out = run_protocol(&config, &ka, &kb, None).unwrap();
            prop_assert!(out.keys_match());
            prop_assert_eq!(out.bob_derived_ka.as_ref(), Some(&ka));
        }
    }

    #[test]
    fn truthful_improved_attack_goal_is_harmless((ka, kb, seed, noise) in instance(4)) {
        // Aiming for the honest K_A makes Alice announce the truth.
        let config = ImprovedConfig::new(
            ProtocolConfig::new(ka.len(), noise).with_backend(BackendKind::StateVector).with_seed(seed),
        );
        let run = attack_run_improved(&config, &ka, &kb, &AttackGoal::KaPrime(ka.clone())).unwrap();
        prop_assert!(run.succeeded());
        prop_assert!(run.outcome.keys_match());
    }
}
