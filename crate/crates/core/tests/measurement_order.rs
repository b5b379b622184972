//! Outcome laws do not depend on the order in which commuting Bell
//! measurements are performed.

use std::collections::BTreeMap;

use qka_core::countermeasure::cycle_register;
use qka_core::logical::{collapse_logical_bell, make_logical_bell, BellCode, NoiseModel};
use qka_core::statevector::PhysicalState;

/// Exact joint law of Bell measurements on `slots`, performed in `order`.
/// Outcomes are keyed by slot index, not by measurement time.
fn joint_law(
    state: &PhysicalState,
    slots: &[[usize; 4]],
    order: &[usize],
    model: NoiseModel,
) -> BTreeMap<Vec<BellCode>, f64> {
    let mut law = BTreeMap::new();
    let mut stack = vec![(
        state.clone(),
        vec![BellCode::PHI_PLUS; slots.len()],
        0usize,
        1.0f64,
    )];
    while let Some((s, outcome, depth, p)) = stack.pop() {
        if depth == order.len() {
            *law.entry(outcome).or_insert(0.0) += p;
            continue;
        }
        let slot = order[depth];
        for code in BellCode::ALL {
            let (q, post) = collapse_logical_bell(&s, slots[slot], code, model).unwrap();
            if let Some(post) = post {
                let mut next = outcome.clone();
                next[slot] = code;
                stack.push((post, next, depth + 1, p * q));
            }
        }
    }
    law
}

fn assert_same_law(a: &BTreeMap<Vec<BellCode>, f64>, b: &BTreeMap<Vec<BellCode>, f64>) {
    let keys: std::collections::BTreeSet<_> = a.keys().chain(b.keys()).collect();
    for k in keys {
        let (pa, pb) = (
            a.get(k).copied().unwrap_or(0.0),
            b.get(k).copied().unwrap_or(0.0),
        );
        assert!((pa - pb).abs() < 1e-10, "{k:?}: {pa} vs {pb}");
    }
}

#[test]
fn step3_law_is_independent_of_who_measures_first() {
    // Pair i holds Alice's particle on qubits 4i, 4i+1 and Bob's on 4i+2, 4i+3.
    let alice = [0, 1, 4, 5];
    let bob = [2, 3, 6, 7];
    for model in NoiseModel::ALL {
        for c0 in BellCode::ALL {
            for c1 in BellCode::ALL {
                let state = make_logical_bell(c0, model)
                    .tensor(&make_logical_bell(c1, model))
                    .unwrap();
                let alice_first = joint_law(&state, &[alice, bob], &[0, 1], model);
                let bob_first = joint_law(&state, &[alice, bob], &[1, 0], model);
                assert_same_law(&alice_first, &bob_first);
                for (outcome, p) in &alice_first {
                    if *p > 1e-12 {
                        assert_eq!(outcome[0] ^ outcome[1], c0 ^ c1);
                    }
                }
            }
        }
    }
}

#[test]
fn cycle_law_is_independent_of_slot_order() {
    let codes = [BellCode::PSI_PLUS, BellCode::PHI_MINUS, BellCode::PSI_MINUS];
    let c = codes.len();
    let slots: Vec<[usize; 4]> = (0..c)
        .map(|k| {
            let src = (k + 1) % c;
            [4 * src, 4 * src + 1, 4 * k + 2, 4 * k + 3]
        })
        .collect();
    for model in NoiseModel::ALL {
        let state = cycle_register(&codes, model).unwrap();
        let ascending = joint_law(&state, &slots, &[0, 1, 2], model);
        for order in [[2, 1, 0], [1, 0, 2], [2, 0, 1]] {
            assert_same_law(&ascending, &joint_law(&state, &slots, &order, model));
        }
    }
}
