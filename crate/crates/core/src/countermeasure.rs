//! Improved protocol: Alice permutes only the first particle of every pair.
//!
//! A truthful reveal lets Bob reassemble each pair exactly. A false reveal
//! makes Bob Bell-measure particles from different pairs, which swaps
//! entanglement instead of reading codes: inside each displacement cycle of
//! length `c` the XOR of Bob's results is pinned to the XOR of the true codes
//! while `c − 1` of them are uniformly random. Alice can still disrupt the
//! run, but she can no longer choose what Bob decodes.
//!
//! Bob gets no signal that anything went wrong; without a key-confirmation
//! step he simply holds a different key.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use rand::Rng;

use crate::adversary::{attack_run_with, AttackGoal, AttackResult, AttackRun};
use crate::error::{Error, Result};
use crate::logical::UnitaryCode;
use crate::logical::{
    collapse_logical_bell, make_logical_bell, measure_logical_bell_at, BellCode, NoiseModel,
};
use crate::protocol::{
    insert_decoys, layout_pairs, step7_decode, AliceKnowledge, DecoyRecord, Event, ParticleId,
    Permutation, PermutationScope, ProtocolConfig, QuantumBackend, Session,
};
use crate::statevector::PhysicalState;
use crate::symbolic::{entanglement_swap, final_key, DibitString};
use crate::SimRng;

/// Protocol configuration with first-particle permutation semantics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ImprovedConfig(ProtocolConfig);

impl ImprovedConfig {
    pub fn new(mut base: ProtocolConfig) -> Self {
        base.scope = PermutationScope::FirstParticles;
        ImprovedConfig(base)
    }

    pub fn config(&self) -> &ProtocolConfig {
        &self.0
    }

    pub fn into_inner(self) -> ProtocolConfig {
        self.0
    }

    pub fn session(&self, ka: DibitString, kb: DibitString) -> Result<Session> {
        Session::new(self.0.clone(), ka, kb)
    }
}

/// Step 4*: pairs in codes `M ⊕ K_A` whose first particles alone are
/// moved by `perm`, padded with decoys.
pub fn step4_star_encode(
    backend: &mut dyn QuantumBackend,
    ka: &DibitString,
    m: &DibitString,
    perm: &Permutation,
    decoy_count: usize,
    rng: &mut SimRng,
) -> Result<(Vec<ParticleId>, Vec<DecoyRecord>)> {
    let n = m.len();
    if ka.len() != n || perm.len() != n {
        return Err(Error::LengthMismatch {
            left: ka.len(),
            right: n,
        });
    }
    let mut firsts = Vec::with_capacity(n);
    let mut seconds = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = backend.bell_pair(BellCode::from(m[i]))?;
        backend.apply_unitary(a, UnitaryCode::from(ka[i]))?;
        firsts.push(a);
        seconds.push(b);
    }
    let payload = layout_pairs(&firsts, &seconds, perm, PermutationScope::FirstParticles)?;
    insert_decoys(&payload, decoy_count, backend, rng)
}

/// Bob's step 7 in the improved protocol.
pub fn bob_decode_improved(
    backend: &mut dyn QuantumBackend,
    received: &[ParticleId],
    announced: &Permutation,
    m: &DibitString,
    rng: &mut SimRng,
) -> Result<DibitString> {
    step7_decode(
        backend,
        received,
        announced,
        m,
        PermutationScope::FirstParticles,
        rng,
    )
}

/// Slot `k` of Bob's reassembled sequence holds the first particle of pair
/// `mismatch(k)` when Alice used `truth` but announced `announced`.
pub fn mismatch(announced: &Permutation, truth: &Permutation) -> Result<Permutation> {
    truth.inverse().compose(announced)
}

/// Number of uniformly random Bell codes a mismatch leaves: `c − 1` per `c`-cycle.
pub fn free_slots(mismatch: &Permutation) -> usize {
    mismatch.cycles().iter().map(|c| c.len() - 1).sum()
}

/// Probability that Bob decodes one specific value consistent with the
/// cycle constraints.
pub fn steering_probability(mismatch: &Permutation) -> f64 {
    0.25f64.powi(free_slots(mismatch) as i32)
}

/// Alice attacks the improved protocol with the same goal-driven
/// fake permutation that breaks the original protocol.
pub fn attack_run_improved(
    config: &ImprovedConfig,
    ka: &DibitString,
    kb: &DibitString,
    goal: &AttackGoal,
) -> Result<AttackRun> {
    let session = config.session(ka.clone(), kb.clone())?;
    let goal = goal.clone();
    attack_run_with(session, move |_, _| goal)
}

/// Alice announces `truth ∘ displacement`, aiming for the key that lie would
/// have produced under whole-pair permutation: slot `k` reading the code of
/// pair `displacement(k)`.
pub fn displacement_run(
    config: &ImprovedConfig,
    ka: &DibitString,
    kb: &DibitString,
    displacement: &Permutation,
) -> Result<AttackRun> {
    let session = config.session(ka.clone(), kb.clone())?;
    let displacement = displacement.clone();
    displacement_run_with(session, move |_, _| displacement)
}

/// Runs steps 1–6 honestly, then Alice announces `truth ∘ d` for the
/// displacement `d` returned by `choose`.
pub fn displacement_run_with<F>(mut session: Session, choose: F) -> Result<AttackRun>
where
    F: FnOnce(&AliceKnowledge, &mut SimRng) -> Permutation,
{
    session.run_until_announcement()?;
    if session.is_aborted() {
        return Ok(AttackRun {
            outcome: session.into_outcome()?,
            attack: AttackResult {
                feasible: false,
                fake_perm: None,
                target_ka: None,
                predicted_bob_key: None,
            },
        });
    }
    let know = session.alice_knowledge().expect("step 6 completed");
    let displacement = choose(&know, session.rng());
    let target = displacement_target(&know, &displacement)?;
    let fake = know.permutation.compose(&displacement)?;
    let attack = AttackResult {
        feasible: true,
        fake_perm: Some(fake.clone()),
        target_ka: Some(target.clone()),
        predicted_bob_key: Some(final_key(&target, &know.kb, &know.m)?),
    };
    session.transcript_mut().push(Event::Attack(attack.clone()));
    session.step7_reveal_as(fake, Some(target))?;
    session.step8_finalize()?;
    Ok(AttackRun {
        outcome: session.into_outcome()?,
        attack,
    })
}

/// `K'_A` Bob would decode if slot `k` read the code of pair `displacement(k)`.
pub fn displacement_target(
    know: &AliceKnowledge,
    displacement: &Permutation,
) -> Result<DibitString> {
    let codes = know.ka.xor(&know.m)?;
    if displacement.len() != codes.len() {
        return Err(Error::LengthMismatch {
            left: displacement.len(),
            right: codes.len(),
        });
    }
    let wanted: DibitString = (0..codes.len())
        .map(|k| codes[displacement.image(k)])
        .collect();
    wanted.xor(&know.m)
}

/// A uniformly random transposition of two of `n ≥ 2` slots.
pub fn random_transposition(n: usize, rng: &mut SimRng) -> Result<Permutation> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "no transposition of {n} slots"
        )));
    }
    let i = rng.random_range(0..n);
    let j = (i + rng.random_range(1..n)) % n;
    Permutation::transposition(n, i, j)
}

/// Samples Bob's results for one displacement cycle by iterated swapping.
///
/// `codes[k]` is the Bell code of pair `k`; slot `k` holds the first
/// particle of pair `(k + 1) mod c` and the second particle of pair `k`,
/// and slots are measured in ascending order.
pub fn sample_cycle_symbolic(codes: &[BellCode], rng: &mut SimRng) -> Vec<BellCode> {
    let c = codes.len();
    if c == 1 {
        return vec![codes[0]];
    }
    // `carry` links the first particle of pair 0 to the second particle of
    // the pair about to be measured.
    let mut carry = codes[0];
    let mut results = Vec::with_capacity(c);
    for k in 0..c - 1 {
        let (r, joined) = entanglement_swap(codes[k + 1], carry, rng);
        results.push(r);
        carry = joined;
    }
    results.push(carry);
    results
}

/// Exact law of [`sample_cycle_symbolic`]: uniform over result tuples whose
/// XOR equals the XOR of the codes.
pub fn cycle_law_symbolic(codes: &[BellCode]) -> BTreeMap<Vec<BellCode>, f64> {
    let c = codes.len();
    let total = codes.iter().fold(BellCode::PHI_PLUS, |acc, &x| acc ^ x);
    let weight = 0.25f64.powi(c as i32 - 1);
    let mut law = BTreeMap::new();
    for index in 0..4usize.pow(c as u32 - 1) {
        let mut tuple: Vec<BellCode> = (0..c - 1)
            .map(|k| BellCode::ALL[(index >> (2 * k)) & 3])
            .collect();
        let last = tuple.iter().fold(total, |acc, &x| acc ^ x);
        tuple.push(last);
        law.insert(tuple, weight);
    }
    law
}

/// Joint register of `codes.len()` logical Bell pairs, pair `k` on physical
/// qubits `4k..4k+4`.
pub fn cycle_register(codes: &[BellCode], model: NoiseModel) -> Result<PhysicalState> {
    let mut iter = codes.iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::InvalidArgument("empty cycle".into()))?;
    iter.try_fold(make_logical_bell(*first, model), |acc, &code| {
        acc.tensor(&make_logical_bell(code, model))
    })
}

fn slot_qubits(k: usize, c: usize) -> [usize; 4] {
    let src = (k + 1) % c;
    [4 * src, 4 * src + 1, 4 * k + 2, 4 * k + 3]
}

/// Exact outcome law of a displacement cycle on one joint state vector
/// (`4c` physical qubits), enumerating every measurement branch.
pub fn cycle_law_statevector(
    codes: &[BellCode],
    model: NoiseModel,
) -> Result<BTreeMap<Vec<BellCode>, f64>> {
    let c = codes.len();
    let mut law = BTreeMap::new();
    let mut stack = vec![(cycle_register(codes, model)?, Vec::new(), 1.0)];
    while let Some((state, prefix, prob)) = stack.pop() {
        let k = prefix.len();
        if k == c {
            *law.entry(prefix).or_insert(0.0) += prob;
            continue;
        }
        for code in BellCode::ALL {
            let (p, post) = collapse_logical_bell(&state, slot_qubits(k, c), code, model)?;
            if let Some(post) = post {
                let mut next = prefix.clone();
                next.push(code);
                stack.push((post, next, prob * p));
            }
        }
    }
    Ok(law)
}

/// Samples a displacement cycle on one joint state vector.
pub fn sample_cycle_statevector(
    codes: &[BellCode],
    model: NoiseModel,
    rng: &mut SimRng,
) -> Result<Vec<BellCode>> {
    let c = codes.len();
    let mut state = cycle_register(codes, model)?;
    let mut results = Vec::with_capacity(c);
    for k in 0..c {
        let (readout, post) = measure_logical_bell_at(&state, slot_qubits(k, c), model, rng)?;
        results.push(
            readout
                .value()
                .ok_or(Error::CodespaceLeak("cycle measurement"))?,
        );
        state = post;
    }
    Ok(results)
}
