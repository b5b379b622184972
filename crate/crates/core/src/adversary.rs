//! Adversaries: a dishonest Alice who lies about her permutation, and an
//! intercept-resend eavesdropper on the quantum channel.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logical::{LogicalBasis, LogicalSymbol, Readout};
use crate::protocol::{
    Event, ParticleId, Permutation, ProtocolConfig, QuantumBackend, RunOutcome, Sequence, Session,
};
use crate::symbolic::{final_key, BitString, DibitString};
use crate::SimRng;

/// Memoryless eavesdropper: measures every particle of the attacked
/// transmissions in a uniformly random logical basis and resends the result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Eavesdropper {
    pub on_first_transmission: bool,
    pub on_second_transmission: bool,
}

impl Eavesdropper {
    pub fn first_transmission() -> Self {
        Eavesdropper {
            on_first_transmission: true,
            on_second_transmission: false,
        }
    }

    pub fn both_transmissions() -> Self {
        Eavesdropper {
            on_first_transmission: true,
            on_second_transmission: true,
        }
    }

    pub fn attacks(&self, sequence: Sequence) -> bool {
        match sequence {
            Sequence::SB => self.on_first_transmission,
            Sequence::SC => self.on_second_transmission,
        }
    }

    /// Returns Eve's readouts; the particles are left in the collapsed states.
    pub fn intercept_resend(
        &self,
        backend: &mut dyn QuantumBackend,
        transmission: &[ParticleId],
        rng: &mut SimRng,
    ) -> Result<Vec<Readout<LogicalSymbol>>> {
        intercept_resend(backend, transmission, rng)
    }
}

pub fn intercept_resend(
    backend: &mut dyn QuantumBackend,
    transmission: &[ParticleId],
    rng: &mut SimRng,
) -> Result<Vec<Readout<LogicalSymbol>>> {
    transmission
        .iter()
        .map(|&p| {
            let basis = if rng.random() {
                LogicalBasis::X
            } else {
                LogicalBasis::Z
            };
            backend.measure_single(p, basis, rng)
        })
        .collect()
}

/// What a cheating Alice wants Bob to end up with.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackGoal {
    /// A complete `4n`-bit final key.
    FinalKey(BitString),
    /// The contribution `K'_A` Bob should decode.
    KaPrime(DibitString),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackResult {
    pub feasible: bool,
    pub fake_perm: Option<Permutation>,
    pub target_ka: Option<DibitString>,
    pub predicted_bob_key: Option<BitString>,
}

impl AttackResult {
    fn infeasible() -> Self {
        AttackResult {
            feasible: false,
            fake_perm: None,
            target_ka: None,
            predicted_bob_key: None,
        }
    }
}

/// Resolves a goal to the `K'_A` it requires, or `None` when no `K'_A`
/// can produce it (the second half of a final key is forced to
/// first half ⊕ M).
pub fn target_ka(
    goal: &AttackGoal,
    kb: &DibitString,
    m: &DibitString,
) -> Result<Option<DibitString>> {
    let n = m.len();
    match goal {
        AttackGoal::KaPrime(ka) => {
            if ka.len() != n {
                return Err(Error::LengthMismatch {
                    left: ka.len(),
                    right: n,
                });
            }
            Ok(Some(ka.clone()))
        }
        AttackGoal::FinalKey(key) => {
            if key.len() != 4 * n {
                return Err(Error::LengthMismatch {
                    left: key.len(),
                    right: 4 * n,
                });
            }
            let (first, second) = key.halves()?;
            let first = first.to_dibits()?;
            if first.xor(m)? != second.to_dibits()? {
                return Ok(None);
            }
            Ok(Some(first.xor(kb)?))
        }
    }
}

/// Searches for an announcement `Π'` that makes Bob decode the goal.
///
/// Bob receives the codes `K_A ⊕ M` reordered by `used_perm` and reads slot
/// `k` from received position `Π'(k)`, so `Π'` exists exactly when the
/// target codes `K'_A ⊕ M` are a rearrangement of the true ones. Among valid
/// choices the true permutation is preferred when it works, otherwise the
/// lexicographically smallest mapping is returned.
pub fn craft_fake_permutation(
    goal: &AttackGoal,
    ka: &DibitString,
    kb: &DibitString,
    m: &DibitString,
    used_perm: &Permutation,
) -> Result<AttackResult> {
    let n = m.len();
    for len in [ka.len(), kb.len(), used_perm.len()] {
        if len != n {
            return Err(Error::LengthMismatch {
                left: len,
                right: n,
            });
        }
    }
    let Some(target) = target_ka(goal, kb, m)? else {
        return Ok(AttackResult::infeasible());
    };
    let true_codes = ka.xor(m)?;
    let wanted = target.xor(m)?;
    let predicted = final_key(&target, kb, m)?;
    if wanted == true_codes {
        return Ok(AttackResult {
            feasible: true,
            fake_perm: Some(used_perm.clone()),
            target_ka: Some(target),
            predicted_bob_key: Some(predicted),
        });
    }
    let received = used_perm.apply(true_codes.as_slice())?;
    let mut taken = vec![false; n];
    let mut mapping = Vec::with_capacity(n);
    for code in wanted.iter() {
        let slot = (0..n).find(|&j| !taken[j] && received[j] == code);
        match slot {
            Some(j) => {
                taken[j] = true;
                mapping.push(j);
            }
            None => return Ok(AttackResult::infeasible()),
        }
    }
    Ok(AttackResult {
        feasible: true,
        fake_perm: Some(Permutation::from_mapping(mapping)?),
        target_ka: Some(target),
        predicted_bob_key: Some(predicted),
    })
}

/// Outcome of a run in which Alice tried to steer the key.
#[derive(Clone, Debug, PartialEq)]
pub struct AttackRun {
    pub outcome: RunOutcome,
    pub attack: AttackResult,
}

impl AttackRun {
    /// Bob ended up with exactly the key Alice aimed for.
    pub fn succeeded(&self) -> bool {
        self.attack.feasible
            && self.outcome.bob_final_key.is_some()
            && self.outcome.bob_final_key == self.attack.predicted_bob_key
    }
}

/// Runs steps 1–6 honestly, then lets Alice pick an announcement for the
/// goal returned by `choose_goal` from what she knows at that point.
pub fn attack_run_with<F>(session: Session, choose_goal: F) -> Result<AttackRun>
where
    F: FnOnce(&crate::protocol::AliceKnowledge, &mut SimRng) -> AttackGoal,
{
    let mut session = session;
    session.run_until_announcement()?;
    if session.is_aborted() {
        return Ok(AttackRun {
            outcome: session.into_outcome()?,
            attack: AttackResult::infeasible(),
        });
    }
    let know = session.alice_knowledge().expect("step 6 completed");
    let goal = choose_goal(&know, session.rng());
    let attack = craft_fake_permutation(&goal, &know.ka, &know.kb, &know.m, &know.permutation)?;
    session.transcript_mut().push(Event::Attack(attack.clone()));
    match (&attack.fake_perm, &attack.target_ka) {
        (Some(fake), Some(target)) if attack.feasible => {
            session.step7_reveal_as(fake.clone(), Some(target.clone()))?;
        }
        _ => session.step7_reveal()?,
    }
    session.step8_finalize()?;
    Ok(AttackRun {
        outcome: session.into_outcome()?,
        attack,
    })
}

/// Full run in which Alice announces a fake permutation aimed at `goal`.
/// An infeasible goal leaves the run honest.
pub fn attack_run(
    config: &ProtocolConfig,
    ka: &DibitString,
    kb: &DibitString,
    goal: &AttackGoal,
) -> Result<AttackRun> {
    let session = Session::new(config.clone(), ka.clone(), kb.clone())?;
    let goal = goal.clone();
    attack_run_with(session, move |_, _| goal)
}

/// A uniformly random rearrangement of Alice's codes, expressed as a goal.
pub fn random_reorder_goal(know: &crate::protocol::AliceKnowledge, rng: &mut SimRng) -> AttackGoal {
    let codes = know.ka.xor(&know.m).expect("equal lengths");
    let shuffle = Permutation::random(codes.len(), rng);
    let reordered: DibitString = shuffle.apply(codes.as_slice()).expect("length").into();
    AttackGoal::KaPrime(reordered.xor(&know.m).expect("equal lengths"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logical::NoiseModel;
    use crate::protocol::{BackendKind, RunStatus};
    use crate::rng_for;

    fn ds(s: &str) -> DibitString {
        s.parse().unwrap()
    }

    #[test]
    fn worked_example_is_feasible() {
        let (ka, kb, m) = (ds("0011"), ds("0110"), ds("1110"));
        let goal = AttackGoal::FinalKey("11110001".parse().unwrap());
        let r = craft_fake_permutation(&goal, &ka, &kb, &m, &Permutation::identity(2)).unwrap();
        assert!(r.feasible);
        assert_eq!(r.target_ka, Some(ds("1001")));
        assert_eq!(
            r.fake_perm,
            Some(Permutation::from_mapping(vec![1, 0]).unwrap())
        );
        assert_eq!(r.predicted_bob_key.unwrap().to_string(), "11110001");
    }

    #[test]
    fn honest_goal_keeps_true_permutation() {
        let (ka, kb, m) = (ds("0011"), ds("0110"), ds("1110"));
        let used = Permutation::from_mapping(vec![1, 0]).unwrap();
        let goal = AttackGoal::FinalKey("01011011".parse().unwrap());
        let r = craft_fake_permutation(&goal, &ka, &kb, &m, &used).unwrap();
        assert!(r.feasible);
        assert_eq!(r.fake_perm, Some(used));
    }

    #[test]
    fn unreachable_codes_are_infeasible() {
        // K_A ⊕ M = {11, 01}; K'_A = 1110 ⊕ {00, 01} = 1111 needs {00, 01}.
        let (ka, kb, m) = (ds("0011"), ds("0110"), ds("1110"));
        let goal = AttackGoal::KaPrime(ds("1111"));
        let r = craft_fake_permutation(&goal, &ka, &kb, &m, &Permutation::identity(2)).unwrap();
        assert!(!r.feasible);
        assert!(r.fake_perm.is_none());
    }

    #[test]
    fn inconsistent_key_halves_are_infeasible() {
        let (ka, kb, m) = (ds("0011"), ds("0110"), ds("1110"));
        let goal = AttackGoal::FinalKey("11111111".parse().unwrap());
        let r = craft_fake_permutation(&goal, &ka, &kb, &m, &Permutation::identity(2)).unwrap();
        assert!(!r.feasible);
        let short = AttackGoal::FinalKey("1111".parse().unwrap());
        assert!(craft_fake_permutation(&short, &ka, &kb, &m, &Permutation::identity(2)).is_err());
    }

    #[test]
    fn attack_run_delivers_fake_key() {
        let config = ProtocolConfig::new(2, NoiseModel::Dephasing).with_injected_m(ds("1110"));
        let goal = AttackGoal::FinalKey("11110001".parse().unwrap());
        let run = attack_run(&config, &ds("0011"), &ds("0110"), &goal).unwrap();
        assert_eq!(run.outcome.status, RunStatus::Agreed);
        assert!(run.succeeded());
        assert_eq!(run.outcome.bob_derived_ka, Some(ds("1001")));
        assert_eq!(run.outcome.bob_final_key.unwrap().to_string(), "11110001");
    }

    #[test]
    fn infeasible_goal_runs_honestly() {
        let config = ProtocolConfig::new(2, NoiseModel::Dephasing).with_injected_m(ds("1110"));
        let run = attack_run(
            &config,
            &ds("0011"),
            &ds("0110"),
            &AttackGoal::KaPrime(ds("1111")),
        )
        .unwrap();
        assert!(!run.attack.feasible);
        assert_eq!(run.outcome.bob_final_key.unwrap().to_string(), "01011011");
    }

    #[test]
    fn eve_on_z_decoy_with_matching_basis_is_silent() {
        for kind in [BackendKind::Symbolic, BackendKind::StateVector] {
            let mut backend = crate::protocol::new_backend(kind, NoiseModel::Rotation);
            let mut rng = rng_for(3, 0);
            let mut errors = 0;
            for _ in 0..2000 {
                let d = backend.single(LogicalSymbol::Zero).unwrap();
                let eve = intercept_resend(backend.as_mut(), &[d], &mut rng).unwrap();
                let bob = backend
                    .measure_single(d, LogicalBasis::Z, &mut rng)
                    .unwrap();
                if eve[0].value().unwrap().basis() == LogicalBasis::Z {
                    assert_eq!(bob, Readout::Value(LogicalSymbol::Zero));
                } else if bob != Readout::Value(LogicalSymbol::Zero) {
                    errors += 1;
                }
                backend.discard(d).unwrap();
            }
            // About half of the ~1000 wrong-basis interceptions flip the result.
            assert!((errors as f64 / 1000.0 - 0.5).abs() < 0.1, "{errors}");
        }
    }
}
