//! Two-party key agreement over a collective-noise channel.
//!
//! [`Session`] is a message-ordered state machine: each step method checks
//! that the previous step has completed and refuses to run otherwise, so
//! Bob's `K_B ⊕ M` announcement always precedes Alice's permutation reveal.
//!
//! Steps, with `n` the number of key dibits per party:
//!
//! 1. Alice prepares `2n` logical Φ+ pairs, keeps the first halves (`S_A`),
//!    hides decoys among the second halves (`S_B`) and sends them to Bob.
//! 2. Alice reveals the decoys; Bob measures them and aborts on too many errors.
//! 3. Both parties Bell-measure consecutive particle pairs and obtain the
//!    same swapping record `M`.
//! 4. Alice prepares `n` pairs in the states named by `M` and encodes `K_A`
//!    with logical Paulis. The permuted pairs travel with decoys (`S_C`).
//! 5. Decoy check on `S_C`.
//! 6. Bob announces `K_B ⊕ M`.
//! 7. Alice reveals the permutation; Bob undoes it and measures to learn `K_A`.
//! 8. Both compute `(K_A ⊕ K_B) ∥ (K_A ⊕ K_B ⊕ M)`.

mod backend;
mod permutation;
mod transcript;

pub use backend::{
    new_backend, BackendKind, ParticleId, QuantumBackend, StateVectorBackend, SymbolicBackend,
};
pub use permutation::Permutation;
pub use transcript::{DecoyRecord, Event, Party, PermutationScope, Sequence, Transcript};

use std::f64::consts::TAU;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::Eavesdropper;
use crate::error::{Error, Result};
use crate::logical::{BellCode, LogicalSymbol, NoiseModel, Readout, UnitaryCode};
use crate::symbolic::{final_key, BitString, DibitString};
use crate::{rng_for, SimRng, DEFAULT_SEED};

/// Decoy error rate above which a check aborts, unless configured otherwise.
pub const DEFAULT_ERROR_THRESHOLD: f64 = 0.05;

/// Default decoys per transmission: `max(8, n)`.
pub fn default_decoy_count(n: usize) -> usize {
    n.max(8)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    /// Number of key dibits contributed by each party.
    pub n: usize,
    pub noise: NoiseModel,
    /// Decoys inserted into each quantum transmission.
    pub decoy_count: usize,
    /// Largest tolerated decoy error rate.
    pub error_threshold: f64,
    pub backend: BackendKind,
    pub seed: u64,
    pub scope: PermutationScope,
    /// Forces the step-3 record `M` (symbolic backend only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub injected_m: Option<DibitString>,
}

impl ProtocolConfig {
    pub fn new(n: usize, noise: NoiseModel) -> Self {
        ProtocolConfig {
            n,
            noise,
            decoy_count: default_decoy_count(n),
            error_threshold: DEFAULT_ERROR_THRESHOLD,
            backend: BackendKind::Symbolic,
            seed: DEFAULT_SEED,
            scope: PermutationScope::WholePairs,
            injected_m: None,
        }
    }

    pub fn with_backend(mut self, backend: BackendKind) -> Self {
        self.backend = backend;
        self
    }

    pub fn with_decoys(mut self, decoy_count: usize, error_threshold: f64) -> Self {
        self.decoy_count = decoy_count;
        self.error_threshold = error_threshold;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_injected_m(mut self, m: DibitString) -> Self {
        self.injected_m = Some(m);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.error_threshold) {
            return Err(Error::Config(format!(
                "error threshold {} outside [0, 1]",
                self.error_threshold
            )));
        }
        if let Some(m) = &self.injected_m {
            if self.backend != BackendKind::Symbolic {
                return Err(Error::Config(
                    "injected M requires the symbolic backend".into(),
                ));
            }
            if m.len() != self.n {
                return Err(Error::Config(format!(
                    "injected M has {} dibits, expected {}",
                    m.len(),
                    self.n
                )));
            }
        }
        Ok(())
    }

    fn build_backend(&self) -> Box<dyn QuantumBackend> {
        match (&self.injected_m, self.backend) {
            (Some(m), BackendKind::Symbolic) => Box::new(SymbolicBackend::with_script(
                self.noise,
                m.iter().map(BellCode::from),
            )),
            _ => new_backend(self.backend, self.noise),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Agreed,
    AbortedAtDecoyCheck1,
    AbortedAtDecoyCheck2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub alice_final_key: Option<BitString>,
    pub bob_final_key: Option<BitString>,
    /// `M` as measured by Alice and by Bob.
    pub m_alice: Option<DibitString>,
    pub m_bob: Option<DibitString>,
    /// `K_A` as decoded by Bob in step 7.
    pub bob_derived_ka: Option<DibitString>,
    pub transcript: Transcript,
}

impl RunOutcome {
    pub fn keys_match(&self) -> bool {
        self.status == RunStatus::Agreed && self.alice_final_key == self.bob_final_key
    }
}

/// Result of checking the decoys of one transmission.
#[derive(Clone, Debug, PartialEq)]
pub struct DecoyCheckOutcome {
    pub checked: usize,
    pub errors: usize,
    pub error_rate: f64,
    pub passed: bool,
    /// The received sequence with decoys removed, in original order.
    pub stripped: Vec<ParticleId>,
}

/// Inserts `count` random decoys at uniformly random positions of `payload`.
pub fn insert_decoys(
    payload: &[ParticleId],
    count: usize,
    backend: &mut dyn QuantumBackend,
    rng: &mut SimRng,
) -> Result<(Vec<ParticleId>, Vec<DecoyRecord>)> {
    let total = payload.len() + count;
    let mut positions = index::sample(rng, total, count).into_vec();
    positions.sort_unstable();
    let mut decoys = Vec::with_capacity(count);
    let mut sequence = Vec::with_capacity(total);
    let mut rest = payload.iter();
    let mut next_decoy = positions.iter().peekable();
    for pos in 0..total {
        if next_decoy.peek() == Some(&&pos) {
            next_decoy.next();
            let state = LogicalSymbol::random(rng);
            sequence.push(backend.single(state)?);
            decoys.push(DecoyRecord {
                position: pos,
                state,
            });
        } else {
            sequence.push(*rest.next().expect("payload and decoys fill the sequence"));
        }
    }
    Ok((sequence, decoys))
}

/// Bob measures every announced decoy in its basis and strips them out.
pub fn decoy_check(
    announced: &[DecoyRecord],
    received: &[ParticleId],
    backend: &mut dyn QuantumBackend,
    error_threshold: f64,
    rng: &mut SimRng,
) -> Result<DecoyCheckOutcome> {
    let mut is_decoy = vec![false; received.len()];
    for d in announced {
        match is_decoy.get_mut(d.position) {
            None => {
                return Err(Error::Validation(format!(
                    "decoy position {} outside sequence of {}",
                    d.position,
                    received.len()
                )))
            }
            Some(true) => {
                return Err(Error::Validation(format!(
                    "decoy position {} announced twice",
                    d.position
                )))
            }
            Some(flag) => *flag = true,
        }
    }
    let mut errors = 0;
    for d in announced {
        let particle = received[d.position];
        let readout = backend.measure_single(particle, d.state.basis(), rng)?;
        if readout != Readout::Value(d.state) {
            errors += 1;
        }
        backend.discard(particle)?;
    }
    let checked = announced.len();
    let error_rate = if checked == 0 {
        0.0
    } else {
        errors as f64 / checked as f64
    };
    let stripped = received
        .iter()
        .zip(&is_decoy)
        .filter(|(_, &d)| !d)
        .map(|(&p, _)| p)
        .collect();
    Ok(DecoyCheckOutcome {
        checked,
        errors,
        error_rate,
        passed: error_rate <= error_threshold,
        stripped,
    })
}

/// Bob's step-6 announcement `K_B ⊕ M`.
pub fn step6_announce(kb: &DibitString, m: &DibitString) -> Result<DibitString> {
    kb.xor(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    Ready,
    SbSent,
    SbChecked,
    Measured,
    ScSent,
    ScChecked,
    KeyAnnounced,
    Revealed,
    Finished,
    Aborted,
}

impl Phase {
    fn name(self) -> &'static str {
        match self {
            Phase::Ready => "ready",
            Phase::SbSent => "step1",
            Phase::SbChecked => "step2",
            Phase::Measured => "step3",
            Phase::ScSent => "step4",
            Phase::ScChecked => "step5",
            Phase::KeyAnnounced => "step6",
            Phase::Revealed => "step7",
            Phase::Finished => "step8",
            Phase::Aborted => "aborted",
        }
    }
}

/// What Alice knows once Bob's step-6 announcement is public.
#[derive(Clone, Debug, PartialEq)]
pub struct AliceKnowledge {
    pub ka: DibitString,
    pub kb: DibitString,
    pub m: DibitString,
    pub permutation: Permutation,
}

struct InFlight {
    particles: Vec<ParticleId>,
    decoys: Vec<DecoyRecord>,
}

/// One protocol execution between an honest Bob and a (possibly dishonest) Alice.
pub struct Session {
    config: ProtocolConfig,
    backend: Box<dyn QuantumBackend>,
    rng: SimRng,
    phase: Phase,
    transcript: Transcript,
    eavesdropper: Option<Eavesdropper>,
    ka: DibitString,
    kb: DibitString,
    alice_half: Vec<ParticleId>,
    in_flight: Option<InFlight>,
    bob_received: Vec<ParticleId>,
    m_alice: Option<DibitString>,
    m_bob: Option<DibitString>,
    permutation: Option<Permutation>,
    kb_recovered: Option<DibitString>,
    alice_claimed_ka: Option<DibitString>,
    bob_ka: Option<DibitString>,
    status: Option<RunStatus>,
}

impl Session {
    /// Session whose random stream is stream 0 of `config.seed`.
    pub fn new(config: ProtocolConfig, ka: DibitString, kb: DibitString) -> Result<Self> {
        let rng = rng_for(config.seed, 0);
        Self::with_rng(config, ka, kb, rng)
    }

    pub fn with_rng(
        config: ProtocolConfig,
        ka: DibitString,
        kb: DibitString,
        rng: SimRng,
    ) -> Result<Self> {
        config.validate()?;
        for key in [&ka, &kb] {
            if key.len() != config.n {
                return Err(Error::LengthMismatch {
                    left: key.len(),
                    right: config.n,
                });
            }
        }
        Ok(Session {
            backend: config.build_backend(),
            config,
            rng,
            phase: Phase::Ready,
            transcript: Transcript::new(),
            eavesdropper: None,
            ka,
            kb,
            alice_half: Vec::new(),
            in_flight: None,
            bob_received: Vec::new(),
            m_alice: None,
            m_bob: None,
            permutation: None,
            kb_recovered: None,
            alice_claimed_ka: None,
            bob_ka: None,
            status: None,
        })
    }

    pub fn with_eavesdropper(mut self, eve: Eavesdropper) -> Self {
        self.eavesdropper = Some(eve);
        self
    }

    pub fn config(&self) -> &ProtocolConfig {
        &self.config
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn transcript_mut(&mut self) -> &mut Transcript {
        &mut self.transcript
    }

    pub fn rng(&mut self) -> &mut SimRng {
        &mut self.rng
    }

    pub fn is_aborted(&self) -> bool {
        self.phase == Phase::Aborted
    }

    fn expect_phase(&self, expected: Phase, attempted: &'static str) -> Result<()> {
        if self.phase != expected {
            return Err(Error::OutOfOrder {
                attempted,
                current: self.phase.name(),
            });
        }
        Ok(())
    }

    /// Sends `particles` through one collective-noise draw and any eavesdropper.
    fn transmit(
        &mut self,
        step: u8,
        sequence: Sequence,
        particles: Vec<ParticleId>,
        decoys: Vec<DecoyRecord>,
        scope: Option<PermutationScope>,
    ) -> Result<()> {
        let angle = self.rng.random_range(0.0..TAU);
        self.backend.apply_noise(&particles, angle)?;
        if let Some(eve) = self.eavesdropper {
            if eve.attacks(sequence) {
                eve.intercept_resend(self.backend.as_mut(), &particles, &mut self.rng)?;
            }
        }
        self.transcript.push(Event::QuantumSend {
            step,
            sequence,
            length: particles.len(),
            decoys: decoys.len(),
            noise: self.config.noise,
            noise_angle: angle,
            scope,
        });
        self.in_flight = Some(InFlight { particles, decoys });
        Ok(())
    }

    fn check_in_flight(&mut self, step: u8, sequence: Sequence, abort: RunStatus) -> Result<bool> {
        let flight = self
            .in_flight
            .take()
            .expect("phase guarantees a transmission");
        self.transcript.push(Event::DecoyAnnouncement {
            step,
            sequence,
            decoys: flight.decoys.clone(),
        });
        let outcome = decoy_check(
            &flight.decoys,
            &flight.particles,
            self.backend.as_mut(),
            self.config.error_threshold,
            &mut self.rng,
        )?;
        self.transcript.push(Event::DecoyCheck {
            step,
            sequence,
            checked: outcome.checked,
            errors: outcome.errors,
            error_rate: outcome.error_rate,
            passed: outcome.passed,
        });
        if !outcome.passed {
            self.transcript.push(Event::Abort {
                step,
                reason: format!(
                    "decoy error rate {} exceeds {}",
                    outcome.error_rate, self.config.error_threshold
                ),
            });
            self.phase = Phase::Aborted;
            self.status = Some(abort);
            return Ok(false);
        }
        self.bob_received = outcome.stripped;
        Ok(true)
    }

    /// Step 1: prepare `2n` Φ+ pairs and send the decoy-padded second halves.
    pub fn step1_prepare(&mut self) -> Result<()> {
        self.expect_phase(Phase::Ready, "step1")?;
        let pairs = 2 * self.config.n;
        let mut second_half = Vec::with_capacity(pairs);
        self.alice_half.clear();
        for _ in 0..pairs {
            let (a, b) = self.backend.bell_pair(BellCode::PHI_PLUS)?;
            self.alice_half.push(a);
            second_half.push(b);
        }
        let (sequence, decoys) = insert_decoys(
            &second_half,
            self.config.decoy_count,
            self.backend.as_mut(),
            &mut self.rng,
        )?;
        self.transmit(1, Sequence::SB, sequence, decoys, None)?;
        self.phase = Phase::SbSent;
        Ok(())
    }

    /// Step 2: decoy check on `S_B'`. Returns false when the run aborts.
    pub fn step2_check(&mut self) -> Result<bool> {
        self.expect_phase(Phase::SbSent, "step2")?;
        let passed = self.check_in_flight(2, Sequence::SB, RunStatus::AbortedAtDecoyCheck1)?;
        if passed {
            self.phase = Phase::SbChecked;
        }
        Ok(passed)
    }

    /// Step 3: Alice, then Bob, Bell-measure particles `(2i, 2i+1)`.
    pub fn step3_measure(&mut self) -> Result<()> {
        self.expect_phase(Phase::SbChecked, "step3")?;
        let n = self.config.n;
        let mut m_alice = Vec::with_capacity(n);
        for i in 0..n {
            let code = self.backend.measure_bell(
                self.alice_half[2 * i],
                self.alice_half[2 * i + 1],
                &mut self.rng,
            )?;
            m_alice.push(code.dibit());
        }
        let mut m_bob = Vec::with_capacity(n);
        for i in 0..n {
            let code = self.backend.measure_bell(
                self.bob_received[2 * i],
                self.bob_received[2 * i + 1],
                &mut self.rng,
            )?;
            m_bob.push(code.dibit());
        }
        self.m_alice = Some(m_alice.into());
        self.m_bob = Some(m_bob.into());
        self.transcript
            .push(Event::BellMeasurement { step: 3, pairs: n });
        self.phase = Phase::Measured;
        Ok(())
    }

    /// Step 4 with a freshly drawn random permutation.
    pub fn step4_encode(&mut self) -> Result<()> {
        self.step4_encode_inner(None)
    }

    /// Step 4 with Alice's permutation fixed by the caller. A random
    /// permutation is still drawn so the random stream stays aligned with
    /// an unforced run.
    pub fn step4_encode_with(&mut self, permutation: Permutation) -> Result<()> {
        if permutation.len() != self.config.n {
            return Err(Error::LengthMismatch {
                left: permutation.len(),
                right: self.config.n,
            });
        }
        self.step4_encode_inner(Some(permutation))
    }

    fn step4_encode_inner(&mut self, forced: Option<Permutation>) -> Result<()> {
        self.expect_phase(Phase::Measured, "step4")?;
        let n = self.config.n;
        let drawn = Permutation::random(n, &mut self.rng);
        let permutation = forced.unwrap_or(drawn);
        let m = self.m_alice.clone().expect("set in step 3");
        let mut firsts = Vec::with_capacity(n);
        let mut seconds = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b) = self.backend.bell_pair(BellCode::from(m[i]))?;
            self.backend
                .apply_unitary(a, UnitaryCode::from(self.ka[i]))?;
            firsts.push(a);
            seconds.push(b);
        }
        let payload = layout_pairs(&firsts, &seconds, &permutation, self.config.scope)?;
        let (sequence, decoys) = insert_decoys(
            &payload,
            self.config.decoy_count,
            self.backend.as_mut(),
            &mut self.rng,
        )?;
        self.permutation = Some(permutation);
        self.transmit(4, Sequence::SC, sequence, decoys, Some(self.config.scope))?;
        self.phase = Phase::ScSent;
        Ok(())
    }

    /// Step 5: decoy check on `S_C''`. Returns false when the run aborts.
    pub fn step5_check(&mut self) -> Result<bool> {
        self.expect_phase(Phase::ScSent, "step5")?;
        let passed = self.check_in_flight(5, Sequence::SC, RunStatus::AbortedAtDecoyCheck2)?;
        if passed {
            self.phase = Phase::ScChecked;
        }
        Ok(passed)
    }

    /// Step 6: Bob announces `K_B ⊕ M`; Alice recovers `K_B`.
    pub fn step6_announce(&mut self) -> Result<()> {
        self.expect_phase(Phase::ScChecked, "step6")?;
        let announced = step6_announce(&self.kb, self.m_bob.as_ref().expect("set in step 3"))?;
        self.kb_recovered = Some(announced.xor(self.m_alice.as_ref().expect("set in step 3"))?);
        self.transcript.push(Event::KeyAnnouncement {
            step: 6,
            kb_xor_m: announced,
        });
        self.phase = Phase::KeyAnnounced;
        Ok(())
    }

    /// Everything Alice holds after step 6; `None` before that.
    pub fn alice_knowledge(&self) -> Option<AliceKnowledge> {
        match self.phase {
            Phase::KeyAnnounced | Phase::Revealed | Phase::Finished => Some(AliceKnowledge {
                ka: self.ka.clone(),
                kb: self.kb_recovered.clone()?,
                m: self.m_alice.clone()?,
                permutation: self.permutation.clone()?,
            }),
            _ => None,
        }
    }

    /// Step 7 with the true permutation.
    pub fn step7_reveal(&mut self) -> Result<()> {
        let truth = self.permutation.clone().ok_or(Error::OutOfOrder {
            attempted: "step7",
            current: self.phase.name(),
        })?;
        self.step7_reveal_as(truth, None)
    }

    /// Step 7 where Alice announces `announced` and, when lying, adopts
    /// `claimed_ka` as her own contribution for step 8.
    pub fn step7_reveal_as(
        &mut self,
        announced: Permutation,
        claimed_ka: Option<DibitString>,
    ) -> Result<()> {
        self.expect_phase(Phase::KeyAnnounced, "step7")?;
        if announced.len() != self.config.n {
            return Err(Error::LengthMismatch {
                left: announced.len(),
                right: self.config.n,
            });
        }
        if let Some(claimed) = &claimed_ka {
            if claimed.len() != self.config.n {
                return Err(Error::LengthMismatch {
                    left: claimed.len(),
                    right: self.config.n,
                });
            }
        }
        self.transcript.push(Event::PermutationReveal {
            step: 7,
            scope: self.config.scope,
            permutation: announced.clone(),
        });
        let m_bob = self.m_bob.clone().expect("set in step 3");
        let received = std::mem::take(&mut self.bob_received);
        let ka = step7_decode(
            self.backend.as_mut(),
            &received,
            &announced,
            &m_bob,
            self.config.scope,
            &mut self.rng,
        )?;
        self.bob_ka = Some(ka);
        self.alice_claimed_ka = claimed_ka;
        self.phase = Phase::Revealed;
        Ok(())
    }

    /// Step 8: both parties compute the final key.
    pub fn step8_finalize(&mut self) -> Result<()> {
        self.expect_phase(Phase::Revealed, "step8")?;
        let alice_ka = self
            .alice_claimed_ka
            .clone()
            .unwrap_or_else(|| self.ka.clone());
        let kb_recovered = self.kb_recovered.clone().expect("set in step 6");
        let m_alice = self.m_alice.clone().expect("set in step 3");
        let m_bob = self.m_bob.clone().expect("set in step 3");
        let bob_ka = self.bob_ka.clone().expect("set in step 7");
        let alice_key = final_key(&alice_ka, &kb_recovered, &m_alice)?;
        let bob_key = final_key(&bob_ka, &self.kb, &m_bob)?;
        self.transcript.push(Event::Derived {
            party: Party::Alice,
            m: m_alice,
            peer_key: kb_recovered,
            final_key: alice_key,
        });
        self.transcript.push(Event::Derived {
            party: Party::Bob,
            m: m_bob,
            peer_key: bob_ka,
            final_key: bob_key,
        });
        self.status = Some(RunStatus::Agreed);
        self.phase = Phase::Finished;
        Ok(())
    }

    /// Runs every remaining step honestly.
    pub fn run_honest(mut self) -> Result<RunOutcome> {
        self.run_until_announcement()?;
        if !self.is_aborted() {
            self.step7_reveal()?;
            self.step8_finalize()?;
        }
        self.into_outcome()
    }

    /// Steps 1–6, stopping early on abort.
    pub fn run_until_announcement(&mut self) -> Result<()> {
        self.step1_prepare()?;
        if !self.step2_check()? {
            return Ok(());
        }
        self.step3_measure()?;
        self.step4_encode()?;
        if !self.step5_check()? {
            return Ok(());
        }
        self.step6_announce()
    }

    pub fn into_outcome(self) -> Result<RunOutcome> {
        let status = match (self.phase, self.status) {
            (Phase::Finished | Phase::Aborted, Some(s)) => s,
            _ => {
                return Err(Error::OutOfOrder {
                    attempted: "outcome",
                    current: self.phase.name(),
                })
            }
        };
        let agreed = status == RunStatus::Agreed;
        let keys = self.transcript.events().iter().filter_map(|e| match e {
            Event::Derived {
                party, final_key, ..
            } => Some((*party, final_key.clone())),
            _ => None,
        });
        let (mut alice_key, mut bob_key) = (None, None);
        for (party, key) in keys {
            match party {
                Party::Alice => alice_key = Some(key),
                Party::Bob => bob_key = Some(key),
            }
        }
        Ok(RunOutcome {
            status,
            alice_final_key: alice_key.filter(|_| agreed),
            bob_final_key: bob_key.filter(|_| agreed),
            m_alice: self.m_alice.filter(|_| agreed),
            m_bob: self.m_bob.filter(|_| agreed),
            bob_derived_ka: self.bob_ka.filter(|_| agreed),
            transcript: self.transcript,
        })
    }
}

/// Orders the step-4 particles for transmission as `(first, second)` slots.
pub fn layout_pairs(
    firsts: &[ParticleId],
    seconds: &[ParticleId],
    permutation: &Permutation,
    scope: PermutationScope,
) -> Result<Vec<ParticleId>> {
    let slots: Vec<(ParticleId, ParticleId)> = match scope {
        PermutationScope::WholePairs => {
            let pairs: Vec<_> = firsts
                .iter()
                .copied()
                .zip(seconds.iter().copied())
                .collect();
            permutation.apply(&pairs)?
        }
        PermutationScope::FirstParticles => {
            let moved = permutation.apply(firsts)?;
            moved.into_iter().zip(seconds.iter().copied()).collect()
        }
    };
    Ok(slots.into_iter().flat_map(|(a, b)| [a, b]).collect())
}

/// Bob undoes `announced` on the stripped `S_C` and Bell-measures each slot
/// in ascending order; returns the measured codes XOR `m`.
pub fn step7_decode(
    backend: &mut dyn QuantumBackend,
    received: &[ParticleId],
    announced: &Permutation,
    m: &DibitString,
    scope: PermutationScope,
    rng: &mut SimRng,
) -> Result<DibitString> {
    let n = announced.len();
    if received.len() != 2 * n || m.len() != n {
        return Err(Error::LengthMismatch {
            left: received.len(),
            right: 2 * n,
        });
    }
    let undo = announced.inverse();
    let firsts: Vec<ParticleId> = received.iter().step_by(2).copied().collect();
    let seconds: Vec<ParticleId> = received.iter().skip(1).step_by(2).copied().collect();
    let slots: Vec<(ParticleId, ParticleId)> = match scope {
        PermutationScope::WholePairs => {
            let pairs: Vec<_> = firsts.into_iter().zip(seconds).collect();
            undo.apply(&pairs)?
        }
        PermutationScope::FirstParticles => undo.apply(&firsts)?.into_iter().zip(seconds).collect(),
    };
    let mut derived = Vec::with_capacity(n);
    for (i, (a, b)) in slots.into_iter().enumerate() {
        let code = backend.measure_bell(a, b, rng)?;
        derived.push(code.dibit() ^ m[i]);
    }
    Ok(derived.into())
}

/// Runs the full protocol, optionally against an intercept-resend eavesdropper.
pub fn run_protocol(
    config: &ProtocolConfig,
    ka: &DibitString,
    kb: &DibitString,
    eavesdropper: Option<Eavesdropper>,
) -> Result<RunOutcome> {
    let mut session = Session::new(config.clone(), ka.clone(), kb.clone())?;
    if let Some(eve) = eavesdropper {
        session = session.with_eavesdropper(eve);
    }
    session.run_honest()
}
