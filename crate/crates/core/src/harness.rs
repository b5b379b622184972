//! Monte Carlo campaigns over the protocol scenarios, plus the built-in
//! worked-example check and self-test.
//!
//! Trial `i` of a campaign draws every random choice from stream `i` of the
//! campaign seed, and results are folded in trial order, so a campaign's
//! transcripts and summary depend only on its configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::adversary::{attack_run_with, random_reorder_goal, AttackGoal, AttackRun, Eavesdropper};
use crate::countermeasure::{
    cycle_law_statevector, displacement_run_with, random_transposition, ImprovedConfig,
};
use crate::error::{Error, Result};
use crate::logical::{
    apply_logical_unitary, encode_logical, make_logical_bell, BellCode, LogicalSymbol, NoiseModel,
    UnitaryCode,
};
use crate::protocol::{
    run_protocol, Event, Permutation, ProtocolConfig, RunOutcome, RunStatus, Session, Transcript,
};
use crate::statevector::{gates, projector, PhysicalState, ProjectiveMeasurement};
use crate::symbolic::{unitary_action, BitString, DibitString};
use crate::{rng_for, SimRng};

/// Fidelity tolerance of the exact self-test checks.
pub const FIDELITY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Both parties follow the protocol.
    Honest,
    /// An intercept-resend eavesdropper attacks both quantum transmissions.
    Eve,
    /// Alice announces a fake permutation against whole-pair permutation.
    PermAttackOriginal,
    /// Alice announces a fake permutation against first-particle permutation.
    PermAttackImproved,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::Honest,
        Scenario::Eve,
        Scenario::PermAttackOriginal,
        Scenario::PermAttackImproved,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Honest => "honest",
            Scenario::Eve => "eve",
            Scenario::PermAttackOriginal => "perm_attack_original",
            Scenario::PermAttackImproved => "perm_attack_improved",
        }
    }

    pub fn is_attack(self) -> bool {
        matches!(
            self,
            Scenario::PermAttackOriginal | Scenario::PermAttackImproved
        )
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let normalized = s.replace('-', "_");
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == normalized)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scenario '{s}'")))
    }
}

/// A batch of independent trials of one scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Campaign {
    pub scenario: Scenario,
    pub trials: usize,
    pub config: ProtocolConfig,
    /// Alice's goal in the attack scenarios. Without one, Alice aims for a
    /// random reordering of her codes (original protocol) or announces the
    /// truth composed with a random transposition (improved protocol).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<AttackGoal>,
    /// Fixed key contributions; random per trial when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ka: Option<DibitString>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kb: Option<DibitString>,
    /// Directory receiving `summary.json` and, when enabled, per-trial transcripts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub write_transcripts: bool,
}

impl Campaign {
    pub fn new(scenario: Scenario, config: ProtocolConfig, trials: usize) -> Self {
        Campaign {
            scenario,
            trials,
            config,
            goal: None,
            ka: None,
            kb: None,
            output_path: None,
            write_transcripts: false,
        }
    }

    pub fn with_goal(mut self, goal: AttackGoal) -> Self {
        self.goal = Some(goal);
        self
    }

    pub fn with_keys(mut self, ka: DibitString, kb: DibitString) -> Self {
        self.ka = Some(ka);
        self.kb = Some(kb);
        self
    }

    pub fn with_output(mut self, path: impl Into<PathBuf>, write_transcripts: bool) -> Self {
        self.output_path = Some(path.into());
        self.write_transcripts = write_transcripts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.goal.is_some() && !self.scenario.is_attack() {
            return Err(Error::Config(format!(
                "scenario '{}' takes no attack goal",
                self.scenario
            )));
        }
        if self.scenario == Scenario::PermAttackImproved && self.goal.is_none() && self.config.n < 2
        {
            return Err(Error::Config("a displacement attack needs n ≥ 2".into()));
        }
        if self.write_transcripts && self.output_path.is_none() {
            return Err(Error::Config(
                "transcripts requested without an output path".into(),
            ));
        }
        for key in [&self.ka, &self.kb].into_iter().flatten() {
            if key.len() != self.config.n {
                return Err(Error::Config(format!(
                    "key contribution has {} dibits, expected {}",
                    key.len(),
                    self.config.n
                )));
            }
        }
        Ok(())
    }
}

/// Everything a campaign keeps from one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub index: usize,
    pub status: RunStatus,
    pub keys_match: bool,
    pub attack_success: bool,
    pub decoys_checked: usize,
    pub decoy_errors: usize,
    pub alice_final_key: Option<BitString>,
    pub bob_final_key: Option<BitString>,
    pub bob_derived_ka: Option<DibitString>,
    pub target_ka: Option<DibitString>,
    pub transcript: Transcript,
}

impl TrialRecord {
    fn from_outcome(index: usize, outcome: RunOutcome, attack: Option<&AttackRun>) -> Self {
        let (checked, errors) = outcome
            .transcript
            .events()
            .iter()
            .filter_map(|e| match e {
                Event::DecoyCheck {
                    checked, errors, ..
                } => Some((*checked, *errors)),
                _ => None,
            })
            .fold((0, 0), |(c, e), (dc, de)| (c + dc, e + de));
        TrialRecord {
            index,
            status: outcome.status,
            keys_match: outcome.keys_match(),
            attack_success: attack.is_some_and(AttackRun::succeeded),
            decoys_checked: checked,
            decoy_errors: errors,
            target_ka: attack.and_then(|a| a.attack.target_ka.clone()),
            alice_final_key: outcome.alice_final_key,
            bob_final_key: outcome.bob_final_key,
            bob_derived_ka: outcome.bob_derived_ka,
            transcript: outcome.transcript,
        }
    }
}

/// Decoy-check aborts, by check.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbortCounts {
    pub decoy_check_1: usize,
    pub decoy_check_2: usize,
}

impl AbortCounts {
    pub fn total(&self) -> usize {
        self.decoy_check_1 + self.decoy_check_2
    }
}

/// Pearson χ² test of observed counts against the uniform distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformityTest {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

impl UniformityTest {
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::InvalidArgument(
                "need at least two categories".into(),
            ));
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::InvalidArgument("no observations".into()));
        }
        let expected = total as f64 / counts.len() as f64;
        let statistic = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        let dof = counts.len() - 1;
        let dist =
            ChiSquared::new(dof as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(UniformityTest {
            statistic,
            degrees_of_freedom: dof,
            p_value: dist.sf(statistic),
        })
    }

    /// The uniform hypothesis survives at significance `alpha`.
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub scenario: Scenario,
    pub seed: u64,
    pub n: usize,
    pub noise: NoiseModel,
    pub trials: usize,
    /// Runs that finished with both parties holding the same key.
    pub agreements: usize,
    /// Runs that finished without an abort but with differing keys.
    pub key_mismatches: usize,
    pub aborts: AbortCounts,
    pub attack_successes: usize,
    /// Total decoy errors over total decoys checked.
    pub mean_decoy_error_rate: f64,
    /// Uniformity of the dibits of Bob's final keys over finished runs.
    pub key_uniformity: Option<UniformityTest>,
    #[serde(skip)]
    pub wall_clock_seconds: f64,
}

impl SummaryReport {
    pub fn from_records(
        campaign: &Campaign,
        records: &[TrialRecord],
        wall_clock_seconds: f64,
    ) -> Self {
        let mut report = SummaryReport {
            scenario: campaign.scenario,
            seed: campaign.config.seed,
            n: campaign.config.n,
            noise: campaign.config.noise,
            trials: records.len(),
            agreements: 0,
            key_mismatches: 0,
            aborts: AbortCounts::default(),
            attack_successes: 0,
            mean_decoy_error_rate: 0.0,
            key_uniformity: None,
            wall_clock_seconds,
        };
        let (mut checked, mut errors) = (0usize, 0usize);
        let mut dibit_counts = [0u64; 4];
        for r in records {
            match r.status {
                RunStatus::Agreed if r.keys_match => report.agreements += 1,
                RunStatus::Agreed => report.key_mismatches += 1,
                RunStatus::AbortedAtDecoyCheck1 => report.aborts.decoy_check_1 += 1,
                RunStatus::AbortedAtDecoyCheck2 => report.aborts.decoy_check_2 += 1,
            }
            report.attack_successes += usize::from(r.attack_success);
            checked += r.decoys_checked;
            errors += r.decoy_errors;
            if let Some(key) = &r.bob_final_key {
                for pair in key.bits().chunks(2) {
                    dibit_counts[(usize::from(pair[0]) << 1) | usize::from(pair[1])] += 1;
                }
            }
        }
        if checked > 0 {
            report.mean_decoy_error_rate = errors as f64 / checked as f64;
        }
        report.key_uniformity = UniformityTest::from_counts(&dibit_counts).ok();
        report
    }

    pub fn abort_rate(&self) -> f64 {
        self.aborts.total() as f64 / self.trials as f64
    }

    /// Human-readable two-column table.
    pub fn table(&self) -> String {
        let mut rows: Vec<(&str, String)> = vec![
            ("scenario", self.scenario.to_string()),
            ("noise", self.noise.to_string()),
            ("n", self.n.to_string()),
            ("seed", self.seed.to_string()),
            ("trials", self.trials.to_string()),
            ("agreements", self.agreements.to_string()),
            ("key mismatches", self.key_mismatches.to_string()),
            ("aborts at check 1", self.aborts.decoy_check_1.to_string()),
            ("aborts at check 2", self.aborts.decoy_check_2.to_string()),
            ("attack successes", self.attack_successes.to_string()),
            (
                "mean decoy error",
                format!("{:.4}", self.mean_decoy_error_rate),
            ),
        ];
        rows.push(match &self.key_uniformity {
            Some(u) => (
                "key χ² (p)",
                format!("{:.3} ({:.4})", u.statistic, u.p_value),
            ),
            None => ("key χ² (p)", "n/a".into()),
        });
        rows.push(("wall clock", format!("{:.3} s", self.wall_clock_seconds)));
        let width = rows
            .iter()
            .map(|(k, _)| k.chars().count())
            .max()
            .unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            let pad = width - k.chars().count();
            let _ = writeln!(out, "{k}{} : {v}", " ".repeat(pad));
        }
        out
    }
}

/// Runs trial `index` of `campaign` on stream `index` of the campaign seed.
pub fn run_trial(campaign: &Campaign, index: usize) -> Result<TrialRecord> {
    let config = &campaign.config;
    let mut rng = rng_for(config.seed, index as u64);
    let ka = campaign
        .ka
        .clone()
        .unwrap_or_else(|| DibitString::random(config.n, &mut rng));
    let kb = campaign
        .kb
        .clone()
        .unwrap_or_else(|| DibitString::random(config.n, &mut rng));
    match campaign.scenario {
        Scenario::Honest => {
            let outcome = Session::with_rng(config.clone(), ka, kb, rng)?.run_honest()?;
            Ok(TrialRecord::from_outcome(index, outcome, None))
        }
        Scenario::Eve => {
            let outcome = Session::with_rng(config.clone(), ka, kb, rng)?
                .with_eavesdropper(Eavesdropper::both_transmissions())
                .run_honest()?;
            Ok(TrialRecord::from_outcome(index, outcome, None))
        }
        Scenario::PermAttackOriginal => {
            let session = Session::with_rng(config.clone(), ka, kb, rng)?;
            let run = match &campaign.goal {
                Some(goal) => attack_run_with(session, |_, _| goal.clone())?,
                None => attack_run_with(session, random_reorder_goal)?,
            };
            Ok(TrialRecord::from_outcome(
                index,
                run.outcome.clone(),
                Some(&run),
            ))
        }
        Scenario::PermAttackImproved => {
            let improved = ImprovedConfig::new(config.clone()).into_inner();
            let session = Session::with_rng(improved, ka, kb, rng)?;
            let run = match &campaign.goal {
                Some(goal) => attack_run_with(session, |_, _| goal.clone())?,
                None => displacement_run_with(session, |know, rng| {
                    random_transposition(know.m.len(), rng).expect("n ≥ 2 was validated")
                })?,
            };
            Ok(TrialRecord::from_outcome(
                index,
                run.outcome.clone(),
                Some(&run),
            ))
        }
    }
}

/// Runs every trial, returning records in trial order.
pub fn run_trials(campaign: &Campaign) -> Result<Vec<TrialRecord>> {
    campaign.validate()?;
    collect_trials(campaign)
}

#[cfg(feature = "parallel")]
fn collect_trials(campaign: &Campaign) -> Result<Vec<TrialRecord>> {
    use rayon::prelude::*;
    (0..campaign.trials)
        .into_par_iter()
        .map(|i| run_trial(campaign, i))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn collect_trials(campaign: &Campaign) -> Result<Vec<TrialRecord>> {
    run_trials_sequential(campaign)
}

/// Runs every trial on the calling thread.
pub fn run_trials_sequential(campaign: &Campaign) -> Result<Vec<TrialRecord>> {
    campaign.validate()?;
    (0..campaign.trials)
        .map(|i| run_trial(campaign, i))
        .collect()
}

/// Runs a campaign and returns its summary. Outputs are written when an
/// output path is set.
pub fn run_campaign(campaign: &Campaign) -> Result<SummaryReport> {
    let start = Instant::now();
    let records = run_trials(campaign)?;
    let report = SummaryReport::from_records(campaign, &records, start.elapsed().as_secs_f64());
    if let Some(dir) = &campaign.output_path {
        write_outputs(dir, campaign.write_transcripts, &records, &report)?;
    }
    Ok(report)
}

/// Path of the transcript file of trial `index` under `dir`.
pub fn transcript_path(dir: &Path, index: usize) -> PathBuf {
    dir.join("transcripts")
        .join(format!("trial-{index:06}.jsonl"))
}

fn write_outputs(
    dir: &Path,
    transcripts: bool,
    records: &[TrialRecord],
    report: &SummaryReport,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    if transcripts {
        fs::create_dir_all(dir.join("transcripts"))?;
        for r in records {
            fs::write(transcript_path(dir, r.index), r.transcript.to_jsonl())?;
        }
    }
    let summary = serde_json::to_string_pretty(report).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(dir.join("summary.json"), summary + "\n")?;
    Ok(())
}

/// Result of one named self-check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Check {
            name: name.into(),
            passed,
            detail,
        }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {}", self.name, self.detail)
    }
}

/// The two-dibit worked example: `K_A = 0011`, `K_B = 0110`, `M = 1110`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExampleReport {
    pub honest_key: Option<BitString>,
    pub fake_perm: Option<Permutation>,
    pub bob_derived_ka: Option<DibitString>,
    pub fake_key: Option<BitString>,
    pub checks: Vec<Check>,
}

impl ExampleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub const EXAMPLE_KA: &str = "0011";
pub const EXAMPLE_KB: &str = "0110";
pub const EXAMPLE_M: &str = "1110";
pub const EXAMPLE_HONEST_KEY: &str = "01011011";
pub const EXAMPLE_FAKE_KA: &str = "1001";
pub const EXAMPLE_FAKE_KEY: &str = "11110001";

/// Replays the worked example with `M` injected through the symbolic backend.
pub fn verify_example() -> Result<ExampleReport> {
    let ka: DibitString = EXAMPLE_KA.parse()?;
    let kb: DibitString = EXAMPLE_KB.parse()?;
    let m: DibitString = EXAMPLE_M.parse()?;
    let config = ProtocolConfig::new(2, NoiseModel::Dephasing).with_injected_m(m.clone());

    let honest = run_protocol(&config, &ka, &kb, None)?;
    let honest_key = honest
        .keys_match()
        .then(|| honest.alice_final_key.clone())
        .flatten();

    // Alice aims for her two codes in swapped order.
    let codes = ka.xor(&m)?;
    let swapped: DibitString = vec![codes[1], codes[0]].into();
    let goal = AttackGoal::KaPrime(swapped.xor(&m)?);
    let mut used = None;
    let session = Session::new(config.clone(), ka.clone(), kb.clone())?;
    let attacked = attack_run_with(session, |know, _| {
        used = Some(know.permutation.clone());
        goal
    })?;
    let fake_perm = attacked.attack.fake_perm.clone();
    let displacement = match (&used, &fake_perm) {
        (Some(truth), Some(fake)) => Some(crate::countermeasure::mismatch(fake, truth)?),
        _ => None,
    };
    let bob_ka = attacked.outcome.bob_derived_ka.clone();
    let fake_key = attacked.outcome.bob_final_key.clone();

    let show = |v: &Option<BitString>| v.as_ref().map_or("none".to_string(), |k| k.to_string());
    let checks = vec![
        Check::new(
            "honest key",
            show(&honest_key) == EXAMPLE_HONEST_KEY,
            format!("{} (expected {EXAMPLE_HONEST_KEY})", show(&honest_key)),
        ),
        Check::new(
            "fake permutation",
            displacement.as_ref().is_some_and(|d| d.mapping() == [1, 0]),
            format!(
                "announced {:?} against true {:?} (expected the two pairs swapped)",
                fake_perm.as_ref().map(|p| p.mapping().to_vec()),
                used.as_ref().map(|p| p.mapping().to_vec())
            ),
        ),
        Check::new(
            "bob-derived K_A",
            bob_ka.as_ref().map(|k| k.to_bits().to_string()).as_deref() == Some(EXAMPLE_FAKE_KA),
            format!(
                "{} (expected {EXAMPLE_FAKE_KA})",
                bob_ka
                    .as_ref()
                    .map_or("none".into(), |k| k.to_bits().to_string())
            ),
        ),
        Check::new(
            "fake key",
            show(&fake_key) == EXAMPLE_FAKE_KEY && attacked.succeeded(),
            format!("{} (expected {EXAMPLE_FAKE_KEY})", show(&fake_key)),
        ),
    ];
    Ok(ExampleReport {
        honest_key,
        fake_perm,
        bob_derived_ka: bob_ka,
        fake_key,
        checks,
    })
}

/// Worst state-vector fidelity between `U ⊗ I` applied to each logical Bell
/// state and the Bell state the XOR law predicts, over all 16 combinations.
pub fn unitary_table_worst_fidelity(model: NoiseModel) -> Result<f64> {
    let mut worst = 1.0f64;
    for b in BellCode::ALL {
        for u in UnitaryCode::ALL {
            let acted = apply_logical_unitary(u, &make_logical_bell(b, model), 0, model)?;
            let expected = make_logical_bell(unitary_action(u, b), model);
            worst = worst.min(acted.fidelity(&expected)?);
        }
    }
    Ok(worst)
}

/// Checks the exact two-pair swapping law on one 8-qubit register for every
/// pair of initial codes: every possible outcome satisfies
/// `MR₁ ⊕ MR₂ = IS₁ ⊕ IS₂` and `MR₁` is uniform. Returns the largest
/// deviation found in either property.
pub fn swap_law_worst_deviation(model: NoiseModel) -> Result<f64> {
    let mut worst = 0.0f64;
    for is1 in BellCode::ALL {
        for is2 in BellCode::ALL {
            let law = cycle_law_statevector(&[is1, is2], model)?;
            let mut marginal = [0.0f64; 4];
            let mut mass_off_constraint = 0.0;
            for (outcome, p) in &law {
                marginal[outcome[0].0.value() as usize] += p;
                if outcome[0] ^ outcome[1] != is1 ^ is2 {
                    mass_off_constraint += p;
                }
            }
            worst = worst.max(mass_off_constraint);
            for p in marginal {
                worst = worst.max((p - 0.25).abs());
            }
        }
    }
    Ok(worst)
}

/// Worst fidelity of every logical state and logical Bell state after
/// `draws` random collective-noise applications each.
pub fn dfs_worst_fidelity(model: NoiseModel, draws: usize, rng: &mut SimRng) -> Result<f64> {
    let mut states: Vec<PhysicalState> = LogicalSymbol::ALL
        .iter()
        .map(|&s| encode_logical(s, model))
        .collect();
    states.extend(BellCode::ALL.iter().map(|&b| make_logical_bell(b, model)));
    let mut worst = 1.0f64;
    for state in &states {
        for _ in 0..draws {
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            let noisy = model.apply(state, angle)?;
            worst = worst.min(noisy.fidelity(state)?);
        }
    }
    Ok(worst)
}

/// Error rate of an unencoded `|+⟩` measured in the `X` basis after a
/// uniformly random collective phase, over `draws` samples.
pub fn bare_plus_error_rate(draws: usize, rng: &mut SimRng) -> Result<f64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = [
        num_complex::Complex64::new(h, 0.0),
        num_complex::Complex64::new(h, 0.0),
    ];
    let minus = [
        num_complex::Complex64::new(h, 0.0),
        num_complex::Complex64::new(-h, 0.0),
    ];
    let x_basis = ProjectiveMeasurement::new(vec![projector(&plus), projector(&minus)])?;
    let state = PhysicalState::from_amplitudes(plus.to_vec())?;
    let mut errors = 0usize;
    for _ in 0..draws {
        let phi = rng.random_range(0.0..std::f64::consts::TAU);
        let noisy = state.apply_to_each(&gates::phase(phi))?;
        errors += noisy.measure(&x_basis, &[0], rng)?.outcome_index;
    }
    Ok(errors as f64 / draws as f64)
}

/// Exact checks of the building blocks. Each noise model gets a unitary
/// table sweep and a swapping-law check plus a noise-immunity check.
pub fn selftest(seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for model in NoiseModel::ALL {
        let f = unitary_table_worst_fidelity(model)?;
        checks.push(Check::new(
            &format!("unitary table ({model})"),
            f >= 1.0 - FIDELITY_TOLERANCE,
            format!("worst fidelity {f:.12}"),
        ));
    }
    for model in NoiseModel::ALL {
        let d = swap_law_worst_deviation(model)?;
        checks.push(Check::new(
            &format!("swapping law ({model})"),
            d <= FIDELITY_TOLERANCE,
            format!("worst deviation {d:.3e}"),
        ));
    }
    let mut rng = rng_for(seed, 0);
    for model in NoiseModel::ALL {
        let f = dfs_worst_fidelity(model, 100, &mut rng)?;
        checks.push(Check::new(
            &format!("noise immunity ({model})"),
            f >= 1.0 - FIDELITY_TOLERANCE,
            format!("worst fidelity {f:.12}"),
        ));
    }
    let rate = bare_plus_error_rate(10_000, &mut rng)?;
    checks.push(Check::new(
        "unencoded control",
        (rate - 0.5).abs() <= 0.03,
        format!("error rate {rate:.4} (expected ≈ 0.5)"),
    ));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_parsing() {
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
        }
        assert_eq!(
            "perm-attack-improved".parse::<Scenario>().unwrap(),
            Scenario::PermAttackImproved
        );
        assert!("bogus".parse::<Scenario>().is_err());
    }

    #[test]
    fn campaign_validation() {
        let config = ProtocolConfig::new(2, NoiseModel::Dephasing);
        assert!(Campaign::new(Scenario::Honest, config.clone(), 0)
            .validate()
            .is_err());
        let goal = AttackGoal::KaPrime("0000".parse().unwrap());
        assert!(Campaign::new(Scenario::Honest, config.clone(), 1)
            .with_goal(goal.clone())
            .validate()
            .is_err());
        assert!(
            Campaign::new(Scenario::PermAttackOriginal, config.clone(), 1)
                .with_goal(goal)
                .validate()
                .is_ok()
        );
        let single = ProtocolConfig::new(1, NoiseModel::Dephasing);
        assert!(Campaign::new(Scenario::PermAttackImproved, single, 1)
            .validate()
            .is_err());
        let mut c = Campaign::new(Scenario::Honest, config, 1);
        c.write_transcripts = true;
        assert!(c.validate().is_err());
    }

    #[test]
    fn uniformity_test_values() {
        let u = UniformityTest::from_counts(&[25, 25, 25, 25]).unwrap();
        assert_eq!(u.statistic, 0.0);
        assert!((u.p_value - 1.0).abs() < 1e-12);
        let skewed = UniformityTest::from_counts(&[100, 0, 0, 0]).unwrap();
        assert!((skewed.statistic - 300.0).abs() < 1e-9);
        assert!(!skewed.passes(0.01));
        assert!(UniformityTest::from_counts(&[0, 0]).is_err());
    }

    #[test]
    fn worked_example_passes() {
        let report = verify_example().unwrap();
        assert!(report.passed(), "{:?}", report.checks);
        assert_eq!(report.honest_key.unwrap().to_string(), EXAMPLE_HONEST_KEY);
        assert_eq!(report.fake_key.unwrap().to_string(), EXAMPLE_FAKE_KEY);
    }

    #[test]
    fn selftest_passes() {
        for check in selftest(crate::DEFAULT_SEED).unwrap() {
            assert!(check.passed, "{check}");
        }
    }

    #[test]
    fn summary_counts_sum_to_trials() {
        let config = ProtocolConfig::new(4, NoiseModel::Rotation).with_seed(9);
        for scenario in Scenario::ALL {
            let report = run_campaign(&Campaign::new(scenario, config.clone(), 40)).unwrap();
            assert_eq!(
                report.agreements + report.key_mismatches + report.aborts.total(),
                report.trials
            );
        }
    }

    #[test]
    fn parallel_matches_sequential() {
        let config = ProtocolConfig::new(3, NoiseModel::Dephasing).with_seed(5);
        for scenario in Scenario::ALL {
            let campaign = Campaign::new(scenario, config.clone(), 24);
            assert_eq!(
                run_trials(&campaign).unwrap(),
                run_trials_sequential(&campaign).unwrap()
            );
        }
    }

    #[test]
    fn table_lists_counts() {
        let report = run_campaign(&Campaign::new(
            Scenario::Honest,
            ProtocolConfig::new(2, NoiseModel::Dephasing),
            5,
        ))
        .unwrap();
        let table = report.table();
        assert!(table.contains("agreements"));
        assert!(table
            .lines()
            .any(|l| l.starts_with("trials") && l.ends_with(": 5")));
    }
}
