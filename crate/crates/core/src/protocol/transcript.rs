//! Classical record of one protocol execution.
//!
//! Serialized as JSON lines, one event per line, each tagged with a `stage`
//! field. Bit strings are `'0'/'1'` text; dibit strings are arrays of
//! 2-character groups.

use serde::{Deserialize, Serialize};

use crate::adversary::AttackResult;
use crate::error::{Error, Result};
use crate::logical::{LogicalSymbol, NoiseModel};
use crate::protocol::Permutation;
use crate::symbolic::{BitString, DibitString};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Alice,
    Bob,
}

/// Which quantum transmission an event belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sequence {
    /// Second halves of the step-1 Bell pairs, with decoys.
    #[serde(rename = "sb")]
    SB,
    /// Encoded and permuted Bell pairs of step 4, with decoys.
    #[serde(rename = "sc")]
    SC,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PermutationScope {
    /// Whole Bell pairs are reordered.
    WholePairs,
    /// Only the first particle of each pair is reordered.
    FirstParticles,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoyRecord {
    pub position: usize,
    pub state: LogicalSymbol,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum Event {
    /// Alice sends a quantum sequence through the collective-noise channel.
    QuantumSend {
        step: u8,
        sequence: Sequence,
        length: usize,
        decoys: usize,
        noise: NoiseModel,
        noise_angle: f64,
        scope: Option<PermutationScope>,
    },
    DecoyAnnouncement {
        step: u8,
        sequence: Sequence,
        decoys: Vec<DecoyRecord>,
    },
    DecoyCheck {
        step: u8,
        sequence: Sequence,
        checked: usize,
        errors: usize,
        error_rate: f64,
        passed: bool,
    },
    /// Both parties completed their local Bell measurements.
    BellMeasurement {
        step: u8,
        pairs: usize,
    },
    /// Bob publishes `K_B ⊕ M`.
    KeyAnnouncement {
        step: u8,
        kb_xor_m: DibitString,
    },
    PermutationReveal {
        step: u8,
        scope: PermutationScope,
        permutation: Permutation,
    },
    Abort {
        step: u8,
        reason: String,
    },
    /// Private values each party ends up holding.
    Derived {
        party: Party,
        m: DibitString,
        peer_key: DibitString,
        final_key: BitString,
    },
    Attack(AttackResult),
}

impl Event {
    /// Events visible on the public channels.
    pub fn is_public(&self) -> bool {
        !matches!(self, Event::Derived { .. } | Event::Attack(_))
    }

    pub fn stage(&self) -> &'static str {
        match self {
            Event::QuantumSend { .. } => "quantum_send",
            Event::DecoyAnnouncement { .. } => "decoy_announcement",
            Event::DecoyCheck { .. } => "decoy_check",
            Event::BellMeasurement { .. } => "bell_measurement",
            Event::KeyAnnouncement { .. } => "key_announcement",
            Event::PermutationReveal { .. } => "permutation_reveal",
            Event::Abort { .. } => "abort",
            Event::Derived { .. } => "derived",
            Event::Attack(_) => "attack",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    events: Vec<Event>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, event: Event) {
        self.events.push(event);
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn public_events(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| e.is_public())
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("events serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let events = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| Error::InvalidArgument(e.to_string())))
            .collect::<Result<Vec<Event>>>()?;
        Ok(Transcript { events })
    }

    /// Index of the first event with the given stage tag.
    pub fn position_of(&self, stage: &str) -> Option<usize> {
        self.events.iter().position(|e| e.stage() == stage)
    }
}
