//! Particle-level quantum backends.
//!
//! The protocol only ever prepares logical Bell pairs and single logical
//! particles, applies logical Paulis, runs collective noise over a batch,
//! and measures in the logical Z/X or Bell bases. Both backends expose
//! exactly those operations over opaque [`ParticleId`] handles.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logical::{
    self, bell_ket, logical_ket, BellCode, LogicalBasis, LogicalSymbol, NoiseModel, Readout,
    UnitaryCode,
};
use crate::statevector::PhysicalState;
use crate::symbolic::Dibit;
use crate::SimRng;

pub type ParticleId = usize;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    #[default]
    Symbolic,
    StateVector,
}

impl std::str::FromStr for BackendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symbolic" => Ok(BackendKind::Symbolic),
            "statevector" | "state_vector" | "state-vector" => Ok(BackendKind::StateVector),
            _ => Err(Error::InvalidArgument(format!("unknown backend '{s}'"))),
        }
    }
}

pub trait QuantumBackend: Send {
    fn model(&self) -> NoiseModel;

    /// Prepares a logical Bell pair; returns `(first, second)`.
    fn bell_pair(&mut self, code: BellCode) -> Result<(ParticleId, ParticleId)>;

    fn single(&mut self, symbol: LogicalSymbol) -> Result<ParticleId>;

    fn apply_unitary(&mut self, particle: ParticleId, code: UnitaryCode) -> Result<()>;

    /// One collective-noise draw applied to every listed particle.
    fn apply_noise(&mut self, particles: &[ParticleId], angle: f64) -> Result<()>;

    /// Measures one logical particle. The particle stays alive in the collapsed state.
    fn measure_single(
        &mut self,
        particle: ParticleId,
        basis: LogicalBasis,
        rng: &mut SimRng,
    ) -> Result<Readout<LogicalSymbol>>;

    /// Logical Bell measurement of `(first, second)`; both particles are consumed.
    fn measure_bell(
        &mut self,
        first: ParticleId,
        second: ParticleId,
        rng: &mut SimRng,
    ) -> Result<BellCode>;

    fn discard(&mut self, particle: ParticleId) -> Result<()>;
}

pub fn new_backend(kind: BackendKind, model: NoiseModel) -> Box<dyn QuantumBackend> {
    match kind {
        BackendKind::Symbolic => Box::new(SymbolicBackend::new(model)),
        BackendKind::StateVector => Box::new(StateVectorBackend::new(model)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Node {
    Paired { partner: ParticleId, code: BellCode },
    Single(LogicalSymbol),
    Consumed,
}

/// Exact classical tracking of Bell pairs and single Pauli eigenstates.
///
/// Every state the protocol can produce is a product of logical Bell pairs
/// and logical Z/X eigenstates, and that family is closed under the
/// protocol's operations, so outcome laws reduce to XOR rules on codes.
#[derive(Clone, Debug)]
pub struct SymbolicBackend {
    model: NoiseModel,
    nodes: Vec<Node>,
    script: VecDeque<BellCode>,
}

impl SymbolicBackend {
    pub fn new(model: NoiseModel) -> Self {
        SymbolicBackend {
            model,
            nodes: Vec::new(),
            script: VecDeque::new(),
        }
    }

    /// Scripts the outcomes of swaps between two intact pairs, in order.
    /// Once the script is exhausted outcomes are sampled again.
    pub fn with_script(model: NoiseModel, outcomes: impl IntoIterator<Item = BellCode>) -> Self {
        SymbolicBackend {
            model,
            nodes: Vec::new(),
            script: outcomes.into_iter().collect(),
        }
    }

    fn push(&mut self, node: Node) -> ParticleId {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    fn node(&self, p: ParticleId) -> Result<Node> {
        match self.nodes.get(p) {
            None | Some(Node::Consumed) => Err(Error::InvalidArgument(format!(
                "particle {p} does not exist or was consumed"
            ))),
            Some(n) => Ok(*n),
        }
    }

    /// Bell code of the pair `p` belongs to, if it is still paired.
    pub fn pair_code(&self, p: ParticleId) -> Option<BellCode> {
        match self.nodes.get(p) {
            Some(Node::Paired { code, .. }) => Some(*code),
            _ => None,
        }
    }

    fn uniform_code(rng: &mut SimRng) -> BellCode {
        BellCode::from(Dibit::random(rng))
    }

    fn free_code(&mut self, rng: &mut SimRng) -> BellCode {
        self.script
            .pop_front()
            .unwrap_or_else(|| Self::uniform_code(rng))
    }
}

/// Eigenvalue bit correlation carried by a Bell code in `basis`:
/// `ZZ = (−1)^x`, `XX = (−1)^z` for code `(x, z)`.
fn correlation(code: BellCode, basis: LogicalBasis) -> bool {
    match basis {
        LogicalBasis::Z => code.0.high(),
        LogicalBasis::X => code.0.low(),
    }
}

impl QuantumBackend for SymbolicBackend {
    fn model(&self) -> NoiseModel {
        self.model
    }

    fn bell_pair(&mut self, code: BellCode) -> Result<(ParticleId, ParticleId)> {
        let a = self.nodes.len();
        let b = a + 1;
        self.push(Node::Paired { partner: b, code });
        self.push(Node::Paired { partner: a, code });
        Ok((a, b))
    }

    fn single(&mut self, symbol: LogicalSymbol) -> Result<ParticleId> {
        Ok(self.push(Node::Single(symbol)))
    }

    fn apply_unitary(&mut self, p: ParticleId, u: UnitaryCode) -> Result<()> {
        match self.node(p)? {
            Node::Paired { partner, code } => {
                let code = code ^ u;
                self.nodes[p] = Node::Paired { partner, code };
                self.nodes[partner] = Node::Paired { partner: p, code };
            }
            Node::Single(s) => {
                // X_L flips Z eigenstates, Z_L flips X eigenstates.
                let flips = correlation(BellCode(u.0), s.basis());
                self.nodes[p] =
                    Node::Single(LogicalSymbol::from_basis_bit(s.basis(), s.bit() ^ flips));
            }
            Node::Consumed => unreachable!(),
        }
        Ok(())
    }

    fn apply_noise(&mut self, particles: &[ParticleId], _angle: f64) -> Result<()> {
        // Codewords are invariant under their collective channel.
        for &p in particles {
            self.node(p)?;
        }
        Ok(())
    }

    fn measure_single(
        &mut self,
        p: ParticleId,
        basis: LogicalBasis,
        rng: &mut SimRng,
    ) -> Result<Readout<LogicalSymbol>> {
        let outcome = match self.node(p)? {
            Node::Single(s) if s.basis() == basis => s,
            Node::Single(_) => LogicalSymbol::from_basis_bit(basis, rng.random()),
            Node::Paired { partner, code } => {
                let bit: bool = rng.random();
                let partner_bit = bit ^ correlation(code, basis);
                self.nodes[partner] =
                    Node::Single(LogicalSymbol::from_basis_bit(basis, partner_bit));
                LogicalSymbol::from_basis_bit(basis, bit)
            }
            Node::Consumed => unreachable!(),
        };
        self.nodes[p] = Node::Single(outcome);
        Ok(Readout::Value(outcome))
    }

    fn measure_bell(&mut self, p: ParticleId, q: ParticleId, rng: &mut SimRng) -> Result<BellCode> {
        if p == q {
            return Err(Error::InvalidArgument(
                "Bell measurement needs two particles".into(),
            ));
        }
        let outcome = match (self.node(p)?, self.node(q)?) {
            (Node::Paired { partner, code }, _) if partner == q => code,
            (
                Node::Paired {
                    partner: p2,
                    code: cp,
                },
                Node::Paired {
                    partner: q2,
                    code: cq,
                },
            ) => {
                // Entanglement swapping: the outer partners become a pair.
                let r = self.free_code(rng);
                let joined = r ^ cp ^ cq;
                self.nodes[p2] = Node::Paired {
                    partner: q2,
                    code: joined,
                };
                self.nodes[q2] = Node::Paired {
                    partner: p2,
                    code: joined,
                };
                r
            }
            (Node::Single(s), Node::Paired { partner, code })
            | (Node::Paired { partner, code }, Node::Single(s)) => {
                // Teleportation of an eigenstate onto the far partner.
                let r = Self::uniform_code(rng);
                let shift = correlation(r ^ code, s.basis());
                self.nodes[partner] =
                    Node::Single(LogicalSymbol::from_basis_bit(s.basis(), s.bit() ^ shift));
                r
            }
            (Node::Single(s), Node::Single(t)) => {
                let mut r = Self::uniform_code(rng);
                if s.basis() == t.basis() {
                    let fixed = s.bit() ^ t.bit();
                    let (x, z) = match s.basis() {
                        LogicalBasis::Z => (fixed, r.0.low()),
                        LogicalBasis::X => (r.0.high(), fixed),
                    };
                    r = BellCode(Dibit::from_low_bits((u8::from(x) << 1) | u8::from(z)));
                }
                r
            }
            _ => unreachable!(),
        };
        self.nodes[p] = Node::Consumed;
        self.nodes[q] = Node::Consumed;
        Ok(outcome)
    }

    fn discard(&mut self, p: ParticleId) -> Result<()> {
        if let Node::Paired { partner, code } = self.node(p)? {
            // Tracing out one half leaves the partner maximally mixed; the
            // protocol never discards live pair halves, so reject it.
            let _ = (partner, code);
            return Err(Error::InvalidArgument(format!(
                "particle {p} is still entangled and cannot be discarded"
            )));
        }
        self.nodes[p] = Node::Consumed;
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct Register {
    state: PhysicalState,
    /// Particle held at each logical slot; slot `k` is physical qubits `2k, 2k+1`.
    slots: Vec<ParticleId>,
}

/// Dense simulation with one register per group of entangled particles.
///
/// Registers merge on demand when a Bell measurement spans two of them and
/// measured particles are contracted out, so entangled groups stay small.
#[derive(Clone, Debug)]
pub struct StateVectorBackend {
    model: NoiseModel,
    registers: Vec<Option<Register>>,
    /// `(register, slot)` per particle; `None` once consumed.
    location: Vec<Option<(usize, usize)>>,
}

impl StateVectorBackend {
    pub fn new(model: NoiseModel) -> Self {
        StateVectorBackend {
            model,
            registers: Vec::new(),
            location: Vec::new(),
        }
    }

    fn add_register(&mut self, state: PhysicalState, particles: &[ParticleId]) {
        let reg = self.registers.len();
        for (slot, &p) in particles.iter().enumerate() {
            self.location[p] = Some((reg, slot));
        }
        self.registers.push(Some(Register {
            state,
            slots: particles.to_vec(),
        }));
    }

    fn new_particles(&mut self, count: usize) -> Vec<ParticleId> {
        let start = self.location.len();
        self.location.extend(std::iter::repeat_n(None, count));
        (start..start + count).collect()
    }

    fn locate(&self, p: ParticleId) -> Result<(usize, usize)> {
        self.location.get(p).copied().flatten().ok_or_else(|| {
            Error::InvalidArgument(format!("particle {p} does not exist or was consumed"))
        })
    }

    fn register(&self, idx: usize) -> &Register {
        self.registers[idx]
            .as_ref()
            .expect("live particles point at live registers")
    }

    /// Tensors register `b` onto register `a`; returns the merged index.
    fn merge(&mut self, a: usize, b: usize) -> Result<usize> {
        let rb = self.registers[b].take().expect("live register");
        let ra = self.registers[a].as_mut().expect("live register");
        let offset = ra.slots.len();
        ra.state = ra.state.tensor(&rb.state)?;
        for (k, &p) in rb.slots.iter().enumerate() {
            ra.slots.push(p);
            self.location[p] = Some((a, offset + k));
        }
        Ok(a)
    }

    /// Removes the given slots, which must sit in the product factor `ket`.
    fn remove_slots(
        &mut self,
        reg: usize,
        slots: &[usize],
        ket: &[num_complex::Complex64],
    ) -> Result<()> {
        let r = self.registers[reg].as_mut().expect("live register");
        for &s in slots {
            self.location[r.slots[s]] = None;
        }
        if slots.len() == r.slots.len() {
            self.registers[reg] = None;
            return Ok(());
        }
        let qubits: Vec<usize> = slots.iter().flat_map(|&s| [2 * s, 2 * s + 1]).collect();
        r.state = r.state.contract(&qubits, ket)?;
        let kept: Vec<ParticleId> = r
            .slots
            .iter()
            .enumerate()
            .filter(|(k, _)| !slots.contains(k))
            .map(|(_, &p)| p)
            .collect();
        for (k, &p) in kept.iter().enumerate() {
            self.location[p] = Some((reg, k));
        }
        r.slots = kept;
        Ok(())
    }

    /// Physical state of the register holding `p` and the particle order within it.
    pub fn register_of(&self, p: ParticleId) -> Result<(PhysicalState, Vec<ParticleId>)> {
        let (reg, _) = self.locate(p)?;
        let r = self.register(reg);
        Ok((r.state.clone(), r.slots.clone()))
    }
}

impl QuantumBackend for StateVectorBackend {
    fn model(&self) -> NoiseModel {
        self.model
    }

    fn bell_pair(&mut self, code: BellCode) -> Result<(ParticleId, ParticleId)> {
        let ids = self.new_particles(2);
        self.add_register(logical::make_logical_bell(code, self.model), &ids);
        Ok((ids[0], ids[1]))
    }

    fn single(&mut self, symbol: LogicalSymbol) -> Result<ParticleId> {
        let ids = self.new_particles(1);
        self.add_register(logical::encode_logical(symbol, self.model), &ids);
        Ok(ids[0])
    }

    fn apply_unitary(&mut self, p: ParticleId, code: UnitaryCode) -> Result<()> {
        let (reg, slot) = self.locate(p)?;
        let model = self.model;
        let r = self.registers[reg].as_mut().expect("live register");
        r.state = logical::apply_logical_unitary(code, &r.state, slot, model)?;
        Ok(())
    }

    fn apply_noise(&mut self, particles: &[ParticleId], angle: f64) -> Result<()> {
        let channel = self.model.channel_matrix(angle);
        for &p in particles {
            let (reg, slot) = self.locate(p)?;
            let r = self.registers[reg].as_mut().expect("live register");
            for q in [2 * slot, 2 * slot + 1] {
                r.state = r.state.apply_unitary(&channel, &[q])?;
            }
        }
        Ok(())
    }

    fn measure_single(
        &mut self,
        p: ParticleId,
        basis: LogicalBasis,
        rng: &mut SimRng,
    ) -> Result<Readout<LogicalSymbol>> {
        let (reg, slot) = self.locate(p)?;
        let model = self.model;
        let r = self.registers[reg].as_mut().expect("live register");
        let (readout, post) =
            logical::measure_logical_at(&r.state, [2 * slot, 2 * slot + 1], basis, model, rng)?;
        r.state = post;
        if let Readout::Value(symbol) = readout {
            if self.register(reg).slots.len() > 1 {
                // Split the collapsed particle into its own register.
                self.remove_slots(reg, &[slot], &logical_ket(symbol, model))?;
                self.add_register(logical::encode_logical(symbol, model), &[p]);
            }
        }
        Ok(readout)
    }

    fn measure_bell(&mut self, p: ParticleId, q: ParticleId, rng: &mut SimRng) -> Result<BellCode> {
        if p == q {
            return Err(Error::InvalidArgument(
                "Bell measurement needs two particles".into(),
            ));
        }
        let (mut reg_p, _) = self.locate(p)?;
        let (reg_q, _) = self.locate(q)?;
        if reg_p != reg_q {
            reg_p = self.merge(reg_p, reg_q)?;
        }
        let (_, sp) = self.locate(p)?;
        let (_, sq) = self.locate(q)?;
        let model = self.model;
        let r = self.registers[reg_p].as_mut().expect("live register");
        let qubits = [2 * sp, 2 * sp + 1, 2 * sq, 2 * sq + 1];
        let (readout, post) = logical::measure_logical_bell_at(&r.state, qubits, model, rng)?;
        r.state = post;
        let code = readout
            .value()
            .ok_or(Error::CodespaceLeak("logical Bell measurement"))?;
        // Contract with the kets ordered by slot index.
        let ket = if sp < sq {
            bell_ket(code, model)
        } else {
            swap_halves(&bell_ket(code, model))
        };
        let mut slots = [sp, sq];
        slots.sort_unstable();
        self.remove_slots(reg_p, &slots, &ket)?;
        Ok(code)
    }

    fn discard(&mut self, p: ParticleId) -> Result<()> {
        let (reg, _) = self.locate(p)?;
        if self.register(reg).slots.len() > 1 {
            return Err(Error::InvalidArgument(format!(
                "particle {p} shares a register and cannot be discarded"
            )));
        }
        self.registers[reg] = None;
        self.location[p] = None;
        Ok(())
    }
}

/// Reorders a 16-amplitude two-particle ket so the second particle comes first.
fn swap_halves(ket: &[num_complex::Complex64]) -> Vec<num_complex::Complex64> {
    (0..16).map(|i| ket[((i & 3) << 2) | (i >> 2)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng_for;

    fn backends(model: NoiseModel) -> Vec<Box<dyn QuantumBackend>> {
        vec![
            new_backend(BackendKind::Symbolic, model),
            new_backend(BackendKind::StateVector, model),
        ]
    }

    #[test]
    fn intact_pair_reads_its_code() {
        let mut rng = rng_for(1, 0);
        for model in NoiseModel::ALL {
            for mut b in backends(model) {
                for code in BellCode::ALL {
                    let (x, y) = b.bell_pair(BellCode::PHI_PLUS).unwrap();
                    b.apply_unitary(x, UnitaryCode(code.0)).unwrap();
                    assert_eq!(b.measure_bell(x, y, &mut rng).unwrap(), code);
                }
            }
        }
    }

    #[test]
    fn reversed_order_reads_same_code() {
        let mut rng = rng_for(2, 0);
        for mut b in backends(NoiseModel::Rotation) {
            for code in BellCode::ALL {
                let (x, y) = b.bell_pair(code).unwrap();
                assert_eq!(b.measure_bell(y, x, &mut rng).unwrap(), code);
            }
        }
    }

    #[test]
    fn swapping_obeys_xor_rule() {
        let mut rng = rng_for(3, 0);
        for model in NoiseModel::ALL {
            for mut b in backends(model) {
                for _ in 0..50 {
                    let c1 = BellCode::from(Dibit::random(&mut rng));
                    let c2 = BellCode::from(Dibit::random(&mut rng));
                    let (a1, b1) = b.bell_pair(c1).unwrap();
                    let (a2, b2) = b.bell_pair(c2).unwrap();
                    let mr1 = b.measure_bell(a1, a2, &mut rng).unwrap();
                    let mr2 = b.measure_bell(b1, b2, &mut rng).unwrap();
                    assert_eq!(mr1 ^ mr2, c1 ^ c2);
                }
            }
        }
    }

    #[test]
    fn noise_leaves_logical_content_alone() {
        let mut rng = rng_for(4, 0);
        for model in NoiseModel::ALL {
            let mut b = StateVectorBackend::new(model);
            let (x, y) = b.bell_pair(BellCode::PSI_MINUS).unwrap();
            let d = b.single(LogicalSymbol::Minus).unwrap();
            b.apply_noise(&[y, d], 1.234).unwrap();
            assert_eq!(b.measure_bell(x, y, &mut rng).unwrap(), BellCode::PSI_MINUS);
            assert_eq!(
                b.measure_single(d, LogicalBasis::X, &mut rng).unwrap(),
                Readout::Value(LogicalSymbol::Minus)
            );
        }
    }

    #[test]
    fn measuring_half_collapses_partner() {
        let mut rng = rng_for(5, 0);
        for model in NoiseModel::ALL {
            for mut b in backends(model) {
                for code in BellCode::ALL {
                    for basis in [LogicalBasis::Z, LogicalBasis::X] {
                        let (x, y) = b.bell_pair(code).unwrap();
                        let rx = b
                            .measure_single(x, basis, &mut rng)
                            .unwrap()
                            .value()
                            .unwrap();
                        let ry = b
                            .measure_single(y, basis, &mut rng)
                            .unwrap()
                            .value()
                            .unwrap();
                        assert_eq!(
                            rx.bit() ^ ry.bit(),
                            correlation(code, basis),
                            "{code} {basis:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn teleported_eigenstate_follows_correction() {
        let mut rng = rng_for(6, 0);
        for model in NoiseModel::ALL {
            for mut b in backends(model) {
                for symbol in LogicalSymbol::ALL {
                    for code in BellCode::ALL {
                        let s = b.single(symbol).unwrap();
                        let (x, y) = b.bell_pair(code).unwrap();
                        let r = b.measure_bell(s, x, &mut rng).unwrap();
                        let out = b
                            .measure_single(y, symbol.basis(), &mut rng)
                            .unwrap()
                            .value()
                            .unwrap();
                        let expected = symbol.bit() ^ correlation(r ^ code, symbol.basis());
                        assert_eq!(out.bit(), expected);
                    }
                }
            }
        }
    }

    #[test]
    fn consumed_particles_are_rejected() {
        let mut rng = rng_for(7, 0);
        for mut b in backends(NoiseModel::Dephasing) {
            let (x, y) = b.bell_pair(BellCode::PHI_PLUS).unwrap();
            b.measure_bell(x, y, &mut rng).unwrap();
            assert!(b.measure_bell(x, y, &mut rng).is_err());
            assert!(b.apply_unitary(x, UnitaryCode::U01).is_err());
            let (x, _) = b.bell_pair(BellCode::PHI_PLUS).unwrap();
            assert!(b.discard(x).is_err());
        }
    }

    #[test]
    fn swap_halves_reorders_particles() {
        let model = NoiseModel::Dephasing;
        let ket = crate::logical::logical_ket(LogicalSymbol::Zero, model);
        let other = crate::logical::logical_ket(LogicalSymbol::One, model);
        let ab: Vec<_> = ket
            .iter()
            .flat_map(|a| other.iter().map(move |b| a * b))
            .collect();
        let ba: Vec<_> = other
            .iter()
            .flat_map(|a| ket.iter().map(move |b| a * b))
            .collect();
        assert_eq!(swap_halves(&ab), ba);
    }
}
