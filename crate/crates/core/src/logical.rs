//! Decoherence-free logical qubits on pairs of physical qubits.
//!
//! Each logical particle occupies two physical qubits. Against collective
//! dephasing the codewords are `|0_dp⟩ = |01⟩`, `|1_dp⟩ = |10⟩`; against
//! collective rotation they are `|0_r⟩ = (|00⟩+|11⟩)/√2` and
//! `|1_r⟩ = (|01⟩−|10⟩)/√2`. Everything outside the two-dimensional code
//! space is reported as [`Readout::CodespaceLeak`] by the measurements here.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::ops::BitXor;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::{gates, projector, Matrix, PhysicalState, ProjectiveMeasurement};
use crate::symbolic::Dibit;

/// Which collective noise the encoding protects against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NoiseModel {
    #[serde(rename = "dp")]
    Dephasing,
    #[serde(rename = "r")]
    Rotation,
}

impl NoiseModel {
    pub const ALL: [NoiseModel; 2] = [NoiseModel::Dephasing, NoiseModel::Rotation];

    pub fn tag(self) -> &'static str {
        match self {
            NoiseModel::Dephasing => "dp",
            NoiseModel::Rotation => "r",
        }
    }

    /// Applies this model's collective channel with parameter `angle`.
    pub fn apply(self, state: &PhysicalState, angle: f64) -> Result<PhysicalState> {
        match self {
            NoiseModel::Dephasing => apply_collective_dephasing(state, angle),
            NoiseModel::Rotation => apply_collective_rotation(state, angle),
        }
    }

    /// Single-qubit channel matrix for `angle`.
    pub fn channel_matrix(self, angle: f64) -> Matrix {
        match self {
            NoiseModel::Dephasing => gates::phase(angle),
            NoiseModel::Rotation => gates::rotation(angle),
        }
    }
}

impl std::str::FromStr for NoiseModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dp" => Ok(NoiseModel::Dephasing),
            "r" => Ok(NoiseModel::Rotation),
            _ => Err(Error::InvalidArgument(format!("unknown noise model '{s}'"))),
        }
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LogicalBasis {
    #[serde(rename = "Z")]
    Z,
    #[serde(rename = "X")]
    X,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LogicalSymbol {
    #[serde(rename = "0L")]
    Zero,
    #[serde(rename = "1L")]
    One,
    #[serde(rename = "+L")]
    Plus,
    #[serde(rename = "-L")]
    Minus,
}

impl LogicalSymbol {
    pub const ALL: [LogicalSymbol; 4] = [
        LogicalSymbol::Zero,
        LogicalSymbol::One,
        LogicalSymbol::Plus,
        LogicalSymbol::Minus,
    ];

    pub fn basis(self) -> LogicalBasis {
        match self {
            LogicalSymbol::Zero | LogicalSymbol::One => LogicalBasis::Z,
            LogicalSymbol::Plus | LogicalSymbol::Minus => LogicalBasis::X,
        }
    }

    /// Eigenvalue bit within its basis: `0_L`, `+_L` → false; `1_L`, `−_L` → true.
    pub fn bit(self) -> bool {
        matches!(self, LogicalSymbol::One | LogicalSymbol::Minus)
    }

    pub fn from_basis_bit(basis: LogicalBasis, bit: bool) -> Self {
        match (basis, bit) {
            (LogicalBasis::Z, false) => LogicalSymbol::Zero,
            (LogicalBasis::Z, true) => LogicalSymbol::One,
            (LogicalBasis::X, false) => LogicalSymbol::Plus,
            (LogicalBasis::X, true) => LogicalSymbol::Minus,
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::ALL[rng.random_range(0..4)]
    }
}

impl fmt::Display for LogicalSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogicalSymbol::Zero => "0L",
            LogicalSymbol::One => "1L",
            LogicalSymbol::Plus => "+L",
            LogicalSymbol::Minus => "-L",
        })
    }
}

/// Label of a logical Bell state: Φ+ = 00, Φ− = 01, Ψ+ = 10, Ψ− = 11.
///
/// The high bit marks the Ψ (bit-flipped) family, the low bit the minus sign.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct BellCode(pub Dibit);

impl BellCode {
    pub const PHI_PLUS: BellCode = BellCode(Dibit::from_low_bits(0));
    pub const PHI_MINUS: BellCode = BellCode(Dibit::from_low_bits(1));
    pub const PSI_PLUS: BellCode = BellCode(Dibit::from_low_bits(2));
    pub const PSI_MINUS: BellCode = BellCode(Dibit::from_low_bits(3));
    pub const ALL: [BellCode; 4] = [
        BellCode::PHI_PLUS,
        BellCode::PHI_MINUS,
        BellCode::PSI_PLUS,
        BellCode::PSI_MINUS,
    ];

    pub fn dibit(self) -> Dibit {
        self.0
    }

    pub fn name(self) -> &'static str {
        ["Φ+", "Φ−", "Ψ+", "Ψ−"][self.0.value() as usize]
    }
}

impl From<Dibit> for BellCode {
    fn from(d: Dibit) -> Self {
        BellCode(d)
    }
}

impl fmt::Display for BellCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Selects one of `U_00`, `U_01`, `U_10`, `U_11`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UnitaryCode(pub Dibit);

impl UnitaryCode {
    pub const U00: UnitaryCode = UnitaryCode(Dibit::from_low_bits(0));
    pub const U01: UnitaryCode = UnitaryCode(Dibit::from_low_bits(1));
    pub const U10: UnitaryCode = UnitaryCode(Dibit::from_low_bits(2));
    pub const U11: UnitaryCode = UnitaryCode(Dibit::from_low_bits(3));
    pub const ALL: [UnitaryCode; 4] = [
        UnitaryCode::U00,
        UnitaryCode::U01,
        UnitaryCode::U10,
        UnitaryCode::U11,
    ];

    pub fn dibit(self) -> Dibit {
        self.0
    }
}

impl From<Dibit> for UnitaryCode {
    fn from(d: Dibit) -> Self {
        UnitaryCode(d)
    }
}

impl BitXor for BellCode {
    type Output = BellCode;

    fn bitxor(self, rhs: BellCode) -> BellCode {
        BellCode(self.0 ^ rhs.0)
    }
}

impl BitXor<UnitaryCode> for BellCode {
    type Output = BellCode;

    fn bitxor(self, rhs: UnitaryCode) -> BellCode {
        BellCode(self.0 ^ rhs.0)
    }
}

impl BitXor for UnitaryCode {
    type Output = UnitaryCode;

    fn bitxor(self, rhs: UnitaryCode) -> UnitaryCode {
        UnitaryCode(self.0 ^ rhs.0)
    }
}

/// Result of a measurement that may find the register outside the code space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Readout<T> {
    Value(T),
    CodespaceLeak,
}

impl<T> Readout<T> {
    pub fn value(self) -> Option<T> {
        match self {
            Readout::Value(v) => Some(v),
            Readout::CodespaceLeak => None,
        }
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Physical amplitudes (4 entries) of a logical basis codeword.
fn codeword(bit: bool, model: NoiseModel) -> [Complex64; 4] {
    let h = FRAC_1_SQRT_2;
    let z = c(0.0);
    match (model, bit) {
        (NoiseModel::Dephasing, false) => [z, c(1.0), z, z],
        (NoiseModel::Dephasing, true) => [z, z, c(1.0), z],
        (NoiseModel::Rotation, false) => [c(h), z, z, c(h)],
        (NoiseModel::Rotation, true) => [z, c(h), c(-h), z],
    }
}

/// Physical amplitudes (4 entries) of a logical symbol.
pub fn logical_ket(symbol: LogicalSymbol, model: NoiseModel) -> Vec<Complex64> {
    let zero = codeword(false, model);
    let one = codeword(true, model);
    let h = FRAC_1_SQRT_2;
    match symbol {
        LogicalSymbol::Zero => zero.to_vec(),
        LogicalSymbol::One => one.to_vec(),
        LogicalSymbol::Plus => zero.iter().zip(&one).map(|(a, b)| (a + b) * h).collect(),
        LogicalSymbol::Minus => zero.iter().zip(&one).map(|(a, b)| (a - b) * h).collect(),
    }
}

/// Physical amplitudes (16 entries) of a logical Bell state.
pub fn bell_ket(code: BellCode, model: NoiseModel) -> Vec<Complex64> {
    let flip = code.0.high();
    let sign = if code.0.low() { -1.0 } else { 1.0 };
    let first_term = kron(&codeword(false, model), &codeword(flip, model));
    let second_term = kron(&codeword(true, model), &codeword(!flip, model));
    first_term
        .iter()
        .zip(&second_term)
        .map(|(a, b)| (a + b * sign) * FRAC_1_SQRT_2)
        .collect()
}

fn kron(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

pub fn encode_logical(symbol: LogicalSymbol, model: NoiseModel) -> PhysicalState {
    PhysicalState::from_amplitudes(logical_ket(symbol, model)).expect("codewords are normalized")
}

/// Four physical qubits: 0–1 hold the first logical particle, 2–3 the second.
pub fn make_logical_bell(code: BellCode, model: NoiseModel) -> PhysicalState {
    PhysicalState::from_amplitudes(bell_ket(code, model)).expect("Bell kets are normalized")
}

/// `diag(1, e^{iφ})` on every physical qubit.
pub fn apply_collective_dephasing(state: &PhysicalState, phi: f64) -> Result<PhysicalState> {
    state.apply_to_each(&gates::phase(phi))
}

/// The same planar rotation by `θ` on every physical qubit.
pub fn apply_collective_rotation(state: &PhysicalState, theta: f64) -> Result<PhysicalState> {
    state.apply_to_each(&gates::rotation(theta))
}

/// Projector onto the complement of the logical code space.
fn leak_projector(kets: &[Vec<Complex64>]) -> Matrix {
    let dim = kets[0].len();
    let mut p = Matrix::identity(dim, dim);
    for k in kets {
        p -= projector(k);
    }
    p
}

struct ModelTables {
    z_measure: ProjectiveMeasurement,
    x_measure: ProjectiveMeasurement,
    bell_measure: ProjectiveMeasurement,
    unitaries: [Matrix; 4],
}

fn build_tables(model: NoiseModel) -> ModelTables {
    let ket = |s| logical_ket(s, model);
    let basis_measure = |a: LogicalSymbol, b: LogicalSymbol| {
        let kets = [ket(a), ket(b)];
        ProjectiveMeasurement::new(vec![
            projector(&kets[0]),
            projector(&kets[1]),
            leak_projector(&kets),
        ])
        .expect("logical basis is complete")
    };
    let bell_kets: Vec<Vec<Complex64>> =
        BellCode::ALL.iter().map(|&b| bell_ket(b, model)).collect();
    let mut bell_projectors: Vec<Matrix> = bell_kets.iter().map(|k| projector(k)).collect();
    bell_projectors.push(leak_projector(&bell_kets));

    let zero = codeword(false, model);
    let one = codeword(true, model);
    let code_kets = [zero.to_vec(), one.to_vec()];
    let leak = leak_projector(&code_kets);
    let outer =
        |a: &[Complex64], b: &[Complex64]| Matrix::from_fn(4, 4, |r, col| a[r] * b[col].conj());
    // Logical Paulis act on the code space and as identity on its complement.
    let z_l = projector(&zero) - projector(&one) + &leak;
    let x_l = outer(&zero, &one) + outer(&one, &zero) + &leak;
    let unitaries = [
        Matrix::identity(4, 4),
        z_l.clone(),
        x_l.clone(),
        &x_l * &z_l,
    ];

    ModelTables {
        z_measure: basis_measure(LogicalSymbol::Zero, LogicalSymbol::One),
        x_measure: basis_measure(LogicalSymbol::Plus, LogicalSymbol::Minus),
        bell_measure: ProjectiveMeasurement::new(bell_projectors)
            .expect("logical Bell basis is complete"),
        unitaries,
    }
}

fn tables(model: NoiseModel) -> &'static ModelTables {
    static DEPHASING: OnceLock<ModelTables> = OnceLock::new();
    static ROTATION: OnceLock<ModelTables> = OnceLock::new();
    match model {
        NoiseModel::Dephasing => DEPHASING.get_or_init(|| build_tables(model)),
        NoiseModel::Rotation => ROTATION.get_or_init(|| build_tables(model)),
    }
}

/// 4×4 physical realization of `U_code` on one logical particle: `X_L^x · Z_L^z`.
pub fn logical_unitary_matrix(code: UnitaryCode, model: NoiseModel) -> Matrix {
    tables(model).unitaries[code.0.value() as usize].clone()
}

fn check_register(state: &PhysicalState, expected: usize, what: &str) -> Result<()> {
    if state.num_qubits() != expected {
        return Err(Error::InvalidArgument(format!(
            "{what} expects {expected} physical qubits, got {}",
            state.num_qubits()
        )));
    }
    Ok(())
}

/// Measures a lone logical particle (2 physical qubits) in `basis`.
pub fn measure_logical<R: Rng + ?Sized>(
    state: &PhysicalState,
    basis: LogicalBasis,
    model: NoiseModel,
    rng: &mut R,
) -> Result<(Readout<LogicalSymbol>, PhysicalState)> {
    check_register(state, 2, "logical measurement")?;
    measure_logical_at(state, [0, 1], basis, model, rng)
}

/// Measures the logical particle stored on physical `qubits` of a larger register.
pub fn measure_logical_at<R: Rng + ?Sized>(
    state: &PhysicalState,
    qubits: [usize; 2],
    basis: LogicalBasis,
    model: NoiseModel,
    rng: &mut R,
) -> Result<(Readout<LogicalSymbol>, PhysicalState)> {
    let t = tables(model);
    let measurement = match basis {
        LogicalBasis::Z => &t.z_measure,
        LogicalBasis::X => &t.x_measure,
    };
    let record = state.measure(measurement, &qubits, rng)?;
    let readout = match record.outcome_index {
        0 => Readout::Value(LogicalSymbol::from_basis_bit(basis, false)),
        1 => Readout::Value(LogicalSymbol::from_basis_bit(basis, true)),
        _ => Readout::CodespaceLeak,
    };
    Ok((readout, record.post_state))
}

/// Logical Bell measurement of a 4-qubit register holding two logical particles.
pub fn measure_logical_bell<R: Rng + ?Sized>(
    state: &PhysicalState,
    model: NoiseModel,
    rng: &mut R,
) -> Result<(Readout<BellCode>, PhysicalState)> {
    check_register(state, 4, "logical Bell measurement")?;
    measure_logical_bell_at(state, [0, 1, 2, 3], model, rng)
}

/// Logical Bell measurement on physical `qubits` (first particle, then second).
pub fn measure_logical_bell_at<R: Rng + ?Sized>(
    state: &PhysicalState,
    qubits: [usize; 4],
    model: NoiseModel,
    rng: &mut R,
) -> Result<(Readout<BellCode>, PhysicalState)> {
    let record = state.measure(&tables(model).bell_measure, &qubits, rng)?;
    let readout = match record.outcome_index {
        i @ 0..=3 => Readout::Value(BellCode::ALL[i]),
        _ => Readout::CodespaceLeak,
    };
    Ok((readout, record.post_state))
}

/// Born probabilities of the five logical Bell outcomes (four codes, then leak).
pub fn logical_bell_probabilities(
    state: &PhysicalState,
    qubits: [usize; 4],
    model: NoiseModel,
) -> Result<Vec<f64>> {
    state.probabilities(&tables(model).bell_measure, &qubits)
}

/// Probability that a logical Bell measurement on `qubits` yields `code`,
/// with the post-measurement state when that outcome is possible.
pub fn collapse_logical_bell(
    state: &PhysicalState,
    qubits: [usize; 4],
    code: BellCode,
    model: NoiseModel,
) -> Result<(f64, Option<PhysicalState>)> {
    state.collapse(
        &tables(model).bell_measure,
        &qubits,
        code.0.value() as usize,
    )
}

/// Applies `U_code` to logical particle `target` (physical qubits `2·target`, `2·target+1`).
pub fn apply_logical_unitary(
    code: UnitaryCode,
    state: &PhysicalState,
    target: usize,
    model: NoiseModel,
) -> Result<PhysicalState> {
    if 2 * target + 1 >= state.num_qubits() {
        return Err(Error::InvalidArgument(format!(
            "logical particle {target} not present in a {}-qubit register",
            state.num_qubits()
        )));
    }
    state.apply_unitary(
        &logical_unitary_matrix(code, model),
        &[2 * target, 2 * target + 1],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn amp(state: &PhysicalState, idx: usize) -> Complex64 {
        state.amplitudes()[idx]
    }

    #[test]
    fn dephasing_codewords() {
        let zero = encode_logical(LogicalSymbol::Zero, NoiseModel::Dephasing);
        assert_eq!(zero, PhysicalState::prepare(2, 0b01).unwrap());
        let plus = encode_logical(LogicalSymbol::Plus, NoiseModel::Dephasing);
        assert!((amp(&plus, 0b01).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((amp(&plus, 0b10).re - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn rotation_one_is_singlet() {
        let one = encode_logical(LogicalSymbol::One, NoiseModel::Rotation);
        assert!((amp(&one, 0b01).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((amp(&one, 0b10).re + FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(amp(&one, 0b00), c(0.0));
    }

    #[test]
    fn dephasing_bell_states_match_expansion() {
        let phi = make_logical_bell(BellCode::PHI_PLUS, NoiseModel::Dephasing);
        assert!((amp(&phi, 0b0101).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((amp(&phi, 0b1010).re - FRAC_1_SQRT_2).abs() < 1e-15);
        let psi = make_logical_bell(BellCode::PSI_MINUS, NoiseModel::Dephasing);
        assert!((amp(&psi, 0b0110).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((amp(&psi, 0b1001).re + FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn bell_states_are_orthonormal() {
        for model in NoiseModel::ALL {
            for x in BellCode::ALL {
                for y in BellCode::ALL {
                    let ip = make_logical_bell(x, model)
                        .inner(&make_logical_bell(y, model))
                        .unwrap();
                    let expected = if x == y { 1.0 } else { 0.0 };
                    assert!((ip.norm() - expected).abs() < 1e-12, "{model} {x} {y}");
                }
            }
        }
    }

    #[test]
    fn zero_noise_is_identity() {
        let s = make_logical_bell(BellCode::PSI_PLUS, NoiseModel::Dephasing);
        assert_eq!(apply_collective_dephasing(&s, 0.0).unwrap(), s);
        let s = make_logical_bell(BellCode::PSI_PLUS, NoiseModel::Rotation);
        assert!(apply_collective_rotation(&s, 0.0)
            .unwrap()
            .amplitudes()
            .iter()
            .zip(s.amplitudes())
            .all(|(a, b)| (a - b).norm() < 1e-15));
    }

    #[test]
    fn dephasing_multiplies_codeword_by_phase() {
        let zero = encode_logical(LogicalSymbol::Zero, NoiseModel::Dephasing);
        let phi = 0.83;
        let out = apply_collective_dephasing(&zero, phi).unwrap();
        assert!((amp(&out, 0b01) - Complex64::from_polar(1.0, phi)).norm() < 1e-12);
        assert!(out.equal_up_to_phase(&zero));
    }

    #[test]
    fn singlet_survives_any_rotation() {
        let singlet = encode_logical(LogicalSymbol::One, NoiseModel::Rotation);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let theta = rng.random_range(0.0..TAU);
            let out = apply_collective_rotation(&singlet, theta).unwrap();
            assert!(out.fidelity(&singlet).unwrap() >= 1.0 - 1e-10);
        }
    }

    #[test]
    fn logical_measurements_on_eigenstates() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for model in NoiseModel::ALL {
            for symbol in LogicalSymbol::ALL {
                let s = encode_logical(symbol, model);
                let (r, _) = measure_logical(&s, symbol.basis(), model, &mut rng).unwrap();
                assert_eq!(r, Readout::Value(symbol));
            }
        }
    }

    #[test]
    fn plus_in_z_basis_is_fair() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let plus = encode_logical(LogicalSymbol::Plus, NoiseModel::Rotation);
        let zeros = (0..10_000)
            .filter(|_| {
                measure_logical(&plus, LogicalBasis::Z, NoiseModel::Rotation, &mut rng)
                    .unwrap()
                    .0
                    == Readout::Value(LogicalSymbol::Zero)
            })
            .count();
        assert!((zeros as f64 / 1e4 - 0.5).abs() < 0.02);
    }

    #[test]
    fn leak_reported_outside_codespace() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        // |00⟩ is orthogonal to both dephasing codewords.
        let outside = PhysicalState::prepare(2, 0).unwrap();
        let (r, _) =
            measure_logical(&outside, LogicalBasis::Z, NoiseModel::Dephasing, &mut rng).unwrap();
        assert_eq!(r, Readout::CodespaceLeak);
        let outside = PhysicalState::prepare(4, 0).unwrap();
        let (r, _) = measure_logical_bell(&outside, NoiseModel::Dephasing, &mut rng).unwrap();
        assert_eq!(r, Readout::CodespaceLeak);
    }

    #[test]
    fn register_size_checked() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let four = make_logical_bell(BellCode::PHI_PLUS, NoiseModel::Dephasing);
        assert!(matches!(
            measure_logical(&four, LogicalBasis::Z, NoiseModel::Dephasing, &mut rng),
            Err(Error::InvalidArgument(_))
        ));
        let two = encode_logical(LogicalSymbol::Zero, NoiseModel::Dephasing);
        assert!(measure_logical_bell(&two, NoiseModel::Dephasing, &mut rng).is_err());
        assert!(apply_logical_unitary(UnitaryCode::U01, &two, 1, NoiseModel::Dephasing).is_err());
    }

    #[test]
    fn product_of_zeros_splits_between_phi_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let m = NoiseModel::Dephasing;
        let zz = encode_logical(LogicalSymbol::Zero, m)
            .tensor(&encode_logical(LogicalSymbol::Zero, m))
            .unwrap();
        let mut counts = [0usize; 5];
        for _ in 0..10_000 {
            match measure_logical_bell(&zz, m, &mut rng).unwrap().0 {
                Readout::Value(b) => counts[b.0.value() as usize] += 1,
                Readout::CodespaceLeak => counts[4] += 1,
            }
        }
        assert!((counts[0] as f64 / 1e4 - 0.5).abs() < 0.02);
        assert!((counts[1] as f64 / 1e4 - 0.5).abs() < 0.02);
        assert_eq!(counts[2] + counts[3] + counts[4], 0);
    }

    #[test]
    fn table_one_spot_checks() {
        for model in NoiseModel::ALL {
            let cases = [
                (UnitaryCode::U10, BellCode::PHI_PLUS, BellCode::PSI_PLUS),
                (UnitaryCode::U11, BellCode::PSI_MINUS, BellCode::PHI_PLUS),
                (UnitaryCode::U01, BellCode::PSI_PLUS, BellCode::PSI_MINUS),
            ];
            for (u, from, to) in cases {
                let out =
                    apply_logical_unitary(u, &make_logical_bell(from, model), 0, model).unwrap();
                assert!(out.equal_up_to_phase(&make_logical_bell(to, model)));
            }
            for b in BellCode::ALL {
                let s = make_logical_bell(b, model);
                assert!(apply_logical_unitary(UnitaryCode::U00, &s, 0, model)
                    .unwrap()
                    .equal_up_to_phase(&s));
            }
        }
    }

    #[test]
    fn logical_unitaries_are_unitary() {
        for model in NoiseModel::ALL {
            for u in UnitaryCode::ALL {
                assert!(crate::statevector::is_unitary(&logical_unitary_matrix(
                    u, model
                )));
            }
        }
    }
}
