//! Dense pure-state simulation for small registers of physical qubits.
//!
//! Qubit 0 is the leftmost ket symbol and the most significant bit of the
//! amplitude index, so `|01⟩` is basis index 1 of a two-qubit register.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// Largest register the simulator will build.
pub const MAX_QUBITS: usize = 12;

/// Tolerance for unitarity and projector-completeness checks.
pub const MATRIX_TOLERANCE: f64 = 1e-10;

/// Two states are equal up to global phase when `|⟨a|b⟩| ≥ 1 - PHASE_TOLERANCE`.
pub const PHASE_TOLERANCE: f64 = 1e-10;

pub type Matrix = DMatrix<Complex64>;

/// Normalized amplitude vector over `num_qubits` physical qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalState {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

/// Outcome of a projective measurement.
#[derive(Clone, Debug)]
pub struct MeasurementRecord {
    pub outcome_index: usize,
    pub probability: f64,
    pub post_state: PhysicalState,
}

/// A complete set of pairwise-orthogonal projectors, validated once at
/// construction so repeated measurements skip the algebraic checks.
#[derive(Clone, Debug)]
pub struct ProjectiveMeasurement {
    num_qubits: usize,
    projectors: Vec<Matrix>,
}

impl ProjectiveMeasurement {
    pub fn new(projectors: Vec<Matrix>) -> Result<Self> {
        let first = projectors
            .first()
            .ok_or_else(|| Error::Validation("empty projector set".into()))?;
        let dim = first.nrows();
        let num_qubits = qubits_for_dim(dim)?;
        for p in &projectors {
            if p.nrows() != dim || p.ncols() != dim {
                return Err(Error::Validation(
                    "projectors must share one square dimension".into(),
                ));
            }
        }
        let mut sum = Matrix::zeros(dim, dim);
        for p in &projectors {
            sum += p;
        }
        if max_abs_diff(&sum, &Matrix::identity(dim, dim)) > MATRIX_TOLERANCE {
            return Err(Error::Validation(
                "projectors do not sum to identity".into(),
            ));
        }
        for (i, a) in projectors.iter().enumerate() {
            for b in projectors.iter().skip(i + 1) {
                if (a * b).iter().any(|z| z.norm() > MATRIX_TOLERANCE) {
                    return Err(Error::Validation(
                        "projectors are not pairwise orthogonal".into(),
                    ));
                }
            }
        }
        Ok(Self {
            num_qubits,
            projectors,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn projectors(&self) -> &[Matrix] {
        &self.projectors
    }
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "dimension {dim} is not a power of two"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Returns true when `‖U†U − I‖∞ < MATRIX_TOLERANCE`.
pub fn is_unitary(matrix: &Matrix) -> bool {
    if matrix.nrows() != matrix.ncols() {
        return false;
    }
    let product = matrix.adjoint() * matrix;
    max_abs_diff(&product, &Matrix::identity(matrix.nrows(), matrix.ncols())) < MATRIX_TOLERANCE
}

/// Outer product `|ket⟩⟨ket|`.
pub fn projector(ket: &[Complex64]) -> Matrix {
    let dim = ket.len();
    Matrix::from_fn(dim, dim, |r, c| ket[r] * ket[c].conj())
}

impl PhysicalState {
    /// Computational-basis state with amplitude 1 at `basis_index`.
    pub fn prepare(num_qubits: usize, basis_index: usize) -> Result<Self> {
        check_capacity(num_qubits)?;
        if num_qubits == 0 {
            return Err(Error::InvalidArgument(
                "register needs at least one qubit".into(),
            ));
        }
        let dim = 1usize << num_qubits;
        if basis_index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {basis_index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[basis_index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Builds a state from explicit amplitudes. The vector must already be
    /// normalized to within `MATRIX_TOLERANCE`; residual error is removed.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let num_qubits = qubits_for_dim(amplitudes.len())?;
        check_capacity(num_qubits)?;
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > MATRIX_TOLERANCE {
            return Err(Error::Validation(format!(
                "amplitudes have squared norm {norm_sqr}"
            )));
        }
        let mut state = Self {
            num_qubits,
            amplitudes,
        };
        state.renormalize();
        Ok(state)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PhysicalState) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::LengthMismatch {
                left: self.num_qubits,
                right: other.num_qubits,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`, insensitive to global phase.
    pub fn fidelity(&self, other: &PhysicalState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn equal_up_to_phase(&self, other: &PhysicalState) -> bool {
        self.inner(other)
            .map(|z| z.norm() >= 1.0 - PHASE_TOLERANCE)
            .unwrap_or(false)
    }

    /// Applies `matrix` to the listed qubits. `targets[0]` is the most
    /// significant bit of the matrix's row index.
    pub fn apply_unitary(&self, matrix: &Matrix, targets: &[usize]) -> Result<Self> {
        self.check_targets(matrix, targets)?;
        if !is_unitary(matrix) {
            return Err(Error::Validation("matrix is not unitary".into()));
        }
        let mut out = Self {
            num_qubits: self.num_qubits,
            amplitudes: self.apply_operator(matrix, targets),
        };
        out.renormalize();
        Ok(out)
    }

    /// Same single-qubit unitary on every qubit of the register.
    pub fn apply_to_each(&self, single: &Matrix) -> Result<Self> {
        let mut state = self.clone();
        for q in 0..self.num_qubits {
            state = state.apply_unitary(single, &[q])?;
        }
        Ok(state)
    }

    /// Samples a projective measurement on `targets` according to the Born rule.
    pub fn measure<R: Rng + ?Sized>(
        &self,
        measurement: &ProjectiveMeasurement,
        targets: &[usize],
        rng: &mut R,
    ) -> Result<MeasurementRecord> {
        let probabilities = self.probabilities(measurement, targets)?;
        let draw: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = None;
        let mut last_nonzero = 0;
        for (idx, prob) in probabilities.iter().enumerate() {
            if *prob > 0.0 {
                last_nonzero = idx;
            }
            acc += prob;
            if chosen.is_none() && draw < acc && *prob > 0.0 {
                chosen = Some(idx);
            }
        }
        // Rounding can leave `acc` a hair below 1.
        let outcome_index = chosen.unwrap_or(last_nonzero);
        let mut post_state = Self {
            num_qubits: self.num_qubits,
            amplitudes: self.apply_operator(&measurement.projectors[outcome_index], targets),
        };
        post_state.renormalize();
        Ok(MeasurementRecord {
            outcome_index,
            probability: probabilities[outcome_index],
            post_state,
        })
    }

    /// Probability of `outcome` and the normalized post-measurement state,
    /// or `None` for the state when the outcome is impossible.
    pub fn collapse(
        &self,
        measurement: &ProjectiveMeasurement,
        targets: &[usize],
        outcome: usize,
    ) -> Result<(f64, Option<PhysicalState>)> {
        let projector = measurement.projectors.get(outcome).ok_or_else(|| {
            Error::InvalidArgument(format!("outcome {outcome} of {}", measurement.len()))
        })?;
        self.check_targets(projector, targets)?;
        let amplitudes = self.apply_operator(projector, targets);
        let prob: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if prob < 1e-14 {
            return Ok((0.0, None));
        }
        let mut post = Self {
            num_qubits: self.num_qubits,
            amplitudes,
        };
        post.renormalize();
        Ok((prob, Some(post)))
    }

    /// Born-rule probability of each projector outcome.
    pub fn probabilities(
        &self,
        measurement: &ProjectiveMeasurement,
        targets: &[usize],
    ) -> Result<Vec<f64>> {
        self.check_targets(&measurement.projectors[0], targets)?;
        let rho = self.reduced_density(targets);
        let raw: Vec<f64> = measurement
            .projectors
            .iter()
            .map(|p| p.component_mul(&rho.transpose()).sum().re.max(0.0))
            .collect();
        let total: f64 = raw.iter().sum();
        Ok(raw
            .into_iter()
            .map(|p| (p / total).clamp(0.0, 1.0))
            .collect())
    }

    /// Reduced density matrix of `targets`, `targets[0]` most significant.
    pub fn reduced_density(&self, targets: &[usize]) -> Matrix {
        let n = self.num_qubits;
        let local_dim = 1usize << targets.len();
        let target_mask = targets.iter().fold(0usize, |m, &t| m | bit_of(t, n));
        let offsets: Vec<usize> = (0..local_dim)
            .map(|l| scatter_bits(l, targets, n))
            .collect();
        let mut rho = Matrix::zeros(local_dim, local_dim);
        for base in 0..self.amplitudes.len() {
            if base & target_mask != 0 {
                continue;
            }
            for (a, oa) in offsets.iter().enumerate() {
                let amp_a = self.amplitudes[base | oa];
                if amp_a.norm_sqr() == 0.0 {
                    continue;
                }
                for (b, ob) in offsets.iter().enumerate() {
                    rho[(a, b)] += amp_a * self.amplitudes[base | ob].conj();
                }
            }
        }
        rho
    }

    /// Kronecker product; qubits of `other` follow those of `self`.
    pub fn tensor(&self, other: &PhysicalState) -> Result<Self> {
        let num_qubits = self.num_qubits + other.num_qubits;
        check_capacity(num_qubits)?;
        let mut amplitudes = Vec::with_capacity(1 << num_qubits);
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Removes `targets` from the register, assuming they sit in the product
    /// factor `ket`. The remaining qubits keep their relative order.
    pub fn contract(&self, targets: &[usize], ket: &[Complex64]) -> Result<Self> {
        if ket.len() != 1 << targets.len() {
            return Err(Error::InvalidArgument(
                "ket dimension does not match target count".into(),
            ));
        }
        self.check_target_list(targets)?;
        if targets.len() >= self.num_qubits {
            return Err(Error::InvalidArgument(
                "cannot contract every qubit of a register".into(),
            ));
        }
        let n = self.num_qubits;
        let rest: Vec<usize> = (0..n).filter(|q| !targets.contains(q)).collect();
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << rest.len()];
        for (index, amp) in self.amplitudes.iter().enumerate() {
            let local = gather_bits(index, targets, n);
            let rest_index = gather_bits(index, &rest, n);
            amplitudes[rest_index] += ket[local].conj() * amp;
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > 1e-8 {
            return Err(Error::Validation(format!(
                "targets are not in the given product factor (overlap {norm_sqr})"
            )));
        }
        let mut out = Self {
            num_qubits: rest.len(),
            amplitudes,
        };
        out.renormalize();
        Ok(out)
    }

    fn renormalize(&mut self) {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            for a in &mut self.amplitudes {
                *a /= norm;
            }
        }
    }

    fn check_targets(&self, matrix: &Matrix, targets: &[usize]) -> Result<()> {
        self.check_target_list(targets)?;
        let dim = 1usize << targets.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::InvalidArgument(format!(
                "matrix is {}x{} but {} targets need {dim}x{dim}",
                matrix.nrows(),
                matrix.ncols(),
                targets.len()
            )));
        }
        Ok(())
    }

    fn check_target_list(&self, targets: &[usize]) -> Result<()> {
        if targets.is_empty() {
            return Err(Error::InvalidArgument("no target qubits".into()));
        }
        for (i, &t) in targets.iter().enumerate() {
            if t >= self.num_qubits {
                return Err(Error::InvalidArgument(format!(
                    "target qubit {t} out of range for {} qubits",
                    self.num_qubits
                )));
            }
            if targets[..i].contains(&t) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate target qubit {t}"
                )));
            }
        }
        Ok(())
    }

    /// Applies `matrix` on `targets` without any validation or renormalization.
    fn apply_operator(&self, matrix: &Matrix, targets: &[usize]) -> Vec<Complex64> {
        let n = self.num_qubits;
        let k = targets.len();
        let local_dim = 1usize << k;
        let target_mask = targets.iter().fold(0usize, |m, &t| m | bit_of(t, n));
        let offsets: Vec<usize> = (0..local_dim)
            .map(|l| scatter_bits(l, targets, n))
            .collect();

        let mut out = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        let mut gathered = vec![Complex64::new(0.0, 0.0); local_dim];
        for base in 0..self.amplitudes.len() {
            if base & target_mask != 0 {
                continue;
            }
            for (g, off) in gathered.iter_mut().zip(&offsets) {
                *g = self.amplitudes[base | off];
            }
            for (row, off) in offsets.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (col, g) in gathered.iter().enumerate() {
                    acc += matrix[(row, col)] * g;
                }
                out[base | off] = acc;
            }
        }
        out
    }
}

fn check_capacity(num_qubits: usize) -> Result<()> {
    if num_qubits > MAX_QUBITS {
        return Err(Error::Capacity {
            requested: num_qubits,
            max: MAX_QUBITS,
        });
    }
    Ok(())
}

#[inline]
fn bit_of(qubit: usize, n: usize) -> usize {
    1 << (n - 1 - qubit)
}

/// Spreads the bits of a local index onto the register positions of `qubits`.
fn scatter_bits(local: usize, qubits: &[usize], n: usize) -> usize {
    let k = qubits.len();
    qubits.iter().enumerate().fold(0, |acc, (j, &q)| {
        if local >> (k - 1 - j) & 1 == 1 {
            acc | bit_of(q, n)
        } else {
            acc
        }
    })
}

/// Inverse of `scatter_bits`.
fn gather_bits(index: usize, qubits: &[usize], n: usize) -> usize {
    let k = qubits.len();
    qubits.iter().enumerate().fold(0, |acc, (j, &q)| {
        if index & bit_of(q, n) != 0 {
            acc | 1 << (k - 1 - j)
        } else {
            acc
        }
    })
}

/// Convenience wrapper that validates `projectors` and measures once.
pub fn measure_projective<R: Rng + ?Sized>(
    state: &PhysicalState,
    projectors: Vec<Matrix>,
    targets: &[usize],
    rng: &mut R,
) -> Result<MeasurementRecord> {
    let measurement = ProjectiveMeasurement::new(projectors)?;
    state.measure(&measurement, targets, rng)
}

/// Common single-qubit gates.
pub mod gates {
    use super::Matrix;
    use num_complex::Complex64;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub fn identity(dim: usize) -> Matrix {
        Matrix::identity(dim, dim)
    }

    pub fn pauli_x() -> Matrix {
        Matrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
    }

    pub fn pauli_z() -> Matrix {
        Matrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
    }

    pub fn hadamard() -> Matrix {
        let h = FRAC_1_SQRT_2;
        Matrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])
    }

    /// `diag(1, e^{iφ})`.
    pub fn phase(phi: f64) -> Matrix {
        Matrix::from_row_slice(
            2,
            2,
            &[
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                Complex64::from_polar(1.0, phi),
            ],
        )
    }

    /// Real planar rotation `[cosθ, −sinθ; sinθ, cosθ]`.
    pub fn rotation(theta: f64) -> Matrix {
        let (s, co) = theta.sin_cos();
        Matrix::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn z_basis() -> ProjectiveMeasurement {
        ProjectiveMeasurement::new(vec![
            projector(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]),
            projector(&[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]),
        ])
        .unwrap()
    }

    fn physical_bell(sign: f64, flip: bool) -> Vec<Complex64> {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let mut v = vec![Complex64::new(0.0, 0.0); 4];
        if flip {
            v[1] = h;
            v[2] = h * sign;
        } else {
            v[0] = h;
            v[3] = h * sign;
        }
        v
    }

    #[test]
    fn prepare_places_single_amplitude() {
        let s = PhysicalState::prepare(2, 1).unwrap();
        assert_eq!(s.amplitudes()[1], Complex64::new(1.0, 0.0));
        assert_eq!(s.norm_sqr(), 1.0);
        let s = PhysicalState::prepare(4, 5).unwrap();
        assert_eq!(s.amplitudes()[0b0101], Complex64::new(1.0, 0.0));
        let s = PhysicalState::prepare(1, 0).unwrap();
        assert_eq!(
            s.amplitudes(),
            &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
        );
    }

    #[test]
    fn prepare_rejects_out_of_range() {
        assert!(matches!(
            PhysicalState::prepare(2, 4),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            PhysicalState::prepare(13, 0),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn bit_flip_on_leftmost_qubit() {
        let s = PhysicalState::prepare(2, 0b01).unwrap();
        let out = s.apply_unitary(&gates::pauli_x(), &[0]).unwrap();
        assert_eq!(out, PhysicalState::prepare(2, 0b11).unwrap());
    }

    #[test]
    fn identity_and_hadamard_squared() {
        let s = PhysicalState::prepare(3, 6).unwrap();
        assert_eq!(s.apply_unitary(&gates::identity(4), &[2, 0]).unwrap(), s);
        let zero = PhysicalState::prepare(1, 0).unwrap();
        let twice = zero
            .apply_unitary(&gates::hadamard(), &[0])
            .unwrap()
            .apply_unitary(&gates::hadamard(), &[0])
            .unwrap();
        assert!(twice.equal_up_to_phase(&zero));
        assert!((twice.amplitudes()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn apply_unitary_validates() {
        let s = PhysicalState::prepare(2, 0).unwrap();
        let bad = Matrix::from_element(2, 2, Complex64::new(1.0, 0.0));
        assert!(matches!(
            s.apply_unitary(&bad, &[0]),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            s.apply_unitary(&gates::identity(4), &[0, 0]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            s.apply_unitary(&gates::pauli_x(), &[2]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn measuring_eigenstate_is_certain() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let zero = PhysicalState::prepare(1, 0).unwrap();
        let rec = zero.measure(&z_basis(), &[0], &mut rng).unwrap();
        assert_eq!(rec.outcome_index, 0);
        assert!((rec.probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn physical_bell_measurement_recognizes_phi_plus() {
        let basis = vec![
            projector(&physical_bell(1.0, false)),
            projector(&physical_bell(-1.0, false)),
            projector(&physical_bell(1.0, true)),
            projector(&physical_bell(-1.0, true)),
        ];
        let phi = PhysicalState::from_amplitudes(physical_bell(1.0, false)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rec = measure_projective(&phi, basis, &[0, 1], &mut rng).unwrap();
        assert_eq!(rec.outcome_index, 0);
        assert!((rec.probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plus_state_measures_evenly() {
        let plus = PhysicalState::prepare(1, 0)
            .unwrap()
            .apply_unitary(&gates::hadamard(), &[0])
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = z_basis();
        let zeros = (0..10_000)
            .filter(|_| plus.measure(&m, &[0], &mut rng).unwrap().outcome_index == 0)
            .count();
        let freq = zeros as f64 / 10_000.0;
        assert!((freq - 0.5).abs() < 0.02, "frequency {freq}");
    }

    #[test]
    fn incomplete_projectors_rejected() {
        let only_zero = vec![projector(&[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ])];
        assert!(matches!(
            ProjectiveMeasurement::new(only_zero),
            Err(Error::Validation(_))
        ));
        let overlapping = vec![
            projector(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]),
            projector(&[
                Complex64::new(FRAC_1_SQRT_2, 0.0),
                Complex64::new(FRAC_1_SQRT_2, 0.0),
            ]),
        ];
        assert!(ProjectiveMeasurement::new(overlapping).is_err());
    }

    #[test]
    fn tensor_matches_kronecker() {
        let zero = PhysicalState::prepare(1, 0).unwrap();
        let one = PhysicalState::prepare(1, 1).unwrap();
        assert_eq!(
            zero.tensor(&one).unwrap(),
            PhysicalState::prepare(2, 1).unwrap()
        );

        let phi = PhysicalState::from_amplitudes(physical_bell(1.0, false)).unwrap();
        let t = phi.tensor(&zero).unwrap();
        assert_eq!(t.num_qubits(), 3);
        assert!((t.amplitudes()[0b000].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((t.amplitudes()[0b110].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((t.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_capacity_enforced() {
        let a = PhysicalState::prepare(7, 0).unwrap();
        let b = PhysicalState::prepare(6, 0).unwrap();
        assert!(matches!(
            a.tensor(&b),
            Err(Error::Capacity {
                requested: 13,
                max: 12
            })
        ));
    }

    #[test]
    fn contract_removes_product_factor() {
        let phi = PhysicalState::from_amplitudes(physical_bell(1.0, false)).unwrap();
        let one = PhysicalState::prepare(1, 1).unwrap();
        // |1⟩ ⊗ |Φ+⟩, then strip the middle-and-last qubits.
        let joint = one.tensor(&phi).unwrap();
        let rest = joint.contract(&[1, 2], &physical_bell(1.0, false)).unwrap();
        assert_eq!(rest, one);
        assert!(joint
            .contract(&[0], &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)])
            .is_err());
    }
}
