//! Dense complex linear algebra for systems of a few labeled qubits.
//!
//! Basis indices are big-endian in label order: the first label is the most
//! significant bit. Every state carries its labels so operators are always
//! bound to named subsystems rather than positions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<Complex64>;

/// Tolerance for norms, traces, unitarity and Hermiticity.
pub const TOLERANCE: f64 = 1e-12;

/// Eigenvalues above `-PSD_SLACK` count as nonnegative.
pub const PSD_SLACK: f64 = 1e-10;

/// Branches with probability below this are reported as impossible.
pub const PROBABILITY_FLOOR: f64 = 1e-14;

pub const ALICE_POL: &str = "Apol";
pub const ALICE_PATH: &str = "Apath";
pub const BOB_POL: &str = "Bpol";

/// Largest supported register.
pub const MAX_QUBITS: usize = 4;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub(crate) fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Single-qubit gate matrices.
pub mod gates {
    use super::{real, Matrix, ONE, ZERO};
    use num_complex::Complex64;
    use std::f64::consts::FRAC_1_SQRT_2;

    pub fn identity(dim: usize) -> Matrix {
        Matrix::identity(dim, dim)
    }

    pub fn pauli_x() -> Matrix {
        Matrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    pub fn pauli_y() -> Matrix {
        let i = Complex64::i();
        Matrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO])
    }

    pub fn pauli_z() -> Matrix {
        Matrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
    }

    pub fn hadamard() -> Matrix {
        let h = real(FRAC_1_SQRT_2);
        Matrix::from_row_slice(2, 2, &[h, h, h, -h])
    }

    /// Rotation about the Bloch Y axis by `angle`.
    pub fn ry(angle: f64) -> Matrix {
        let (s, c) = (angle / 2.0).sin_cos();
        Matrix::from_row_slice(2, 2, &[real(c), real(-s), real(s), real(c)])
    }
}

fn validate_labels(labels: &[String]) -> Result<()> {
    for (i, label) in labels.iter().enumerate() {
        if labels[..i].contains(label) {
            return Err(Error::DuplicateLabel(label.clone()));
        }
    }
    Ok(())
}

fn owned_labels(labels: &[&str]) -> Result<Vec<String>> {
    let owned: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
    validate_labels(&owned)?;
    if owned.len() > MAX_QUBITS {
        return Err(Error::OutOfRange {
            name: "number of qubits",
            value: owned.len() as f64,
            min: 0.0,
            max: MAX_QUBITS as f64,
        });
    }
    Ok(owned)
}

fn positions_of(labels: &[String], targets: &[&str]) -> Result<Vec<usize>> {
    let mut positions = Vec::with_capacity(targets.len());
    for target in targets {
        let pos = labels
            .iter()
            .position(|l| l == target)
            .ok_or_else(|| Error::UnknownLabel(target.to_string()))?;
        if positions.contains(&pos) {
            return Err(Error::DuplicateLabel(target.to_string()));
        }
        positions.push(pos);
    }
    Ok(positions)
}

fn joined_labels(a: &[String], b: &[String]) -> Result<Vec<String>> {
    if let Some(dup) = b.iter().find(|l| a.contains(l)) {
        return Err(Error::DuplicateLabel(dup.clone()));
    }
    if a.len() + b.len() > MAX_QUBITS {
        return Err(Error::OutOfRange {
            name: "number of qubits",
            value: (a.len() + b.len()) as f64,
            min: 0.0,
            max: MAX_QUBITS as f64,
        });
    }
    Ok(a.iter().chain(b).cloned().collect())
}

#[inline]
fn bit(index: usize, position: usize, n: usize) -> usize {
    (index >> (n - 1 - position)) & 1
}

/// Gathers the bits of `index` at `positions` into a compact sub-index,
/// the first position becoming the most significant bit.
fn sub_index(index: usize, positions: &[usize], n: usize) -> usize {
    positions
        .iter()
        .fold(0, |acc, &p| (acc << 1) | bit(index, p, n))
}

fn position_mask(positions: &[usize], n: usize) -> usize {
    positions.iter().fold(0, |acc, &p| acc | (1 << (n - 1 - p)))
}

/// Lifts a `2^k × 2^k` operator on `positions` to the full `2^n` space.
fn embed(op: &Matrix, positions: &[usize], n: usize) -> Matrix {
    let dim = 1 << n;
    let rest = !position_mask(positions, n) & (dim - 1);
    Matrix::from_fn(dim, dim, |i, j| {
        if i & rest == j & rest {
            op[(sub_index(i, positions, n), sub_index(j, positions, n))]
        } else {
            ZERO
        }
    })
}

fn max_abs(m: &Matrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn arity_of(dim: usize) -> Option<usize> {
    (dim.is_power_of_two() && dim >= 2).then(|| dim.trailing_zeros() as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Unitary,
    KrausSet,
}

/// A unitary or a trace-preserving Kraus set acting on `arity` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    kind: OperatorKind,
    matrices: Vec<Matrix>,
    arity: usize,
}

impl Operator {
    pub fn unitary(matrix: Matrix) -> Result<Self> {
        let arity = Self::check_shape(&matrix)?;
        let dim = matrix.nrows();
        let err = max_abs(&(matrix.adjoint() * &matrix - Matrix::identity(dim, dim)));
        if err > TOLERANCE {
            return Err(Error::NotUnitary(err));
        }
        Ok(Self {
            kind: OperatorKind::Unitary,
            matrices: vec![matrix],
            arity,
        })
    }

    pub fn kraus(matrices: Vec<Matrix>) -> Result<Self> {
        let first = matrices.first().ok_or(Error::EmptyInput)?;
        let arity = Self::check_shape(first)?;
        let dim = first.nrows();
        let mut sum = Matrix::zeros(dim, dim);
        for k in &matrices {
            if k.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: k.nrows(),
                });
            }
            sum += k.adjoint() * k;
        }
        let err = max_abs(&(sum - Matrix::identity(dim, dim)));
        if err > TOLERANCE {
            return Err(Error::NotTracePreserving(err));
        }
        Ok(Self {
            kind: OperatorKind::KrausSet,
            matrices,
            arity,
        })
    }

    pub fn identity(arity: usize) -> Self {
        Self {
            kind: OperatorKind::Unitary,
            matrices: vec![gates::identity(1 << arity)],
            arity,
        }
    }

    fn check_shape(m: &Matrix) -> Result<usize> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                actual: m.ncols(),
            });
        }
        arity_of(m.nrows()).ok_or(Error::DimensionMismatch {
            expected: m.nrows().next_power_of_two().max(2),
            actual: m.nrows(),
        })
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// The unitary matrix, or `None` for a Kraus set.
    pub fn matrix(&self) -> Option<&Matrix> {
        match self.kind {
            OperatorKind::Unitary => self.matrices.first(),
            OperatorKind::KrausSet => None,
        }
    }

    /// Kraus operators; a unitary is its own single-element set.
    pub fn kraus_operators(&self) -> &[Matrix] {
        &self.matrices
    }

    pub fn adjoint(&self) -> Option<Self> {
        self.matrix().map(|u| Self {
            kind: OperatorKind::Unitary,
            matrices: vec![u.adjoint()],
            arity: self.arity,
        })
    }

    /// `self` followed by `next` on the same qubits.
    pub fn then(&self, next: &Operator) -> Result<Self> {
        if self.arity != next.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                actual: next.arity,
            });
        }
        let matrices = next
            .matrices
            .iter()
            .flat_map(|b| self.matrices.iter().map(move |a| b * a))
            .collect();
        let kind = if self.kind == OperatorKind::Unitary && next.kind == OperatorKind::Unitary {
            OperatorKind::Unitary
        } else {
            OperatorKind::KrausSet
        };
        Ok(Self {
            kind,
            matrices,
            arity: self.arity,
        })
    }

    /// Kronecker product of two unitaries, `self` on the leading qubits.
    pub fn kron(&self, other: &Operator) -> Option<Self> {
        let a = self.matrix()?;
        let b = other.matrix()?;
        Some(Self {
            kind: OperatorKind::Unitary,
            matrices: vec![a.kronecker(b)],
            arity: self.arity + other.arity,
        })
    }

    pub(crate) fn unitary_unchecked(matrix: Matrix) -> Self {
        let arity = arity_of(matrix.nrows()).expect("power-of-two square matrix");
        Self {
            kind: OperatorKind::Unitary,
            matrices: vec![matrix],
            arity,
        }
    }

    pub(crate) fn kraus_unchecked(matrices: Vec<Matrix>) -> Self {
        let arity = arity_of(matrices[0].nrows()).expect("power-of-two square matrix");
        Self {
            kind: OperatorKind::KrausSet,
            matrices,
            arity,
        }
    }

    fn check_targets(&self, targets: &[&str]) -> Result<()> {
        if self.arity != targets.len() {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                actual: targets.len(),
            });
        }
        Ok(())
    }
}

/// Operations shared by pure states and density matrices.
pub trait QuantumState: Sized {
    fn labels(&self) -> &[String];

    fn num_qubits(&self) -> usize {
        self.labels().len()
    }

    fn dim(&self) -> usize {
        1 << self.num_qubits()
    }

    /// Kronecker product; labels are concatenated `self` then `other`.
    fn tensor(&self, other: &Self) -> Result<Self>;

    /// Applies `op` to `targets`, identity elsewhere.
    fn apply_on(&self, op: &Operator, targets: &[&str]) -> Result<Self>;
}

pub fn tensor_product<S: QuantumState>(a: &S, b: &S) -> Result<S> {
    a.tensor(b)
}

pub fn apply_on<S: QuantumState>(op: &Operator, targets: &[&str], state: &S) -> Result<S> {
    state.apply_on(op, targets)
}

pub fn partial_trace(rho: &DensityMatrix, keep: &[&str]) -> Result<DensityMatrix> {
    rho.partial_trace(keep)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: DVector<Complex64>,
    labels: Vec<String>,
}

impl PureState {
    /// Requires unit norm within [`TOLERANCE`].
    pub fn new(amplitudes: Vec<Complex64>, labels: &[&str]) -> Result<Self> {
        let state = Self::from_parts(amplitudes, labels)?;
        let norm_sqr = state.norm_sqr();
        if (norm_sqr - 1.0).abs() > TOLERANCE {
            return Err(Error::NotNormalized(norm_sqr));
        }
        Ok(state)
    }

    pub fn from_unnormalized(amplitudes: Vec<Complex64>, labels: &[&str]) -> Result<Self> {
        Self::from_parts(amplitudes, labels)?.normalize()
    }

    fn from_parts(amplitudes: Vec<Complex64>, labels: &[&str]) -> Result<Self> {
        let labels = owned_labels(labels)?;
        let expected = 1 << labels.len();
        if amplitudes.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: amplitudes.len(),
            });
        }
        Ok(Self {
            amplitudes: DVector::from_vec(amplitudes),
            labels,
        })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(labels: &[&str], index: usize) -> Result<Self> {
        let dim = 1 << labels.len();
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: index,
            });
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self::new(amps, labels)
    }

    /// `alpha|0⟩ + beta|1⟩` on a single qubit.
    pub fn qubit(label: &str, alpha: Complex64, beta: Complex64) -> Result<Self> {
        Self::new(vec![alpha, beta], &[label])
    }

    /// Haar-random state from normalized complex Gaussian amplitudes.
    pub fn random<R: Rng + ?Sized>(labels: &[&str], rng: &mut R) -> Result<Self> {
        let dim = 1 << labels.len();
        let amps = (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::from_unnormalized(amps, labels)
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm < PROBABILITY_FLOOR {
            return Err(Error::NotNormalized(norm * norm));
        }
        Ok(Self {
            amplitudes: self.amplitudes.unscale(norm),
            labels: self.labels,
        })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.amplitudes.len() != other.amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.amplitudes.len(),
                actual: other.amplitudes.len(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            entries: &self.amplitudes * self.amplitudes.adjoint(),
            labels: self.labels.clone(),
        }
    }

    /// Removes the global phase so the first nonzero amplitude is real
    /// and positive.
    pub fn phase_fixed(&self) -> Self {
        let pivot = self
            .amplitudes
            .iter()
            .find(|a| a.norm() > TOLERANCE)
            .copied()
            .unwrap_or(ONE);
        let phase = pivot.conj() / pivot.norm();
        Self {
            amplitudes: self.amplitudes.map(|a| a * phase),
            labels: self.labels.clone(),
        }
    }

    /// Largest amplitude difference after fixing both global phases.
    pub fn distance_up_to_phase(&self, other: &PureState) -> Result<f64> {
        if self.amplitudes.len() != other.amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.amplitudes.len(),
                actual: other.amplitudes.len(),
            });
        }
        let a = self.phase_fixed();
        let b = other.phase_fixed();
        Ok(a.amplitudes
            .iter()
            .zip(b.amplitudes.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max))
    }
}

impl QuantumState for PureState {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn tensor(&self, other: &Self) -> Result<Self> {
        let labels = joined_labels(&self.labels, &other.labels)?;
        Ok(Self {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
            labels,
        })
    }

    fn apply_on(&self, op: &Operator, targets: &[&str]) -> Result<Self> {
        op.check_targets(targets)?;
        let u = op.matrix().ok_or(Error::KrausOnPureState)?;
        let positions = positions_of(&self.labels, targets)?;
        let full = embed(u, &positions, self.num_qubits());
        Ok(Self {
            amplitudes: full * &self.amplitudes,
            labels: self.labels.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: Matrix,
    labels: Vec<String>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(entries: Matrix, labels: &[&str]) -> Result<Self> {
        let labels = owned_labels(labels)?;
        let expected = 1 << labels.len();
        if entries.shape() != (expected, expected) {
            return Err(Error::DimensionMismatch {
                expected,
                actual: entries.nrows(),
            });
        }
        let rho = Self { entries, labels };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_parts_unchecked(entries: Matrix, labels: Vec<String>) -> Self {
        Self { entries, labels }
    }

    pub fn maximally_mixed(labels: &[&str]) -> Result<Self> {
        let labels = owned_labels(labels)?;
        let dim = 1 << labels.len();
        Ok(Self {
            entries: Matrix::identity(dim, dim).unscale(dim as f64),
            labels,
        })
    }

    /// Random mixed state `Σ w_k |ψ_k⟩⟨ψ_k|` of the given rank.
    pub fn random<R: Rng + ?Sized>(labels: &[&str], rank: usize, rng: &mut R) -> Result<Self> {
        let rank = rank.max(1);
        let weights: Vec<f64> = (0..rank).map(|_| rng.random::<f64>() + 1e-3).collect();
        let total: f64 = weights.iter().sum();
        let mut parts = Vec::with_capacity(rank);
        for w in weights {
            parts.push((w / total, PureState::random(labels, rng)?.to_density()));
        }
        Self::mixture(parts.iter().map(|(w, rho)| (*w, rho)))
    }

    /// Convex combination; weights are used as given.
    pub fn mixture<'a, I>(parts: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, &'a DensityMatrix)>,
    {
        let mut iter = parts.into_iter();
        let (w0, first) = iter.next().ok_or(Error::EmptyInput)?;
        let mut entries = first.entries.scale(w0);
        for (w, rho) in iter {
            if rho.labels != first.labels {
                return Err(Error::DimensionMismatch {
                    expected: first.dim(),
                    actual: rho.dim(),
                });
            }
            entries += rho.entries.scale(w);
        }
        Ok(Self {
            entries,
            labels: first.labels.clone(),
        })
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    /// Max entry-wise `|ρ - ρ†|`.
    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.entries - self.entries.adjoint()))
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let hermitian = (&self.entries + self.entries.adjoint()).scale(0.5);
        let mut values: Vec<f64> = hermitian.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(|a, b| a.total_cmp(b));
        values
    }

    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (max |ρ - ρ†| = {herm:e})"
            )));
        }
        let trace = self.trace();
        if (trace.re - 1.0).abs() > TOLERANCE || trace.im.abs() > TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!("trace is {trace}")));
        }
        let min_eig = self.eigenvalues().first().copied().unwrap_or(0.0);
        if min_eig < -PSD_SLACK {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(())
    }

    /// Max entry-wise difference; labels must agree.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> Result<f64> {
        if self.entries.shape() != other.entries.shape() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(max_abs(&(&self.entries - &other.entries)))
    }

    pub fn partial_trace(&self, keep: &[&str]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::EmptyKeep);
        }
        let n = self.num_qubits();
        let mut kept = positions_of(&self.labels, keep)?;
        kept.sort_unstable();
        let traced_mask = !position_mask(&kept, n) & (self.dim() - 1);
        let out_dim = 1 << kept.len();
        let mut out = Matrix::zeros(out_dim, out_dim);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if i & traced_mask == j & traced_mask {
                    out[(sub_index(i, &kept, n), sub_index(j, &kept, n))] += self.entries[(i, j)];
                }
            }
        }
        Ok(Self {
            entries: out,
            labels: kept.iter().map(|&p| self.labels[p].clone()).collect(),
        })
    }

    /// Reorders subsystems to `order`, which must be a permutation of the
    /// current labels.
    pub fn permuted(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.num_qubits() {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits(),
                actual: order.len(),
            });
        }
        let n = self.num_qubits();
        let positions = positions_of(&self.labels, order)?;
        let dim = self.dim();
        let new_index: Vec<usize> = (0..dim).map(|i| sub_index(i, &positions, n)).collect();
        let mut out = Matrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                out[(new_index[i], new_index[j])] = self.entries[(i, j)];
            }
        }
        Ok(Self {
            entries: out,
            labels: order.iter().map(|l| l.to_string()).collect(),
        })
    }

    /// Projects the listed qubits onto computational-basis values and
    /// returns the outcome probability with the normalized state of the
    /// remaining qubits. The state is `None` below [`PROBABILITY_FLOOR`].
    pub fn condition(&self, outcomes: &[(&str, usize)]) -> Result<(f64, Option<DensityMatrix>)> {
        let n = self.num_qubits();
        let names: Vec<&str> = outcomes.iter().map(|(l, _)| *l).collect();
        let measured = positions_of(&self.labels, &names)?;
        if measured.len() == n {
            return Err(Error::NothingLeft);
        }
        let mut wanted = 0;
        for (&pos, &(_, value)) in measured.iter().zip(outcomes) {
            if value > 1 {
                return Err(Error::OutOfRange {
                    name: "measurement outcome",
                    value: value as f64,
                    min: 0.0,
                    max: 1.0,
                });
            }
            wanted |= value << (n - 1 - pos);
        }
        let mask = position_mask(&measured, n);
        let rest: Vec<usize> = (0..n).filter(|p| !measured.contains(p)).collect();
        let selected: Vec<usize> = (0..self.dim()).filter(|i| i & mask == wanted).collect();
        let out_dim = 1 << rest.len();
        let mut block = Matrix::zeros(out_dim, out_dim);
        for &i in &selected {
            for &j in &selected {
                block[(sub_index(i, &rest, n), sub_index(j, &rest, n))] = self.entries[(i, j)];
            }
        }
        let probability = block.trace().re;
        let labels: Vec<String> = rest.iter().map(|&p| self.labels[p].clone()).collect();
        if probability < PROBABILITY_FLOOR {
            return Ok((0.0, None));
        }
        Ok((
            probability,
            Some(Self {
                entries: block.unscale(probability),
                labels,
            }),
        ))
    }
}

impl QuantumState for DensityMatrix {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn tensor(&self, other: &Self) -> Result<Self> {
        let labels = joined_labels(&self.labels, &other.labels)?;
        Ok(Self {
            entries: self.entries.kronecker(&other.entries),
            labels,
        })
    }

    fn apply_on(&self, op: &Operator, targets: &[&str]) -> Result<Self> {
        op.check_targets(targets)?;
        let positions = positions_of(&self.labels, targets)?;
        let n = self.num_qubits();
        let mut out = Matrix::zeros(self.dim(), self.dim());
        for k in op.kraus_operators() {
            let full = embed(k, &positions, n);
            out += &full * &self.entries * full.adjoint();
        }
        Ok(Self {
            entries: out,
            labels: self.labels.clone(),
        })
    }
}

/// An operator bound to named subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementAction {
    pub operator: Operator,
    pub targets: Vec<String>,
}

impl ElementAction {
    pub fn new(operator: Operator, targets: &[&str]) -> Result<Self> {
        operator.check_targets(targets)?;
        Ok(Self {
            operator,
            targets: owned_labels(targets)?,
        })
    }

    fn target_refs(&self) -> Vec<&str> {
        self.targets.iter().map(String::as_str).collect()
    }

    pub fn apply<S: QuantumState>(&self, state: &S) -> Result<S> {
        state.apply_on(&self.operator, &self.target_refs())
    }
}

/// `⟨ψ|ρ|ψ⟩`, clamped to `[0, 1]`.
pub fn fidelity_pure(target: &PureState, rho: &DensityMatrix) -> Result<f64> {
    if target.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            actual: target.dim(),
        });
    }
    let psi = target.amplitudes();
    let value = psi.dotc(&(rho.entries() * psi));
    Ok(value.re.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn ket0(label: &str) -> PureState {
        PureState::basis(&[label], 0).unwrap()
    }

    fn random_unitary<R: Rng>(arity: usize, rng: &mut R) -> Operator {
        // Columns of a Gram-Schmidt-orthonormalized Gaussian matrix.
        let dim = 1 << arity;
        let g = Matrix::from_fn(dim, dim, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        Operator::unitary(g.qr().q()).unwrap()
    }

    #[test]
    fn tensor_of_basis_states() {
        let s = ket0("a").tensor(&ket0("b")).unwrap();
        let expected = [ONE, ZERO, ZERO, ZERO];
        assert_eq!(s.amplitudes().as_slice(), &expected);
        assert_eq!(s.labels(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn tensor_rejects_overlapping_labels() {
        let err = ket0("a").tensor(&ket0("a")).unwrap_err();
        assert_eq!(err, Error::DuplicateLabel("a".into()));
    }

    #[test]
    fn tensor_of_bell_pair_and_path() {
        let h = real(FRAC_1_SQRT_2);
        let bell = PureState::new(vec![h, ZERO, ZERO, h], &[ALICE_POL, BOB_POL]).unwrap();
        let joint = bell
            .to_density()
            .tensor(&ket0(ALICE_PATH).to_density())
            .unwrap();
        let joint = joint.permuted(&[ALICE_POL, ALICE_PATH, BOB_POL]).unwrap();
        // |H,0,H⟩ = 0, |V,0,V⟩ = 0b101
        let expected = PureState::from_unnormalized(
            (0..8)
                .map(|i| if i == 0 || i == 5 { ONE } else { ZERO })
                .collect(),
            &[ALICE_POL, ALICE_PATH, BOB_POL],
        )
        .unwrap();
        assert!(joint.max_abs_diff(&expected.to_density()).unwrap() < 1e-15);
    }

    #[test]
    fn tensor_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = PureState::random(&["a"], &mut rng).unwrap();
        let b = PureState::random(&["b"], &mut rng).unwrap();
        let c = PureState::random(&["c"], &mut rng).unwrap();
        let left = a.tensor(&b).unwrap().tensor(&c).unwrap();
        let right = a.tensor(&b.tensor(&c).unwrap()).unwrap();
        assert_eq!(left.labels(), right.labels());
        assert!((left.amplitudes() - right.amplitudes()).camax() < 1e-15);

        // Exact when every product is representable.
        let dyadic = |label| {
            PureState::new(
                vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)],
                &[label],
            )
            .unwrap()
        };
        let (a, b) = (dyadic("a"), PureState::basis(&["b"], 1).unwrap());
        let c = PureState::qubit("c", real(0.5), Complex64::new(0.5, 0.5f64.sqrt())).unwrap();
        let left = a.tensor(&b).unwrap().tensor(&c).unwrap();
        let right = a.tensor(&b.tensor(&c).unwrap()).unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn identity_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = PureState::random(&["a", "b", "c"], &mut rng).unwrap();
        let out = psi.apply_on(&Operator::identity(1), &["b"]).unwrap();
        assert_eq!(out, psi);
        let rho = DensityMatrix::random(&["a", "b", "c"], 3, &mut rng).unwrap();
        let out = rho.apply_on(&Operator::identity(2), &["c", "a"]).unwrap();
        assert_eq!(out, rho);
    }

    #[test]
    fn pauli_x_flips_bob() {
        let labels = [ALICE_POL, ALICE_PATH, BOB_POL];
        let hoh = PureState::basis(&labels, 0).unwrap();
        let x = Operator::unitary(gates::pauli_x()).unwrap();
        let out = hoh.apply_on(&x, &[BOB_POL]).unwrap();
        assert_eq!(out, PureState::basis(&labels, 1).unwrap());
    }

    #[test]
    fn apply_errors() {
        let psi = PureState::basis(&["a", "b"], 0).unwrap();
        let x = Operator::unitary(gates::pauli_x()).unwrap();
        assert_eq!(
            psi.apply_on(&x, &["a", "b"]).unwrap_err(),
            Error::ArityMismatch {
                expected: 1,
                actual: 2
            }
        );
        assert_eq!(
            psi.apply_on(&x, &["z"]).unwrap_err(),
            Error::UnknownLabel("z".into())
        );
        let k = Operator::kraus(vec![gates::identity(2)]).unwrap();
        assert_eq!(
            psi.apply_on(&k, &["a"]).unwrap_err(),
            Error::KrausOnPureState
        );
    }

    #[test]
    fn unitary_then_adjoint_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let labels = ["a", "b", "c"];
        for _ in 0..100 {
            let psi = PureState::random(&labels, &mut rng).unwrap();
            let u = random_unitary(2, &mut rng);
            let back = psi
                .apply_on(&u, &["c", "a"])
                .and_then(|s| s.apply_on(&u.adjoint().unwrap(), &["c", "a"]))
                .unwrap();
            let dev = (back.amplitudes() - psi.amplitudes()).camax();
            assert!(dev < 1e-12, "deviation {dev}");
        }
    }

    #[test]
    fn embedding_respects_target_order() {
        // CNOT with control b, target a, on |a=0, b=1⟩ gives |1,1⟩.
        let cnot = Matrix::from_fn(4, 4, |i, j| {
            let target = [0, 1, 3, 2];
            if target[j] == i {
                ONE
            } else {
                ZERO
            }
        });
        let cnot = Operator::unitary(cnot).unwrap();
        let psi = PureState::basis(&["a", "b"], 0b01).unwrap();
        let out = psi.apply_on(&cnot, &["b", "a"]).unwrap();
        assert_eq!(out, PureState::basis(&["a", "b"], 0b11).unwrap());
    }

    #[test]
    fn partial_trace_of_bell_is_maximally_mixed() {
        let h = real(FRAC_1_SQRT_2);
        let bell = PureState::new(vec![h, ZERO, ZERO, h], &["a", "b"]).unwrap();
        let rho = bell.to_density();
        for keep in ["a", "b"] {
            let reduced = rho.partial_trace(&[keep]).unwrap();
            let mixed = DensityMatrix::maximally_mixed(&[keep]).unwrap();
            assert!(reduced.max_abs_diff(&mixed).unwrap() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_recovers_product_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let a = DensityMatrix::random(&["a", "b"], 2, &mut rng).unwrap();
            let b = DensityMatrix::random(&["c"], 2, &mut rng).unwrap();
            let ab = a.tensor(&b).unwrap();
            assert!(
                ab.partial_trace(&["a", "b"])
                    .unwrap()
                    .max_abs_diff(&a)
                    .unwrap()
                    < 1e-12
            );
            assert!(ab.partial_trace(&["c"]).unwrap().max_abs_diff(&b).unwrap() < 1e-12);
            let t = ab.partial_trace(&["b"]).unwrap().trace();
            assert!((t.re - 1.0).abs() < 1e-12 && t.im.abs() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_keeps_original_order() {
        let rho = DensityMatrix::maximally_mixed(&["a", "b", "c"]).unwrap();
        let reduced = rho.partial_trace(&["c", "a"]).unwrap();
        assert_eq!(reduced.labels(), &["a".to_string(), "c".to_string()]);
    }

    #[test]
    fn partial_trace_errors() {
        let rho = DensityMatrix::maximally_mixed(&["a", "b"]).unwrap();
        assert_eq!(rho.partial_trace(&[]).unwrap_err(), Error::EmptyKeep);
        assert_eq!(
            rho.partial_trace(&["q"]).unwrap_err(),
            Error::UnknownLabel("q".into())
        );
    }

    #[test]
    fn local_unitary_commutes_with_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let rho = DensityMatrix::random(&["a", "b", "c"], 3, &mut rng).unwrap();
            let u = random_unitary(1, &mut rng);
            let lhs = rho
                .apply_on(&u, &["a"])
                .unwrap()
                .partial_trace(&["a"])
                .unwrap();
            let rhs = rho
                .partial_trace(&["a"])
                .unwrap()
                .apply_on(&u, &["a"])
                .unwrap();
            assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
            let untouched = rho
                .apply_on(&u, &["a"])
                .unwrap()
                .partial_trace(&["b", "c"])
                .unwrap();
            let direct = rho.partial_trace(&["b", "c"]).unwrap();
            assert!(untouched.max_abs_diff(&direct).unwrap() < 1e-12);
        }
    }

    #[test]
    fn fidelity_examples() {
        let zero = ket0("q");
        let one = PureState::basis(&["q"], 1).unwrap();
        let plus = PureState::qubit("q", real(FRAC_1_SQRT_2), real(FRAC_1_SQRT_2)).unwrap();
        assert!((fidelity_pure(&plus, &plus.to_density()).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity_pure(&zero, &one.to_density()).unwrap().abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(&["q"]).unwrap();
        assert!((fidelity_pure(&plus, &mixed).unwrap() - 0.5).abs() < 1e-12);
        let big = DensityMatrix::maximally_mixed(&["a", "b"]).unwrap();
        assert!(matches!(
            fidelity_pure(&plus, &big),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn channels_keep_states_physical() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let p = 0.3_f64;
        let depol = Operator::kraus(vec![
            gates::identity(2).scale((1.0 - 3.0 * p / 4.0).sqrt()),
            gates::pauli_x().scale((p / 4.0).sqrt()),
            gates::pauli_y().scale((p / 4.0).sqrt()),
            gates::pauli_z().scale((p / 4.0).sqrt()),
        ])
        .unwrap();
        for _ in 0..50 {
            let rho = DensityMatrix::random(&["a", "b"], 2, &mut rng).unwrap();
            let out = rho.apply_on(&depol, &["b"]).unwrap();
            out.validate().unwrap();
        }
    }

    #[test]
    fn rejects_invalid_operators() {
        let not_unitary = gates::pauli_x().scale(2.0);
        assert!(matches!(
            Operator::unitary(not_unitary),
            Err(Error::NotUnitary(_))
        ));
        let leaky = vec![gates::identity(2).scale(0.5)];
        assert!(matches!(
            Operator::kraus(leaky),
            Err(Error::NotTracePreserving(_))
        ));
    }

    #[test]
    fn pure_state_validation() {
        assert!(matches!(
            PureState::new(vec![ONE, ONE], &["a"]),
            Err(Error::NotNormalized(_))
        ));
        assert!(matches!(
            PureState::new(vec![ONE, ZERO, ZERO], &["a"]),
            Err(Error::DimensionMismatch { .. })
        ));
        let psi = PureState::from_unnormalized(vec![ONE, ONE], &["a"]).unwrap();
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phase_fixing_removes_global_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let psi = PureState::random(&["a", "b"], &mut rng).unwrap();
        let phase = Complex64::from_polar(1.0, 1.234);
        let rotated = PureState::new(
            psi.amplitudes().iter().map(|a| a * phase).collect(),
            &["a", "b"],
        )
        .unwrap();
        assert!(psi.distance_up_to_phase(&rotated).unwrap() < 1e-12);
    }

    #[test]
    fn condition_on_bell_pair() {
        let h = real(FRAC_1_SQRT_2);
        let rho = PureState::new(vec![h, ZERO, ZERO, h], &["a", "b"])
            .unwrap()
            .to_density();
        let (p, state) = rho.condition(&[("a", 1)]).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        let state = state.unwrap();
        assert!((state.entry(1, 1).re - 1.0).abs() < 1e-12);
        let product = PureState::basis(&["a", "b"], 0).unwrap().to_density();
        assert_eq!(product.condition(&[("a", 1)]).unwrap(), (0.0, None));
        assert_eq!(
            product.condition(&[("a", 0), ("b", 0)]).unwrap_err(),
            Error::NothingLeft
        );
    }
}
