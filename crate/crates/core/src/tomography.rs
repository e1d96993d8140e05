//! Single-qubit Stokes tomography, count estimation and fidelity reports.
//!
//! Basis conventions: `D = (H+V)/√2`, `A = (H−V)/√2`, `R = (H+iV)/√2`,
//! `L = (H−iV)/√2`. With `H ↦ |0⟩` the Stokes components map onto Pauli
//! expectations as `s1 = ⟨σx⟩` (D/A), `s2 = ⟨σy⟩` (R/L), `s3 = ⟨σz⟩` (H/V).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{gates, real, DensityMatrix, Matrix, QuantumState, BOB_POL, ONE, PSD_SLACK};
use crate::protocol::{self, InputQubit, NoiseModel};

/// Identifier of the pseudorandom generator behind every sampled result.
pub const GENERATOR_ID: &str = "chacha8-seed_from_u64";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    #[serde(rename = "H/V")]
    HV,
    #[serde(rename = "D/A")]
    DA,
    #[serde(rename = "R/L")]
    RL,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::HV, Basis::DA, Basis::RL];

    pub fn tag(self) -> &'static str {
        match self {
            Basis::HV => "H/V",
            Basis::DA => "D/A",
            Basis::RL => "R/L",
        }
    }

    /// Amplitudes of the `+` and `−` projector states in the H/V basis.
    pub fn kets(self) -> ([Complex64; 2], [Complex64; 2]) {
        let h = real(std::f64::consts::FRAC_1_SQRT_2);
        let i = Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
        match self {
            Basis::HV => ([ONE, real(0.0)], [real(0.0), ONE]),
            Basis::DA => ([h, h], [h, -h]),
            Basis::RL => ([h, i], [h, -i]),
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            Basis::HV => 0,
            Basis::DA => 1,
            Basis::RL => 2,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace(['/', '-', '_'], "").as_str() {
            "HV" => Ok(Basis::HV),
            "DA" => Ok(Basis::DA),
            "RL" => Ok(Basis::RL),
            _ => Err(Error::UnknownBasis(s.to_string())),
        }
    }
}

/// Probability of projecting a qubit state onto `ket`.
pub(crate) fn projector_probability(rho: &Matrix, ket: &[Complex64; 2]) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..2 {
        for c in 0..2 {
            acc += ket[r].conj() * rho[(r, c)] * ket[c];
        }
    }
    acc.re
}

pub fn projective_probabilities(rho: &DensityMatrix, basis: Basis) -> Result<(f64, f64)> {
    if rho.num_qubits() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: rho.dim(),
        });
    }
    let (plus, minus) = basis.kets();
    Ok((
        projector_probability(rho.entries(), &plus),
        projector_probability(rho.entries(), &minus),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StokesVector {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl StokesVector {
    pub fn new(s1: f64, s2: f64, s3: f64) -> Self {
        Self { s1, s2, s3 }
    }

    pub fn components(&self) -> [f64; 3] {
        [self.s1, self.s2, self.s3]
    }

    pub fn norm(&self) -> f64 {
        self.components().iter().map(|s| s * s).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &StokesVector) -> f64 {
        self.s1 * other.s1 + self.s2 * other.s2 + self.s3 * other.s3
    }

    /// Bloch vector of a single-qubit density matrix.
    pub fn of_density(rho: &DensityMatrix) -> Result<Self> {
        let probs = BasisProbabilities {
            hv: projective_probabilities(rho, Basis::HV)?,
            da: projective_probabilities(rho, Basis::DA)?,
            rl: projective_probabilities(rho, Basis::RL)?,
        };
        stokes_from_probabilities(&probs)
    }
}

/// `(p_plus, p_minus)` for each analysis basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisProbabilities {
    pub hv: (f64, f64),
    pub da: (f64, f64),
    pub rl: (f64, f64),
}

pub fn stokes_from_probabilities(probs: &BasisProbabilities) -> Result<StokesVector> {
    for &(plus, minus) in [probs.hv, probs.da, probs.rl].iter() {
        if ((plus + minus) - 1.0).abs() > 1e-9 {
            return Err(Error::UnnormalizedProbabilities(plus, minus));
        }
    }
    Ok(StokesVector {
        s1: probs.da.0 - probs.da.1,
        s2: probs.rl.0 - probs.rl.1,
        s3: probs.hv.0 - probs.hv.1,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub rho: DensityMatrix,
    /// Vector actually used, after any clipping.
    pub stokes: StokesVector,
    /// Set when the input lay outside the Bloch ball and was scaled back.
    pub clipped: bool,
}

/// Linear inversion `ρ = (I + s1·σx + s2·σy + s3·σz)/2`, radially clipped
/// to the Bloch ball.
pub fn reconstruct_density(s: &StokesVector) -> Reconstruction {
    let norm = s.norm();
    let (stokes, clipped) = if norm > 1.0 + PSD_SLACK {
        (
            StokesVector::new(s.s1 / norm, s.s2 / norm, s.s3 / norm),
            true,
        )
    } else {
        (*s, false)
    };
    let entries = (gates::identity(2)
        + gates::pauli_x().scale(stokes.s1)
        + gates::pauli_y().scale(stokes.s2)
        + gates::pauli_z().scale(stokes.s3))
    .scale(0.5);
    Reconstruction {
        rho: DensityMatrix::from_parts_unchecked(entries, vec![BOB_POL.to_string()]),
        stokes,
        clipped,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectorCounts {
    pub h: u64,
    pub v: u64,
    pub d: u64,
    pub a: u64,
    pub r: u64,
    pub l: u64,
}

impl DetectorCounts {
    pub fn pair(&self, basis: Basis) -> (u64, u64) {
        match basis {
            Basis::HV => (self.h, self.v),
            Basis::DA => (self.d, self.a),
            Basis::RL => (self.r, self.l),
        }
    }

    pub fn record(&mut self, basis: Basis, plus: bool) {
        self.add(basis, u64::from(plus), u64::from(!plus));
    }

    pub fn add(&mut self, basis: Basis, plus: u64, minus: u64) {
        let (p, m) = match basis {
            Basis::HV => (&mut self.h, &mut self.v),
            Basis::DA => (&mut self.d, &mut self.a),
            Basis::RL => (&mut self.r, &mut self.l),
        };
        *p += plus;
        *m += minus;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsMetadata {
    pub seed: u64,
    pub n_events: u64,
    pub generator: String,
}

/// Coincidence tallies from a sampled run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsRecord {
    pub detectors: DetectorCounts,
    /// BSM outcome tallies in `(H,0), (V,0), (H,1), (V,1)` order. All zero
    /// when the record did not come from the teleportation pipeline.
    pub branch_counts: [u64; 4],
    pub metadata: CountsMetadata,
}

impl CountsRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("counts serialize")
    }
}

/// Splits `n` events evenly across H/V, D/A, R/L; the remainder goes to the
/// leading bases.
pub fn allocate_events(n: u64) -> [(Basis, u64); 3] {
    let base = n / 3;
    let extra = n % 3;
    let mut out = [(Basis::HV, 0), (Basis::DA, 0), (Basis::RL, 0)];
    for (i, slot) in out.iter_mut().enumerate() {
        slot.1 = base + u64::from((i as u64) < extra);
    }
    out
}

/// Draws binomial detector counts for a known single-qubit state, with
/// `n_events` split across the three bases.
pub fn simulate_counts(rho: &DensityMatrix, n_events: u64, seed: u64) -> Result<CountsRecord> {
    if n_events < 1 {
        return Err(Error::NoEvents);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut detectors = DetectorCounts::default();
    for (basis, n) in allocate_events(n_events) {
        let (p_plus, _) = projective_probabilities(rho, basis)?;
        let binomial = Binomial::new(n, p_plus.clamp(0.0, 1.0)).expect("valid binomial");
        let plus = binomial.sample(&mut rng);
        detectors.add(basis, plus, n - plus);
    }
    Ok(CountsRecord {
        detectors,
        branch_counts: [0; 4],
        metadata: CountsMetadata {
            seed,
            n_events,
            generator: GENERATOR_ID.to_string(),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesEstimate {
    pub stokes: StokesVector,
    /// Binomial standard error of each component, `2·√(p(1−p)/n)`.
    pub std_errors: [f64; 3],
}

pub fn estimate_from_counts(counts: &CountsRecord) -> Result<StokesEstimate> {
    let mut values = [0.0; 3];
    let mut errors = [0.0; 3];
    for (slot, basis) in [Basis::DA, Basis::RL, Basis::HV].into_iter().enumerate() {
        let (plus, minus) = counts.detectors.pair(basis);
        let n = plus + minus;
        if n == 0 {
            return Err(Error::EmptyBasis(basis.tag().to_string()));
        }
        let p = plus as f64 / n as f64;
        values[slot] = 2.0 * p - 1.0;
        errors[slot] = 2.0 * (p * (1.0 - p) / n as f64).sqrt();
    }
    Ok(StokesEstimate {
        stokes: StokesVector::new(values[0], values[1], values[2]),
        std_errors: errors,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum FidelityMode {
    Exact,
    Sampled { n_events: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityRow {
    pub label: String,
    pub eta: f64,
    pub phase: f64,
    pub fidelity: f64,
    pub uncertainty: f64,
    /// Sampled mode only: the estimate left the Bloch ball and was clipped.
    pub clipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityReport {
    pub rows: Vec<FidelityRow>,
    pub average: f64,
    pub average_uncertainty: f64,
}

/// Fidelity of each teleported input. Exact mode uses the simulated density
/// matrix; sampled mode reconstructs Bob's state from coincidence counts,
/// seeding input `i` with `seed + i`.
pub fn teleportation_fidelity_report(
    inputs: &[(String, InputQubit)],
    noise: &NoiseModel,
    mode: FidelityMode,
) -> Result<FidelityReport> {
    if inputs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut rows = Vec::with_capacity(inputs.len());
    for (index, (label, input)) in inputs.iter().enumerate() {
        let (fidelity, uncertainty, clipped) = match mode {
            FidelityMode::Exact => (protocol::run_teleport(input, noise)?.fidelity, 0.0, false),
            FidelityMode::Sampled { n_events, seed } => {
                let counts = protocol::monte_carlo_tomography(
                    input,
                    noise,
                    n_events,
                    seed.wrapping_add(index as u64),
                )?;
                let estimate = estimate_from_counts(&counts)?;
                let recon = reconstruct_density(&estimate.stokes);
                let target = input.bloch_vector();
                let fidelity = (0.5 * (1.0 + target.dot(&recon.stokes))).clamp(0.0, 1.0);
                let variance: f64 = target
                    .components()
                    .iter()
                    .zip(estimate.std_errors)
                    .map(|(r, se)| (r * se).powi(2))
                    .sum();
                (fidelity, 0.5 * variance.sqrt(), recon.clipped)
            }
        };
        rows.push(FidelityRow {
            label: label.clone(),
            eta: input.eta(),
            phase: input.phase(),
            fidelity,
            uncertainty,
            clipped,
        });
    }
    let n = rows.len() as f64;
    let average = rows.iter().map(|r| r.fidelity).sum::<f64>() / n;
    let average_uncertainty = rows
        .iter()
        .map(|r| r.uncertainty.powi(2))
        .sum::<f64>()
        .sqrt()
        / n;
    Ok(FidelityReport {
        rows,
        average,
        average_uncertainty,
    })
}
