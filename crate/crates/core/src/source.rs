//! Polarization-entangled photon-pair source with isotropic (Werner) noise.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_8, SQRT_2};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{real, DensityMatrix, PureState, QuantumState, ALICE_POL, BOB_POL, ZERO};
use crate::tomography::{projector_probability, Basis};

/// Tsirelson bound `2√2`.
pub const TSIRELSON: f64 = 2.0 * SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceModel {
    werner_p: f64,
}

impl SourceModel {
    pub fn new(werner_p: f64) -> Result<Self> {
        Error::check_unit("werner_p", werner_p)?;
        Ok(Self { werner_p })
    }

    pub fn ideal() -> Self {
        Self { werner_p: 1.0 }
    }

    /// Werner weight reproducing a target CHSH value, `S / 2√2`.
    pub fn calibrated_to_chsh(s: f64) -> Result<Self> {
        Self::new(s / TSIRELSON)
    }

    pub fn werner_p(&self) -> f64 {
        self.werner_p
    }

    /// Two-photon state on `(Apol, Bpol)`.
    pub fn state(&self) -> DensityMatrix {
        werner_state(self.werner_p).expect("validated on construction")
    }
}

/// `(|HH⟩ + |VV⟩)/√2` on `(Apol, Bpol)`.
pub fn phi_plus() -> PureState {
    let h = real(FRAC_1_SQRT_2);
    PureState::new(vec![h, ZERO, ZERO, h], &[ALICE_POL, BOB_POL]).expect("normalized")
}

/// `p·|Φ⁺⟩⟨Φ⁺| + (1−p)·I/4`.
pub fn werner_state(p: f64) -> Result<DensityMatrix> {
    Error::check_unit("werner_p", p)?;
    let bell = phi_plus().to_density();
    if p == 1.0 {
        return Ok(bell);
    }
    let noise = DensityMatrix::maximally_mixed(&[ALICE_POL, BOB_POL])?;
    if p == 0.0 {
        return Ok(noise);
    }
    DensityMatrix::mixture([(p, &bell), (1.0 - p, &noise)])
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.num_qubits() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            actual: rho.dim(),
        });
    }
    Ok(())
}

/// Joint probability of projecting onto `a ⊗ b`.
fn joint_probability(rho: &DensityMatrix, a: &[Complex64; 2], b: &[Complex64; 2]) -> f64 {
    let ket = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]];
    let m = rho.entries();
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..4 {
        for c in 0..4 {
            acc += ket[r].conj() * m[(r, c)] * ket[c];
        }
    }
    acc.re
}

/// Two-photon correlation visibility `(C_corr − C_anti)/(C_corr + C_anti)`
/// in the H/V or D/A basis.
pub fn basis_visibility(rho: &DensityMatrix, basis: Basis) -> Result<f64> {
    require_two_qubits(rho)?;
    if basis == Basis::RL {
        return Err(Error::UnsupportedBasis(basis.tag().to_string()));
    }
    let (plus, minus) = basis.kets();
    let correlated = joint_probability(rho, &plus, &plus) + joint_probability(rho, &minus, &minus);
    let anti = joint_probability(rho, &plus, &minus) + joint_probability(rho, &minus, &plus);
    Ok((correlated - anti) / (correlated + anti))
}

/// Linear polarizer analyzer angles, in radians from H.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshAngles {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

impl Default for ChshAngles {
    fn default() -> Self {
        Self {
            a: 0.0,
            a_prime: FRAC_PI_4,
            b: FRAC_PI_8,
            b_prime: 3.0 * FRAC_PI_8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshResult {
    /// `E(a,b), E(a,b′), E(a′,b), E(a′,b′)`.
    pub correlations: [f64; 4],
    pub s: f64,
}

fn analyzer(angle: f64) -> ([Complex64; 2], [Complex64; 2]) {
    let (s, c) = angle.sin_cos();
    ([real(c), real(s)], [real(-s), real(c)])
}

/// `E(a,b) = P(++) + P(−−) − P(+−) − P(−+)` for polarizers at `a`, `b`.
pub fn correlation(rho: &DensityMatrix, a: f64, b: f64) -> Result<f64> {
    require_two_qubits(rho)?;
    let (ap, am) = analyzer(a);
    let (bp, bm) = analyzer(b);
    Ok(
        joint_probability(rho, &ap, &bp) + joint_probability(rho, &am, &bm)
            - joint_probability(rho, &ap, &bm)
            - joint_probability(rho, &am, &bp),
    )
}

pub fn chsh(rho: &DensityMatrix, angles: &ChshAngles) -> Result<ChshResult> {
    let correlations = [
        correlation(rho, angles.a, angles.b)?,
        correlation(rho, angles.a, angles.b_prime)?,
        correlation(rho, angles.a_prime, angles.b)?,
        correlation(rho, angles.a_prime, angles.b_prime)?,
    ];
    let [ab, abp, apb, apbp] = correlations;
    Ok(ChshResult {
        correlations,
        s: (ab - abp + apb + apbp).abs(),
    })
}

/// `|E(a,b) − E(a,b′) + E(a′,b) + E(a′,b′)|`.
pub fn chsh_s(rho: &DensityMatrix, angles: &ChshAngles) -> Result<f64> {
    chsh(rho, angles).map(|r| r.s)
}

/// Single-photon marginal probabilities, for diagnostics.
pub fn marginal_probabilities(
    rho: &DensityMatrix,
    label: &str,
    basis: Basis,
) -> Result<(f64, f64)> {
    let reduced = rho.partial_trace(&[label])?;
    let (plus, minus) = basis.kets();
    Ok((
        projector_probability(reduced.entries(), &plus),
        projector_probability(reduced.entries(), &minus),
    ))
}
