//! Optical elements as unitaries and Kraus sets on polarization and path
//! qubits.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{gates, real, Matrix, Operator, PureState, ALICE_PATH, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeamSplitterParams {
    /// Splitting angle; reflection probability is `cos²θ`.
    pub theta: f64,
    /// Relative phase between the spatial modes.
    pub phi: f64,
}

impl BeamSplitterParams {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    pub fn reflection(&self) -> f64 {
        self.theta.cos().powi(2)
    }

    pub fn transmission(&self) -> f64 {
        self.theta.sin().powi(2)
    }
}

/// `e^{iφ/2}·[[cosθ, i·sinθ], [i·sinθ, cosθ]]`.
pub fn beam_splitter_unitary(params: BeamSplitterParams) -> Operator {
    let (s, c) = params.theta.sin_cos();
    let global = Complex64::from_polar(1.0, params.phi / 2.0);
    let is = Complex64::new(0.0, s);
    let m = Matrix::from_row_slice(2, 2, &[real(c), is, is, real(c)]).map(|z| z * global);
    Operator::unitary_unchecked(m)
}

/// `diag(1, e^{iφ})` on a path qubit.
pub fn phase_shifter(phi: f64) -> Operator {
    Operator::unitary_unchecked(Matrix::from_row_slice(
        2,
        2,
        &[ONE, ZERO, ZERO, Complex64::from_polar(1.0, phi)],
    ))
}

/// Variable beam splitter followed by a phase shifter on mode 1, taking
/// `|0⟩` to `√η|0⟩ + e^{iφ}√(1−η)|1⟩`. The beam splitter's `i` is absorbed
/// into the phase shifter.
pub fn variable_beam_splitter(eta: f64, phase: f64) -> Result<Operator> {
    Error::check_unit("eta", eta)?;
    let theta = eta.sqrt().acos();
    let bs = beam_splitter_unitary(BeamSplitterParams::new(theta, 0.0));
    bs.then(&phase_shifter(phase - std::f64::consts::FRAC_PI_2))
}

/// `√η|0⟩ + e^{iφ}√(1−η)|1⟩` on `Apath`.
pub fn path_encode(eta: f64, phase: f64) -> Result<PureState> {
    Error::check_unit("eta", eta)?;
    PureState::qubit(
        ALICE_PATH,
        real(eta.sqrt()),
        Complex64::from_polar((1.0 - eta).sqrt(), phase),
    )
}

/// Polarizing beam splitter as a CNOT, polarization control and path
/// target: `|H,x⟩ ↦ |H,x⟩`, `|V,x⟩ ↦ |V,1−x⟩`.
pub fn pbs_cnot_unitary() -> Operator {
    let perm = [0, 1, 3, 2];
    Operator::unitary_unchecked(Matrix::from_fn(
        4,
        4,
        |i, j| {
            if perm[j] == i {
                ONE
            } else {
                ZERO
            }
        },
    ))
}

/// Half-wave plate with its fast axis at `angle` from H.
pub fn hwp_unitary(angle: f64) -> Operator {
    let (s, c) = (2.0 * angle).sin_cos();
    Operator::unitary_unchecked(Matrix::from_row_slice(
        2,
        2,
        &[real(c), real(s), real(s), real(-c)],
    ))
}

/// Phase damping that multiplies the off-diagonal coherences by exactly `v`:
/// Kraus set `{√((1+v)/2)·I, √((1−v)/2)·Z}`.
pub fn path_dephasing_channel(v: f64) -> Result<Operator> {
    Error::check_unit("visibility", v)?;
    let mut kraus = vec![gates::identity(2).scale(((1.0 + v) / 2.0).sqrt())];
    if v < 1.0 {
        kraus.push(gates::pauli_z().scale(((1.0 - v) / 2.0).sqrt()));
    }
    Ok(Operator::kraus_unchecked(kraus))
}

/// Dephasing with visibility `v` followed by an ideal Hadamard.
pub fn hadamard_path(v: f64) -> Result<Operator> {
    let hadamard = Operator::unitary_unchecked(gates::hadamard());
    if v == 1.0 {
        Error::check_unit("visibility", v)?;
        return Ok(hadamard);
    }
    path_dephasing_channel(v)?.then(&hadamard)
}

/// `ρ ↦ (1−q)·ρ + q·I/2`.
pub fn depolarizing_channel(q: f64) -> Result<Operator> {
    Error::check_unit("depolarizing strength", q)?;
    if q == 0.0 {
        return Ok(Operator::kraus_unchecked(vec![gates::identity(2)]));
    }
    let w = (q / 4.0).sqrt();
    Ok(Operator::kraus_unchecked(vec![
        gates::identity(2).scale((1.0 - 0.75 * q).sqrt()),
        gates::pauli_x().scale(w),
        gates::pauli_y().scale(w),
        gates::pauli_z().scale(w),
    ]))
}
