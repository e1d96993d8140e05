//! End-to-end teleportation of a path-encoded qubit.
//!
//! Alice holds one photon of a `Φ⁺` pair and writes the input qubit into its
//! spatial mode with a variable beam splitter. Her Bell-state measurement
//! runs on the two degrees of freedom of that one photon:
//!
//! 1. the two path arms interfere at a polarizing beam splitter, whose
//!    finite single-photon visibility `V` dephases the path qubit;
//! 2. the PBS acts as a CNOT with polarization as control and path as target;
//! 3. a half-wave plate at 22.5° applies a Hadamard to the polarization;
//! 4. polarization and path are detected, giving two classical bits.
//!
//! Every outcome is usable, so no event is discarded. Bob applies `I`, `Z`,
//! `X` or `XZ` according to the bits.

mod sampling;

pub use sampling::{monte_carlo_run, monte_carlo_tomography};

use std::f64::consts::{FRAC_PI_2, FRAC_PI_8, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    fidelity_pure, gates, real, DensityMatrix, ElementAction, Operator, PureState, QuantumState,
    ALICE_PATH, ALICE_POL, BOB_POL,
};
use crate::optics;
use crate::source::SourceModel;
use crate::tomography::StokesVector;

/// Subsystem order of every three-qubit protocol state.
pub const LABELS: [&str; 3] = [ALICE_POL, ALICE_PATH, BOB_POL];

/// The qubit to teleport, `√η|0⟩ + e^{iφ}√(1−η)|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputQubit {
    eta: f64,
    phase: f64,
}

impl InputQubit {
    pub fn new(eta: f64, phase: f64) -> Result<Self> {
        Error::check_unit("eta", eta)?;
        if !phase.is_finite() {
            return Err(Error::OutOfRange {
                name: "phase",
                value: phase,
                min: f64::MIN,
                max: f64::MAX,
            });
        }
        Ok(Self { eta, phase })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn alpha(&self) -> Complex64 {
        real(self.eta.sqrt())
    }

    pub fn beta(&self) -> Complex64 {
        Complex64::from_polar((1.0 - self.eta).sqrt(), self.phase)
    }

    /// `α|H⟩ + β|V⟩` on Bob's photon.
    pub fn target_state(&self) -> PureState {
        PureState::qubit(BOB_POL, self.alpha(), self.beta()).expect("normalized by construction")
    }

    pub fn bloch_vector(&self) -> StokesVector {
        let coherence = self.alpha().conj() * self.beta();
        StokesVector::new(
            2.0 * coherence.re,
            2.0 * coherence.im,
            self.alpha().norm_sqr() - self.beta().norm_sqr(),
        )
    }
}

/// The six cardinal states `|0⟩, |1⟩, |±⟩, |R⟩, |L⟩` with their labels.
pub fn cardinal_states() -> Vec<(String, InputQubit)> {
    [
        ("|0>", 1.0, 0.0),
        ("|1>", 0.0, 0.0),
        ("|+>", 0.5, 0.0),
        ("|->", 0.5, PI),
        ("|R>", 0.5, FRAC_PI_2),
        ("|L>", 0.5, -FRAC_PI_2),
    ]
    .into_iter()
    .map(|(label, eta, phase)| (label.to_string(), InputQubit { eta, phase }))
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub werner_p: f64,
    pub path_visibility: f64,
    /// Depolarizing strength on Bob's corrected photon, scaled by the
    /// path-1 weight `1 − η`.
    #[serde(default)]
    pub path1_depolarizing: f64,
}

impl NoiseModel {
    pub fn new(werner_p: f64, path_visibility: f64, path1_depolarizing: f64) -> Result<Self> {
        let model = Self {
            werner_p,
            path_visibility,
            path1_depolarizing,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn ideal() -> Self {
        Self {
            werner_p: 1.0,
            path_visibility: 1.0,
            path1_depolarizing: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        Error::check_unit("werner_p", self.werner_p)?;
        Error::check_unit("path_visibility", self.path_visibility)?;
        Error::check_unit("path1_depolarizing", self.path1_depolarizing)
    }

    pub fn source(&self) -> Result<SourceModel> {
        SourceModel::new(self.werner_p)
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::ideal()
    }
}

/// Alice's two classical bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BsmOutcome {
    /// 0 = H, 1 = V.
    pub pol_bit: u8,
    pub path_bit: u8,
}

impl BsmOutcome {
    /// `(H,0), (V,0), (H,1), (V,1)`.
    pub const ALL: [BsmOutcome; 4] = [
        BsmOutcome::new_const(0, 0),
        BsmOutcome::new_const(1, 0),
        BsmOutcome::new_const(0, 1),
        BsmOutcome::new_const(1, 1),
    ];

    const fn new_const(pol_bit: u8, path_bit: u8) -> Self {
        Self { pol_bit, path_bit }
    }

    pub fn new(pol_bit: u8, path_bit: u8) -> Result<Self> {
        if pol_bit > 1 || path_bit > 1 {
            return Err(Error::OutOfRange {
                name: "outcome bit",
                value: pol_bit.max(path_bit) as f64,
                min: 0.0,
                max: 1.0,
            });
        }
        Ok(Self { pol_bit, path_bit })
    }

    /// Position in [`BsmOutcome::ALL`].
    pub fn index(&self) -> usize {
        usize::from(self.pol_bit) + 2 * usize::from(self.path_bit)
    }
}

impl fmt::Display for BsmOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pol = if self.pol_bit == 0 { 'H' } else { 'V' };
        write!(f, "({pol},{})", self.path_bit)
    }
}

/// Joint three-qubit state after path encoding, ordered `Apol, Apath, Bpol`.
pub fn build_joint_state(input: &InputQubit, source: &SourceModel) -> Result<DensityMatrix> {
    let path = PureState::basis(&[ALICE_PATH], 0)?.to_density();
    let joint = source.state().tensor(&path)?.permuted(&LABELS)?;
    let encoder = optics::variable_beam_splitter(input.eta, input.phase)?;
    joint.apply_on(&encoder, &[ALICE_PATH])
}

/// Pure joint state for an ideal source, `(|H⟩ψ|H⟩ + |V⟩ψ|V⟩)/√2`.
pub fn build_joint_state_pure(input: &InputQubit) -> Result<PureState> {
    let path = PureState::basis(&[ALICE_PATH], 0)?;
    let bell = crate::source::phi_plus();
    let encoder = optics::variable_beam_splitter(input.eta, input.phase)?;
    let [pol_a, path_a, pol_b] = LABELS;
    let amps = (0..8)
        .map(|i| {
            let (a, x, b) = ((i >> 2) & 1, (i >> 1) & 1, i & 1);
            bell.amplitude(2 * a + b) * path.amplitude(x)
        })
        .collect();
    PureState::new(amps, &[pol_a, path_a, pol_b])?.apply_on(&encoder, &[ALICE_PATH])
}

/// Alice's measurement elements in the order they act.
pub fn bsm_actions(visibility: f64) -> Result<Vec<ElementAction>> {
    Ok(vec![
        ElementAction::new(optics::path_dephasing_channel(visibility)?, &[ALICE_PATH])?,
        ElementAction::new(optics::pbs_cnot_unitary(), &[ALICE_POL, ALICE_PATH])?,
        ElementAction::new(optics::hwp_unitary(FRAC_PI_8), &[ALICE_POL])?,
    ])
}

fn require_protocol_labels<S: QuantumState>(state: &S) -> Result<()> {
    if state.labels().iter().map(String::as_str).ne(LABELS) {
        let bad = state
            .labels()
            .iter()
            .zip(LABELS)
            .find(|(l, e)| l.as_str() != *e)
            .map(|(l, _)| l.clone())
            .unwrap_or_else(|| state.labels().join(","));
        return Err(Error::UnknownLabel(bad));
    }
    Ok(())
}

pub fn bsm_evolve(state: &DensityMatrix, visibility: f64) -> Result<DensityMatrix> {
    require_protocol_labels(state)?;
    bsm_actions(visibility)?
        .iter()
        .try_fold(state.clone(), |rho, action| action.apply(&rho))
}

/// Ideal-visibility evolution of a pure joint state.
pub fn bsm_evolve_pure(state: &PureState) -> Result<PureState> {
    require_protocol_labels(state)?;
    let cnot = ElementAction::new(optics::pbs_cnot_unitary(), &[ALICE_POL, ALICE_PATH])?;
    let hwp = ElementAction::new(optics::hwp_unitary(FRAC_PI_8), &[ALICE_POL])?;
    hwp.apply(&cnot.apply(state)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub outcome: BsmOutcome,
    pub probability: f64,
    /// Bob's conditional state; `None` when the outcome is impossible.
    pub bob_state: Option<DensityMatrix>,
}

/// Projects Alice's polarization and path, in [`BsmOutcome::ALL`] order.
pub fn bsm_branches(state: &DensityMatrix) -> Result<[Branch; 4]> {
    require_protocol_labels(state)?;
    let mut branches = Vec::with_capacity(4);
    for outcome in BsmOutcome::ALL {
        let (probability, bob_state) = state.condition(&[
            (ALICE_POL, usize::from(outcome.pol_bit)),
            (ALICE_PATH, usize::from(outcome.path_bit)),
        ])?;
        branches.push(Branch {
            outcome,
            probability,
            bob_state,
        });
    }
    Ok(branches.try_into().expect("four outcomes"))
}

/// Bob's feed-forward: `(H,0) → I`, `(V,0) → Z`, `(H,1) → X`, `(V,1) → XZ`
/// (Z first, then X).
pub fn correction_unitary(outcome: BsmOutcome) -> Operator {
    let m = match (outcome.pol_bit, outcome.path_bit) {
        (0, 0) => gates::identity(2),
        (1, 0) => gates::pauli_z(),
        (0, 1) => gates::pauli_x(),
        _ => gates::pauli_x() * gates::pauli_z(),
    };
    Operator::unitary_unchecked(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchResult {
    pub outcome: BsmOutcome,
    pub probability: f64,
    pub bob_state: Option<DensityMatrix>,
    pub corrected_state: Option<DensityMatrix>,
    pub fidelity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeleportResult {
    pub branches: [BranchResult; 4],
    /// Outcome-averaged state after correction.
    pub corrected_state: DensityMatrix,
    pub fidelity: f64,
}

impl TeleportResult {
    pub fn branch_probs(&self) -> [f64; 4] {
        self.branches.each_ref().map(|b| b.probability)
    }
}

/// Full pipeline for one input: source, encoding, BSM, branch correction and
/// outcome averaging, scored against the input state.
pub fn run_teleport(input: &InputQubit, noise: &NoiseModel) -> Result<TeleportResult> {
    noise.validate()?;
    let joint = build_joint_state(input, &noise.source()?)?;
    let evolved = bsm_evolve(&joint, noise.path_visibility)?;
    let depolarize = optics::depolarizing_channel(noise.path1_depolarizing * (1.0 - input.eta))?;
    let target = input.target_state();

    let mut results = Vec::with_capacity(4);
    for branch in bsm_branches(&evolved)? {
        let corrected = match &branch.bob_state {
            Some(bob) => Some(
                bob.apply_on(&correction_unitary(branch.outcome), &[BOB_POL])?
                    .apply_on(&depolarize, &[BOB_POL])?,
            ),
            None => None,
        };
        let fidelity = corrected
            .as_ref()
            .map(|rho| fidelity_pure(&target, rho))
            .transpose()?;
        results.push(BranchResult {
            outcome: branch.outcome,
            probability: branch.probability,
            bob_state: branch.bob_state,
            corrected_state: corrected,
            fidelity,
        });
    }
    let corrected_state = DensityMatrix::mixture(
        results
            .iter()
            .filter_map(|b| b.corrected_state.as_ref().map(|rho| (b.probability, rho))),
    )?;
    let fidelity = fidelity_pure(&target, &corrected_state)?;
    Ok(TeleportResult {
        branches: results.try_into().expect("four outcomes"),
        corrected_state,
        fidelity,
    })
}
