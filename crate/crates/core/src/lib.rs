//! Density-matrix simulation of deterministic quantum teleportation of a
//! path-encoded photonic qubit.
//!
//! One photon of a polarization-entangled pair carries the state to be
//! teleported in its spatial mode. A Bell-state measurement across the
//! polarization and path of that single photon has four accessible outcomes,
//! and the partner photon is corrected with a Pauli feed-forward.
//!
//! Subsystems use a fixed global ordering: Alice polarization (`Apol`), Alice
//! path (`Apath`), Bob polarization (`Bpol`). The first label is the most
//! significant bit of a basis index; H and path-0 map to 0.

pub mod cli;
pub mod error;
pub mod hilbert;
pub mod optics;
pub mod protocol;
pub mod source;
pub mod tomography;

pub use error::{Error, Result};
pub use hilbert::{
    fidelity_pure, DensityMatrix, ElementAction, Operator, OperatorKind, PureState, QuantumState,
};
pub use protocol::{run_teleport, BsmOutcome, InputQubit, NoiseModel, TeleportResult};
pub use source::SourceModel;
pub use tomography::{Basis, CountsRecord, StokesVector};
