//! Stabilizer Rényi entropy of spin-chain ground states.
//!
//! The crate builds three one-dimensional Hamiltonians (dimerized XX,
//! cluster-Ising, transverse-field Ising), finds their ground states by exact
//! diagonalization, and evaluates the stabilizer Rényi entropy `M_α` of those
//! states exactly or by Monte Carlo sampling of Pauli strings.

pub mod basis_opt;
pub mod duality;
pub mod eigensolver;
pub mod error;
pub mod harness;
pub mod magic;
pub mod models;
pub mod par;
pub mod pauli;
pub mod sector;
pub mod state;

#[cfg(test)]
mod testing;

pub use basis_opt::{minimize_basis_magic, rotated_sre, BasisSearch, LocalBasis, OptimizerOptions};
pub use duality::{
    delta_magic, dual_parameter, verify_spectral_duality, DualPairResult, DualityOptions, SpectralReport,
};
pub use eigensolver::{ground_state, low_spectrum, GroundStateResult, SolverMethod, SolverOptions};
pub use error::{Error, Result};
pub use magic::{
    pauli_spectrum_transform, sre, sre_direct, sre_exhaustive, sre_monte_carlo, ChainOptions, PauliSpectrum,
    SreEstimate, SreMethod, SreOptions,
};
pub use models::{
    apply_hamiltonian, build_model, symmetry_sector, Boundary, HamiltonianOperator, ModelKind, ModelSpec, Term,
};
pub use pauli::{enumerate_paulis, pauli_apply, pauli_expectation, Letter, PauliString};
pub use sector::Sector;
pub use state::{StateVector, C64};
