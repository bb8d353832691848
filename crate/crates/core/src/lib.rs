//! Quantum error correction under static and fluctuating random spin
//! Hamiltonians: state-vector simulation of disordered spin lattices,
//! stabilizer-code fidelities, closed-form lower bounds and chaos diagnostics.

pub mod codes;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod exec;
pub mod hamiltonian;
pub mod harness;
pub mod lattice;
pub mod pauli;
pub mod propagator;
pub mod state;
pub mod theory;

pub use codes::{
    builtin_code, encode_state, error_space_fidelity, verify_nondegeneracy, LogicalState,
    StabilizerCode,
};
pub use config::RunConfig;
pub use error::{Error, Result};
pub use exec::Execution;
pub use lattice::{
    build_lattice, sample_hamiltonian, DisorderParams, HamiltonianSample, LatticeSpec, Topology,
};
pub use pauli::{Budget, Pauli, PauliString};
pub use propagator::{evolve, Method, PropagationSettings, Propagator};
pub use state::StateVector;
