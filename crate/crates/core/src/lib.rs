//! Exact diagonalization of spin-1/2 XYZ networks with weakly coupled
//! surface spins.
//!
//! The crate is `no_std` (it needs `alloc`). It covers:
//!
//! - [`network`]: spin networks, validation and symmetry classification,
//! - [`geometry`]: the catalog of reference networks,
//! - [`basis`] and [`operator`]: bit-encoded sector bases and sparse
//!   Hamiltonians,
//! - [`spectrum`] and [`lanczos`]: dense and Lanczos eigensolvers,
//! - [`entanglement`]: partial traces, concurrence, tangles, fidelity,
//! - [`effective`]: the second-order effective surface Hamiltonian.
//!
//! Site `i` of a network is bit `i` of a basis label; a set bit is spin up
//! (σᶻ = +1). Pauli matrices carry no factor 1/2.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod basis;
pub mod effective;
pub mod entanglement;
pub mod error;
pub mod geometry;
pub mod lanczos;
pub mod linalg;
pub mod network;
pub mod operator;
pub mod spectrum;

pub use basis::{build_basis, SectorBasis, SectorConstraint};
pub use effective::{
    effective_couplings, effective_density, effective_ground, validate_effective,
    EffectiveHamiltonian, Method, ValidationPoint, ValidationReport,
};
pub use entanglement::{
    concurrence, fidelity, make_z0, reduce, reduce_ground, residual_tangle, tangle_single,
    trace_distance, DensityMatrix,
};
pub use error::{Error, Result, Violation};
pub use geometry::{make_geometry, GeometryParams, Sign, CATALOG};
pub use network::{
    classify_symmetry, Axis, Bond, Coupling, Site, SiteKind, SpinNetwork, SymmetryClass,
    SymmetryTag,
};
pub use operator::{assemble_hamiltonian, LinearOperator, SparseOperator};
pub use spectrum::{
    dense_spectrum, ground_and_gap, ground_and_gap_with, lanczos_spectrum, NetworkSpectrum,
    SolverOptions, SpectrumResult,
};
