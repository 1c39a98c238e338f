//! Numerics for the quantum p-local spin-glass ensemble
//!
//! `H_{n,p} = C(n,p)^{-1/2} Σ_{ī,ā} α[ī;ā] P_ī^ā`, where `ī` runs over ordered
//! p-tuples of qubits, `ā` over Pauli letters {X,Y,Z}^p, and the `α` are i.i.d.
//! disorder coefficients.
//!
//! The crate is organised around the checkable structure of that ensemble:
//!
//! - [`pauli`]: exact Pauli-string algebra (symplectic bit encoding, phases,
//!   traces, dense materialization);
//! - [`model`]: term enumeration, disorder sampling (Gaussian / Rademacher /
//!   sparse Rademacher), Hamiltonian assembly, fast product-state energies;
//! - [`product`]: Bloch geometry, the elementary-symmetric covariance
//!   formula, hemisphere packing nets, threshold counting, coordinate ascent;
//! - [`spectral`]: dense and matrix-free eigenvalue machinery, free energy,
//!   partial traces, Haar states;
//! - [`matchings`]: the trace-of-matchings calculus: exact `Trace_sum`, its
//!   rewiring recursion, the `2d+1` expectation, hypergraph sampling and the
//!   annealed bound `g(β,p)`;
//! - [`moments`]: exact disorder variance per state, Haar averages, the
//!   purity expansion and the adjusted (up-to-p-local) model;
//! - [`lovasz`]: anticommutativity graphs and a small-scale Lovász theta
//!   solver with two-sided bracketing;
//! - [`experiments`]: seeded, reproducible experiment drivers with CSV/JSON
//!   artifacts.
//!
//! All randomness flows through [`rng`]: a counter-based generator keyed by
//! 64-bit seeds, so every result is a pure function of its inputs and seed.

pub mod error;
pub mod experiments;
pub mod lovasz;
pub mod matchings;
pub mod model;
pub mod moments;
pub mod pauli;
pub mod product;
pub mod rng;
pub mod spectral;

pub use error::Error;

/// Qubit count above which dense 2^n x 2^n operators are refused.
pub const DENSE_QUBIT_LIMIT: usize = 12;

/// Qubit count above which even matrix-free Hamiltonian application is refused.
pub const MATRIX_FREE_QUBIT_LIMIT: usize = 20;

/// Binomial coefficient C(n, k) as f64 (exact for the desk-scale arguments used here).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Binomial coefficient as u64; panics on overflow (arguments here stay desk-scale).
pub fn binomial_u64(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).expect("binomial overflow")
}
