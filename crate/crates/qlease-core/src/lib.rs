//! Exact desk-scale simulation of quantum secure software leasing over
//! subspace coset states.
//!
//! The crate is organized around the protocol stack:
//!
//! * [`field`] — exact linear algebra over the prime field `Z_q`: canonical
//!   (RREF) subspace bases, duals, membership, affine solving.
//! * [`sim`] — dense complex state vectors over `Z_q^λ`: subspace states,
//!   the Fourier transform over `Z_q^λ`, projective measurements, partial
//!   trace, trace distance, and the gentle-measurement bound.
//! * [`circuits`] — compute-and-compare circuits with lock values and the
//!   searchable subclasses (point, wildcard conjunction, affine tester,
//!   plaintext-equality checker).
//! * [`oracles`] — idealized / toy realizations of the four consumed
//!   primitives: subspace-hiding obfuscation, input-hiding obfuscation,
//!   lockable obfuscation, and a simulation-extractable NIZK.
//! * [`scheme`] — the leasing protocol proper: Setup, Gen, Lessor, Run,
//!   Check, plus the reusable Run variant.
//! * [`harness`] — pirate strategies and the finite-/infinite-term lessor
//!   security experiments with statistical reports.
//! * [`dequant`] — the de-quantumizable circuit family, a toy FHE ideal
//!   functionality, the extraction algorithm, the lease-breaking pirate,
//!   and an oracle-learner baseline.
//!
//! The crate is `no_std` (with `alloc`); IO, CLI, and file formats live in
//! the companion `qlease-cli` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub use num_complex;

pub mod bits;
pub mod circuits;
pub mod codec;
pub mod dequant;
pub mod field;
pub mod harness;
pub mod oracles;
pub mod rng;
pub mod scheme;
pub mod sim;
pub mod toycrypto;

/// Absolute tolerance shared by all complex-amplitude equality assertions.
pub const TOLERANCE: f64 = 1e-9;

/// Hard cap on single-register Hilbert-space dimension (`q^λ`).
pub const SINGLE_REGISTER_CAP: u64 = 1 << 20;

/// Hard cap on bipartite Hilbert-space dimension (`q^{2λ}`).
pub const BIPARTITE_CAP: u64 = 1 << 24;
