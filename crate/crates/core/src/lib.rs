//! Spectral challenge-response authentication over simulated quantum
//! endpoints: planted-state compilation of public unitary challenges,
//! eigenphase feature extraction under three evaluation regimes,
//! transcript-bound key derivation with mutual confirmation, attack
//! simulations and calibration cost models, and the wire protocol that
//! ties the verifier and prover together.

pub mod adversary;
pub mod compile;
pub mod error;
pub mod extract;
pub mod keyring;
pub mod protocol;
pub mod qsim;
pub mod rng;

pub use error::{QsaError, Result};
