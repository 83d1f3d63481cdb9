//! Challenge compilation: planted states from provisioning seeds, SPSA
//! alignment of expressive circuits, and the symmetric, asymmetric,
//! multi-party and blockwise public-challenge families.

pub mod ansatz;
pub mod asymmetric;
pub mod blockwise;
pub mod multiparty;
pub mod plant;
pub mod spsa;
pub mod symmetric;

pub use ansatz::Ansatz;
pub use asymmetric::{compile_asymmetric, AsymmetricChallenge, AsymmetricWitness};
pub use blockwise::{compile_blockwise, moment_loss, BlockwiseChallenge};
pub use multiparty::{compile_multiparty, MultipartyChallenge};
pub use plant::{derive_plant_seed, plant_state, seed_to_plant_circuit};
pub use spsa::{spsa_maximize, SpsaConfig};
pub use symmetric::{
    assemble_symmetric_public, closed_form_phase, compile_symmetric, fast_power,
    fast_power_public, fidelity_objective, parse_symmetric_public, CompilerConfig,
    SymmetricChallenge, SymmetricWitness, LDQPE_OVERLAP_THRESHOLD,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::qsim::Circuit;

/// Published challenge file: the public circuit plus open metadata.
/// The witness lives in a separate file and never enters the bundle.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChallengeBundle {
    pub public: Circuit,
    pub meta: BundleMeta,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BundleMeta {
    pub n: usize,
    pub m: usize,
    pub index: u32,
    /// Hex SHA-256 of the canonical public-circuit bytes.
    pub digest: String,
}

impl ChallengeBundle {
    pub fn new(public: Circuit, m: usize, index: u32) -> Self {
        let digest = hex::encode(public.digest());
        let n = public.n;
        Self {
            public,
            meta: BundleMeta {
                n,
                m,
                index,
                digest,
            },
        }
    }

    pub fn verify_digest(&self) -> bool {
        hex::encode(self.public.digest()) == self.meta.digest
    }

    pub fn digest_bytes(&self) -> [u8; 32] {
        self.public.digest()
    }
}

/// A compiled symmetric schedule: per-index plants derived from the master
/// seed, one compiled challenge each.
pub struct SymmetricSchedule {
    pub challenges: Vec<SymmetricChallenge>,
    pub bundles: Vec<ChallengeBundle>,
}

/// Compile k symmetric challenges around plants derived from `s0`.
/// Challenge i uses the HKDF sub-seed at index `first_index + i`.
pub fn compile_symmetric_schedule(
    s0: &[u8],
    first_index: u32,
    k: usize,
    m: usize,
    plant_depth: usize,
    n: usize,
    config: &CompilerConfig,
) -> Result<SymmetricSchedule> {
    let mut challenges = Vec::with_capacity(k);
    let mut bundles = Vec::with_capacity(k);
    for i in 0..k {
        let index = first_index + i as u32;
        let sigma = derive_plant_seed(s0, index)?;
        let prep = seed_to_plant_circuit(&sigma, n, plant_depth);
        let cfg = CompilerConfig {
            seed: config.seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(index as u64 + 1)),
            ..config.clone()
        };
        let ch = compile_symmetric(&prep, &cfg)?;
        bundles.push(ChallengeBundle::new(ch.public.clone(), m, index));
        challenges.push(ch);
    }
    Ok(SymmetricSchedule {
        challenges,
        bundles,
    })
}
