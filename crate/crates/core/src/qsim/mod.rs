//! Deterministic complex state-vector simulation: circuits over a fixed gate
//! alphabet, dense matrix conversion, unitary eigendecomposition, Haar
//! sampling and depolarizing Monte Carlo trajectories.

pub mod circuit;
pub mod gate;
pub mod linalg;
pub mod noise;
pub mod state;

pub use circuit::{apply_circuit, apply_circuit_on, controlled, repeated, Circuit};
pub use gate::{Gate, GateKind};
pub use linalg::{
    circuit_to_matrix, circuit_to_matrix_limited, eig_unitary, eigh, haar_unitary,
    haar_unitary_limited, CMat, UnitaryEigen, DEFAULT_DENSE_LIMIT,
};
pub use noise::{apply_noisy_circuit, NoiseModel};
pub use state::StateVector;

use crate::rng::SeedStream;

/// Sample computational-basis outcomes from |amps|^2, flipping each measured
/// bit independently with probability `readout`. Returns counts indexed by
/// outcome.
pub fn sample_bits(
    state: &StateVector,
    shots: usize,
    readout: f64,
    rng: &mut SeedStream,
) -> Vec<u64> {
    assert!(shots >= 1);
    let n = state.n();
    let dim = 1usize << n;
    let mut cdf = Vec::with_capacity(dim);
    let mut acc = 0.0;
    for a in state.amps() {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    let total = acc;
    let mut counts = vec![0u64; dim];
    for _ in 0..shots {
        let x = rng.next_f64() * total;
        let mut outcome = cdf.partition_point(|&c| c <= x);
        if outcome >= dim {
            outcome = dim - 1;
        }
        if readout > 0.0 {
            for q in 0..n {
                if rng.gen_bool(readout) {
                    outcome ^= 1 << q;
                }
            }
        }
        counts[outcome] += 1;
    }
    counts
}
