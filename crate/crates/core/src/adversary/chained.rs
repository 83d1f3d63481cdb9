use num_complex::Complex64;
use serde::Serialize;

use crate::compile::SymmetricChallenge;
use crate::error::Result;
use crate::extract::quantize_phase;
use crate::qsim::{circuit_to_matrix, eig_unitary, StateVector, UnitaryEigen};
use crate::rng::SeedStream;

/// Outcome summary for a simulated attack family.
#[derive(Clone, Debug, Serialize)]
pub struct AttackReport {
    pub attack: String,
    pub trials: u64,
    pub successes: u64,
    pub rate: f64,
    pub analytic_bound: f64,
    pub diagnostics: serde_json::Value,
}

/// Haar-random pure state via normalized complex Gaussians.
pub fn haar_state(n: usize, rng: &mut SeedStream) -> StateVector {
    let dim = 1usize << n;
    let amps: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.next_normal(), rng.next_normal()))
        .collect();
    let mut s = StateVector::from_amps(n, amps).expect("length is 2^n");
    s.normalize();
    s
}

/// Chained-QPE eigenstate propagation across a symmetric schedule.
///
/// Each trial starts from a Haar-random state, Born-projects it onto an
/// eigenvector of U_1, then feeds every post-measurement eigenvector into
/// the next instance. Success means every selected eigenphase bucket
/// matches the honest one. The analytic bound is the measured first-step
/// signal-capture probability times the product of successive
/// signal-eigenvector overlaps.
pub fn chained_qpe_attack(
    challenges: &[SymmetricChallenge],
    m: u8,
    trials: u64,
    rng: &mut SeedStream,
) -> Result<AttackReport> {
    assert!(!challenges.is_empty());
    let n = challenges[0].n;

    struct Instance {
        eig: UnitaryEigen,
        honest_bucket: u32,
        signal_index: usize,
    }
    let mut instances = Vec::with_capacity(challenges.len());
    for ch in challenges {
        let u = circuit_to_matrix(&ch.public)?;
        let eig = eig_unitary(&u)?;
        let honest_bucket = quantize_phase(ch.signal_phase(), m);
        let signal_index = eig.argmax_overlap(&ch.signal_eigenvector());
        instances.push(Instance {
            eig,
            honest_bucket,
            signal_index,
        });
    }

    // Successive signal-eigenvector overlaps |<u*_{i+1}|u*_i>|^2.
    let signals: Vec<StateVector> = challenges
        .iter()
        .map(SymmetricChallenge::signal_eigenvector)
        .collect();
    let successive: Vec<f64> = signals
        .windows(2)
        .map(|w| w[0].fidelity(&w[1]))
        .collect();
    let overlap_product: f64 = successive.iter().product();

    let mut successes = 0u64;
    let mut first_hit_sum = 0.0;
    for _ in 0..trials {
        let start = haar_state(n, rng);
        let mut current = start.amps().to_vec();
        let mut all_match = true;
        for (i, inst) in instances.iter().enumerate() {
            let sv = StateVector::from_amps(n, current.clone())?;
            let weights = inst.eig.overlaps(&sv);
            if i == 0 {
                first_hit_sum += weights[inst.signal_index];
            }
            let pick = rng.sample_weighted(&weights);
            let bucket = quantize_phase(inst.eig.phases[pick], m);
            if bucket != inst.honest_bucket {
                all_match = false;
                break;
            }
            current = inst.eig.basis.column(pick);
        }
        if all_match {
            successes += 1;
        }
    }
    let mean_first_hit = first_hit_sum / trials as f64;
    let bound = mean_first_hit * overlap_product;

    Ok(AttackReport {
        attack: "chained-qpe".into(),
        trials,
        successes,
        rate: successes as f64 / trials as f64,
        analytic_bound: bound,
        diagnostics: serde_json::json!({
            "successive_signal_overlaps": successive,
            "overlap_product": overlap_product,
            "mean_first_step_signal_weight": mean_first_hit,
            "haar_benchmark": 1.0 / (1u64 << n) as f64,
        }),
    })
}
