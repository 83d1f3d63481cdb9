//! Protocol soak: noisy-regime prover sessions at the reference sweep
//! scale. The longest-running integration test after the acceptance
//! noise sweep.

use std::os::unix::net::UnixStream;

use rayon::prelude::*;

use qsa::compile::CompilerConfig;
use qsa::extract::{EvalConfig, Regime};
use qsa::protocol::{prover_session, verifier_session, ProverConfig, VerifierConfig};
use qsa::qsim::NoiseModel;
use qsa::rng::SeedStream;

/// Noisy evaluation end to end: at p2 = 1e-3 and n = m = 8 with k = 4
/// challenges, at least 90% of 20 sessions accept (the low-noise plateau
/// scaled down to k = 4 by per-challenge independence).
#[test]
fn noisy_prover_sessions_accept_at_low_noise() {
    let s0 = [88u8; 32];
    let vcfg = VerifierConfig {
        n: 8,
        m: 8,
        k: 4,
        plant_depth: 4,
        schedule_id: 9,
        compiler: CompilerConfig {
            delta_target: 0.03,
            layers: 8,
            steps: 5000,
            restarts: 3,
            spsa_a: 2.0,
            spsa_c: 0.1,
            seed: 0,
        },
        key_bits: 256,
        max_attempts: 1,
    };
    let pcfg = ProverConfig {
        regime: Regime::Q,
        eval: EvalConfig::sampled(4000, NoiseModel::depolarizing(1e-3)),
    };
    let accepts: usize = (0..20u64)
        .into_par_iter()
        .filter(|&session| {
            let (mut a, mut b) = UnixStream::pair().unwrap();
            let cfg = vcfg.clone();
            let v = std::thread::spawn(move || {
                let mut rng = SeedStream::from_u64(session, "soak-v");
                verifier_session(&mut a, &cfg, &s0, &mut rng).unwrap()
            });
            let p = std::thread::spawn(move || {
                let mut rng = SeedStream::from_u64(session, "soak-p");
                prover_session(&mut b, &s0, &pcfg, &mut rng).unwrap()
            });
            let (vo, po) = (v.join().unwrap(), p.join().unwrap());
            vo.accepted && po.accepted
        })
        .count();
    assert!(accepts >= 18, "only {accepts}/20 noisy sessions accepted");
    println!("noisy sessions accepted: {accepts}/20");
}
