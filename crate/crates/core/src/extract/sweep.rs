use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compile::{
    compile_asymmetric, compile_symmetric, derive_plant_seed, plant_state, seed_to_plant_circuit,
    CompilerConfig,
};
use crate::error::Result;
use crate::extract::{ldqpe, quantize_phase, EvalConfig};
use crate::qsim::{circuit_to_matrix, NoiseModel};
use crate::rng::SeedStream;

/// Which compiled family the sweep exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Symmetric,
    Asymmetric,
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub n: usize,
    pub m: u8,
    pub reps: usize,
    pub shots: u32,
    pub p2_grid: Vec<f64>,
    pub plant_depth: usize,
    pub family: Family,
    pub compiler: CompilerConfig,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SweepRow {
    pub p2: f64,
    pub accuracy: f64,
    pub reps: usize,
}

/// Bucket accuracy of noisy LDQPE against per-instance ground truth,
/// per two-qubit depolarizing rate. Each rep compiles a fresh instance
/// around its own scheduled plant; ground truth is the closed-form phase
/// for symmetric instances and the dense argmax-overlap bucket for
/// asymmetric ones.
pub fn noise_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    let s0: Vec<u8> = {
        let mut rng = SeedStream::from_u64(config.seed, "sweep-s0");
        let mut s = vec![0u8; 32];
        rng.fill_bytes(&mut s);
        s
    };
    let instances: Vec<(crate::qsim::Circuit, crate::qsim::StateVector, u32)> = (0..config.reps)
        .into_par_iter()
        .map(|rep| {
            let sigma = derive_plant_seed(&s0, rep as u32).expect("seed length fixed");
            let prep = seed_to_plant_circuit(&sigma, config.n, config.plant_depth);
            let psi = plant_state(&prep);
            let cc = CompilerConfig {
                seed: config.seed ^ ((rep as u64 + 1) * 0x9e37_79b9),
                ..config.compiler.clone()
            };
            match config.family {
                Family::Symmetric => {
                    let ch = compile_symmetric(&prep, &cc).expect("config validated");
                    let truth = quantize_phase(ch.signal_phase(), config.m);
                    (ch.public, psi, truth)
                }
                Family::Asymmetric => {
                    let ch = compile_asymmetric(&prep, &cc).expect("config validated");
                    let u = circuit_to_matrix(&ch.public).expect("within dense limit");
                    let truth = crate::extract::extract_m(&u, &psi, config.m)
                        .expect("unitary by construction")
                        .bucket;
                    (ch.public, psi, truth)
                }
            }
        })
        .collect();

    let jobs: Vec<(usize, usize)> = (0..config.p2_grid.len())
        .flat_map(|pi| (0..config.reps).map(move |rep| (pi, rep)))
        .collect();
    let hits: Vec<(usize, bool)> = jobs
        .into_par_iter()
        .map(|(pi, rep)| {
            let p2 = config.p2_grid[pi];
            let (public, psi, truth) = &instances[rep];
            let noise = NoiseModel::depolarizing(p2);
            let eval = EvalConfig::sampled(config.shots, noise);
            let mut rng =
                SeedStream::from_u64(config.seed, &format!("sweep-eval-{pi}-{rep}"));
            let out = ldqpe(public, psi, config.m, &eval, &mut rng).expect("dims agree");
            (pi, out.feature.bucket == *truth)
        })
        .collect();

    let mut rows: Vec<SweepRow> = config
        .p2_grid
        .iter()
        .map(|&p2| SweepRow {
            p2,
            accuracy: 0.0,
            reps: config.reps,
        })
        .collect();
    for (pi, hit) in hits {
        if hit {
            rows[pi].accuracy += 1.0 / config.reps as f64;
        }
    }
    Ok(rows)
}

/// CSV rows matching the (p2, accuracy) sweep axes.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("p2,accuracy,reps\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.p2, r.accuracy, r.reps));
    }
    out
}
