use crate::compile::ansatz::Ansatz;
use crate::compile::plant::plant_state;
use crate::compile::symmetric::{assemble_symmetric_public, CompilerConfig};
use crate::compile::spsa::spsa_maximize;
use crate::error::{QsaError, Result};
use crate::qsim::{Circuit, StateVector};
use crate::rng::SeedStream;

/// Broadcast challenge: one public unitary embedding a hidden signal
/// eigenvector per party.
#[derive(Clone, Debug)]
pub struct MultipartyChallenge {
    pub n: usize,
    pub public: Circuit,
    pub v_params: Vec<f64>,
    pub layers: usize,
    pub betas: Vec<f64>,
    pub labels: Vec<Vec<u8>>,
    pub delta_hats: Vec<f64>,
    pub delta_target: f64,
}

impl MultipartyChallenge {
    pub fn met_target(&self) -> Vec<bool> {
        self.delta_hats
            .iter()
            .map(|&d| d <= self.delta_target)
            .collect()
    }
}

/// Learn a single V minimizing the aggregated misalignment
/// sum_P (1 - F_P) over all (plant, hidden label) pairs.
pub fn compile_multiparty(
    plants: &[(Circuit, Vec<u8>)],
    config: &CompilerConfig,
) -> Result<MultipartyChallenge> {
    config.validate()?;
    if plants.is_empty() {
        return Err(QsaError::Validation("no parties supplied".into()));
    }
    let n = plants[0].0.n;
    for (i, (p, b)) in plants.iter().enumerate() {
        if p.n != n {
            return Err(QsaError::Validation("plants differ in qubit count".into()));
        }
        if b.len() != n {
            return Err(QsaError::Validation(format!(
                "party {i} label length {} != {n}",
                b.len()
            )));
        }
        for (prev, (_, other)) in plants[..i].iter().enumerate() {
            if other == b {
                return Err(QsaError::Validation(format!(
                    "parties {prev} and {i} share a hidden label"
                )));
            }
        }
    }

    let mut rng = SeedStream::from_u64(config.seed, "compile-multiparty");
    let betas: Vec<f64> = (0..n).map(|_| rng.next_angle()).collect();
    let ansatz = Ansatz::new(n, config.layers);

    let targets: Vec<(StateVector, usize)> = plants
        .iter()
        .map(|(prep, bits)| {
            let index = bits
                .iter()
                .enumerate()
                .fold(0usize, |acc, (q, &bit)| acc | ((bit as usize) << q));
            (plant_state(prep), index)
        })
        .collect();

    // Maximize the negated multi-party loss sum_P (1 - F_P).
    let objective = |params: &[f64]| {
        let mut acc = 0.0;
        for (psi, index) in &targets {
            let state = ansatz.state_from_basis(params, *index);
            acc += 1.0 - psi.inner(&state).norm_sqr();
        }
        -acc
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    for restart in 0..config.restarts {
        let mut sub = rng.child(&format!("restart-{restart}"));
        let theta0: Vec<f64> = (0..ansatz.param_count()).map(|_| sub.next_angle()).collect();
        let (theta, value) = spsa_maximize(objective, theta0, &config.spsa(), &mut sub);
        if best.as_ref().is_none_or(|(_, v)| value > *v) {
            best = Some((theta, value));
        }
    }
    let (v_params, _) = best.expect("restarts >= 1");

    let delta_hats: Vec<f64> = targets
        .iter()
        .map(|(psi, index)| 1.0 - psi.inner(&ansatz.state_from_basis(&v_params, *index)).norm_sqr())
        .collect();

    let public = assemble_symmetric_public(&ansatz, &v_params, &betas);
    Ok(MultipartyChallenge {
        n,
        public,
        v_params,
        layers: config.layers,
        betas,
        labels: plants.iter().map(|(_, b)| b.clone()).collect(),
        delta_hats,
        delta_target: config.delta_target,
    })
}
