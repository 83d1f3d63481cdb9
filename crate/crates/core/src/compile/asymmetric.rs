use serde::{Deserialize, Serialize};

use crate::compile::ansatz::Ansatz;
use crate::compile::plant::plant_state;
use crate::compile::symmetric::{optimize_with_restarts, CompilerConfig};
use crate::error::Result;
use crate::qsim::Circuit;
use crate::rng::SeedStream;

/// Witness for the dual-compiler construction U = V_L V_R^dag.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AsymmetricWitness {
    #[serde(rename = "VL_params")]
    pub vl_params: Vec<f64>,
    #[serde(rename = "VR_params")]
    pub vr_params: Vec<f64>,
    pub layers: usize,
    pub b_l: Vec<u8>,
    pub b_r: Vec<u8>,
    pub delta_l: f64,
    pub delta_r: f64,
}

/// Asymmetric challenge: no exposed diagonal layer, so there is no
/// closed-form phase read-off and no fast-power structure.
#[derive(Clone, Debug)]
pub struct AsymmetricChallenge {
    pub n: usize,
    pub public: Circuit,
    pub witness: AsymmetricWitness,
    pub delta_target: f64,
}

impl AsymmetricChallenge {
    pub fn met_target(&self) -> bool {
        self.witness.delta_l <= self.delta_target && self.witness.delta_r <= self.delta_target
    }
}

/// Run two independent alignment loops against the same plant, then publish
/// gates(V_L) || gates(V_R)^dag.
pub fn compile_asymmetric(plant: &Circuit, config: &CompilerConfig) -> Result<AsymmetricChallenge> {
    config.validate()?;
    let n = plant.n;
    let mut rng = SeedStream::from_u64(config.seed, "compile-asymmetric");
    let psi = plant_state(plant);
    let ansatz = Ansatz::new(n, config.layers);

    let align = |label: &str, rng: &mut SeedStream| -> (Vec<u8>, Vec<f64>, f64) {
        let bits: Vec<u8> = (0..n).map(|_| rng.gen_range(2) as u8).collect();
        let index = bits
            .iter()
            .enumerate()
            .fold(0usize, |acc, (q, &bit)| acc | ((bit as usize) << q));
        let objective = |params: &[f64]| {
            let state = ansatz.state_from_basis(params, index);
            psi.inner(&state).norm_sqr()
        };
        let mut sub = rng.child(label);
        let (params, fidelity) = optimize_with_restarts(objective, &ansatz, config, &mut sub);
        (bits, params, 1.0 - fidelity)
    };

    let (b_l, vl_params, delta_l) = align("left", &mut rng);
    let (b_r, vr_params, delta_r) = align("right", &mut rng);

    // Matrix U = V_L V_R^dag; circuits execute left-to-right, so the
    // V_R^dag gates come first in the list.
    let mut public = Circuit::new(n);
    public.extend(&ansatz.circuit(&vr_params).dagger());
    public.extend(&ansatz.circuit(&vl_params));

    Ok(AsymmetricChallenge {
        n,
        public,
        witness: AsymmetricWitness {
            vl_params,
            vr_params,
            layers: config.layers,
            b_l,
            b_r,
            delta_l,
            delta_r,
        },
        delta_target: config.delta_target,
    })
}
