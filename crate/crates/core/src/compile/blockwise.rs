use crate::compile::ansatz::Ansatz;
use crate::compile::spsa::spsa_maximize;
use crate::compile::symmetric::{optimize_with_restarts, CompilerConfig};
use crate::error::{QsaError, Result};
use crate::qsim::{apply_circuit, apply_circuit_on, Circuit, Gate, StateVector};
use crate::rng::SeedStream;

/// Moment powers probed by the stage-2 loss.
pub const MOMENT_POWERS: [usize; 4] = [1, 2, 4, 8];
/// Nonincreasing weights paired with MOMENT_POWERS.
pub const MOMENT_WEIGHTS: [f64; 4] = [1.0, 0.5, 0.25, 0.125];

/// Warm-start compiled public circuit: per-block brickwork stages glued by
/// a shallow cross-block entangler layer.
#[derive(Clone, Debug)]
pub struct BlockwiseChallenge {
    pub n: usize,
    pub blocksize: usize,
    pub public: Circuit,
    pub block_overlaps: Vec<f64>,
    pub global_overlap: f64,
    pub moment_loss: f64,
    pub delta_target: f64,
}

impl BlockwiseChallenge {
    pub fn met_target(&self) -> bool {
        self.global_overlap >= 1.0 - self.delta_target
    }
}

/// Moment loss sum_t w_t (1 - |Z_t|^2) with Z_t = <psi|U^t|psi>.
pub fn moment_loss(u: &Circuit, psi: &StateVector) -> Result<f64> {
    let mut state = psi.clone();
    let mut loss = 0.0;
    let max_t = *MOMENT_POWERS.iter().max().unwrap();
    for t in 1..=max_t {
        state = apply_circuit(&state, u)?;
        if let Some(pos) = MOMENT_POWERS.iter().position(|&p| p == t) {
            let z = psi.inner(&state);
            loss += MOMENT_WEIGHTS[pos] * (1.0 - z.norm_sqr());
        }
    }
    Ok(loss)
}

fn block_local_subcircuits(plant: &Circuit, blocksize: usize) -> Result<Vec<Circuit>> {
    let nblocks = plant.n / blocksize;
    let mut subs: Vec<Circuit> = (0..nblocks).map(|_| Circuit::new(blocksize)).collect();
    for g in &plant.gates {
        let block = g.targets[0] / blocksize;
        if g.targets.iter().any(|&t| t / blocksize != block) {
            return Err(QsaError::Validation(
                "plant circuit is not a tensor product across blocks".into(),
            ));
        }
        let mut local = g.clone();
        for t in &mut local.targets {
            *t -= block * blocksize;
        }
        subs[block].push(local);
    }
    Ok(subs)
}

/// Cross-block entangler layer: for each block boundary, Rxx on the edge
/// pair followed by Rx and Rz on both edge qubits (3 angles per boundary).
fn inter_block_gates(n: usize, blocksize: usize, params: &[f64]) -> Vec<Gate> {
    let nblocks = n / blocksize;
    let mut gates = Vec::new();
    for boundary in 0..nblocks - 1 {
        let hi = (boundary + 1) * blocksize - 1;
        let lo = (boundary + 1) * blocksize;
        let phi_xx = params[3 * boundary];
        let phi_x = params[3 * boundary + 1];
        let phi_z = params[3 * boundary + 2];
        gates.push(Gate::rxx(hi, lo, phi_xx));
        gates.push(Gate::rx(hi, phi_x));
        gates.push(Gate::rx(lo, phi_x));
        gates.push(Gate::rz(hi, phi_z));
        gates.push(Gate::rz(lo, phi_z));
    }
    gates
}

fn assemble(
    n: usize,
    blocksize: usize,
    ansatz: &Ansatz,
    block_params: &[Vec<f64>],
    inter_params: &[f64],
) -> Circuit {
    let mut public = Circuit::new(n);
    for (k, params) in block_params.iter().enumerate() {
        let local = ansatz.circuit(params);
        for g in &local.gates {
            let mut shifted = g.clone();
            for t in &mut shifted.targets {
                *t += k * blocksize;
            }
            public.push(shifted);
        }
    }
    for g in inter_block_gates(n, blocksize, inter_params) {
        public.push(g);
    }
    public
}

/// Two-stage warm-start compile for product-structured plants.
///
/// Stage 1 aligns each block unitary with its block state independently;
/// stage 2 freezes the blocks, adds the cross-block entangler layer and
/// minimizes the moment loss to re-concentrate the planted state onto a
/// single eigencomponent of the glued circuit.
pub fn compile_blockwise(
    plant: &Circuit,
    blocksize: usize,
    config: &CompilerConfig,
) -> Result<BlockwiseChallenge> {
    config.validate()?;
    let n = plant.n;
    if blocksize == 0 || !n.is_multiple_of(blocksize) {
        return Err(QsaError::Validation(format!(
            "{n} qubits not divisible into blocks of {blocksize}"
        )));
    }
    let nblocks = n / blocksize;
    let subs = block_local_subcircuits(plant, blocksize)?;
    let ansatz = Ansatz::new(blocksize, config.layers);
    let delta_block = 1.0 - (1.0 - config.delta_target).powf(1.0 / nblocks as f64);
    let block_config = CompilerConfig {
        delta_target: delta_block,
        ..config.clone()
    };

    let rng = SeedStream::from_u64(config.seed, "compile-blockwise");
    let mut block_params = Vec::with_capacity(nblocks);
    let mut block_overlaps = Vec::with_capacity(nblocks);
    for (k, sub) in subs.iter().enumerate() {
        let psi_blk = apply_circuit(&StateVector::zero(blocksize), sub)?;
        let objective = |params: &[f64]| {
            let mut state = psi_blk.clone();
            ansatz.apply(params, &mut state);
            psi_blk.inner(&state).norm_sqr()
        };
        let mut sub_rng = rng.child(&format!("block-{k}"));
        let (params, overlap) =
            optimize_with_restarts(objective, &ansatz, &block_config, &mut sub_rng);
        block_params.push(params);
        block_overlaps.push(overlap);
    }

    // Stage 2: inter-block entangler against the moment loss.
    let psi = {
        let mut s = StateVector::zero(n);
        for (k, sub) in subs.iter().enumerate() {
            let positions: Vec<usize> = (0..blocksize).map(|q| k * blocksize + q).collect();
            apply_circuit_on(&mut s, sub, &positions)?;
        }
        s
    };
    let inter_count = 3 * (nblocks - 1);
    let objective = |inter: &[f64]| {
        let circuit = assemble(n, blocksize, &ansatz, &block_params, inter);
        -moment_loss(&circuit, &psi).expect("assembled circuit matches register")
    };
    let mut stage2 = rng.child("inter");
    let theta0: Vec<f64> = (0..inter_count).map(|_| 0.2 * stage2.next_angle()).collect();
    let stage2_cfg = crate::compile::spsa::SpsaConfig {
        steps: config.steps.min(600),
        a: config.spsa_a,
        c: config.spsa_c,
        big_a: None,
    };
    let (inter_params, neg_loss) = spsa_maximize(objective, theta0, &stage2_cfg, &mut stage2);

    let public = assemble(n, blocksize, &ansatz, &block_params, &inter_params);
    let final_state = apply_circuit(&psi, &public)?;
    let global_overlap = psi.inner(&final_state).norm_sqr();
    Ok(BlockwiseChallenge {
        n,
        blocksize,
        public,
        block_overlaps,
        global_overlap,
        moment_loss: -neg_loss,
        delta_target: config.delta_target,
    })
}
