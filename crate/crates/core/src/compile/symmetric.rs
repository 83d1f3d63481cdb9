use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::compile::ansatz::Ansatz;
use crate::compile::plant::plant_state;
use crate::compile::spsa::{spsa_maximize, SpsaConfig};
use crate::error::{QsaError, Result};
use crate::qsim::{Circuit, Gate, GateKind, StateVector};
use crate::rng::SeedStream;

/// Overlap threshold below which the moment-unwrap estimator loses its
/// worst-case recovery guarantee: p0 >= 4 - 2*sqrt(3).
pub const LDQPE_OVERLAP_THRESHOLD: f64 = 4.0 - 2.0 * 1.7320508075688772;

/// Knobs for the challenge compilers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CompilerConfig {
    pub delta_target: f64,
    pub layers: usize,
    pub steps: usize,
    pub restarts: usize,
    pub spsa_a: f64,
    pub spsa_c: f64,
    pub seed: u64,
}

impl Default for CompilerConfig {
    fn default() -> Self {
        Self {
            delta_target: 0.25,
            layers: 6,
            steps: 3000,
            restarts: 2,
            spsa_a: 2.0,
            spsa_c: 0.1,
            seed: 0,
        }
    }
}

impl CompilerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_target > 0.0 && self.delta_target < 1.0) {
            return Err(QsaError::Validation(format!(
                "delta_target {} outside (0, 1)",
                self.delta_target
            )));
        }
        if self.layers == 0 || self.steps == 0 || self.restarts == 0 {
            return Err(QsaError::Validation(
                "layers, steps and restarts must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Whether the overlap target is strong enough for guaranteed
    /// moment-unwrap recovery.
    pub fn ldqpe_compatible(&self) -> bool {
        1.0 - self.delta_target >= LDQPE_OVERLAP_THRESHOLD
    }

    pub fn spsa(&self) -> SpsaConfig {
        SpsaConfig {
            steps: self.steps,
            a: self.spsa_a,
            c: self.spsa_c,
            big_a: None,
        }
    }
}

/// Verifier-side witness for a symmetric challenge. Never published.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymmetricWitness {
    #[serde(rename = "V_params")]
    pub v_params: Vec<f64>,
    pub layers: usize,
    pub betas: Vec<f64>,
    pub b: Vec<u8>,
    pub delta_hat: f64,
}

/// A compiled symmetric challenge U = V D V^dag with its hidden witness.
#[derive(Clone, Debug)]
pub struct SymmetricChallenge {
    pub n: usize,
    pub public: Circuit,
    pub witness: SymmetricWitness,
    pub delta_target: f64,
}

impl SymmetricChallenge {
    /// Achieved-vs-requested overlap status; below-target compiles are
    /// returned rather than erroring, with delta_hat reporting the miss.
    pub fn met_target(&self) -> bool {
        self.witness.delta_hat <= self.delta_target
    }

    pub fn hidden_label_index(&self) -> usize {
        self.witness
            .b
            .iter()
            .enumerate()
            .fold(0usize, |acc, (q, &bit)| acc | ((bit as usize) << q))
    }

    /// The signal eigenvector V|b> of the public unitary.
    pub fn signal_eigenvector(&self) -> StateVector {
        let ansatz = Ansatz::new(self.n, self.witness.layers);
        ansatz.state_from_basis(&self.witness.v_params, self.hidden_label_index())
    }

    /// Closed-form signal eigenphase of this challenge.
    pub fn signal_phase(&self) -> f64 {
        let bits: Vec<bool> = self.witness.b.iter().map(|&x| x != 0).collect();
        closed_form_phase(&bits, &self.witness.betas).expect("witness lengths agree")
    }
}

/// theta(b) = (1/2) sum_q (2 b_q - 1) beta_q, reduced mod 2pi.
///
/// Follows Rz(t) = diag(e^{-it/2}, e^{+it/2}): bit 0 picks up -beta/2,
/// bit 1 picks up +beta/2.
pub fn closed_form_phase(b: &[bool], betas: &[f64]) -> Result<f64> {
    if b.len() != betas.len() {
        return Err(QsaError::Validation(format!(
            "label length {} != angle count {}",
            b.len(),
            betas.len()
        )));
    }
    let half_sum: f64 = b
        .iter()
        .zip(betas)
        .map(|(&bit, &beta)| if bit { beta } else { -beta } / 2.0)
        .sum();
    Ok(half_sum.rem_euclid(TAU))
}

/// |<psi| V(params) |b>|^2 evaluated exactly from the state vector.
pub fn fidelity_objective(plant: &Circuit, b: usize, v_params: &[f64], ansatz: &Ansatz) -> f64 {
    let psi = plant_state(plant);
    let aligned = ansatz.state_from_basis(v_params, b);
    psi.inner(&aligned).norm_sqr()
}

/// Assemble the public circuit for U = V D V^dag. Circuits execute
/// left-to-right, so the gate list runs dagger(V) first, then the Rz
/// diagonal, then V; the composite matrix is V.D.V^dag and V|b> is an
/// eigenvector of it.
pub fn assemble_symmetric_public(ansatz: &Ansatz, v_params: &[f64], betas: &[f64]) -> Circuit {
    let v = ansatz.circuit(v_params);
    let mut public = Circuit::new(ansatz.n);
    public.extend(&v.dagger());
    for (q, &beta) in betas.iter().enumerate() {
        public.push(Gate::rz(q, beta));
    }
    public.extend(&v);
    public
}

/// Compile a symmetric challenge around a planted state.
///
/// Samples the hidden label b uniformly and the diagonal angles uniformly
/// in [-pi, pi), then aligns V|b> with |psi> by SPSA across restarts. The
/// best restart is kept even when it misses the target.
pub fn compile_symmetric(plant: &Circuit, config: &CompilerConfig) -> Result<SymmetricChallenge> {
    config.validate()?;
    let n = plant.n;
    let mut rng = SeedStream::from_u64(config.seed, "compile-symmetric");
    let b_bits: Vec<u8> = (0..n).map(|_| rng.gen_range(2) as u8).collect();
    let b_index = b_bits
        .iter()
        .enumerate()
        .fold(0usize, |acc, (q, &bit)| acc | ((bit as usize) << q));
    let betas: Vec<f64> = (0..n).map(|_| rng.next_angle()).collect();

    let ansatz = Ansatz::new(n, config.layers);
    let psi = plant_state(plant);
    let objective = |params: &[f64]| {
        let state = ansatz.state_from_basis(params, b_index);
        psi.inner(&state).norm_sqr()
    };
    let (v_params, fidelity) = optimize_with_restarts(objective, &ansatz, config, &mut rng);

    let public = assemble_symmetric_public(&ansatz, &v_params, &betas);
    Ok(SymmetricChallenge {
        n,
        public,
        witness: SymmetricWitness {
            v_params,
            layers: config.layers,
            betas,
            b: b_bits,
            delta_hat: 1.0 - fidelity,
        },
        delta_target: config.delta_target,
    })
}

pub(crate) fn optimize_with_restarts<F: Fn(&[f64]) -> f64>(
    objective: F,
    ansatz: &Ansatz,
    config: &CompilerConfig,
    rng: &mut SeedStream,
) -> (Vec<f64>, f64) {
    let mut best: Option<(Vec<f64>, f64)> = None;
    for restart in 0..config.restarts {
        let mut sub = rng.child(&format!("restart-{restart}"));
        let theta0: Vec<f64> = (0..ansatz.param_count()).map(|_| sub.next_angle()).collect();
        let (theta, value) = spsa_maximize(&objective, theta0, &config.spsa(), &mut sub);
        if best.as_ref().is_none_or(|(_, v)| value > *v) {
            best = Some((theta, value));
        }
        if best.as_ref().unwrap().1 >= 1.0 - config.delta_target {
            break;
        }
    }
    best.expect("restarts >= 1")
}

/// Locate the diagonal layer of a published symmetric circuit. The gate
/// count is 2g + n with the n middle Rz rotations (one per qubit, in qubit
/// order) sitting between the dagger(V) and V halves. Returns (the gate
/// offset of the diagonal layer, the betas).
pub fn parse_symmetric_public(public: &Circuit) -> Result<(usize, Vec<f64>)> {
    let n = public.n;
    let total = public.gates.len();
    if total < n || !(total - n).is_multiple_of(2) {
        return Err(QsaError::Validation(
            "circuit does not have symmetric V-D-Vdag gate structure".into(),
        ));
    }
    let g = (total - n) / 2;
    let mut betas = Vec::with_capacity(n);
    for q in 0..n {
        let gate = &public.gates[g + q];
        if gate.kind != GateKind::Rz || gate.targets != vec![q] {
            return Err(QsaError::Validation(format!(
                "expected middle Rz layer on qubit {q}, found {} on {:?}",
                gate.kind.name(),
                gate.targets
            )));
        }
        betas.push(gate.params[0]);
    }
    Ok((g, betas))
}

/// Circuit for U^(2^j) via the fast-power identity: only the diagonal
/// angles rescale, reduced mod 4pi because Rz has matrix period 4pi (a
/// 2pi reduction flips a sign that becomes observable under control).
/// Gate count is independent of j.
pub fn fast_power(ch: &SymmetricChallenge, j: u32) -> Circuit {
    fast_power_public(&ch.public, j).expect("own public circuit parses")
}

pub fn fast_power_public(public: &Circuit, j: u32) -> Result<Circuit> {
    let (offset, betas) = parse_symmetric_public(public)?;
    let mut out = public.clone();
    let scale = 2.0f64.powi(j as i32);
    for (q, &beta) in betas.iter().enumerate() {
        out.gates[offset + q] = Gate::rz(q, (scale * beta).rem_euclid(2.0 * TAU));
    }
    Ok(out)
}
