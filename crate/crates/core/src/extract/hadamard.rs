use crate::error::Result;
use crate::extract::{EvalConfig, MomentEstimate, MomentMode};
use crate::qsim::noise::apply_random_pauli;
use crate::qsim::{controlled, Circuit, Gate, NoiseModel, StateVector};
use crate::rng::SeedStream;

/// Ancilla-plus-system Hadamard-test circuit for one moment part.
/// H on the ancilla (qubit 0), the controlled power block, an optional
/// S^dag for the imaginary part, then the closing H. With the Sdg
/// convention diag(1, -i), Pr(0) - Pr(1) equals Re<psi|U|psi> for the
/// plain circuit and Im<psi|U|psi> with the phase gate inserted.
pub fn hadamard_test_circuit(upow: &Circuit, imag: bool) -> Circuit {
    let mut c = Circuit::new(upow.n + 1);
    c.push(Gate::h(0));
    c.extend(&controlled(upow));
    if imag {
        c.push(Gate::sdg(0));
    }
    c.push(Gate::h(0));
    c
}

/// |0>_ancilla tensor |psi> with the ancilla at qubit 0.
fn embed_with_ancilla(psi: &StateVector) -> StateVector {
    psi.embed(psi.n() + 1, &(1..=psi.n()).collect::<Vec<_>>())
        .expect("ancilla embedding is dimension-consistent")
}

fn ancilla_expectation(state: &StateVector) -> f64 {
    // Pr(0) - Pr(1) on qubit 0
    1.0 - 2.0 * state.prob_one(0)
}

/// Exact complex moment <psi|U|psi> evaluated through the two Hadamard-test
/// circuits with amplitude-exact ancilla expectations (no sampling, no
/// noise).
pub fn exact_moment(upow: &Circuit, psi: &StateVector, j: u32) -> Result<MomentEstimate> {
    let init = embed_with_ancilla(psi);
    let re_state = crate::qsim::apply_circuit(&init, &hadamard_test_circuit(upow, false))?;
    let im_state = crate::qsim::apply_circuit(&init, &hadamard_test_circuit(upow, true))?;
    Ok(MomentEstimate {
        j,
        re: ancilla_expectation(&re_state),
        im: ancilla_expectation(&im_state),
        shots: 0,
    })
}

/// Trajectory sampler over a fixed circuit. Noiseless prefix states are
/// shared across trajectories: a trajectory only simulates gates from its
/// first Pauli insertion onward, and error positions are drawn by
/// geometric skipping, which is distributionally identical to per-gate
/// Bernoulli sampling.
pub(crate) struct TrajectorySampler {
    circuit: Circuit,
    prefixes: Vec<StateVector>,
    rates: Vec<f64>,
    noiseless_p1: f64,
}

impl TrajectorySampler {
    pub fn new(circuit: Circuit, init: &StateVector, noise: &NoiseModel) -> Self {
        let mut prefixes = Vec::with_capacity(circuit.gates.len() + 1);
        let mut state = init.clone();
        prefixes.push(state.clone());
        for g in &circuit.gates {
            g.apply_to(&mut state);
            prefixes.push(state.clone());
        }
        let rates = circuit
            .gates
            .iter()
            .map(|g| {
                if g.targets.len() == 1 {
                    noise.p1
                } else {
                    noise.p2
                }
            })
            .collect();
        let noiseless_p1 = prefixes.last().unwrap().prob_one(0);
        Self {
            circuit,
            prefixes,
            rates,
            noiseless_p1,
        }
    }

    /// First error position at or after `from`, if any.
    fn sample_error_position(&self, from: usize, rng: &mut SeedStream) -> Option<usize> {
        let mut pos = from;
        let total = self.rates.len();
        while pos < total {
            let rate = self.rates[pos];
            // run of equal rates starting at pos
            let mut end = pos + 1;
            while end < total && self.rates[end] == rate {
                end += 1;
            }
            if rate > 0.0 {
                let skip = if rate >= 1.0 {
                    0
                } else {
                    let u = rng.next_f64();
                    ((1.0 - u).ln() / (1.0 - rate).ln()).floor() as usize
                };
                if pos + skip < end {
                    return Some(pos + skip);
                }
            }
            pos = end;
        }
        None
    }

    /// Ancilla Pr(1) for a fresh trajectory.
    pub fn sample_ancilla_p1(&self, rng: &mut SeedStream) -> f64 {
        let Some(first) = self.sample_error_position(0, rng) else {
            return self.noiseless_p1;
        };
        let mut state = self.prefixes[first + 1].clone();
        apply_random_pauli(&mut state, &self.circuit.gates[first].targets, rng);
        let mut pos = first + 1;
        while pos < self.circuit.gates.len() {
            match self.sample_error_position(pos, rng) {
                Some(err) => {
                    for g in &self.circuit.gates[pos..=err] {
                        g.apply_to(&mut state);
                    }
                    apply_random_pauli(&mut state, &self.circuit.gates[err].targets, rng);
                    pos = err + 1;
                }
                None => {
                    for g in &self.circuit.gates[pos..] {
                        g.apply_to(&mut state);
                    }
                    break;
                }
            }
        }
        state.prob_one(0)
    }
}

/// Estimate one part (Re or Im) of a moment from `shots` trajectory
/// samples with readout error on the ancilla.
fn sampled_part(
    upow: &Circuit,
    psi: &StateVector,
    imag: bool,
    shots: u32,
    noise: &NoiseModel,
    rng: &mut SeedStream,
) -> f64 {
    let circuit = hadamard_test_circuit(upow, imag);
    let init = embed_with_ancilla(psi);
    let sampler = TrajectorySampler::new(circuit, &init, noise);
    let mut ones = 0u64;
    for _ in 0..shots {
        let p1 = sampler.sample_ancilla_p1(rng);
        let mut bit = rng.gen_bool(p1);
        if noise.readout > 0.0 && rng.gen_bool(noise.readout) {
            bit = !bit;
        }
        if bit {
            ones += 1;
        }
    }
    1.0 - 2.0 * ones as f64 / shots as f64
}

/// Hadamard-test estimate of Z_j = <psi|U^(2^j)|psi> given the circuit for
/// the power block. Exact mode computes ancilla expectations from
/// amplitudes; sampled mode runs one noise trajectory per shot.
pub fn hadamard_test_moment(
    upow: &Circuit,
    psi: &StateVector,
    j: u32,
    config: &EvalConfig,
    rng: &mut SeedStream,
) -> Result<MomentEstimate> {
    match config.mode {
        MomentMode::Exact => exact_moment(upow, psi, j),
        MomentMode::Sampled { shots } => {
            assert!(shots >= 1);
            let re = sampled_part(upow, psi, false, shots, &config.noise, rng);
            let im = sampled_part(upow, psi, true, shots, &config.noise, rng);
            Ok(MomentEstimate {
                j,
                re,
                im,
                shots: 2 * shots as u64,
            })
        }
    }
}
