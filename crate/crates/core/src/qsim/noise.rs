use crate::error::Result;
use crate::qsim::circuit::{apply_circuit, Circuit};
use crate::qsim::state::StateVector;
use crate::rng::SeedStream;

/// Depolarizing trajectory model: after each gate, with probability p1
/// (single-qubit gates) or p2 (wider gates) a uniformly random non-identity
/// Pauli hits the gate's qubit set. Readout is a symmetric per-bit flip.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    pub p2: f64,
    pub p1: f64,
    pub readout: f64,
}

impl NoiseModel {
    /// Standard coupling: p1 = 0.1 p2, readout fixed at 0.01.
    pub fn depolarizing(p2: f64) -> Self {
        Self {
            p2,
            p1: 0.1 * p2,
            readout: 0.01,
        }
    }

    pub fn noiseless() -> Self {
        Self {
            p2: 0.0,
            p1: 0.0,
            readout: 0.0,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.p2 == 0.0 && self.p1 == 0.0
    }

    fn gate_rate(&self, arity: usize) -> f64 {
        if arity == 1 {
            self.p1
        } else {
            self.p2
        }
    }
}

pub(crate) fn pauli_x(state: &mut StateVector, q: usize) {
    let step = 1usize << q;
    let amps = state.amps_mut();
    let mut i = 0;
    while i < amps.len() {
        for off in i..i + step {
            amps.swap(off, off + step);
        }
        i += 2 * step;
    }
}

pub(crate) fn pauli_y(state: &mut StateVector, q: usize) {
    use num_complex::Complex64;
    let step = 1usize << q;
    let i_pos = Complex64::new(0.0, 1.0);
    let i_neg = Complex64::new(0.0, -1.0);
    let amps = state.amps_mut();
    let mut i = 0;
    while i < amps.len() {
        for off in i..i + step {
            let a = amps[off];
            let b = amps[off + step];
            amps[off] = i_neg * b;
            amps[off + step] = i_pos * a;
        }
        i += 2 * step;
    }
}

pub(crate) fn pauli_z(state: &mut StateVector, q: usize) {
    let mask = 1usize << q;
    for (i, a) in state.amps_mut().iter_mut().enumerate() {
        if i & mask != 0 {
            *a = -*a;
        }
    }
}

/// Apply one random non-identity Pauli over `qubits` (uniform over the
/// 4^w - 1 non-identity options).
pub(crate) fn apply_random_pauli(state: &mut StateVector, qubits: &[usize], rng: &mut SeedStream) {
    let w = qubits.len() as u32;
    let code = rng.gen_range(4u64.pow(w) - 1) + 1;
    for (j, &q) in qubits.iter().enumerate() {
        match (code >> (2 * j)) & 3 {
            1 => pauli_x(state, q),
            2 => pauli_y(state, q),
            3 => pauli_z(state, q),
            _ => {}
        }
    }
}

/// One Monte Carlo noise trajectory of a circuit.
pub fn apply_noisy_circuit(
    state: &StateVector,
    c: &Circuit,
    noise: &NoiseModel,
    rng: &mut SeedStream,
) -> Result<StateVector> {
    if noise.is_noiseless() {
        return apply_circuit(state, c);
    }
    let mut out = state.clone();
    for g in &c.gates {
        g.apply_to(&mut out);
        let rate = noise.gate_rate(g.targets.len());
        if rate > 0.0 && rng.gen_bool(rate) {
            apply_random_pauli(&mut out, &g.targets, rng);
        }
    }
    Ok(out)
}
