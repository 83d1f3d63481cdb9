
use crate::compile::plant_state;
use crate::error::{QsaError, Result};
use crate::qsim::noise::{pauli_x, pauli_z};
use crate::qsim::{apply_circuit_on, Circuit, Gate, StateVector};
use crate::rng::SeedStream;

/// Classical correction bits from one teleported qubit: (a, b) with a the
/// data-qubit outcome after the Hadamard and b the Bell-half outcome. The
/// receiver applies X^b Z^a.
pub type CorrectionBits = (bool, bool);

fn measure(state: &mut StateVector, qubit: usize, rng: &mut SeedStream) -> bool {
    let p1 = state.prob_one(qubit);
    let outcome = rng.gen_bool(p1);
    state.collapse(qubit, outcome);
    outcome
}

/// Per-qubit Bell-measurement teleportation of the full planted state.
///
/// Register layout on 3n qubits: data 0..n (holding P^dag|0^n>), Alice
/// halves n..2n, Bob halves 2n..3n. Each data qubit is teleported through
/// its own Bell pair; Bob's register then holds the planted state exactly,
/// up to global phase, for every sampled correction pattern. Setting
/// `apply_corrections` to false reproduces the broken-receiver negative
/// control.
pub fn teleport_simulate_with(
    prep: &Circuit,
    rng: &mut SeedStream,
    apply_corrections: bool,
) -> Result<(StateVector, Vec<CorrectionBits>)> {
    let n = prep.n;
    if n > 6 {
        return Err(QsaError::CapacityExceeded(3 * n, 18));
    }
    let total = 3 * n;
    let mut state = StateVector::zero(total);
    apply_circuit_on(&mut state, prep, &(0..n).collect::<Vec<_>>())?;

    // Bell pairs between Alice halves and Bob halves.
    for i in 0..n {
        Gate::h(n + i).apply_to(&mut state);
        Gate::cx(n + i, 2 * n + i).apply_to(&mut state);
    }

    let mut corrections = Vec::with_capacity(n);
    for i in 0..n {
        Gate::cx(i, n + i).apply_to(&mut state);
        Gate::h(i).apply_to(&mut state);
        let a = measure(&mut state, i, rng);
        let b = measure(&mut state, n + i, rng);
        if apply_corrections {
            if a {
                pauli_z(&mut state, 2 * n + i);
            }
            if b {
                pauli_x(&mut state, 2 * n + i);
            }
        }
        corrections.push((a, b));
    }

    // Extract Bob's register: the data and Alice qubits are collapsed to
    // the measured pattern, so the full state is a product with it.
    let mut fixed = 0usize;
    for (i, &(a, b)) in corrections.iter().enumerate() {
        if a {
            fixed |= 1 << i;
        }
        if b {
            fixed |= 1 << (n + i);
        }
    }
    let mut amps = Vec::with_capacity(1 << n);
    for s in 0..1usize << n {
        amps.push(state.amps()[fixed | (s << (2 * n))]);
    }
    let mut receiver = StateVector::from_amps(n, amps)?;
    receiver.normalize();
    Ok((receiver, corrections))
}

pub fn teleport_simulate(
    prep: &Circuit,
    rng: &mut SeedStream,
) -> Result<(StateVector, Vec<CorrectionBits>)> {
    teleport_simulate_with(prep, rng, true)
}

/// |<psi|receiver>|^2 against the state the plant circuit prepares.
pub fn teleport_fidelity(prep: &Circuit, receiver: &StateVector) -> f64 {
    plant_state(prep).fidelity(receiver)
}
