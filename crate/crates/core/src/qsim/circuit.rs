use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{QsaError, Result};
use crate::qsim::gate::Gate;
use crate::qsim::state::StateVector;

/// Ordered gate list over a fixed qubit count.
///
/// File format: JSON `{"n": int, "gates": [{"kind", "targets", "params"}, ...]}`
/// with angles in radians and little-endian qubit indexing (qubit 0 is the
/// least-significant amplitude bit).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Self { n, gates: Vec::new() }
    }

    pub fn with_gates(n: usize, gates: Vec<Gate>) -> Self {
        Self { n, gates }
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    pub fn extend(&mut self, other: &Circuit) {
        assert_eq!(self.n, other.n);
        self.gates.extend(other.gates.iter().cloned());
    }

    pub fn validate(&self) -> Result<()> {
        for g in &self.gates {
            g.validate(self.n)?;
        }
        Ok(())
    }

    /// Inverse circuit: reversed order, each gate inverted.
    pub fn dagger(&self) -> Self {
        Self {
            n: self.n,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("circuit serialization cannot fail")
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let c: Circuit = serde_json::from_slice(bytes)?;
        c.validate()?;
        Ok(c)
    }

    /// SHA-256 of the canonical (serde_json) circuit bytes.
    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(self.to_json()).into()
    }
}

/// Apply a circuit to a state, returning the new state.
pub fn apply_circuit(state: &StateVector, c: &Circuit) -> Result<StateVector> {
    if state.n() != c.n {
        return Err(QsaError::DimensionMismatch {
            state: state.n(),
            expected: c.n,
        });
    }
    let mut out = state.clone();
    for g in &c.gates {
        g.apply_to(&mut out);
    }
    Ok(out)
}

/// Apply a circuit defined on a subset of qubits of a larger register.
/// `positions[local]` gives the global qubit index for each circuit qubit.
pub fn apply_circuit_on(state: &mut StateVector, c: &Circuit, positions: &[usize]) -> Result<()> {
    if positions.len() != c.n {
        return Err(QsaError::Validation(
            "position list does not match circuit qubit count".into(),
        ));
    }
    for g in &c.gates {
        let mut mapped = g.clone();
        for t in &mut mapped.targets {
            *t = positions[*t];
        }
        mapped.apply_to(state);
    }
    Ok(())
}

/// Controlled form of a whole circuit: the output acts on n+1 qubits with
/// the control at qubit 0 and every original qubit shifted up by one. Each
/// gate is replaced by its controlled form, so the composite matrix is
/// |0><0| (x) I + |1><1| (x) U in little-endian factor order.
pub fn controlled(c: &Circuit) -> Circuit {
    let mut out = Circuit::new(c.n + 1);
    for g in &c.gates {
        let mut shifted = g.clone();
        for t in &mut shifted.targets {
            *t += 1;
        }
        out.push(shifted.controlled(0));
    }
    out
}

/// Circuit for U^pow by plain repetition.
pub fn repeated(c: &Circuit, pow: usize) -> Circuit {
    let mut out = Circuit::new(c.n);
    for _ in 0..pow {
        out.extend(c);
    }
    out
}
