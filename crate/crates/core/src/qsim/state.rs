use num_complex::Complex64;

use crate::error::{QsaError, Result};

/// Normalized complex amplitude vector over `n` qubits.
///
/// Qubit 0 is the least-significant amplitude index bit (little-endian).
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0...0> on `n` qubits.
    pub fn zero(n: usize) -> Self {
        Self::basis(n, 0)
    }

    /// Computational basis state |index>.
    pub fn basis(n: usize, index: usize) -> Self {
        assert!(index < 1 << n, "basis index out of range");
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { n, amps }
    }

    pub fn from_amps(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << n {
            return Err(QsaError::Validation(format!(
                "amplitude vector length {} != 2^{}",
                amps.len(),
                n
            )));
        }
        Ok(Self { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            for a in &mut self.amps {
                *a *= inv;
            }
        }
    }

    /// <self|other>.
    pub fn inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.n, other.n);
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |<self|other>|^2.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }

    /// Marginal probability that `qubit` reads 1.
    pub fn prob_one(&self, qubit: usize) -> f64 {
        let mask = 1usize << qubit;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Collapse `qubit` to `outcome` and renormalize.
    /// Returns the pre-collapse probability of that outcome.
    pub fn collapse(&mut self, qubit: usize, outcome: bool) -> f64 {
        let mask = 1usize << qubit;
        let mut kept = 0.0;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if ((i & mask) != 0) == outcome {
                kept += a.norm_sqr();
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        if kept > 0.0 {
            let inv = 1.0 / kept.sqrt();
            for a in &mut self.amps {
                *a *= inv;
            }
        }
        kept
    }

    /// Embed an `m`-qubit state into `n` qubits at the given qubit positions,
    /// tensored with |0> everywhere else.
    pub fn embed(&self, n: usize, positions: &[usize]) -> Result<Self> {
        if positions.len() != self.n {
            return Err(QsaError::Validation(
                "position list does not match qubit count".into(),
            ));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        for (src, amp) in self.amps.iter().enumerate() {
            let mut dst = 0usize;
            for (local, &global) in positions.iter().enumerate() {
                if src >> local & 1 == 1 {
                    dst |= 1 << global;
                }
            }
            amps[dst] = *amp;
        }
        StateVector::from_amps(n, amps)
    }
}
