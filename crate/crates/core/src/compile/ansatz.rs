use num_complex::Complex64;

use crate::qsim::{Circuit, Gate, StateVector};

/// Brickwork ansatz: per layer, Rz-Rx-Rz on every qubit followed by CZ
/// entanglers on alternating nearest-neighbour pairs. Parameter count is
/// 3n per layer. The entangler offset starts at 1 so the layer structure
/// interleaves with the plant family's offset-0 brickwork.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ansatz {
    pub n: usize,
    pub layers: usize,
}

impl Ansatz {
    pub fn new(n: usize, layers: usize) -> Self {
        Self { n, layers }
    }

    pub fn param_count(&self) -> usize {
        3 * self.n * self.layers
    }

    pub fn circuit(&self, params: &[f64]) -> Circuit {
        assert_eq!(params.len(), self.param_count());
        let mut c = Circuit::new(self.n);
        for l in 0..self.layers {
            let base = 3 * self.n * l;
            for q in 0..self.n {
                c.push(Gate::rz(q, params[base + 3 * q]));
                c.push(Gate::rx(q, params[base + 3 * q + 1]));
                c.push(Gate::rz(q, params[base + 3 * q + 2]));
            }
            let mut q = (l + 1) % 2;
            while q + 1 < self.n {
                c.push(Gate::cz(q, q + 1));
                q += 2;
            }
        }
        c
    }

    /// V(params)|b> without building a gate list; the hot path of the
    /// compile objective.
    pub fn state_from_basis(&self, params: &[f64], b: usize) -> StateVector {
        let mut state = StateVector::basis(self.n, b);
        self.apply(params, &mut state);
        state
    }

    pub fn apply(&self, params: &[f64], state: &mut StateVector) {
        assert_eq!(params.len(), self.param_count());
        let n = self.n;
        for l in 0..self.layers {
            let base = 3 * n * l;
            for q in 0..n {
                let amps = state.amps_mut();
                rot_zxz(
                    amps,
                    q,
                    params[base + 3 * q],
                    params[base + 3 * q + 1],
                    params[base + 3 * q + 2],
                );
            }
            let mut q = (l + 1) % 2;
            while q + 1 < n {
                cz(state.amps_mut(), q, q + 1);
                q += 2;
            }
        }
    }
}

/// Fused Rz(a) then Rx(b) then Rz(c) on one qubit: a single 2x2 product.
fn rot_zxz(amps: &mut [Complex64], q: usize, a: f64, b: f64, c: f64) {
    let (cb, sb) = ((b / 2.0).cos(), (b / 2.0).sin());
    let ea0 = Complex64::from_polar(1.0, -a / 2.0);
    let ea1 = Complex64::from_polar(1.0, a / 2.0);
    let ec0 = Complex64::from_polar(1.0, -c / 2.0);
    let ec1 = Complex64::from_polar(1.0, c / 2.0);
    // M = Rz(c) * Rx(b) * Rz(a)
    let m00 = ec0 * Complex64::new(cb, 0.0) * ea0;
    let m01 = ec0 * Complex64::new(0.0, -sb) * ea1;
    let m10 = ec1 * Complex64::new(0.0, -sb) * ea0;
    let m11 = ec1 * Complex64::new(cb, 0.0) * ea1;
    let step = 1usize << q;
    let mut i = 0;
    while i < amps.len() {
        for off in i..i + step {
            let x = amps[off];
            let y = amps[off + step];
            amps[off] = m00 * x + m01 * y;
            amps[off + step] = m10 * x + m11 * y;
        }
        i += 2 * step;
    }
}

fn cz(amps: &mut [Complex64], a: usize, b: usize) {
    let mask = (1usize << a) | (1usize << b);
    for (i, amp) in amps.iter_mut().enumerate() {
        if i & mask == mask {
            *amp = -*amp;
        }
    }
}
