use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{QsaError, Result};
use crate::qsim::gate::apply_dense;
use crate::qsim::{repeated, sample_bits, Circuit, StateVector};
use crate::rng::SeedStream;

/// Textbook m-ancilla phase estimation, simulated exactly and sampled.
///
/// Phase register at qubits 0..m (ancilla j carries bit j of the outcome),
/// system at m..m+n. Controlled powers use the fast-power identity when
/// the challenge parses as symmetric, else plain repetition. Returns
/// bucket counts over the 2^m outcomes; for a planted overlap p0 the
/// correct bucket appears with probability at least p0 * 4/pi^2.
pub fn textbook_qpe(
    public: &Circuit,
    psi: &StateVector,
    m: u8,
    shots: usize,
    rng: &mut SeedStream,
) -> Result<Vec<u64>> {
    let n = public.n;
    let m = m as usize;
    if n + m > crate::qsim::DEFAULT_DENSE_LIMIT + 2 {
        return Err(QsaError::CapacityExceeded(
            n + m,
            crate::qsim::DEFAULT_DENSE_LIMIT + 2,
        ));
    }
    let total = n + m;
    let fast = crate::compile::parse_symmetric_public(public).is_ok();

    // |+>^m (x) |psi>
    let mut state = psi.embed(total, &(m..total).collect::<Vec<_>>())?;
    for anc in 0..m {
        crate::qsim::Gate::h(anc).apply_to(&mut state);
    }

    for (anc, j) in (0..m).enumerate() {
        let upow = if fast {
            crate::compile::fast_power_public(public, j as u32)?
        } else {
            repeated(public, 1usize << j)
        };
        for g in &upow.gates {
            let mut shifted = g.clone();
            for t in &mut shifted.targets {
                *t += m;
            }
            shifted.controlled(anc).apply_to(&mut state);
        }
    }

    // dense inverse QFT on the phase register:
    // (QFT^dag)[x][y] = 2^{-m/2} e^{-2pi i x y / 2^m}
    let dim = 1usize << m;
    let scale = 1.0 / (dim as f64).sqrt();
    let mut qft_dag = vec![Complex64::new(0.0, 0.0); dim * dim];
    for x in 0..dim {
        for y in 0..dim {
            qft_dag[x * dim + y] =
                Complex64::from_polar(scale, -TAU * (x as f64) * (y as f64) / dim as f64);
        }
    }
    // kernel convention puts targets[0] at the most significant local bit
    let targets: Vec<usize> = (0..m).rev().collect();
    apply_dense(state.amps_mut(), total, &targets, &qft_dag);

    let counts = sample_bits(&state, shots, 0.0, rng);
    let mut buckets = vec![0u64; dim];
    let mask = dim - 1;
    for (outcome, c) in counts.iter().enumerate() {
        buckets[outcome & mask] += c;
    }
    Ok(buckets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::Gate;

    #[test]
    fn on_grid_eigenphase_is_deterministic() {
        // |1> under Rz(2 theta) with theta = 2pi * 3/8: exactly on the
        // 3-bit grid, so all mass lands in bucket 3.
        let theta = TAU * 3.0 / 8.0;
        let mut c = Circuit::new(1);
        c.push(Gate::rz(0, 2.0 * theta));
        let psi = StateVector::basis(1, 1);
        let mut rng = SeedStream::from_u64(1, "qpe");
        let buckets = textbook_qpe(&c, &psi, 3, 2000, &mut rng).unwrap();
        assert_eq!(buckets[3], 2000, "{buckets:?}");
    }

    #[test]
    fn m1_phase_kickback() {
        // theta = pi on a 1-bit register: deterministic outcome 1
        let mut c = Circuit::new(1);
        c.push(Gate::rz(0, TAU));
        let psi = StateVector::basis(1, 1);
        let mut rng = SeedStream::from_u64(2, "qpe");
        let buckets = textbook_qpe(&c, &psi, 1, 500, &mut rng).unwrap();
        assert_eq!(buckets[1], 500);
    }

    #[test]
    fn low_overlap_state_meets_qpe_guarantee() {
        // p0 = 0.3 on a known eigenvector: dominant bucket frequency over
        // many shots stays above p0 * 4/pi^2 minus 3 sigma.
        let theta = 1.234f64;
        let beta1 = 0.77f64;
        let mut c = Circuit::new(2);
        c.push(Gate::rz(0, 2.0 * theta));
        c.push(Gate::rz(1, beta1));
        // signal component is basis index 1 (qubit 0 set, qubit 1 clear):
        // eigenphase +theta from qubit 0 and -beta1/2 from qubit 1
        let signal_phase = theta - beta1 / 2.0;
        let p0: f64 = 0.3;
        let amps = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(p0.sqrt(), 0.0),
            Complex64::new((1.0 - p0).sqrt(), 0.0),
            Complex64::new(0.0, 0.0),
        ];
        let psi = StateVector::from_amps(2, amps).unwrap();
        let m = 4u8;
        let shots = 10_000usize;
        let mut rng = SeedStream::from_u64(3, "qpe");
        let buckets = textbook_qpe(&c, &psi, m, shots, &mut rng).unwrap();
        let target = crate::extract::quantize_phase(signal_phase, m) as usize;
        let hits = buckets[target] as f64;
        let bound = p0 * 4.0 / std::f64::consts::PI.powi(2);
        let sigma = (bound * (1.0 - bound) / shots as f64).sqrt();
        assert!(
            hits / shots as f64 >= bound - 3.0 * sigma,
            "freq {} < bound {bound} ({buckets:?})",
            hits / shots as f64
        );
    }
}
