use std::f64::consts::TAU;

use crate::error::Result;
use crate::qsim::{eig_unitary, CMat, StateVector};

/// Overlap mass aggregated into M uniform eigenphase bins over [0, 2pi):
/// p_k = sum over eigenvectors with bin(theta_i) = k of |<v_i|state>|^2.
pub fn bin_mass_histogram(u: &CMat, state: &StateVector, bins: usize) -> Result<Vec<f64>> {
    assert!(bins >= 1);
    let eig = eig_unitary(u)?;
    let overlaps = eig.overlaps(state);
    let mut hist = vec![0.0; bins];
    for (theta, w) in eig.phases.iter().zip(overlaps) {
        let bin = ((theta.rem_euclid(TAU) / TAU * bins as f64).floor() as usize).min(bins - 1);
        hist[bin] += w;
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::chained::haar_state;
    use crate::compile::{compile_symmetric, plant_state, seed_to_plant_circuit, CompilerConfig};
    use crate::qsim::haar_unitary;
    use crate::rng::SeedStream;

    #[test]
    fn eigenvector_concentrates_in_one_bin() {
        let u = haar_unitary(3, b"binmass").unwrap();
        let eig = eig_unitary(&u).unwrap();
        let psi = StateVector::from_amps(3, eig.basis.column(2)).unwrap();
        let hist = bin_mass_histogram(&u, &psi, 64).unwrap();
        let max = hist.iter().cloned().fold(0.0, f64::max);
        assert!((max - 1.0).abs() < 1e-9);
        assert!((hist.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sums_to_one_for_random_states() {
        let u = haar_unitary(4, b"binmass2").unwrap();
        let mut rng = SeedStream::from_u64(2, "bm");
        for _ in 0..5 {
            let psi = haar_state(4, &mut rng);
            let hist = bin_mass_histogram(&u, &psi, 16).unwrap();
            assert!((hist.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn planted_state_localizes_random_state_spreads() {
        let plant = seed_to_plant_circuit(&[17u8; 32], 4, 3);
        let cfg = CompilerConfig {
            layers: 5,
            steps: 2500,
            restarts: 2,
            seed: 4,
            ..CompilerConfig::default()
        };
        let ch = compile_symmetric(&plant, &cfg).unwrap();
        assert!(ch.witness.delta_hat <= 0.25);
        let u = crate::qsim::circuit_to_matrix(&ch.public).unwrap();
        let psi = plant_state(&plant);
        let hist = bin_mass_histogram(&u, &psi, 64).unwrap();
        let max = hist.iter().cloned().fold(0.0, f64::max);
        assert!(max >= 0.75, "planted max bin {max}");

        let mut rng = SeedStream::from_u64(9, "eve");
        let eve = haar_state(4, &mut rng);
        let eve_hist = bin_mass_histogram(&u, &eve, 64).unwrap();
        let eve_max = eve_hist.iter().cloned().fold(0.0, f64::max);
        assert!(eve_max < max, "baseline {eve_max} vs planted {max}");
    }
}
