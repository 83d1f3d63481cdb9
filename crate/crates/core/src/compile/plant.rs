use hkdf::Hkdf;
use sha2::Sha256;

use crate::error::{QsaError, Result};
use crate::qsim::{apply_circuit, Circuit, Gate, StateVector};
use crate::rng::SeedStream;

/// Per-index planted-state sub-seed:
/// HKDF-SHA256(ikm = S0, salt = empty, info = "QSA-states" || uint32_be(i), L = 32).
pub fn derive_plant_seed(s0: &[u8], index: u32) -> Result<[u8; 32]> {
    if s0.len() < 32 {
        return Err(QsaError::Validation(format!(
            "master seed must be at least 32 bytes, got {}",
            s0.len()
        )));
    }
    let hk = Hkdf::<Sha256>::new(None, s0);
    let mut info = Vec::with_capacity(14);
    info.extend_from_slice(b"QSA-states");
    info.extend_from_slice(&index.to_be_bytes());
    let mut out = [0u8; 32];
    hk.expand(&info, &mut out)
        .expect("32 bytes is a valid HKDF output length");
    Ok(out)
}

/// Deterministic planted-state preparation circuit from a sub-seed.
///
/// One layer of full single-qubit SU(2) rotations (Rz-Rx-Rz), then `depth`
/// repetitions of [CZ brickwork entanglers, rotation layer] with the
/// entangler offset alternating from 0. Noncommuting rotations plus a
/// connected entangling graph keep the induced state family expressive.
pub fn seed_to_plant_circuit(seed: &[u8], n: usize, depth: usize) -> Circuit {
    assert!(n >= 1);
    let mut rng = SeedStream::new(seed, "plant-circuit");
    let mut c = Circuit::new(n);
    let rot_layer = |c: &mut Circuit, rng: &mut SeedStream| {
        for q in 0..n {
            c.push(Gate::rz(q, rng.next_angle()));
            c.push(Gate::rx(q, rng.next_angle()));
            c.push(Gate::rz(q, rng.next_angle()));
        }
    };
    rot_layer(&mut c, &mut rng);
    for l in 0..depth {
        let mut q = l % 2;
        while q + 1 < n {
            c.push(Gate::cz(q, q + 1));
            q += 2;
        }
        rot_layer(&mut c, &mut rng);
    }
    c
}

/// The planted state |psi> prepared by a plant circuit.
pub fn plant_state(prep: &Circuit) -> StateVector {
    apply_circuit(&StateVector::zero(prep.n), prep).expect("plant circuit acts on its own register")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plant_seed_deterministic_and_separated() {
        let s0 = [7u8; 32];
        let a = derive_plant_seed(&s0, 0).unwrap();
        let b = derive_plant_seed(&s0, 0).unwrap();
        let c = derive_plant_seed(&s0, 1).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn short_seed_rejected() {
        assert!(derive_plant_seed(&[1u8; 16], 0).is_err());
    }

    /// RFC 5869 Appendix A.1 extract-and-expand vector for the HKDF core.
    #[test]
    fn hkdf_reference_vector() {
        let ikm = [0x0bu8; 22];
        let salt: Vec<u8> = (0x00..=0x0c).collect();
        let info: Vec<u8> = (0xf0..=0xf9).collect();
        let hk = Hkdf::<Sha256>::new(Some(&salt), &ikm);
        let mut okm = [0u8; 42];
        hk.expand(&info, &mut okm).unwrap();
        let expect = hex::decode(
            "3cb25f25faacd57a90434f64d0362f2a2d2d0a90cf1a5a4c5db02d56ecc4c5bf\
             34007208d5b887185865",
        )
        .unwrap();
        assert_eq!(okm.as_slice(), expect.as_slice());
    }

    /// RFC 5869 Appendix A.3: zero-length salt and info, matching the
    /// empty-salt convention used by derive_plant_seed.
    #[test]
    fn hkdf_reference_vector_empty_salt() {
        let ikm = [0x0bu8; 22];
        let hk = Hkdf::<Sha256>::new(None, &ikm);
        let mut okm = [0u8; 42];
        hk.expand(&[], &mut okm).unwrap();
        let expect = hex::decode(
            "8da4e775a563c18f715f802a063c5a31b8a11f5c5ee1879ec3454e5f3c738d2d\
             9d201395faa4b61a96c8",
        )
        .unwrap();
        assert_eq!(okm.as_slice(), expect.as_slice());
    }

    #[test]
    fn plant_circuit_deterministic() {
        let seed = [3u8; 32];
        let a = seed_to_plant_circuit(&seed, 4, 3);
        let b = seed_to_plant_circuit(&seed, 4, 3);
        assert_eq!(a, b);
    }

    #[test]
    fn depth_zero_is_product_state() {
        let seed = [9u8; 32];
        let c = seed_to_plant_circuit(&seed, 3, 0);
        assert!(c.gates.iter().all(|g| g.targets.len() == 1));
    }

    /// Expressivity proxy: depth-4 plants at n=6 scatter away from |0^6>.
    #[test]
    fn plants_scatter_from_zero_state() {
        let mut low = 0;
        let total = 100;
        for i in 0..total {
            let seed = derive_plant_seed(&[i as u8; 32], i).unwrap();
            let prep = seed_to_plant_circuit(&seed, 6, 4);
            let psi = plant_state(&prep);
            if psi.probability(0) < 0.2 {
                low += 1;
            }
        }
        assert!(low >= 95, "only {low}/{total} plants scattered");
    }
}
