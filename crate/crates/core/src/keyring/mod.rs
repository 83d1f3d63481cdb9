//! Transcript-bound key derivation from the feature vector and mutual
//! key confirmation.

use hkdf::Hkdf;
use hmac::{Hmac, Mac};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{QsaError, Result};
use crate::extract::FeatureVector;

pub const PROTOCOL_VERSION: u8 = 1;
pub const NONCE_LEN: usize = 16;
pub const TAG_LEN: usize = 16;
const KDF_INFO: &[u8] = b"QSA-session-v1";

/// Session context that binds the derived key: nonces, schedule identity
/// and the ordered public-challenge digests.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub version: u8,
    pub verifier_nonce: [u8; NONCE_LEN],
    pub prover_nonce: [u8; NONCE_LEN],
    pub schedule_id: u32,
    pub challenge_digests: Vec<[u8; 32]>,
    pub m: u8,
    pub k: u32,
}

// TLV field tags, in canonical encoding order.
const TAG_VERSION: u8 = 0x01;
const TAG_VNONCE: u8 = 0x02;
const TAG_PNONCE: u8 = 0x03;
const TAG_SCHEDULE: u8 = 0x04;
const TAG_DIGESTS: u8 = 0x05;
const TAG_M: u8 = 0x06;
const TAG_K: u8 = 0x07;

fn put_tlv(out: &mut Vec<u8>, tag: u8, value: &[u8]) {
    out.push(tag);
    out.extend_from_slice(&(value.len() as u32).to_be_bytes());
    out.extend_from_slice(value);
}

/// Canonical TLV encoding: tag(1) || length(4, big-endian) || value, fields
/// in fixed tag order. Length prefixes make the encoding injective.
pub fn encode_transcript(t: &Transcript) -> Vec<u8> {
    let mut out = Vec::new();
    put_tlv(&mut out, TAG_VERSION, &[t.version]);
    put_tlv(&mut out, TAG_VNONCE, &t.verifier_nonce);
    put_tlv(&mut out, TAG_PNONCE, &t.prover_nonce);
    put_tlv(&mut out, TAG_SCHEDULE, &t.schedule_id.to_be_bytes());
    let digests: Vec<u8> = t.challenge_digests.iter().flatten().copied().collect();
    put_tlv(&mut out, TAG_DIGESTS, &digests);
    put_tlv(&mut out, TAG_M, &[t.m]);
    put_tlv(&mut out, TAG_K, &t.k.to_be_bytes());
    out
}

/// Decode a canonical transcript encoding; the inverse of
/// [`encode_transcript`] on valid input.
pub fn decode_transcript(bytes: &[u8]) -> Result<Transcript> {
    let mut pos = 0usize;
    let mut next = |tag: u8| -> Result<Vec<u8>> {
        if pos + 5 > bytes.len() {
            return Err(QsaError::Malformed("transcript truncated".into()));
        }
        if bytes[pos] != tag {
            return Err(QsaError::Malformed(format!(
                "expected transcript tag {tag:#x}, found {:#x}",
                bytes[pos]
            )));
        }
        let len = u32::from_be_bytes(bytes[pos + 1..pos + 5].try_into().unwrap()) as usize;
        if pos + 5 + len > bytes.len() {
            return Err(QsaError::Malformed("transcript field overruns".into()));
        }
        let v = bytes[pos + 5..pos + 5 + len].to_vec();
        pos += 5 + len;
        Ok(v)
    };
    let version = next(TAG_VERSION)?;
    let vn = next(TAG_VNONCE)?;
    let pn = next(TAG_PNONCE)?;
    let sched = next(TAG_SCHEDULE)?;
    let digests = next(TAG_DIGESTS)?;
    let m = next(TAG_M)?;
    let k = next(TAG_K)?;
    if pos != bytes.len() {
        return Err(QsaError::Malformed("trailing transcript bytes".into()));
    }
    if version.len() != 1 || vn.len() != NONCE_LEN || pn.len() != NONCE_LEN {
        return Err(QsaError::Malformed("bad transcript field length".into()));
    }
    if sched.len() != 4 || m.len() != 1 || k.len() != 4 || digests.len() % 32 != 0 {
        return Err(QsaError::Malformed("bad transcript field length".into()));
    }
    Ok(Transcript {
        version: version[0],
        verifier_nonce: vn.try_into().unwrap(),
        prover_nonce: pn.try_into().unwrap(),
        schedule_id: u32::from_be_bytes(sched.try_into().unwrap()),
        challenge_digests: digests
            .chunks_exact(32)
            .map(|c| c.try_into().unwrap())
            .collect(),
        m: m[0],
        k: u32::from_be_bytes(k.try_into().unwrap()),
    })
}

/// Derived session key.
#[derive(Clone, PartialEq, Eq)]
pub struct SessionKey {
    pub bytes: Vec<u8>,
}

impl std::fmt::Debug for SessionKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // key material stays out of logs
        write!(f, "SessionKey({} bits)", self.bytes.len() * 8)
    }
}

/// K = HKDF-SHA256(ikm = packed feature bits, salt = SHA-256(transcript),
/// info = "QSA-session-v1", L = bits/8). Hashing the transcript keeps the
/// HKDF salt fixed-length.
pub fn derive_key(theta: &FeatureVector, t: &Transcript, bits: usize) -> Result<SessionKey> {
    if !(bits == 128 || bits == 256) {
        return Err(QsaError::Validation(format!(
            "session key length {bits} not in {{128, 256}}"
        )));
    }
    if theta.features.len() != t.k as usize || theta.m != t.m {
        return Err(QsaError::Validation(format!(
            "feature vector ({} features, m={}) does not match transcript (k={}, m={})",
            theta.features.len(),
            theta.m,
            t.k,
            t.m
        )));
    }
    let salt = Sha256::digest(encode_transcript(t));
    let hk = Hkdf::<Sha256>::new(Some(&salt), &theta.packed_bits());
    let mut out = vec![0u8; bits / 8];
    hk.expand(KDF_INFO, &mut out)
        .expect("output length within HKDF bounds");
    Ok(SessionKey { bytes: out })
}

/// Confirmation role labels: distinct tags for the two directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Verifier,
    Prover,
}

impl Role {
    fn label(self) -> &'static [u8] {
        match self {
            Role::Verifier => b"V",
            Role::Prover => b"P",
        }
    }
}

/// First 16 bytes of HMAC-SHA256(K, role-label || nonce).
pub fn confirm_tag(key: &SessionKey, role: Role, nonce: &[u8]) -> [u8; TAG_LEN] {
    let mut mac =
        Hmac::<Sha256>::new_from_slice(&key.bytes).expect("hmac accepts any key length");
    mac.update(role.label());
    mac.update(nonce);
    let full = mac.finalize().into_bytes();
    full[..TAG_LEN].try_into().unwrap()
}

/// Constant-pattern comparison: every byte is examined regardless of
/// earlier mismatches. Reject is a value, not an error.
pub fn verify_confirmation(key: &SessionKey, role: Role, nonce: &[u8], tag: &[u8]) -> bool {
    if tag.len() != TAG_LEN {
        return false;
    }
    let expect = confirm_tag(key, role, nonce);
    let mut acc = 0u8;
    for (a, b) in expect.iter().zip(tag) {
        acc |= a ^ b;
    }
    acc == 0
}

/// Rate-limit hook for the protocol layer: counts confirmation attempts
/// and refuses past the cap. Verdicts expose the attempt count.
#[derive(Clone, Debug)]
pub struct AttemptGuard {
    max_attempts: u32,
    used: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub accept: bool,
    pub attempts_used: u32,
}

impl AttemptGuard {
    pub fn new(max_attempts: u32) -> Self {
        Self {
            max_attempts,
            used: 0,
        }
    }

    pub fn check(&mut self, key: &SessionKey, role: Role, nonce: &[u8], tag: &[u8]) -> Verdict {
        if self.used >= self.max_attempts {
            return Verdict {
                accept: false,
                attempts_used: self.used,
            };
        }
        self.used += 1;
        Verdict {
            accept: verify_confirmation(key, role, nonce, tag),
            attempts_used: self.used,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::{FeatureVector, PhaseFeature};
    use crate::rng::SeedStream;

    fn transcript() -> Transcript {
        Transcript {
            version: PROTOCOL_VERSION,
            verifier_nonce: [1u8; 16],
            prover_nonce: [2u8; 16],
            schedule_id: 7,
            challenge_digests: vec![[3u8; 32], [4u8; 32]],
            m: 4,
            k: 2,
        }
    }

    fn features(buckets: &[u32], m: u8) -> FeatureVector {
        let f: Vec<PhaseFeature> = buckets
            .iter()
            .map(|&b| PhaseFeature {
                theta_hat: 0.0,
                bucket: b,
                m,
            })
            .collect();
        let flags = vec![false; f.len()];
        FeatureVector::new(f, m, flags)
    }

    #[test]
    fn transcript_round_trip_and_injectivity() {
        let t = transcript();
        let enc = encode_transcript(&t);
        assert_eq!(decode_transcript(&enc).unwrap(), t);
        assert_eq!(encode_transcript(&decode_transcript(&enc).unwrap()), enc);

        let mut t2 = t.clone();
        t2.prover_nonce[5] ^= 1;
        assert_ne!(encode_transcript(&t2), enc);

        let mut t3 = t.clone();
        t3.challenge_digests.clear();
        let enc3 = encode_transcript(&t3);
        assert_eq!(decode_transcript(&enc3).unwrap(), t3);
    }

    #[test]
    fn derive_key_deterministic_and_transcript_bound() {
        let t = transcript();
        let fv = features(&[3, 9], 4);
        let k1 = derive_key(&fv, &t, 256).unwrap();
        let k2 = derive_key(&fv, &t, 256).unwrap();
        assert_eq!(k1.bytes, k2.bytes);
        assert_eq!(k1.bytes.len(), 32);

        let mut t2 = t.clone();
        t2.challenge_digests[1][0] ^= 0xff;
        let k3 = derive_key(&fv, &t2, 256).unwrap();
        assert_ne!(k1.bytes, k3.bytes);
    }

    #[test]
    fn incomplete_features_rejected() {
        let t = transcript();
        let fv = features(&[3], 4); // k says 2
        assert!(derive_key(&fv, &t, 256).is_err());
    }

    #[test]
    fn bucket_flip_avalanches() {
        let t = transcript();
        let m = 4u8;
        let mut rng = SeedStream::from_u64(5, "avalanche");
        let mut min_dist = usize::MAX;
        for _ in 0..100 {
            let buckets: Vec<u32> = (0..2).map(|_| rng.gen_range(16) as u32).collect();
            let mut flipped = buckets.clone();
            let which = rng.gen_range(2) as usize;
            let bit = rng.gen_range(4) as u32;
            flipped[which] ^= 1 << bit;
            let ka = derive_key(&features(&buckets, m), &t, 256).unwrap();
            let kb = derive_key(&features(&flipped, m), &t, 256).unwrap();
            let dist: usize = ka
                .bytes
                .iter()
                .zip(&kb.bytes)
                .map(|(a, b)| (a ^ b).count_ones() as usize)
                .sum();
            min_dist = min_dist.min(dist);
        }
        assert!(min_dist >= 80, "min hamming distance {min_dist}");
    }

    #[test]
    fn roles_separate_tags_and_verification_round_trips() {
        let key = SessionKey {
            bytes: vec![7u8; 32],
        };
        let nonce = [9u8; 16];
        let tv = confirm_tag(&key, Role::Verifier, &nonce);
        let tp = confirm_tag(&key, Role::Prover, &nonce);
        assert_ne!(tv, tp);
        assert!(verify_confirmation(&key, Role::Verifier, &nonce, &tv));
        assert!(!verify_confirmation(&key, Role::Verifier, &nonce, &tp));
        assert!(!verify_confirmation(&key, Role::Verifier, &nonce, &tv[..8]));
        let mut bad = tv;
        bad[0] ^= 1;
        assert!(!verify_confirmation(&key, Role::Verifier, &nonce, &bad));
    }

    #[test]
    fn wrong_key_never_accepts_over_many_trials() {
        let key = SessionKey {
            bytes: vec![1u8; 32],
        };
        let nonce = [2u8; 16];
        let tag = confirm_tag(&key, Role::Prover, &nonce);
        let mut rng = SeedStream::from_u64(6, "forge");
        let mut accepts = 0u32;
        for _ in 0..1_000_000 {
            let mut k = vec![0u8; 32];
            rng.fill_bytes(&mut k);
            if verify_confirmation(&SessionKey { bytes: k }, Role::Prover, &nonce, &tag) {
                accepts += 1;
            }
        }
        assert_eq!(accepts, 0);
    }

    #[test]
    fn attempt_guard_caps_attempts() {
        let key = SessionKey {
            bytes: vec![4u8; 32],
        };
        let nonce = [1u8; 16];
        let tag = confirm_tag(&key, Role::Prover, &nonce);
        let mut guard = AttemptGuard::new(1);
        let v1 = guard.check(&key, Role::Prover, &nonce, &tag);
        assert!(v1.accept);
        assert_eq!(v1.attempts_used, 1);
        let v2 = guard.check(&key, Role::Prover, &nonce, &tag);
        assert!(!v2.accept, "second attempt must be refused by the cap");
    }
}
