//! Counter-based deterministic random stream.
//!
//! Output blocks are SHA-256 digests of `key || counter`, where the key binds
//! the seed and a domain-separation label. The same (seed, label) pair yields
//! the same byte stream on every platform, which is what keeps compiled
//! challenges, noise trajectories and protocol transcripts reproducible.

use sha2::{Digest, Sha256};
use std::f64::consts::PI;

#[derive(Clone, Debug)]
pub struct SeedStream {
    key: [u8; 32],
    counter: u64,
    block: [u8; 32],
    pos: usize,
    spare_normal: Option<f64>,
}

impl SeedStream {
    /// Stream keyed by arbitrary seed bytes and a domain label.
    pub fn new(seed: &[u8], label: &str) -> Self {
        let mut h = Sha256::new();
        h.update((seed.len() as u64).to_be_bytes());
        h.update(seed);
        h.update(label.as_bytes());
        Self {
            key: h.finalize().into(),
            counter: 0,
            block: [0; 32],
            pos: 32,
            spare_normal: None,
        }
    }

    pub fn from_u64(seed: u64, label: &str) -> Self {
        Self::new(&seed.to_be_bytes(), label)
    }

    /// Independent substream; children with distinct labels never collide.
    pub fn child(&self, label: &str) -> Self {
        let mut h = Sha256::new();
        h.update(self.key);
        h.update(label.as_bytes());
        Self {
            key: h.finalize().into(),
            counter: 0,
            block: [0; 32],
            pos: 32,
            spare_normal: None,
        }
    }

    fn refill(&mut self) {
        let mut h = Sha256::new();
        h.update(self.key);
        h.update(self.counter.to_be_bytes());
        self.block = h.finalize().into();
        self.counter += 1;
        self.pos = 0;
    }

    pub fn fill_bytes(&mut self, out: &mut [u8]) {
        for byte in out.iter_mut() {
            if self.pos == 32 {
                self.refill();
            }
            *byte = self.block[self.pos];
            self.pos += 1;
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut b = [0u8; 8];
        self.fill_bytes(&mut b);
        u64::from_be_bytes(b)
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, n). Rejection sampling keeps it unbiased.
    pub fn gen_range(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let zone = u64::MAX - (u64::MAX % n + 1) % n;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return v % n;
            }
        }
    }

    pub fn gen_bool(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Uniform in [-pi, pi).
    pub fn next_angle(&mut self) -> f64 {
        (self.next_f64() * 2.0 - 1.0) * PI
    }

    /// Standard normal via Box-Muller; the paired value is cached.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(v) = self.spare_normal.take() {
            return v;
        }
        let u1 = self.next_f64().max(f64::MIN_POSITIVE);
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        self.spare_normal = Some(r * (2.0 * PI * u2).sin());
        r * (2.0 * PI * u2).cos()
    }

    /// Sample an index from unnormalized non-negative weights.
    pub fn sample_weighted(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let mut x = self.next_f64() * total;
        for (i, w) in weights.iter().enumerate() {
            x -= w;
            if x < 0.0 {
                return i;
            }
        }
        weights.len() - 1
    }
}
