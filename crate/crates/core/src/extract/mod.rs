//! Honest feature extraction: dense argmax-overlap (regime M), classical
//! autocorrelation spectroscopy (regime C) and low-depth phase estimation
//! over Hadamard-test moments (regime Q), plus the textbook QPE fallback.

pub mod autocorr;
pub mod hadamard;
pub mod ldqpe;
pub mod qpe;
pub mod sweep;

pub use autocorr::{autocorr_sequence, extract_c, periodogram_peak};
pub use hadamard::{exact_moment, hadamard_test_moment};
pub use ldqpe::{ldqpe, LdqpeResult};
pub use qpe::textbook_qpe;
pub use sweep::{noise_sweep, sweep_csv, Family, SweepConfig, SweepRow};

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QsaError, Result};
use crate::qsim::{circuit_to_matrix, eig_unitary, Circuit, CMat, NoiseModel, StateVector};
use crate::rng::SeedStream;

/// One extracted eigenphase feature: the raw estimate and its m-bit bucket.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseFeature {
    pub theta_hat: f64,
    pub bucket: u32,
    pub m: u8,
}

impl PhaseFeature {
    pub fn new(theta_hat: f64, m: u8) -> Self {
        Self {
            theta_hat,
            bucket: quantize_phase(theta_hat, m),
            m,
        }
    }
}

/// Nearest-bucket quantization with wraparound at 2pi:
/// bucket = round(theta * 2^m / 2pi) mod 2^m.
pub fn quantize_phase(theta: f64, m: u8) -> u32 {
    assert!((1..=32).contains(&m));
    let buckets = 1u64 << m;
    let scaled = theta.rem_euclid(TAU) / TAU * buckets as f64;
    (scaled.round() as u64 % buckets) as u32
}

/// The k quantized features of a challenge schedule, in challenge order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeatureVector {
    pub features: Vec<PhaseFeature>,
    pub m: u8,
    pub k: usize,
    /// Per-index low-signal flags propagated from the extractors.
    pub low_signal: Vec<bool>,
}

impl FeatureVector {
    pub fn new(features: Vec<PhaseFeature>, m: u8, low_signal: Vec<bool>) -> Self {
        let k = features.len();
        assert_eq!(low_signal.len(), k);
        Self {
            features,
            m,
            k,
            low_signal,
        }
    }

    pub fn buckets(&self) -> Vec<u32> {
        self.features.iter().map(|f| f.bucket).collect()
    }

    /// Pack the m-bit buckets big-endian, most significant bucket bit
    /// first, challenge order ascending.
    pub fn packed_bits(&self) -> Vec<u8> {
        let m = self.m as usize;
        let total_bits = m * self.features.len();
        let mut out = vec![0u8; total_bits.div_ceil(8)];
        let mut bit_pos = 0usize;
        for f in &self.features {
            for bit in (0..m).rev() {
                if f.bucket >> bit & 1 == 1 {
                    out[bit_pos / 8] |= 1 << (7 - bit_pos % 8);
                }
                bit_pos += 1;
            }
        }
        out
    }
}

/// Moment estimate Z_j for the power index j.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub j: u32,
    pub re: f64,
    pub im: f64,
    pub shots: u64,
}

impl MomentEstimate {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn magnitude(&self) -> f64 {
        self.value().norm()
    }
}

/// How moments are evaluated: exact ancilla expectations from amplitudes
/// (noiseless by construction, separating algorithmic correctness from
/// shot noise) or shot-sampled with a trajectory noise model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MomentMode {
    Exact,
    Sampled { shots: u32 },
}

#[derive(Clone, Copy, Debug)]
pub struct EvalConfig {
    pub mode: MomentMode,
    pub noise: NoiseModel,
}

impl EvalConfig {
    pub fn exact() -> Self {
        Self {
            mode: MomentMode::Exact,
            noise: NoiseModel::noiseless(),
        }
    }

    pub fn sampled(shots: u32, noise: NoiseModel) -> Self {
        Self {
            mode: MomentMode::Sampled { shots },
            noise,
        }
    }
}

/// Regime M extraction: eigendecompose, take the argmax-overlap eigenvector
/// (ties to the smallest phase), return its quantized phase.
pub fn extract_m(u: &CMat, psi: &StateVector, m: u8) -> Result<PhaseFeature> {
    if u.dim != psi.amps().len() {
        return Err(QsaError::DimensionMismatch {
            state: psi.n(),
            expected: u.dim.trailing_zeros() as usize,
        });
    }
    let eig = eig_unitary(u)?;
    let idx = eig.argmax_overlap(psi);
    Ok(PhaseFeature::new(eig.phases[idx], m))
}

/// Evaluation regime selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    M,
    C,
    Q,
}

impl std::str::FromStr for Regime {
    type Err = QsaError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "M" | "m" => Ok(Regime::M),
            "C" | "c" => Ok(Regime::C),
            "Q" | "q" => Ok(Regime::Q),
            other => Err(QsaError::Validation(format!("unknown regime {other:?}"))),
        }
    }
}

/// Per-index extraction over a challenge schedule, order-preserving.
pub fn evaluate_schedule(
    publics: &[Circuit],
    plants: &[StateVector],
    regime: Regime,
    m: u8,
    config: &EvalConfig,
    rng: &mut SeedStream,
) -> Result<FeatureVector> {
    if publics.len() != plants.len() {
        return Err(QsaError::Validation(format!(
            "{} challenges vs {} plants",
            publics.len(),
            plants.len()
        )));
    }
    let mut features = Vec::with_capacity(publics.len());
    let mut flags = Vec::with_capacity(publics.len());
    for (i, (public, psi)) in publics.iter().zip(plants).enumerate() {
        match regime {
            Regime::M => {
                let u = circuit_to_matrix(public)?;
                features.push(extract_m(&u, psi, m)?);
                flags.push(false);
            }
            Regime::C => {
                features.push(extract_c(public, psi, m)?);
                flags.push(false);
            }
            Regime::Q => {
                let mut sub = rng.child(&format!("challenge-{i}"));
                let out = ldqpe(public, psi, m, config, &mut sub)?;
                features.push(out.feature);
                flags.push(out.low_signal);
            }
        }
    }
    Ok(FeatureVector::new(features, m, flags))
}
