use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::Result;
use crate::extract::PhaseFeature;
use crate::qsim::{apply_circuit, Circuit, StateVector};

/// Autocorrelation sequence Z_t = <psi|U^t|psi> for t = 0..T-1, computed
/// by T-1 sequential circuit applications. Z_0 = 1.
pub fn autocorr_sequence(u: &Circuit, psi: &StateVector, len: usize) -> Result<Vec<Complex64>> {
    assert!(len >= 2);
    let mut out = Vec::with_capacity(len);
    out.push(Complex64::new(1.0, 0.0));
    let mut state = psi.clone();
    for _ in 1..len {
        state = apply_circuit(&state, u)?;
        out.push(psi.inner(&state));
    }
    Ok(out)
}

/// Dominant frequency of S(w) = |sum_t Z_t e^{-iwt}| on a zero-padded FFT
/// grid, then one local 3-point quadratic refinement around the peak.
/// Grid ties go to the smallest frequency.
pub fn periodogram_peak(z: &[Complex64], pad: usize) -> f64 {
    assert!(z.len() >= 2);
    assert!(pad >= 1);
    let size = z.len() * pad;
    let mut buf: Vec<Complex64> = Vec::with_capacity(size);
    buf.extend_from_slice(z);
    buf.resize(size, Complex64::new(0.0, 0.0));
    // forward FFT computes X_k = sum_t x_t e^{-2pi i k t / N}, which is
    // S(w) sampled at w_k = 2pi k / N
    FftPlanner::new().plan_fft_forward(size).process(&mut buf);
    let mags: Vec<f64> = buf.iter().map(|c| c.norm()).collect();
    let mut peak = 0usize;
    for (k, &mag) in mags.iter().enumerate() {
        if mag > mags[peak] {
            peak = k;
        }
    }
    let prev = mags[(peak + size - 1) % size];
    let next = mags[(peak + 1) % size];
    let denom = mags[peak] * 2.0 - prev - next;
    let delta = if denom.abs() < 1e-12 {
        0.0
    } else {
        (0.5 * (next - prev) / denom).clamp(-0.5, 0.5)
    };
    (TAU * (peak as f64 + delta) / size as f64).rem_euclid(TAU)
}

/// Regime C extraction: autocorrelation sequence of length 2^m, zero-padded
/// periodogram peak, quantize.
pub fn extract_c(u: &Circuit, psi: &StateVector, m: u8) -> Result<PhaseFeature> {
    let len = 1usize << m;
    let z = autocorr_sequence(u, psi, len.max(2))?;
    let theta = periodogram_peak(&z, 4);
    Ok(PhaseFeature::new(theta, m))
}
