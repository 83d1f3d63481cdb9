use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::adversary::chained::haar_state;
use crate::error::Result;
use crate::extract::quantize_phase;
use crate::qsim::{eig_unitary, haar_unitary, StateVector, UnitaryEigen};
use crate::rng::SeedStream;

/// A guess state at exact fidelity F to the plant: sqrt(F) psi plus a
/// Haar direction orthogonalized against psi.
pub fn guess_state_at_fidelity(psi: &StateVector, f: f64, rng: &mut SeedStream) -> StateVector {
    assert!((0.0..=1.0).contains(&f));
    let n = psi.n();
    let mut chi = haar_state(n, rng);
    let proj = psi.inner(&chi);
    let amps: Vec<Complex64> = chi
        .amps()
        .iter()
        .zip(psi.amps())
        .map(|(c, p)| c - proj * p)
        .collect();
    chi = StateVector::from_amps(n, amps).expect("same register");
    chi.normalize();
    let fs = f.sqrt();
    let cs = (1.0 - f).sqrt();
    let amps: Vec<Complex64> = psi
        .amps()
        .iter()
        .zip(chi.amps())
        .map(|(p, c)| fs * p + cs * c)
        .collect();
    StateVector::from_amps(n, amps).expect("same register")
}

struct Instance {
    eig: UnitaryEigen,
    psi: StateVector,
    honest_bucket: u32,
}

fn sample_instances(n: usize, m: u8, count: usize, rng: &mut SeedStream) -> Result<Vec<Instance>> {
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut seed = [0u8; 40];
        rng.child(&format!("inst-{i}")).fill_bytes(&mut seed);
        let u = haar_unitary(n, &seed)?;
        let eig = eig_unitary(&u)?;
        let psi = haar_state(n, &mut rng.child(&format!("plant-{i}")));
        let honest = eig.argmax_overlap(&psi);
        let honest_bucket = quantize_phase(eig.phases[honest], m);
        out.push(Instance {
            eig,
            psi,
            honest_bucket,
        });
    }
    Ok(out)
}

/// Measured per-unitary success curve p_U(F): the probability that a guess
/// at fidelity F reproduces the honest dominant-eigenphase bucket on a
/// Haar instance. One eigendecomposition per instance, reused across the
/// fidelity grid.
pub fn p_u_curve(
    n: usize,
    m: u8,
    f_grid: &[f64],
    trials_per_point: usize,
    rng: &mut SeedStream,
) -> Result<Vec<f64>> {
    // instance pool sized to the trial budget; each instance costs one
    // dense eigendecomposition and is reused round-robin across trials
    let n_inst = 200.min((trials_per_point / 50).max(8)).min(trials_per_point.max(1));
    let instances = sample_instances(n, m, n_inst, rng)?;
    let master_key = rng.next_u64();
    let curve: Vec<f64> = f_grid
        .par_iter()
        .enumerate()
        .map(|(fi, &f)| {
            let mut hits = 0usize;
            let mut local = SeedStream::from_u64(master_key, &format!("pu-{fi}"));
            for t in 0..trials_per_point {
                let inst = &instances[t % instances.len()];
                let guess = guess_state_at_fidelity(&inst.psi, f, &mut local);
                let pick = inst.eig.argmax_overlap(&guess);
                if quantize_phase(inst.eig.phases[pick], m) == inst.honest_bucket {
                    hits += 1;
                }
            }
            hits as f64 / trials_per_point as f64
        })
        .collect();
    Ok(curve)
}

/// Default fidelity grid: coarse over [0, 0.9], refined toward 1 where the
/// integrand of the guessing integral concentrates.
pub fn default_fidelity_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..19).map(|i| i as f64 * 0.05).collect();
    grid.extend_from_slice(&[0.92, 0.94, 0.96, 0.98, 0.99, 0.995, 1.0]);
    grid
}

#[derive(Clone, Debug, Serialize)]
pub struct GuessReport {
    pub n: usize,
    pub m: u8,
    pub k: u32,
    pub log2_p_succ: f64,
    pub min_entropy_bits: f64,
    pub f_grid: Vec<f64>,
    pub p_u: Vec<f64>,
}

/// log2 of p_succ = integral over F of Beta(1, d-1) density times
/// p_U(F)^k, evaluated in log space on a fine sub-grid with linear
/// interpolation of the measured curve.
fn log2_p_succ(d: usize, f_grid: &[f64], p_u: &[f64], k: u32) -> f64 {
    let steps = 20_000usize;
    let dv = 1.0 / steps as f64;
    let ln_density_scale = ((d - 1) as f64).ln();
    let mut max_log = f64::NEG_INFINITY;
    let mut logs = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let f = i as f64 * dv;
        // linear interpolation of p_U on the measurement grid
        let pu = interp(f_grid, p_u, f);
        let log_term = if pu <= 0.0 || f >= 1.0 {
            f64::NEG_INFINITY
        } else {
            ln_density_scale + (d as f64 - 2.0) * (-f).ln_1p() + k as f64 * pu.ln()
        };
        max_log = max_log.max(log_term);
        logs.push(log_term);
    }
    let sum: f64 = logs.iter().map(|l| (l - max_log).exp()).sum();
    (max_log + (sum * dv).ln()) / std::f64::consts::LN_2
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let hi = xs.partition_point(|&v| v < x);
    let lo = hi - 1;
    let t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    ys[lo] + t * (ys[hi] - ys[lo])
}

/// Per-trial success probability and min-entropy of the state-guessing
/// attack at fixed (n, m, k), using a measured p_U curve.
pub fn state_guess_success(
    n: usize,
    m: u8,
    k: u32,
    trials_per_point: usize,
    rng: &mut SeedStream,
) -> Result<GuessReport> {
    let grid = default_fidelity_grid();
    let p_u = p_u_curve(n, m, &grid, trials_per_point, rng)?;
    let lp = log2_p_succ(1 << n, &grid, &p_u, k);
    Ok(GuessReport {
        n,
        m,
        k,
        log2_p_succ: lp,
        min_entropy_bits: -lp,
        f_grid: grid,
        p_u,
    })
}

/// Smallest k whose guessing min-entropy reaches `target_bits`, searching
/// over a single measured curve (p_succ is monotone decreasing in k).
pub fn min_k_for_entropy(
    n: usize,
    m: u8,
    target_bits: f64,
    trials_per_point: usize,
    rng: &mut SeedStream,
) -> Result<GuessReport> {
    let grid = default_fidelity_grid();
    let p_u = p_u_curve(n, m, &grid, trials_per_point, rng)?;
    let d = 1usize << n;
    let entropy = |k: u32| -log2_p_succ(d, &grid, &p_u, k);
    let mut lo = 1u32;
    let mut hi = 8 * (target_bits / m as f64).ceil() as u32 + 8;
    while entropy(hi) < target_bits {
        hi *= 2;
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if entropy(mid) >= target_bits {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let lp = log2_p_succ(d, &grid, &p_u, lo);
    Ok(GuessReport {
        n,
        m,
        k: lo,
        log2_p_succ: lp,
        min_entropy_bits: -lp,
        f_grid: grid,
        p_u,
    })
}
