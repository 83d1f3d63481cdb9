use std::f64::consts::TAU;

use crate::error::Result;
use crate::extract::hadamard::hadamard_test_moment;
use crate::extract::{EvalConfig, MomentEstimate, PhaseFeature};
use crate::qsim::{repeated, Circuit, StateVector};
use crate::rng::SeedStream;

/// Moment magnitude below which the estimate carries no usable phase and
/// the low-signal flag fires.
pub const LOW_SIGNAL_THRESHOLD: f64 = 0.05;

#[derive(Clone, Debug)]
pub struct LdqpeResult {
    pub feature: PhaseFeature,
    pub low_signal: bool,
    pub moments: Vec<MomentEstimate>,
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Bitwise unwrap of the moment arguments into a phase estimate:
/// theta_0 = arg(Z_0) mod 2pi, then at level j the candidate set
/// {(2pi k + arg Z_j) / 2^j} is resolved toward theta_{j-1}.
pub fn unwrap_moments(moments: &[MomentEstimate]) -> f64 {
    let mut theta = 0.0;
    for (j, mom) in moments.iter().enumerate() {
        let arg = mom.value().arg().rem_euclid(TAU);
        if j == 0 {
            theta = arg;
            continue;
        }
        let scale = (1u64 << j) as f64;
        let mut best = f64::INFINITY;
        let mut pick = theta;
        for k in 0..1u64 << j {
            let candidate = (TAU * k as f64 + arg) / scale;
            let dist = circular_distance(candidate, theta);
            if dist < best {
                best = dist;
                pick = candidate;
            }
        }
        theta = pick;
    }
    theta
}

/// Low-depth phase estimation: estimate Z_j = <psi|U^(2^j)|psi> for
/// j = 0..m-1 and unwrap into an m-bit bucket.
///
/// Powered circuits come from the fast-power identity when the public
/// circuit has the symmetric V-D-Vdag structure, and from 2^j sequential
/// applications otherwise. Guaranteed recovery needs dominant overlap
/// p0 >= 4 - 2 sqrt(3); below that the result is best-effort and the
/// low-signal flag reports degenerate moments.
pub fn ldqpe(
    public: &Circuit,
    psi: &StateVector,
    m: u8,
    config: &EvalConfig,
    rng: &mut SeedStream,
) -> Result<LdqpeResult> {
    assert!(m >= 1);
    let fast = crate::compile::parse_symmetric_public(public).is_ok();
    let mut moments = Vec::with_capacity(m as usize);
    let mut low_signal = false;
    for j in 0..m as u32 {
        let upow = if fast {
            crate::compile::fast_power_public(public, j)?
        } else {
            repeated(public, 1usize << j)
        };
        let mut sub = rng.child(&format!("moment-{j}"));
        let est = hadamard_test_moment(&upow, psi, j, config, &mut sub)?;
        if est.magnitude() < LOW_SIGNAL_THRESHOLD {
            low_signal = true;
        }
        moments.push(est);
    }
    let theta = unwrap_moments(&moments);
    Ok(LdqpeResult {
        feature: PhaseFeature::new(theta, m),
        low_signal,
        moments,
    })
}
