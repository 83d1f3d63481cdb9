use crate::rng::SeedStream;

/// Gain schedule and budget for simultaneous-perturbation optimization.
///
/// a_t = a / (t + 1 + A)^0.602 and c_t = c / (t + 1)^0.101, with A
/// defaulting to steps/10. The textbook defaults (a = 0.2, c = 0.1) suit
/// low-dimensional objectives; the challenge compilers pass a larger `a`
/// because the (t + 1 + A)^0.602 denominator otherwise shrinks steps to
/// almost nothing at their step counts.
#[derive(Clone, Copy, Debug)]
pub struct SpsaConfig {
    pub steps: usize,
    pub a: f64,
    pub c: f64,
    pub big_a: Option<f64>,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        Self {
            steps: 1000,
            a: 0.2,
            c: 0.1,
            big_a: None,
        }
    }
}

impl SpsaConfig {
    pub fn with_steps(steps: usize) -> Self {
        Self {
            steps,
            ..Self::default()
        }
    }
}

/// Maximize `objective` over `p` parameters starting from `theta0`.
/// Returns the best parameters seen (over all evaluated perturbation
/// points) and their objective value. Deterministic given the stream.
pub fn spsa_maximize<F: FnMut(&[f64]) -> f64>(
    mut objective: F,
    theta0: Vec<f64>,
    config: &SpsaConfig,
    rng: &mut SeedStream,
) -> (Vec<f64>, f64) {
    let p = theta0.len();
    assert!(p >= 1);
    let big_a = config.big_a.unwrap_or(config.steps as f64 / 10.0);
    let mut theta = theta0;
    let mut best_value = f64::NEG_INFINITY;
    let mut best_theta = theta.clone();
    let mut delta = vec![0.0f64; p];
    let mut probe = vec![0.0f64; p];
    for t in 0..config.steps {
        let a_t = config.a / (t as f64 + 1.0 + big_a).powf(0.602);
        let c_t = config.c / (t as f64 + 1.0).powf(0.101);
        for d in delta.iter_mut() {
            *d = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        }
        for i in 0..p {
            probe[i] = theta[i] + c_t * delta[i];
        }
        let f_plus = objective(&probe);
        if f_plus > best_value {
            best_value = f_plus;
            best_theta.copy_from_slice(&probe);
        }
        for i in 0..p {
            probe[i] = theta[i] - c_t * delta[i];
        }
        let f_minus = objective(&probe);
        if f_minus > best_value {
            best_value = f_minus;
            best_theta.copy_from_slice(&probe);
        }
        let scale = (f_plus - f_minus) / (2.0 * c_t);
        for i in 0..p {
            // 1/delta_i == delta_i for +-1 perturbations
            theta[i] += a_t * scale * delta[i];
        }
    }
    (best_theta, best_value)
}
