use serde::{Deserialize, Serialize};

/// Seconds per year used in every cost table.
pub const YEAR_SECONDS: f64 = 3.156e7;

/// Calibration constants for the prototype cost models. Defaults follow
/// the reference calibration scenario: depth(U) = d0 + d1*n, layer
/// time 5 us with control multiplier 1.5, controlled-U slowdown 3,
/// 50 repetitions per eigenphase with overhead 10 for the quantum
/// adversary, and classical throughputs of 1e12 (commodity) and 1e15
/// (supercomputer) flop/s.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CostModelParams {
    pub m: u32,
    pub n_ep: f64,
    pub n_s: f64,
    pub depth0: f64,
    pub depth1: f64,
    pub t_layer: f64,
    pub c_qpu: f64,
    pub c_cu: f64,
    pub f_oh: f64,
    pub t_meas: f64,
    pub r_class: f64,
    pub r_sc: f64,
    pub c_class: f64,
    pub n_s_class: f64,
}

impl Default for CostModelParams {
    fn default() -> Self {
        Self {
            m: 2,
            n_ep: 128.0,
            n_s: 50.0,
            depth0: 100.0,
            depth1: 30.0,
            t_layer: 5e-6,
            c_qpu: 1.5,
            c_cu: 3.0,
            f_oh: 10.0,
            t_meas: 5e-6,
            r_class: 1e12,
            r_sc: 1e15,
            c_class: 3.0,
            n_s_class: 200.0,
        }
    }
}

impl CostModelParams {
    fn depth(&self, n: u32) -> f64 {
        self.depth0 + self.depth1 * n as f64
    }
}

/// Full-QPE brute-force adversary:
/// T_eve = N_ep * 2^n * N_s * f_oh * T_QPE with
/// T_QPE = (2^m - 1) * c_cU * T_apply + T_meas and
/// T_apply = depth(n) * c_qpu * T_layer. Seconds.
pub fn quantum_eve_cost(n: u32, p: &CostModelParams) -> f64 {
    let t_apply = p.depth(n) * p.c_qpu * p.t_layer;
    let t_qpe = ((1u64 << p.m) - 1) as f64 * p.c_cu * t_apply + p.t_meas;
    p.n_ep * 2f64.powi(n as i32) * p.n_s * p.f_oh * t_qpe
}

/// Dense-EVD adversary: T_EVD = N_ep * 2^(3n) / R_SC. Seconds.
pub fn classical_eve_cost(n: u32, p: &CostModelParams) -> f64 {
    p.n_ep * 2f64.powi(3 * n as i32) / p.r_sc
}

/// Honest classical evaluation:
/// T_honest = N_ep * m * N_s_class * T_apply_class with
/// T_apply_class = depth(n) * c_class * 2^(n+m) / R_class. Seconds.
pub fn honest_classical_cost(n: u32, p: &CostModelParams) -> f64 {
    let t_apply = p.depth(n) * p.c_class * 2f64.powi((n + p.m) as i32) / p.r_class;
    p.n_ep * p.m as f64 * p.n_s_class * t_apply
}

/// Memory feasibility cutoffs at 16 bytes per complex entry: largest n
/// with a dense 2^n x 2^n matrix in RAM, and largest n with a 2^(n+m)
/// state vector in RAM.
pub fn memory_cutoffs(ram_bytes: f64, m: u32) -> (u32, u32) {
    let fits = |bytes: f64| bytes <= ram_bytes;
    let mut dense = 0u32;
    while fits(16.0 * 2f64.powi(2 * (dense + 1) as i32)) {
        dense += 1;
    }
    let mut statevec = 0u32;
    while fits(16.0 * 2f64.powi((statevec + 1 + m) as i32)) {
        statevec += 1;
    }
    (dense, statevec)
}

/// Bell pairs consumed by the teleported variant across k instances:
/// 2 * N_s * n * m * k (the factor 2 covers separate real and imaginary
/// Hadamard-test estimation).
pub fn bell_budget(n_s: u64, n: u64, m: u64, k: u64) -> u64 {
    2 * n_s * n * m * k
}

/// Largest two-qubit error rate keeping (1-p)^N_2q >= target survival.
pub fn survival_budget(n_2q: u64, target: f64) -> f64 {
    assert!(n_2q >= 1);
    1.0 - target.powf(1.0 / n_2q as f64)
}
