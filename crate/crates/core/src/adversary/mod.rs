//! Attack families and calibration cost models: chained-QPE propagation,
//! spectral bin-mass localisation, state-guessing min-entropy, prototype
//! cost formulas, memory cutoffs, Bell budgets and the teleported variant.

pub mod binmass;
pub mod chained;
pub mod cost;
pub mod guess;
pub mod teleport;

pub use binmass::bin_mass_histogram;
pub use chained::{chained_qpe_attack, haar_state, AttackReport};
pub use cost::{
    bell_budget, classical_eve_cost, honest_classical_cost, memory_cutoffs, quantum_eve_cost,
    survival_budget, CostModelParams, YEAR_SECONDS,
};
pub use guess::{
    default_fidelity_grid, guess_state_at_fidelity, min_k_for_entropy, p_u_curve,
    state_guess_success, GuessReport,
};
pub use teleport::{teleport_fidelity, teleport_simulate, teleport_simulate_with, CorrectionBits};
