//! Functionals, identity audits, decay fits and regularity measurements.

pub mod decay;
pub mod energy;
pub mod gronwall;
pub mod holder;
pub mod probe;
pub mod regularity;

pub use decay::{
    fit_rate_signature, fit_two_sided_decay, log_spaced, sandwich_holds, DecayError, DecayFit, RateSignature,
    TwoSidedDecay,
};
pub use energy::{
    energy, energy_eps, energy_equality_residual, energy_reports, lambda_u, lambda_u_default_eps, write_energy_csv,
    EnergyReport, ResidualReport, CSV_HEADER,
};
pub use gronwall::{gronwall_bound_check, implied_bound, GronwallError, GronwallReport, Violation};
pub use holder::{holder_time_exponent, HolderFit, HolderOptions};
pub use probe::{
    lipschitz_gap, probe_decay_radius, quadratic_energy, small_data_decay, write_decay_csv, DecayRadius, DecayRun,
    DecayRunError, LipschitzMetric, LipschitzReport, RadiusProbeOptions, RadiusRung, DECAY_CSV_HEADER,
};
pub use regularity::{lq_norm, smooth_norm_sq, w_weighted_energy_check, WeightedEnergyCheck, BETA};
