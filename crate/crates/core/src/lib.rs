//! Two-level quantum information engine read out by a harmonic-oscillator meter.
//!
//! All quantities are dimensionless: energies in `k_B T_S`, times in
//! `ħ/(k_B T_S)`, entropies and information in nats.

pub mod displaced_fock;
pub mod error;
pub mod limits;
pub mod metrics;
pub mod oracle;
pub mod params;
pub mod pareto;
pub mod sweep;
pub mod table;
pub mod thermo;
pub mod validation;

pub use displaced_fock::{
    alpha_sq, conditional_excited, displacement_prob, joint_distribution, meter_marginal, work_threshold_level,
    JointDistribution, ThresholdScan,
};
pub use error::{Error, Result};
pub use metrics::{evaluate_point, MetricsReport, PointReport, Regime};
pub use params::{phase, tls_populations, validate_params, EngineParams, ParamBox, RawParams, TlsPopulations};
pub use thermo::{thermo_report, ThermoReport};
