//! Performance metrics of a single operating point.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::EngineParams;
use crate::thermo::{thermo_report, ThermoReport};

/// Below this information gain the efficiency ratio is reported as zero.
pub const INFO_FLOOR: f64 = 1e-14;
/// Net work magnitudes at or below this are classified as idle.
pub const IDLE_BAND: f64 = 1e-14;
/// Largest truncation tail accepted when reporting metrics.
pub const TAIL_LIMIT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    HeatEngine,
    HeatValve,
    Idle,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::HeatEngine => "heat_engine",
            Regime::HeatValve => "heat_valve",
            Regime::Idle => "idle",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub eta_info: f64,
    pub eta_he: Option<f64>,
    /// Absent at zero measurement time.
    pub power: Option<f64>,
    pub power_star: Option<f64>,
    pub eta_carnot: f64,
    pub eta_ca: f64,
    pub regime: Regime,
}

/// `W_ext / (T_S I)`, zero when no information is gained.
pub fn information_efficiency(report: &ThermoReport) -> f64 {
    if report.info < INFO_FLOOR {
        0.0
    } else {
        (report.w_ext / report.info).clamp(0.0, 1.0)
    }
}

/// `Π = W_net / t_m`.
pub fn power(report: &ThermoReport, params: &EngineParams) -> Result<f64> {
    if params.tau() == 0.0 {
        return Err(Error::ZeroTime);
    }
    Ok(report.w_net / params.tau())
}

/// Power corrected for the stimulated-emission time `π/ΔE`.
pub fn power_star(power: f64, params: &EngineParams) -> Result<f64> {
    if params.tau() == 0.0 {
        return Err(Error::ZeroTime);
    }
    Ok(power / (1.0 + (PI / params.delta_e()) / params.tau()))
}

/// `1 − W_meas/W_ext`, present only with non-negative net work.
pub fn thermo_efficiency(report: &ThermoReport) -> Option<f64> {
    (report.w_net >= 0.0 && report.w_ext > 0.0).then(|| 1.0 - report.w_meas / report.w_ext)
}

/// Carnot and Curzon-Ahlborn efficiencies for `T_M/T_S = temp_ratio`.
pub fn reference_efficiencies(temp_ratio: f64) -> (f64, f64) {
    (1.0 - temp_ratio, 1.0 - temp_ratio.sqrt())
}

pub fn classify_regime(report: &ThermoReport) -> Regime {
    if report.w_net.abs() <= IDLE_BAND {
        Regime::Idle
    } else if report.w_net > 0.0 {
        Regime::HeatEngine
    } else {
        Regime::HeatValve
    }
}

/// All metrics for a computed cycle. Refuses truncations that lose more than [`TAIL_LIMIT`].
pub fn metrics_report(report: &ThermoReport, params: &EngineParams) -> Result<MetricsReport> {
    if report.tail_mass > TAIL_LIMIT {
        return Err(Error::TailTooLarge { tail: report.tail_mass, limit: TAIL_LIMIT });
    }
    let regime = classify_regime(report);
    let power = power(report, params).ok();
    let power_star = power.and_then(|p| power_star(p, params).ok());
    let (eta_carnot, eta_ca) = reference_efficiencies(params.temp_ratio());
    Ok(MetricsReport {
        eta_info: information_efficiency(report),
        eta_he: if regime == Regime::HeatEngine { thermo_efficiency(report) } else { None },
        power,
        power_star,
        eta_carnot,
        eta_ca,
        regime,
    })
}

/// Parameters, energetics and metrics of one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointReport {
    pub params: EngineParams,
    pub phase: f64,
    pub thermo: ThermoReport,
    pub metrics: MetricsReport,
}

pub fn evaluate_point(params: &EngineParams, tol: f64) -> Result<PointReport> {
    let thermo = thermo_report(params, tol)?;
    let metrics = metrics_report(&thermo, params)?;
    Ok(PointReport { params: *params, phase: crate::params::phase(params), thermo, metrics })
}
