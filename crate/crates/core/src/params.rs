//! Dimensionless engine parameters.
//!
//! Energies are measured in units of `k_B T_S` and times in units of
//! `ħ / (k_B T_S)`, so the system temperature, `ħ` and `k_B` are all one.
//! In these units the oscillator phase accumulated during the coupling
//! episode is `ω t_m = hbar_omega · tau`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The five engine knobs. Construct through [`validate_params`] or
/// [`EngineParams::new`]; every instance satisfies the domain invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct EngineParams {
    temp_ratio: f64,
    delta_e: f64,
    hbar_omega: f64,
    g_eff_sq: f64,
    tau: f64,
}

/// Unchecked parameter record, as read from config files or CLI flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    pub temp_ratio: f64,
    pub delta_e: f64,
    pub hbar_omega: f64,
    pub g_eff_sq: f64,
    pub tau: f64,
}

impl TryFrom<RawParams> for EngineParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        validate_params(raw)
    }
}

impl From<EngineParams> for RawParams {
    fn from(p: EngineParams) -> Self {
        RawParams {
            temp_ratio: p.temp_ratio,
            delta_e: p.delta_e,
            hbar_omega: p.hbar_omega,
            g_eff_sq: p.g_eff_sq,
            tau: p.tau,
        }
    }
}

fn check(field: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::Validation { field, value, reason: "must be finite" });
    }
    if ok {
        Ok(())
    } else {
        Err(Error::Validation { field, value, reason })
    }
}

/// Checks the five raw numbers against the physical domain.
pub fn validate_params(raw: RawParams) -> Result<EngineParams> {
    let RawParams { temp_ratio, delta_e, hbar_omega, g_eff_sq, tau } = raw;
    check("temp_ratio", temp_ratio, temp_ratio > 0.0 && temp_ratio <= 1.0, "must lie in (0, 1]")?;
    check("delta_e", delta_e, delta_e > 0.0, "must be positive")?;
    check("hbar_omega", hbar_omega, hbar_omega > 0.0, "must be positive")?;
    check("g_eff_sq", g_eff_sq, g_eff_sq >= 0.0, "must be non-negative")?;
    check("tau", tau, tau >= 0.0, "must be non-negative")?;
    Ok(EngineParams { temp_ratio, delta_e, hbar_omega, g_eff_sq, tau })
}

impl EngineParams {
    pub fn new(temp_ratio: f64, delta_e: f64, hbar_omega: f64, g_eff_sq: f64, tau: f64) -> Result<Self> {
        validate_params(RawParams { temp_ratio, delta_e, hbar_omega, g_eff_sq, tau })
    }

    /// Builds parameters from the oscillator phase `ω t_m` instead of the time.
    pub fn with_phase(temp_ratio: f64, delta_e: f64, hbar_omega: f64, g_eff_sq: f64, phase: f64) -> Result<Self> {
        check("hbar_omega", hbar_omega, hbar_omega > 0.0, "must be positive")?;
        Self::new(temp_ratio, delta_e, hbar_omega, g_eff_sq, phase / hbar_omega)
    }

    pub fn temp_ratio(&self) -> f64 {
        self.temp_ratio
    }

    pub fn delta_e(&self) -> f64 {
        self.delta_e
    }

    pub fn hbar_omega(&self) -> f64 {
        self.hbar_omega
    }

    pub fn g_eff_sq(&self) -> f64 {
        self.g_eff_sq
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn raw(&self) -> RawParams {
        (*self).into()
    }

    pub fn set_temp_ratio(self, v: f64) -> Result<Self> {
        validate_params(RawParams { temp_ratio: v, ..self.raw() })
    }

    pub fn set_delta_e(self, v: f64) -> Result<Self> {
        validate_params(RawParams { delta_e: v, ..self.raw() })
    }

    pub fn set_hbar_omega(self, v: f64) -> Result<Self> {
        validate_params(RawParams { hbar_omega: v, ..self.raw() })
    }

    pub fn set_g_eff_sq(self, v: f64) -> Result<Self> {
        validate_params(RawParams { g_eff_sq: v, ..self.raw() })
    }

    pub fn set_tau(self, v: f64) -> Result<Self> {
        validate_params(RawParams { tau: v, ..self.raw() })
    }

    pub fn set_phase(self, phase: f64) -> Result<Self> {
        self.set_tau(phase / self.hbar_omega)
    }

    /// `β_M ħω`, the meter quantum over the meter temperature.
    pub fn meter_beta_hw(&self) -> f64 {
        self.hbar_omega / self.temp_ratio
    }

    /// Ratio `e^{-β_M ħω}` of consecutive thermal meter weights.
    pub fn meter_ratio(&self) -> f64 {
        (-self.meter_beta_hw()).exp()
    }

    /// Mean thermal occupation of the meter.
    pub fn meter_mean_occupation(&self) -> f64 {
        1.0 / self.meter_beta_hw().exp_m1()
    }
}

/// Thermal populations of the two-level system at the system temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TlsPopulations {
    /// Ground state.
    pub a: f64,
    /// Excited state.
    pub b: f64,
}

impl TlsPopulations {
    /// Populations for a level spacing given in units of `k_B T_S`.
    pub fn at(delta_e: f64) -> Self {
        TlsPopulations { a: 1.0 / (1.0 + (-delta_e).exp()), b: 1.0 / (1.0 + delta_e.exp()) }
    }

    /// `ln a`, accurate when `a` is close to one.
    pub fn ln_a(delta_e: f64) -> f64 {
        -softplus(-delta_e)
    }

    /// `ln b`, finite even when `b` underflows.
    pub fn ln_b(delta_e: f64) -> f64 {
        -softplus(delta_e)
    }
}

pub fn tls_populations(params: &EngineParams) -> TlsPopulations {
    TlsPopulations::at(params.delta_e)
}

/// `ω t_m` in radians.
pub fn phase(params: &EngineParams) -> f64 {
    params.hbar_omega * params.tau
}

/// `ln(1 + e^x)` without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Box constraints for the optimizer. The validation domain is wider; these
/// bounds only apply to the decision space of the Pareto search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBox {
    pub temp_ratio: (f64, f64),
    pub delta_e: (f64, f64),
    pub hbar_omega: (f64, f64),
    pub g_eff_sq: (f64, f64),
    /// Bounds on `ω t_m / 2π`.
    pub phase_cycles: (f64, f64),
}

impl Default for ParamBox {
    fn default() -> Self {
        ParamBox {
            temp_ratio: (1e-4, 1.0),
            delta_e: (1e-3, 1e2),
            hbar_omega: (1e-3, 1e2),
            g_eff_sq: (1e-6, 1e6),
            phase_cycles: (1e-3, 1.0),
        }
    }
}
