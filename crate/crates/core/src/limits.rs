//! Closed-form limits: short measurement times and a cold meter.
//!
//! These are cross-checks for the full computation and are never substituted
//! for it.

use serde::Serialize;

use crate::displaced_fock::{alpha_sq, one_minus_cos};
use crate::error::{Error, Result};
use crate::params::{phase, EngineParams, TlsPopulations};

/// Which closed-form inequality a [`LimitCheck`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LimitContext {
    ZenoNetWork,
    LowTempHeatEngine,
}

/// `lhs > rhs`, evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    pub context: LimitContext,
}

impl LimitCheck {
    fn new(lhs: f64, rhs: f64, context: LimitContext) -> Self {
        LimitCheck { lhs, rhs, satisfied: lhs > rhs, context }
    }
}

/// Heat-engine efficiency of a meter in its ground state.
pub fn low_temp_efficiency(params: &EngineParams) -> f64 {
    let phi = phase(params);
    let a2 = alpha_sq(params);
    let series = 1.0 - params.hbar_omega() / params.delta_e();
    if phi.abs() < 1e-6 || a2 == 0.0 {
        return series;
    }
    1.0 - params.g_eff_sq() * one_minus_cos(phi) / (params.delta_e() * -(-a2).exp_m1())
}

/// Power of a meter in its ground state.
pub fn low_temp_power(params: &EngineParams) -> Result<f64> {
    if params.tau() == 0.0 {
        return Err(Error::ZeroTime);
    }
    let b = TlsPopulations::at(params.delta_e()).b;
    let a2 = alpha_sq(params);
    let w_ext = params.delta_e() * b * -(-a2).exp_m1();
    let w_meas = b * params.g_eff_sq() * one_minus_cos(phase(params));
    Ok((w_ext - w_meas) / params.tau())
}

/// `P(1, n)` for a meter in its ground state: `b` times a Poisson weight of mean `|α|²`.
pub fn ground_state_joint(n: usize, params: &EngineParams) -> f64 {
    let b = TlsPopulations::at(params.delta_e()).b;
    let a2 = alpha_sq(params);
    if a2 == 0.0 {
        return if n == 0 { b } else { 0.0 };
    }
    let ln = n as f64 * a2.ln() - a2 - statrs::function::gamma::ln_gamma(n as f64 + 1.0);
    b * ln.exp()
}

/// Short-time lower bound on the threshold level, with the phase it was evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZenoBound {
    pub bound: f64,
    pub phase: f64,
}

fn sinh_sq_half(x: f64) -> f64 {
    let s = (0.5 * x).sinh();
    s * s
}

/// `n′ > ħω (a−b) / (2 sinh²(β_M ħω/2) g_eff² φ² b)`.
pub fn zeno_threshold_bound(params: &EngineParams) -> ZenoBound {
    let phi = phase(params);
    let ratio = params.delta_e().exp_m1(); // (a − b)/b
    let den = 2.0 * sinh_sq_half(params.meter_beta_hw()) * params.g_eff_sq() * phi * phi;
    ZenoBound { bound: params.hbar_omega() * ratio / den, phase: phi }
}

/// Short-time condition for positive net work at a given threshold level.
pub fn zeno_net_work_condition(params: &EngineParams, n_prime: usize) -> LimitCheck {
    let x = params.meter_beta_hw();
    let n = n_prime as f64;
    let phi = phase(params);
    let lhs = 4.0 * n * sinh_sq_half(x);
    let rhs = params.hbar_omega() / params.delta_e() * (x * n).exp()
        + 2.0 * params.hbar_omega() * params.delta_e().exp_m1() / (params.g_eff_sq() * phi * phi);
    LimitCheck::new(lhs, rhs, LimitContext::ZenoNetWork)
}

/// `2g_eff²/ħω > ln[1/(1 − 2g_eff²/ΔE)]`: positive net work at every phase for a cold meter.
pub fn heat_engine_condition_low_temp(params: &EngineParams) -> Result<LimitCheck> {
    let u = 2.0 * params.g_eff_sq() / params.delta_e();
    if u >= 1.0 {
        return Err(Error::Domain {
            what: "heat_engine_condition_low_temp",
            reason: format!("2 g_eff² / ΔE = {u} must be below 1"),
        });
    }
    let lhs = 2.0 * params.g_eff_sq() / params.hbar_omega();
    let rhs = -(-u).ln_1p();
    Ok(LimitCheck::new(lhs, rhs, LimitContext::LowTempHeatEngine))
}
