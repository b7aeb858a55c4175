//! Seeded cross-checks of the closed forms against the oracle and the limits.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::displaced_fock::{alpha_sq, joint_distribution, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::limits::low_temp_efficiency;
use crate::metrics::evaluate_point;
use crate::oracle::{compare_with_closed_form, OracleResiduals};
use crate::params::{EngineParams, ParamBox};
use crate::thermo::thermo_report_from;

pub const ORACLE_LIMIT: f64 = 1e-8;
pub const BOUND_LIMIT: f64 = 1e-12;
pub const LOW_TEMP_LIMIT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationConfig {
    pub seed: u64,
    pub oracle_samples: usize,
    pub bound_samples: usize,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig { seed: 0, oracle_samples: 20, bound_samples: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst residual observed.
    pub worst: f64,
    pub limit: f64,
    pub samples: usize,
    /// Draws that could not be evaluated and were left out.
    pub skipped: usize,
}

impl Check {
    fn new(name: &'static str, worst: f64, limit: f64, samples: usize, skipped: usize) -> Self {
        Check { name, passed: worst <= limit, worst, limit, samples, skipped }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub config: ValidationConfig,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Random points the oracle resolves cheaply: `|α|² ≤ 10` and `β_M ħω ≥ 0.2`.
pub fn oracle_points(seed: u64, count: usize) -> Vec<EngineParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let r = 10f64.powf(rng.random_range(-2.0..0.0));
        let de = 10f64.powf(rng.random_range(-1.0..1.0));
        let hw = 10f64.powf(rng.random_range(-1.0..0.7));
        let g = 10f64.powf(rng.random_range(-3.0..1.0));
        let phi = rng.random_range(1e-3..2.0 * PI);
        let Ok(p) = EngineParams::with_phase(r, de, hw, g, phi) else {
            continue;
        };
        if alpha_sq(&p) <= 10.0 && p.meter_beta_hw() >= 0.2 {
            out.push(p);
        }
    }
    out
}

/// Uniform draws over the optimizer box in its search coordinates.
pub fn box_points(seed: u64, count: usize, bounds: &ParamBox) -> Vec<EngineParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let log = |rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)| 10f64.powf(rng.random_range(lo.log10()..=hi.log10()));
    (0..count)
        .filter_map(|_| {
            let r = log(&mut rng, bounds.temp_ratio);
            let de = log(&mut rng, bounds.delta_e);
            let hw = log(&mut rng, bounds.hbar_omega);
            let g = log(&mut rng, bounds.g_eff_sq);
            let (lo, hi) = bounds.phase_cycles;
            let cycles = rng.random_range(lo..=hi);
            EngineParams::with_phase(r, de, hw, g, 2.0 * PI * cycles).ok()
        })
        .collect()
}

pub fn oracle_residuals(points: &[EngineParams]) -> Result<OracleResiduals> {
    points
        .par_iter()
        .map(|p| compare_with_closed_form(p, DEFAULT_TOL))
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().fold(OracleResiduals::default(), OracleResiduals::merge))
}

/// Worst violations over a sample: `W_ext − T_S I`, `−I`, normalization and the system marginals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct BoundResiduals {
    pub bound: f64,
    pub info_negative: f64,
    pub normalization: f64,
    pub marginals: f64,
    pub evaluated: usize,
    pub skipped: usize,
}

pub fn bound_residuals(points: &[EngineParams]) -> BoundResiduals {
    let per_point: Vec<Option<[f64; 4]>> = points
        .par_iter()
        .map(|p| {
            let d = joint_distribution(p, DEFAULT_TOL).ok()?;
            let t = thermo_report_from(&d);
            let tail = d.tail_mass();
            let pops = d.populations();
            let s0: f64 = d.p0().iter().sum();
            let s1: f64 = d.p1().iter().sum();
            Some([
                t.w_ext - t.info,
                -t.info,
                (s0 + s1 + tail - 1.0).abs(),
                ((s0 - pops.a).abs().max((s1 - pops.b).abs()) - tail).max(0.0),
            ])
        })
        .collect();
    let mut out = BoundResiduals::default();
    for r in per_point {
        match r {
            Some([b, i, n, m]) => {
                out.bound = out.bound.max(b);
                out.info_negative = out.info_negative.max(i);
                out.normalization = out.normalization.max(n);
                out.marginals = out.marginals.max(m);
                out.evaluated += 1;
            }
            None => out.skipped += 1,
        }
    }
    out
}

/// Relative gap between the ground-state efficiency and the full pipeline at `temp_ratio = 1e−6`.
pub fn low_temp_residual(params: &EngineParams) -> Result<f64> {
    let closed = low_temp_efficiency(params);
    let full = evaluate_point(&params.set_temp_ratio(1e-6)?, DEFAULT_TOL)?;
    let eta = full
        .metrics
        .eta_he
        .ok_or_else(|| Error::Domain { what: "low-temperature check", reason: "point is not a heat engine".into() })?;
    Ok((eta - closed).abs() / closed.abs())
}

pub fn validate(config: &ValidationConfig) -> Result<ValidationReport> {
    let oracle = oracle_residuals(&oracle_points(config.seed, config.oracle_samples))?;
    let n = config.oracle_samples;
    let box_pts = box_points(config.seed.wrapping_add(1), config.bound_samples, &ParamBox::default());
    let b = bound_residuals(&box_pts);
    let invalid = config.bound_samples - box_pts.len();
    let low = low_temp_residual(&EngineParams::with_phase(1e-6, 4.0, 1.5, 0.4, PI / 2.0)?)?;
    let checks = vec![
        Check::new("oracle_joint", oracle.joint, ORACLE_LIMIT, n, 0),
        Check::new("oracle_w_meas", oracle.w_meas, ORACLE_LIMIT, n, 0),
        Check::new("oracle_s_tm", oracle.s_tm, ORACLE_LIMIT, n, 0),
        Check::new("oracle_info", oracle.info, ORACLE_LIMIT, n, 0),
        Check::new("oracle_w_ext", oracle.w_ext, ORACLE_LIMIT, n, 0),
        Check::new("free_energy_bound", b.bound, BOUND_LIMIT, b.evaluated, b.skipped + invalid),
        Check::new("info_nonnegative", b.info_negative, BOUND_LIMIT, b.evaluated, b.skipped + invalid),
        Check::new("normalization", b.normalization, BOUND_LIMIT, b.evaluated, b.skipped + invalid),
        Check::new("system_marginals", b.marginals, BOUND_LIMIT, b.evaluated, b.skipped + invalid),
        Check::new("low_temp_consistency", low, LOW_TEMP_LIMIT, 1, 0),
    ];
    Ok(ValidationReport { config: *config, checks })
}
