//! Engine objective pairs for the genetic search.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dominance::ObjectiveVector;
use super::nsga2::{nsga2_run, GaConfig, Problem};
use crate::displaced_fock::DEFAULT_TOL;
use crate::error::{Error, Result};
use crate::metrics::{evaluate_point, Regime, IDLE_BAND};
use crate::params::{EngineParams, ParamBox};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectivePair {
    PowerVsEtaHe,
    PowerStarVsEtaHe,
    PowerVsEtaInfo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    #[default]
    MaxMax,
    /// Maximize power, minimize efficiency: the lower branch of the attainable region.
    MaxPowerMinEff,
}

impl ObjectivePair {
    pub const ALL: [ObjectivePair; 3] =
        [ObjectivePair::PowerVsEtaHe, ObjectivePair::PowerStarVsEtaHe, ObjectivePair::PowerVsEtaInfo];

    pub fn as_str(self) -> &'static str {
        match self {
            ObjectivePair::PowerVsEtaHe => "power_vs_eta_he",
            ObjectivePair::PowerStarVsEtaHe => "power_star_vs_eta_he",
            ObjectivePair::PowerVsEtaInfo => "power_vs_eta_info",
        }
    }

    /// Column names of the two raw metrics.
    pub fn metric_names(self) -> [&'static str; 2] {
        match self {
            ObjectivePair::PowerVsEtaHe => ["power", "eta_he"],
            ObjectivePair::PowerStarVsEtaHe => ["power_star", "eta_he"],
            ObjectivePair::PowerVsEtaInfo => ["power", "eta_info"],
        }
    }

    fn constrained(self) -> bool {
        self != ObjectivePair::PowerVsEtaInfo
    }
}

impl Orientation {
    pub const ALL: [Orientation; 2] = [Orientation::MaxMax, Orientation::MaxPowerMinEff];

    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::MaxMax => "max_max",
            Orientation::MaxPowerMinEff => "max_power_min_eff",
        }
    }
}

macro_rules! named_enum {
    ($t:ty, $what:literal) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $t {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                <$t>::ALL
                    .into_iter()
                    .find(|v| v.as_str() == s)
                    .ok_or_else(|| Error::Config(format!(concat!("unknown ", $what, " `{}`"), s)))
            }
        }
    };
}

named_enum!(ObjectivePair, "objective pair");
named_enum!(Orientation, "orientation");

/// Metrics of one evaluated candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineMetrics {
    pub power: f64,
    pub power_star: f64,
    pub eta_he: Option<f64>,
    pub eta_info: f64,
    pub w_net: f64,
    pub regime: Regime,
}

impl EngineMetrics {
    /// The pair's two raw metrics; efficiency is `None` outside the heat-engine regime for η_HE pairs.
    pub fn pair(&self, pair: ObjectivePair) -> (f64, Option<f64>) {
        match pair {
            ObjectivePair::PowerVsEtaHe => (self.power, self.eta_he),
            ObjectivePair::PowerStarVsEtaHe => (self.power_star, self.eta_he),
            ObjectivePair::PowerVsEtaInfo => (self.power, Some(self.eta_info)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineProblem {
    pub pair: ObjectivePair,
    pub orientation: Orientation,
    pub bounds: ParamBox,
    pub tol: f64,
}

/// Builds the search problem for one metric pair. Decision variables are the base-10
/// logarithms of `temp_ratio`, `delta_e`, `hbar_omega`, `g_eff_sq` and the phase in cycles.
pub fn engine_problem(pair: ObjectivePair, bounds: ParamBox, orientation: Orientation) -> Result<EngineProblem> {
    let ranges = [
        ("temp_ratio", bounds.temp_ratio, 1.0),
        ("delta_e", bounds.delta_e, f64::INFINITY),
        ("hbar_omega", bounds.hbar_omega, f64::INFINITY),
        ("g_eff_sq", bounds.g_eff_sq, f64::INFINITY),
        ("phase_cycles", bounds.phase_cycles, f64::INFINITY),
    ];
    for (field, (lo, hi), max) in ranges {
        if !(lo > 0.0 && lo <= hi && hi <= max && hi.is_finite()) {
            return Err(Error::Validation {
                field,
                value: if lo > 0.0 { hi } else { lo },
                reason: "bounds must satisfy 0 < lower <= upper within the parameter domain",
            });
        }
    }
    Ok(EngineProblem { pair, orientation, bounds, tol: DEFAULT_TOL })
}

impl EngineProblem {
    pub fn decode(&self, x: &[f64]) -> Result<EngineParams> {
        let p = |i: usize| 10f64.powf(x[i]);
        EngineParams::with_phase(p(0), p(1), p(2), p(3), 2.0 * PI * x[4])
    }

    fn objectives(&self, m: &EngineMetrics) -> ObjectiveVector {
        let (power, eff) = m.pair(self.pair);
        let violation =
            if self.pair.constrained() && m.regime != Regime::HeatEngine { (-m.w_net).max(IDLE_BAND) } else { 0.0 };
        let eff = eff.unwrap_or(0.0);
        let second = match self.orientation {
            Orientation::MaxMax => -eff,
            Orientation::MaxPowerMinEff => eff,
        };
        ObjectiveVector { values: vec![-power, second], violation }
    }

    pub fn metrics(&self, params: &EngineParams) -> Result<EngineMetrics> {
        let r = evaluate_point(params, self.tol)?;
        let power = r.metrics.power.ok_or(Error::ZeroTime)?;
        Ok(EngineMetrics {
            power,
            power_star: r.metrics.power_star.ok_or(Error::ZeroTime)?,
            eta_he: r.metrics.eta_he,
            eta_info: r.metrics.eta_info,
            w_net: r.thermo.w_net,
            regime: r.metrics.regime,
        })
    }
}

/// Failed evaluations (truncation cap, excessive tail) carry the error text and the
/// largest violation, so they never outrank a computed point.
pub type Evaluated = std::result::Result<(EngineParams, EngineMetrics), String>;

impl Problem for EngineProblem {
    type Raw = Evaluated;

    fn bounds(&self) -> Vec<(f64, f64)> {
        let b = &self.bounds;
        let lg = |(lo, hi): (f64, f64)| (lo.log10(), hi.log10());
        vec![lg(b.temp_ratio), lg(b.delta_e), lg(b.hbar_omega), lg(b.g_eff_sq), b.phase_cycles]
    }

    fn evaluate(&self, x: &[f64]) -> (ObjectiveVector, Evaluated) {
        match self.decode(x).and_then(|p| Ok((p, self.metrics(&p)?))) {
            Ok((p, m)) => (self.objectives(&m), Ok((p, m))),
            Err(e) => (ObjectiveVector { values: vec![0.0, 0.0], violation: f64::MAX }, Err(e.to_string())),
        }
    }

    fn reference(&self) -> Vec<f64> {
        match self.orientation {
            Orientation::MaxMax => vec![0.0, 0.0],
            Orientation::MaxPowerMinEff => vec![0.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontPoint {
    pub params: EngineParams,
    pub metrics: EngineMetrics,
    pub objectives: ObjectiveVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    pub pair: ObjectivePair,
    pub orientation: Orientation,
    pub bounds: ParamBox,
    /// Ordered by the first raw metric, then the second.
    pub points: Vec<FrontPoint>,
    pub seed: u64,
    pub generations: usize,
    pub population: usize,
    pub evaluations: usize,
    pub hypervolume: f64,
    /// Hypervolume reference point in minimized objective coordinates.
    pub reference: Vec<f64>,
}

impl ParetoFront {
    pub fn raw(&self, point: &FrontPoint) -> (f64, Option<f64>) {
        point.metrics.pair(self.pair)
    }
}

pub fn run_engine(problem: &EngineProblem, config: &GaConfig) -> Result<ParetoFront> {
    let out = nsga2_run(problem, config)?;
    let mut points: Vec<FrontPoint> = out
        .front
        .into_iter()
        .filter_map(|m| m.raw.ok().map(|(params, metrics)| FrontPoint { params, metrics, objectives: m.objectives }))
        .collect();
    let pair = problem.pair;
    points.sort_by(|a, b| {
        let (pa, ea) = a.metrics.pair(pair);
        let (pb, eb) = b.metrics.pair(pair);
        pa.total_cmp(&pb).then(ea.unwrap_or(f64::NAN).total_cmp(&eb.unwrap_or(f64::NAN)))
    });
    Ok(ParetoFront {
        pair,
        orientation: problem.orientation,
        bounds: problem.bounds,
        points,
        seed: out.seed,
        generations: out.generations,
        population: out.population,
        evaluations: out.evaluations,
        hypervolume: out.hypervolume,
        reference: out.reference,
    })
}
