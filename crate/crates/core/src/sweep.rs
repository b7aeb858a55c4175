//! One- and two-axis parameter grids.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{evaluate_point, PointReport};
use crate::params::EngineParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    TempRatio,
    DeltaE,
    HbarOmega,
    GEffSq,
    Tau,
    /// Swept at fixed `ħω`, so `τ` follows.
    Phase,
}

impl Axis {
    pub const ALL: [Axis; 6] = [Axis::TempRatio, Axis::DeltaE, Axis::HbarOmega, Axis::GEffSq, Axis::Tau, Axis::Phase];

    pub fn as_str(self) -> &'static str {
        match self {
            Axis::TempRatio => "temp_ratio",
            Axis::DeltaE => "delta_e",
            Axis::HbarOmega => "hbar_omega",
            Axis::GEffSq => "g_eff_sq",
            Axis::Tau => "tau",
            Axis::Phase => "phase",
        }
    }

    pub fn apply(self, params: EngineParams, value: f64) -> Result<EngineParams> {
        match self {
            Axis::TempRatio => params.set_temp_ratio(value),
            Axis::DeltaE => params.set_delta_e(value),
            Axis::HbarOmega => params.set_hbar_omega(value),
            Axis::GEffSq => params.set_g_eff_sq(value),
            Axis::Tau => params.set_tau(value),
            Axis::Phase => params.set_phase(value),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Axis::ALL.into_iter().find(|a| a.as_str() == s).ok_or_else(|| Error::Config(format!("unknown axis `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

impl Spacing {
    pub fn as_str(self) -> &'static str {
        match self {
            Spacing::Linear => "linear",
            Spacing::Log => "log",
        }
    }
}

impl fmt::Display for Spacing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Spacing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Spacing::Linear, Spacing::Log]
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown spacing `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub axis: Axis,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl AxisSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(invalid("start", self.start, "grid ends must be finite"));
        }
        if self.spacing == Spacing::Log && (self.start <= 0.0 || self.stop <= 0.0) {
            return Err(invalid("start", self.start.min(self.stop), "log grid needs positive ends"));
        }
        let n = self.points;
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut v: Vec<f64> = (0..n)
            .map(|i| {
                let t = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
                match self.spacing {
                    Spacing::Linear => self.start + (self.stop - self.start) * t,
                    Spacing::Log => (self.start.ln() + (self.stop / self.start).ln() * t).exp(),
                }
            })
            .collect();
        v[0] = self.start;
        if n > 1 {
            v[n - 1] = self.stop;
        }
        Ok(v)
    }
}

fn invalid(field: &'static str, value: f64, reason: &'static str) -> Error {
    Error::Validation { field, value, reason }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    /// Grid index along each swept axis.
    pub index: Vec<usize>,
    pub report: PointReport,
}

/// Evaluates the Cartesian grid spanned by `axes` around `base`, row-major with the
/// last axis fastest. The first failing grid point, in grid order, aborts the sweep.
pub fn sweep_grid(base: &EngineParams, axes: &[AxisSpec], tol: f64) -> Result<Vec<SweepPoint>> {
    let values = axes.iter().map(AxisSpec::values).collect::<Result<Vec<_>>>()?;
    let total: usize = values.iter().map(Vec::len).product();
    let indices: Vec<Vec<usize>> = (0..total)
        .map(|mut flat| {
            let mut idx = vec![0; values.len()];
            for (k, v) in values.iter().enumerate().rev() {
                idx[k] = flat % v.len();
                flat /= v.len();
            }
            idx
        })
        .collect();
    indices
        .into_par_iter()
        .map(|index| {
            let mut p = *base;
            for ((spec, vals), &i) in axes.iter().zip(&values).zip(&index) {
                p = spec.axis.apply(p, vals[i])?;
            }
            let report = evaluate_point(&p, tol)?;
            Ok(SweepPoint { index, report })
        })
        .collect::<Vec<Result<SweepPoint>>>()
        .into_iter()
        .collect()
}

pub fn sweep(base: &EngineParams, axis: AxisSpec, tol: f64) -> Result<Vec<SweepPoint>> {
    sweep_grid(base, &[axis], tol)
}

pub fn heatmap(base: &EngineParams, x: AxisSpec, y: AxisSpec, tol: f64) -> Result<Vec<SweepPoint>> {
    if x.axis == y.axis {
        return Err(Error::Config(format!("heatmap axes must differ, both are `{}`", x.axis)));
    }
    sweep_grid(base, &[x, y], tol)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::displaced_fock::DEFAULT_TOL;

    fn spec(axis: Axis, start: f64, stop: f64, points: usize, spacing: Spacing) -> AxisSpec {
        AxisSpec { axis, start, stop, points, spacing }
    }

    #[test]
    fn grids() {
        let v = spec(Axis::Tau, 0.0, 1.0, 5, Spacing::Linear).values().unwrap();
        assert_eq!(v, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let v = spec(Axis::GEffSq, 1e-2, 1e2, 5, Spacing::Log).values().unwrap();
        for (a, b) in v.iter().zip([1e-2, 1e-1, 1.0, 1e1, 1e2]) {
            assert!((a / b - 1.0).abs() < 1e-14);
        }
        assert_eq!(spec(Axis::Tau, 3.0, 4.0, 1, Spacing::Linear).values().unwrap(), vec![3.0]);
        assert!(spec(Axis::Tau, 0.0, 1.0, 0, Spacing::Linear).values().unwrap().is_empty());
        assert!(spec(Axis::Tau, 0.0, 1.0, 3, Spacing::Log).values().is_err());
    }

    #[test]
    fn axis_names_round_trip() {
        for a in Axis::ALL {
            assert_eq!(a.as_str().parse::<Axis>().unwrap(), a);
        }
        assert!("omega".parse::<Axis>().is_err());
        assert_eq!("log".parse::<Spacing>().unwrap(), Spacing::Log);
        assert!("geometric".parse::<Spacing>().is_err());
    }

    #[test]
    fn heatmap_order_and_values() {
        let base = EngineParams::with_phase(0.2, 4.0, 1.5, 0.4, PI / 2.0).unwrap();
        let x = spec(Axis::GEffSq, 0.1, 1.0, 3, Spacing::Linear);
        let y = spec(Axis::TempRatio, 0.1, 0.3, 4, Spacing::Linear);
        let rows = heatmap(&base, x, y, DEFAULT_TOL).unwrap();
        assert_eq!(rows.len(), 12);
        assert_eq!(rows[5].index, vec![1, 1]);
        let r = y.values().unwrap()[1];
        let p = EngineParams::new(r, 4.0, 1.5, 0.55, PI / 3.0).unwrap();
        let direct = evaluate_point(&p, DEFAULT_TOL).unwrap();
        assert_eq!(rows[5].report, direct);
        assert!(heatmap(&base, x, x, DEFAULT_TOL).is_err());
    }

    #[test]
    fn empty_grid() {
        let base = EngineParams::with_phase(0.2, 4.0, 1.5, 0.4, PI / 2.0).unwrap();
        assert!(sweep(&base, spec(Axis::Tau, 0.0, 1.0, 0, Spacing::Linear), DEFAULT_TOL).unwrap().is_empty());
    }

    #[test]
    fn invalid_point_aborts() {
        let base = EngineParams::with_phase(0.2, 4.0, 1.5, 0.4, PI / 2.0).unwrap();
        let err = sweep(&base, spec(Axis::TempRatio, 0.5, 2.0, 4, Spacing::Linear), DEFAULT_TOL).unwrap_err();
        assert!(matches!(err, Error::Validation { field: "temp_ratio", .. }), "{err}");
    }
}
