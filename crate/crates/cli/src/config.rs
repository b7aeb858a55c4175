//! Run configuration: a TOML file with one section per command, overridden by flags.

use std::path::{Path, PathBuf};

use infoengine_core::params::ParamBox;
use infoengine_core::pareto::{GaConfig, ObjectivePair, Orientation};
use infoengine_core::sweep::{Axis, AxisSpec, Spacing};
use infoengine_core::validation::ValidationConfig;
use infoengine_core::{EngineParams, Error, Result};
use serde::{Deserialize, Serialize};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "INFOENGINE_OUT_DIR";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluate: Option<EvaluateSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<AxisSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heatmap: Option<HeatmapSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub front: Option<FrontSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validate: Option<ValidateSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub temp_ratio: Option<f64>,
    pub delta_e: Option<f64>,
    pub hbar_omega: Option<f64>,
    pub g_eff_sq: Option<f64>,
    pub tau: Option<f64>,
    /// `ω t_m`; used when `tau` is absent.
    pub phase: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    /// File name, relative to `dir` unless absolute.
    pub file: Option<PathBuf>,
    pub format: Option<Format>,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateSection {
    pub distribution: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSection {
    pub axis: Option<Axis>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: Option<usize>,
    pub spacing: Option<Spacing>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatmapSection {
    #[serde(default)]
    pub x: AxisSection,
    #[serde(default)]
    pub y: AxisSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontSection {
    pub pair: Option<ObjectivePair>,
    pub orientation: Option<Orientation>,
    pub full_boundary: Option<bool>,
    #[serde(default)]
    pub ga: GaSection,
    #[serde(default)]
    pub bounds: BoundsSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaSection {
    pub population: Option<usize>,
    pub generations: Option<usize>,
    pub crossover_prob: Option<f64>,
    pub crossover_eta: Option<f64>,
    pub mutation_prob: Option<f64>,
    pub mutation_eta: Option<f64>,
    pub elite_fraction: Option<f64>,
    pub seed: Option<u64>,
    pub max_evaluations: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    pub temp_ratio: Option<[f64; 2]>,
    pub delta_e: Option<[f64; 2]>,
    pub hbar_omega: Option<[f64; 2]>,
    pub g_eff_sq: Option<[f64; 2]>,
    pub phase_cycles: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSection {
    pub seed: Option<u64>,
    pub oracle_samples: Option<usize>,
    pub bound_samples: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        let mut cfg: FileConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        // A relative output directory is taken relative to the file.
        if let (Some(dir), Some(base)) = (&cfg.output.dir, path.parent()) {
            if dir.is_relative() {
                cfg.output.dir = Some(base.join(dir));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Reference operating point used when neither file nor flags set a parameter.
pub const DEFAULT_POINT: [f64; 4] = [0.2, 4.0, 1.5, 0.4];

impl ParamsSection {
    /// Field-wise `self` over `fallback`.
    pub fn or(&self, fallback: &ParamsSection) -> ParamsSection {
        ParamsSection {
            temp_ratio: self.temp_ratio.or(fallback.temp_ratio),
            delta_e: self.delta_e.or(fallback.delta_e),
            hbar_omega: self.hbar_omega.or(fallback.hbar_omega),
            g_eff_sq: self.g_eff_sq.or(fallback.g_eff_sq),
            tau: self.tau.or(if self.phase.is_some() { None } else { fallback.tau }),
            phase: self.phase.or(if self.tau.is_some() { None } else { fallback.phase }),
        }
    }

    pub fn resolve(&self) -> Result<EngineParams> {
        let [r, de, hw, g] = DEFAULT_POINT;
        let (r, de, hw, g) = (
            self.temp_ratio.unwrap_or(r),
            self.delta_e.unwrap_or(de),
            self.hbar_omega.unwrap_or(hw),
            self.g_eff_sq.unwrap_or(g),
        );
        match (self.tau, self.phase) {
            (Some(_), Some(_)) => Err(Error::Config("set either `tau` or `phase`, not both".into())),
            (Some(tau), None) => EngineParams::new(r, de, hw, g, tau),
            (None, phase) => EngineParams::with_phase(r, de, hw, g, phase.unwrap_or(std::f64::consts::FRAC_PI_2)),
        }
    }
}

impl OutputSection {
    pub fn or(&self, fallback: &OutputSection) -> OutputSection {
        OutputSection {
            dir: self.dir.clone().or_else(|| fallback.dir.clone()),
            file: self.file.clone().or_else(|| fallback.file.clone()),
            format: self.format.or(fallback.format),
            tol: self.tol.or(fallback.tol),
        }
    }

    pub fn dir(&self) -> PathBuf {
        self.dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }

    /// Output path: `file` under `dir`, or `default_name` under `dir`.
    pub fn path(&self, default_name: &str) -> PathBuf {
        let file = self.file.clone().unwrap_or_else(|| PathBuf::from(default_name));
        if file.is_absolute() {
            file
        } else {
            self.dir().join(file)
        }
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(infoengine_core::displaced_fock::DEFAULT_TOL)
    }
}

impl AxisSection {
    pub fn or(&self, fallback: &AxisSection) -> AxisSection {
        AxisSection {
            axis: self.axis.or(fallback.axis),
            start: self.start.or(fallback.start),
            stop: self.stop.or(fallback.stop),
            points: self.points.or(fallback.points),
            spacing: self.spacing.or(fallback.spacing),
        }
    }

    pub fn resolve(&self, which: &str) -> Result<AxisSpec> {
        let missing = |f: &str| Error::Config(format!("{which}: `{f}` is required"));
        Ok(AxisSpec {
            axis: self.axis.ok_or_else(|| missing("axis"))?,
            start: self.start.ok_or_else(|| missing("start"))?,
            stop: self.stop.ok_or_else(|| missing("stop"))?,
            points: self.points.ok_or_else(|| missing("points"))?,
            spacing: self.spacing.unwrap_or_default(),
        })
    }
}

impl GaSection {
    pub fn or(&self, f: &GaSection) -> GaSection {
        GaSection {
            population: self.population.or(f.population),
            generations: self.generations.or(f.generations),
            crossover_prob: self.crossover_prob.or(f.crossover_prob),
            crossover_eta: self.crossover_eta.or(f.crossover_eta),
            mutation_prob: self.mutation_prob.or(f.mutation_prob),
            mutation_eta: self.mutation_eta.or(f.mutation_eta),
            elite_fraction: self.elite_fraction.or(f.elite_fraction),
            seed: self.seed.or(f.seed),
            max_evaluations: self.max_evaluations.or(f.max_evaluations),
        }
    }

    pub fn resolve(&self) -> GaConfig {
        let d = GaConfig::default();
        GaConfig {
            population: self.population.unwrap_or(d.population),
            generations: self.generations.unwrap_or(d.generations),
            crossover_prob: self.crossover_prob.unwrap_or(d.crossover_prob),
            crossover_eta: self.crossover_eta.unwrap_or(d.crossover_eta),
            mutation_prob: self.mutation_prob.unwrap_or(d.mutation_prob),
            mutation_eta: self.mutation_eta.unwrap_or(d.mutation_eta),
            elite_fraction: self.elite_fraction.unwrap_or(d.elite_fraction),
            seed: self.seed.unwrap_or(d.seed),
            max_evaluations: self.max_evaluations.or(d.max_evaluations),
        }
    }
}

impl BoundsSection {
    pub fn or(&self, f: &BoundsSection) -> BoundsSection {
        BoundsSection {
            temp_ratio: self.temp_ratio.or(f.temp_ratio),
            delta_e: self.delta_e.or(f.delta_e),
            hbar_omega: self.hbar_omega.or(f.hbar_omega),
            g_eff_sq: self.g_eff_sq.or(f.g_eff_sq),
            phase_cycles: self.phase_cycles.or(f.phase_cycles),
        }
    }

    pub fn resolve(&self) -> ParamBox {
        let d = ParamBox::default();
        let pick = |v: Option<[f64; 2]>, d: (f64, f64)| v.map_or(d, |[lo, hi]| (lo, hi));
        ParamBox {
            temp_ratio: pick(self.temp_ratio, d.temp_ratio),
            delta_e: pick(self.delta_e, d.delta_e),
            hbar_omega: pick(self.hbar_omega, d.hbar_omega),
            g_eff_sq: pick(self.g_eff_sq, d.g_eff_sq),
            phase_cycles: pick(self.phase_cycles, d.phase_cycles),
        }
    }
}

impl ValidateSection {
    pub fn or(&self, f: &ValidateSection) -> ValidateSection {
        ValidateSection {
            seed: self.seed.or(f.seed),
            oracle_samples: self.oracle_samples.or(f.oracle_samples),
            bound_samples: self.bound_samples.or(f.bound_samples),
        }
    }

    pub fn resolve(&self) -> ValidationConfig {
        let d = ValidationConfig::default();
        ValidationConfig {
            seed: self.seed.unwrap_or(d.seed),
            oracle_samples: self.oracle_samples.unwrap_or(d.oracle_samples),
            bound_samples: self.bound_samples.unwrap_or(d.bound_samples),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections() {
        let cfg: FileConfig = toml::from_str(
            r#"
            command = "sweep"
            [params]
            temp_ratio = 0.3
            tau = 1.0
            [output]
            format = "json"
            [sweep]
            axis = "g_eff_sq"
            start = 0.1
            stop = 1.0
            points = 5
            spacing = "log"
            [front.bounds]
            g_eff_sq = [1e-3, 10.0]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.output.format, Some(Format::Json));
        let spec = cfg.sweep.unwrap().resolve("sweep").unwrap();
        assert_eq!(spec.axis, Axis::GEffSq);
        assert_eq!(spec.spacing, Spacing::Log);
        let p = cfg.params.resolve().unwrap();
        assert_eq!((p.temp_ratio(), p.tau(), p.delta_e()), (0.3, 1.0, 4.0));
        assert_eq!(cfg.front.unwrap().bounds.resolve().g_eff_sq, (1e-3, 10.0));
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(toml::from_str::<FileConfig>("[params]\ntemperature = 1.0\n").is_err());
    }

    #[test]
    fn flags_override_and_time_fields_exclude() {
        let file = ParamsSection { tau: Some(2.0), g_eff_sq: Some(1.0), ..Default::default() };
        let flags = ParamsSection { phase: Some(1.5), ..Default::default() };
        let merged = flags.or(&file);
        assert_eq!(merged.tau, None);
        let p = merged.resolve().unwrap();
        assert_eq!(p.g_eff_sq(), 1.0);
        assert!((p.tau() - 1.0).abs() < 1e-15);
        let both = ParamsSection { tau: Some(1.0), phase: Some(1.0), ..Default::default() };
        assert!(matches!(both.resolve(), Err(Error::Config(_))));
    }

    #[test]
    fn toml_round_trip() {
        let cfg = FileConfig {
            command: Some("front".into()),
            front: Some(FrontSection {
                pair: Some(ObjectivePair::PowerVsEtaInfo),
                ga: GaSection { seed: Some(3), ..Default::default() },
                ..Default::default()
            }),
            ..Default::default()
        };
        assert_eq!(toml::from_str::<FileConfig>(&cfg.to_toml()).unwrap(), cfg);
    }
}
