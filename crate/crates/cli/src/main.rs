//! `infoengine`: evaluate, sweep and optimise the measurement-driven engine.

mod config;
mod output;
mod reproduce;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use infoengine_core::displaced_fock::joint_distribution;
use infoengine_core::pareto::{
    engine_problem, front_export, run_engine, GaConfig, ObjectivePair, Orientation, ParetoFront,
};
use infoengine_core::sweep::{heatmap, sweep, Axis, Spacing};
use infoengine_core::validation::validate;
use infoengine_core::{conditional_excited, evaluate_point, Error, ParamBox, PointReport, Result};
use serde::Serialize;

use config::{
    AxisSection, BoundsSection, EvaluateSection, FileConfig, Format, FrontSection, GaSection, HeatmapSection,
    OutputSection, ParamsSection, ValidateSection,
};

#[derive(Debug, Parser)]
#[command(name = "infoengine", version, about = "Finite-time quantum information engine toolkit")]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one operating point and print the report as JSON.
    Evaluate(EvaluateArgs),
    /// Evaluate a one-axis grid and write one row per point.
    Sweep(SweepArgs),
    /// Evaluate a two-axis grid in long format.
    Heatmap(HeatmapArgs),
    /// Run the multi-objective search and write the front with its metadata.
    Front(FrontArgs),
    /// Cross-check the closed forms against the oracle and the limit formulas.
    Validate(ValidateArgs),
    /// Write the configuration files for the standard figure and table runs.
    Reproduce(ReproduceArgs),
    /// Execute configuration files, dispatching on their `command` key.
    Run {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

#[derive(Debug, Default, Args)]
struct ParamArgs {
    /// Meter to system temperature ratio T_M/T_S.
    #[arg(long)]
    temp_ratio: Option<f64>,
    /// Level splitting in k_B T_S.
    #[arg(long)]
    delta_e: Option<f64>,
    /// Meter quantum in k_B T_S.
    #[arg(long)]
    hbar_omega: Option<f64>,
    /// Squared effective coupling in k_B T_S.
    #[arg(long)]
    g_eff_sq: Option<f64>,
    /// Measurement time in hbar/(k_B T_S).
    #[arg(long, conflicts_with = "phase")]
    tau: Option<f64>,
    /// Meter phase omega t_m in rad; the default when neither is given is pi/2.
    #[arg(long)]
    phase: Option<f64>,
}

impl ParamArgs {
    fn section(&self) -> ParamsSection {
        ParamsSection {
            temp_ratio: self.temp_ratio,
            delta_e: self.delta_e,
            hbar_omega: self.hbar_omega,
            g_eff_sq: self.g_eff_sq,
            tau: self.tau,
            phase: self.phase,
        }
    }
}

#[derive(Debug, Default, Args)]
struct OutputArgs {
    /// Output directory [env: INFOENGINE_OUT_DIR, default: .].
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Output file name, relative to the output directory unless absolute.
    #[arg(long, short, value_name = "FILE")]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Truncated tail mass tolerance of the meter distribution.
    #[arg(long)]
    tol: Option<f64>,
}

impl OutputArgs {
    fn section(&self) -> OutputSection {
        OutputSection { dir: self.out_dir.clone(), file: self.output.clone(), format: self.format, tol: self.tol }
    }
}

#[derive(Debug, Default, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Include the joint distribution and P(1|n).
    #[arg(long)]
    distribution: bool,
}

#[derive(Debug, Default, Args)]
struct SweepArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long)]
    axis: Option<Axis>,
    #[arg(long)]
    start: Option<f64>,
    #[arg(long)]
    stop: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// linear or log.
    #[arg(long)]
    spacing: Option<Spacing>,
}

#[derive(Debug, Default, Args)]
struct HeatmapArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long)]
    x_axis: Option<Axis>,
    #[arg(long)]
    x_start: Option<f64>,
    #[arg(long)]
    x_stop: Option<f64>,
    #[arg(long)]
    x_points: Option<usize>,
    #[arg(long)]
    x_spacing: Option<Spacing>,
    #[arg(long)]
    y_axis: Option<Axis>,
    #[arg(long)]
    y_start: Option<f64>,
    #[arg(long)]
    y_stop: Option<f64>,
    #[arg(long)]
    y_points: Option<usize>,
    #[arg(long)]
    y_spacing: Option<Spacing>,
}

#[derive(Debug, Default, Args)]
struct FrontArgs {
    #[command(flatten)]
    output: OutputArgs,
    /// power_vs_eta_he, power_star_vs_eta_he or power_vs_eta_info.
    #[arg(long)]
    pair: Option<ObjectivePair>,
    /// max_max or max_power_min_eff.
    #[arg(long)]
    orientation: Option<Orientation>,
    /// Run both orientations.
    #[arg(long)]
    full_boundary: bool,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    crossover_prob: Option<f64>,
    #[arg(long)]
    crossover_eta: Option<f64>,
    #[arg(long)]
    mutation_prob: Option<f64>,
    #[arg(long)]
    mutation_eta: Option<f64>,
    #[arg(long)]
    elite_fraction: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_evaluations: Option<usize>,
    #[arg(long, value_name = "LO,HI", value_parser = parse_range)]
    temp_ratio_range: Option<[f64; 2]>,
    #[arg(long, value_name = "LO,HI", value_parser = parse_range)]
    delta_e_range: Option<[f64; 2]>,
    #[arg(long, value_name = "LO,HI", value_parser = parse_range)]
    hbar_omega_range: Option<[f64; 2]>,
    #[arg(long, value_name = "LO,HI", value_parser = parse_range)]
    g_eff_sq_range: Option<[f64; 2]>,
    /// Bounds on omega t_m / 2 pi.
    #[arg(long, value_name = "LO,HI", value_parser = parse_range)]
    phase_cycles_range: Option<[f64; 2]>,
}

fn parse_range(s: &str) -> std::result::Result<[f64; 2], String> {
    let (lo, hi) = s.split_once(',').ok_or("expected LO,HI")?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok([num(lo)?, num(hi)?])
}

impl FrontArgs {
    fn section(&self) -> FrontSection {
        FrontSection {
            pair: self.pair,
            orientation: self.orientation,
            full_boundary: self.full_boundary.then_some(true),
            ga: GaSection {
                population: self.population,
                generations: self.generations,
                crossover_prob: self.crossover_prob,
                crossover_eta: self.crossover_eta,
                mutation_prob: self.mutation_prob,
                mutation_eta: self.mutation_eta,
                elite_fraction: self.elite_fraction,
                seed: self.seed,
                max_evaluations: self.max_evaluations,
            },
            bounds: BoundsSection {
                temp_ratio: self.temp_ratio_range,
                delta_e: self.delta_e_range,
                hbar_omega: self.hbar_omega_range,
                g_eff_sq: self.g_eff_sq_range,
                phase_cycles: self.phase_cycles_range,
            },
        }
    }
}

#[derive(Debug, Default, Args)]
struct ValidateArgs {
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    oracle_samples: Option<usize>,
    #[arg(long)]
    bound_samples: Option<usize>,
}

#[derive(Debug, Args)]
struct ReproduceArgs {
    /// Directory for the configuration bundle and, with --run, its outputs.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Also execute every configuration.
    #[arg(long)]
    run: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation { .. } | Error::Config(_) => 2,
        Error::TruncationCap { .. } | Error::TailTooLarge { .. } => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("infoengine: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Evaluate(a) => cmd_evaluate(&file, &a),
        Command::Sweep(a) => cmd_sweep(&file, &a),
        Command::Heatmap(a) => cmd_heatmap(&file, &a),
        Command::Front(a) => cmd_front(&file, &a),
        Command::Validate(a) => cmd_validate(&file, &a),
        Command::Reproduce(a) => cmd_reproduce(&file, &a),
        Command::Run { files } => files.iter().try_fold(0, |worst, f| Ok(worst.max(run_file(f)?))),
    }
}

/// Executes one configuration file with no flag overrides.
pub(crate) fn run_file(path: &Path) -> Result<u8> {
    let file = FileConfig::load(path)?;
    match file.command.as_deref() {
        Some("evaluate") => cmd_evaluate(&file, &EvaluateArgs::default()),
        Some("sweep") => cmd_sweep(&file, &SweepArgs::default()),
        Some("heatmap") => cmd_heatmap(&file, &HeatmapArgs::default()),
        Some("front") => cmd_front(&file, &FrontArgs::default()),
        Some("validate") => cmd_validate(&file, &ValidateArgs::default()),
        Some(other) => Err(Error::Config(format!("{}: unknown command `{other}`", path.display()))),
        None => Err(Error::Config(format!("{}: missing `command`", path.display()))),
    }
}

#[derive(Serialize)]
struct Distribution {
    n_max: usize,
    tail_mass: f64,
    /// `P(0, n)`.
    p0: Vec<f64>,
    /// `P(1, n)`.
    p1: Vec<f64>,
    /// `P(1 | n)`; null where the outcome has vanishing probability.
    p_excited_given_n: Vec<Option<f64>>,
}

#[derive(Serialize)]
struct EvaluateOutput {
    #[serde(flatten)]
    report: PointReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    distribution: Option<Distribution>,
}

fn cmd_evaluate(file: &FileConfig, a: &EvaluateArgs) -> Result<u8> {
    let params = a.params.section().or(&file.params).resolve()?;
    let out = a.output.section().or(&file.output);
    let section = EvaluateSection { distribution: a.distribution.then_some(true) };
    let fallback = file.evaluate.clone().unwrap_or_default();
    let with_distribution = section.distribution.or(fallback.distribution).unwrap_or(false);
    let tol = out.tol();
    let report = evaluate_point(&params, tol)?;
    let distribution = if with_distribution {
        let dist = joint_distribution(&params, tol)?;
        Some(Distribution {
            n_max: dist.n_max(),
            tail_mass: dist.tail_mass(),
            p0: dist.p0().to_vec(),
            p1: dist.p1().to_vec(),
            p_excited_given_n: (0..=dist.n_max()).map(|n| conditional_excited(&dist, n).ok()).collect(),
        })
    } else {
        None
    };
    let text = output::to_json(&EvaluateOutput { report, distribution });
    print!("{text}");
    if out.file.is_some() {
        output::write_text(&out.path("evaluate.json"), &text)?;
    }
    Ok(0)
}

fn write_grid(
    out: &OutputSection,
    dims: usize,
    name: &str,
    points: &[infoengine_core::sweep::SweepPoint],
) -> Result<()> {
    match out.format.unwrap_or_default() {
        Format::Csv => output::write_sweep_csv(&out.path(&format!("{name}.csv")), dims, points),
        Format::Json => output::write_text(&out.path(&format!("{name}.json")), &output::to_json(&points)),
    }
}

fn axis_flags(
    axis: Option<Axis>,
    start: Option<f64>,
    stop: Option<f64>,
    points: Option<usize>,
    spacing: Option<Spacing>,
) -> AxisSection {
    AxisSection { axis, start, stop, points, spacing }
}

fn cmd_sweep(file: &FileConfig, a: &SweepArgs) -> Result<u8> {
    let base = a.params.section().or(&file.params).resolve()?;
    let out = a.output.section().or(&file.output);
    let flags = axis_flags(a.axis, a.start, a.stop, a.points, a.spacing);
    let spec = flags.or(&file.sweep.clone().unwrap_or_default()).resolve("sweep")?;
    let points = sweep(&base, spec, out.tol())?;
    write_grid(&out, 1, &format!("sweep_{}", spec.axis), &points)?;
    Ok(0)
}

fn cmd_heatmap(file: &FileConfig, a: &HeatmapArgs) -> Result<u8> {
    let base = a.params.section().or(&file.params).resolve()?;
    let out = a.output.section().or(&file.output);
    let fallback = file.heatmap.clone().unwrap_or_default();
    let flags = HeatmapSection {
        x: axis_flags(a.x_axis, a.x_start, a.x_stop, a.x_points, a.x_spacing),
        y: axis_flags(a.y_axis, a.y_start, a.y_stop, a.y_points, a.y_spacing),
    };
    let x = flags.x.or(&fallback.x).resolve("heatmap.x")?;
    let y = flags.y.or(&fallback.y).resolve("heatmap.y")?;
    let points = heatmap(&base, x, y, out.tol())?;
    write_grid(&out, 2, &format!("heatmap_{}_{}", x.axis, y.axis), &points)?;
    Ok(0)
}

#[derive(Serialize)]
struct FrontMeta<'a> {
    pair: ObjectivePair,
    orientation: Orientation,
    /// Raw metric names behind the two objectives.
    objectives: [&'static str; 2],
    csv: String,
    points: usize,
    hypervolume: f64,
    /// Reference point in negated-objective space.
    reference: &'a [f64],
    evaluations: usize,
    tol: f64,
    ga: GaConfig,
    bounds: ParamBox,
}

fn cmd_front(file: &FileConfig, a: &FrontArgs) -> Result<u8> {
    let out = a.output.section().or(&file.output);
    let fallback = file.front.clone().unwrap_or_default();
    let flags = a.section();
    let pair = flags.pair.or(fallback.pair).unwrap_or(ObjectivePair::PowerVsEtaHe);
    let orientation = flags.orientation.or(fallback.orientation).unwrap_or_default();
    let full = flags.full_boundary.or(fallback.full_boundary).unwrap_or(false);
    let ga = flags.ga.or(&fallback.ga).resolve();
    let bounds = flags.bounds.or(&fallback.bounds).resolve();
    let orientations = if full { Orientation::ALL.to_vec() } else { vec![orientation] };

    // All runs finish before anything is written.
    let fronts = orientations
        .iter()
        .map(|&o| {
            let mut problem = engine_problem(pair, bounds, o)?;
            problem.tol = out.tol();
            run_engine(&problem, &ga)
        })
        .collect::<Result<Vec<ParetoFront>>>()?;

    let stem = out
        .file
        .as_ref()
        .and_then(|f| f.file_stem())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| format!("front_{pair}"));
    // Sibling of the configured file, or of the output directory.
    let target = |file_name: &str| {
        OutputSection {
            file: Some(out.file.as_ref().map_or_else(|| file_name.into(), |f| f.with_file_name(file_name))),
            ..out.clone()
        }
        .path(file_name)
    };
    for front in &fronts {
        let name = format!("{stem}_{}", front.orientation);
        let csv_path = target(&format!("{name}.csv"));
        output::ensure_parent(&csv_path)?;
        front_export(front, &csv_path)?;
        let meta = FrontMeta {
            pair: front.pair,
            orientation: front.orientation,
            objectives: front.pair.metric_names(),
            csv: format!("{name}.csv"),
            points: front.points.len(),
            hypervolume: front.hypervolume,
            reference: &front.reference,
            evaluations: front.evaluations,
            tol: out.tol(),
            ga,
            bounds,
        };
        output::write_text(&target(&format!("{name}.json")), &output::to_json(&meta))?;
    }
    Ok(0)
}

fn cmd_validate(file: &FileConfig, a: &ValidateArgs) -> Result<u8> {
    let out = a.output.section().or(&file.output);
    let flags = ValidateSection { seed: a.seed, oracle_samples: a.oracle_samples, bound_samples: a.bound_samples };
    let config = flags.or(&file.validate.clone().unwrap_or_default()).resolve();
    let report = validate(&config)?;
    let text = output::to_json(&report);
    print!("{text}");
    if out.file.is_some() {
        output::write_text(&out.path("validate.json"), &text)?;
    }
    Ok(if report.passed() { 0 } else { 1 })
}

fn cmd_reproduce(file: &FileConfig, a: &ReproduceArgs) -> Result<u8> {
    let dir = a.out.clone().unwrap_or_else(|| file.output.dir());
    let written = reproduce::write_bundle(&dir)?;
    for path in &written {
        println!("{}", path.display());
    }
    if !a.run {
        return Ok(0);
    }
    written
        .iter()
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .try_fold(0, |worst, p| Ok(worst.max(run_file(p)?)))
}
