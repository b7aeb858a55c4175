//! Multi-objective search over engine parameters.

mod dominance;
mod engine;
mod export;
mod nsga2;

pub use dominance::{crowding_distance, dominates, non_dominated_sort, ObjectiveVector};
pub use engine::{
    engine_problem, run_engine, EngineMetrics, EngineProblem, FrontPoint, ObjectivePair, Orientation, ParetoFront,
};
pub use export::{fmt_f64, front_export, front_import, FrontRow, HEADER as FRONT_HEADER, UNITS_COMMENT as FRONT_UNITS};
pub use nsga2::{hypervolume, nsga2_run, GaConfig, GaOutcome, Individual, Problem};
