//! Configuration bundle for the standard figure and table runs.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use infoengine_core::pareto::{ObjectivePair, Orientation};
use infoengine_core::sweep::{Axis, Spacing};
use infoengine_core::Result;

use crate::config::{
    AxisSection, EvaluateSection, FileConfig, FrontSection, GaSection, HeatmapSection, OutputSection, ParamsSection,
};
use crate::output::write_text;

/// Coupling ratios `g_eff² / ΔE` of the time traces.
const COUPLING_RATIOS: [(&str, f64); 3] = [("0p01", 0.01), ("0p1", 0.1), ("1", 1.0)];

/// `(T_M/T_S, ΔE, ħω, g_eff²)` shared by most figures.
const REFERENCE: (f64, f64, f64, f64) = (0.2, 4.0, 1.5, 0.4);

struct Entry {
    name: String,
    about: String,
    config: FileConfig,
}

fn params(temp_ratio: f64, delta_e: f64, hbar_omega: f64, g_eff_sq: f64, phase: Option<f64>) -> ParamsSection {
    ParamsSection {
        temp_ratio: Some(temp_ratio),
        delta_e: Some(delta_e),
        hbar_omega: Some(hbar_omega),
        g_eff_sq: Some(g_eff_sq),
        tau: None,
        phase,
    }
}

fn axis(axis: Axis, start: f64, stop: f64, points: usize, spacing: Spacing) -> AxisSection {
    AxisSection { axis: Some(axis), start: Some(start), stop: Some(stop), points: Some(points), spacing: Some(spacing) }
}

fn output(name: &str) -> OutputSection {
    OutputSection { dir: Some(PathBuf::from(".")), file: Some(PathBuf::from(name)), ..Default::default() }
}

fn entry(name: impl Into<String>, about: impl Into<String>, command: &str, mut config: FileConfig) -> Entry {
    let name = name.into();
    config.command = Some(command.into());
    let file = match command {
        "evaluate" => format!("{name}.json"),
        "front" => name.clone(),
        _ => format!("{name}.csv"),
    };
    config.output = output(&file);
    Entry { name, about: about.into(), config }
}

fn phase_trace(name: String, about: String, temp_ratio: f64, ratio: f64) -> Entry {
    let (_, de, hw, _) = REFERENCE;
    let config = FileConfig {
        params: params(temp_ratio, de, hw, ratio * de, None),
        sweep: Some(axis(Axis::Phase, 2.0 * PI / 2000.0, 2.0 * PI, 2000, Spacing::Linear)),
        ..Default::default()
    };
    entry(name, about, "sweep", config)
}

fn front(name: &str, about: &str, pair: ObjectivePair, full_boundary: bool) -> Entry {
    let config = FileConfig {
        front: Some(FrontSection {
            pair: Some(pair),
            orientation: Some(Orientation::MaxMax),
            full_boundary: Some(full_boundary),
            ga: GaSection { seed: Some(1), ..Default::default() },
            ..Default::default()
        }),
        ..Default::default()
    };
    entry(name, about, "front", config)
}

fn bundle() -> Vec<Entry> {
    let (r, de, hw, g) = REFERENCE;
    let mut out = Vec::new();

    out.push(entry(
        "fig2",
        "joint distribution and P(1|n) at phase pi/2",
        "evaluate",
        FileConfig {
            params: params(0.3, 1.0, 0.1, 1.0, Some(PI / 2.0)),
            evaluate: Some(EvaluateSection { distribution: Some(true) }),
            ..Default::default()
        },
    ));

    out.push(entry(
        "fig3",
        "eta_info and n' against the temperature ratio",
        "sweep",
        FileConfig {
            params: params(r, de, hw, g, Some(PI / 2.0)),
            sweep: Some(axis(Axis::TempRatio, 1.0 / 2000.0, 1.0, 2000, Spacing::Linear)),
            ..Default::default()
        },
    ));

    for (tag, ratio) in COUPLING_RATIOS {
        out.push(phase_trace(
            format!("fig4_g{tag}"),
            format!("power over one meter period at g_eff^2/dE = {ratio}"),
            0.1,
            ratio,
        ));
    }

    for (tag, phase) in [("a", 2.0 * PI * 1e-6), ("b", PI / 4.0), ("c", PI / 2.0), ("d", PI)] {
        out.push(entry(
            format!("fig5{tag}"),
            format!("power over temperature ratio and coupling at phase {phase:e}"),
            "heatmap",
            FileConfig {
                params: params(r, de, hw, g, Some(phase)),
                heatmap: Some(HeatmapSection {
                    x: axis(Axis::TempRatio, 0.01, 1.0, 100, Spacing::Linear),
                    y: axis(Axis::GEffSq, 0.01 * de, 100.0 * de, 100, Spacing::Log),
                }),
                ..Default::default()
            },
        ));
    }

    out.push(entry(
        "fig6",
        "eta_HE against the temperature ratio with Carnot and Curzon-Ahlborn references",
        "sweep",
        FileConfig {
            params: params(r, de, hw, g, Some(PI / 2.0)),
            sweep: Some(axis(Axis::TempRatio, 1e-4, 1.0, 1000, Spacing::Log)),
            ..Default::default()
        },
    ));

    for (tag, ratio) in COUPLING_RATIOS {
        out.push(phase_trace(
            format!("fig7_g{tag}"),
            format!("eta_info and eta_HE/eta_CA over one meter period at g_eff^2/dE = {ratio}"),
            r,
            ratio,
        ));
    }

    out.push(front("fig8_table1", "power against eta_HE, upper and lower boundary", ObjectivePair::PowerVsEtaHe, true));
    out.push(front(
        "fig8_star",
        "power including the pi-pulse time against eta_HE",
        ObjectivePair::PowerStarVsEtaHe,
        false,
    ));
    out.push(front(
        "fig9_table2",
        "power against eta_info, upper and lower boundary",
        ObjectivePair::PowerVsEtaInfo,
        true,
    ));
    out
}

/// Writes one TOML file per run plus `commands.txt`; returns the paths written.
pub fn write_bundle(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut commands = String::new();
    for e in bundle() {
        let path = dir.join(format!("{}.toml", e.name));
        write_text(&path, &format!("# {}\n{}", e.about, e.config.to_toml()))?;
        commands += &format!("infoengine run {}.toml\n", e.name);
        written.push(path);
    }
    let list = dir.join("commands.txt");
    write_text(&list, &commands)?;
    written.push(list);
    Ok(written)
}
