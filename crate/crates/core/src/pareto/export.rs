//! CSV form of an engine front.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use super::engine::ParetoFront;
use crate::error::{Error, Result};

/// Units line written ahead of the header.
pub const UNITS_COMMENT: &str =
    "# energies in k_B T_S, tau in hbar/(k_B T_S), power in k_B T_S per hbar/(k_B T_S), efficiencies dimensionless";

pub const HEADER: [&str; 12] = [
    "power",
    "power_star",
    "eta_he",
    "eta_info",
    "w_net",
    "temp_ratio",
    "delta_e",
    "hbar_omega",
    "g_eff_sq",
    "tau",
    "seed",
    "rank",
];

/// One line of a front file.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontRow {
    pub power: f64,
    pub power_star: f64,
    pub eta_he: Option<f64>,
    pub eta_info: f64,
    pub w_net: f64,
    pub temp_ratio: f64,
    pub delta_e: f64,
    pub hbar_omega: f64,
    pub g_eff_sq: f64,
    pub tau: f64,
    pub seed: u64,
    pub rank: usize,
}

/// Seventeen significant digits.
pub fn fmt_f64(v: f64) -> String {
    // Adding zero folds -0 into 0.
    format!("{:.16e}", v + 0.0)
}

impl FrontRow {
    pub fn from_front(front: &ParetoFront) -> Vec<FrontRow> {
        front
            .points
            .iter()
            .map(|p| FrontRow {
                power: p.metrics.power,
                power_star: p.metrics.power_star,
                eta_he: p.metrics.eta_he,
                eta_info: p.metrics.eta_info,
                w_net: p.metrics.w_net,
                temp_ratio: p.params.temp_ratio(),
                delta_e: p.params.delta_e(),
                hbar_omega: p.params.hbar_omega(),
                g_eff_sq: p.params.g_eff_sq(),
                tau: p.params.tau(),
                seed: front.seed,
                rank: 0,
            })
            .collect()
    }

    fn record(&self) -> Vec<String> {
        let mut r: Vec<String> = [self.power, self.power_star].into_iter().map(fmt_f64).collect();
        r.push(self.eta_he.map(fmt_f64).unwrap_or_default());
        r.extend(
            [self.eta_info, self.w_net, self.temp_ratio, self.delta_e, self.hbar_omega, self.g_eff_sq, self.tau]
                .into_iter()
                .map(fmt_f64),
        );
        r.push(self.seed.to_string());
        r.push(self.rank.to_string());
        r
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv { path: path.to_path_buf(), source }
}

pub fn front_export(front: &ParetoFront, path: &Path) -> Result<()> {
    let mut file = File::create(path).map_err(io_err(path))?;
    writeln!(file, "{UNITS_COMMENT}").map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(HEADER).map_err(csv_err(path))?;
    for row in FrontRow::from_front(front) {
        w.write_record(row.record()).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn front_import(path: &Path) -> Result<Vec<FrontRow>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).map_err(csv_err(path))?;
    let header = r.headers().map_err(csv_err(path))?.clone();
    if header.iter().ne(HEADER) {
        return Err(Error::FrontFormat {
            path: path.to_path_buf(),
            reason: format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let bad = |reason: String| Error::FrontFormat { path: path.to_path_buf(), reason };
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let num = |i: usize| -> Result<f64> {
            rec[i].parse::<f64>().map_err(|e| bad(format!("row {line}, column {}: {e}", HEADER[i])))
        };
        rows.push(FrontRow {
            power: num(0)?,
            power_star: num(1)?,
            eta_he: if rec[2].is_empty() { None } else { Some(num(2)?) },
            eta_info: num(3)?,
            w_net: num(4)?,
            temp_ratio: num(5)?,
            delta_e: num(6)?,
            hbar_omega: num(7)?,
            g_eff_sq: num(8)?,
            tau: num(9)?,
            seed: rec[10].parse().map_err(|e| bad(format!("row {line}, seed: {e}")))?,
            rank: rec[11].parse().map_err(|e| bad(format!("row {line}, rank: {e}")))?,
        });
    }
    Ok(rows)
}
