//! Serialization of command results: JSON with round-trip floats and long-format CSV.

use std::fs::{self, File};
use std::io::{self, Write};
use std::path::Path;

use infoengine_core::pareto::fmt_f64;
use infoengine_core::sweep::SweepPoint;
use infoengine_core::{Error, Result};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

/// Units line written ahead of sweep and heatmap headers.
pub const SWEEP_UNITS: &str = "# energies and work in k_B T_S, tau in hbar/(k_B T_S), phase = omega tau in rad, \
power in k_B T_S per hbar/(k_B T_S), info and entropy in nats, efficiencies dimensionless, empty cell = undefined";

/// Columns after the index columns.
pub const SWEEP_COLUMNS: [&str; 23] = [
    "temp_ratio",
    "delta_e",
    "hbar_omega",
    "g_eff_sq",
    "tau",
    "phase",
    "alpha_sq",
    "n_max",
    "tail_mass",
    "n_prime",
    "w_meas",
    "w_ext",
    "w_net",
    "info",
    "s_tm",
    "eta_info",
    "eta_he",
    "power",
    "power_star",
    "eta_carnot",
    "eta_ca",
    "eta_he_over_eta_ca",
    "regime",
];

/// Pretty JSON whose floats carry seventeen significant digits.
struct RoundTrip<'a>(PrettyFormatter<'a>);

impl Formatter for RoundTrip<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, RoundTrip(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory serialization");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

pub fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent().filter(|d| !d.as_os_str().is_empty()) {
        Some(dir) => fs::create_dir_all(dir).map_err(io_error(dir)),
        None => Ok(()),
    }
}

fn create(path: &Path) -> Result<File> {
    ensure_parent(path)?;
    File::create(path).map_err(io_error(path))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    create(path)?.write_all(text.as_bytes()).map_err(io_error(path))
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn row(point: &SweepPoint) -> Vec<String> {
    let r = &point.report;
    let (p, t, m) = (r.params, &r.thermo, &r.metrics);
    let mut out: Vec<String> = point.index.iter().map(usize::to_string).collect();
    out.extend(
        [p.temp_ratio(), p.delta_e(), p.hbar_omega(), p.g_eff_sq(), p.tau(), r.phase, t.alpha_sq]
            .into_iter()
            .map(fmt_f64),
    );
    out.push(t.n_max.to_string());
    out.push(fmt_f64(t.tail_mass));
    out.push(t.n_prime.map(|n| n.to_string()).unwrap_or_default());
    out.extend([t.w_meas, t.w_ext, t.w_net, t.info, t.s_tm, m.eta_info].into_iter().map(fmt_f64));
    out.extend([m.eta_he, m.power, m.power_star].into_iter().map(opt));
    out.push(fmt_f64(m.eta_carnot));
    out.push(fmt_f64(m.eta_ca));
    out.push(opt(m.eta_he.map(|e| e / m.eta_ca)));
    out.push(m.regime.to_string());
    out
}

/// Index column names for a grid of `dims` axes.
pub fn index_columns(dims: usize) -> Vec<String> {
    ["i", "j", "k"].iter().take(dims).map(|s| s.to_string()).collect()
}

/// Writes grid rows in long format: a units comment, the header, one row per point.
pub fn write_sweep_csv(path: &Path, dims: usize, points: &[SweepPoint]) -> Result<()> {
    let mut file = create(path)?;
    writeln!(file, "{SWEEP_UNITS}").map_err(io_error(path))?;
    let csv_error = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_writer(file);
    let mut header = index_columns(dims);
    header.extend(SWEEP_COLUMNS.iter().map(|s| s.to_string()));
    w.write_record(&header).map_err(csv_error)?;
    for p in points {
        w.write_record(row(p)).map_err(csv_error)?;
    }
    w.flush().map_err(io_error(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        let v = vec![0.1, 1.0 / 3.0, -2.5e-300, 6.02e23];
        let text = to_json(&v);
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
        assert!(text.contains("3.3333333333333331e-1"), "{text}");
    }

    #[test]
    fn non_finite_is_null() {
        assert_eq!(to_json(&f64::NAN).trim(), "null");
    }
}
