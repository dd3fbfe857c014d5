//! Time-series CSV, sweep JSONL and plot data.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use fnls_core::analysis::SweepResult;
use fnls_core::DiagnosticsRecord;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const CSV_HEADER: &str =
    "t,mass_sq,energy,h_alpha_sq,h_s_sq,h_salpha_sq,lp_theta,strichartz_acc,mass_resid,energy_resid,run_id,config_hash";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

pub fn csv_row(r: &DiagnosticsRecord, run_id: &str, config_hash: &str) -> String {
    let fixed = [r.t, r.mass_sq, r.energy, r.h_alpha_sq, r.h_s_sq, r.h_salpha_sq, r.lp_theta, r.strichartz_acc];
    let mut cells: Vec<String> = fixed.iter().map(|&v| format_float(v)).collect();
    cells.push(format_opt(r.mass_resid));
    cells.push(format_opt(r.energy_resid));
    cells.push(run_id.to_string());
    cells.push(config_hash.to_string());
    cells.join(",")
}

pub fn write_csv<W: Write>(mut out: W, records: &[DiagnosticsRecord], run_id: &str, config_hash: &str) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", csv_row(r, run_id, config_hash))?;
    }
    out.flush()
}

/// Writes the CSV to `path`, or to standard output when `path` is `-`.
pub fn write_timeseries(records: &[DiagnosticsRecord], path: &str, run_id: &str, config_hash: &str) -> Result<(), CliError> {
    if path == "-" {
        return write_csv(io::stdout().lock(), records, run_id, config_hash).map_err(|e| CliError::io(path, e));
    }
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_csv(BufWriter::new(file), records, run_id, config_hash).map_err(|e| CliError::io(path, e))
}

/// One line of sweep JSONL.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepLine {
    #[serde(flatten)]
    pub result: SweepResult,
    pub run_id: String,
    pub config_hash: String,
}

/// Reads the sweep lines already in `path`; a missing file is empty and a
/// torn final line (interrupted write) is ignored.
pub fn read_sweep_lines(path: &Path) -> Result<Vec<SweepLine>, CliError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(CliError::io(path, e)),
    };
    let lines: Vec<String> = BufReader::new(file).lines().collect::<io::Result<_>>().map_err(|e| CliError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(v) => out.push(v),
            Err(_) if i + 1 == lines.len() => break,
            Err(e) => return Err(CliError::Config(format!("{}:{}: {e}", path.display(), i + 1))),
        }
    }
    Ok(out)
}

/// Appends lines to a JSONL file, flushing after each so an interrupted
/// sweep keeps every finished point.
pub struct SweepWriter {
    out: BufWriter<File>,
}

impl SweepWriter {
    pub fn open(path: &Path, append: bool) -> Result<Self, CliError> {
        let file = OpenOptions::new()
            .create(true)
            .write(true)
            .append(append)
            .truncate(!append)
            .open(path)
            .map_err(|e| CliError::io(path, e))?;
        Ok(Self { out: BufWriter::new(file) })
    }

    pub fn write(&mut self, line: &SweepLine) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, line)?;
        self.out.write_all(b"\n")?;
        self.out.flush()
    }
}

/// Named numeric columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn from_records(records: &[DiagnosticsRecord]) -> Self {
        let columns = CSV_HEADER.split(',').take(10).map(str::to_string).collect();
        let rows = records
            .iter()
            .map(|r| {
                vec![
                    r.t,
                    r.mass_sq,
                    r.energy,
                    r.h_alpha_sq,
                    r.h_s_sq,
                    r.h_salpha_sq,
                    r.lp_theta,
                    r.strichartz_acc,
                    r.mass_resid.unwrap_or(f64::NAN),
                    r.energy_resid.unwrap_or(f64::NAN),
                ]
            })
            .collect();
        Self { columns, rows }
    }

    pub fn from_sweep(results: &[SweepResult]) -> Self {
        let columns = ["alpha", "s", "a", "mass_scale", "strichartz_acc", "peak_h_alpha", "final_time"];
        let rows = results
            .iter()
            .map(|r| vec![r.alpha, r.s, r.a, r.mass_scale, r.strichartz_acc, r.peak_h_alpha, r.final_time])
            .collect();
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// Which two columns to extract, and where.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub x: String,
    pub y: String,
    pub path: String,
    pub svg: Option<String>,
}

/// Writes `x y` pairs (rows with a missing value are dropped) and,
/// optionally, an SVG line chart.
pub fn emit_plotdata(table: &Table, spec: &PlotSpec) -> Result<(), CliError> {
    let ix = table.column(&spec.x).ok_or_else(|| CliError::Config(format!("unknown plot column `{}`", spec.x)))?;
    let iy = table.column(&spec.y).ok_or_else(|| CliError::Config(format!("unknown plot column `{}`", spec.y)))?;
    let points: Vec<(f64, f64)> =
        table.rows.iter().map(|r| (r[ix], r[iy])).filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
    if points.is_empty() {
        return Err(CliError::Config(format!("plot series `{}` vs `{}` is empty", spec.y, spec.x)));
    }
    let mut text = format!("# {} {}\n", spec.x, spec.y);
    for (x, y) in &points {
        text.push_str(&format!("{} {}\n", format_float(*x), format_float(*y)));
    }
    std::fs::write(&spec.path, text).map_err(|e| CliError::io(&spec.path, e))?;
    if let Some(svg) = &spec.svg {
        std::fs::write(svg, svg_chart(&points, &spec.x, &spec.y)).map_err(|e| CliError::io(svg, e))?;
    }
    Ok(())
}

fn svg_chart(points: &[(f64, f64)], xlabel: &str, ylabel: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 60.0;
    let range = |v: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let (x0, x1) = range(&mut points.iter().map(|p| p.0));
    let (y0, y1) = range(&mut points.iter().map(|p| p.1));
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    let path: Vec<String> = points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
    format!(
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">
<rect width="100%" height="100%" fill="white"/>
<line x1="{M}" y1="{yb}" x2="{xr}" y2="{yb}" stroke="black"/>
<line x1="{M}" y1="{M}" x2="{M}" y2="{yb}" stroke="black"/>
<polyline fill="none" stroke="#1f77b4" stroke-width="1.5" points="{pts}"/>
<text x="{xc}" y="{xl}" text-anchor="middle" font-size="14">{xlabel}</text>
<text x="16" y="{yc}" text-anchor="middle" font-size="14" transform="rotate(-90 16 {yc})">{ylabel}</text>
<text x="{M}" y="{tick}" text-anchor="middle" font-size="11">{x0:.3e}</text>
<text x="{xr}" y="{tick}" text-anchor="middle" font-size="11">{x1:.3e}</text>
<text x="{lx}" y="{yb}" text-anchor="end" font-size="11">{y0:.3e}</text>
<text x="{lx}" y="{M}" text-anchor="end" font-size="11">{y1:.3e}</text>
</svg>
"##,
        yb = H - M,
        xr = W - M,
        pts = path.join(" "),
        xc = W / 2.0,
        xl = H - 15.0,
        yc = H / 2.0,
        tick = H - M + 16.0,
        lx = M - 4.0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(t: f64, resid: Option<f64>) -> DiagnosticsRecord {
        DiagnosticsRecord {
            t,
            mass_sq: 1.0 / 3.0,
            energy: -0.1,
            h_alpha_sq: 2.0,
            h_s_sq: 1.5,
            h_salpha_sq: 3.0,
            lp_theta: 0.7,
            strichartz_acc: t,
            energy_rate: -1.0,
            mass_resid: resid,
            energy_resid: resid,
        }
    }

    #[test]
    fn floats_round_trip_through_text() {
        for x in [1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.1 + 0.2] {
            assert_eq!(format_float(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(format_float(1.0 / 3.0), "3.3333333333333331e-1");
    }

    #[test]
    fn csv_has_fixed_header_and_empty_missing_cells() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[record(0.0, None), record(0.1, Some(1e-3))], "r1", "abc").unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        let first: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(first.len(), 12);
        assert_eq!((first[8], first[9], first[10], first[11]), ("", "", "r1", "abc"));
        assert!(lines[2].contains("1.0000000000000000e-3"));
    }

    #[test]
    fn empty_trajectory_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[], "r", "h").unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn plot_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.dat").to_string_lossy().into_owned();
        let table = Table::from_records(&[record(0.0, None)]);
        let spec = PlotSpec { x: "t".into(), y: "nope".into(), path: path.clone(), svg: None };
        assert!(emit_plotdata(&table, &spec).unwrap_err().to_string().contains("nope"));
        let spec = PlotSpec { x: "t".into(), y: "mass_resid".into(), path, svg: None };
        assert!(emit_plotdata(&table, &spec).unwrap_err().to_string().contains("empty"));
    }

    #[test]
    fn plot_data_and_svg() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.dat").to_string_lossy().into_owned();
        let svg = dir.path().join("p.svg").to_string_lossy().into_owned();
        let table = Table::from_records(&[record(0.0, None), record(1.0, None)]);
        let spec = PlotSpec { x: "t".into(), y: "strichartz_acc".into(), path: path.clone(), svg: Some(svg.clone()) };
        emit_plotdata(&table, &spec).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(std::fs::read_to_string(svg).unwrap().contains("<polyline"));
    }

    #[test]
    fn torn_last_sweep_line_is_ignored() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.jsonl");
        std::fs::write(&path, "{\"alpha\":0.8,\"s\":0.8,\"a\":1.0,\"mass_scale\":1.0,\"outcome\":\"decayed\",\"status\":\"completed\",\"strichartz_acc\":0.5,\"peak_h_alpha\":1.0,\"final_time\":1.0,\"wall_time_s\":0.1,\"run_id\":\"r\",\"config_hash\":\"h\"}\n{\"alpha\":0.").unwrap();
        let lines = read_sweep_lines(&path).unwrap();
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].result.a, 1.0);
        assert!(read_sweep_lines(&dir.path().join("missing.jsonl")).unwrap().is_empty());
    }
}
