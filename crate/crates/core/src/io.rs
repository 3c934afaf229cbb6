//! Panel file formats and tabular output.
//!
//! * `MATRIX_CSV`: a header row of edge labels, then one row per time step
//!   of `0`/`1` cells.
//! * `EVENT_CSV`: a `# T=<int>` header line, then `t,edge_label` rows with
//!   `1 ≤ t ≤ T`. Edges are the distinct labels in order of first
//!   appearance; repeated events collapse to a single 1.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiment::CellSummary;
use crate::model::EdgePanel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PanelFormat {
    MatrixCsv,
    EventCsv,
}

impl PanelFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "matrix" | "matrix-csv" | "MATRIX_CSV" => Ok(PanelFormat::MatrixCsv),
            "event" | "event-csv" | "EVENT_CSV" => Ok(PanelFormat::EventCsv),
            _ => Err(Error::InvalidConfig(format!("unknown panel format {s:?}"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            PanelFormat::MatrixCsv => "matrix",
            PanelFormat::EventCsv => "event",
        }
    }
}

/// Reads a panel file, returning it with the SHA-256 of the raw bytes.
pub fn ingest_panel_with_digest(path: &Path, format: PanelFormat) -> Result<(EdgePanel, String)> {
    let bytes = fs::read(path)?;
    let digest = sha256_hex(&bytes);
    let panel = parse_panel(&bytes, format)?;
    Ok((panel, digest))
}

pub fn ingest_panel(path: &Path, format: PanelFormat) -> Result<EdgePanel> {
    ingest_panel_with_digest(path, format).map(|(p, _)| p)
}

pub fn parse_panel(bytes: &[u8], format: PanelFormat) -> Result<EdgePanel> {
    match format {
        PanelFormat::MatrixCsv => parse_matrix_csv(bytes),
        PanelFormat::EventCsv => {
            let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
                line: 0,
                msg: format!("input is not UTF-8: {e}"),
            })?;
            parse_event_csv(text)
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn parse_cell(raw: &str, line: u64) -> Result<u8> {
    let v: u64 = raw.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cell {raw:?} is not an integer"),
    })?;
    Ok(v.min(u64::from(u8::MAX)) as u8)
}

/// Parses the time-major matrix format into an edge-major panel.
pub fn parse_matrix_csv(bytes: &[u8]) -> Result<EdgePanel> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let labels: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(e, 1))?
        .iter()
        .map(str::to_owned)
        .collect();
    if labels.is_empty() || (labels.len() == 1 && labels[0].is_empty()) {
        return Err(Error::EmptyPanel);
    }
    let n = labels.len();
    let mut steps: Vec<Vec<u8>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(e, steps.len() as u64 + 2))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != n {
            return Err(Error::Parse {
                line,
                msg: format!("expected {n} cells, found {}", record.len()),
            });
        }
        let row = record
            .iter()
            .map(|c| parse_cell(c, line))
            .collect::<Result<Vec<u8>>>()?;
        if let Some(pos) = row.iter().position(|&v| v > 1) {
            return Err(Error::NonBinaryValue {
                edge: pos,
                step: steps.len(),
                value: row[pos],
            });
        }
        steps.push(row);
    }
    let t = steps.len();
    let mut data = vec![0u8; n * t];
    for (step, row) in steps.iter().enumerate() {
        for (edge, &x) in row.iter().enumerate() {
            data[edge * t + step] = x;
        }
    }
    EdgePanel::new(n, t, data, Some(labels))
}

fn csv_error(e: csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    Error::Parse {
        line,
        msg: e.to_string(),
    }
}

fn parse_t_header(line: &str) -> Option<usize> {
    let rest = line.trim().strip_prefix('#')?.trim();
    let value = rest.strip_prefix("T")?.trim_start().strip_prefix('=')?;
    value.trim().parse().ok()
}

/// Parses the event format.
pub fn parse_event_csv(text: &str) -> Result<EdgePanel> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i as u64 + 1, l));
    let n_steps = loop {
        match lines.next() {
            None => return Err(Error::MissingTHeader),
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((_, l)) => break parse_t_header(l).ok_or(Error::MissingTHeader)?,
        }
    };
    if n_steps == 0 {
        return Err(Error::EmptyPanel);
    }

    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut events: Vec<(usize, usize)> = Vec::new();
    for (line, raw) in lines {
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let (t_raw, label) = l.split_once(',').ok_or_else(|| Error::Parse {
            line,
            msg: "expected `t,edge_label`".into(),
        })?;
        let t: usize = t_raw.trim().parse().map_err(|_| Error::Parse {
            line,
            msg: format!("time {t_raw:?} is not an integer"),
        })?;
        if t == 0 || t > n_steps {
            return Err(Error::Parse {
                line,
                msg: format!("time {t} outside [1, {n_steps}]"),
            });
        }
        let label = label.trim();
        if label.is_empty() {
            return Err(Error::Parse {
                line,
                msg: "empty edge label".into(),
            });
        }
        let edge = match index.get(label) {
            Some(&e) => e,
            None => {
                index.insert(label.to_owned(), labels.len());
                labels.push(label.to_owned());
                labels.len() - 1
            }
        };
        events.push((edge, t - 1));
    }
    if labels.is_empty() {
        return Err(Error::EmptyPanel);
    }
    let mut data = vec![0u8; labels.len() * n_steps];
    for (edge, step) in events {
        data[edge * n_steps + step] = 1;
    }
    EdgePanel::new(labels.len(), n_steps, data, Some(labels))
}

/// Writes a panel in the matrix format. Unlabeled edges are written under
/// their index.
pub fn write_matrix_csv<W: Write>(panel: &EdgePanel, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let header: Vec<String> = (0..panel.n_edges())
        .map(|i| panel.label(i).into_owned())
        .collect();
    w.write_record(&header).map_err(csv_write_error)?;
    let mut row = Vec::with_capacity(panel.n_edges());
    for t in 0..panel.n_steps() {
        row.clear();
        row.extend((0..panel.n_edges()).map(|i| if panel.get(i, t) == 1 { "1" } else { "0" }));
        w.write_record(&row).map_err(csv_write_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_write_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// 17 significant digits, enough to round-trip any double.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub const CELL_CSV_HEADER: &str =
    "scenario,method,t,n_alt,replications,lambda,fdr_hat,fdr_se,pwr_hat,pwr_se,mean_rejections";

/// Writes cell summaries as CSV with LF line endings and a fixed column order.
pub fn write_cell_summaries<W: Write>(rows: &[CellSummary], mut out: W) -> Result<()> {
    writeln!(out, "{CELL_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.scenario.as_str(),
            r.method.as_str(),
            r.t,
            r.n_alt,
            r.replications,
            r.lambda,
            format_f64(r.fdr_hat),
            format_f64(r.fdr_se),
            format_f64(r.pwr_hat),
            format_f64(r.pwr_se),
            format_f64(r.mean_rejections),
        )?;
    }
    Ok(())
}

pub fn cell_summaries_to_string(rows: &[CellSummary]) -> String {
    let mut buf = Vec::new();
    write_cell_summaries(rows, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}
