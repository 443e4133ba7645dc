//! Dataset and label file formats.
//!
//! CSV: one point per row, comma separated, optional header row (detected
//! when any field of the first row is not a number), optional trailing
//! integer label column.
//!
//! Raw binary: the 8-byte magic `GBSKMATX`, `n` and `d` as little-endian
//! `u64`, one byte of element width (4 or 8), then `n * d` little-endian
//! floats in row-major order.
//!
//! Labels: one integer per line in row order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use gbsk_core::Dataset;

pub const MAGIC: &[u8; 8] = b"GBSKMATX";
pub const HEADER_LEN: usize = 25;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: row {row}: {msg}")]
    Parse { path: PathBuf, row: usize, msg: String },
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
    #[error(transparent)]
    Data(#[from] gbsk_core::Error),
}

pub type Result<T, E = IoError> = std::result::Result<T, E>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Binary,
}

impl Format {
    /// `.bin` and `.gbsk` are binary, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin" | "gbsk") => Format::Binary,
            _ => Format::Csv,
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "bin" | "binary" => Ok(Format::Binary),
            other => Err(format!("unknown format {other:?} (csv or bin)")),
        }
    }
}

/// Loads a dataset. `has_labels` reads the last CSV column as labels;
/// binary files carry no labels.
pub fn load_dataset(path: &Path, format: Format, has_labels: bool) -> Result<Dataset> {
    match format {
        Format::Csv => read_csv(path, has_labels),
        Format::Binary => {
            if has_labels {
                return Err(IoError::Format {
                    path: path.to_path_buf(),
                    msg: "binary matrices carry no labels; pass a labels file instead".into(),
                });
            }
            read_binary(path)
        }
    }
}

fn parse_label(field: &str) -> Option<i64> {
    field.parse::<i64>().ok().or_else(|| {
        let x = field.parse::<f64>().ok()?;
        (x.fract() == 0.0 && x.abs() < 9.0e15).then_some(x as i64)
    })
}

pub fn read_csv(path: &Path, has_labels: bool) -> Result<Dataset> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(BufReader::new(file));
    let parse_err = |row: usize, msg: String| IoError::Parse {
        path: path.to_path_buf(),
        row,
        msg,
    };

    let mut points = Vec::new();
    let mut labels = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let row = e.position().map_or(idx + 1, |p| p.line() as usize);
            parse_err(row, e.to_string())
        })?;
        let row = record.position().map_or(idx + 1, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        if width.is_none() && idx == 0 && record.iter().any(|f| f.parse::<f64>().is_err()) {
            // header row
            width = Some(record.len());
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(parse_err(row, format!("expected {expected} fields, found {}", record.len())));
        }
        let feature_count = if has_labels { expected - 1 } else { expected };
        if feature_count == 0 {
            return Err(parse_err(row, "no feature columns".into()));
        }
        for (col, field) in record.iter().take(feature_count).enumerate() {
            let x: f64 = field
                .parse()
                .map_err(|_| parse_err(row, format!("column {}: {field:?} is not a number", col + 1)))?;
            if !x.is_finite() {
                return Err(parse_err(row, format!("column {}: non-finite value {field:?}", col + 1)));
            }
            points.push(x);
        }
        if has_labels {
            let field = &record[expected - 1];
            let label = parse_label(field).ok_or_else(|| parse_err(row, format!("label {field:?} is not an integer")))?;
            labels.push(label);
        }
    }
    let dim = width.map_or(0, |w| if has_labels { w.saturating_sub(1) } else { w });
    if points.is_empty() {
        return Err(IoError::Data(gbsk_core::Error::EmptyInput));
    }
    Ok(Dataset::new(points, dim, has_labels.then_some(labels))?)
}

/// Writes points as CSV with a header, plus a `label` column if present.
pub fn write_csv(path: &Path, dataset: &Dataset) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let d = dataset.d();
    let mut line = String::new();
    let header: Vec<String> = (0..d).map(|j| format!("x{j}")).collect();
    line.push_str(&header.join(","));
    if dataset.labels().is_some() {
        line.push_str(",label");
    }
    line.push('\n');
    w.write_all(line.as_bytes()).map_err(io_err(path))?;
    for (i, row) in dataset.points().rows().enumerate() {
        line.clear();
        for (j, x) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            // shortest repr that round-trips
            line.push_str(&format!("{x:?}"));
        }
        if let Some(labels) = dataset.labels() {
            line.push_str(&format!(",{}", labels[i]));
        }
        line.push('\n');
        w.write_all(line.as_bytes()).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_binary(path: &Path) -> Result<Dataset> {
    let format_err = |msg: String| IoError::Format {
        path: path.to_path_buf(),
        msg,
    };
    let mut file = BufReader::new(File::open(path).map_err(io_err(path))?);
    let mut header = [0u8; HEADER_LEN];
    file.read_exact(&mut header)
        .map_err(|_| format_err("truncated header".into()))?;
    if &header[..8] != MAGIC {
        return Err(format_err("bad magic, expected GBSKMATX".into()));
    }
    let n = u64::from_le_bytes(header[8..16].try_into().unwrap());
    let d = u64::from_le_bytes(header[16..24].try_into().unwrap());
    let width = header[24] as usize;
    if width != 4 && width != 8 {
        return Err(format_err(format!("element width {width}, expected 4 or 8")));
    }
    let count = n
        .checked_mul(d)
        .and_then(|c| usize::try_from(c).ok())
        .ok_or_else(|| format_err(format!("{n} x {d} does not fit in memory")))?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes).map_err(io_err(path))?;
    if bytes.len() != count * width {
        return Err(format_err(format!(
            "payload is {} bytes, header promises {}",
            bytes.len(),
            count * width
        )));
    }
    let points: Vec<f64> = if width == 8 {
        bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect()
    } else {
        bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect()
    };
    Ok(Dataset::new(points, d as usize, None)?)
}

/// Writes the raw binary format with 8-byte elements.
pub fn write_binary(path: &Path, dataset: &Dataset) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let mut header = Vec::with_capacity(HEADER_LEN);
    header.extend_from_slice(MAGIC);
    header.extend_from_slice(&(dataset.n() as u64).to_le_bytes());
    header.extend_from_slice(&(dataset.d() as u64).to_le_bytes());
    header.push(8);
    w.write_all(&header).map_err(io_err(path))?;
    for x in dataset.points().as_slice() {
        w.write_all(&x.to_le_bytes()).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_labels(path: &Path) -> Result<Vec<i64>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let field = line.trim();
        if field.is_empty() {
            continue;
        }
        let label = parse_label(field).ok_or_else(|| IoError::Parse {
            path: path.to_path_buf(),
            row: idx + 1,
            msg: format!("label {field:?} is not an integer"),
        })?;
        out.push(label);
    }
    Ok(out)
}

pub fn write_labels<L: std::fmt::Display>(path: &Path, labels: &[L]) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    write_labels_to(&mut w, labels).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

pub fn write_labels_to<W: Write, L: std::fmt::Display>(w: &mut W, labels: &[L]) -> std::io::Result<()> {
    for l in labels {
        writeln!(w, "{l}")?;
    }
    Ok(())
}
