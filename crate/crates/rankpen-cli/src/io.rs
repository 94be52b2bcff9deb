//! CSV and JSON files. Signals are stored as `x_1,...,x_d,re,im` with one
//! sample per row; floats are written in shortest round-trip form.

use std::fs;
use std::path::Path;

use rankpen::{c64, ExpModel};

use crate::error::{CliError, CliResult};

/// Samples `values[j]` taken at `points[j]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Signal {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<c64>,
}

impl Signal {
    pub fn new(points: Vec<Vec<f64>>, values: Vec<c64>) -> Self {
        Self { points, values }
    }

    /// Dimension of the sample points (0 when empty).
    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn reader(path: &Path) -> CliResult<csv::Reader<fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::io(path, e))
}

fn writer(path: &Path) -> CliResult<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> CliError {
    CliError::Parse { path: path.to_path_buf(), line, message: message.into() }
}

/// Data rows tagged with their 1-based line number.
type Rows = Vec<(u64, Vec<f64>)>;

fn read_rows(path: &Path, min_cols: usize) -> CliResult<(csv::StringRecord, Rows)> {
    let mut rdr = reader(path)?;
    let header = rdr.headers().map_err(|e| parse_err(path, 1, e.to_string()))?.clone();
    if header.len() < min_cols {
        return Err(parse_err(path, 1, format!("expected at least {min_cols} columns, found {}", header.len())));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let vals = rec
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                cell.parse::<f64>()
                    .map_err(|_| parse_err(path, line, format!("column `{}`: cannot parse `{cell}`", &header[c])))
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push((line, vals));
    }
    Ok((header, rows))
}

/// Reads a signal CSV. A header with no rows is an empty signal.
pub fn load_signal(path: impl AsRef<Path>) -> CliResult<Signal> {
    let path = path.as_ref();
    let (header, rows) = read_rows(path, 3)?;
    let n = header.len();
    if &header[n - 2] != "re" || &header[n - 1] != "im" {
        return Err(parse_err(path, 1, "last two columns must be `re,im`"));
    }
    let mut sig = Signal::default();
    for (_, row) in rows {
        sig.points.push(row[..n - 2].to_vec());
        sig.values.push(c64::new(row[n - 2], row[n - 1]));
    }
    Ok(sig)
}

pub fn save_signal(path: impl AsRef<Path>, sig: &Signal) -> CliResult<()> {
    let path = path.as_ref();
    let d = sig.dim().max(1);
    let mut w = writer(path)?;
    let mut header: Vec<String> = (1..=d).map(|i| format!("x_{i}")).collect();
    header.extend(["re".to_string(), "im".to_string()]);
    w.write_record(&header).map_err(|e| CliError::io(path, e))?;
    for (p, v) in sig.points.iter().zip(&sig.values) {
        let mut rec: Vec<String> = p.iter().map(f64::to_string).collect();
        rec.push(v.re.to_string());
        rec.push(v.im.to_string());
        w.write_record(&rec).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Reads sample locations, one point per row.
pub fn load_points(path: impl AsRef<Path>) -> CliResult<Vec<Vec<f64>>> {
    let (_, rows) = read_rows(path.as_ref(), 1)?;
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

pub fn save_points(path: impl AsRef<Path>, points: &[Vec<f64>]) -> CliResult<()> {
    let path = path.as_ref();
    let d = points.first().map_or(1, Vec::len);
    let mut w = writer(path)?;
    w.write_record((1..=d).map(|i| format!("x_{i}"))).map_err(|e| CliError::io(path, e))?;
    for p in points {
        w.write_record(p.iter().map(f64::to_string)).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> CliResult<ExpModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| parse_err(path, e.line() as u64, e.to_string()))
}

pub fn save_model(path: impl AsRef<Path>, model: &ExpModel) -> CliResult<()> {
    write_text(path, &serde_json::to_string_pretty(model).expect("models serialize"))
}

/// One nonnegative weight per line; blank lines and `#` comments are skipped.
pub fn load_weights(path: impl AsRef<Path>) -> CliResult<Vec<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.parse::<f64>() {
            Ok(w) if w >= 0.0 && w.is_finite() => out.push(w),
            _ => return Err(parse_err(path, i as u64 + 1, format!("bad weight `{line}`"))),
        }
    }
    Ok(out)
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> CliResult<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Writes rows of already formatted cells under `header`.
pub fn write_table(path: impl AsRef<Path>, header: &[String], rows: &[Vec<String>]) -> CliResult<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| CliError::io(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
