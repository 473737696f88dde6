//! CSV and JSON persistence.
//!
//! Every CSV starts with `#` comment lines carrying the schema name and
//! version, the configuration hash and the full configuration as
//! `key = value` pairs; the column header and rows follow. Floating-point
//! values are written with 17 significant digits so that they parse back to
//! the identical `f64`.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::{RunConfig, SCHEMA_VERSION};
use crate::error::{CliError, Result};

/// A named CSV layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schema {
    pub name: &'static str,
    pub file: &'static str,
    pub columns: &'static [&'static str],
}

pub const GAP_SCAN: Schema = Schema {
    name: "gap_scan",
    file: "gap_scan.csv",
    columns: &[
        "model",
        "N",
        "seed",
        "alpha",
        "kappa",
        "h",
        "beta",
        "delta",
        "lambda2",
        "db_residual",
        "stationarity_residual",
    ],
};

pub const ISING_BOUND: Schema = Schema {
    name: "ising_bound",
    file: "ising_bound.csv",
    columns: &["N", "beta", "h", "alpha", "bound", "tail_term", "sector0_term", "sector1_term"],
};

pub const ISING_PEAK: Schema =
    Schema { name: "ising_peak", file: "ising_peak.csv", columns: &["N", "beta", "h", "alpha_peak", "bound_peak"] };

pub const DISORDER_CURVE: Schema = Schema {
    name: "disorder_curve",
    file: "disorder_curve.csv",
    columns: &["model", "N", "alpha", "mean", "stderr", "count"],
};

pub const SCALING: Schema =
    Schema { name: "scaling", file: "scaling.csv", columns: &["model", "N", "series", "alpha", "delta", "stderr"] };

pub const KAPPA_SCAN: Schema = Schema {
    name: "kappa_scan",
    file: "kappa_scan.csv",
    columns: &["model", "N", "seed", "alpha", "kappa", "h", "beta", "delta", "stderr"],
};

pub const ALL_SCHEMAS: &[Schema] = &[GAP_SCAN, ISING_BOUND, ISING_PEAK, DISORDER_CURVE, SCALING, KAPPA_SCAN];

pub fn schema_by_name(name: &str) -> Option<Schema> {
    ALL_SCHEMAS.iter().copied().find(|s| s.name == name)
}

/// 17 significant digits; `nan`/`inf` spelled the way common CSV readers expect.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

/// Header comment lines for a CSV.
fn header(schema: &Schema, config: &RunConfig) -> String {
    let mut out = format!(
        "# schema = qmcmc.{}\n# schema_version = {SCHEMA_VERSION}\n# config_hash = {}\n",
        schema.name,
        config.hash()
    );
    for (k, v) in config.pairs() {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    out
}

/// Row-by-row CSV writer that flushes on request.
pub struct CsvOut {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
    width: usize,
}

impl CsvOut {
    /// Creates (truncating) `dir/schema.file` with header and column names.
    pub fn create(dir: &Path, schema: Schema, config: &RunConfig) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join(schema.file);
        let mut file = BufWriter::new(File::create(&path).map_err(|e| CliError::io(&path, e))?);
        file.write_all(header(&schema, config).as_bytes()).map_err(|e| CliError::io(&path, e))?;
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        writer.write_record(schema.columns).map_err(|e| csv_io(&path, e))?;
        Ok(Self { path, writer, width: schema.columns.len() })
    }

    /// Opens an existing file written by the same configuration for
    /// appending, or creates it. Returns the writer and the rows already
    /// present. A file written by a different configuration is an error.
    pub fn append_or_create(dir: &Path, schema: Schema, config: &RunConfig) -> Result<(Self, Option<Table>)> {
        let path = dir.join(schema.file);
        if !path.exists() {
            return Ok((Self::create(dir, schema, config)?, None));
        }
        let existing = Table::read(&path)?;
        existing.expect_schema(schema)?;
        let hash = config.hash();
        if existing.meta.get("config_hash") != Some(&hash) {
            return Err(CliError::usage(format!(
                "{} was written by a different configuration (hash {} vs {hash}); use another output directory",
                path.display(),
                existing.meta.get("config_hash").map_or("missing", String::as_str)
            )));
        }
        let file = OpenOptions::new().append(true).open(&path).map_err(|e| CliError::io(&path, e))?;
        let writer = csv::WriterBuilder::new().has_headers(false).from_writer(BufWriter::new(file));
        Ok((Self { path, writer, width: schema.columns.len() }, Some(existing)))
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        debug_assert_eq!(fields.len(), self.width);
        self.writer.write_record(fields).map_err(|e| csv_io(&self.path, e))
    }

    pub fn flush(&mut self) -> Result<()> {
        self.writer.flush().map_err(|e| CliError::io(&self.path, e))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

fn csv_io(path: &Path, e: csv::Error) -> CliError {
    CliError::io(path, std::io::Error::other(e.to_string()))
}

/// Writes pretty JSON with the schema version and configuration attached.
pub fn write_json(
    dir: &Path,
    file: &str,
    schema: &str,
    config: Option<&RunConfig>,
    body: serde_json::Value,
) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(file);
    let mut doc = serde_json::Map::new();
    doc.insert("schema".into(), format!("qmcmc.{schema}").into());
    doc.insert("schema_version".into(), SCHEMA_VERSION.into());
    if let Some(c) = config {
        doc.insert("config_hash".into(), c.hash().into());
        doc.insert("config".into(), c.to_json());
    }
    match body {
        serde_json::Value::Object(map) => doc.extend(map),
        other => {
            doc.insert("data".into(), other);
        }
    }
    let text = serde_json::to_string_pretty(&serde_json::Value::Object(doc)).expect("JSON values always serialize");
    std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

/// A CSV file read back: header metadata, column names and rows with their
/// 1-based line numbers.
#[derive(Debug, Clone)]
pub struct Table {
    pub path: PathBuf,
    pub meta: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<(u64, Vec<String>)>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| CliError::io(path, e))?;
        let mut meta = BTreeMap::new();
        let mut comment_lines = 0u64;
        let mut reader = BufReader::new(file);
        let mut body = String::new();
        let mut line = String::new();
        // leading comment block
        loop {
            line.clear();
            let read = reader.read_line(&mut line).map_err(|e| CliError::io(path, e))?;
            if read == 0 {
                break;
            }
            if let Some(rest) = line.strip_prefix('#') {
                comment_lines += 1;
                if let Some((k, v)) = rest.split_once('=') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
            } else {
                body.push_str(&line);
                break;
            }
        }
        let mut rest = String::new();
        std::io::Read::read_to_string(&mut reader, &mut rest).map_err(|e| CliError::io(path, e))?;
        body.push_str(&rest);
        let mut csv = csv::ReaderBuilder::new().has_headers(true).comment(Some(b'#')).from_reader(body.as_bytes());
        let columns: Vec<String> = csv
            .headers()
            .map_err(|e| CliError::input(path, comment_lines + 1, e.to_string()))?
            .iter()
            .map(|s| s.trim().to_string())
            .collect();
        if columns.iter().all(|c| c.is_empty()) {
            return Err(CliError::input(path, comment_lines + 1, "missing column header"));
        }
        let mut rows = Vec::new();
        for record in csv.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line()) + comment_lines;
                CliError::input(path, line, e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line()) + comment_lines;
            rows.push((line, record.iter().map(|s| s.trim().to_string()).collect()));
        }
        Ok(Self { path: path.to_path_buf(), meta, columns, rows })
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CliError::input(&self.path, 0, format!("missing column '{name}'")))
    }

    /// Checks the declared schema name, version and column list.
    pub fn expect_schema(&self, schema: Schema) -> Result<()> {
        let declared = self.meta.get("schema").map(String::as_str);
        let wanted = format!("qmcmc.{}", schema.name);
        if declared != Some(wanted.as_str()) {
            return Err(CliError::input(
                &self.path,
                1,
                format!("expected schema {wanted}, found {}", declared.unwrap_or("none")),
            ));
        }
        self.check_version()?;
        for &c in schema.columns {
            self.column(c)?;
        }
        Ok(())
    }

    pub fn check_version(&self) -> Result<()> {
        match self.meta.get("schema_version").map(|v| v.parse::<u32>()) {
            Some(Ok(SCHEMA_VERSION)) => Ok(()),
            Some(_) => Err(CliError::input(
                &self.path,
                1,
                format!("unsupported schema_version (this build reads {SCHEMA_VERSION})"),
            )),
            None => Err(CliError::input(&self.path, 1, "missing schema_version header")),
        }
    }

    /// Parses one cell as a float, reporting the line on failure.
    pub fn float(&self, row: &(u64, Vec<String>), column: usize) -> Result<f64> {
        let cell = row.1.get(column).ok_or_else(|| CliError::input(&self.path, row.0, "row is too short"))?;
        cell.parse::<f64>().map_err(|_| {
            CliError::input(&self.path, row.0, format!("column '{}': '{cell}' is not a number", self.columns[column]))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{resolve, RawConfig};

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2f64.powf(-40.3), 123456.789, -2.5e-300] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17);
        }
        assert_eq!(num(f64::NAN), "nan");
    }

    #[test]
    fn csv_round_trip_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let config = resolve(None, &RawConfig::new()).unwrap();
        let mut out = CsvOut::create(dir.path(), ISING_BOUND, &config).unwrap();
        out.row(&["8".into(), num(5.0), num(1.5), num(2.0), num(0.01), num(1e-9), num(0.004), num(0.006)]).unwrap();
        out.flush().unwrap();
        let t = Table::read(out.path()).unwrap();
        t.expect_schema(ISING_BOUND).unwrap();
        assert_eq!(t.meta["config_hash"], config.hash());
        assert_eq!(t.meta["model"], "ising");
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.float(&t.rows[0], t.column("bound").unwrap()).unwrap(), 0.01);
        assert!(t.expect_schema(GAP_SCAN).is_err());
    }

    #[test]
    fn append_refuses_other_configs() {
        let dir = tempfile::tempdir().unwrap();
        let a = resolve(None, &RawConfig::new()).unwrap();
        let b = resolve(None, &[("beta".to_string(), "1".to_string())].into_iter().collect()).unwrap();
        CsvOut::create(dir.path(), GAP_SCAN, &a).unwrap().flush().unwrap();
        let (_, existing) = CsvOut::append_or_create(dir.path(), GAP_SCAN, &a).unwrap();
        assert_eq!(existing.unwrap().rows.len(), 0);
        assert!(CsvOut::append_or_create(dir.path(), GAP_SCAN, &b).is_err());
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        std::fs::write(&path, "# schema = qmcmc.scaling\n# schema_version = 1\nN,delta\n5,0.1\n6,abc\n").unwrap();
        let t = Table::read(&path).unwrap();
        let col = t.column("delta").unwrap();
        assert_eq!(t.float(&t.rows[0], col).unwrap(), 0.1);
        let err = t.float(&t.rows[1], col).unwrap_err().to_string();
        assert!(err.contains(":5:"), "{err}");
        assert!(t.column("stderr").is_err());
    }
}
