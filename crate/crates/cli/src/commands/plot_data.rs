//! `plot-data`: validates the CSV/JSON outputs in a directory and writes a
//! manifest naming the inputs of every figure that can be drawn from them.
//! Nothing is computed here; the plotting front end reads the manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::config::SCHEMA_VERSION;
use crate::error::{CliError, Result};
use crate::output::{
    schema_by_name, write_json, Schema, Table, DISORDER_CURVE, GAP_SCAN, ISING_BOUND, ISING_PEAK, KAPPA_SCAN, SCALING,
};

/// Figure layouts understood by the plotting front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FigureKind {
    BoundVsAlpha,
    GapVsAlpha,
    GapVsKappa,
    ScalingInset,
}

#[derive(Debug, Clone, Serialize)]
pub struct FigureEntry {
    pub kind: FigureKind,
    pub inputs: Vec<String>,
    pub output: String,
    pub rows: usize,
}

/// Columns that hold text rather than numbers.
const TEXT_COLUMNS: &[&str] = &["model", "series"];

/// Checks every cell of a table against its schema.
pub fn validate(table: &Table, schema: Schema) -> Result<()> {
    table.expect_schema(schema)?;
    for row in &table.rows {
        if row.1.len() != table.columns.len() {
            return Err(CliError::input(
                &table.path,
                row.0,
                format!("expected {} fields, found {}", table.columns.len(), row.1.len()),
            ));
        }
        for &name in schema.columns {
            let c = table.column(name)?;
            let cell = row.1[c].as_str();
            let ok = match name {
                _ if TEXT_COLUMNS.contains(&name) => !cell.is_empty(),
                "seed" => cell.is_empty() || cell.parse::<u64>().is_ok(),
                "kappa" => matches!(cell, "inf" | "avg") || cell.parse::<f64>().is_ok(),
                "stderr" if schema == KAPPA_SCAN => cell.is_empty() || cell.parse::<f64>().is_ok(),
                "N" | "count" => cell.parse::<usize>().is_ok(),
                _ => cell.parse::<f64>().is_ok(),
            };
            if !ok {
                return Err(CliError::input(&table.path, row.0, format!("column '{name}': invalid value '{cell}'")));
            }
        }
    }
    Ok(())
}

/// Validates the recognised files in `dir` and writes `plot_manifest.json`.
pub fn run(dir: &Path) -> Result<PathBuf> {
    let mut tables: BTreeMap<&'static str, Table> = BTreeMap::new();
    let mut fits = Vec::new();
    let mut entries: Vec<_> =
        std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?.filter_map(|e| e.ok()).map(|e| e.path()).collect();
    entries.sort();
    for path in entries {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => {
                let table = Table::read(&path)?;
                let Some(name) = table.meta.get("schema").and_then(|s| s.strip_prefix("qmcmc.")) else {
                    log::warn!("{}: no schema header, skipped", path.display());
                    continue;
                };
                let schema = schema_by_name(name)
                    .ok_or_else(|| CliError::input(&path, 1, format!("unknown schema 'qmcmc.{name}'")))?;
                validate(&table, schema)?;
                if table.rows.is_empty() {
                    log::warn!("{}: no data rows", path.display());
                }
                tables.insert(schema.name, table);
            }
            Some("json") => {
                let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
                let value: serde_json::Value =
                    serde_json::from_str(&text).map_err(|e| CliError::input(&path, e.line() as u64, e.to_string()))?;
                if value.get("schema").and_then(|s| s.as_str()) == Some("qmcmc.fit") {
                    if value.get("schema_version").and_then(|v| v.as_u64()) != Some(SCHEMA_VERSION as u64) {
                        return Err(CliError::input(&path, 1, "unsupported schema_version"));
                    }
                    for key in ["kind", "exponent", "err", "chi2_nu", "points_used"] {
                        if value.get(key).is_none() {
                            return Err(CliError::input(&path, 1, format!("missing field '{key}'")));
                        }
                    }
                    fits.push(path.file_name().unwrap().to_string_lossy().to_string());
                }
            }
            _ => {}
        }
    }

    let name = |s: Schema| s.file.to_string();
    let rows = |s: Schema| tables.get(s.name).map_or(0, |t| t.rows.len());
    let has = |s: Schema| tables.contains_key(s.name);
    let mut figures = Vec::new();
    if has(ISING_BOUND) {
        let mut inputs = vec![name(ISING_BOUND)];
        let ising_gaps = tables.get(GAP_SCAN.name).is_some_and(|t| {
            let c = t.column("model").ok();
            c.is_some_and(|c| t.rows.iter().any(|r| r.1[c] == "ising"))
        });
        if ising_gaps {
            inputs.push(name(GAP_SCAN));
        }
        if has(ISING_PEAK) {
            inputs.push(name(ISING_PEAK));
        }
        figures.push(FigureEntry {
            kind: FigureKind::BoundVsAlpha,
            inputs,
            output: "bound_vs_alpha.png".into(),
            rows: rows(ISING_BOUND),
        });
    }
    if has(DISORDER_CURVE) {
        let mut inputs = vec![name(DISORDER_CURVE)];
        if has(GAP_SCAN) {
            inputs.push(name(GAP_SCAN));
        }
        figures.push(FigureEntry {
            kind: FigureKind::GapVsAlpha,
            inputs,
            output: "gap_vs_alpha.png".into(),
            rows: rows(DISORDER_CURVE),
        });
    } else if has(GAP_SCAN) && !has(ISING_BOUND) {
        figures.push(FigureEntry {
            kind: FigureKind::GapVsAlpha,
            inputs: vec![name(GAP_SCAN)],
            output: "gap_vs_alpha.png".into(),
            rows: rows(GAP_SCAN),
        });
    }
    if has(KAPPA_SCAN) {
        figures.push(FigureEntry {
            kind: FigureKind::GapVsKappa,
            inputs: vec![name(KAPPA_SCAN)],
            output: "gap_vs_kappa.png".into(),
            rows: rows(KAPPA_SCAN),
        });
    }
    for source in [SCALING, ISING_PEAK] {
        if has(source) {
            let mut inputs = vec![name(source)];
            inputs.extend(fits.iter().cloned());
            figures.push(FigureEntry {
                kind: FigureKind::ScalingInset,
                inputs,
                output: format!("{}_inset.png", source.name),
                rows: rows(source),
            });
        }
    }
    let files: BTreeMap<String, serde_json::Value> = tables
        .iter()
        .map(|(k, t)| {
            (
                t.path.file_name().unwrap().to_string_lossy().to_string(),
                json!({ "schema": format!("qmcmc.{k}"), "rows": t.rows.len(), "config_hash": t.meta.get("config_hash") }),
            )
        })
        .collect();
    write_json(
        dir,
        "plot_manifest.json",
        "plot_manifest",
        None,
        json!({ "files": files, "fits": fits, "figures": figures }),
    )
}
