//! `fit`: exponential or power-law fit of gaps against system size from
//! earlier CSV outputs.

use std::path::{Path, PathBuf};

use qmcmc_core::analysis::{fit_scaling, FitKind, ScalingFit};
use serde_json::json;

use crate::error::{CliError, Result};
use crate::output::{write_json, Table};

/// Column choice and row selection for a fit.
#[derive(Debug, Clone)]
pub struct FitRequest {
    pub inputs: Vec<PathBuf>,
    pub kind: FitKind,
    pub x_column: String,
    /// `None` picks the first of `delta`, `bound_peak`, `mean`, `bound`.
    pub y_column: Option<String>,
    /// `None` uses `stderr` when present; without errors every point gets
    /// unit weight in the linearized (log) coordinates.
    pub err_column: Option<String>,
    pub filters: Vec<(String, String)>,
    pub output: PathBuf,
}

const Y_CANDIDATES: &[&str] = &["delta", "bound_peak", "mean", "bound"];

pub fn parse_filter(text: &str) -> std::result::Result<(String, String), String> {
    text.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .filter(|(k, _)| !k.is_empty())
        .ok_or_else(|| format!("expected column=value, got '{text}'"))
}

/// `(N, δ, σ)` triples.
pub type FitPoints = Vec<(f64, f64, f64)>;

/// Collects `(N, δ, σ)` points from the inputs.
pub fn collect_points(req: &FitRequest) -> Result<(FitPoints, String, Option<String>)> {
    let mut points: Vec<(f64, f64, f64)> = Vec::new();
    let mut chosen_y = None;
    let mut chosen_err = None;
    for path in &req.inputs {
        let table = Table::read(path)?;
        if table.meta.contains_key("schema_version") {
            table.check_version()?;
        }
        let xc = table.column(&req.x_column)?;
        let y_name = match &req.y_column {
            Some(y) => y.clone(),
            None => Y_CANDIDATES
                .iter()
                .find(|c| table.columns.iter().any(|t| t == *c))
                .map(|c| c.to_string())
                .ok_or_else(|| CliError::input(path, 0, "no gap column found; pass --y-column"))?,
        };
        let yc = table.column(&y_name)?;
        let err_name = match &req.err_column {
            Some(e) => Some(e.clone()),
            None => table.columns.iter().find(|c| *c == "stderr").cloned(),
        };
        let ec = err_name.as_deref().map(|e| table.column(e)).transpose()?;
        let filters =
            req.filters.iter().map(|(k, v)| Ok((table.column(k)?, v.as_str()))).collect::<Result<Vec<_>>>()?;
        for row in &table.rows {
            if !filters.iter().all(|(c, v)| row.1.get(*c).map(String::as_str) == Some(*v)) {
                continue;
            }
            let x = table.float(row, xc)?;
            let y = table.float(row, yc)?;
            let sigma = match ec {
                Some(c) => table.float(row, c)?,
                None => match req.kind {
                    FitKind::Exponential => y * std::f64::consts::LN_2,
                    FitKind::PowerLaw => y,
                },
            };
            if points.iter().any(|p| p.0 == x) {
                return Err(CliError::input(
                    path,
                    row.0,
                    format!("second row for {}={x}; narrow the selection with --filter", req.x_column),
                ));
            }
            points.push((x, y, sigma));
        }
        chosen_y = Some(y_name);
        chosen_err = err_name;
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok((points, chosen_y.unwrap_or_default(), chosen_err))
}

pub fn fit(req: &FitRequest) -> Result<(ScalingFit, String, Option<String>)> {
    let (points, y, err) = collect_points(req)?;
    Ok((fit_scaling(&points, req.kind)?, y, err))
}

pub fn run(req: FitRequest) -> Result<()> {
    let (f, y, err) = fit(&req)?;
    let (dir, file) = split_output(&req.output);
    let inputs: Vec<String> = req.inputs.iter().map(|p| p.display().to_string()).collect();
    let filters: serde_json::Map<String, serde_json::Value> =
        req.filters.iter().map(|(k, v)| (k.clone(), v.clone().into())).collect();
    write_json(
        dir,
        file,
        "fit",
        None,
        json!({
            "kind": f.kind.name(),
            "exponent": f.exponent,
            "err": f.err,
            "chi2_nu": f.chi2_nu,
            "points_used": f.points_used,
            "intercept": f.intercept,
            "slope": f.slope(),
            "inputs": inputs,
            "x_column": req.x_column,
            "y_column": y,
            "err_column": err,
            "filters": filters,
        }),
    )?;
    println!(
        "{} exponent {:.6} ± {:.6} (χ²/ν {:.3}, {} points)",
        f.kind.name(),
        f.exponent,
        f.err,
        f.chi2_nu,
        f.points_used
    );
    Ok(())
}

fn split_output(path: &Path) -> (&Path, &str) {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let file = path.file_name().and_then(|f| f.to_str()).unwrap_or("fit.json");
    (dir, file)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(dir: &Path, body: &str, filters: Vec<(String, String)>) -> FitRequest {
        let path = dir.join("in.csv");
        std::fs::write(&path, body).unwrap();
        FitRequest {
            inputs: vec![path],
            kind: FitKind::Exponential,
            x_column: "N".into(),
            y_column: None,
            err_column: None,
            filters,
            output: dir.join("fit.json"),
        }
    }

    #[test]
    fn synthetic_exponential() {
        let dir = tempfile::tempdir().unwrap();
        let mut body = String::from("N,delta\n");
        for n in 5..=12 {
            body.push_str(&format!("{n},{}\n", 2f64.powf(-0.3 * n as f64)));
        }
        let (f, y, err) = fit(&request(dir.path(), &body, vec![])).unwrap();
        assert!((f.exponent - 0.3).abs() < 1e-12);
        assert_eq!((y.as_str(), err), ("delta", None));
    }

    #[test]
    fn filters_select_a_series() {
        let dir = tempfile::tempdir().unwrap();
        let mut body =
            String::from("# schema = qmcmc.scaling\n# schema_version = 1\nmodel,N,series,alpha,delta,stderr\n");
        for n in 5..=8 {
            let nf = n as f64;
            body.push_str(&format!("sk,{n},quench,0,{},0.001\n", 2f64.powf(-0.6 * nf)));
            body.push_str(&format!("sk,{n},peak,4,{},0.001\n", 2f64.powf(-0.2 * nf)));
        }
        let req = request(dir.path(), &body, vec![("series".into(), "peak".into())]);
        let (f, _, err) = fit(&req).unwrap();
        assert!((f.exponent - 0.2).abs() < 1e-10);
        assert_eq!(err.as_deref(), Some("stderr"));
        let all = request(dir.path(), &body, vec![]);
        let e = fit(&all).unwrap_err().to_string();
        assert!(e.contains("second row") && e.contains(":5:"), "{e}");
    }

    #[test]
    fn malformed_input_names_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let e = fit(&request(dir.path(), "N,delta\n5,0.1\n6,zero\n7,0.01\n", vec![])).unwrap_err().to_string();
        assert!(e.contains(":3:"), "{e}");
        assert!(parse_filter("series").is_err());
        assert_eq!(parse_filter("series = peak").unwrap(), ("series".into(), "peak".into()));
    }
}
