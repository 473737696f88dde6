//! Subcommand implementations.

pub mod disorder;
pub mod fit;
pub mod gap;
pub mod ising_bound;
pub mod kappa;
pub mod plot_data;

use std::collections::BTreeSet;
use std::path::Path;

use qmcmc_core::analysis::InstanceGap;
use qmcmc_core::problems::{ClassicalHamiltonian, DisorderSpec, InstanceRecord, Kappa};
use rayon::prelude::*;

use crate::config::{KappaMode, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{num, CsvOut, Table, GAP_SCAN};

/// One Hamiltonian to analyse.
pub struct Unit {
    pub n: usize,
    /// Position within its size (instance index).
    pub index: usize,
    pub seed: Option<u64>,
    pub hamiltonian: ClassicalHamiltonian,
}

/// Reads one instance record or a JSON array of them.
pub fn read_instance_file(path: &Path) -> Result<Vec<InstanceRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::input(path, e.line() as u64, format!("invalid JSON: {e}")))?;
    let parse = |v: serde_json::Value| {
        serde_json::from_value::<InstanceRecord>(v)
            .map_err(|e| CliError::input(path, 0, format!("invalid instance record: {e}")))
    };
    match value {
        serde_json::Value::Array(items) => items.into_iter().map(parse).collect(),
        other => Ok(vec![parse(other)?]),
    }
}

/// The Hamiltonians selected by the configuration: the instance file if
/// given, otherwise the Ising ring or `instances` disorder draws per size
/// derived from the master seed.
pub fn units(config: &RunConfig) -> Result<Vec<Unit>> {
    if let Some(path) = &config.instance_file {
        let mut out = Vec::new();
        for (index, record) in read_instance_file(path)?.into_iter().enumerate() {
            let hamiltonian = record.to_hamiltonian()?;
            out.push(Unit { n: hamiltonian.n(), index, seed: record.seed, hamiltonian });
        }
        return Ok(out);
    }
    let mut out = Vec::new();
    for &n in &config.sizes {
        match config.model.disorder() {
            None => out.push(Unit { n, index: 0, seed: None, hamiltonian: ClassicalHamiltonian::ising_chain(n)? }),
            Some(model) => {
                let spec = DisorderSpec::new(model, n, config.seed, config.instance_count());
                for (index, seed) in spec.instance_seeds().into_iter().enumerate() {
                    out.push(Unit { n, index, seed: Some(seed), hamiltonian: spec.sample(seed)? });
                }
            }
        }
    }
    Ok(out)
}

/// Model label of a unit (the instance file may mix models).
pub fn model_name(unit: &Unit) -> &'static str {
    unit.hamiltonian.model_name()
}

pub fn seed_field(seed: Option<u64>) -> String {
    seed.map_or(String::new(), |s| s.to_string())
}

/// The plateau handling of a gap computation.
pub fn gap_kappa(config: &RunConfig) -> Result<Kappa> {
    match config.kappa {
        KappaMode::Inf => Ok(Kappa::LargeKappaLimit),
        KappaMode::Value(k) => Ok(Kappa::Finite(k)),
        KappaMode::Scan => Err(CliError::config("kappa", "plateau scans are run by the kappa subcommand")),
    }
}

pub fn gap_row(model: &str, n: usize, config: &RunConfig, g: &InstanceGap, seed: Option<u64>) -> Vec<String> {
    vec![
        model.to_string(),
        n.to_string(),
        seed_field(seed),
        num(g.alpha),
        g.kappa.map_or("inf".to_string(), num),
        num(config.h),
        num(config.beta),
        num(g.delta),
        num(g.lambda2),
        num(g.db_residual),
        num(g.stationarity_residual),
    ]
}

/// Per-instance gap records keyed by size and model, reconstructed from a
/// `gap_scan.csv`.
pub fn records_from_table(table: &Table) -> Result<Vec<(String, usize, InstanceGap)>> {
    let col = |name: &str| table.column(name);
    let (cm, cn, cs, ca, ck, cd, cl, cdb, cst) = (
        col("model")?,
        col("N")?,
        col("seed")?,
        col("alpha")?,
        col("kappa")?,
        col("delta")?,
        col("lambda2")?,
        col("db_residual")?,
        col("stationarity_residual")?,
    );
    let mut out = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        let n: usize = row.1[cn]
            .parse()
            .map_err(|_| CliError::input(&table.path, row.0, format!("column 'N': '{}' is not a size", row.1[cn])))?;
        let seed = match row.1[cs].as_str() {
            "" => None,
            s => Some(
                s.parse::<u64>().map_err(|_| CliError::input(&table.path, row.0, format!("column 'seed': '{s}'")))?,
            ),
        };
        let kappa = match row.1[ck].as_str() {
            "inf" => None,
            _ => Some(table.float(row, ck)?),
        };
        out.push((
            row.1[cm].clone(),
            n,
            InstanceGap {
                instance: 0,
                seed: seed.unwrap_or(0),
                alpha: table.float(row, ca)?,
                kappa,
                delta: table.float(row, cd)?,
                lambda2: table.float(row, cl)?,
                db_residual: table.float(row, cdb)?,
                stationarity_residual: table.float(row, cst)?,
            },
        ));
    }
    Ok(out)
}

/// Outcome of a gap sweep: every record for the configuration (including
/// rows found from an earlier run) and the instances that failed.
pub struct GapSweep {
    pub records: Vec<(String, usize, InstanceGap)>,
    pub failures: Vec<serde_json::Value>,
    pub computed: usize,
    pub reused: usize,
}

/// Computes per-instance gaps for every unit not already present in
/// `gap_scan.csv`, appending rows in unit order and flushing after each
/// batch. Units run in parallel within a batch.
pub fn gap_sweep(config: &RunConfig) -> Result<GapSweep> {
    config.require_dense()?;
    let scan = config.scan_config(gap_kappa(config)?);
    let all = units(config)?;
    if let Some(u) = all.iter().find(|u| u.n > qmcmc_core::problems::MAX_DENSE_SITES) {
        return Err(qmcmc_core::Error::SizeCap {
            n: u.n,
            cap: qmcmc_core::problems::MAX_DENSE_SITES,
            what: "dense operator",
        }
        .into());
    }
    let (mut out, existing) = CsvOut::append_or_create(&config.output, GAP_SCAN, config)?;
    let mut records = match &existing {
        Some(t) => records_from_table(t)?,
        None => Vec::new(),
    };
    let done: BTreeSet<(String, usize, u64)> = records.iter().map(|(m, n, g)| (m.clone(), *n, g.seed)).collect();
    let todo: Vec<&Unit> =
        all.iter().filter(|u| !done.contains(&(model_name(u).to_string(), u.n, u.seed.unwrap_or(0)))).collect();
    let reused = all.len() - todo.len();
    if reused > 0 {
        log::info!("{}: reusing {reused} instances from an earlier run", out.path().display());
    }
    let batch = rayon::current_num_threads().max(1);
    let mut failures = Vec::new();
    let mut computed = 0;
    for chunk in todo.chunks(batch) {
        let results: Vec<_> = chunk
            .par_iter()
            .map(|u| qmcmc_core::analysis::instance_gaps(&u.hamiltonian, u.index, u.seed.unwrap_or(0), &scan))
            .collect();
        for (u, result) in chunk.iter().zip(results) {
            match result {
                Ok(gaps) => {
                    for g in &gaps {
                        out.row(&gap_row(model_name(u), u.n, config, g, u.seed))?;
                    }
                    records.extend(gaps.into_iter().map(|g| (model_name(u).to_string(), u.n, g)));
                    computed += 1;
                }
                Err(e) => {
                    log::warn!("{} N={} seed {} excluded: {e}", model_name(u), u.n, seed_field(u.seed));
                    failures.push(serde_json::json!({
                        "model": model_name(u), "N": u.n, "seed": u.seed, "message": e.to_string()
                    }));
                }
            }
        }
        out.flush()?;
    }
    Ok(GapSweep { records, failures, computed, reused })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{resolve, RawConfig};

    fn config(pairs: &[(&str, &str)]) -> RunConfig {
        resolve(None, &pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect::<RawConfig>()).unwrap()
    }

    #[test]
    fn units_follow_the_model() {
        assert_eq!(units(&config(&[("model", "ising"), ("n", "4,6")])).unwrap().len(), 2);
        let u = units(&config(&[("model", "sk"), ("n", "4..5"), ("instances", "3"), ("seed", "9")])).unwrap();
        assert_eq!(u.len(), 6);
        assert_eq!((u[4].n, u[4].index), (5, 1));
        assert!(u.iter().all(|x| x.seed.is_some()));
        let again = units(&config(&[("model", "sk"), ("n", "4..5"), ("instances", "3"), ("seed", "9")])).unwrap();
        assert_eq!(u[5].seed, again[5].seed);
    }

    #[test]
    fn instance_file_overrides_model() {
        let dir = tempfile::tempdir().unwrap();
        let h = qmcmc_core::problems::sample_3spin(5, 2).unwrap();
        let record = InstanceRecord::from_hamiltonian(&h, Some(2));
        let path = dir.path().join("inst.json");
        std::fs::write(&path, serde_json::to_string(&vec![record.clone(), record]).unwrap()).unwrap();
        let u = units(&config(&[("model", "ising"), ("instance_file", path.to_str().unwrap())])).unwrap();
        assert_eq!(u.len(), 2);
        assert_eq!(model_name(&u[0]), "3spin");
        assert_eq!(u[1].hamiltonian, h);
        std::fs::write(&path, "{ not json").unwrap();
        assert!(read_instance_file(&path).is_err());
    }
}
