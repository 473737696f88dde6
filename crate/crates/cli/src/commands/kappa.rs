//! `kappa`: gap against plateau length, its grid average and the
//! large-plateau limit.

use qmcmc_core::analysis::{kappa_scan, log_grid, KappaScan};
use rayon::prelude::*;

use super::{model_name, seed_field, units};
use crate::config::{KappaMode, RunConfig};
use crate::error::Result;
use crate::output::{num, CsvOut, KAPPA_SCAN};

/// Plateau lengths scanned: a single value or the configured log grid.
pub fn kappas(config: &RunConfig) -> Vec<f64> {
    match config.kappa {
        KappaMode::Value(k) => vec![k],
        KappaMode::Inf | KappaMode::Scan => log_grid(config.kappa_min, config.kappa_max, config.kappa_points),
    }
}

pub fn run(config: RunConfig) -> Result<()> {
    let config = config.with_default_instances(1);
    config.require_dense()?;
    let grid = kappas(&config);
    let all = units(&config)?;
    let mut out = CsvOut::create(&config.output, KAPPA_SCAN, &config)?;
    let batch = rayon::current_num_threads().max(1);
    for chunk in all.chunks(batch) {
        let results: Vec<Result<Vec<KappaScan>>> = chunk
            .par_iter()
            .map(|u| {
                config
                    .alphas
                    .iter()
                    .map(|&alpha| {
                        Ok(kappa_scan(
                            &u.hamiltonian,
                            config.beta,
                            config.h,
                            config.ramp,
                            alpha,
                            &grid,
                            config.steps_per_unit_time,
                        )?)
                    })
                    .collect()
            })
            .collect();
        for (u, result) in chunk.iter().zip(results) {
            let scans = match result {
                Ok(s) => s,
                Err(e) => {
                    log::warn!("{} N={} seed {} excluded: {e}", model_name(u), u.n, seed_field(u.seed));
                    continue;
                }
            };
            let prefix = |alpha: f64| vec![model_name(u).to_string(), u.n.to_string(), seed_field(u.seed), num(alpha)];
            let tail = |delta: f64, stderr: String| vec![num(config.h), num(config.beta), num(delta), stderr];
            for s in &scans {
                for &(k, delta) in &s.points {
                    out.row(&[prefix(s.alpha), vec![num(k)], tail(delta, String::new())].concat())?;
                }
                out.row(&[prefix(s.alpha), vec!["avg".into()], tail(s.mean, num(s.stderr))].concat())?;
                out.row(&[prefix(s.alpha), vec!["inf".into()], tail(s.large_kappa_gap, String::new())].concat())?;
            }
        }
        out.flush()?;
    }
    Ok(())
}
