//! `ising-bound`: free-fermion bottleneck bound of the periodic Ising chain.

use qmcmc_core::analysis::ising_bound_peak;
use qmcmc_core::freefermion::{ising_bound, ising_bound_large_n, tail_term};
use qmcmc_core::problems::{Kappa, RampKind, RampSchedule};

use crate::config::{BoundMethod, Model, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{num, CsvOut, ISING_BOUND, ISING_PEAK};

/// Relative width in `ln α` to which peaks are located.
const PEAK_TOLERANCE: f64 = 1e-3;

pub fn run(config: RunConfig, peaks: bool) -> Result<()> {
    if config.model != Model::Ising || config.instance_file.is_some() {
        return Err(CliError::config("model", "the free-fermion bound applies to the Ising chain only"));
    }
    if let Some(&n) = config.sizes.iter().find(|&&n| n < 4 || n % 2 == 1) {
        return Err(CliError::config("n", format!("the bound needs even N >= 4, got {n}")));
    }
    let mut out = CsvOut::create(&config.output, ISING_BOUND, &config)?;
    for &n in &config.sizes {
        for &alpha in &config.alphas {
            let kind = if alpha == 0.0 { RampKind::Quench } else { config.ramp };
            let schedule = RampSchedule::new(kind, alpha, Kappa::LargeKappaLimit)?;
            let row = match config.bound_method {
                BoundMethod::Sectors => {
                    let b = ising_bound(n, config.beta, config.h, &schedule, config.mode_steps)?;
                    [b.bound, b.tail, b.sector0, b.sector1]
                }
                BoundMethod::Integral => {
                    let bound = ising_bound_large_n(
                        n,
                        config.beta,
                        config.h,
                        &schedule,
                        config.mode_steps,
                        config.quadrature_intervals,
                    )?;
                    [bound, tail_term(n, config.beta)?, f64::NAN, f64::NAN]
                }
            };
            let mut fields = vec![n.to_string(), num(config.beta), num(config.h), num(alpha)];
            fields.extend(row.iter().map(|&v| num(v)));
            out.row(&fields)?;
        }
        out.flush()?;
    }
    if peaks {
        let mut peak_out = CsvOut::create(&config.output, ISING_PEAK, &config)?;
        for &n in &config.sizes {
            let p = ising_bound_peak(n, config.beta, config.h, config.ramp, config.mode_steps, PEAK_TOLERANCE)?;
            peak_out.row(&[n.to_string(), num(config.beta), num(config.h), num(p.alpha), num(p.bound)])?;
            peak_out.flush()?;
        }
    }
    Ok(())
}
