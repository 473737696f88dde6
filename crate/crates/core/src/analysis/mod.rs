//! Disorder averages, plateau-length scans, peak finding and scaling fits.

mod fit;
mod peak;
mod scan;

pub use fit::{fit_scaling, FitKind, ScalingFit};
pub use peak::{find_peak, ising_bound_peak, IsingPeak, Peak};
pub use scan::{
    aggregate, alpha_equals_n_scan, default_kappa_grid, disorder_scan, instance_gaps, kappa_scan, log_grid,
    mean_and_stderr, DisorderScan, GapCurve, GapPoint, InstanceFailure, InstanceGap, KappaScan, ScanConfig,
    DEFAULT_ALPHA_GRID, DEFAULT_INSTANCES,
};
