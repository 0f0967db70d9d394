//! Config loading, seeded Monte Carlo runs, sweeps, and the verification
//! driver behind the command-line tool.

pub mod config;
pub mod observable_source;
pub mod runner;
pub mod verify;

pub use config::{Ensemble, ExperimentConfig};
pub use observable_source::{load_observable, ObservableSource};
pub use runner::{
    analytic_mse, load_config_observable, run_estimators, run_experiment, run_sweep, sweep_ratios, write_csv,
    RatioSummary, ResultRow, CSV_HEADER,
};
pub use verify::{run_verify, verify_grid, VerifyLevel, VerifyOptions};
