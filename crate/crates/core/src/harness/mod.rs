//! Experiment configuration, λ-sweeps, persistence, power-law fits and
//! static reports.

mod config;
mod fit;
mod report;
mod svg;
mod sweep;

pub use config::{parse_real, ExperimentConfig, Source};
pub use fit::{fit_power_law, PowerLawFit};
pub use report::{
    cube_identity, emit_report, within_band, Check, Report, ASYMMETRY_P05_FLOOR,
    BETA_PER_SQRT_LAMBDA, BETA_SLOPE_MAX, BOX_IDENTITY_TOL, INRADIUS_EXPONENT,
    INRADIUS_EXPONENT_TOL, MIN_R_SQUARED, POSITIVITY_RATIO_FLOOR, SCALED_BAND, SLACK_SPREAD_MAX,
};
pub use svg::{loglog, Series, Style};
pub use sweep::{
    load_store, run_sweep, sample_row, sample_rows, store_paths, SweepRow, SweepTable, CSV_COLUMNS,
};

#[cfg(test)]
mod tests;
