use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Source};
use crate::asymmetry::{doubling_scan, scan_asymmetry};
use crate::capacity::verify_alpha_inradius_bound;
use crate::domain::{build_grid, sample_closed_form, Grid, ScalarField};
use crate::eigen::{assemble_operator, lowest_eigenpairs, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::nodal::{extract_nodal_domains, DEFAULT_ZERO_TOL};

/// One sweep row. Field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub config_hash: String,
    pub index: usize,
    pub mode: String,
    pub lambda: f64,
    pub cells: usize,
    pub spacing: f64,
    pub residual: Option<f64>,
    pub components: usize,
    pub inradius_max: f64,
    pub inradius_min: f64,
    pub asym_probes: usize,
    pub asym_unclipped: usize,
    pub asym_min: Option<f64>,
    pub asym_p05: Option<f64>,
    pub asym_min_scaled: Option<f64>,
    pub doubling_centers: Option<usize>,
    pub doubling_skipped: Option<usize>,
    pub beta_max: Option<f64>,
    pub positivity_ratio_min: Option<f64>,
    pub alpha_min: Option<f64>,
    pub slack_min: Option<f64>,
    pub slack_max: Option<f64>,
    pub identity_min: Option<f64>,
    pub identity_max: Option<f64>,
}

pub const CSV_COLUMNS: [&str; 24] = [
    "config_hash",
    "index",
    "mode",
    "lambda",
    "cells",
    "spacing",
    "residual",
    "components",
    "inradius_max",
    "inradius_min",
    "asym_probes",
    "asym_unclipped",
    "asym_min",
    "asym_p05",
    "asym_min_scaled",
    "doubling_centers",
    "doubling_skipped",
    "beta_max",
    "positivity_ratio_min",
    "alpha_min",
    "slack_min",
    "slack_max",
    "identity_min",
    "identity_max",
];

/// Everything stored for one configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub name: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn dim(&self) -> usize {
        self.config.domain.dimension()
    }

    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "{}", CSV_COLUMNS.join(","))?;
        let f = |v: f64| format!("{v:.12e}");
        let of = |v: Option<f64>| v.map(f).unwrap_or_default();
        let ou = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            let cols = [
                r.config_hash.clone(),
                r.index.to_string(),
                r.mode.clone(),
                f(r.lambda),
                r.cells.to_string(),
                f(r.spacing),
                of(r.residual),
                r.components.to_string(),
                f(r.inradius_max),
                f(r.inradius_min),
                r.asym_probes.to_string(),
                r.asym_unclipped.to_string(),
                of(r.asym_min),
                of(r.asym_p05),
                of(r.asym_min_scaled),
                ou(r.doubling_centers),
                ou(r.doubling_skipped),
                of(r.beta_max),
                of(r.positivity_ratio_min),
                of(r.alpha_min),
                of(r.slack_min),
                of(r.slack_max),
                of(r.identity_min),
                of(r.identity_max),
            ];
            writeln!(w, "{}", cols.join(","))?;
        }
        Ok(())
    }
}

/// Paths of the CSV and JSON files for a configuration.
pub fn store_paths(config: &ExperimentConfig) -> (PathBuf, PathBuf) {
    let stem = format!("{}-{}", config.name, config.hash());
    (
        config.output.join(format!("{stem}.csv")),
        config.output.join(format!("{stem}.json")),
    )
}

/// Reads every sweep table stored in `dir`, in file-name order.
pub fn load_store(dir: &Path) -> Result<Vec<SweepTable>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut tables = Vec::new();
    for p in paths {
        let text = std::fs::read_to_string(&p)?;
        // Other JSON files may share the directory.
        if let Ok(t) = serde_json::from_str::<SweepTable>(&text) {
            tables.push(t);
        }
    }
    Ok(tables)
}

/// Runs every row of the sweep that is not already stored, on a pool of
/// `jobs` threads, then rewrites the CSV and JSON files sorted by row.
pub fn run_sweep(config: &ExperimentConfig, jobs: usize) -> Result<SweepTable> {
    config.validate()?;
    let hash = config.hash();
    let (csv_path, json_path) = store_paths(config);
    let mut rows: Vec<SweepRow> = match std::fs::read_to_string(&json_path) {
        Ok(text) => {
            let t: SweepTable = serde_json::from_str(&text)
                .map_err(|e| Error::Format(format!("{}: {e}", json_path.display())))?;
            t.rows
                .into_iter()
                .filter(|r| {
                    r.config_hash == hash
                        && r.index < config.row_count()
                        && r.mode == config.label_for(r.index)
                })
                .collect()
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(e.into()),
    };
    let missing: Vec<usize> = (0..config.row_count())
        .filter(|i| !rows.iter().any(|r| r.index == *i))
        .collect();
    if !missing.is_empty() {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        let new_rows: Vec<SweepRow> = pool.install(|| match config.source {
            Source::ClosedForm => missing
                .par_iter()
                .map(|&i| closed_form_row(config, &hash, i))
                .collect::<Result<_>>(),
            Source::Eigensolve => eigensolve_rows(config, &hash, &missing),
        })?;
        rows.extend(new_rows);
    }
    rows.sort_by_key(|r| r.index);
    let table = SweepTable {
        name: config.name.clone(),
        config_hash: hash,
        config: config.clone(),
        rows,
    };
    std::fs::create_dir_all(&config.output)?;
    let mut csv = Vec::new();
    table.write_csv(&mut csv)?;
    std::fs::write(&csv_path, csv)?;
    std::fs::write(&json_path, serde_json::to_string_pretty(&table)? + "\n")?;
    Ok(table)
}

/// Field and eigenvalue of row `i`, with the solver residual when the
/// field was computed numerically.
pub fn sample_row(config: &ExperimentConfig, i: usize) -> Result<(f64, ScalarField, Option<f64>)> {
    if i >= config.row_count() {
        return Err(Error::Config(format!(
            "row {i} out of range 0..{}",
            config.row_count()
        )));
    }
    match config.source {
        Source::ClosedForm => {
            let grid = Arc::new(build_grid(&config.domain, config.cells_for(i))?);
            let (lambda, field) = sample_closed_form(&config.domain, &config.modes[i], &grid)?;
            Ok((lambda, field, None))
        }
        Source::Eigensolve => {
            let grid = Arc::new(build_grid(&config.domain, config.resolution)?);
            let op = assemble_operator(&grid, None)?;
            let k = config.eigen_indices[i];
            let p = lowest_eigenpairs(&op, k, DEFAULT_TOL)?.swap_remove(k - 1);
            Ok((p.eigenvalue, p.field, Some(p.residual)))
        }
    }
}

/// Every row of the sweep; numerically solved rows share one eigensolve.
pub fn sample_rows(config: &ExperimentConfig) -> Result<Vec<(f64, ScalarField, Option<f64>)>> {
    match config.source {
        Source::ClosedForm => (0..config.row_count())
            .map(|i| sample_row(config, i))
            .collect(),
        Source::Eigensolve => {
            let grid = Arc::new(build_grid(&config.domain, config.resolution)?);
            let op = assemble_operator(&grid, None)?;
            let k = config.eigen_indices.iter().max().copied().unwrap_or(1);
            let pairs = lowest_eigenpairs(&op, k, DEFAULT_TOL)?;
            Ok(config
                .eigen_indices
                .iter()
                .map(|&j| {
                    (
                        pairs[j - 1].eigenvalue,
                        pairs[j - 1].field.clone(),
                        Some(pairs[j - 1].residual),
                    )
                })
                .collect())
        }
    }
}

fn closed_form_row(config: &ExperimentConfig, hash: &str, i: usize) -> Result<SweepRow> {
    let (lambda, field, _) = sample_row(config, i)?;
    measure(config, hash, i, &field, lambda, None)
}

fn eigensolve_rows(
    config: &ExperimentConfig,
    hash: &str,
    missing: &[usize],
) -> Result<Vec<SweepRow>> {
    let grid = Arc::new(build_grid(&config.domain, config.resolution)?);
    let op = assemble_operator(&grid, None)?;
    let k = missing
        .iter()
        .map(|&i| config.eigen_indices[i])
        .max()
        .unwrap_or(1);
    let pairs = lowest_eigenpairs(&op, k, DEFAULT_TOL)?;
    missing
        .par_iter()
        .map(|&i| {
            let p = &pairs[config.eigen_indices[i] - 1];
            measure(config, hash, i, &p.field, p.eigenvalue, Some(p.residual))
        })
        .collect()
}

fn min_max(values: &[f64]) -> (Option<f64>, Option<f64>) {
    let min = values.iter().cloned().reduce(f64::min);
    let max = values.iter().cloned().reduce(f64::max);
    (min, max)
}

fn measure(
    config: &ExperimentConfig,
    hash: &str,
    i: usize,
    field: &ScalarField,
    lambda: f64,
    residual: Option<f64>,
) -> Result<SweepRow> {
    let grid: &Grid = field.grid();
    let h = grid.spacing();
    let decomp = extract_nodal_domains(field, DEFAULT_ZERO_TOL)?;
    let inr: Vec<f64> = decomp.components().iter().map(|c| c.inradius).collect();
    let radii: Vec<f64> = config.radii.iter().map(|r| r / lambda.sqrt()).collect();
    let scan = scan_asymmetry(field, lambda, &radii, config.max_centers, config.seed)?;
    let doubling = if config.doubling {
        Some(doubling_scan(
            field,
            lambda,
            config.eps0,
            config.max_centers,
            config.seed,
        )?)
    } else {
        None
    };
    let mut alphas = Vec::new();
    let mut slacks = Vec::new();
    let mut identities = Vec::new();
    if config.capacity_checks && grid.dim() == 3 {
        let alpha_radii: Vec<f64> = config.alpha_radii.iter().map(|r| r * h).collect();
        for c in decomp.components().iter().take(config.capacity_components) {
            let omega = decomp.component_mask(c.id)?;
            let check = verify_alpha_inradius_bound(
                grid,
                &omega,
                None,
                &alpha_radii,
                config.max_centers,
                config.seed,
            )?;
            alphas.push(check.alpha);
            slacks.push(check.slack);
            identities.push(check.lambda1 * check.inradius * check.inradius);
        }
    }
    let (slack_min, slack_max) = min_max(&slacks);
    let (identity_min, identity_max) = min_max(&identities);
    Ok(SweepRow {
        config_hash: hash.to_string(),
        index: i,
        mode: config.label_for(i),
        lambda,
        cells: config.cells_for(i),
        spacing: h,
        residual,
        components: decomp.len(),
        inradius_max: inr.iter().cloned().fold(0.0, f64::max),
        inradius_min: inr.iter().cloned().fold(f64::INFINITY, f64::min),
        asym_probes: scan.summary.probes,
        asym_unclipped: scan.summary.unclipped,
        asym_min: scan.summary.min,
        asym_p05: scan.summary.p05,
        asym_min_scaled: scan.summary.min_scaled,
        doubling_centers: doubling.as_ref().map(|d| d.records.len()),
        doubling_skipped: doubling.as_ref().map(|d| d.skipped),
        beta_max: doubling.as_ref().and_then(|d| d.max_beta),
        positivity_ratio_min: doubling.as_ref().and_then(|d| d.min_ratio),
        alpha_min: min_max(&alphas).0,
        slack_min,
        slack_max,
        identity_min,
        identity_max,
    })
}
