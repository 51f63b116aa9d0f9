use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use nodalgeom::asymmetry::scan_asymmetry;
use nodalgeom::capacity::concentric_ball_capacity;
use nodalgeom::domain::build_grid;
use nodalgeom::eigen::{assemble_operator, lowest_eigenpairs, DEFAULT_TOL};
use nodalgeom::harness::{
    emit_report, fit_power_law, load_store, run_sweep, sample_row, sample_rows, ExperimentConfig,
    ASYMMETRY_P05_FLOOR, INRADIUS_EXPONENT, INRADIUS_EXPONENT_TOL, MIN_R_SQUARED,
};
use nodalgeom::nodal::{extract_nodal_domains, DEFAULT_ZERO_TOL};
use nodalgeom::{Error, Result};

#[derive(Parser)]
#[command(
    name = "nodalgeom",
    version,
    about = "Eigenfunctions, nodal domains, asymmetry and capacity on flat domains"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Experiment configuration (flat key = value file).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config's `output`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Overrides the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the config's eps0.
    #[arg(long, global = true)]
    eps0: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Lowest eigenpairs of the configured domain.
    Solve {
        /// Number of eigenpairs; defaults to the largest configured eigen index.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Nodal domains of one sweep row, written as CSV.
    Nodal {
        #[arg(long, default_value_t = 0)]
        row: usize,
    },
    /// Asymmetry scan of one sweep row, written as CSV.
    Scan {
        #[arg(long, default_value_t = 0)]
        row: usize,
    },
    /// Largest inner radius of every row and its power-law fit.
    Inradius,
    /// Capacity of concentric balls against the closed form.
    Capacity {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        /// Cells per axis across the outer ball.
        #[arg(long, default_value_t = 64)]
        cells: usize,
        #[arg(long, default_value_t = 0.4)]
        inner: f64,
        #[arg(long, default_value_t = 1.0)]
        outer: f64,
        /// Allowed relative error.
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
    },
    /// Runs the configured sweep and writes the report.
    Sweep,
    /// Writes the report for every sweep stored in the output directory.
    Report,
}

enum Outcome {
    Pass(Value),
    Fail(Value),
}

fn config(g: &Global) -> Result<ExperimentConfig> {
    let path = g
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config is required for this command".into()))?;
    let mut c = ExperimentConfig::from_file(path)?;
    if let Some(s) = g.seed {
        c.seed = s;
    }
    if let Some(e) = g.eps0 {
        c.eps0 = e;
    }
    if let Some(o) = &g.out {
        c.output = o.clone();
    }
    Ok(c)
}

fn out_dir(g: &Global, c: Option<&ExperimentConfig>) -> PathBuf {
    g.out
        .clone()
        .or_else(|| c.map(|c| c.output.clone()))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn create(dir: &Path, file: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(file))?))
}

fn run(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    match &cli.command {
        Command::Solve { k } => {
            let c = config(g)?;
            let k = k
                .or_else(|| c.eigen_indices.iter().max().copied())
                .unwrap_or(1);
            let grid = Arc::new(build_grid(&c.domain, c.resolution)?);
            let pairs = lowest_eigenpairs(&assemble_operator(&grid, None)?, k, DEFAULT_TOL)?;
            let dir = out_dir(g, Some(&c));
            let mut w = create(&dir, &format!("{}-eigenvalues.csv", c.name))?;
            use std::io::Write;
            writeln!(w, "index,eigenvalue,residual")?;
            for (i, p) in pairs.iter().enumerate() {
                writeln!(w, "{},{:.12e},{:.12e}", i + 1, p.eigenvalue, p.residual)?;
            }
            let max_res = pairs.iter().map(|p| p.residual).fold(0.0, f64::max);
            let eig: Vec<f64> = pairs.iter().map(|p| p.eigenvalue).collect();
            Ok(Outcome::Pass(
                json!({"command": "solve", "k": k, "eigenvalues": eig, "max_residual": max_res}),
            ))
        }
        Command::Nodal { row } => {
            let c = config(g)?;
            let (lambda, field, _) = sample_row(&c, *row)?;
            let d = extract_nodal_domains(&field, DEFAULT_ZERO_TOL)?;
            let dir = out_dir(g, Some(&c));
            let file = format!("{}-row{row}-components.csv", c.name);
            d.write_csv(&mut create(&dir, &file)?)?;
            let max_inr = d
                .components()
                .iter()
                .map(|x| x.inradius)
                .fold(0.0, f64::max);
            Ok(Outcome::Pass(json!({
                "command": "nodal", "row": row, "mode": c.label_for(*row), "lambda": lambda,
                "components": d.len(), "nodal_cells": d.nodal_cells().len(), "max_inradius": max_inr,
                "file": dir.join(file),
            })))
        }
        Command::Scan { row } => {
            let c = config(g)?;
            c.validate()?;
            let (lambda, field, _) = sample_row(&c, *row)?;
            let radii: Vec<f64> = c.radii.iter().map(|r| r / lambda.sqrt()).collect();
            let scan = scan_asymmetry(&field, lambda, &radii, c.max_centers, c.seed)?;
            let dir = out_dir(g, Some(&c));
            let file = format!("{}-row{row}-asymmetry.csv", c.name);
            nodalgeom::asymmetry::write_asymmetry_csv(&scan.records, &mut create(&dir, &file)?)?;
            let ok = scan.summary.p05.is_some_and(|p| p >= ASYMMETRY_P05_FLOOR);
            let v = json!({"command": "scan", "row": row, "mode": c.label_for(*row), "summary": scan.summary, "passed": ok, "file": dir.join(file)});
            Ok(if ok {
                Outcome::Pass(v)
            } else {
                Outcome::Fail(v)
            })
        }
        Command::Inradius => {
            let c = config(g)?;
            c.validate()?;
            let mut points = Vec::new();
            for (lambda, field, _) in sample_rows(&c)? {
                let d = extract_nodal_domains(&field, DEFAULT_ZERO_TOL)?;
                points.push((
                    lambda,
                    d.components()
                        .iter()
                        .map(|x| x.inradius)
                        .fold(0.0, f64::max),
                ));
            }
            let rows: Vec<Value> = points
                .iter()
                .map(|&(l, r)| json!({"lambda": l, "inradius": r}))
                .collect();
            if points.len() < 3 {
                return Ok(Outcome::Pass(
                    json!({"command": "inradius", "rows": rows, "fit": null}),
                ));
            }
            let fit = fit_power_law(&points)?;
            let ok = (fit.exponent - INRADIUS_EXPONENT).abs() <= INRADIUS_EXPONENT_TOL
                && fit.r_squared >= MIN_R_SQUARED;
            let v = json!({"command": "inradius", "rows": rows, "exponent": fit.exponent, "coefficient": fit.coefficient, "r_squared": fit.r_squared, "passed": ok});
            Ok(if ok {
                Outcome::Pass(v)
            } else {
                Outcome::Fail(v)
            })
        }
        Command::Capacity {
            dim,
            cells,
            inner,
            outer,
            tol,
        } => {
            let r = concentric_ball_capacity(*dim, *cells, *inner, *outer)?;
            let ok = r.relative_error.abs() <= *tol;
            let v = json!({"command": "capacity", "result": r, "passed": ok});
            Ok(if ok {
                Outcome::Pass(v)
            } else {
                Outcome::Fail(v)
            })
        }
        Command::Sweep => {
            let c = config(g)?;
            let jobs = g
                .jobs
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let table = run_sweep(&c, jobs)?;
            let report = emit_report(std::slice::from_ref(&table), &c.output.join("report"))?;
            let v = json!({
                "command": "sweep", "config_hash": table.config_hash, "rows": table.rows.len(),
                "failures": report.failures(), "checks": report.checks,
            });
            Ok(if report.failures() == 0 {
                Outcome::Pass(v)
            } else {
                Outcome::Fail(v)
            })
        }
        Command::Report => {
            let c = g.config.as_ref().map(|_| config(g)).transpose()?;
            let dir = out_dir(g, c.as_ref());
            let report = emit_report(&load_store(&dir)?, &dir.join("report"))?;
            let v = json!({"command": "report", "failures": report.failures(), "checks": report.checks, "files": report.files});
            Ok(if report.failures() == 0 {
                Outcome::Pass(v)
            } else {
                Outcome::Fail(v)
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.global.jobs {
        // Ignored if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global();
    }
    match run(&cli) {
        Ok(Outcome::Pass(v)) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Ok(Outcome::Fail(v)) => {
            println!("{v}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("{}", json!({"error": e.to_string()}));
            ExitCode::FAILURE
        }
    }
}
