use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::Source;
use super::fit::fit_power_law;
use super::svg::{loglog, Series, Style};
use super::sweep::{SweepRow, SweepTable};
use crate::domain::DomainKind;
use crate::error::{Error, Result};

pub const INRADIUS_EXPONENT: f64 = -0.5;
pub const INRADIUS_EXPONENT_TOL: f64 = 0.05;
pub const MIN_R_SQUARED: f64 = 0.99;
pub const ASYMMETRY_P05_FLOOR: f64 = 0.2;
pub const SCALED_BAND: f64 = 2.0;
pub const BETA_PER_SQRT_LAMBDA: f64 = 10.0;
pub const BETA_SLOPE_MAX: f64 = 1.1;
pub const POSITIVITY_RATIO_FLOOR: f64 = 0.05;
pub const SLACK_SPREAD_MAX: f64 = 2.0;
pub const BOX_IDENTITY_TOL: f64 = 0.02;

/// One pass/fail line of a report.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub table: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
    pub files: Vec<PathBuf>,
}

impl Report {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }
}

/// Value of `λ₁ · inrad²` for a cube.
pub fn cube_identity() -> f64 {
    3.0 * PI * PI / 4.0
}

/// Each value at least `1/band` times the largest earlier one.
pub fn within_band(values: &[f64], band: f64) -> bool {
    let mut best = f64::NEG_INFINITY;
    for &v in values {
        if v * band < best {
            return false;
        }
        best = best.max(v);
    }
    true
}

/// Reference power law through the geometric center of the data.
fn reference(points: &[(f64, f64)], slope: f64) -> Vec<(f64, f64)> {
    if points.is_empty() {
        return Vec::new();
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0.ln()).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (lo, hi) = points.iter().fold((f64::INFINITY, 0.0f64), |(a, b), p| {
        (a.min(p.0), b.max(p.0))
    });
    [lo, hi]
        .iter()
        .map(|&x| (x, (my + slope * (x.ln() - mx)).exp()))
        .collect()
}

fn series(
    label: impl Into<String>,
    points: Vec<(f64, f64)>,
    style: Style,
    color: &'static str,
) -> Series {
    Series {
        label: label.into(),
        points,
        style,
        color,
    }
}

fn fmt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
}

fn is_cube_mode(t: &SweepTable, row: &SweepRow) -> bool {
    let c = &t.config;
    t.dim() == 3
        && c.source == Source::ClosedForm
        && matches!(c.domain.kind, DomainKind::Rectangle | DomainKind::Torus)
        && c.domain.dims.windows(2).all(|w| w[0] == w[1])
        && c.modes[row.index].windows(2).all(|w| w[0] == w[1])
}

/// Writes `report.md` and the SVG plots for every table into `out_dir`.
/// Pass/fail flags are computed from the stored rows alone.
pub fn emit_report(store: &[SweepTable], out_dir: &Path) -> Result<Report> {
    if store.iter().all(|t| t.rows.is_empty()) {
        return Err(Error::NothingToReport);
    }
    std::fs::create_dir_all(out_dir)?;
    let mut md = String::from("# Sweep report\n");
    let mut checks = Vec::new();
    let mut files = Vec::new();
    for t in store.iter().filter(|t| !t.rows.is_empty()) {
        let stem = format!("{}-{}", t.name, t.config_hash);
        let n = t.dim() as f64;
        let mut rows: Vec<&SweepRow> = t.rows.iter().collect();
        rows.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.index.cmp(&b.index)));
        let mut check = |md: &mut String, name: &str, passed: bool, detail: String| {
            let _ = writeln!(
                md,
                "- **{}** {name}: {detail}",
                if passed { "PASS" } else { "FAIL" }
            );
            checks.push(Check {
                table: stem.clone(),
                name: name.into(),
                passed,
                detail,
            });
        };
        let mut plot = |name: &str, svg: String| -> Result<String> {
            let file = format!("{stem}-{name}.svg");
            let path = out_dir.join(&file);
            std::fs::write(&path, svg)?;
            files.push(path);
            Ok(file)
        };

        let _ = writeln!(md, "\n## {} ({})\n", t.name, t.config_hash);
        let _ = writeln!(
            md,
            "{:?} domain, dimension {}, {} rows, seed {}, eps0 {}.\n",
            t.config.domain.kind,
            t.dim(),
            rows.len(),
            t.config.seed,
            t.config.eps0
        );
        let _ = writeln!(md, "| mode | lambda | components | max inradius | asym p05 | asym min | max beta | min ratio |");
        let _ = writeln!(md, "|---|---|---|---|---|---|---|---|");
        for r in &rows {
            let _ = writeln!(
                md,
                "| {} | {:.4} | {} | {:.5} | {} | {} | {} | {} |",
                r.mode,
                r.lambda,
                r.components,
                r.inradius_max,
                fmt(r.asym_p05),
                fmt(r.asym_min),
                fmt(r.beta_max),
                fmt(r.positivity_ratio_min)
            );
        }

        let _ = writeln!(md, "\n### Inner radius\n");
        let inr: Vec<(f64, f64)> = rows.iter().map(|r| (r.lambda, r.inradius_max)).collect();
        let mut plotted = vec![series(
            "max inradius",
            inr.clone(),
            Style::Markers,
            "#1f77b4",
        )];
        match fit_power_law(&inr) {
            Ok(fit) => {
                let ok = (fit.exponent - INRADIUS_EXPONENT).abs() <= INRADIUS_EXPONENT_TOL
                    && fit.r_squared >= MIN_R_SQUARED;
                check(
                    &mut md,
                    "inradius exponent",
                    ok,
                    format!("fitted slope {:.4} (target {INRADIUS_EXPONENT} ± {INRADIUS_EXPONENT_TOL}), r² = {:.5}", fit.exponent, fit.r_squared),
                );
                let line = inr
                    .iter()
                    .map(|&(x, _)| (x, fit.coefficient * x.powf(fit.exponent)))
                    .collect();
                plotted.push(series(
                    format!("fit, slope {:.3}", fit.exponent),
                    line,
                    Style::Line,
                    "#1f77b4",
                ));
            }
            Err(e) => {
                let _ = writeln!(md, "No fit: {e}.");
            }
        }
        plotted.push(series(
            "slope -1/2",
            reference(&inr, -0.5),
            Style::Dashed,
            "#7f7f7f",
        ));
        let f = plot(
            "inradius",
            loglog("Largest inner radius", "lambda", "inradius", &plotted),
        )?;
        let _ = writeln!(md, "\n![inradius]({f})");

        let _ = writeln!(md, "\n### Asymmetry\n");
        let p05: Vec<f64> = rows.iter().filter_map(|r| r.asym_p05).collect();
        if !p05.is_empty() {
            let worst = p05.iter().cloned().fold(f64::INFINITY, f64::min);
            check(
                &mut md,
                "asymmetry p05 floor",
                worst >= ASYMMETRY_P05_FLOOR,
                format!("smallest 5th percentile {worst:.4} (floor {ASYMMETRY_P05_FLOOR})"),
            );
        }
        let scaled: Vec<f64> = rows.iter().filter_map(|r| r.asym_min_scaled).collect();
        if scaled.len() >= 2 {
            check(
                &mut md,
                "scaled minimum band",
                within_band(&scaled, SCALED_BAND),
                format!("min·λ^((n-1)/2) from {:.4} to {:.4}, each within ×{SCALED_BAND} of the running maximum", scaled[0], scaled[scaled.len() - 1]),
            );
        }
        let amin: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| r.asym_min.map(|v| (r.lambda, v)))
            .collect();
        let ap05: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| r.asym_p05.map(|v| (r.lambda, v)))
            .collect();
        let mut plotted = vec![
            series("min", amin.clone(), Style::Markers, "#d62728"),
            series("p05", ap05, Style::Markers, "#2ca02c"),
            series(
                format!("slope -{}/2", n - 1.0),
                reference(&amin, -(n - 1.0) / 2.0),
                Style::Dashed,
                "#7f7f7f",
            ),
        ];
        if t.dim() == 2 {
            // 1/(log λ √(log log λ)), scaled to the first usable point.
            let shape = |l: f64| 1.0 / (l.ln() * l.ln().ln().sqrt());
            let usable: Vec<&(f64, f64)> = amin
                .iter()
                .filter(|p| p.0 > std::f64::consts::E.exp())
                .collect();
            if let Some(&&(l0, v0)) = usable.first() {
                let c = v0 / shape(l0);
                let curve = usable.iter().map(|p| (p.0, c * shape(p.0))).collect();
                plotted.push(series(
                    "1/(log λ √(log log λ))",
                    curve,
                    Style::Line,
                    "#9467bd",
                ));
            }
        }
        let f = plot(
            "asymmetry",
            loglog(
                "Smallest side of nodal-centered balls",
                "lambda",
                "min(pos, neg) fraction",
                &plotted,
            ),
        )?;
        let _ = writeln!(md, "\n![asymmetry]({f})");

        let beta: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| r.beta_max.map(|b| (r.lambda.sqrt(), b)))
            .collect();
        if !beta.is_empty() {
            let _ = writeln!(md, "\n### Doubling exponent\n");
            let worst = beta
                .iter()
                .map(|&(s, b)| b / s)
                .fold(f64::NEG_INFINITY, f64::max);
            check(
                &mut md,
                "doubling bound",
                worst <= BETA_PER_SQRT_LAMBDA,
                format!("largest β/√λ = {worst:.4} (bound {BETA_PER_SQRT_LAMBDA})"),
            );
            let mut plotted = vec![series("max beta", beta.clone(), Style::Markers, "#ff7f0e")];
            match fit_power_law(&beta) {
                Ok(fit) => {
                    check(
                        &mut md,
                        "doubling growth",
                        fit.exponent <= BETA_SLOPE_MAX,
                        format!(
                            "slope of max β against √λ {:.4} (max {BETA_SLOPE_MAX})",
                            fit.exponent
                        ),
                    );
                    let line = beta
                        .iter()
                        .map(|&(x, _)| (x, fit.coefficient * x.powf(fit.exponent)))
                        .collect();
                    plotted.push(series(
                        format!("fit, slope {:.3}", fit.exponent),
                        line,
                        Style::Line,
                        "#ff7f0e",
                    ));
                }
                Err(e) => {
                    let _ = writeln!(md, "No fit: {e}.");
                }
            }
            plotted.push(series(
                "slope 1",
                reference(&beta, 1.0),
                Style::Dashed,
                "#7f7f7f",
            ));
            let f = plot(
                "beta",
                loglog(
                    "Largest doubling exponent on wavelength balls",
                    "sqrt(lambda)",
                    "max beta",
                    &plotted,
                ),
            )?;
            let _ = writeln!(md, "\n![beta]({f})");
        }

        let ratios: Vec<f64> = rows.iter().filter_map(|r| r.positivity_ratio_min).collect();
        if !ratios.is_empty() {
            let _ = writeln!(md, "\n### Positivity volume\n");
            let worst = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            check(
                &mut md,
                "positivity ratio floor",
                worst >= POSITIVITY_RATIO_FLOOR,
                format!("smallest ratio {worst:.4} (floor {POSITIVITY_RATIO_FLOOR})"),
            );
        }

        let slack_rows: Vec<&&SweepRow> = rows.iter().filter(|r| r.slack_min.is_some()).collect();
        if !slack_rows.is_empty() {
            let _ = writeln!(md, "\n### Asymmetry constant and first eigenvalue\n");
            let _ = writeln!(
                md,
                "| mode | alpha | slack min | slack max | lambda1 inrad² |"
            );
            let _ = writeln!(md, "|---|---|---|---|---|");
            for r in &slack_rows {
                let _ = writeln!(
                    md,
                    "| {} | {} | {} | {} | {} |",
                    r.mode,
                    fmt(r.alpha_min),
                    fmt(r.slack_min),
                    fmt(r.slack_max),
                    fmt(r.identity_min)
                );
            }
            let lo = slack_rows
                .iter()
                .filter_map(|r| r.slack_min)
                .fold(f64::INFINITY, f64::min);
            let hi = slack_rows
                .iter()
                .filter_map(|r| r.slack_max)
                .fold(f64::NEG_INFINITY, f64::max);
            check(
                &mut md,
                "slack positive",
                lo > 0.0,
                format!("smallest slack {lo:.4}"),
            );
            check(
                &mut md,
                "slack spread",
                hi <= SLACK_SPREAD_MAX * lo,
                format!("max/min = {:.4} (max {SLACK_SPREAD_MAX})", hi / lo),
            );
            let cube: Vec<f64> = slack_rows
                .iter()
                .filter(|r| is_cube_mode(t, r))
                .flat_map(|r| [r.identity_min, r.identity_max])
                .flatten()
                .map(|v| (v / cube_identity() - 1.0).abs())
                .collect();
            if !cube.is_empty() {
                let worst = cube.iter().cloned().fold(0.0, f64::max);
                check(
                    &mut md,
                    "box identity",
                    worst <= BOX_IDENTITY_TOL,
                    format!("largest relative error of λ₁·inrad² against 3π²/4: {worst:.4}"),
                );
            }
        }
    }
    let path = out_dir.join("report.md");
    std::fs::write(&path, md)?;
    files.insert(0, path);
    Ok(Report { checks, files })
}
