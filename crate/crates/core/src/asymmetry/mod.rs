//! Growth exponents, local asymmetry of the positivity set around the
//! nodal set, and wavelength-scale doubling exponents.

mod diagnostics;
mod growth;

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{wavelength_radius, wavelength_rescale, Point, ScalarField};
use crate::error::{Error, Result};
use crate::nodal::{
    extract_nodal_domains, fraction_in_ball, positivity_volume_in_ball, NodalDecomposition,
    DEFAULT_ZERO_TOL,
};
use crate::stats::Distribution;

pub use diagnostics::{elliptic_diagnostics, DiagnosticOptions, EllipticReport};
pub use growth::{
    check_growth_positivity, clamp_growth, growth_exponent, verify_positivity_bound,
    GrowthExponent, GrowthPositivity, PositivityBound, CENTER_ZERO_TOL,
};

pub const DEFAULT_MAX_CENTERS: usize = 512;

/// Zero crossings of the field, used as ball centers.
pub fn nodal_centers(field: &ScalarField) -> Result<Vec<Point>> {
    let d = match extract_nodal_domains(field, DEFAULT_ZERO_TOL) {
        Ok(d) => d,
        Err(Error::AllNodal) => return Err(Error::NoNodalSet),
        Err(e) => return Err(e),
    };
    if d.nodal_points().is_empty() {
        return Err(Error::NoNodalSet);
    }
    Ok(d.nodal_points().to_vec())
}

/// At most `max_centers` points taken with a fixed stride; the seed picks
/// the offset within the first stride.
pub fn subsample<T: Clone>(points: &[T], max_centers: usize, seed: u64) -> Vec<T> {
    if max_centers == 0 || points.is_empty() {
        return Vec::new();
    }
    let stride = points.len().div_ceil(max_centers);
    let offset = (seed % stride as u64) as usize;
    points
        .iter()
        .skip(offset)
        .step_by(stride)
        .take(max_centers)
        .cloned()
        .collect()
}

/// One ball probe centered on the nodal set.
#[derive(Clone, Debug, Serialize)]
pub struct AsymmetryRecord {
    pub center: Point,
    pub radius: f64,
    pub pos_frac: f64,
    pub neg_frac: f64,
    pub lambda: f64,
    pub clipped: bool,
}

impl AsymmetryRecord {
    pub fn min_frac(&self) -> f64 {
        self.pos_frac.min(self.neg_frac)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymmetrySummary {
    pub lambda: f64,
    pub probes: usize,
    /// Probes whose ball stays inside the domain; only these are summarized.
    pub unclipped: usize,
    /// Smallest `min(pos_frac, neg_frac)`.
    pub min: Option<f64>,
    /// 5th percentile of `min(pos_frac, neg_frac)`.
    pub p05: Option<f64>,
    /// `min · λ^{(n-1)/2}`.
    pub min_scaled: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct AsymmetryScan {
    pub records: Vec<AsymmetryRecord>,
    pub summary: AsymmetrySummary,
}

/// Writes records as CSV.
pub fn write_asymmetry_csv(records: &[AsymmetryRecord], w: &mut impl Write) -> Result<()> {
    writeln!(
        w,
        "lambda,radius,center_x,center_y,center_z,pos_frac,neg_frac,clipped"
    )?;
    for r in records {
        let c = r.center;
        writeln!(
            w,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}",
            r.lambda, r.radius, c[0], c[1], c[2], r.pos_frac, r.neg_frac, r.clipped as u8
        )?;
    }
    Ok(())
}

/// Probes balls of every radius around subsampled nodal points.
pub fn scan_asymmetry(
    field: &ScalarField,
    lambda: f64,
    radii: &[f64],
    max_centers: usize,
    seed: u64,
) -> Result<AsymmetryScan> {
    let h = field.grid().spacing();
    if let Some(&r) = radii.iter().find(|&&r| !(r >= 4.0 * h)) {
        return Err(Error::Resolution(format!(
            "radius {r} is below 4h = {}",
            4.0 * h
        )));
    }
    let centers = subsample(&nodal_centers(field)?, max_centers, seed);
    let per_center: Vec<Vec<AsymmetryRecord>> = centers
        .par_iter()
        .map(|c| {
            radii
                .iter()
                .map(|&radius| {
                    let b = positivity_volume_in_ball(field, c, radius)?;
                    Ok(AsymmetryRecord {
                        center: *c,
                        radius,
                        pos_frac: b.pos_frac,
                        neg_frac: b.neg_frac,
                        lambda,
                        clipped: b.clipped,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let records: Vec<AsymmetryRecord> = per_center.into_iter().flatten().collect();
    let dist = Distribution::from_values(
        records
            .iter()
            .filter(|r| !r.clipped)
            .map(AsymmetryRecord::min_frac),
    );
    let n = field.grid().dim() as f64;
    let summary = AsymmetrySummary {
        lambda,
        probes: records.len(),
        unclipped: dist.map_or(0, |d| d.count),
        min: dist.map(|d| d.min),
        p05: dist.map(|d| d.p05),
        min_scaled: dist.map(|d| d.min * lambda.powf((n - 1.0) / 2.0)),
    };
    Ok(AsymmetryScan { records, summary })
}

/// Growth and positivity measured on one wavelength ball.
#[derive(Clone, Debug, Serialize)]
pub struct DoublingRecord {
    pub center: Point,
    pub beta: f64,
    pub beta_plus: Option<f64>,
    /// Positivity fraction of the unit ball.
    pub positivity: f64,
    /// `positivity · ⟨β⁺⟩^{n-1}`, when `β⁺` is defined.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DoublingScan {
    pub lambda: f64,
    pub radius: f64,
    pub records: Vec<DoublingRecord>,
    /// Centers whose wavelength ball leaves the domain.
    pub skipped: usize,
    pub max_beta: Option<f64>,
    pub beta_distribution: Option<Distribution>,
    pub min_ratio: Option<f64>,
}

/// `β_{1/2}` and the positivity ratio on wavelength balls around
/// subsampled nodal points.
pub fn doubling_scan(
    field: &ScalarField,
    lambda: f64,
    eps0: f64,
    max_centers: usize,
    seed: u64,
) -> Result<DoublingScan> {
    let h = field.grid().spacing();
    let radius = wavelength_radius(lambda, eps0);
    if !(radius >= 8.0 * h) {
        return Err(Error::Resolution(format!(
            "wavelength radius {radius:.4e} is below 8h = {:.4e}",
            8.0 * h
        )));
    }
    let centers = subsample(&nodal_centers(field)?, max_centers, seed);
    let results: Vec<Option<DoublingRecord>> = centers
        .par_iter()
        .map(|c| {
            let ball = match wavelength_rescale(field, c, lambda, eps0) {
                Ok(b) => b,
                Err(Error::OutOfDomain(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            let g = growth_exponent(&ball.field, 0.5)?;
            let (positivity, ratio) = match verify_positivity_bound(&ball.field, 0.5) {
                Ok(p) => (p.lhs, Some(p.ratio)),
                Err(Error::Precondition(_)) => {
                    let u = ball.field.grid();
                    let pos = (0..u.len())
                        .filter(|&i| u.is_inside(i) && ball.field.value(i) > 0.0)
                        .count();
                    (pos as f64 / u.inside_count() as f64, None)
                }
                Err(e) => return Err(e),
            };
            Ok(Some(DoublingRecord {
                center: *c,
                beta: g.beta,
                beta_plus: g.beta_plus,
                positivity,
                ratio,
            }))
        })
        .collect::<Result<_>>()?;
    let skipped = results.iter().filter(|r| r.is_none()).count();
    let records: Vec<DoublingRecord> = results.into_iter().flatten().collect();
    let beta_distribution = Distribution::from_values(records.iter().map(|r| r.beta));
    let min_ratio = records
        .iter()
        .filter_map(|r| r.ratio)
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
    Ok(DoublingScan {
        lambda,
        radius,
        max_beta: beta_distribution.map(|d| d.max),
        beta_distribution,
        min_ratio,
        records,
        skipped,
    })
}

/// Fraction of the ball occupied by one nodal component. The component
/// must meet the concentric ball of half the radius.
pub fn component_ball_ratio(
    decomp: &NodalDecomposition,
    component_id: usize,
    center: &[f64],
    radius: f64,
) -> Result<f64> {
    decomp.component(component_id)?;
    let grid = decomp.grid();
    let labels = decomp.labels();
    let id = component_id as u32;
    let mut meets = false;
    grid.for_each_in_ball(center, 0.5 * radius, |i, _| meets |= labels[i] == id)?;
    if !meets {
        return Err(Error::Precondition(format!(
            "component {component_id} does not meet the half ball"
        )));
    }
    Ok(fraction_in_ball(grid, |i| labels[i] == id, center, radius)?.fraction)
}
