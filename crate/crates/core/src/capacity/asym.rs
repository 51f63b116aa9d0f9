use rayon::prelude::*;
use serde::Serialize;

use crate::asymmetry::subsample;
use crate::domain::{Grid, Point};
use crate::eigen::dirichlet_ground_value;
use crate::error::{Error, Result};
use crate::nodal::{distance_transform, UnionFind};

/// Smallest complement fraction found over probed balls.
#[derive(Clone, Debug, Serialize)]
pub struct AlphaEstimate {
    pub alpha: f64,
    pub probes: usize,
    pub worst_center: Point,
    pub worst_radius: f64,
}

/// Estimates the asymmetry constant `α` of `omega`: the smallest
/// `Vol(B \ Ω) / Vol(B)` over balls whose concentric half ball meets the
/// complement. Lattice positions beyond non-periodic faces belong to the
/// complement.
///
/// For each radius the probe centers are the nodes of `Ω` whose distance
/// to the complement lies in `(r/2 - h, r/2]`, where the fraction is
/// smallest.
pub fn asym_alpha(
    grid: &Grid,
    omega: &[bool],
    radii: &[f64],
    max_centers: usize,
    seed: u64,
) -> Result<AlphaEstimate> {
    if omega.len() != grid.len() {
        return Err(Error::InvalidDomain(
            "mask length does not match grid".into(),
        ));
    }
    let h = grid.spacing();
    let has_edge = (0..grid.dim()).any(|k| !grid.periodic3()[k]);
    if omega.iter().all(|&b| b) && !has_edge {
        return Err(Error::UndefinedAlpha);
    }
    if !omega.iter().any(|&b| b) {
        return Err(Error::EmptyDomain);
    }
    let dist = distance_transform(omega, grid)?;
    let mut probes: Vec<(Point, f64)> = Vec::new();
    for &r in radii {
        if !(r >= 2.0 * h) {
            return Err(Error::UnderResolvedBall {
                radius: r,
                min: 2.0 * h,
            });
        }
        let band: Vec<usize> = (0..grid.len())
            .filter(|&i| {
                omega[i] && dist.value(i) <= 0.5 * r + 1e-12 && dist.value(i) > 0.5 * r - h
            })
            .collect();
        probes.extend(
            subsample(&band, max_centers, seed)
                .into_iter()
                .map(|i| (grid.position(i), r)),
        );
    }
    if probes.is_empty() {
        return Err(Error::Precondition(
            "no ball of the given radii meets the complement in its half ball".into(),
        ));
    }
    let fractions: Vec<f64> = probes
        .par_iter()
        .map(|(c, r)| {
            let mut total = 0usize;
            let mut out = 0usize;
            grid.for_each_lattice_point_in_ball(&c[..grid.dim()], *r, |i, _| {
                total += 1;
                if !i.is_some_and(|i| omega[i]) {
                    out += 1;
                }
            })?;
            Ok(out as f64 / total as f64)
        })
        .collect::<Result<_>>()?;
    let (k, &alpha) = fractions
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    Ok(AlphaEstimate {
        alpha,
        probes: probes.len(),
        worst_center: probes[k].0,
        worst_radius: probes[k].1,
    })
}

/// Largest distance from a node of `omega` to its complement.
pub fn mask_inradius(grid: &Grid, omega: &[bool]) -> Result<f64> {
    Ok(distance_transform(omega, grid)?.max_abs())
}

/// First eigenvalue against asymmetry and inner radius in three dimensions.
#[derive(Clone, Debug, Serialize)]
pub struct AlphaInradiusCheck {
    pub alpha: f64,
    pub inradius: f64,
    pub lambda1: f64,
    /// `α^{1-2/n} / inrad²`.
    pub bound: f64,
    /// `λ₁ / bound`.
    pub slack: f64,
}

/// Compares `λ₁(Ω)` with `α^{1/3} / inrad(Ω)²`. Pass `None` for `lambda1`
/// to compute it on the mask.
pub fn verify_alpha_inradius_bound(
    grid: &Grid,
    omega: &[bool],
    lambda1: Option<f64>,
    radii: &[f64],
    max_centers: usize,
    seed: u64,
) -> Result<AlphaInradiusCheck> {
    let n = grid.dim();
    if n != 3 {
        return Err(Error::UnsupportedDimension(n));
    }
    let alpha = asym_alpha(grid, omega, radii, max_centers, seed)?.alpha;
    let inradius = mask_inradius(grid, omega)?;
    let lambda1 = match lambda1 {
        Some(l) => l,
        None => {
            let g = std::sync::Arc::new(grid.clone());
            let sub: Vec<bool> = omega
                .iter()
                .zip(grid.inside())
                .map(|(&a, &b)| a && b)
                .collect();
            dirichlet_ground_value(&g, &sub)?
        }
    };
    let bound = alpha.powf(1.0 - 2.0 / n as f64) / (inradius * inradius);
    Ok(AlphaInradiusCheck {
        alpha,
        inradius,
        lambda1,
        bound,
        slack: lambda1 / bound,
    })
}

/// First eigenvalue against inner radius when every complement component
/// has area at least `A`.
#[derive(Clone, Debug, Serialize)]
pub struct PlanarAreaCheck {
    pub lambda1: f64,
    pub inradius: f64,
    /// Smallest measured area of a complement component.
    pub min_component_area: f64,
    /// `min(√A, inrad) / inrad³`.
    pub rhs_shape: f64,
    /// `λ₁ / rhs_shape`.
    pub fitted_constant: f64,
}

/// Areas of the face-connected components of the lattice complement of
/// `omega`. Components reaching a non-periodic edge of the lattice extend
/// to infinity and get infinite area.
pub fn complement_areas(grid: &Grid, omega: &[bool]) -> Vec<f64> {
    let n = grid.len();
    let mut uf = UnionFind::new(n);
    for p in (0..n).filter(|&p| !omega[p]) {
        for k in 0..grid.dim() {
            if let Some(q) = grid.neighbor(p, k, 1) {
                if !omega[q] {
                    uf.union(p, q);
                }
            }
        }
    }
    let mut area = std::collections::BTreeMap::new();
    for p in (0..n).filter(|&p| !omega[p]) {
        let open = (0..grid.dim())
            .any(|k| grid.neighbor(p, k, 1).is_none() || grid.neighbor(p, k, -1).is_none());
        let e = area.entry(uf.find(p)).or_insert((0usize, false));
        e.0 += 1;
        e.1 |= open;
    }
    area.values()
        .map(|&(c, open)| {
            if open {
                f64::INFINITY
            } else {
                c as f64 * grid.cell_volume()
            }
        })
        .collect()
}

pub fn verify_planar_area_bound(grid: &Grid, omega: &[bool], area: f64) -> Result<PlanarAreaCheck> {
    if grid.dim() != 2 {
        return Err(Error::UnsupportedDimension(grid.dim()));
    }
    if omega.len() != grid.len() {
        return Err(Error::InvalidDomain(
            "mask length does not match grid".into(),
        ));
    }
    let areas = complement_areas(grid, omega);
    let min_component_area = areas.iter().cloned().fold(f64::INFINITY, f64::min);
    if areas.is_empty() {
        return Err(Error::UndefinedAlpha);
    }
    if min_component_area < area {
        return Err(Error::Precondition(format!(
            "a complement component has area {min_component_area:.4e} below A = {area:.4e}"
        )));
    }
    let g = std::sync::Arc::new(grid.clone());
    let sub: Vec<bool> = omega
        .iter()
        .zip(grid.inside())
        .map(|(&a, &b)| a && b)
        .collect();
    let lambda1 = dirichlet_ground_value(&g, &sub)?;
    let inradius = mask_inradius(grid, omega)?;
    let rhs_shape = area.sqrt().min(inradius) / inradius.powi(3);
    Ok(PlanarAreaCheck {
        lambda1,
        inradius,
        min_component_area,
        rhs_shape,
        fitted_constant: lambda1 / rhs_shape,
    })
}
