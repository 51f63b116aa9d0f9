use serde::Serialize;

use crate::domain::{Grid, ScalarField};
use crate::error::{Error, Result};

/// Sign fractions of a field over the lattice nodes of a ball. Nodes
/// outside the mask hold zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BallFractions {
    pub pos_frac: f64,
    pub neg_frac: f64,
    pub nodal_frac: f64,
    pub nodes: usize,
    /// The ball leaves the lattice or contains nodes outside the mask.
    pub clipped: bool,
}

/// Fraction of a ball's nodes satisfying a predicate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BallShare {
    pub fraction: f64,
    pub nodes: usize,
    pub clipped: bool,
}

fn probe(
    grid: &Grid,
    center: &[f64],
    radius: f64,
    mut visit: impl FnMut(usize),
) -> Result<(usize, bool)> {
    let h = grid.spacing();
    if !(radius >= 2.0 * h) {
        return Err(Error::UnderResolvedBall {
            radius,
            min: 2.0 * h,
        });
    }
    if center.len() < grid.dim() || !grid.covers(center) {
        return Err(Error::OutOfDomain(format!(
            "ball center {center:?} is off the lattice"
        )));
    }
    let mut total = 0;
    let mut outside = false;
    let edge = grid.for_each_in_ball(center, radius, |i, _| {
        total += 1;
        outside |= !grid.is_inside(i);
        visit(i);
    })?;
    Ok((total, edge || outside))
}

/// Fractions of the ball where the field is positive and negative, by
/// counting lattice nodes within `radius` of `center`.
pub fn positivity_volume_in_ball(
    field: &ScalarField,
    center: &[f64],
    radius: f64,
) -> Result<BallFractions> {
    let (mut pos, mut neg) = (0usize, 0usize);
    let (total, clipped) = probe(field.grid(), center, radius, |i| {
        let v = field.value(i);
        if v > 0.0 {
            pos += 1;
        } else if v < 0.0 {
            neg += 1;
        }
    })?;
    let t = total as f64;
    Ok(BallFractions {
        pos_frac: pos as f64 / t,
        neg_frac: neg as f64 / t,
        nodal_frac: (total - pos - neg) as f64 / t,
        nodes: total,
        clipped,
    })
}

/// Fraction of the ball's lattice nodes for which `member` holds.
pub fn fraction_in_ball(
    grid: &Grid,
    member: impl Fn(usize) -> bool,
    center: &[f64],
    radius: f64,
) -> Result<BallShare> {
    let mut hits = 0usize;
    let (total, clipped) = probe(grid, center, radius, |i| hits += member(i) as usize)?;
    Ok(BallShare {
        fraction: hits as f64 / total as f64,
        nodes: total,
        clipped,
    })
}
