use std::sync::Arc;

use super::{CoefficientField, Grid, Point, ScalarField};
use crate::error::{Error, Result};

/// Wavelength-scale radius `sqrt(eps0 / lambda)`.
pub fn wavelength_radius(lambda: f64, eps0: f64) -> f64 {
    (eps0 / lambda).sqrt()
}

/// A field pulled back to the unit ball by `x ↦ center + r x`.
#[derive(Clone, Debug)]
pub struct RescaledBall {
    pub field: ScalarField,
    pub coeffs: CoefficientField,
    pub radius: f64,
    pub center: Point,
}

/// Resamples `field` on the ball of radius `sqrt(eps0/lambda)` around
/// `center` as a function on the closed unit ball.
///
/// The unit lattice spacing is `h / r`, so every unit node maps to a point
/// with the same fractional offset from the source lattice as `center`.
/// For a flat source metric the rescaled coefficients are `a = I`, `q = 1`,
/// and the potential term is `eps0 q`.
pub fn wavelength_rescale(
    field: &ScalarField,
    center: &[f64],
    lambda: f64,
    eps0: f64,
) -> Result<RescaledBall> {
    if !(lambda > 0.0 && eps0 > 0.0) {
        return Err(Error::Precondition(
            "lambda and eps0 must be positive".into(),
        ));
    }
    let src = field.grid();
    let n = src.dim();
    let r = wavelength_radius(lambda, eps0);
    let mut c = [0.0; 3];
    c[..n].copy_from_slice(&center[..n]);
    // Every source node within the ball must belong to the domain.
    let mut outside = 0usize;
    let clipped = src
        .for_each_in_ball(&c[..n], r, |i, _| {
            if !src.is_inside(i) {
                outside += 1;
            }
        })
        .map_err(|e| Error::OutOfDomain(e.to_string()))?;
    if clipped || outside > 0 || !src.covers(&c[..n]) {
        return Err(Error::OutOfDomain(format!(
            "ball of radius {r:.4e} around {:?} leaves the domain",
            &c[..n]
        )));
    }
    let unit = Arc::new(Grid::unit_ball(n, src.spacing() / r)?);
    let mut values = vec![0.0; unit.len()];
    for (i, v) in values.iter_mut().enumerate() {
        if !unit.is_inside(i) {
            continue;
        }
        let x = unit.position(i);
        let mut y = [0.0; 3];
        for k in 0..n {
            y[k] = c[k] + r * x[k];
        }
        *v = field
            .interpolate(&y[..n])
            .ok_or_else(|| Error::OutOfDomain("sample point off the lattice".into()))?;
    }
    let field = ScalarField::new(unit.clone(), values)?;
    let coeffs = CoefficientField::flat(unit, eps0);
    Ok(RescaledBall {
        field,
        coeffs,
        radius: r,
        center: c,
    })
}
