use std::sync::Arc;

use serde::Serialize;

use super::growth::CENTER_ZERO_TOL;
use crate::domain::{CoefficientField, ScalarField};
use crate::eigen::assemble_operator;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct DiagnosticOptions {
    /// Largest accepted `max |L₀φ - ε₀qφ| / max |φ|` on fully interior nodes.
    pub residual_tol: f64,
    /// Radii of the interior balls probed for the boundary maximum.
    pub ball_radii: Vec<f64>,
    /// Radii `(r₁, r₂)` of the negative and positive suprema.
    pub mean_value_radii: (f64, f64),
}

impl Default for DiagnosticOptions {
    fn default() -> Self {
        Self {
            residual_tol: 1e-2,
            ball_radii: vec![0.25, 0.5],
            mean_value_radii: (0.25, 0.5),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EllipticReport {
    pub residual: f64,
    /// Smallest `sup_{∂B} φ⁺ / sup_B φ` over probed balls with `sup_B φ > 0`.
    pub max_principle_ratio: Option<f64>,
    pub balls: usize,
    /// Set when the ratio drops below 0.9 with `ε₀ <= 0.1`.
    pub flagged: bool,
    /// `sup_{B_{r₁}} φ⁻ / sup_{B_{r₂}} φ⁺`, when `φ(0) ≈ 0`.
    pub mean_value_ratio: Option<f64>,
}

/// Boundary-maximum and mean-value checks for a solution of
/// `L₀φ = ε₀ q φ` on the unit ball.
pub fn elliptic_diagnostics(
    unit_ball_field: &ScalarField,
    coeffs: &CoefficientField,
    opts: &DiagnosticOptions,
) -> Result<EllipticReport> {
    let grid: Arc<_> = unit_ball_field.grid_arc().clone();
    let dim = grid.dim();
    let h = grid.spacing();
    let scale = unit_ball_field.max_abs();
    if scale == 0.0 {
        return Err(Error::DegenerateRegion("field vanishes on the ball".into()));
    }
    // Residual on nodes whose whole 3^n neighborhood lies inside.
    let op = assemble_operator(&grid, Some(coeffs))?;
    let lphi = op.apply_field(unit_ball_field);
    let mut residual = 0.0f64;
    for (d, &p) in op.dofs().iter().enumerate() {
        let c = grid.coords(p);
        let mut interior = true;
        for code in 0..3usize.pow(dim as u32) {
            let mut off = [0isize; 3];
            let mut t = code;
            for o in off.iter_mut().take(dim) {
                *o = (t % 3) as isize - 1;
                t /= 3;
            }
            if !grid.offset(c, off).is_some_and(|q| grid.is_inside(q)) {
                interior = false;
                break;
            }
        }
        if interior {
            let r = lphi[d] - coeffs.eps0() * coeffs.q(p) * unit_ball_field.value(p);
            residual = residual.max(r.abs() / scale);
        }
    }
    if !(residual <= opts.residual_tol) {
        return Err(Error::Precondition(format!(
            "field does not solve the equation (residual {residual:e})"
        )));
    }
    let mut worst: Option<f64> = None;
    let mut balls = 0;
    for &rho in &opts.ball_radii {
        if !(rho > 2.0 * h && rho < 1.0) {
            continue;
        }
        let off = 0.5 * (1.0 - rho);
        let mut centers = vec![[0.0; 3]];
        for k in 0..dim {
            for s in [-1.0, 1.0] {
                let mut c = [0.0; 3];
                c[k] = s * off;
                centers.push(c);
            }
        }
        for c in centers {
            let mut sup = f64::NEG_INFINITY;
            let mut shell = 0.0f64;
            let inner = (rho - h) * (rho - h);
            grid.for_each_in_ball(&c[..dim], rho, |i, d2| {
                if grid.is_inside(i) {
                    let v = unit_ball_field.value(i);
                    sup = sup.max(v);
                    if d2 > inner {
                        shell = shell.max(v.max(0.0));
                    }
                }
            })?;
            if sup > 0.0 {
                balls += 1;
                let ratio = shell / sup;
                worst = Some(worst.map_or(ratio, |w: f64| w.min(ratio)));
            }
        }
    }
    let flagged = coeffs.eps0() <= 0.1 && worst.is_some_and(|w| w < 0.9);
    let origin = vec![0.0; dim];
    let centered = unit_ball_field
        .interpolate(&origin)
        .is_some_and(|v| v.abs() <= CENTER_ZERO_TOL * scale);
    let mean_value_ratio = if centered {
        let (r1, r2) = opts.mean_value_radii;
        let mut neg = 0.0f64;
        let mut pos = 0.0f64;
        grid.for_each_in_ball(&origin, r1.max(r2), |i, d2| {
            if grid.is_inside(i) {
                let v = unit_ball_field.value(i);
                if d2 <= r1 * r1 * (1.0 + 1e-12) {
                    neg = neg.max(-v);
                }
                if d2 <= r2 * r2 * (1.0 + 1e-12) {
                    pos = pos.max(v);
                }
            }
        })?;
        (pos > 0.0).then(|| neg.max(0.0) / pos)
    } else {
        None
    };
    Ok(EllipticReport {
        residual,
        max_principle_ratio: worst,
        balls,
        flagged,
        mean_value_ratio,
    })
}
