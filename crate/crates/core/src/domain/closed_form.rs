use std::f64::consts::PI;
use std::sync::Arc;

use super::{bessel_j, bessel_zero, DomainKind, DomainSpec, Grid, ScalarField};
use crate::error::{Error, Result};

/// Exact eigenvalue and eigenfunction of `-Δ` for domains with separable
/// or radial modes.
///
/// Mode conventions:
/// * rectangle `(m_1, .., m_n)`, all `>= 1`: `Π sin(m_k π x_k / L_k)`;
/// * torus `(k_1, .., k_n)`: per axis `sin(k ω x)` for `k > 0`, `cos(|k| ω x)`
///   for `k < 0` and `1` for `k = 0`, with `ω = 2π/L`;
/// * disk `(k, j)`, `j >= 1`: `J_|k|(j_{|k|,j} r / R)` times `cos(kθ)` for
///   `k >= 0` or `sin(|k|θ)` for `k < 0`.
pub fn sample_closed_form(
    spec: &DomainSpec,
    mode: &[i64],
    grid: &Arc<Grid>,
) -> Result<(f64, ScalarField)> {
    spec.validate()?;
    let n = spec.dimension();
    if grid.dim() != n {
        return Err(Error::InvalidDomain(
            "grid and domain dimensions differ".into(),
        ));
    }
    let origin = spec.origin();
    match spec.kind {
        DomainKind::Rectangle => {
            if mode.len() != n || mode.iter().any(|&m| m < 1) {
                return Err(Error::UnsupportedMode(format!(
                    "rectangle mode {mode:?} needs {n} indices >= 1"
                )));
            }
            let freq: Vec<f64> = (0..n).map(|k| mode[k] as f64 * PI / spec.dims[k]).collect();
            let lambda = freq.iter().map(|w| w * w).sum();
            let field = ScalarField::from_fn(grid.clone(), |x| {
                (0..n)
                    .map(|k| (freq[k] * (x[k] - origin[k])).sin())
                    .product()
            })?;
            Ok((lambda, field))
        }
        DomainKind::Torus => {
            if mode.len() != n {
                return Err(Error::UnsupportedMode(format!(
                    "torus mode {mode:?} needs {n} indices"
                )));
            }
            let freq: Vec<f64> = (0..n)
                .map(|k| mode[k].unsigned_abs() as f64 * 2.0 * PI / spec.dims[k])
                .collect();
            let lambda = freq.iter().map(|w| w * w).sum();
            let shape = grid.shape().to_vec();
            // Evaluate with the lattice index reduced modulo the period so
            // the identified seam carries bit-identical values.
            let values = (0..grid.len())
                .map(|i| {
                    let c = grid.coords(i);
                    (0..n)
                        .map(|k| {
                            let t = freq[k] * grid.spacing() * (c[k] % shape[k]) as f64
                                + freq[k] * (grid.origin()[k] - origin[k]);
                            match mode[k].signum() {
                                1 => t.sin(),
                                -1 => t.cos(),
                                _ => 1.0,
                            }
                        })
                        .product()
                })
                .collect();
            Ok((lambda, ScalarField::new(grid.clone(), values)?))
        }
        DomainKind::Disk => {
            if n != 2 || mode.len() != 2 || mode[1] < 1 {
                return Err(Error::UnsupportedMode(format!(
                    "disk mode {mode:?} must be (k, j>=1) in 2D"
                )));
            }
            let order = mode[0].unsigned_abs() as u32;
            let zero = bessel_zero(order, mode[1] as u32)?;
            let r0 = spec.radius;
            let lambda = (zero / r0).powi(2);
            let k = mode[0];
            let field = ScalarField::from_fn(grid.clone(), |x| {
                let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                let th = x[1].atan2(x[0]);
                let ang = if k >= 0 {
                    (k as f64 * th).cos()
                } else {
                    ((-k) as f64 * th).sin()
                };
                bessel_j(order, zero * r / r0) * ang
            })?;
            Ok((lambda, field))
        }
        DomainKind::Stadium | DomainKind::Masked => Err(Error::UnsupportedMode(format!(
            "{:?} has no closed-form modes",
            spec.kind
        ))),
    }
}
