use serde::Serialize;

use crate::domain::ScalarField;
use crate::error::{Error, Result};
use crate::nodal::positivity_volume_in_ball;

/// Relative size of `|φ(0)|` accepted as a zero at the ball center.
pub const CENTER_ZERO_TOL: f64 = 1e-8;

/// Growth of a unit-ball field between radius `r` and 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthExponent {
    pub r: f64,
    /// `log(sup_{B₁} φ / sup_{B_r} φ)`; `None` when `sup_{B_r} φ <= 0`.
    pub beta_plus: Option<f64>,
    /// `log(sup_{B₁} |φ| / sup_{B_r} |φ|)`.
    pub beta: f64,
    /// `max(beta, 3)`.
    pub clamped: f64,
}

impl GrowthExponent {
    /// `max(beta_plus, 3)` when defined.
    pub fn clamped_plus(&self) -> Option<f64> {
        self.beta_plus.map(clamp_growth)
    }
}

pub fn clamp_growth(beta: f64) -> f64 {
    beta.max(3.0)
}

fn check_unit_ball(field: &ScalarField) -> Result<()> {
    let g = field.grid();
    let ok = (0..g.len())
        .filter(|&i| g.is_inside(i))
        .all(|i| g.position(i).iter().map(|x| x * x).sum::<f64>() <= 1.0 + 1e-9);
    if !ok || g.inside_count() == 0 {
        return Err(Error::Precondition(
            "field is not defined on the unit ball".into(),
        ));
    }
    Ok(())
}

/// Signed and absolute suprema over inside nodes with `|x| <= r`.
fn suprema(field: &ScalarField, r: f64) -> (f64, f64) {
    let g = field.grid();
    let r2 = r * r * (1.0 + 1e-12);
    let mut sup = f64::NEG_INFINITY;
    let mut sup_abs = 0.0f64;
    for i in 0..g.len() {
        if !g.is_inside(i) || g.position(i).iter().map(|x| x * x).sum::<f64>() > r2 {
            continue;
        }
        let v = field.value(i);
        sup = sup.max(v);
        sup_abs = sup_abs.max(v.abs());
    }
    (sup, sup_abs)
}

/// Growth exponents of a field on the unit ball from discrete node suprema.
pub fn growth_exponent(unit_ball_field: &ScalarField, r: f64) -> Result<GrowthExponent> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Precondition(format!("r = {r} must lie in (0, 1)")));
    }
    check_unit_ball(unit_ball_field)?;
    let (s1, a1) = suprema(unit_ball_field, 1.0);
    let (sr, ar) = suprema(unit_ball_field, r);
    if ar == 0.0 {
        return Err(Error::DegenerateRegion(format!(
            "field vanishes on the ball of radius {r}"
        )));
    }
    let beta = (a1 / ar).ln();
    let beta_plus = (sr > 0.0).then(|| (s1 / sr).ln());
    Ok(GrowthExponent {
        r,
        beta_plus,
        beta,
        clamped: clamp_growth(beta),
    })
}

/// Positivity volume against the growth of a field vanishing at the center.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PositivityBound {
    /// `Vol({φ > 0} ∩ B₁) / Vol(B₁)`.
    pub lhs: f64,
    pub growth: GrowthExponent,
    /// `1 / max(β⁺_r, 3)^{n-1}`.
    pub rhs_shape: f64,
    /// `lhs / rhs_shape`.
    pub ratio: f64,
    /// Same with the absolute exponent `β_r`.
    pub ratio_abs: f64,
}

/// Measures the positivity fraction of the unit ball against `⟨β⁺_r⟩^{n-1}`.
pub fn verify_positivity_bound(unit_ball_field: &ScalarField, r: f64) -> Result<PositivityBound> {
    let growth = growth_exponent(unit_ball_field, r)?;
    let g = unit_ball_field.grid();
    let origin = vec![0.0; g.dim()];
    let v0 = unit_ball_field
        .interpolate(&origin)
        .ok_or_else(|| Error::Precondition("ball center is off the lattice".into()))?;
    if v0.abs() > CENTER_ZERO_TOL * unit_ball_field.max_abs() {
        return Err(Error::Precondition(format!(
            "field does not vanish at the center (value {v0:e})"
        )));
    }
    let beta_plus = growth.clamped_plus().ok_or_else(|| {
        Error::Precondition(format!("field is nonpositive on the ball of radius {r}"))
    })?;
    let inside = g.inside_count();
    let pos = (0..g.len())
        .filter(|&i| g.is_inside(i) && unit_ball_field.value(i) > 0.0)
        .count();
    let lhs = pos as f64 / inside as f64;
    let e = g.dim() as i32 - 1;
    let rhs_shape = 1.0 / beta_plus.powi(e);
    Ok(PositivityBound {
        lhs,
        growth,
        rhs_shape,
        ratio: lhs / rhs_shape,
        ratio_abs: lhs * growth.clamped.powi(e),
    })
}

/// Sup ratio and positivity fraction on a ball where the field is positive
/// at the center.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthPositivity {
    /// `sup_B φ / φ(x₀)`.
    pub gamma: f64,
    pub pos_frac: f64,
    /// `pos_frac · gamma`.
    pub product_bound: f64,
}

pub fn check_growth_positivity(
    field: &ScalarField,
    x0: &[f64],
    r: f64,
) -> Result<GrowthPositivity> {
    let g = field.grid();
    let v0 = field
        .interpolate(x0)
        .ok_or_else(|| Error::OutOfDomain(format!("{x0:?} is off the lattice")))?;
    if !(v0 > 0.0) {
        return Err(Error::Precondition(format!(
            "field is not positive at the center (value {v0:e})"
        )));
    }
    let mut sup = f64::NEG_INFINITY;
    let mut outside = false;
    let clipped = g.for_each_in_ball(x0, r, |i, _| {
        outside |= !g.is_inside(i);
        sup = sup.max(field.value(i));
    })?;
    if clipped || outside {
        return Err(Error::OutOfDomain(format!(
            "ball of radius {r} around {x0:?} leaves the domain"
        )));
    }
    let gamma = sup.max(v0) / v0;
    let pos_frac = positivity_volume_in_ball(field, x0, r)?.pos_frac;
    Ok(GrowthPositivity {
        gamma,
        pos_frac,
        product_bound: pos_frac * gamma,
    })
}
