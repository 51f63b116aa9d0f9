use serde::Serialize;

use super::solve::capacity;
use crate::domain::{Grid, ScalarField};
use crate::error::{Error, Result};
use crate::nodal::{extract_nodal_domains, DEFAULT_ZERO_TOL};

/// Poincaré-type inequality on a cube against the capacity of the zero set.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MazyaCheck {
    /// `∫_Q u²`.
    pub lhs: f64,
    /// `aⁿ ∫_Q |∇u|² / cap₂(F, 2Q)`.
    pub rhs_over_cap: f64,
    pub capacity: f64,
    pub zero_nodes: usize,
    /// `lhs / rhs_over_cap`.
    pub fitted_constant: f64,
}

/// Lattice offset from `from` to `to` along each axis, taking the shortest
/// way around periodic axes.
fn offset(grid: &Grid, from: [usize; 3], to: [usize; 3]) -> [isize; 3] {
    let shape = grid.shape3();
    let periodic = grid.periodic3();
    let mut d = [0isize; 3];
    for k in 0..grid.dim() {
        let n = shape[k] as isize;
        let mut v = to[k] as isize - from[k] as isize;
        if periodic[k] {
            v = (v + n / 2).rem_euclid(n) - n / 2;
        }
        d[k] = v;
    }
    d
}

/// Compares `∫_Q u²` with `aⁿ ∫_Q |∇u|² / cap₂(F, 2Q)` where `Q` is the
/// cube of side `a` around the node nearest `center` and `F` the discrete
/// zero set of `u` in `Q`. The doubled cube is solved on its own lattice
/// with the same spacing.
pub fn check_mazya_poincare(u: &ScalarField, center: &[f64], side: f64) -> Result<MazyaCheck> {
    let g = u.grid();
    let dim = g.dim();
    let h = g.spacing();
    if !g.covers(center) {
        return Err(Error::OutOfDomain(format!(
            "cube center {center:?} is off the lattice"
        )));
    }
    let half = ((0.5 * side / h) + 1e-9).floor() as isize;
    if half < 1 {
        return Err(Error::Resolution(format!(
            "cube side {side} spans less than two cells"
        )));
    }
    let mut c = [0usize; 3];
    for k in 0..dim {
        let t = ((center[k] - g.origin()[k]) / h).round() as isize;
        c[k] = t.rem_euclid(g.shape3()[k] as isize) as usize;
    }
    let in_q = |p: usize| -> bool {
        let d = offset(g, c, g.coords(p));
        (0..dim).all(|k| d[k].abs() <= half)
    };
    for k in 0..dim {
        if !g.periodic3()[k]
            && (c[k] as isize - half < 0 || c[k] as isize + half >= g.shape3()[k] as isize)
        {
            return Err(Error::OutOfDomain("cube leaves the lattice".into()));
        }
    }
    let zeros = extract_nodal_domains(u, DEFAULT_ZERO_TOL)?;
    let mut lhs = 0.0;
    let mut grad = 0.0;
    for p in (0..g.len()).filter(|&p| in_q(p)) {
        let v = u.value(p);
        lhs += v * v;
        for k in 0..dim {
            if let Some(q) = g.neighbor(p, k, 1) {
                if in_q(q) {
                    let d = v - u.value(q);
                    grad += d * d;
                }
            }
        }
    }
    let w = g.cell_volume();
    let lhs = lhs * w;
    let grad = grad * w / (h * h);
    // Doubled cube on an aligned auxiliary lattice with one spare layer.
    let outer_half = 2 * half;
    let m = (2 * (outer_half + 1) + 1) as usize;
    let aux_shape = vec![m; dim];
    let aux_origin: Vec<f64> = (0..dim).map(|_| -((outer_half + 1) as f64) * h).collect();
    let aux = Grid::new(
        h,
        &aux_shape,
        &aux_origin,
        &vec![false; dim],
        vec![true; m.pow(dim as u32)],
    )?;
    let mid = (outer_half + 1) as usize;
    let mut f = vec![false; aux.len()];
    let mut zero_nodes = 0;
    for &p in zeros.nodal_cells() {
        if in_q(p) {
            let d = offset(g, c, g.coords(p));
            let mut a = [0usize; 3];
            for k in 0..dim {
                a[k] = (mid as isize + d[k]) as usize;
            }
            f[aux.index(a)] = true;
            zero_nodes += 1;
        }
    }
    if zero_nodes == 0 {
        return Err(Error::NoZeroSet);
    }
    let outer: Vec<bool> = (0..aux.len())
        .map(|i| {
            let a = aux.coords(i);
            (0..dim).all(|k| (a[k] as isize - mid as isize).abs() < outer_half)
        })
        .collect();
    let cap = capacity(&aux, &f, &outer)?;
    let a_len = 2.0 * half as f64 * h;
    let rhs_over_cap = a_len.powi(dim as i32) * grad / cap;
    Ok(MazyaCheck {
        lhs,
        rhs_over_cap,
        capacity: cap,
        zero_nodes,
        fitted_constant: lhs / rhs_over_cap,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Isocapacity {
    pub capacity: f64,
    pub volume: f64,
    /// `cap₂(F, outer) / Vol(F)^{1/3}`.
    pub ratio: f64,
}

/// Capacity of `f` against its volume to the power `(n-2)/n` in three dimensions.
pub fn check_isocapacity(grid: &Grid, f: &[bool], outer: &[bool]) -> Result<Isocapacity> {
    if grid.dim() != 3 {
        return Err(Error::UnsupportedDimension(grid.dim()));
    }
    let count = f.iter().filter(|&&b| b).count();
    if count == 0 {
        return Err(Error::Precondition("F is empty".into()));
    }
    let cap = capacity(grid, f, outer)?;
    let volume = count as f64 * grid.cell_volume();
    Ok(Isocapacity {
        capacity: cap,
        volume,
        ratio: cap / volume.cbrt(),
    })
}
