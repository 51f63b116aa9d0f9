use std::sync::Arc;

use nalgebra::DMatrix;

use super::Grid;
use crate::error::{Error, Result};

/// Bounds a coefficient field must satisfy: `‖a‖_{C¹} <= k3`,
/// `0 <= q <= k4` and `a ξ·ξ >= k5 |ξ|²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoefficientBounds {
    pub k3: f64,
    pub k4: f64,
    pub k5: f64,
}

impl Default for CoefficientBounds {
    fn default() -> Self {
        Self {
            k3: 4.0,
            k4: 4.0,
            k5: 0.25,
        }
    }
}

/// Symmetric matrix field `a^{ij}`, potential weight `q` and the small
/// parameter `eps0` of the rescaled operator `-∂_i(a^{ij}∂_j u) - eps0 q u`.
#[derive(Clone, Debug)]
pub struct CoefficientField {
    grid: Arc<Grid>,
    /// Row-major `dim × dim` block per node.
    aij: Vec<f64>,
    q: Vec<f64>,
    eps0: f64,
    bounds: CoefficientBounds,
}

impl CoefficientField {
    /// Validated constructor.
    pub fn new(
        grid: Arc<Grid>,
        aij: Vec<f64>,
        q: Vec<f64>,
        eps0: f64,
        bounds: CoefficientBounds,
    ) -> Result<Self> {
        let c = Self::from_parts(grid, aij, q, eps0, bounds)?;
        c.validate()?;
        Ok(c)
    }

    /// Stores the parts after a shape check only; see [`validate`](Self::validate).
    pub fn from_parts(
        grid: Arc<Grid>,
        aij: Vec<f64>,
        q: Vec<f64>,
        eps0: f64,
        bounds: CoefficientBounds,
    ) -> Result<Self> {
        let d = grid.dim();
        if aij.len() != grid.len() * d * d || q.len() != grid.len() {
            return Err(Error::IllPosedOperator(
                "coefficient arrays do not match the grid".into(),
            ));
        }
        Ok(Self {
            grid,
            aij,
            q,
            eps0,
            bounds,
        })
    }

    /// Identity metric, unit weight.
    pub fn flat(grid: Arc<Grid>, eps0: f64) -> Self {
        let d = grid.dim();
        let mut block = vec![0.0; d * d];
        for k in 0..d {
            block[k * d + k] = 1.0;
        }
        let n = grid.len();
        let aij = block.iter().cloned().cycle().take(n * d * d).collect();
        Self {
            grid,
            aij,
            q: vec![1.0; n],
            eps0,
            bounds: CoefficientBounds::default(),
        }
    }

    /// Builds the fields from per-node closures.
    pub fn from_fn(
        grid: Arc<Grid>,
        a: impl Fn(&super::Point) -> Vec<f64>,
        q: impl Fn(&super::Point) -> f64,
        eps0: f64,
        bounds: CoefficientBounds,
    ) -> Result<Self> {
        let mut aij = Vec::with_capacity(grid.len() * grid.dim() * grid.dim());
        let mut qs = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let x = grid.position(i);
            aij.extend(a(&x));
            qs.push(q(&x));
        }
        Self::new(grid, aij, qs, eps0, bounds)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn eps0(&self) -> f64 {
        self.eps0
    }
    pub fn bounds(&self) -> CoefficientBounds {
        self.bounds
    }
    pub fn q(&self, idx: usize) -> f64 {
        self.q[idx]
    }

    #[inline]
    pub fn a(&self, idx: usize, i: usize, j: usize) -> f64 {
        let d = self.grid.dim();
        self.aij[idx * d * d + i * d + j]
    }

    pub fn is_flat(&self) -> bool {
        let d = self.grid.dim();
        self.aij
            .chunks(d * d)
            .all(|b| (0..d).all(|i| (0..d).all(|j| b[i * d + j] == if i == j { 1.0 } else { 0.0 })))
    }

    /// `max |a| + max |∇a|` with one-sided differences between neighbors.
    pub fn c1_norm(&self) -> f64 {
        let g = &*self.grid;
        let d = g.dim();
        let h = g.spacing();
        let mut sup = 0.0f64;
        let mut lip = 0.0f64;
        for p in 0..g.len() {
            for i in 0..d {
                for j in 0..d {
                    let v = self.a(p, i, j);
                    sup = sup.max(v.abs());
                    for axis in 0..d {
                        if let Some(n) = g.neighbor(p, axis, 1) {
                            lip = lip.max(((self.a(n, i, j) - v) / h).abs());
                        }
                    }
                }
            }
        }
        sup + lip
    }

    /// Smallest eigenvalue of `a` over all nodes.
    pub fn min_ellipticity(&self) -> f64 {
        let d = self.grid.dim();
        let mut worst = f64::INFINITY;
        for block in self.aij.chunks(d * d) {
            let m = DMatrix::from_row_slice(d, d, block);
            let e = m.symmetric_eigenvalues().min();
            worst = worst.min(e);
        }
        worst
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.grid.dim();
        let b = self.bounds;
        if !(self.eps0.is_finite() && self.eps0 >= 0.0) {
            return Err(Error::IllPosedOperator(format!(
                "eps0 = {} must be finite and >= 0",
                self.eps0
            )));
        }
        for (p, block) in self.aij.chunks(d * d).enumerate() {
            for i in 0..d {
                for j in 0..d {
                    let v = block[i * d + j];
                    if !v.is_finite() || (v - block[j * d + i]).abs() > 1e-12 * v.abs().max(1.0) {
                        return Err(Error::IllPosedOperator(format!(
                            "a^ij not symmetric at node {p}"
                        )));
                    }
                }
            }
        }
        if let Some((p, q)) = self
            .q
            .iter()
            .enumerate()
            .find(|(_, &q)| !(0.0..=b.k4).contains(&q))
        {
            return Err(Error::IllPosedOperator(format!(
                "q = {q} at node {p} outside [0, {}]",
                b.k4
            )));
        }
        let ell = self.min_ellipticity();
        if ell < b.k5 {
            return Err(Error::IllPosedOperator(format!(
                "ellipticity {ell} below K5 = {}",
                b.k5
            )));
        }
        let c1 = self.c1_norm();
        if c1 > b.k3 {
            return Err(Error::IllPosedOperator(format!(
                "C1 norm {c1} exceeds K3 = {}",
                b.k3
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_grid, DomainSpec};

    fn grid() -> Arc<Grid> {
        Arc::new(build_grid(&DomainSpec::rectangle(&[1.0, 1.0]), 16).unwrap())
    }

    #[test]
    fn flat_passes() {
        let c = CoefficientField::flat(grid(), 1.0);
        assert!(c.validate().is_ok());
        assert!(c.is_flat());
        assert!((c.c1_norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn smooth_perturbation_passes() {
        let c = CoefficientField::from_fn(
            grid(),
            |x| {
                let s = 0.1 * (x[0] + x[1]).sin();
                vec![1.0 + s, 0.05, 0.05, 1.0 - s]
            },
            |_| 1.0,
            0.1,
            CoefficientBounds::default(),
        );
        assert!(c.is_ok());
    }

    #[test]
    fn degenerate_node_rejected() {
        let g = grid();
        let mut a = CoefficientField::flat(g.clone(), 1.0).aij;
        a[40 * 4] = 0.01;
        let c = CoefficientField::new(g, a, vec![1.0; 17 * 17], 1.0, CoefficientBounds::default());
        assert!(matches!(c, Err(Error::IllPosedOperator(_))));
    }

    #[test]
    fn negative_potential_rejected() {
        let g = grid();
        let n = g.len();
        let c = CoefficientField::flat(g.clone(), 1.0);
        let mut q = vec![1.0; n];
        q[3] = -0.1;
        assert!(CoefficientField::new(g, c.aij, q, 1.0, CoefficientBounds::default()).is_err());
    }

    #[test]
    fn steep_coefficients_rejected() {
        let c = CoefficientField::from_fn(
            grid(),
            |x| vec![1.0 + 0.5 * (40.0 * x[0]).sin(), 0.0, 0.0, 1.0],
            |_| 1.0,
            0.1,
            CoefficientBounds::default(),
        );
        assert!(c.is_err());
    }
}
