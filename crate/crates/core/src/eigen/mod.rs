//! Discrete divergence-form operators and their lowest eigenpairs.
//!
//! The operator `-∂_i(a^{ij} ∂_j u)` is discretized conservatively: axis
//! terms use arithmetic face averages of `a^{kk}`, mixed terms use the
//! symmetric corner stencil with node values of `a^{kl}`. With `a = I`
//! this is the `(2n+1)`-point Laplacian divided by `h²`. Unknowns are the
//! masked nodes; everything else is a homogeneous Dirichlet value, except
//! across periodic axes where the stencil wraps.

use std::sync::Arc;

use crate::domain::{CoefficientField, Grid, ScalarField};
use crate::error::{Error, Result};
use crate::linalg::{smallest_eigenpairs, Amg, CsrMatrix, EigenOptions};

pub const DEFAULT_TOL: f64 = 1e-8;

const NO_DOF: u32 = u32::MAX;

/// Symmetric sparse matrix of the divergence part acting on masked nodes.
#[derive(Clone, Debug)]
pub struct SparseOperator {
    matrix: CsrMatrix,
    grid: Arc<Grid>,
    dofs: Vec<usize>,
    mass: Option<Vec<f64>>,
}

impl SparseOperator {
    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }
    pub fn dimension(&self) -> usize {
        self.dofs.len()
    }
    /// Grid whose mask is exactly the set of unknowns.
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }
    /// Grid node of each unknown.
    pub fn dofs(&self) -> &[usize] {
        &self.dofs
    }
    /// Weight `q` of the generalized problem `L₀φ = λ q φ`, if not unit.
    pub fn mass(&self) -> Option<&[f64]> {
        self.mass.as_deref()
    }

    /// Applies the operator to a grid field (values outside the unknowns ignored).
    pub fn apply_field(&self, field: &ScalarField) -> Vec<f64> {
        let x: Vec<f64> = self.dofs.iter().map(|&i| field.value(i)).collect();
        self.matrix.apply(&x)
    }

    pub fn symmetry_defect(&self) -> f64 {
        self.matrix.symmetry_defect()
    }
}

/// Assembles the operator on the grid mask. `None` means flat coefficients.
pub fn assemble_operator(
    grid: &Arc<Grid>,
    coeffs: Option<&CoefficientField>,
) -> Result<SparseOperator> {
    assemble_on(grid, grid.inside(), coeffs)
}

/// Assembles the operator with unknowns restricted to `mask`.
pub fn assemble_on(
    grid: &Arc<Grid>,
    mask: &[bool],
    coeffs: Option<&CoefficientField>,
) -> Result<SparseOperator> {
    if mask.len() != grid.len() {
        return Err(Error::InvalidDomain(
            "mask length does not match grid".into(),
        ));
    }
    if let Some(c) = coeffs {
        if c.grid().shape() != grid.shape() || c.grid().spacing() != grid.spacing() {
            return Err(Error::IllPosedOperator(
                "coefficients live on a different lattice".into(),
            ));
        }
        c.validate()?;
    }
    let dim = grid.dim();
    let h2 = grid.spacing() * grid.spacing();
    let mut dof_of = vec![NO_DOF; grid.len()];
    let mut dofs = Vec::new();
    for (i, &m) in mask.iter().enumerate() {
        if m {
            dof_of[i] = dofs.len() as u32;
            dofs.push(i);
        }
    }
    if dofs.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let a = |p: usize, i: usize, j: usize| -> f64 {
        match coeffs {
            Some(c) => c.a(p, i, j),
            None => (i == j) as u8 as f64,
        }
    };
    let mixed = coeffs.map_or(false, |c| !c.is_flat());
    let mut trip = Vec::with_capacity(dofs.len() * (2 * dim + 1));
    for (row, &p) in dofs.iter().enumerate() {
        let mut diag = 0.0;
        for k in 0..dim {
            for dir in [-1isize, 1] {
                let q = grid.neighbor(p, k, dir);
                let face = match q {
                    Some(q) => 0.5 * (a(p, k, k) + a(q, k, k)),
                    None => a(p, k, k),
                } / h2;
                diag += face;
                if let Some(q) = q {
                    let col = dof_of[q];
                    if col != NO_DOF {
                        trip.push((row, col as usize, -face));
                    }
                }
            }
        }
        trip.push((row, row, diag));
        if mixed {
            let c = grid.coords(p);
            for k in 0..dim {
                for l in (k + 1)..dim {
                    for sk in [-1isize, 1] {
                        for sl in [-1isize, 1] {
                            let mut off = [0isize; 3];
                            off[k] = sk;
                            off[l] = sl;
                            let Some(corner) = grid.offset(c, off) else {
                                continue;
                            };
                            let col = dof_of[corner];
                            if col == NO_DOF {
                                continue;
                            }
                            let nk = grid.neighbor(p, k, sk).unwrap_or(p);
                            let nl = grid.neighbor(p, l, sl).unwrap_or(p);
                            let v = -(sk * sl) as f64 * (a(nk, k, l) + a(nl, k, l)) / (4.0 * h2);
                            trip.push((row, col as usize, v));
                        }
                    }
                }
            }
        }
    }
    let matrix = CsrMatrix::from_triplets(dofs.len(), dofs.len(), trip);
    let mass = coeffs.and_then(|c| {
        let q: Vec<f64> = dofs.iter().map(|&i| c.q(i)).collect();
        if q.iter().all(|&v| v == 1.0) {
            None
        } else {
            Some(q)
        }
    });
    let sub = Arc::new(grid.with_mask(mask.to_vec())?);
    Ok(SparseOperator {
        matrix,
        grid: sub,
        dofs,
        mass,
    })
}

/// An eigenvalue with its unit-norm eigenvector as a grid field.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub eigenvalue: f64,
    pub field: ScalarField,
    /// `‖Aφ - λφ‖₂ / ‖φ‖₂`.
    pub residual: f64,
}

/// Iteration budget: `10 √dimension` block iterations, at least 100.
pub fn iteration_budget(dimension: usize) -> usize {
    ((10.0 * (dimension as f64).sqrt()).ceil() as usize).max(100)
}

/// The `k` smallest eigenpairs, ascending, with residual at most `tol`.
/// Degenerate eigenvalues come back in an arbitrary orthonormal basis.
pub fn lowest_eigenpairs(op: &SparseOperator, k: usize, tol: f64) -> Result<Vec<EigenPair>> {
    let n = op.dimension();
    if k == 0 || k > n {
        return Err(Error::Precondition(format!("k = {k} must be in 1..={n}")));
    }
    // Generalized problem with weight q: solve the congruent standard problem.
    let scale: Option<Vec<f64>> = match op.mass() {
        Some(q) => {
            if q.iter().any(|&v| v <= 0.0) {
                return Err(Error::IllPosedOperator(
                    "mass weight must be positive on unknowns".into(),
                ));
            }
            Some(q.iter().map(|v| 1.0 / v.sqrt()).collect())
        }
        None => None,
    };
    let scaled;
    let a = match &scale {
        Some(s) => {
            let m = op.matrix();
            let mut trip = Vec::with_capacity(m.nnz());
            for i in 0..n {
                let (c, v) = m.row(i);
                for (&j, &x) in c.iter().zip(v) {
                    trip.push((i, j as usize, s[i] * x * s[j as usize]));
                }
            }
            scaled = CsrMatrix::from_triplets(n, n, trip);
            &scaled
        }
        None => op.matrix(),
    };
    let opts = EigenOptions {
        tol,
        max_iter: iteration_budget(n),
        guard: (k / 2).max(4),
        seed: 0x5eed,
    };
    let amg = if n > crate::linalg::DENSE_LIMIT {
        Some(Amg::new(a))
    } else {
        None
    };
    let pre = |r: &[f64], z: &mut [f64]| {
        if let Some(m) = &amg {
            m.apply(r, z)
        }
    };
    let sol = smallest_eigenpairs(
        a,
        amg.as_ref().map(|_| &pre as &dyn Fn(&[f64], &mut [f64])),
        k,
        &opts,
    )
    .map_err(|e| Error::Convergence {
        iterations: e.iterations,
        best_residual: e.best_residual,
    })?;
    let mut out = Vec::with_capacity(k);
    for (j, v) in sol.vectors.into_iter().enumerate() {
        let mut v = match &scale {
            Some(s) => v.iter().zip(s).map(|(x, si)| x * si).collect(),
            None => v,
        };
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        // Deterministic sign: the first entry of largest magnitude is positive.
        let pivot = v
            .iter()
            .enumerate()
            .fold((0usize, 0.0f64), |acc, (i, &x)| {
                if x.abs() > acc.1 * (1.0 + 1e-12) {
                    (i, x.abs())
                } else {
                    acc
                }
            })
            .0;
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        v.iter_mut().for_each(|x| *x *= sign / norm);
        let residual = match op.mass() {
            Some(q) => {
                let av = op.matrix().apply(&v);
                av.iter()
                    .zip(&v)
                    .zip(q)
                    .map(|((a, x), qi)| (a - sol.values[j] * qi * x).powi(2))
                    .sum::<f64>()
                    .sqrt()
            }
            None => sol.residuals[j],
        };
        let mut values = vec![0.0; op.grid().len()];
        for (d, &node) in op.dofs().iter().enumerate() {
            values[node] = v[d];
        }
        out.push(EigenPair {
            eigenvalue: sol.values[j],
            field: ScalarField::new(op.grid().clone(), values)?,
            residual,
        });
    }
    Ok(out)
}

/// Ground state of the flat Dirichlet Laplacian restricted to `submask`.
pub fn dirichlet_ground_state(grid: &Arc<Grid>, submask: &[bool]) -> Result<EigenPair> {
    if submask.len() != grid.len() {
        return Err(Error::InvalidDomain(
            "submask length does not match grid".into(),
        ));
    }
    if !submask.iter().any(|&b| b) {
        return Err(Error::EmptyDomain);
    }
    if submask.iter().zip(grid.inside()).any(|(&s, &i)| s && !i) {
        return Err(Error::Precondition(
            "submask is not contained in the grid mask".into(),
        ));
    }
    let op = assemble_on(grid, submask, None)?;
    Ok(lowest_eigenpairs(&op, 1, DEFAULT_TOL)?.remove(0))
}

/// Smallest Dirichlet eigenvalue of the flat Laplacian on `submask`.
pub fn dirichlet_ground_value(grid: &Arc<Grid>, submask: &[bool]) -> Result<f64> {
    dirichlet_ground_state(grid, submask).map(|p| p.eigenvalue)
}

/// Dirichlet energy and squared norm of `field · 1_region` with edge
/// differences evaluated at edge midpoints; edges leaving the lattice see a
/// zero ghost value. Both integrals carry their `h^n` quadrature weight.
pub fn dirichlet_integrals(field: &ScalarField, region: &[bool]) -> (f64, f64) {
    let g = field.grid();
    let dim = g.dim();
    let v = |i: usize| if region[i] { field.value(i) } else { 0.0 };
    let mut grad = 0.0;
    let mut mass = 0.0;
    for p in 0..g.len() {
        let vp = v(p);
        mass += vp * vp;
        for k in 0..dim {
            match g.neighbor(p, k, 1) {
                Some(q) => {
                    if region[p] || region[q] {
                        let d = vp - v(q);
                        grad += d * d;
                    }
                }
                None => grad += vp * vp,
            }
            if g.neighbor(p, k, -1).is_none() {
                grad += vp * vp;
            }
        }
    }
    let h = g.spacing();
    let w = g.cell_volume();
    (grad * w / (h * h), mass * w)
}

/// `∫|∇ψ|² / ∫ψ²` over `region`, with `ψ` extended by zero outside it.
pub fn rayleigh_quotient(field: &ScalarField, region: &[bool]) -> Result<f64> {
    if region.len() != field.grid().len() {
        return Err(Error::InvalidDomain(
            "region length does not match grid".into(),
        ));
    }
    let (num, den) = dirichlet_integrals(field, region);
    if den == 0.0 {
        return Err(Error::DegenerateRegion(
            "field vanishes on the region".into(),
        ));
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests;
