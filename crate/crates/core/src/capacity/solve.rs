use std::sync::Arc;

use crate::domain::{Grid, ScalarField};
use crate::eigen::dirichlet_integrals;
use crate::error::{Error, Result};
use crate::linalg::{pcg, Amg, CsrMatrix};

/// Relative residual of the capacity solve.
pub const CAPACITY_RTOL: f64 = 1e-10;

/// Equilibrium potential of `F` relative to `outer`.
#[derive(Clone, Debug)]
pub struct CapacityProblem {
    pub f: Vec<bool>,
    pub outer: Vec<bool>,
    /// 1 on `F`, 0 off `outer`, discrete harmonic in between.
    pub solution: ScalarField,
    /// `∫|∇u|²` with the edge quadrature of the Rayleigh quotient.
    pub energy: f64,
    pub iterations: usize,
}

/// Minimizes the discrete Dirichlet energy over lattice functions equal to
/// 1 on `f` and 0 off `outer`. Positions beyond non-periodic lattice faces
/// count as outside `outer`.
pub fn solve_capacity(grid: &Grid, f: &[bool], outer: &[bool]) -> Result<CapacityProblem> {
    let n = grid.len();
    if f.len() != n || outer.len() != n {
        return Err(Error::InvalidDomain(
            "node sets do not match the grid".into(),
        ));
    }
    if f.iter().zip(outer).any(|(&a, &b)| a && !b) {
        return Err(Error::Precondition(
            "F is not contained in the outer set".into(),
        ));
    }
    let sub = Arc::new(grid.with_mask(vec![true; n])?);
    if !f.iter().any(|&b| b) {
        return Ok(CapacityProblem {
            f: f.to_vec(),
            outer: outer.to_vec(),
            solution: ScalarField::zeros(sub),
            energy: 0.0,
            iterations: 0,
        });
    }
    let dim = grid.dim();
    let mut dof = vec![u32::MAX; n];
    let mut nodes = Vec::new();
    for i in 0..n {
        if outer[i] && !f[i] {
            dof[i] = nodes.len() as u32;
            nodes.push(i);
        }
    }
    let mut u = vec![0.0; n];
    for i in 0..n {
        if f[i] {
            u[i] = 1.0;
        }
    }
    let mut iterations = 0;
    if !nodes.is_empty() {
        let mut indptr = Vec::with_capacity(nodes.len() + 1);
        let mut indices = Vec::with_capacity(nodes.len() * (2 * dim + 1));
        let mut data = Vec::with_capacity(nodes.len() * (2 * dim + 1));
        let mut rhs = vec![0.0; nodes.len()];
        let mut row: Vec<(u32, f64)> = Vec::with_capacity(2 * dim + 1);
        indptr.push(0);
        for (r, &p) in nodes.iter().enumerate() {
            row.clear();
            row.push((r as u32, 2.0 * dim as f64));
            for k in 0..dim {
                for dir in [-1, 1] {
                    if let Some(q) = grid.neighbor(p, k, dir) {
                        if dof[q] != u32::MAX {
                            row.push((dof[q], -1.0));
                        } else if f[q] {
                            rhs[r] += 1.0;
                        }
                    }
                }
            }
            row.sort_unstable_by_key(|e| e.0);
            for &(c, v) in row.iter() {
                indices.push(c);
                data.push(v);
            }
            indptr.push(indices.len());
        }
        let a = CsrMatrix::from_raw(nodes.len(), nodes.len(), indptr, indices, data);
        let amg = Amg::new(&a);
        let mut x = vec![0.0; nodes.len()];
        let report = pcg(
            &a,
            &rhs,
            &mut x,
            &|r, z| amg.apply(r, z),
            CAPACITY_RTOL,
            2000,
        );
        if !report.converged {
            return Err(Error::Convergence {
                iterations: report.iterations,
                best_residual: report.relative_residual,
            });
        }
        iterations = report.iterations;
        for (r, &p) in nodes.iter().enumerate() {
            u[p] = x[r].clamp(0.0, 1.0);
        }
    }
    let solution = ScalarField::new(sub, u)?;
    let all = vec![true; n];
    let (energy, _) = dirichlet_integrals(&solution, &all);
    Ok(CapacityProblem {
        f: f.to_vec(),
        outer: outer.to_vec(),
        solution,
        energy,
        iterations,
    })
}

/// Discrete 2-capacity of `f` relative to `outer`; 0 for empty `f`.
pub fn capacity(grid: &Grid, f: &[bool], outer: &[bool]) -> Result<f64> {
    solve_capacity(grid, f, outer).map(|p| p.energy)
}

/// Capacity of the closed ball of radius `inner` relative to the open
/// ball of radius `outer`, computed and in closed form.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ConcentricCapacity {
    pub dim: usize,
    pub cells: usize,
    pub computed: f64,
    pub exact: f64,
    pub relative_error: f64,
}

/// Solves on the lattice `[-outer, outer]^dim` with `cells` cells per axis.
pub fn concentric_ball_capacity(
    dim: usize,
    cells: usize,
    inner: f64,
    outer: f64,
) -> Result<ConcentricCapacity> {
    if !(inner > 0.0 && inner < outer) {
        return Err(Error::Precondition(format!(
            "need 0 < inner < outer, got {inner} and {outer}"
        )));
    }
    let exact = match dim {
        2 => 2.0 * std::f64::consts::PI / (outer / inner).ln(),
        3 => 4.0 * std::f64::consts::PI / (1.0 / inner - 1.0 / outer),
        d => return Err(Error::UnsupportedDimension(d)),
    };
    if cells < 4 {
        return Err(Error::InvalidResolution(format!("{cells} cells per axis")));
    }
    let h = 2.0 * outer / cells as f64;
    let shape = vec![cells + 1; dim];
    let grid = Grid::new(
        h,
        &shape,
        &vec![-outer; dim],
        &vec![false; dim],
        vec![true; shape.iter().product()],
    )?;
    let r = |i: usize| grid.position(i).iter().map(|x| x * x).sum::<f64>().sqrt();
    let f: Vec<bool> = (0..grid.len()).map(|i| r(i) <= inner).collect();
    let o: Vec<bool> = (0..grid.len()).map(|i| r(i) < outer).collect();
    let computed = capacity(&grid, &f, &o)?;
    Ok(ConcentricCapacity {
        dim,
        cells,
        computed,
        exact,
        relative_error: computed / exact - 1.0,
    })
}
