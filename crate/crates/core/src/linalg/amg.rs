//! Smoothed-aggregation algebraic multigrid, used as a symmetric
//! preconditioner for SPD (or PSD) grid operators.

use nalgebra::{DMatrix, DVector};

use super::sparse::CsrMatrix;

const STRENGTH_THETA: f64 = 0.25;
const COARSEST_SIZE: usize = 400;
const MAX_LEVELS: usize = 25;

struct Level {
    a: CsrMatrix,
    p: CsrMatrix,
    r: CsrMatrix,
}

/// Multigrid hierarchy; [`Amg::apply`] performs one V(1,1)-cycle with
/// symmetric Gauss–Seidel smoothing, which is a symmetric operator.
pub struct Amg {
    levels: Vec<Level>,
    coarse_a: CsrMatrix,
    coarse: Option<nalgebra::Cholesky<f64, nalgebra::Dyn>>,
    coarse_dense_inv: Option<DMatrix<f64>>,
}

impl Amg {
    pub fn new(a: &CsrMatrix) -> Self {
        let mut levels = Vec::new();
        let mut cur = a.clone();
        while cur.n_rows() > COARSEST_SIZE && levels.len() < MAX_LEVELS {
            let agg = aggregate(&cur);
            let n_agg = agg.iter().max().map_or(0, |&m| m + 1);
            if n_agg == 0 || n_agg * 10 > cur.n_rows() * 9 {
                break;
            }
            let p = smoothed_prolongator(&cur, &agg, n_agg);
            let r = p.transpose();
            let coarse = r.matmul(&cur.matmul(&p));
            levels.push(Level { a: cur, p, r });
            cur = coarse;
        }
        let n = cur.n_rows();
        let mut dense = cur.to_dense();
        let mean_diag = (0..n).map(|i| dense[(i, i)]).sum::<f64>() / n.max(1) as f64;
        for i in 0..n {
            dense[(i, i)] += 1e-10 * mean_diag.abs().max(f64::MIN_POSITIVE);
        }
        let (coarse, coarse_dense_inv) = match dense.clone().cholesky() {
            Some(c) => (Some(c), None),
            None => (None, dense.try_inverse()),
        };
        Self {
            levels,
            coarse_a: cur,
            coarse,
            coarse_dense_inv,
        }
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len() + 1
    }

    /// `x ≈ A⁻¹ b`.
    pub fn apply(&self, b: &[f64], x: &mut [f64]) {
        self.cycle(0, b, x);
    }

    fn cycle(&self, lvl: usize, b: &[f64], x: &mut [f64]) {
        if lvl == self.levels.len() {
            self.coarse_solve(b, x);
            return;
        }
        let level = &self.levels[lvl];
        x.iter_mut().for_each(|v| *v = 0.0);
        gauss_seidel(&level.a, b, x, true);
        let mut res = level.a.apply(x);
        res.iter_mut().zip(b).for_each(|(r, bi)| *r = bi - *r);
        let bc = level.r.apply(&res);
        let mut xc = vec![0.0; bc.len()];
        self.cycle(lvl + 1, &bc, &mut xc);
        let corr = level.p.apply(&xc);
        x.iter_mut().zip(&corr).for_each(|(xi, c)| *xi += c);
        gauss_seidel(&level.a, b, x, false);
    }

    fn coarse_solve(&self, b: &[f64], x: &mut [f64]) {
        let rhs = DVector::from_column_slice(b);
        let sol = if let Some(c) = &self.coarse {
            c.solve(&rhs)
        } else if let Some(inv) = &self.coarse_dense_inv {
            inv * rhs
        } else {
            // Singular beyond repair: diagonal solve.
            let d = self.coarse_a.diagonal();
            DVector::from_iterator(
                b.len(),
                b.iter()
                    .zip(&d)
                    .map(|(bi, di)| if *di != 0.0 { bi / di } else { 0.0 }),
            )
        };
        x.copy_from_slice(sol.as_slice());
    }
}

fn gauss_seidel(a: &CsrMatrix, b: &[f64], x: &mut [f64], forward: bool) {
    let n = a.n_rows();
    let mut sweep = |i: usize| {
        let (cols, vals) = a.row(i);
        let mut s = b[i];
        let mut d = 0.0;
        for (&j, &v) in cols.iter().zip(vals) {
            if j as usize == i {
                d = v;
            } else {
                s -= v * x[j as usize];
            }
        }
        if d != 0.0 {
            x[i] = s / d;
        }
    };
    if forward {
        (0..n).for_each(&mut sweep);
    } else {
        (0..n).rev().for_each(&mut sweep);
    }
}

/// Off-diagonal entries at least `θ` times the largest one in the row.
fn strong_neighbors(a: &CsrMatrix, i: usize, out: &mut Vec<usize>) {
    out.clear();
    let (cols, vals) = a.row(i);
    let max = cols
        .iter()
        .zip(vals)
        .filter(|(&j, _)| j as usize != i)
        .map(|(_, v)| v.abs())
        .fold(0.0, f64::max);
    for (&j, &v) in cols.iter().zip(vals) {
        let j = j as usize;
        if j != i && v.abs() >= STRENGTH_THETA * max && max > 0.0 {
            out.push(j);
        }
    }
}

/// Greedy three-phase aggregation on the strength graph.
fn aggregate(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n_rows();
    const NONE: usize = usize::MAX;
    let mut agg = vec![NONE; n];
    let mut count = 0;
    let mut nb = Vec::new();
    for i in 0..n {
        if agg[i] != NONE {
            continue;
        }
        strong_neighbors(a, i, &mut nb);
        if nb.is_empty() || nb.iter().any(|&j| agg[j] != NONE) {
            continue;
        }
        agg[i] = count;
        for &j in &nb {
            agg[j] = count;
        }
        count += 1;
    }
    let snapshot = agg.clone();
    for i in 0..n {
        if agg[i] != NONE {
            continue;
        }
        strong_neighbors(a, i, &mut nb);
        if let Some(&j) = nb.iter().find(|&&j| snapshot[j] != NONE) {
            agg[i] = snapshot[j];
        }
    }
    for i in 0..n {
        if agg[i] != NONE {
            continue;
        }
        strong_neighbors(a, i, &mut nb);
        agg[i] = count;
        for &j in &nb {
            if agg[j] == NONE {
                agg[j] = count;
            }
        }
        count += 1;
    }
    agg
}

fn smoothed_prolongator(a: &CsrMatrix, agg: &[usize], n_agg: usize) -> CsrMatrix {
    let n = a.n_rows();
    let mut sizes = vec![0usize; n_agg];
    agg.iter().for_each(|&g| sizes[g] += 1);
    let trip = (0..n)
        .map(|i| (i, agg[i], 1.0 / (sizes[agg[i]] as f64).sqrt()))
        .collect();
    let tentative = CsrMatrix::from_triplets(n, n_agg, trip);
    let diag = a.diagonal();
    // Gershgorin bound on the spectral radius of D^{-1} A.
    let rho = (0..n)
        .map(|i| {
            let (_, v) = a.row(i);
            v.iter().map(|x| x.abs()).sum::<f64>() / diag[i].abs().max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max);
    let omega = 4.0 / (3.0 * rho);
    // S = I - omega D^{-1} A
    let mut trip = Vec::with_capacity(a.nnz());
    for i in 0..n {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            let mut s = -omega * v / diag[i];
            if j as usize == i {
                s += 1.0;
            }
            trip.push((i, j as usize, s));
        }
    }
    let smoother = CsrMatrix::from_triplets(n, n, trip);
    smoother.matmul(&tentative)
}
