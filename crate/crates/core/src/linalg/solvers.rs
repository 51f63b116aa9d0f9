//! Iterative solvers: preconditioned conjugate gradients and LOBPCG.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sparse::{axpy, dot, norm2, CsrMatrix};

/// Outcome of a conjugate-gradient solve.
#[derive(Clone, Copy, Debug)]
pub struct CgReport {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

/// Solves `A x = b` for SPD `A` starting from the contents of `x`.
/// Stops when `‖b - A x‖ <= rtol ‖b‖`.
pub fn pcg(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    precond: &dyn Fn(&[f64], &mut [f64]),
    rtol: f64,
    max_iter: usize,
) -> CgReport {
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return CgReport {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let mut r = a.apply(x);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut rel = norm2(&r) / bnorm;
    for it in 0..max_iter {
        if rel <= rtol {
            return CgReport {
                iterations: it,
                relative_residual: rel,
                converged: true,
            };
        }
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        axpy(alpha, &p, x);
        axpy(-alpha, &ap, &mut r);
        rel = norm2(&r) / bnorm;
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut()
            .zip(&z)
            .for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    // Confirm with a true residual before reporting.
    let mut tr = a.apply(x);
    tr.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    let rel = norm2(&tr) / bnorm;
    CgReport {
        iterations: max_iter,
        relative_residual: rel,
        converged: rel <= rtol,
    }
}

#[derive(Clone, Debug)]
pub struct EigenOptions {
    /// Absolute residual tolerance `‖A x - θ x‖` for unit `x`.
    pub tol: f64,
    pub max_iter: usize,
    /// Extra guard vectors carried beyond the `k` wanted pairs.
    pub guard: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct EigenSolution {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

/// Failure carrying the best residual seen.
#[derive(Clone, Copy, Debug)]
pub struct NotConverged {
    pub iterations: usize,
    pub best_residual: f64,
}

/// Problems at or below this size are solved densely.
pub const DENSE_LIMIT: usize = 600;

/// `k` smallest eigenpairs of symmetric `A`.
pub fn smallest_eigenpairs(
    a: &CsrMatrix,
    precond: Option<&dyn Fn(&[f64], &mut [f64])>,
    k: usize,
    opts: &EigenOptions,
) -> Result<EigenSolution, NotConverged> {
    let n = a.n_rows();
    let m = (k + opts.guard).min(n);
    if n <= DENSE_LIMIT || 3 * m >= n {
        return Ok(dense_eigenpairs(a, k.min(n)));
    }
    let identity = |r: &[f64], z: &mut [f64]| z.copy_from_slice(r);
    let precond: &dyn Fn(&[f64], &mut [f64]) = precond.unwrap_or(&identity);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let init: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let x0 = orthonormalize(&[], init);
    let ax0: Vec<Vec<f64>> = x0.iter().map(|v| a.apply(v)).collect();
    let (mut theta, mut x, mut ax) = rayleigh_ritz(&x0, &ax0, x0.len());
    let mut p: Vec<Vec<f64>> = Vec::new();
    let mut best = f64::INFINITY;

    for it in 0..opts.max_iter {
        let res: Vec<Vec<f64>> = (0..x.len())
            .map(|j| {
                ax[j]
                    .iter()
                    .zip(&x[j])
                    .map(|(av, xv)| av - theta[j] * xv)
                    .collect()
            })
            .collect();
        let norms: Vec<f64> = res.iter().map(|r| norm2(r)).collect();
        let worst = norms[..k].iter().cloned().fold(0.0, f64::max);
        best = best.min(worst);
        if worst <= opts.tol {
            return Ok(EigenSolution {
                values: theta[..k].to_vec(),
                vectors: x[..k].to_vec(),
                residuals: norms[..k].to_vec(),
                iterations: it,
            });
        }
        let active: Vec<usize> = (0..x.len()).filter(|&j| norms[j] > opts.tol).collect();
        let w: Vec<Vec<f64>> = active
            .iter()
            .map(|&j| {
                let mut z = vec![0.0; n];
                precond(&res[j], &mut z);
                z
            })
            .collect();
        let mut basis = x.clone();
        let w = orthonormalize(&basis, w);
        basis.extend(w);
        let pvecs = orthonormalize(&basis, std::mem::take(&mut p));
        basis.extend(pvecs);
        let mut abasis = ax.clone();
        for v in &basis[x.len()..] {
            abasis.push(a.apply(v));
        }
        let mcur = x.len();
        let (vals, coef) = ritz_decomposition(&basis, &abasis);
        let take = mcur.min(vals.len());
        let mut xn = Vec::with_capacity(take);
        let mut pn = Vec::new();
        for j in 0..take {
            xn.push(combine(&basis, &coef, j, 0));
            if active.contains(&j) && basis.len() > mcur {
                pn.push(combine(&basis, &coef, j, mcur));
            }
        }
        p = pn;
        theta = vals[..take].to_vec();
        ax = xn.iter().map(|v| a.apply(v)).collect();
        x = xn;
    }
    Err(NotConverged {
        iterations: opts.max_iter,
        best_residual: best,
    })
}

/// `Σ_{l >= from} basis[l] * coef[(l, col)]`
fn combine(basis: &[Vec<f64>], coef: &DMatrix<f64>, col: usize, from: usize) -> Vec<f64> {
    let n = basis[0].len();
    let mut out = vec![0.0; n];
    for (l, b) in basis.iter().enumerate().skip(from) {
        let c = coef[(l, col)];
        if c != 0.0 {
            axpy(c, b, &mut out);
        }
    }
    out
}

/// Ritz values (ascending) and coefficient matrix of the projected operator
/// on an orthonormal basis.
fn ritz_decomposition(basis: &[Vec<f64>], abasis: &[Vec<f64>]) -> (Vec<f64>, DMatrix<f64>) {
    let s = basis.len();
    let mut g = DMatrix::zeros(s, s);
    for i in 0..s {
        for j in i..s {
            let v = 0.5 * (dot(&basis[i], &abasis[j]) + dot(&basis[j], &abasis[i]));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    let eig = g.symmetric_eigen();
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut coef = DMatrix::zeros(s, s);
    for (c, &i) in order.iter().enumerate() {
        coef.set_column(c, &eig.eigenvectors.column(i));
    }
    (vals, coef)
}

fn rayleigh_ritz(
    x: &[Vec<f64>],
    ax: &[Vec<f64>],
    m: usize,
) -> (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let (vals, coef) = ritz_decomposition(x, ax);
    let xs = (0..m).map(|j| combine(x, &coef, j, 0)).collect();
    let axs = (0..m).map(|j| combine(ax, &coef, j, 0)).collect();
    (vals[..m].to_vec(), xs, axs)
}

/// Gram–Schmidt (two passes) of `cands` against `basis` and each other;
/// numerically dependent candidates are dropped.
pub fn orthonormalize(basis: &[Vec<f64>], cands: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut accepted: Vec<Vec<f64>> = Vec::with_capacity(cands.len());
    for mut c in cands {
        let n0 = norm2(&c);
        if n0 == 0.0 || !n0.is_finite() {
            continue;
        }
        for _ in 0..2 {
            for b in basis.iter().chain(accepted.iter()) {
                let d = dot(b, &c);
                axpy(-d, b, &mut c);
            }
        }
        let n1 = norm2(&c);
        if n1 <= 1e-10 * n0 {
            continue;
        }
        c.iter_mut().for_each(|v| *v /= n1);
        accepted.push(c);
    }
    accepted
}

/// Full dense symmetric eigendecomposition for small problems.
pub fn dense_eigenpairs(a: &CsrMatrix, k: usize) -> EigenSolution {
    let n = a.n_rows();
    let d = a.to_dense();
    let d = (&d + d.transpose()) * 0.5;
    let eig = d.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for &i in order.iter().take(k) {
        let v: Vec<f64> = eig.eigenvectors.column(i).iter().cloned().collect();
        let av = a.apply(&v);
        let lam = eig.eigenvalues[i];
        let r: f64 = av
            .iter()
            .zip(&v)
            .map(|(p, q)| (p - lam * q).powi(2))
            .sum::<f64>()
            .sqrt();
        values.push(lam);
        vectors.push(v);
        residuals.push(r);
    }
    EigenSolution {
        values,
        vectors,
        residuals,
        iterations: 0,
    }
}
