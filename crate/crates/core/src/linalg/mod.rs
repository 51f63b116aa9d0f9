//! Sparse linear algebra used by the eigen and capacity solvers.

mod amg;
mod solvers;
mod sparse;

pub use amg::Amg;
pub use solvers::{
    dense_eigenpairs, orthonormalize, pcg, smallest_eigenpairs, CgReport, EigenOptions,
    EigenSolution, NotConverged, DENSE_LIMIT,
};
pub use sparse::{axpy, dot, norm2, CsrMatrix};
