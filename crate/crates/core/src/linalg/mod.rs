//! Krylov solvers, banded Cholesky and Lanczos eigenvalue estimation.

mod eigen;
pub(crate) mod solve;

pub use eigen::{
    extreme_eigenvalues, generalized_lambda_max, lanczos_extremes, symmetric_tridiagonal_eigen, EigenOptions,
    ExtremeEigenvalues,
};
pub use solve::{bicgstab, cg, solve_linear, BandedCholesky, SolveStats, SolverOptions};
