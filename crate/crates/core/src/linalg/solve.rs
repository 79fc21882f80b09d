use crate::error::{Error, Result};
use crate::real::Real;
use crate::sparse::{dot, norm2, CsrMatrix};

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions<T> {
    /// Relative residual target `||b - A x|| <= tol * ||b||`.
    pub tol: T,
    /// Iteration cap; `None` means `10 * n`.
    pub max_iter: Option<usize>,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-10),
            max_iter: None,
        }
    }
}

impl<T: Real> SolverOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        Self { tol, max_iter: None }
    }

    fn cap(&self, n: usize) -> usize {
        self.max_iter.unwrap_or(10 * n.max(1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn check_square<T: Real>(a: &CsrMatrix<T>, b: &[T]) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    Ok(())
}

fn jacobi<T: Real>(a: &CsrMatrix<T>) -> Vec<T> {
    a.diagonal()
        .into_iter()
        .map(|d| if d != T::zero() { T::one() / d } else { T::one() })
        .collect()
}

fn residual<T: Real>(a: &CsrMatrix<T>, x: &[T], b: &[T]) -> Vec<T> {
    let ax = a.mul_vec(x);
    b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect()
}

/// Jacobi-preconditioned conjugate gradients for symmetric positive definite `a`.
pub fn cg<T: Real>(a: &CsrMatrix<T>, b: &[T], x0: Option<&[T]>, opts: &SolverOptions<T>) -> Result<(Vec<T>, SolveStats)> {
    check_square(a, b)?;
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == T::zero() {
        return Ok((vec![T::zero(); n], SolveStats { iterations: 0, relative_residual: 0.0 }));
    }
    let dinv = jacobi(a);
    let mut x = x0.map_or_else(|| vec![T::zero(); n], <[T]>::to_vec);
    let mut r = residual(a, &x, b);
    let mut z: Vec<T> = r.iter().zip(&dinv).map(|(&ri, &di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    let target = opts.tol * bnorm;
    let cap = opts.cap(n);
    let mut rnorm = norm2(&r);
    let mut it = 0;
    while rnorm > target {
        if it == cap {
            return Err(Error::NotConverged {
                method: "CG",
                iterations: it,
                residual: (rnorm / bnorm).to_f64_lossy(),
            });
        }
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(Error::NotPositiveDefinite(it));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        it += 1;
        rnorm = norm2(&r);
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    // The recurrence residual drifts from the true one; report the latter.
    let true_res = norm2(&residual(a, &x, b)) / bnorm;
    Ok((
        x,
        SolveStats {
            iterations: it,
            relative_residual: true_res.to_f64_lossy(),
        },
    ))
}

/// Jacobi right-preconditioned BiCGSTAB for general square `a`.
pub fn bicgstab<T: Real>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: Option<&[T]>,
    opts: &SolverOptions<T>,
) -> Result<(Vec<T>, SolveStats)> {
    check_square(a, b)?;
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == T::zero() {
        return Ok((vec![T::zero(); n], SolveStats { iterations: 0, relative_residual: 0.0 }));
    }
    let dinv = jacobi(a);
    let precond = |v: &[T]| -> Vec<T> { v.iter().zip(&dinv).map(|(&a, &d)| a * d).collect() };
    let mut x = x0.map_or_else(|| vec![T::zero(); n], <[T]>::to_vec);
    let mut r = residual(a, &x, b);
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (T::one(), T::one(), T::one());
    let mut v = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    let mut s = vec![T::zero(); n];
    let mut t = vec![T::zero(); n];
    let target = opts.tol * bnorm;
    let cap = opts.cap(n);
    let tiny = T::min_positive_value().sqrt();
    let mut it = 0;
    let mut rnorm = norm2(&r);
    while rnorm > target {
        if it == cap {
            return Err(Error::NotConverged {
                method: "BiCGSTAB",
                iterations: it,
                residual: (rnorm / bnorm).to_f64_lossy(),
            });
        }
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() < tiny {
            return Err(Error::NotConverged {
                method: "BiCGSTAB (breakdown)",
                iterations: it,
                residual: (rnorm / bnorm).to_f64_lossy(),
            });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let p_hat = precond(&p);
        a.mul_vec_into(&p_hat, &mut v);
        alpha = rho / dot(&r_hat, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        it += 1;
        if norm2(&s) <= target {
            for i in 0..n {
                x[i] += alpha * p_hat[i];
            }
            break;
        }
        let s_hat = precond(&s);
        a.mul_vec_into(&s_hat, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > T::zero() { dot(&t, &s) / tt } else { T::zero() };
        for i in 0..n {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
            r[i] = s[i] - omega * t[i];
        }
        rnorm = norm2(&r);
        if omega == T::zero() && rnorm > target {
            return Err(Error::NotConverged {
                method: "BiCGSTAB (breakdown)",
                iterations: it,
                residual: (rnorm / bnorm).to_f64_lossy(),
            });
        }
    }
    let true_res = norm2(&residual(a, &x, b)) / bnorm;
    Ok((
        x,
        SolveStats {
            iterations: it,
            relative_residual: true_res.to_f64_lossy(),
        },
    ))
}

/// CG when `a` is flagged symmetric, BiCGSTAB otherwise.
pub fn solve_linear<T: Real>(a: &CsrMatrix<T>, b: &[T], opts: &SolverOptions<T>) -> Result<(Vec<T>, SolveStats)> {
    solve_with_guess(a, b, None, opts)
}

pub(crate) fn solve_with_guess<T: Real>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: Option<&[T]>,
    opts: &SolverOptions<T>,
) -> Result<(Vec<T>, SolveStats)> {
    if a.is_symmetric() {
        cg(a, b, x0, opts)
    } else {
        bicgstab(a, b, x0, opts)
    }
}

/// Cholesky factor `A = L L^T` stored as a lower band.
#[derive(Clone, Debug)]
pub struct BandedCholesky<T> {
    n: usize,
    bw: usize,
    /// Row `i` holds `L[i][i-bw ..= i]`.
    band: Vec<T>,
}

impl<T: Real> BandedCholesky<T> {
    pub fn factor(a: &CsrMatrix<T>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                got: a.ncols(),
            });
        }
        let n = a.nrows();
        let bw = a.pattern().bandwidth();
        let w = bw + 1;
        let mut band = vec![T::zero(); n * w];
        let p = a.pattern();
        for i in 0..n {
            for (k, &j) in p.row(i).iter().enumerate() {
                if j <= i {
                    band[i * w + (j + bw - i)] = a.values()[p.row_ptr()[i] + k];
                }
            }
        }
        for i in 0..n {
            let i0 = i.saturating_sub(bw);
            for j in i0..=i {
                let j0 = j.saturating_sub(bw).max(i0);
                let mut s = band[i * w + (j + bw - i)];
                for k in j0..j {
                    s -= band[i * w + (k + bw - i)] * band[j * w + (k + bw - j)];
                }
                if j == i {
                    if !(s > T::zero()) {
                        return Err(Error::NotPositiveDefinite(i));
                    }
                    band[i * w + bw] = s.sqrt();
                } else {
                    band[i * w + (j + bw - i)] = s / band[j * w + bw];
                }
            }
        }
        Ok(Self { n, bw, band })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn l(&self, i: usize, j: usize) -> T {
        self.band[i * (self.bw + 1) + (j + self.bw - i)]
    }

    /// Solves `L y = b` in place.
    pub fn forward(&self, y: &mut [T]) {
        for i in 0..self.n {
            let mut s = y[i];
            for k in i.saturating_sub(self.bw)..i {
                s -= self.l(i, k) * y[k];
            }
            y[i] = s / self.l(i, i);
        }
    }

    /// Solves `L^T x = y` in place.
    pub fn backward(&self, x: &mut [T]) {
        for i in (0..self.n).rev() {
            let xi = x[i] / self.l(i, i);
            x[i] = xi;
            for k in i.saturating_sub(self.bw)..i {
                x[k] -= self.l(i, k) * xi;
            }
        }
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.forward(&mut x);
        self.backward(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd() -> CsrMatrix<f64> {
        // 1D Laplacian plus identity.
        let n = 30;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 3.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, &t, true).unwrap()
    }

    #[test]
    fn cg_solves_spd() {
        let a = spd();
        let xs: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        let b = a.mul_vec(&xs);
        let (x, st) = cg(&a, &b, None, &SolverOptions::with_tol(1e-12)).unwrap();
        assert!(st.relative_residual <= 1e-12);
        for (u, v) in x.iter().zip(&xs) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn diagonal_system_is_quotient() {
        let d = [2.0f64, 5.0, 0.5, 8.0];
        let a = CsrMatrix::from_diagonal(&d);
        let b = [1.0, 2.0, 3.0, 4.0];
        let (x, _) = solve_linear(&a, &b, &SolverOptions::default()).unwrap();
        for i in 0..4 {
            assert!((x[i] - b[i] / d[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn bicgstab_solves_nonsymmetric() {
        let n = 40;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.5));
                t.push((i + 1, i, -0.5));
            }
        }
        let a = CsrMatrix::from_triplets(n, &t, false).unwrap();
        let xs: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64) * 0.1).collect();
        let b = a.mul_vec(&xs);
        let (x, st) = solve_linear(&a, &b, &SolverOptions::with_tol(1e-12)).unwrap();
        assert!(st.relative_residual <= 1e-11);
        for (u, v) in x.iter().zip(&xs) {
            assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn non_convergence_is_reported() {
        let a = spd();
        let b = vec![1.0; 30];
        let opts = SolverOptions { tol: 1e-14, max_iter: Some(2) };
        match cg(&a, &b, None, &opts) {
            Err(Error::NotConverged { iterations, residual, .. }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 1e-14);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn zero_rhs_and_size_mismatch() {
        let a = spd();
        let (x, st) = cg(&a, &[0.0; 30], None, &SolverOptions::default()).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
        assert_eq!(st.iterations, 0);
        assert!(cg(&a, &[1.0; 3], None, &SolverOptions::default()).is_err());
    }

    #[test]
    fn cholesky_round_trip() {
        let a = spd();
        let f = BandedCholesky::factor(&a).unwrap();
        let b: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let x = f.solve(&b);
        let r = a.mul_vec(&x);
        for (u, v) in r.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
        let bad = CsrMatrix::from_diagonal(&[1.0, -1.0]);
        assert!(matches!(BandedCholesky::factor(&bad), Err(Error::NotPositiveDefinite(1))));
    }
}
