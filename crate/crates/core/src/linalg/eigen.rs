use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::solve::BandedCholesky;
use crate::error::{Error, Result};
use crate::real::Real;
use crate::sparse::{dot, norm2, CsrMatrix};

#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    /// Relative tolerance on the Ritz value error estimate.
    pub tol: f64,
    /// Largest Krylov subspace dimension.
    pub max_krylov: usize,
    /// Seed of the start vector.
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_krylov: 400,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtremeEigenvalues<T> {
    pub min: T,
    pub max: T,
    /// Lanczos steps used by the two runs together.
    pub iterations: usize,
}

impl<T: Real> ExtremeEigenvalues<T> {
    pub fn condition(&self) -> T {
        self.max / self.min
    }
}

/// Eigen-decomposition of a symmetric tridiagonal matrix by implicit QL.
///
/// `diag` has length `n`, `off` length `n - 1`. Returns eigenvalues and the
/// eigenvector matrix `z` with `z[i][k]` the `i`-th component of vector `k`.
pub fn symmetric_tridiagonal_eigen<T: Real>(diag: &[T], off: &[T]) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let n = diag.len();
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    if off.len() + 1 != n {
        return Err(Error::DimensionMismatch {
            expected: n - 1,
            got: off.len(),
        });
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(T::zero());
    let mut z = vec![vec![T::zero(); n]; n];
    for (i, row) in z.iter_mut().enumerate() {
        row[i] = T::one();
    }
    let two = T::lit(2.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NotConverged {
                    method: "tridiagonal QL",
                    iterations: iter,
                    residual: e[l].abs().to_f64_lossy(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in z.iter_mut() {
                    let f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok((d, z))
}

/// Lanczos with full reorthogonalization on the symmetric operator `apply`.
///
/// Returns the smallest and largest Ritz values once both have converged,
/// or when the Krylov space becomes invariant.
pub fn lanczos_extremes<T: Real>(
    n: usize,
    mut apply: impl FnMut(&[T], &mut [T]),
    opts: &EigenOptions,
    need_min: bool,
) -> Result<ExtremeEigenvalues<T>> {
    if n == 0 {
        return Err(Error::InvalidArgument("empty operator".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v: Vec<T> = (0..n).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    let max_dim = opts.max_krylov.min(n).max(1);
    let tol = T::lit(opts.tol);
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(max_dim);
    let mut alpha: Vec<T> = Vec::new();
    let mut beta: Vec<T> = Vec::new();
    let mut w = vec![T::zero(); n];
    let mut last = (T::zero(), T::zero(), T::infinity());
    let mut prev: Option<(T, T, usize)> = None;
    basis.push(v);
    for j in 0..max_dim {
        apply(&basis[j], &mut w);
        let a = dot(&basis[j], &w);
        alpha.push(a);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                for (wi, &qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let b = norm2(&w);
        let m = j + 1;
        let check = m == max_dim || m % 5 == 0 || m < 5 || b <= T::epsilon() * a.abs().max(T::one());
        if check {
            let (theta, z) = symmetric_tridiagonal_eigen(&alpha, &beta)?;
            let (mut imin, mut imax) = (0, 0);
            for k in 0..m {
                if theta[k] < theta[imin] {
                    imin = k;
                }
                if theta[k] > theta[imax] {
                    imax = k;
                }
            }
            let scale = theta[imax].abs().max(theta[imin].abs());
            // Ritz values are accurate to about res^2 / gap once the residual
            // is small enough for the Ritz gap to approximate the true one.
            let near = T::lit(opts.tol.sqrt()) * scale;
            let err = |k: usize| {
                let res = (b * z[m - 1][k]).abs();
                let gap = (0..m)
                    .filter(|&o| o != k)
                    .map(|o| (theta[o] - theta[k]).abs())
                    .fold(T::infinity(), T::min);
                if res <= near && gap.is_finite() {
                    res.min(res * res / gap.max(T::min_positive_value()))
                } else {
                    res
                }
            };
            let (res_max, res_min) = (err(imax), err(imin));
            let ok_max = res_max <= tol * theta[imax].abs().max(T::min_positive_value());
            let ok_min = !need_min || res_min <= tol * theta[imin].abs().max(tol * scale);
            last = (theta[imin], theta[imax], res_max.max(if need_min { res_min } else { T::zero() }));
            let invariant = b <= T::epsilon() * scale.max(T::min_positive_value()) * T::lit(10.0);
            // Extreme Ritz values move monotonically; stop once they stall.
            let stalled = match prev {
                Some((lo, hi, pm)) if m >= 20 && m - pm == 5 => {
                    (theta[imax] - hi).abs() <= tol * theta[imax].abs()
                        && (!need_min || (theta[imin] - lo).abs() <= tol * theta[imin].abs().max(tol * scale))
                }
                _ => false,
            };
            prev = Some((theta[imin], theta[imax], m));
            if (ok_max && ok_min) || stalled || invariant || m == n {
                return Ok(ExtremeEigenvalues {
                    min: theta[imin],
                    max: theta[imax],
                    iterations: m,
                });
            }
        }
        if m == max_dim {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|&x| x / b).collect());
    }
    Err(Error::NotConverged {
        method: "Lanczos",
        iterations: max_dim,
        residual: (last.2 / last.1.abs()).to_f64_lossy(),
    })
}

/// Extreme eigenvalues of a symmetric positive definite matrix.
///
/// The largest comes from Lanczos on `A`, the smallest from Lanczos on
/// `A^{-1}` applied through a banded Cholesky factorization.
pub fn extreme_eigenvalues<T: Real>(a: &CsrMatrix<T>, opts: &EigenOptions) -> Result<ExtremeEigenvalues<T>> {
    let asym = a.max_asymmetry();
    if asym > T::lit(1e-10) * a.max_abs().max(T::one()) {
        return Err(Error::NotSymmetric(asym.to_f64_lossy()));
    }
    let n = a.nrows();
    let top = lanczos_extremes(n, |x, y| a.mul_vec_into(x, y), opts, false)?;
    let chol = BandedCholesky::factor(a)?;
    let inv = lanczos_extremes(
        n,
        |x, y| {
            y.copy_from_slice(x);
            chol.forward(y);
            chol.backward(y);
        },
        opts,
        false,
    )?;
    Ok(ExtremeEigenvalues {
        min: T::one() / inv.max,
        max: top.max,
        iterations: top.iterations + inv.iterations,
    })
}

/// Largest `lambda` with `K x = lambda M x`, `M` SPD, `K` symmetric.
pub fn generalized_lambda_max<T: Real>(k: &CsrMatrix<T>, m: &CsrMatrix<T>, opts: &EigenOptions) -> Result<T> {
    let chol = BandedCholesky::factor(m)?;
    let n = m.nrows();
    let mut tmp = vec![T::zero(); n];
    let r = lanczos_extremes(
        n,
        |x, y| {
            tmp.copy_from_slice(x);
            chol.backward(&mut tmp);
            k.mul_vec_into(&tmp, y);
            chol.forward(y);
        },
        opts,
        false,
    )?;
    Ok(r.max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_known_spectrum() {
        // Tridiag(-1, 2, -1) of size n has eigenvalues 2 - 2 cos(k pi / (n+1)).
        let n = 12;
        let (mut ev, z) = symmetric_tridiagonal_eigen(&vec![2.0; n], &vec![-1.0; n - 1]).unwrap();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (k, &l) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((l - exact).abs() < 1e-13);
        }
        // Eigenvectors are orthonormal.
        for a in 0..n {
            for b in 0..n {
                let d: f64 = (0..n).map(|i| z[i][a] * z[i][b]).sum();
                assert!((d - if a == b { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_extremes() {
        let a = CsrMatrix::<f64>::from_diagonal(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let e = extreme_eigenvalues(&a, &EigenOptions::default()).unwrap();
        assert!((e.min - 1.0).abs() < 1e-12 && (e.max - 5.0).abs() < 1e-12);
        assert!((e.condition() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn identity_condition_is_one() {
        let e = extreme_eigenvalues(&CsrMatrix::<f64>::identity(50), &EigenOptions::default()).unwrap();
        assert!((e.condition() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_nonsymmetric() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 1, 1.0)], false).unwrap();
        assert!(matches!(extreme_eigenvalues(&a, &EigenOptions::default()), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn large_laplacian_extremes() {
        // Five-point Laplacian on a 40 x 40 grid.
        let k = 40;
        let id = |i: usize, j: usize| i * k + j;
        let mut t = Vec::new();
        for i in 0..k {
            for j in 0..k {
                t.push((id(i, j), id(i, j), 4.0));
                if i + 1 < k {
                    t.push((id(i, j), id(i + 1, j), -1.0));
                    t.push((id(i + 1, j), id(i, j), -1.0));
                }
                if j + 1 < k {
                    t.push((id(i, j), id(i, j + 1), -1.0));
                    t.push((id(i, j + 1), id(i, j), -1.0));
                }
            }
        }
        let a = CsrMatrix::from_triplets(k * k, &t, true).unwrap();
        let e = extreme_eigenvalues(&a, &EigenOptions::default()).unwrap();
        let h = std::f64::consts::PI / (k + 1) as f64;
        let (lmin, lmax) = (4.0 - 4.0 * h.cos(), 4.0 - 4.0 * (k as f64 * h).cos());
        assert!(((e.min - lmin) / lmin).abs() < 1e-8);
        assert!(((e.max - lmax) / lmax).abs() < 1e-8);
    }

    #[test]
    fn generalized_with_identity_mass() {
        let k = CsrMatrix::<f64>::from_diagonal(&[0.0, 3.0, 7.0]);
        let m = CsrMatrix::identity(3);
        let l = generalized_lambda_max(&k, &m, &EigenOptions::default()).unwrap();
        assert!((l - 7.0).abs() < 1e-12);
    }
}
