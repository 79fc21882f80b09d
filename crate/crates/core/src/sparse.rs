//! Compressed sparse row storage with a shared sparsity pattern.
//!
//! All FE matrices of one mesh share the connectivity pattern, so linear
//! combinations such as `a*M + b*K` reduce to combinations of value arrays.

use std::collections::BTreeSet;
use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::real::Real;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsityPattern {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl SparsityPattern {
    /// Pattern from per-row sorted, deduplicated column sets.
    pub fn from_rows(ncols: usize, rows: Vec<BTreeSet<usize>>) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for r in &rows {
            col_idx.extend(r.iter().copied());
            row_ptr.push(col_idx.len());
        }
        Self {
            nrows: rows.len(),
            ncols,
            row_ptr,
            col_idx,
        }
    }

    /// `(tau, o)` is stored iff nodes `tau` and `o` share an element.
    pub fn from_mesh<T: Real>(mesh: &TriMesh<T>) -> Self {
        let l = mesh.node_count();
        let mut rows = vec![BTreeSet::new(); l];
        for e in mesh.elements() {
            for &a in e {
                rows[a].extend(e.iter().copied());
            }
        }
        Self::from_rows(l, rows)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    /// Position of `(i, j)` in the value array.
    pub fn find(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.row_ptr[i];
        self.row(i).binary_search(&j).ok().map(|k| start + k)
    }

    /// Largest `|i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.nrows)
            .flat_map(|i| self.row(i).iter().map(move |&j| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug)]
pub struct CsrMatrix<T> {
    pattern: Arc<SparsityPattern>,
    values: Vec<T>,
    symmetric: bool,
}

impl<T: Real> CsrMatrix<T> {
    pub fn zeros(pattern: Arc<SparsityPattern>, symmetric: bool) -> Self {
        let nnz = pattern.nnz();
        Self {
            pattern,
            values: vec![T::zero(); nnz],
            symmetric,
        }
    }

    pub fn from_parts(pattern: Arc<SparsityPattern>, values: Vec<T>, symmetric: bool) -> Result<Self> {
        if values.len() != pattern.nnz() {
            return Err(Error::DimensionMismatch {
                expected: pattern.nnz(),
                got: values.len(),
            });
        }
        Ok(Self {
            pattern,
            values,
            symmetric,
        })
    }

    /// Builds a matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, T)], symmetric: bool) -> Result<Self> {
        let mut rows = vec![BTreeSet::new(); n];
        for &(i, j, _) in triplets {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!("entry ({i}, {j}) outside {n}x{n}")));
            }
            rows[i].insert(j);
        }
        let mut m = Self::zeros(Arc::new(SparsityPattern::from_rows(n, rows)), symmetric);
        for &(i, j, v) in triplets {
            m.add(i, j, v);
        }
        Ok(m)
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        let t: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(d.len(), &t, true).expect("indices in range")
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![T::one(); n])
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    pub fn nrows(&self) -> usize {
        self.pattern.nrows
    }

    pub fn ncols(&self) -> usize {
        self.pattern.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// Flag set by the constructor; see [`CsrMatrix::max_asymmetry`] for the measured value.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn set_symmetric(&mut self, symmetric: bool) {
        self.symmetric = symmetric;
    }

    /// Entry `(i, j)`, zero if not stored.
    pub fn get(&self, i: usize, j: usize) -> T {
        self.pattern.find(i, j).map_or(T::zero(), |k| self.values[k])
    }

    /// Adds `v` to a stored entry.
    ///
    /// # Panics
    /// If `(i, j)` is not part of the pattern.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let k = self
            .pattern
            .find(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) not in sparsity pattern"));
        self.values[k] += v;
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.nrows()).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[T], y: &mut [T]) {
        let p = &*self.pattern;
        for (i, yi) in y.iter_mut().enumerate().take(p.nrows) {
            let mut s = T::zero();
            for k in p.row_ptr[i]..p.row_ptr[i + 1] {
                s += self.values[k] * x[p.col_idx[k]];
            }
            *yi = s;
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.nrows()];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `<A x, y>`.
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        dot(&self.mul_vec(x), y)
    }

    /// `<A c, c>`.
    pub fn quadratic_form(&self, c: &[T]) -> T {
        self.bilinear(c, c)
    }

    pub fn sum(&self) -> T {
        self.values.iter().copied().sum()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, a: T) -> Self {
        Self {
            pattern: self.pattern.clone(),
            values: self.values.iter().map(|&v| a * v).collect(),
            symmetric: self.symmetric,
        }
    }

    /// `self += a * other`; both must share a pattern.
    pub fn axpy(&mut self, a: T, other: &Self) -> Result<()> {
        self.check_pattern(other)?;
        for (v, &o) in self.values.iter_mut().zip(&other.values) {
            *v += a * o;
        }
        self.symmetric &= other.symmetric;
        Ok(())
    }

    /// `sum_k a_k * A_k` over matrices sharing one pattern.
    pub fn linear_combination(terms: &[(T, &Self)]) -> Result<Self> {
        let (first_a, first) = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty linear combination".into()))?;
        let mut out = first.scaled(*first_a);
        for (a, m) in &terms[1..] {
            out.axpy(*a, m)?;
        }
        Ok(out)
    }

    fn check_pattern(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.pattern, &other.pattern) || *self.pattern == *other.pattern {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.nnz(),
                got: other.nnz(),
            })
        }
    }

    /// `max |A - A^T|` over all entries.
    pub fn max_asymmetry(&self) -> T {
        let p = &*self.pattern;
        let mut worst = T::zero();
        for i in 0..p.nrows {
            for k in p.row_ptr[i]..p.row_ptr[i + 1] {
                let j = p.col_idx[k];
                worst = worst.max((self.values[k] - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Transpose. Reuses the pattern when it is structurally symmetric.
    pub fn transpose(&self) -> Self {
        let p = &*self.pattern;
        let structurally_symmetric = p.nrows == p.ncols
            && (0..p.nrows).all(|i| p.row(i).iter().all(|&j| p.find(j, i).is_some()));
        if structurally_symmetric {
            let mut values = vec![T::zero(); self.nnz()];
            for i in 0..p.nrows {
                for k in p.row_ptr[i]..p.row_ptr[i + 1] {
                    let j = p.col_idx[k];
                    values[k] = self.values[p.find(j, i).unwrap()];
                }
            }
            return Self {
                pattern: self.pattern.clone(),
                values,
                symmetric: self.symmetric,
            };
        }
        let mut rows = vec![BTreeSet::new(); p.ncols];
        for i in 0..p.nrows {
            for &j in p.row(i) {
                rows[j].insert(i);
            }
        }
        let mut out = Self::zeros(Arc::new(SparsityPattern::from_rows(p.nrows, rows)), self.symmetric);
        for i in 0..p.nrows {
            for k in p.row_ptr[i]..p.row_ptr[i + 1] {
                out.add(p.col_idx[k], i, self.values[k]);
            }
        }
        out
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.ncols()]; self.nrows()];
        let p = &*self.pattern;
        for (i, row) in d.iter_mut().enumerate() {
            for k in p.row_ptr[i]..p.row_ptr[i + 1] {
                row[p.col_idx[k]] = self.values[k];
            }
        }
        d
    }

    /// Matrix Market coordinate format (`general`, 1-based indices).
    pub fn write_matrix_market<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(out, "{} {} {}", self.nrows(), self.ncols(), self.nnz())?;
        let p = &*self.pattern;
        for i in 0..p.nrows {
            for k in p.row_ptr[i]..p.row_ptr[i + 1] {
                writeln!(out, "{} {} {:.16e}", i + 1, p.col_idx[k] + 1, self.values[k])?;
            }
        }
        Ok(())
    }
}

#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[inline]
pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CsrMatrix<f64> {
        CsrMatrix::from_triplets(3, &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 3.0), (1, 1, 4.0), (2, 2, 5.0), (1, 1, 1.0)], false)
            .unwrap()
    }

    #[test]
    fn triplets_and_matvec() {
        let a = small();
        assert_eq!(a.get(1, 1), 5.0);
        assert_eq!(a.get(2, 0), 0.0);
        assert_eq!(a.mul_vec(&[1.0, 1.0, 1.0]), vec![3.0, 8.0, 5.0]);
        assert_eq!(a.max_asymmetry(), 2.0);
        assert!(CsrMatrix::<f64>::from_triplets(2, &[(2, 0, 1.0)], false).is_err());
    }

    #[test]
    fn transpose_and_combination() {
        let a = small();
        let t = a.transpose();
        assert_eq!(t.get(0, 1), 3.0);
        assert_eq!(t.get(1, 0), 1.0);
        let s = CsrMatrix::linear_combination(&[(1.0, &a), (1.0, &t)]).unwrap();
        assert_eq!(s.max_asymmetry(), 0.0);
        assert!(!s.is_symmetric());
        let other = CsrMatrix::identity(3);
        assert!(a.clone().axpy(1.0, &other).is_err());
    }

    #[test]
    fn non_square_pattern_transpose() {
        let a = CsrMatrix::from_triplets(3, &[(0, 2, 1.0), (1, 0, 2.0)], false).unwrap();
        let t = a.transpose();
        assert_eq!(t.get(2, 0), 1.0);
        assert_eq!(t.get(0, 1), 2.0);
        assert_eq!(t.get(0, 2), 0.0);
    }

    #[test]
    fn mesh_pattern() {
        let m = TriMesh::<f64>::unit_square(1).unwrap();
        let p = SparsityPattern::from_mesh(&m);
        assert_eq!(p.nrows(), 9);
        // Node 0 (lower-left corner) is in both triangles.
        assert_eq!(p.row(0), &[0, 1, 2, 3, 4, 5, 6, 7, 8]);
        // Corner 2 (lower-right) only touches triangle 0.
        assert_eq!(p.row(2), &[0, 1, 2, 4, 5, 8]);
        assert!(p.bandwidth() <= 2 * 3 + 2);
    }

    #[test]
    fn matrix_market_output() {
        let mut buf = Vec::new();
        small().write_matrix_market(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert!(lines.next().unwrap().starts_with("%%MatrixMarket"));
        assert_eq!(lines.next().unwrap(), "3 3 5");
        assert_eq!(lines.next().unwrap(), "1 1 2.0000000000000000e0");
    }
}
