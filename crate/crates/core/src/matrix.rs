//! Dense complex matrices in column-major order.
//!
//! Modulation matrices are banded: every column is a shifted, modulated copy
//! of a finite prototype, so most entries are exactly zero. Each column keeps
//! the index range of its nonzero entries and the products below only touch
//! that range. The results are the same as for a plain dense product.

use std::ops::Range;

use num_complex::Complex;

use crate::error::{check_len, Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
    support: Vec<Range<usize>>,
}

fn nonzero_span<T: Real>(col: &[Complex<T>]) -> Range<usize> {
    let zero = Complex::new(T::zero(), T::zero());
    match col.iter().position(|v| *v != zero) {
        None => 0..0,
        Some(first) => {
            let last = col.iter().rposition(|v| *v != zero).unwrap_or(first);
            first..last + 1
        }
    }
}

impl<T: Real> CMatrix<T> {
    /// Builds a matrix from column-major data.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length must be rows*cols");
        let support = data
            .chunks(rows.max(1))
            .take(cols)
            .map(nonzero_span)
            .collect::<Vec<_>>();
        // rows == 0 leaves chunks empty; pad so `support` always has one entry per column.
        let mut support = support;
        support.resize(cols, 0..0);
        Self {
            rows,
            cols,
            data,
            support,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for c in 0..cols {
            for r in 0..rows {
                data.push(f(r, c));
            }
        }
        Self::from_col_major(rows, cols, data)
    }

    /// Builds a matrix whose `c`-th column is `columns[c]`.
    pub fn from_columns(rows: usize, columns: &[Vec<Complex<T>>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * columns.len());
        for col in columns {
            check_len("matrix column", rows, col.len())?;
            data.extend_from_slice(col);
        }
        Ok(Self::from_col_major(rows, columns.len(), data))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_col_major(rows, cols, vec![Complex::new(T::zero(), T::zero()); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| {
            if r == c {
                Complex::new(T::one(), T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.data[c * self.rows + r]
    }

    #[inline]
    pub fn column(&self, c: usize) -> &[Complex<T>] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    /// Row range holding every nonzero entry of column `c`.
    #[inline]
    pub fn column_support(&self, c: usize) -> Range<usize> {
        self.support[c].clone()
    }

    /// Column-major storage.
    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    /// `self * x`.
    pub fn mul_vec(&self, x: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        check_len("matrix-vector product", self.cols, x.len())?;
        let mut y = vec![Complex::new(T::zero(), T::zero()); self.rows];
        for (c, &xc) in x.iter().enumerate() {
            if xc.re == T::zero() && xc.im == T::zero() {
                continue;
            }
            let span = self.column_support(c);
            let col = &self.column(c)[span.clone()];
            for (acc, a) in y[span].iter_mut().zip(col) {
                *acc = *acc + *a * xc;
            }
        }
        Ok(y)
    }

    /// `self * x` for a real-valued vector `x`.
    pub fn mul_real_vec(&self, x: &[T]) -> Result<Vec<Complex<T>>> {
        check_len("matrix-vector product", self.cols, x.len())?;
        let mut y = vec![Complex::new(T::zero(), T::zero()); self.rows];
        for (c, &xc) in x.iter().enumerate() {
            if xc == T::zero() {
                continue;
            }
            let span = self.column_support(c);
            let col = &self.column(c)[span.clone()];
            for (acc, a) in y[span].iter_mut().zip(col) {
                acc.re = acc.re + a.re * xc;
                acc.im = acc.im + a.im * xc;
            }
        }
        Ok(y)
    }

    /// `self^H * y`, evaluated column by column without forming the adjoint.
    pub fn adjoint_mul_vec(&self, y: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        check_len("adjoint-vector product", self.rows, y.len())?;
        Ok((0..self.cols)
            .map(|c| {
                let span = self.column_support(c);
                self.column(c)[span.clone()]
                    .iter()
                    .zip(&y[span])
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (a, v)| {
                        acc + a.conj() * v
                    })
            })
            .collect())
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        check_len("matrix product", self.cols, other.rows)?;
        let mut data = Vec::with_capacity(self.rows * other.cols);
        for c in 0..other.cols {
            data.extend(self.mul_vec(other.column(c))?);
        }
        Ok(Self::from_col_major(self.rows, other.cols, data))
    }

    /// Adds `s` to every diagonal entry.
    pub fn add_diagonal(&self, s: T) -> Self {
        let mut data = self.data.clone();
        for i in 0..self.rows.min(self.cols) {
            let v = &mut data[i * self.rows + i];
            v.re = v.re + s;
        }
        Self::from_col_major(self.rows, self.cols, data)
    }

    /// Scales row `r` by `scale[r]`.
    pub fn scale_rows(&self, scale: &[Complex<T>]) -> Result<Self> {
        check_len("row scaling", self.rows, scale.len())?;
        Ok(Self::from_fn(self.rows, self.cols, |r, c| self.get(r, c) * scale[r]))
    }

    pub fn diagonal(&self) -> Vec<Complex<T>> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch {
                context: "matrix inverse (square)",
                expected: self.rows,
                actual: self.cols,
            });
        }
        let n = self.rows;
        let scale = self
            .data
            .iter()
            .map(|v| v.norm())
            .fold(T::zero(), T::max);
        if scale == T::zero() {
            return Err(Error::Singular {
                column: 0,
                pivot: 0.0,
            });
        }
        let tol = scale * T::epsilon() * T::from_count(n.max(1)) * T::lit(1e3);

        // Row-major working copies: elimination walks rows.
        let mut a: Vec<Complex<T>> = (0..n * n).map(|i| self.get(i / n, i % n)).collect();
        let mut inv = Self::identity(n).data;
        for col in 0..n {
            let (piv_row, piv_mag) = (col..n)
                .map(|r| (r, a[r * n + col].norm()))
                .fold((col, T::neg_infinity()), |best, cur| {
                    if cur.1 > best.1 {
                        cur
                    } else {
                        best
                    }
                });
            if !(piv_mag > tol) {
                return Err(Error::Singular {
                    column: col,
                    pivot: piv_mag.to_f64_lossy(),
                });
            }
            if piv_row != col {
                for j in 0..n {
                    a.swap(piv_row * n + j, col * n + j);
                    inv.swap(piv_row * n + j, col * n + j);
                }
            }
            let p = a[col * n + col].inv();
            for j in 0..n {
                a[col * n + j] = a[col * n + j] * p;
                inv[col * n + j] = inv[col * n + j] * p;
            }
            let (pivot_a, pivot_inv): (Vec<_>, Vec<_>) = (0..n)
                .map(|j| (a[col * n + j], inv[col * n + j]))
                .unzip();
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r * n + col];
                if f.re == T::zero() && f.im == T::zero() {
                    continue;
                }
                let row_a = &mut a[r * n..(r + 1) * n];
                for (x, pa) in row_a.iter_mut().zip(&pivot_a) {
                    *x = *x - f * pa;
                }
                let row_inv = &mut inv[r * n..(r + 1) * n];
                for (x, pi) in row_inv.iter_mut().zip(&pivot_inv) {
                    *x = *x - f * pi;
                }
            }
        }
        // The identity was built column-major but is symmetric, so `inv` is a
        // valid row-major array; transpose back into column-major storage.
        Ok(Self::from_fn(n, n, |r, c| inv[r * n + c]))
    }

    /// Largest elementwise `|self - other|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        check_len("matrix comparison (rows)", self.rows, other.rows)?;
        check_len("matrix comparison (cols)", self.cols, other.cols)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max))
    }

    /// Largest elementwise deviation from the identity.
    pub fn identity_error(&self) -> T {
        let mut worst = T::zero();
        for c in 0..self.cols {
            for r in 0..self.rows {
                let target = if r == c { T::one() } else { T::zero() };
                let v = self.get(r, c);
                worst = worst.max((v - Complex::new(target, T::zero())).norm());
            }
        }
        worst
    }

    /// Squared norm of every column.
    pub fn column_energies(&self) -> Vec<T> {
        (0..self.cols)
            .map(|c| self.column(c).iter().map(|v| v.norm_sqr()).sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn support_tracks_nonzero_band() {
        let m = CMatrix::from_columns(
            4,
            &[
                vec![c(0., 0.), c(1., 0.), c(0., 2.), c(0., 0.)],
                vec![c(0., 0.); 4],
            ],
        )
        .unwrap();
        assert_eq!(m.column_support(0), 1..3);
        assert_eq!(m.column_support(1), 0..0);
    }

    #[test]
    fn inverse_of_small_matrix() {
        let a = CMatrix::from_col_major(2, 2, vec![c(1., 1.), c(0., 2.), c(3., 0.), c(1., -1.)]);
        let inv = a.inverse().unwrap();
        let prod = inv.matmul(&a).unwrap();
        assert!(prod.identity_error() < 1e-14);
        let prod = a.matmul(&inv).unwrap();
        assert!(prod.identity_error() < 1e-14);
    }

    #[test]
    fn inverse_needs_pivoting() {
        let a = CMatrix::from_col_major(2, 2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let inv = a.inverse().unwrap();
        assert!(inv.matmul(&a).unwrap().identity_error() < 1e-15);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = CMatrix::from_col_major(2, 2, vec![c(1., 0.), c(2., 0.), c(2., 0.), c(4., 0.)]);
        assert!(matches!(a.inverse(), Err(Error::Singular { .. })));
    }

    #[test]
    fn adjoint_products_agree() {
        let a = CMatrix::from_fn(5, 3, |r, k| c((r * 3 + k) as f64 * 0.1, (r as f64) - k as f64));
        let y: Vec<C> = (0..5).map(|i| c(i as f64, 1.0 - i as f64)).collect();
        let direct = a.adjoint().mul_vec(&y).unwrap();
        let fused = a.adjoint_mul_vec(&y).unwrap();
        for (p, q) in direct.iter().zip(&fused) {
            assert!((p - q).norm() < 1e-12);
        }
    }

    #[test]
    fn real_vector_product_matches_complex_product() {
        let a = CMatrix::from_fn(4, 4, |r, k| c(r as f64 + 0.5, k as f64 - 1.0));
        let x = [0.3, -1.0, 0.0, 2.0];
        let xc: Vec<C> = x.iter().map(|&v| c(v, 0.0)).collect();
        let p = a.mul_real_vec(&x).unwrap();
        let q = a.mul_vec(&xc).unwrap();
        for (u, v) in p.iter().zip(&q) {
            assert!((u - v).norm() < 1e-14);
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = CMatrix::<f64>::identity(3);
        assert!(matches!(
            a.mul_vec(&[c(1., 0.)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
