//! Small dense vectors and matrices.
//!
//! Problem sizes here are tiny (ambient dimension 2 or 3, a handful of
//! sensors), so everything is plain row-major storage with textbook
//! algorithms: cyclic Jacobi for symmetric eigenvalues, one-sided Jacobi for
//! singular values, Householder QR for least squares and partial-pivot
//! elimination for square solves.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 64;

/// A point or direction in `R^n`.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector<T>(Vec<T>);

impl<T: Scalar> Vector<T> {
    pub fn new(data: Vec<T>) -> Self {
        Vector(data)
    }

    pub fn zeros(n: usize) -> Self {
        Vector(vec![T::zero(); n])
    }

    pub fn from_slice(data: &[T]) -> Self {
        Vector(data.to_vec())
    }

    /// Unit vector along axis `k`.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[k] = T::one();
        v
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.0.iter()
    }

    #[inline]
    pub fn dot(&self, other: &Self) -> T {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    #[inline]
    pub fn norm_squared(&self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> T {
        self.norm_squared().sqrt()
    }

    /// Euclidean distance to `other` without allocating.
    #[inline]
    pub fn distance(&self, other: &Self) -> T {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b))
            .sqrt()
    }

    pub fn scaled(&self, alpha: T) -> Self {
        Vector(self.0.iter().map(|&a| a * alpha).collect())
    }

    /// `self += alpha * x`
    #[inline]
    pub fn axpy(&mut self, alpha: T, x: &Self) {
        debug_assert_eq!(self.dim(), x.dim());
        for (a, &b) in self.0.iter_mut().zip(&x.0) {
            *a += alpha * b;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> T {
        self.0.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

impl<T> Index<usize> for Vector<T> {
    type Output = T;
    #[inline]
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T> IndexMut<usize> for Vector<T> {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

impl<T: Scalar> From<Vec<T>> for Vector<T> {
    fn from(v: Vec<T>) -> Self {
        Vector(v)
    }
}

impl<'a, T: Scalar> Add<&'a Vector<T>> for &'a Vector<T> {
    type Output = Vector<T>;
    fn add(self, rhs: &'a Vector<T>) -> Vector<T> {
        Vector(self.0.iter().zip(&rhs.0).map(|(&a, &b)| a + b).collect())
    }
}

impl<'a, T: Scalar> Sub<&'a Vector<T>> for &'a Vector<T> {
    type Output = Vector<T>;
    fn sub(self, rhs: &'a Vector<T>) -> Vector<T> {
        Vector(self.0.iter().zip(&rhs.0).map(|(&a, &b)| a - b).collect())
    }
}

impl<T: Scalar> AddAssign<&Vector<T>> for Vector<T> {
    fn add_assign(&mut self, rhs: &Vector<T>) {
        self.axpy(T::one(), rhs);
    }
}

impl<T: Scalar> SubAssign<&Vector<T>> for Vector<T> {
    fn sub_assign(&mut self, rhs: &Vector<T>) {
        self.axpy(-T::one(), rhs);
    }
}

impl<T: Scalar> Mul<T> for &Vector<T> {
    type Output = Vector<T>;
    fn mul(self, rhs: T) -> Vector<T> {
        self.scaled(rhs)
    }
}

impl<T: Scalar> Neg for &Vector<T> {
    type Output = Vector<T>;
    fn neg(self) -> Vector<T> {
        self.scaled(-T::one())
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from equally sized rows.
    pub fn from_rows(rows: &[Vector<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vector::dim);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.dim() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.dim(),
                });
            }
            data.extend_from_slice(r.as_slice());
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
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

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &Vector<T>) -> Vector<T> {
        debug_assert_eq!(self.cols, x.dim());
        Vector::new(
            (0..self.rows)
                .map(|i| {
                    self.row(i)
                        .iter()
                        .zip(x.iter())
                        .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
                })
                .collect(),
        )
    }

    /// `self += alpha * u v^T`
    pub fn add_outer(&mut self, alpha: T, u: &Vector<T>, v: &Vector<T>) {
        debug_assert_eq!(self.rows, u.dim());
        debug_assert_eq!(self.cols, v.dim());
        for i in 0..self.rows {
            let ui = alpha * u[i];
            for j in 0..self.cols {
                self.data[i * self.cols + j] += ui * v[j];
            }
        }
    }

    /// `self += alpha * I` on the leading square block.
    pub fn add_diagonal(&mut self, alpha: T) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)] += alpha;
        }
    }

    pub fn scale_in_place(&mut self, alpha: T) {
        for v in &mut self.data {
            *v *= alpha;
        }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn max_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
///
/// Only the upper triangle is trusted; the input is symmetrized first.
pub fn symmetric_eigenvalues<T: Scalar>(m: &Matrix<T>) -> Vec<T> {
    assert_eq!(
        m.rows(),
        m.cols(),
        "symmetric eigenvalues need a square matrix"
    );
    let n = m.rows();
    let mut a = m.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            a[(j, i)] = a[(i, j)];
        }
    }
    if n == 1 {
        return vec![a[(0, 0)]];
    }

    let eps = T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        let mut total = T::zero();
        for i in 0..n {
            for j in 0..n {
                let v = a[(i, j)] * a[(i, j)];
                total += v;
                if i != j {
                    off += v;
                }
            }
        }
        if off <= eps * eps * total {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (T::of(2.0) * apq);
                let t = if theta.is_infinite() {
                    T::zero()
                } else {
                    let sign = if theta >= T::zero() {
                        T::one()
                    } else {
                        -T::one()
                    };
                    sign / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                rotate(&mut a, p, q, c, s);
                a[(p, q)] = T::zero();
                a[(q, p)] = T::zero();
            }
        }
    }

    let mut eig: Vec<T> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    eig
}

#[inline]
fn rotate<T: Scalar>(a: &mut Matrix<T>, p: usize, q: usize, c: T, s: T) {
    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
}

/// `(lambda_min, lambda_max)` of a symmetric matrix.
pub fn symmetric_extremes<T: Scalar>(m: &Matrix<T>) -> (T, T) {
    let eig = symmetric_eigenvalues(m);
    (eig[0], eig[eig.len() - 1])
}

/// Singular values in descending order (one-sided Jacobi).
///
/// Accurate to high relative precision even for nearly rank-deficient input,
/// which the Gram-matrix route is not.
pub fn singular_values<T: Scalar>(m: &Matrix<T>) -> Vec<T> {
    let work = if m.rows() >= m.cols() {
        m.clone()
    } else {
        m.transpose()
    };
    let (rows, cols) = (work.rows(), work.cols());
    // columns stored contiguously for the column rotations
    let mut u: Vec<Vec<T>> = (0..cols)
        .map(|j| (0..rows).map(|i| work[(i, j)]).collect())
        .collect();
    let eps = T::epsilon();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let (alpha, beta, gamma) = u[p]
                    .iter()
                    .zip(&u[q])
                    .fold((T::zero(), T::zero(), T::zero()), |(a, b, g), (&x, &y)| {
                        (a + x * x, b + y * y, g + x * y)
                    });
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::of(2.0) * gamma);
                let sign = if zeta >= T::zero() {
                    T::one()
                } else {
                    -T::one()
                };
                let t = sign / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let (head, tail) = u.split_at_mut(q);
                for (x, y) in head[p].iter_mut().zip(tail[0].iter_mut()) {
                    let (a, b) = (*x, *y);
                    *x = c * a - s * b;
                    *y = s * a + c * b;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<T> = u
        .iter()
        .map(|col| col.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt())
        .collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Solves the square system `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve<T: Scalar>(a: &Matrix<T>, b: &Vector<T>) -> Result<Vector<T>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.cols(),
        });
    }
    if b.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.dim(),
        });
    }
    let mut m = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| {
                m[(i, k)]
                    .abs()
                    .partial_cmp(&m[(j, k)].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(k);
        if m[(pivot, k)] == T::zero() || !m[(pivot, k)].is_finite() {
            return Err(Error::Singular);
        }
        if pivot != k {
            for j in 0..n {
                let tmp = m[(k, j)];
                m[(k, j)] = m[(pivot, j)];
                m[(pivot, j)] = tmp;
            }
            let tmp = x[k];
            x[k] = x[pivot];
            x[pivot] = tmp;
        }
        for i in (k + 1)..n {
            let f = m[(i, k)] / m[(k, k)];
            if f == T::zero() {
                continue;
            }
            for j in k..n {
                let mkj = m[(k, j)];
                m[(i, j)] -= f * mkj;
            }
            let xk = x[k];
            x[i] -= f * xk;
        }
    }
    for k in (0..n).rev() {
        let mut acc = x[k];
        for j in (k + 1)..n {
            acc -= m[(k, j)] * x[j];
        }
        x[k] = acc / m[(k, k)];
    }
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Singular)
    }
}

/// Minimizes `||a x - b||` for a tall, full-column-rank `a` via Householder QR.
pub fn least_squares<T: Scalar>(a: &Matrix<T>, b: &Vector<T>) -> Result<Vector<T>> {
    let (rows, cols) = (a.rows(), a.cols());
    if b.dim() != rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            got: b.dim(),
        });
    }
    if rows < cols {
        return Err(Error::Singular);
    }
    let mut r = a.clone();
    let mut qtb = b.clone();
    let scale = r.max_abs();
    for k in 0..cols {
        let norm = (k..rows)
            .fold(T::zero(), |acc, i| acc + r[(i, k)] * r[(i, k)])
            .sqrt();
        if norm == T::zero() {
            return Err(Error::Singular);
        }
        let alpha = if r[(k, k)] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = (k..rows).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vv = v.iter().fold(T::zero(), |acc, &x| acc + x * x);
        if vv == T::zero() {
            continue;
        }
        let two = T::of(2.0);
        for j in k..cols {
            let d = (k..rows).fold(T::zero(), |acc, i| acc + v[i - k] * r[(i, j)]);
            let f = two * d / vv;
            for i in k..rows {
                r[(i, j)] -= f * v[i - k];
            }
        }
        let d = (k..rows).fold(T::zero(), |acc, i| acc + v[i - k] * qtb[i]);
        let f = two * d / vv;
        for i in k..rows {
            qtb[i] -= f * v[i - k];
        }
    }
    let tiny = scale * T::epsilon() * T::of(cols.max(rows) as f64);
    let mut x = Vector::zeros(cols);
    for k in (0..cols).rev() {
        if r[(k, k)].abs() <= tiny {
            return Err(Error::Singular);
        }
        let mut acc = qtb[k];
        for j in (k + 1)..cols {
            acc -= r[(k, j)] * x[j];
        }
        x[k] = acc / r[(k, k)];
    }
    Ok(x)
}
