//! Small dense linear algebra: vectors, square matrices, ℓ1 norms and an LU solver.
//!
//! Everything here is sized for clearing problems with at most a few hundred
//! firms, so storage is plain row-major `Vec<f64>` and the solver is a direct
//! LU factorization with partial pivoting.

use std::fmt;
use std::ops::{Add, Deref, Index, IndexMut, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Pivots smaller than this (in magnitude) are treated as exact zeros.
pub const PIVOT_THRESHOLD: f64 = 1e-14;

/// Relative residual bound guaranteed by [`solve_linear`] on well-conditioned input.
pub const SOLVE_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("singular matrix: pivot {pivot:e} in column {column} is below {PIVOT_THRESHOLD:e}")]
    SingularMatrix { column: usize, pivot: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix rows have unequal lengths")]
    Ragged,
}

/// A dense real vector of fixed length.
#[derive(Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn zeros(n: usize) -> Self {
        Vector(vec![0.0; n])
    }

    pub fn filled(n: usize, value: f64) -> Self {
        Vector(vec![value; n])
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> f64) -> Self {
        Vector((0..n).map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Σ|v_i|.
    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|x| x.abs()).sum()
    }

    pub fn l1_distance(&self, other: &Vector) -> f64 {
        self.zip_check(other);
        self.0.iter().zip(&other.0).map(|(x, y)| (x - y).abs()).sum()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Vector {
        Vector(self.0.iter().map(|&x| f(x)).collect())
    }

    pub fn zip_map(&self, other: &Vector, f: impl Fn(f64, f64) -> f64) -> Vector {
        self.zip_check(other);
        Vector(self.0.iter().zip(&other.0).map(|(&x, &y)| f(x, y)).collect())
    }

    /// Elementwise minimum.
    pub fn min(&self, other: &Vector) -> Vector {
        self.zip_map(other, f64::min)
    }

    /// Elementwise maximum.
    pub fn max(&self, other: &Vector) -> Vector {
        self.zip_map(other, f64::max)
    }

    /// Elementwise positive part `(v)⁺`.
    pub fn positive_part(&self) -> Vector {
        self.map(|x| x.max(0.0))
    }

    pub fn scale(&self, factor: f64) -> Vector {
        self.map(|x| x * factor)
    }

    /// `self ≤ other + tol` componentwise.
    pub fn le_within(&self, other: &Vector, tol: f64) -> bool {
        self.zip_check(other);
        self.0.iter().zip(&other.0).all(|(x, y)| *x <= *y + tol)
    }

    pub fn min_entry(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn concat(&self, other: &Vector) -> Vector {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Vector(v)
    }

    fn zip_check(&self, other: &Vector) {
        assert_eq!(self.len(), other.len(), "vector length mismatch");
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl<const N: usize> From<[f64; N]> for Vector {
    fn from(v: [f64; N]) -> Self {
        Vector(v.to_vec())
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for &Vector {
    type Output = Vector;

    fn add(self, rhs: &Vector) -> Vector {
        self.zip_map(rhs, |x, y| x + y)
    }
}

impl Sub for &Vector {
    type Output = Vector;

    fn sub(self, rhs: &Vector) -> Vector {
        self.zip_map(rhs, |x, y| x - y)
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

/// A dense `n × n` matrix stored row-major, indexed as `m[(i, j)]`.
#[derive(Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        SquareMatrix { n, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(LinalgError::Ragged);
            }
            data.extend_from_slice(row);
        }
        Ok(SquareMatrix { n, data })
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &x) in entries.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n];
        for i in 0..self.n {
            for (s, x) in sums.iter_mut().zip(self.row(i)) {
                *s += x;
            }
        }
        sums
    }

    /// Induced ℓ1 norm: the largest absolute column sum.
    pub fn l1_norm(&self) -> f64 {
        let mut sums = vec![0.0; self.n];
        for i in 0..self.n {
            for (s, x) in sums.iter_mut().zip(self.row(i)) {
                *s += x.abs();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, v: &Vector) -> Vector {
        assert_eq!(v.len(), self.n, "matrix-vector dimension mismatch");
        Vector::from_fn(self.n, |i| {
            self.row(i).iter().zip(v.iter()).map(|(a, b)| a * b).sum()
        })
    }

    pub fn mul_mat(&self, other: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, other.n, "matrix dimension mismatch");
        let n = self.n;
        let mut out = SquareMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, other.n, "matrix dimension mismatch");
        SquareMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, other.n, "matrix dimension mismatch");
        SquareMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, factor: f64) -> SquareMatrix {
        SquareMatrix {
            n: self.n,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }
}

impl Index<(usize, usize)> for SquareMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for SquareMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries((0..self.n).map(|i| self.row(i)))
            .finish()
    }
}

/// LU factors `P·A = L·U` packed into one matrix, with the row permutation.
#[derive(Debug, Clone)]
pub struct Lu {
    factors: SquareMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &SquareMatrix) -> Result<Lu, LinalgError> {
        let n = a.n;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[(i, k)]))
                .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
                .expect("non-empty pivot column");
            if pivot.abs() < PIVOT_THRESHOLD || !pivot.is_finite() {
                return Err(LinalgError::SingularMatrix { column: k, pivot });
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let (upper, lower) = lu.data.split_at_mut((k + 1) * n);
            let pivot_row = &upper[k * n..(k + 1) * n];
            for row in lower.chunks_exact_mut(n) {
                let factor = row[k] / pivot;
                row[k] = factor;
                if factor != 0.0 {
                    for (x, u) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                        *x -= factor * u;
                    }
                }
            }
        }
        Ok(Lu { factors: lu, perm })
    }

    pub fn solve(&self, b: &Vector) -> Result<Vector, LinalgError> {
        let n = self.factors.n;
        if b.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.factors.row(i);
            let s: f64 = row[..i].iter().zip(&x[..i]).map(|(l, y)| l * y).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.factors.row(i);
            let s: f64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(u, y)| u * y).sum();
            x[i] = (x[i] - s) / row[i];
        }
        Ok(Vector(x))
    }
}

/// Solves `A·x = b` by LU factorization with partial pivoting.
pub fn solve_linear(a: &SquareMatrix, b: &Vector) -> Result<Vector, LinalgError> {
    if b.len() != a.dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.dim(),
            found: b.len(),
        });
    }
    Lu::factor(a)?.solve(b)
}

/// Solves `(I − M[P,P])·x = rhs` on the principal submatrix indexed by `members`.
pub fn solve_identity_minus_principal(
    m: &SquareMatrix,
    members: &[usize],
    rhs: &[f64],
) -> Result<Vec<f64>, LinalgError> {
    let k = members.len();
    if rhs.len() != k {
        return Err(LinalgError::DimensionMismatch {
            expected: k,
            found: rhs.len(),
        });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let sub = SquareMatrix::from_fn(k, |p, q| {
        let v = m[(members[p], members[q])];
        if p == q {
            1.0 - v
        } else {
            -v
        }
    });
    Ok(Lu::factor(&sub)?.solve(&Vector::from(rhs.to_vec()))?.into_vec())
}

/// Nonnegative entries (within `tol`) and every column sum at most `1 + tol`.
pub fn is_left_substochastic(m: &SquareMatrix, tol: f64) -> bool {
    m.entries().iter().all(|&x| x >= -tol) && m.column_sums().into_iter().all(|s| s <= 1.0 + tol)
}

/// `‖(I − M)·Σ_{k=0..terms} M^k − I‖₁`; small values certify that the Neumann
/// series of `M` converges to `(I − M)⁻¹`.
pub fn neumann_inverse_check(m: &SquareMatrix, terms: usize) -> f64 {
    let n = m.dim();
    let identity = SquareMatrix::identity(n);
    let mut power = identity.clone();
    let mut partial = identity.clone();
    for _ in 0..terms {
        power = power.mul_mat(m);
        partial = partial.add(&power);
    }
    identity.sub(m).mul_mat(&partial).sub(&identity).l1_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn vector_norms() {
        assert_eq!(Vector::from([0.0, 0.0, 0.0]).l1_norm(), 0.0);
        assert_eq!(Vector::from([1.0, -2.0, 3.0]).l1_norm(), 6.0);
        assert_eq!(Vector::from([0.5, 0.5]).l1_norm(), 1.0);
    }

    #[test]
    fn matrix_norms() {
        assert_eq!(SquareMatrix::identity(2).l1_norm(), 1.0);
        let m = SquareMatrix::from_rows(&[vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap();
        assert_eq!(m.l1_norm(), 0.5);
        assert_eq!(SquareMatrix::zeros(3).l1_norm(), 0.0);
    }

    #[test]
    fn elementwise_ops() {
        let a = Vector::from([1.0, -2.0, 3.0]);
        let b = Vector::from([0.5, 0.0, 4.0]);
        assert_eq!(a.min(&b), Vector::from([0.5, -2.0, 3.0]));
        assert_eq!(a.max(&b), Vector::from([1.0, 0.0, 4.0]));
        assert_eq!(a.positive_part(), Vector::from([1.0, 0.0, 3.0]));
    }

    #[test]
    fn solve_identity() {
        let x = solve_linear(&SquareMatrix::identity(2), &Vector::from([3.0, 4.0])).unwrap();
        assert_eq!(x, Vector::from([3.0, 4.0]));
    }

    #[test]
    fn solve_upper_triangular() {
        let a = SquareMatrix::from_rows(&[vec![1.0, -0.5], vec![0.0, 1.0]]).unwrap();
        let b = Vector::from([0.0, 0.5]);
        let x = solve_linear(&a, &b).unwrap();
        assert_abs_diff_eq!(x[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(x[1], 0.5, epsilon = 1e-15);
        let residual = (&a.mul_vec(&x) - &b).l1_norm();
        assert!(residual <= SOLVE_REL_TOL * (a.l1_norm() * x.l1_norm() + b.l1_norm()));
    }

    #[test]
    fn solve_singular() {
        let err = solve_linear(&SquareMatrix::zeros(2), &Vector::from([1.0, 2.0])).unwrap_err();
        assert!(matches!(err, LinalgError::SingularMatrix { column: 0, .. }));
    }

    #[test]
    fn solve_needs_pivoting() {
        let a = SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let x = solve_linear(&a, &Vector::from([2.0, 3.0])).unwrap();
        assert_eq!(x, Vector::from([3.0, 2.0]));
    }

    #[test]
    fn solve_dimension_mismatch() {
        let err = solve_linear(&SquareMatrix::identity(2), &Vector::from([1.0])).unwrap_err();
        assert_eq!(err, LinalgError::DimensionMismatch { expected: 2, found: 1 });
    }

    #[test]
    fn principal_solve_matches_full_solve() {
        let m = SquareMatrix::from_rows(&[
            vec![0.0, 0.2, 0.3],
            vec![0.4, 0.0, 0.1],
            vec![0.1, 0.5, 0.0],
        ])
        .unwrap();
        let x = solve_identity_minus_principal(&m, &[0, 2], &[1.0, 2.0]).unwrap();
        let sub = SquareMatrix::from_rows(&[vec![1.0, -0.3], vec![-0.1, 1.0]]).unwrap();
        let y = solve_linear(&sub, &Vector::from([1.0, 2.0])).unwrap();
        assert_abs_diff_eq!(x[0], y[0], epsilon = 1e-15);
        assert_abs_diff_eq!(x[1], y[1], epsilon = 1e-15);
        assert!(solve_identity_minus_principal(&m, &[], &[]).unwrap().is_empty());
    }

    #[test]
    fn substochastic_checks() {
        let ok = SquareMatrix::from_rows(&[vec![0.0, 0.9], vec![0.9, 0.0]]).unwrap();
        let heavy = SquareMatrix::from_rows(&[vec![0.0, 1.1], vec![0.0, 0.0]]).unwrap();
        let negative = SquareMatrix::from_rows(&[vec![-0.1, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!(is_left_substochastic(&ok, 1e-12));
        assert!(!is_left_substochastic(&heavy, 1e-12));
        assert!(!is_left_substochastic(&negative, 1e-12));
    }

    #[test]
    fn neumann_zero_matrix() {
        assert_eq!(neumann_inverse_check(&SquareMatrix::zeros(3), 1), 0.0);
    }

    #[test]
    fn neumann_contracting() {
        let m = SquareMatrix::from_rows(&[vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap();
        // remainder is M^51, whose norm is 0.5^51
        let value = neumann_inverse_check(&m, 50);
        assert!(value < 1e-10, "{value}");
        assert_abs_diff_eq!(value, 0.5f64.powi(51), epsilon = 1e-15);
    }

    #[test]
    fn neumann_singular_does_not_decay() {
        let m = SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(neumann_inverse_check(&m, 10) >= 1.0);
    }
}
