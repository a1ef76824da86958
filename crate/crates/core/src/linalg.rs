//! Small dense integer matrices with exact determinant and rank.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> IntMatrix {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> IntMatrix {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from rows; all rows must have equal length.
    pub fn from_rows<T: Clone + Into<BigInt>>(rows: &[Vec<T>]) -> Result<IntMatrix> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::Dimension { expected: c, got: row.len() });
            }
            data.extend(row.iter().cloned().map(Into::into));
        }
        Ok(IntMatrix { rows: r, cols: c, data })
    }

    pub fn diagonal<T: Clone + Into<BigInt>>(diag: &[T]) -> IntMatrix {
        let n = diag.len();
        let mut m = IntMatrix::zeros(n, n);
        for (i, v) in diag.iter().enumerate() {
            m[(i, i)] = v.clone().into();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "matrix shape mismatch");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * &other[(k, j)];
                }
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> IntMatrix {
        let mut m = IntMatrix::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                m[(a, b)] = self[(i, j)].clone();
            }
        }
        m
    }

    /// Determinant by fraction-free (Bareiss) elimination with row pivoting.
    pub fn det(&self) -> BigInt {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !a[(i, k)].is_zero()) {
                    Some(i) => {
                        a.swap_rows(i, k);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)]) / &prev;
                    a[(i, j)] = v;
                }
            }
            prev = a[(k, k)].clone();
        }
        sign * a[(n - 1, n - 1)].clone()
    }

    /// Rank over ℚ.
    pub fn rank(&self) -> usize {
        let mut a = self.clone();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(pivot) = (rank..self.rows).find(|&i| !a[(i, col)].is_zero()) else {
                continue;
            };
            a.swap_rows(pivot, rank);
            for i in rank + 1..self.rows {
                if a[(i, col)].is_zero() {
                    continue;
                }
                let f = a[(i, col)].clone();
                let p = a[(rank, col)].clone();
                for j in col..self.cols {
                    let v = &a[(i, j)] * &p - &a[(rank, j)] * &f;
                    a[(i, j)] = v;
                }
            }
            rank += 1;
            if rank == self.rows {
                break;
            }
        }
        rank
    }

    /// Leading principal minors `det(A[..k, ..k])` for `k = 1..=n`.
    pub fn leading_principal_minors(&self) -> Vec<BigInt> {
        assert!(self.is_square());
        (1..=self.rows)
            .map(|k| {
                let idx: Vec<usize> = (0..k).collect();
                self.submatrix(&idx, &idx).det()
            })
            .collect()
    }

    /// Sylvester's criterion: symmetric and all leading minors positive.
    pub fn is_positive_definite(&self) -> bool {
        self.is_symmetric() && self.leading_principal_minors().iter().all(|m| m.is_positive())
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub(crate) fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// Inverse over ℚ; `None` if singular.
    pub fn inverse_rational(&self) -> Option<Vec<Vec<BigRational>>> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                let mut row: Vec<BigRational> =
                    self.row(i).iter().map(|v| BigRational::from_integer(v.clone())).collect();
                row.extend((0..n).map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                }));
                row
            })
            .collect();
        for col in 0..n {
            let pivot = (col..n).find(|&i| !a[i][col].is_zero())?;
            a.swap(pivot, col);
            let p = a[col][col].clone();
            for v in a[col].iter_mut() {
                *v = &*v / &p;
            }
            for i in 0..n {
                if i == col || a[i][col].is_zero() {
                    continue;
                }
                let f = a[i][col].clone();
                for j in 0..2 * n {
                    let v = &a[col][j] * &f;
                    a[i][j] -= v;
                }
            }
        }
        Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries((0..self.rows).map(|i| self.row(i))).finish()
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for i in 0..self.rows {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("[")?;
            for (j, v) in self.row(i).iter().enumerate() {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{v}")?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

/// Exact `LDLᵀ` factorisation of a positive definite symmetric matrix:
/// returns pivots `d_k > 0` and the strictly upper factors `μ_{kl}` (k < l)
/// with `xᵀAx = Σ_k d_k (x_k + Σ_{l>k} μ_{kl} x_l)²`.
pub fn ldl_rational(a: &IntMatrix) -> Option<(Vec<BigRational>, Vec<Vec<BigRational>>)> {
    let n = a.rows();
    let mut q: Vec<Vec<BigRational>> = (0..n)
        .map(|i| a.row(i).iter().map(|v| BigRational::from_integer(v.clone())).collect())
        .collect();
    let mut d = Vec::with_capacity(n);
    let mut mu = vec![vec![BigRational::zero(); n]; n];
    for k in 0..n {
        let pivot = q[k][k].clone();
        if !pivot.is_positive() {
            return None;
        }
        for l in k + 1..n {
            mu[k][l] = &q[k][l] / &pivot;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &mu[k][i] * &q[k][j];
                q[i][j] -= v;
            }
        }
        d.push(pivot);
    }
    Some((d, mu))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn determinant_and_rank() {
        assert_eq!(m(&[&[2, 1], &[0, 2]]).det(), BigInt::from(4));
        assert_eq!(m(&[&[0, 1], &[1, 0]]).det(), BigInt::from(-1));
        assert_eq!(m(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]).det(), BigInt::zero());
        assert_eq!(m(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]).rank(), 2);
        assert_eq!(m(&[&[1, 0, 0], &[0, 0, 0], &[0, 0, 0]]).rank(), 1);
        assert_eq!(IntMatrix::identity(4).rank(), 4);
    }

    #[test]
    fn sylvester() {
        assert!(m(&[&[1, 0], &[0, 1]]).is_positive_definite());
        assert!(!m(&[&[1, 2], &[2, 1]]).is_positive_definite());
        assert_eq!(m(&[&[1, 2], &[2, 1]]).leading_principal_minors()[1], BigInt::from(-3));
    }

    #[test]
    fn ldl_reconstructs_form() {
        let a = m(&[&[4, 2, 1], &[2, 5, 3], &[1, 3, 6]]);
        let (d, mu) = ldl_rational(&a).unwrap();
        let x = [3i64, -1, 2];
        let mut direct = BigInt::zero();
        for i in 0..3 {
            for j in 0..3 {
                direct += &a[(i, j)] * x[i] * x[j];
            }
        }
        let mut via = BigRational::zero();
        for k in 0..3 {
            let mut t = BigRational::from_integer(x[k].into());
            for l in k + 1..3 {
                t += &mu[k][l] * BigRational::from_integer(x[l].into());
            }
            via += &d[k] * &t * &t;
        }
        assert_eq!(via, BigRational::from_integer(direct));
    }

    #[test]
    fn rational_inverse() {
        let a = m(&[&[2, 1], &[0, 2]]);
        let inv = a.inverse_rational().unwrap();
        assert_eq!(inv[0][1], BigRational::new((-1).into(), 4.into()));
        assert!(m(&[&[1, 2], &[2, 4]]).inverse_rational().is_none());
    }
}
