//! Smith normal form of square nonsingular integer matrices.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::linalg::IntMatrix;
use crate::{Error, Result};

/// `U·C·V = D` with `U`, `V` unimodular and `D = diag(γ₁, …, γ_m)`,
/// `γ_i > 0`, `γ_i | γ_{i+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnfResult {
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub d: IntMatrix,
}

impl SnfResult {
    /// The invariant factors `γ₁, …, γ_m`.
    pub fn invariants(&self) -> Vec<BigInt> {
        (0..self.d.rows()).map(|i| self.d[(i, i)].clone()).collect()
    }
}

pub fn smith_normal_form(c: &IntMatrix) -> Result<SnfResult> {
    if !c.is_square() {
        return Err(Error::Dimension { expected: c.rows(), got: c.cols() });
    }
    if c.det().is_zero() {
        return Err(Error::Singular);
    }
    let n = c.rows();
    let mut a = c.clone();
    let mut u = IntMatrix::identity(n);
    let mut v = IntMatrix::identity(n);
    for t in 0..n {
        loop {
            // Move the smallest nonzero entry of the trailing block to (t, t).
            let (mut pi, mut pj) = (t, t);
            let mut best: Option<BigInt> = None;
            for i in t..n {
                for j in t..n {
                    let x = a[(i, j)].abs();
                    if !x.is_zero() && best.as_ref().map_or(true, |b| &x < b) {
                        best = Some(x);
                        pi = i;
                        pj = j;
                    }
                }
            }
            a.swap_rows(t, pi);
            u.swap_rows(t, pi);
            a.swap_cols(t, pj);
            v.swap_cols(t, pj);
            let p = a[(t, t)].clone();
            let mut clean = true;
            for i in t + 1..n {
                let q = a[(i, t)].div_floor(&p);
                if !q.is_zero() {
                    add_row(&mut a, i, t, &-&q);
                    add_row(&mut u, i, t, &-&q);
                }
                clean &= a[(i, t)].is_zero();
            }
            for j in t + 1..n {
                let q = a[(t, j)].div_floor(&p);
                if !q.is_zero() {
                    add_col(&mut a, j, t, &-&q);
                    add_col(&mut v, j, t, &-&q);
                }
                clean &= a[(t, j)].is_zero();
            }
            if !clean {
                continue;
            }
            // Divisibility: fold any row whose entries p does not divide.
            let bad = (t + 1..n).find(|&i| (t + 1..n).any(|j| !(&a[(i, j)] % &p).is_zero()));
            match bad {
                Some(i) => {
                    let one = BigInt::from(1);
                    add_row(&mut a, t, i, &one);
                    add_row(&mut u, t, i, &one);
                }
                None => break,
            }
        }
        if a[(t, t)].is_negative() {
            negate_row(&mut a, t);
            negate_row(&mut u, t);
        }
    }
    Ok(SnfResult { u, v, d: a })
}

/// `row[dst] += k·row[src]`.
fn add_row(m: &mut IntMatrix, dst: usize, src: usize, k: &BigInt) {
    for j in 0..m.cols() {
        let delta = k * &m[(src, j)];
        m[(dst, j)] += delta;
    }
}

/// `col[dst] += k·col[src]`.
fn add_col(m: &mut IntMatrix, dst: usize, src: usize, k: &BigInt) {
    for i in 0..m.rows() {
        let delta = k * &m[(i, src)];
        m[(i, dst)] += delta;
    }
}

fn negate_row(m: &mut IntMatrix, i: usize) {
    for j in 0..m.cols() {
        m[(i, j)] = -&m[(i, j)];
    }
}
