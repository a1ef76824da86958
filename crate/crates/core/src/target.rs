//! Target forms `ψ(t) = Σ_j n_j t_{j₁}⋯t_{j_d}`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::linalg::IntMatrix;
use crate::multi_index::{multi_index_set, MultiIndex};
use crate::{Error, Result};

/// A form of degree `d` in `m` parameters, stored as one coefficient per
/// multi-index of [`multi_index_set`]`(m, d)`, zeros included.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TargetForm {
    m: usize,
    d: u32,
    index: Vec<MultiIndex>,
    coeffs: Vec<BigInt>,
}

impl TargetForm {
    pub fn zero(m: usize, d: u32) -> Result<TargetForm> {
        if m == 0 {
            return Err(Error::invalid("a target form needs m ≥ 1"));
        }
        if d < 2 {
            return Err(Error::invalid("target degree must be at least 2"));
        }
        let index = multi_index_set(m, d as usize);
        let coeffs = alloc::vec![BigInt::zero(); index.len()];
        Ok(TargetForm { m, d, index, coeffs })
    }

    /// Builds ψ from `(j, n_j)` pairs; unspecified coefficients are zero.
    pub fn from_coefficients<I, C>(m: usize, d: u32, coeffs: I) -> Result<TargetForm>
    where
        I: IntoIterator<Item = (MultiIndex, C)>,
        C: Into<BigInt>,
    {
        let mut t = TargetForm::zero(m, d)?;
        for (j, c) in coeffs {
            if j.degree() != d as usize {
                return Err(Error::Degree { expected: d, got: j.degree() as u32 });
            }
            if j.max_entry() >= m {
                return Err(Error::invalid(alloc::format!("multi-index {j} exceeds m = {m}")));
            }
            let k = t.position(&j).expect("valid multi-index");
            t.coeffs[k] = c.into();
        }
        Ok(t)
    }

    /// `ψ = tᵀBt`; the polynomial cross coefficients are `n_(i,j) = 2b_ij`.
    pub fn from_gram(b: &IntMatrix) -> Result<TargetForm> {
        if !b.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        let m = b.rows();
        let mut t = TargetForm::zero(m, 2)?;
        for k in 0..t.index.len() {
            let e = t.index[k].entries();
            let (i, j) = (e[0] as usize, e[1] as usize);
            t.coeffs[k] = if i == j { b[(i, i)].clone() } else { &b[(i, j)] * 2 };
        }
        Ok(t)
    }

    /// `ψ = Σ n_i t_i^d`.
    pub fn diagonal<C: Clone + Into<BigInt>>(d: u32, diag: &[C]) -> Result<TargetForm> {
        let mut t = TargetForm::zero(diag.len(), d)?;
        for (i, c) in diag.iter().enumerate() {
            t.set_diagonal(i, c.clone().into());
        }
        Ok(t)
    }

    /// Parses `11:2,12:1,22:2` (multi-indices 1-based, as displayed).
    pub fn parse(text: &str, m: usize, d: u32) -> Result<TargetForm> {
        let mut pairs = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (j, n) = item
                .split_once(':')
                .ok_or_else(|| Error::invalid(alloc::format!("expected `j:n`, got {item:?}")))?;
            let j: MultiIndex = j.parse()?;
            let n: BigInt = n
                .trim()
                .parse()
                .map_err(|_| Error::invalid(alloc::format!("bad coefficient in {item:?}")))?;
            pairs.push((j, n));
        }
        TargetForm::from_coefficients(m, d, pairs)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// Number of coefficients, `binomial(m+d−1, d)`.
    pub fn r(&self) -> usize {
        self.index.len()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.index
    }

    /// Coefficients aligned with [`indices`](Self::indices).
    pub fn coefficients(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &BigInt)> + '_ {
        self.index.iter().zip(&self.coeffs)
    }

    pub fn position(&self, j: &MultiIndex) -> Option<usize> {
        self.index.binary_search(j).ok()
    }

    pub fn get(&self, j: &MultiIndex) -> Option<&BigInt> {
        self.position(j).map(|k| &self.coeffs[k])
    }

    /// Position of the diagonal index `(i, …, i)`.
    pub fn diagonal_position(&self, i: usize) -> usize {
        self.position(&MultiIndex::new(alloc::vec![i as u16; self.d as usize]))
            .expect("diagonal index exists")
    }

    /// `n_i`, the coefficient of `t_i^d`.
    pub fn diag(&self, i: usize) -> &BigInt {
        &self.coeffs[self.diagonal_position(i)]
    }

    pub fn diagonals(&self) -> Vec<BigInt> {
        (0..self.m).map(|i| self.diag(i).clone()).collect()
    }

    pub fn set_diagonal(&mut self, i: usize, n: BigInt) {
        let k = self.diagonal_position(i);
        self.coeffs[k] = n;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_diagonal(&self) -> bool {
        self.iter().all(|(j, c)| j.diagonal().is_some() || c.is_zero())
    }

    pub(crate) fn check_positive_diagonal(&self) -> Result<()> {
        for i in 0..self.m {
            if !self.diag(i).is_positive() {
                return Err(Error::NonPositiveDiagonal { index: i });
            }
        }
        Ok(())
    }

    /// Scales every coefficient by `k`.
    pub fn scale(&self, k: &BigInt) -> TargetForm {
        let mut t = self.clone();
        t.coeffs.iter_mut().for_each(|c| *c *= k);
        t
    }

    /// Relabels the parameters: parameter `i` becomes `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Result<TargetForm> {
        if perm.len() != self.m {
            return Err(Error::Dimension { expected: self.m, got: perm.len() });
        }
        let pairs = self.iter().map(|(j, c)| {
            let e = j.entries().iter().map(|&v| perm[v as usize] as u16).collect();
            (MultiIndex::new(e), c.clone())
        });
        TargetForm::from_coefficients(self.m, self.d, pairs.collect::<Vec<_>>())
    }

    /// Canonical `j:n` listing of all coefficients.
    pub fn to_spec_string(&self) -> String {
        let mut out = String::new();
        for (k, (j, c)) in self.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str(&alloc::format!("{j}:{c}"));
        }
        out
    }

    /// Sparse view, nonzero coefficients only.
    pub fn nonzero(&self) -> BTreeMap<MultiIndex, BigInt> {
        self.iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| (j.clone(), c.clone()))
            .collect()
    }
}

impl fmt::Display for TargetForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_spec_string())
    }
}

impl fmt::Debug for TargetForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TargetForm(m={}, d={}: {})", self.m, self.d, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multi_index::coefficient_count;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn gram_convention() {
        let b = IntMatrix::from_rows(&[vec![2i64, 1], vec![1, 3]]).unwrap();
        let t = TargetForm::from_gram(&b).unwrap();
        assert_eq!(t.to_string(), "11:2,12:2,22:3");
        assert_eq!(t.diagonals(), vec![BigInt::from(2), BigInt::from(3)]);
        assert_eq!(t.r(), coefficient_count(2, 2));
    }

    #[test]
    fn parse_round_trip() {
        let t = TargetForm::parse("11:2, 12:1,22:2", 2, 2).unwrap();
        assert_eq!(TargetForm::parse(&t.to_string(), 2, 2).unwrap(), t);
        let c = TargetForm::parse("111:1,222:5", 2, 3).unwrap();
        assert_eq!(c.r(), 4);
        assert_eq!(c.diag(1), &BigInt::from(5));
        assert!(TargetForm::parse("13:1", 2, 2).is_err());
        assert!(TargetForm::parse("1:1", 2, 2).is_err());
        assert!(TargetForm::parse("11-1", 2, 2).is_err());
    }

    #[test]
    fn permutation() {
        let t = TargetForm::parse("11:2,12:1,22:5", 2, 2).unwrap();
        let p = t.permute(&[1, 0]).unwrap();
        assert_eq!(p.to_string(), "11:5,12:1,22:2");
        assert!(TargetForm::diagonal(2, &[1, 1]).unwrap().is_diagonal());
        assert!(!t.is_diagonal());
    }
}
