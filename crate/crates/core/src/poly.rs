//! Sparse multivariate polynomials with arbitrary-precision integer
//! coefficients, plus compiled evaluators for the hot loops.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A polynomial in `nvars` variables, stored as exponent vector → nonzero
/// coefficient. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Poly {
        Poly { nvars, terms: BTreeMap::new() }
    }

    /// Builds a polynomial from (exponent, coefficient) pairs, combining
    /// repeated exponents.
    ///
    /// Panics if an exponent vector has the wrong length.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Poly
    where
        I: IntoIterator<Item = (Vec<u32>, BigInt)>,
    {
        let mut p = Poly::zero(nvars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending lexicographic exponent order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Vec<u32>, &BigInt)> + '_ {
        self.terms.iter()
    }

    pub fn coefficient(&self, exponent: &[u32]) -> BigInt {
        self.terms.get(exponent).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn add_term(&mut self, exponent: Vec<u32>, coeff: BigInt) {
        assert_eq!(exponent.len(), self.nvars, "exponent length mismatch");
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(exponent);
        match entry {
            alloc::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            alloc::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Degree of the homogeneous polynomial, or `None` if the polynomial is
    /// zero or not homogeneous.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degrees = self.terms.keys().map(|e| e.iter().sum::<u32>());
        let d = degrees.next()?;
        degrees.all(|x| x == d).then_some(d)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum::<u32>()).max().unwrap_or(0)
    }

    /// Largest total degree in the given subset of variables over all terms.
    pub fn degree_in(&self, vars: &[usize]) -> u32 {
        self.terms
            .keys()
            .map(|e| vars.iter().map(|&v| e[v]).sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Indices of variables that occur with positive exponent.
    pub fn variables(&self) -> Vec<usize> {
        (0..self.nvars)
            .filter(|&v| self.terms.keys().any(|e| e[v] > 0))
            .collect()
    }

    pub fn eval(&self, x: &[BigInt]) -> BigInt {
        assert_eq!(x.len(), self.nvars);
        let mut acc = BigInt::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t *= num_traits::pow(xi.clone(), k as usize);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_i64(&self, x: &[i64]) -> BigInt {
        let big: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
        self.eval(&big)
    }

    pub fn scale(&self, k: &BigInt) -> Poly {
        if k.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect(),
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }

    /// Substitutes `x_v → x_v + h_v` for every `(v, h_v)` in `shift`.
    pub fn shift(&self, shift: &[(usize, i64)]) -> Poly {
        let mut cur = self.clone();
        for &(var, h) in shift {
            if h == 0 {
                continue;
            }
            let h = BigInt::from(h);
            let mut next = Poly::zero(self.nvars);
            for (e, c) in &cur.terms {
                let k = e[var];
                // (x + h)^k = Σ_i C(k,i) x^i h^(k-i)
                for i in 0..=k {
                    let coeff = c
                        * binomial(BigInt::from(k), BigInt::from(i))
                        * num_traits::pow(h.clone(), (k - i) as usize);
                    let mut ne = e.clone();
                    ne[var] = i;
                    next.add_term(ne, coeff);
                }
            }
            cur = next;
        }
        cur
    }

    /// `∂p/∂x_var`.
    pub fn derivative(&self, var: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] > 0 {
                let mut ne = e.clone();
                ne[var] -= 1;
                out.add_term(ne, c * BigInt::from(e[var]));
            }
        }
        out
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coefficient(&self) -> BigInt {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_else(BigInt::zero)
    }

    /// Compiles to a flat evaluator with `i128` coefficients; `None` if some
    /// coefficient does not fit.
    pub fn compile(&self) -> Option<CompiledPoly> {
        let mut coeffs = Vec::with_capacity(self.terms.len());
        let mut offsets = Vec::with_capacity(self.terms.len() + 1);
        let mut factors = Vec::new();
        offsets.push(0u32);
        for (e, c) in &self.terms {
            coeffs.push(c.to_i128()?);
            for (v, &k) in e.iter().enumerate() {
                if k > 0 {
                    factors.push((v as u32, k));
                }
            }
            offsets.push(factors.len() as u32);
        }
        Some(CompiledPoly { nvars: self.nvars, coeffs, offsets, factors })
    }

    /// Writes the polynomial with a custom variable naming, terms in
    /// descending lexicographic exponent order.
    pub fn write_with<W: fmt::Write>(&self, out: &mut W, name: &dyn Fn(usize) -> String) -> fmt::Result {
        if self.terms.is_empty() {
            return out.write_str("0");
        }
        for (n, (e, c)) in self.terms.iter().rev().enumerate() {
            let negative = c.is_negative();
            let mag = c.abs();
            match (n, negative) {
                (0, true) => out.write_str("-")?,
                (0, false) => {}
                (_, true) => out.write_str(" - ")?,
                (_, false) => out.write_str(" + ")?,
            }
            let constant = e.iter().all(|&k| k == 0);
            let mut first = true;
            if constant || !mag.is_one() {
                write!(out, "{mag}")?;
                first = false;
            }
            for (v, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                if !first {
                    out.write_str(" ")?;
                }
                first = false;
                out.write_str(&name(v))?;
                if k > 1 {
                    write!(out, "^{k}")?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_with(f, &|v| alloc::format!("x{}", v + 1))
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[{}]({})", self.nvars, self)
    }
}

/// Flat, allocation-free evaluator for a [`Poly`] whose coefficients fit in
/// `i128`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledPoly {
    nvars: usize,
    coeffs: Vec<i128>,
    offsets: Vec<u32>,
    factors: Vec<(u32, u32)>,
}

impl CompiledPoly {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    fn term_factors(&self, t: usize) -> &[(u32, u32)] {
        &self.factors[self.offsets[t] as usize..self.offsets[t + 1] as usize]
    }

    /// Exact evaluation; `None` on overflow.
    pub fn eval_i128(&self, x: &[i64]) -> Option<i128> {
        let mut acc: i128 = 0;
        for (t, &c) in self.coeffs.iter().enumerate() {
            let mut v = c;
            for &(var, k) in self.term_factors(t) {
                let xv = x[var as usize] as i128;
                for _ in 0..k {
                    v = v.checked_mul(xv)?;
                }
            }
            acc = acc.checked_add(v)?;
        }
        Some(acc)
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (t, &c) in self.coeffs.iter().enumerate() {
            let mut v = c as f64;
            for &(var, k) in self.term_factors(t) {
                v *= libm::pow(x[var as usize], k as f64);
            }
            acc += v;
        }
        acc
    }

    /// Reduces the coefficients modulo `q` for residue evaluation.
    pub fn reduce_mod(&self, q: u64) -> ModPoly {
        let coeffs = self
            .coeffs
            .iter()
            .map(|&c| c.rem_euclid(q as i128) as u64)
            .collect();
        ModPoly {
            q,
            coeffs,
            offsets: self.offsets.clone(),
            factors: self.factors.clone(),
        }
    }

    /// Upper bound for `|p(x)|` when `|x_v| ≤ bounds[v]`.
    pub fn abs_bound(&self, bounds: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (t, &c) in self.coeffs.iter().enumerate() {
            let mut v = (c as f64).abs();
            for &(var, k) in self.term_factors(t) {
                v *= libm::pow(bounds[var as usize], k as f64);
            }
            acc += v;
        }
        acc
    }

    /// Gradient in `f64`, used by local descent.
    pub fn gradient_f64(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.nvars];
        for (t, &c) in self.coeffs.iter().enumerate() {
            let fs = self.term_factors(t);
            for (i, &(var, k)) in fs.iter().enumerate() {
                let mut v = c as f64 * k as f64 * libm::pow(x[var as usize], (k - 1) as f64);
                for (l, &(w, kw)) in fs.iter().enumerate() {
                    if l != i {
                        v *= libm::pow(x[w as usize], kw as f64);
                    }
                }
                g[var as usize] += v;
            }
        }
        g
    }
}

/// A polynomial with coefficients reduced modulo `q`, evaluated on residues.
#[derive(Debug, Clone)]
pub struct ModPoly {
    q: u64,
    coeffs: Vec<u64>,
    offsets: Vec<u32>,
    factors: Vec<(u32, u32)>,
}

impl ModPoly {
    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// Evaluates at residues `x` (each in `0..q`), returning a residue.
    pub fn eval(&self, x: &[u64]) -> u64 {
        let q = self.q as u128;
        let mut acc: u128 = 0;
        for (t, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let mut v = c as u128;
            for &(var, k) in &self.factors[self.offsets[t] as usize..self.offsets[t + 1] as usize] {
                let xv = x[var as usize] as u128;
                for _ in 0..k {
                    v = v * xv % q;
                }
            }
            acc += v;
        }
        (acc % q) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn p(nvars: usize, terms: &[(&[u32], i64)]) -> Poly {
        Poly::from_terms(nvars, terms.iter().map(|(e, c)| (e.to_vec(), BigInt::from(*c))))
    }

    #[test]
    fn combining_and_cancellation() {
        let a = p(2, &[(&[2, 0], 1), (&[0, 2], 3), (&[2, 0], -1)]);
        assert_eq!(a.len(), 1);
        assert_eq!(a.coefficient(&[0, 2]), BigInt::from(3));
        assert_eq!(a.homogeneous_degree(), Some(2));
    }

    #[test]
    fn printing_is_descending_lex() {
        let a = p(3, &[(&[1, 1, 1], 2), (&[3, 0, 0], 1), (&[0, 0, 3], -1)]);
        assert_eq!(a.to_string(), "x1^3 + 2 x1 x2 x3 - x3^3");
        assert_eq!(Poly::zero(2).to_string(), "0");
    }

    #[test]
    fn shift_matches_evaluation() {
        let a = p(2, &[(&[3, 0], 1), (&[1, 2], -2), (&[0, 3], 5)]);
        let b = a.shift(&[(0, 2), (1, -1)]);
        for x in -3..=3i64 {
            for y in -3..=3i64 {
                assert_eq!(b.eval_i64(&[x, y]), a.eval_i64(&[x + 2, y - 1]));
            }
        }
    }

    #[test]
    fn compiled_agrees_with_exact() {
        let a = p(3, &[(&[2, 0, 0], 7), (&[0, 1, 1], -3), (&[1, 0, 1], 2)]);
        let c = a.compile().unwrap();
        let m = c.reduce_mod(11);
        for x in [[1i64, -2, 3], [0, 0, 0], [-5, 4, 9]] {
            let exact = a.eval_i64(&x);
            assert_eq!(BigInt::from(c.eval_i128(&x).unwrap()), exact);
            let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
            assert_eq!(c.eval_f64(&xf), exact.to_f64().unwrap());
            let xr: Vec<u64> = x.iter().map(|&v| v.rem_euclid(11) as u64).collect();
            let r = (exact % BigInt::from(11) + BigInt::from(11)) % BigInt::from(11);
            assert_eq!(BigInt::from(m.eval(&xr)), r);
        }
    }

    #[test]
    fn compiled_overflow_is_detected() {
        let a = p(1, &[(&[5], 1)]);
        let c = a.compile().unwrap();
        assert_eq!(c.eval_i128(&[i64::MAX]), None);
    }
}
