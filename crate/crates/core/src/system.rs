//! The coefficient system `Φ_j` of `F(t₁x₁ + ⋯ + t_mx_m)`.
//!
//! Variables are laid out block by block: coordinate `n` of `x_i` is variable
//! `i·s + n` (0-based).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::binomial;

use crate::multi_index::{multi_index_set, MultiIndex};
use crate::poly::{CompiledPoly, Poly};
use crate::{Error, Form, Result, TargetForm};

#[derive(Clone)]
pub struct ExpandedSystem {
    base: Form,
    m: usize,
    index: Vec<MultiIndex>,
    polys: Vec<Poly>,
    compiled: Vec<CompiledPoly>,
}

/// Expands `F(Σ t_i x_i) = Σ_j Φ_j(x̄) t^j`.
pub fn expand_system(f: &Form, m: usize) -> Result<ExpandedSystem> {
    if m == 0 {
        return Err(Error::invalid("m must be at least 1"));
    }
    let s = f.s();
    let d = f.d() as usize;
    let index = multi_index_set(m, d);
    let mut polys = vec![Poly::zero(m * s); index.len()];
    for (exp, c) in f.terms() {
        // Each coordinate's power (Σ_i t_i x_{i,n})^{e_n} splits over
        // compositions of e_n into m parts.
        let mut comps: Vec<Vec<(Vec<u32>, BigInt)>> = Vec::with_capacity(s);
        for &e in exp.iter() {
            comps.push(compositions(e, m));
        }
        let mut choice = vec![0usize; s];
        loop {
            let mut coeff = c.clone();
            let mut t_exp = vec![0u32; m];
            let mut x_exp = vec![0u32; m * s];
            for n in 0..s {
                let (k, mult) = &comps[n][choice[n]];
                coeff *= mult;
                for i in 0..m {
                    t_exp[i] += k[i];
                    x_exp[i * s + n] = k[i];
                }
            }
            let mut entries = Vec::with_capacity(d);
            for (i, &e) in t_exp.iter().enumerate() {
                entries.extend(core::iter::repeat(i as u16).take(e as usize));
            }
            let j = MultiIndex::new(entries);
            let pos = index.binary_search(&j).expect("t-degree equals d");
            polys[pos].add_term(x_exp, coeff);
            // Odometer over the per-coordinate choices.
            let mut n = 0;
            while n < s {
                choice[n] += 1;
                if choice[n] < comps[n].len() {
                    break;
                }
                choice[n] = 0;
                n += 1;
            }
            if n == s {
                break;
            }
        }
    }
    let compiled = polys
        .iter()
        .map(|p| p.compile().ok_or(Error::Overflow))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExpandedSystem { base: f.clone(), m, index, polys, compiled })
}

/// All `k ∈ ℕ^m` with `|k| = e`, paired with the multinomial `e!/∏k_i!`.
fn compositions(e: u32, m: usize) -> Vec<(Vec<u32>, BigInt)> {
    fn rec(left: u32, i: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        let m = cur.len();
        if i == m - 1 {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for k in 0..=left {
            cur[i] = k;
            rec(left - k, i + 1, cur, out);
        }
    }
    let mut raw = Vec::new();
    rec(e, 0, &mut vec![0; m], &mut raw);
    raw.into_iter()
        .map(|k| {
            let mut mult = BigInt::from(1);
            let mut left = e as u64;
            for &ki in &k {
                mult *= BigInt::from(binomial(left, ki as u64));
                left -= ki as u64;
            }
            (k, mult)
        })
        .collect()
}

impl ExpandedSystem {
    pub fn base(&self) -> &Form {
        &self.base
    }

    pub fn s(&self) -> usize {
        self.base.s()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> u32 {
        self.base.d()
    }

    pub fn r(&self) -> usize {
        self.index.len()
    }

    /// Total number of variables, `m·s`.
    pub fn nvars(&self) -> usize {
        self.m * self.base.s()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.index
    }

    pub fn polys(&self) -> &[Poly] {
        &self.polys
    }

    pub fn poly(&self, j: &MultiIndex) -> Option<&Poly> {
        self.index.binary_search(j).ok().map(|k| &self.polys[k])
    }

    pub fn compiled(&self) -> &[CompiledPoly] {
        &self.compiled
    }

    /// Checks that ψ has the same `m` and `d`.
    pub fn check_target(&self, psi: &TargetForm) -> Result<()> {
        if psi.m() != self.m {
            return Err(Error::Dimension { expected: self.m, got: psi.m() });
        }
        if psi.d() != self.d() {
            return Err(Error::Degree { expected: self.d(), got: psi.d() });
        }
        Ok(())
    }

    /// All `Φ_j(x̄)` exactly; `x̄` is the flat vector of length `m·s`.
    pub fn evaluate(&self, x: &[BigInt]) -> Result<Vec<BigInt>> {
        if x.len() != self.nvars() {
            return Err(Error::Dimension { expected: self.nvars(), got: x.len() });
        }
        Ok(self.polys.iter().map(|p| p.eval(x)).collect())
    }

    pub fn evaluate_i64(&self, x: &[i64]) -> Result<Vec<BigInt>> {
        if x.len() != self.nvars() {
            return Err(Error::Dimension { expected: self.nvars(), got: x.len() });
        }
        Ok(self.polys.iter().map(|p| p.eval_i64(x)).collect())
    }

    /// Blocks each `Φ_j` depends on, as a bit mask over `0..m`.
    pub fn block_masks(&self) -> Vec<u64> {
        let s = self.s();
        self.polys
            .iter()
            .map(|p| p.variables().iter().fold(0u64, |acc, &v| acc | 1 << (v / s)))
            .collect()
    }

    /// Splits `F` into forms in disjoint sets of variables and expands each;
    /// identical pieces are merged and returned with their multiplicity.
    ///
    /// Any sum over `x̄` of a function of `Σ_j a_j Φ_j(x̄)` that is
    /// multiplicative over a sum of independent phases factors accordingly.
    pub fn components(&self) -> Result<Vec<(ExpandedSystem, usize)>> {
        let mut out: Vec<(ExpandedSystem, usize)> = Vec::new();
        for vars in self.base.variable_components() {
            let piece = Form::from_poly(self.base.restrict(&vars))?;
            match out.iter_mut().find(|(sys, _)| sys.base == piece) {
                Some((_, k)) => *k += 1,
                None => out.push((expand_system(&piece, self.m)?, 1)),
            }
        }
        Ok(out)
    }

    /// Variable name in the flat layout, 1-based, so printed systems re-parse
    /// as forms in `m·s` variables.
    pub fn variable_name(&self, v: usize) -> String {
        alloc::format!("x{}", v + 1)
    }

    /// Variable name showing the block, e.g. `x2_3` for coordinate 3 of `x₂`.
    pub fn block_variable_name(&self, v: usize) -> String {
        let s = self.s();
        alloc::format!("x{}_{}", v / s + 1, v % s + 1)
    }
}

impl fmt::Debug for ExpandedSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ExpandedSystem(F = {}, m = {})", self.base, self.m)?;
        for (j, p) in self.index.iter().zip(&self.polys) {
            writeln!(f, "  Φ_{j} = {p}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn sum_of_two_squares() {
        let f = Form::sum_of_squares(2);
        let sys = expand_system(&f, 2).unwrap();
        let shown: Vec<String> = sys.polys().iter().map(|p| p.to_string()).collect();
        // x1,x2 is the first block, x3,x4 the second.
        assert_eq!(shown, ["x1^2 + x2^2", "2 x1 x3 + 2 x2 x4", "x3^2 + x4^2"]);
        assert_eq!(sys.block_masks(), vec![0b01, 0b11, 0b10]);
    }

    #[test]
    fn single_parameter_is_identity() {
        let f = Form::parse("x1^3 - 2 x1 x2^2 + 5 x2^3", 2).unwrap();
        let sys = expand_system(&f, 1).unwrap();
        assert_eq!(sys.r(), 1);
        assert_eq!(&sys.polys()[0], f.poly());
    }

    #[test]
    fn diagonal_forms_split() {
        let f = Form::parse("x1^2 + x2^2 + 2 x3^2 + x3 x4 + x4^2", 4).unwrap();
        let sys = expand_system(&f, 2).unwrap();
        let comps = sys.components().unwrap();
        let sizes: Vec<(usize, usize)> = comps.iter().map(|(c, k)| (c.s(), *k)).collect();
        assert_eq!(sizes, vec![(1, 2), (2, 1)]);
    }

    #[test]
    fn compositions_are_multinomial() {
        let c = compositions(3, 2);
        let mults: Vec<i64> = c.iter().map(|(_, m)| i64::try_from(m).unwrap()).collect();
        assert_eq!(mults, vec![1, 3, 3, 1]);
    }
}
