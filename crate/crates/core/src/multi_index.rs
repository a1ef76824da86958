use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::{Error, Result};

/// A multiset of size `d` drawn from the `m` parameters, stored as a sorted
/// tuple of 0-based parameter indices. Displayed 1-based, e.g. `(1,2)` → `12`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<u16>);

impl MultiIndex {
    /// Sorts the given 0-based entries.
    pub fn new(mut entries: Vec<u16>) -> MultiIndex {
        entries.sort_unstable();
        MultiIndex(entries)
    }

    pub fn entries(&self) -> &[u16] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    /// How often parameter `i` (0-based) occurs.
    pub fn multiplicity(&self, i: usize) -> u32 {
        self.0.iter().filter(|&&e| e as usize == i).count() as u32
    }

    /// `Some(i)` for the diagonal index `(i, …, i)`.
    pub fn diagonal(&self) -> Option<usize> {
        let first = *self.0.first()?;
        self.0.iter().all(|&e| e == first).then_some(first as usize)
    }

    /// Exponent vector of the monomial `t_{j₁}⋯t_{j_d}` over `m` parameters.
    pub fn t_exponent(&self, m: usize) -> Vec<u32> {
        let mut e = alloc::vec![0u32; m];
        for &i in &self.0 {
            e[i as usize] += 1;
        }
        e
    }

    /// Distinct parameters occurring in the index, ascending.
    pub fn blocks(&self) -> Vec<usize> {
        let mut b: Vec<usize> = self.0.iter().map(|&e| e as usize).collect();
        b.dedup();
        b
    }

    pub fn max_entry(&self) -> usize {
        self.0.last().map_or(0, |&e| e as usize)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dotted = self.0.iter().any(|&e| e >= 9);
        for (k, &e) in self.0.iter().enumerate() {
            if dotted && k > 0 {
                f.write_str(".")?;
            }
            write!(f, "{}", e + 1)?;
        }
        Ok(())
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    /// Parses `12` or `1.10` (1-based entries).
    fn from_str(s: &str) -> Result<MultiIndex> {
        let s = s.trim();
        let parts: Vec<String> = if s.contains('.') {
            s.split('.').map(String::from).collect()
        } else {
            s.chars().map(String::from).collect()
        };
        if parts.is_empty() {
            return Err(Error::invalid("empty multi-index"));
        }
        let mut entries = Vec::with_capacity(parts.len());
        for p in parts {
            let v: u16 = p
                .trim()
                .parse()
                .map_err(|_| Error::invalid(alloc::format!("bad multi-index entry {p:?} in {s:?}")))?;
            if v == 0 {
                return Err(Error::invalid("multi-index entries are 1-based"));
            }
            entries.push(v - 1);
        }
        Ok(MultiIndex::new(entries))
    }
}

/// All non-decreasing `d`-tuples over `m` parameters in lexicographic order;
/// there are `binomial(m+d−1, d)` of them.
pub fn multi_index_set(m: usize, d: usize) -> Vec<MultiIndex> {
    fn rec(m: usize, d: usize, start: u16, cur: &mut Vec<u16>, out: &mut Vec<MultiIndex>) {
        if cur.len() == d {
            out.push(MultiIndex(cur.clone()));
            return;
        }
        for i in start..m as u16 {
            cur.push(i);
            rec(m, d, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, d, 0, &mut Vec::with_capacity(d), &mut out);
    out
}

/// `binomial(m+d−1, d)`, the number of coefficients of a degree-`d` form in
/// `m` variables.
pub fn coefficient_count(m: usize, d: usize) -> usize {
    num_integer::binomial(m + d - 1, d)
}
