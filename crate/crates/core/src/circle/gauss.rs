use alloc::vec;

use num_complex::Complex64;

use super::{root_table, ComplexSum};
use crate::poly::ModPoly;
use crate::{Error, ExpandedSystem, Partition, Result, DEFAULT_ENUMERATION_LIMIT};

/// `S_q(a) = Σ_{x̄ mod q} e(𝔉(x̄; a)/q)` by enumerating all `q^{ms}` residues.
pub fn gauss_sum(sys: &ExpandedSystem, a: &[i64], q: u64) -> Result<Complex64> {
    gauss_sum_part(sys, a, q, Partition::WHOLE, DEFAULT_ENUMERATION_LIMIT)
}

/// One partition of [`gauss_sum`], split over the first variable.
pub fn gauss_sum_part(sys: &ExpandedSystem, a: &[i64], q: u64, part: Partition, limit: u128) -> Result<Complex64> {
    if a.len() != sys.r() {
        return Err(Error::Dimension { expected: sys.r(), got: a.len() });
    }
    if q == 0 {
        return Err(Error::invalid("q must be positive"));
    }
    let n = sys.nvars();
    Error::check_budget((q as u128).saturating_pow(n as u32), limit)?;
    let polys: alloc::vec::Vec<ModPoly> = sys.compiled().iter().map(|p| p.reduce_mod(q)).collect();
    let coeffs: alloc::vec::Vec<u64> = a.iter().map(|&v| v.rem_euclid(q as i64) as u64).collect();
    let mut hist = vec![0u64; q as usize];
    let mut x = vec![0u64; n];
    for first in part.range(q as usize) {
        x[0] = first as u64;
        x[1..].iter_mut().for_each(|v| *v = 0);
        loop {
            let mut k: u128 = 0;
            for (p, &c) in polys.iter().zip(&coeffs) {
                if c != 0 {
                    k += p.eval(&x) as u128 * c as u128;
                }
            }
            hist[(k % q as u128) as usize] += 1;
            let mut v = 1;
            while v < n {
                x[v] += 1;
                if x[v] < q {
                    break;
                }
                x[v] = 0;
                v += 1;
            }
            if v >= n {
                break;
            }
        }
    }
    let roots = root_table(q);
    let mut acc = ComplexSum::new();
    for (k, &c) in hist.iter().enumerate() {
        if c != 0 {
            acc += roots[k] * c as f64;
        }
    }
    Ok(acc.value())
}

/// [`gauss_sum`] as the product over the variable-disjoint pieces of `F`.
pub fn gauss_sum_factored(sys: &ExpandedSystem, a: &[i64], q: u64) -> Result<Complex64> {
    if a.len() != sys.r() {
        return Err(Error::Dimension { expected: sys.r(), got: a.len() });
    }
    let mut prod = Complex64::new(1.0, 0.0);
    for (piece, mult) in sys.components()? {
        let g = gauss_sum(&piece, a, q)?;
        prod *= g.powu(mult as u32);
    }
    Ok(prod)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{expand_system, Form};

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() <= 1e-9 * (1.0 + b.norm())
    }

    #[test]
    fn trivial_values() {
        let sys = expand_system(&Form::parse("x1^2 + 3 x1 x2 - x2^2", 2).unwrap(), 2).unwrap();
        assert!(close(gauss_sum(&sys, &[0, 0, 0], 1).unwrap(), Complex64::new(1.0, 0.0)));
        assert!(close(gauss_sum(&sys, &[0, 0, 0], 5).unwrap(), Complex64::new(625.0, 0.0)));
    }

    #[test]
    fn classical_quadratic_gauss_sum() {
        // Σ_{x mod p} e(x²/p) = √p for p ≡ 1 mod 4, i√p for p ≡ 3 mod 4.
        let sys = expand_system(&Form::parse("x1^2", 1).unwrap(), 1).unwrap();
        let g = gauss_sum(&sys, &[1], 5).unwrap();
        assert!(close(g, Complex64::new(libm::sqrt(5.0), 0.0)));
        let g = gauss_sum(&sys, &[1], 7).unwrap();
        assert!(close(g, Complex64::new(0.0, libm::sqrt(7.0))));
    }

    #[test]
    fn factored_matches_direct() {
        let sys = expand_system(&Form::parse("x1^2 + x2^2 + 2 x3^2", 3).unwrap(), 2).unwrap();
        for (a, q) in [([1i64, 2, 3], 4u64), ([2, 0, 1], 5), ([1, 1, 1], 6)] {
            let d = gauss_sum(&sys, &a, q).unwrap();
            let f = gauss_sum_factored(&sys, &a, q).unwrap();
            assert!(close(f, d), "{a:?} {q}");
        }
    }

    #[test]
    fn partitions_add_up() {
        let sys = expand_system(&Form::parse("x1^2 + x1 x2", 2).unwrap(), 1).unwrap();
        let whole = gauss_sum(&sys, &[3], 7).unwrap();
        let sum: Complex64 = (0..3)
            .map(|k| gauss_sum_part(&sys, &[3], 7, Partition::new(k, 3), DEFAULT_ENUMERATION_LIMIT).unwrap())
            .sum();
        assert!(close(sum, whole));
    }
}
