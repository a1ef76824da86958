use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;

use super::{DensityEstimate, Level};
use crate::circle::{e, gauss_sum};
use crate::{Error, ExpandedSystem, Result, TargetForm, DEFAULT_ENUMERATION_LIMIT};

/// `Σ_{q ≤ Q} q^{−ms} Σ_{a mod q, (a,q)=1} S_q(a) e(−a·n/q)`.
pub fn singular_series_truncated(sys: &ExpandedSystem, psi: &TargetForm, q_max: u64) -> Result<DensityEstimate> {
    singular_series_truncated_with(sys, psi, q_max, DEFAULT_ENUMERATION_LIMIT)
}

pub fn singular_series_truncated_with(
    sys: &ExpandedSystem,
    psi: &TargetForm,
    q_max: u64,
    limit: u128,
) -> Result<DensityEstimate> {
    sys.check_target(psi)?;
    if q_max == 0 {
        return Err(Error::invalid("Q_max must be at least 1"));
    }
    let r = sys.r();
    let pieces = sys.components()?;
    let mut work: u128 = 0;
    for q in 1..=q_max as u128 {
        let per_a: u128 = pieces.iter().map(|(c, _)| q.saturating_pow(c.nvars() as u32)).sum();
        work = work.saturating_add(q.saturating_pow(r as u32).saturating_mul(per_a));
    }
    Error::check_budget(work, limit)?;

    let mut total = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for q in 1..=q_max {
        let qb = BigInt::from(q);
        let n: Vec<u64> = psi
            .coefficients()
            .iter()
            .map(|c| (((c % &qb) + &qb) % &qb).to_u64().unwrap_or(0))
            .collect();
        let norm = libm::pow(q as f64, -(sys.nvars() as f64));
        let mut a = vec![0i64; r];
        loop {
            let g = a.iter().fold(q, |g, &v| num_integer::gcd(g, v as u64));
            if g == 1 {
                let mut s = Complex64::new(1.0, 0.0);
                for (piece, mult) in &pieces {
                    s *= gauss_sum(piece, &a, q)?.powu(*mult as u32);
                }
                let an: u128 = a.iter().zip(&n).map(|(&x, &y)| x as u128 * y as u128).sum();
                let term = s * e(-((an % q as u128) as f64) / q as f64) * norm;
                total += term;
                scale += term.norm();
            }
            let mut j = 0;
            while j < r {
                a[j] += 1;
                if (a[j] as u64) < q {
                    break;
                }
                a[j] = 0;
                j += 1;
            }
            if j == r {
                break;
            }
        }
    }
    if total.im.abs() > 1e-6 * scale.max(1.0) {
        return Err(Error::Internal(alloc::format!("singular series has imaginary part {}", total.im)));
    }
    Ok(DensityEstimate::exact(total.re, Level::Series { q_max }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{chi_p_exact, primes_up_to};
    use crate::{expand_system, Form};

    #[test]
    fn first_term_is_one() {
        let sys = expand_system(&Form::sum_of_squares(3), 2).unwrap();
        let psi = TargetForm::diagonal(2, &[2, 3]).unwrap();
        assert!((singular_series_truncated(&sys, &psi, 1).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prime_modulus_matches_local_count() {
        // The q = 1 and q = p terms together are χ_p at level 1.
        let sys = expand_system(&Form::parse("x1^2 + x2^2 + 2 x3^2", 3).unwrap(), 2).unwrap();
        let psi = TargetForm::parse("11:1,12:1,22:3", 2, 2).unwrap();
        let s2 = singular_series_truncated(&sys, &psi, 2).unwrap().value;
        let chi2 = chi_p_exact(&sys, &psi, 2, 1).unwrap().value;
        assert!((s2 - chi2).abs() < 1e-9, "{s2} vs {chi2}");
        assert_eq!(primes_up_to(2), vec![2]);
    }
}
