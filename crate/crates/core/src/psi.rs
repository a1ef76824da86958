//! Descriptors of the target form: magnitude, eccentricity,
//! pseudo-diagonality and the normalised target `ψ̃`.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::linalg::IntMatrix;
use crate::rng::{self, StreamTag};
use crate::{Error, Result, TargetForm};

/// `⟨ψ⟩ = n₁⋯n_m`.
pub fn magnitude(psi: &TargetForm) -> Result<BigInt> {
    psi.check_positive_diagonal()?;
    Ok(psi.diagonals().iter().product())
}

/// `𝓔(ψ) = max_i log⟨ψ⟩ / (m log n_i)`; needs every `n_i ≥ 2`.
pub fn eccentricity(psi: &TargetForm) -> Result<f64> {
    psi.check_positive_diagonal()?;
    let diag = psi.diagonals();
    let two = BigInt::from(2);
    if let Some(i) = diag.iter().position(|n| n < &two) {
        return Err(Error::EccentricityUndefined { index: i });
    }
    if diag.iter().all(|n| n == &diag[0]) {
        return Ok(1.0);
    }
    let logs: Vec<f64> = diag.iter().map(big_ln).collect();
    let total: f64 = logs.iter().sum();
    let m = psi.m() as f64;
    Ok(logs.iter().map(|l| total / (m * l)).fold(f64::MIN, f64::max))
}

/// `|n_j|^d ≤ n_{j₁}⋯n_{j_d}` for every `j`.
pub fn is_pseudo_diagonal(psi: &TargetForm) -> Result<bool> {
    psi.check_positive_diagonal()?;
    let diag = psi.diagonals();
    Ok(psi.iter().all(|(j, n)| {
        let rhs: BigInt = j.entries().iter().map(|&k| &diag[k as usize]).product();
        num_traits::pow(n.abs(), psi.d() as usize) <= rhs
    }))
}

/// `b_ij² ≤ b_ii b_jj` for all `i < j`.
pub fn quadratic_matrix_pseudo_diagonal(b: &IntMatrix) -> Result<bool> {
    if !b.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let m = b.rows();
    for i in 0..m {
        for j in i + 1..m {
            if &b[(i, j)] * &b[(i, j)] > &b[(i, i)] * &b[(j, j)] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `ñ_j = n_j (n_{j₁}⋯n_{j_d})^{−1/d}`, aligned with `psi.indices()`.
pub fn normalize_psi(psi: &TargetForm) -> Result<Vec<f64>> {
    psi.check_positive_diagonal()?;
    let diag = psi.diagonals();
    let d = psi.d() as f64;
    Ok(psi
        .iter()
        .map(|(j, n)| {
            if j.diagonal().is_some() {
                return 1.0;
            }
            if n.is_zero() {
                return 0.0;
            }
            let prod: BigInt = j.entries().iter().map(|&k| &diag[k as usize]).product();
            // A perfect d-th power gives an exactly rounded quotient.
            let root = prod.nth_root(psi.d());
            if root.pow(psi.d()) == prod {
                if let (Some(a), Some(b)) = (exact_f64(n), exact_f64(&root)) {
                    return a / b;
                }
            }
            let lg = big_ln(&n.abs()) - big_ln(&prod) / d;
            let v = libm::exp(lg);
            if n.is_negative() {
                -v
            } else {
                v
            }
        })
        .collect())
}

/// `n` as a float when that conversion is exact.
fn exact_f64(n: &BigInt) -> Option<f64> {
    (n.bits() <= 53).then(|| n.to_f64()).flatten()
}

/// Natural logarithm of a positive big integer.
pub(crate) fn big_ln(n: &BigInt) -> f64 {
    match n.to_f64() {
        Some(v) if v.is_finite() && v < 1e300 => libm::log(v),
        _ => {
            let bits = n.bits();
            let shift = bits.saturating_sub(64);
            let top = (n >> shift).to_f64().unwrap_or(f64::MAX);
            libm::log(top) + shift as f64 * core::f64::consts::LN_2
        }
    }
}

/// Both sides of `s − dim sing F > 2^{d−1} max{2r(d−1), r·d·𝓔(ψ)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisReport {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

pub fn check_hypotheses(s: usize, psi: &TargetForm, dim_sing: usize) -> Result<HypothesisReport> {
    if dim_sing > s {
        return Err(Error::invalid("dim sing F exceeds s"));
    }
    let e = eccentricity(psi)?;
    let d = psi.d() as f64;
    let r = psi.r() as f64;
    let lhs = (s - dim_sing) as f64;
    let rhs = libm::pow(2.0, d - 1.0) * f64::max(2.0 * r * (d - 1.0), r * d * e);
    Ok(HypothesisReport { lhs, rhs, satisfied: lhs > rhs })
}

/// `B = MᵀM` for a random integer `M` with entries in `[−bound, bound]`,
/// redrawn until `det B ≠ 0`.
pub fn random_pd_quadratic(m: usize, bound: i64, seed: u64) -> Result<IntMatrix> {
    if m == 0 || bound < 1 {
        return Err(Error::invalid("need m ≥ 1 and bound ≥ 1"));
    }
    let mut rng = rng::stream(seed, StreamTag::RandomGram, 0);
    loop {
        let rows: Vec<Vec<i64>> = (0..m)
            .map(|_| (0..m).map(|_| rng.gen_range(-bound..=bound)).collect())
            .collect();
        let mm = IntMatrix::from_rows(&rows)?;
        let b = mm.transpose().mul(&mm);
        if b.det() != BigInt::from(0) {
            return Ok(b);
        }
    }
}

/// Everything the main term needs to know about ψ.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiProfile {
    pub magnitude: BigInt,
    /// `None` when some `n_i < 2`.
    pub eccentricity: Option<f64>,
    pub pseudo_diagonal: bool,
    pub normalized: Vec<f64>,
}

pub fn profile(psi: &TargetForm) -> Result<PsiProfile> {
    Ok(PsiProfile {
        magnitude: magnitude(psi)?,
        eccentricity: eccentricity(psi).ok(),
        pseudo_diagonal: is_pseudo_diagonal(psi)?,
        normalized: normalize_psi(psi)?,
    })
}

/// `true` when every diagonal coefficient is one.
pub fn has_unit_diagonal(psi: &TargetForm) -> bool {
    psi.diagonals().iter().all(One::is_one)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn magnitude_examples() {
        assert_eq!(magnitude(&TargetForm::diagonal(2, &[1, 1]).unwrap()).unwrap(), BigInt::from(1));
        assert_eq!(magnitude(&TargetForm::diagonal(2, &[4, 16]).unwrap()).unwrap(), BigInt::from(64));
        assert!(matches!(
            magnitude(&TargetForm::diagonal(2, &[0, 16]).unwrap()),
            Err(Error::NonPositiveDiagonal { index: 0 })
        ));
    }

    #[test]
    fn eccentricity_examples() {
        assert_eq!(eccentricity(&TargetForm::diagonal(2, &[7, 7, 7]).unwrap()).unwrap(), 1.0);
        let e = eccentricity(&TargetForm::diagonal(2, &[4, 16]).unwrap()).unwrap();
        assert!((e - 1.5).abs() < 1e-12);
        assert!(matches!(
            eccentricity(&TargetForm::diagonal(2, &[1, 5]).unwrap()),
            Err(Error::EccentricityUndefined { index: 0 })
        ));
    }

    #[test]
    fn pseudo_diagonal_examples() {
        assert!(is_pseudo_diagonal(&TargetForm::diagonal(2, &[3, 5]).unwrap()).unwrap());
        assert!(is_pseudo_diagonal(&TargetForm::parse("11:2,12:2,22:2", 2, 2).unwrap()).unwrap());
        assert!(!is_pseudo_diagonal(&TargetForm::parse("11:1,12:3,22:1", 2, 2).unwrap()).unwrap());
        assert!(!is_pseudo_diagonal(&TargetForm::parse("11:1,12:-3,22:1", 2, 2).unwrap()).unwrap());
    }

    #[test]
    fn matrix_criterion_and_factor_two() {
        let ok = IntMatrix::from_rows(&[vec![2i64, 1], vec![1, 2]]).unwrap();
        let bad = IntMatrix::from_rows(&[vec![1i64, 2], vec![2, 1]]).unwrap();
        assert!(quadratic_matrix_pseudo_diagonal(&ok).unwrap());
        assert!(!quadratic_matrix_pseudo_diagonal(&bad).unwrap());
        let ones = IntMatrix::from_rows(&[vec![1i64, 1], vec![1, 1]]).unwrap();
        assert!(quadratic_matrix_pseudo_diagonal(&ones).unwrap());
        // The polynomial coefficient 2 fails the polynomial criterion.
        assert!(!is_pseudo_diagonal(&TargetForm::from_gram(&ones).unwrap()).unwrap());
        let asym = IntMatrix::from_rows(&[vec![1i64, 2], vec![0, 1]]).unwrap();
        assert!(quadratic_matrix_pseudo_diagonal(&asym).is_err());
    }

    #[test]
    fn normalization() {
        let t = TargetForm::parse("11:4,12:8,22:16", 2, 2).unwrap();
        assert_eq!(normalize_psi(&t).unwrap(), vec![1.0, 1.0, 1.0]);
        let t = TargetForm::parse("11:1,12:-1,22:1", 2, 2).unwrap();
        assert_eq!(normalize_psi(&t).unwrap(), vec![1.0, -1.0, 1.0]);
        assert!(has_unit_diagonal(&t));
        let cubic = TargetForm::parse("111:8,112:3,122:0,222:27", 2, 3).unwrap();
        let n = normalize_psi(&cubic).unwrap();
        assert!((n[1] - 3.0 / libm::cbrt(8.0 * 8.0 * 27.0)).abs() < 1e-12);
        assert_eq!(n[2], 0.0);
    }

    #[test]
    fn hypotheses() {
        let t = TargetForm::diagonal(2, &[5, 5]).unwrap();
        let r = check_hypotheses(13, &t, 0).unwrap();
        assert_eq!(r.rhs, 12.0);
        assert!(r.satisfied);
        assert!(!check_hypotheses(12, &t, 0).unwrap().satisfied);
        let t = TargetForm::diagonal(2, &[4, 16]).unwrap();
        assert!((check_hypotheses(20, &t, 0).unwrap().rhs - 18.0).abs() < 1e-9);
        assert!(!check_hypotheses(20, &t, 20).unwrap().satisfied);
    }

    #[test]
    fn random_gram_is_reproducible_and_definite() {
        for m in 1..=4 {
            let a = random_pd_quadratic(m, 3, 11).unwrap();
            assert_eq!(a, random_pd_quadratic(m, 3, 11).unwrap());
            assert!(a.is_positive_definite());
        }
    }

    #[test]
    fn big_log() {
        let n = num_traits::pow(BigInt::from(10), 400);
        assert!((big_ln(&n) - 400.0 * core::f64::consts::LN_10).abs() < 1e-9);
    }
}
