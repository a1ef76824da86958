use alloc::vec::Vec;

use crate::{Error, Result};

/// Denominators are never searched beyond this.
pub const DENOMINATOR_CUTOFF: u64 = 1_000_000;

/// `α ≡ a/q + β (mod 1)` with a common denominator `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Homogenized {
    pub a: Vec<i64>,
    pub q: u64,
    pub beta: Vec<f64>,
}

/// A point of `[0,1)^r`, optionally with per-coordinate approximations
/// `α_j ≡ a_j/q_j + β_j (mod 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcPoint {
    pub alpha: Vec<f64>,
    /// `(a_j, q_j, β_j)` with `gcd(a_j, q_j) = 1` and `0 ≤ a_j < q_j`.
    pub approx: Option<Vec<(i64, u64, f64)>>,
    pub homogenized: Option<Homogenized>,
}

fn frac(x: f64) -> f64 {
    x - libm::floor(x)
}

impl ArcPoint {
    pub fn new(alpha: Vec<f64>) -> ArcPoint {
        ArcPoint { alpha: alpha.into_iter().map(frac).collect(), approx: None, homogenized: None }
    }

    /// The point `a/q + β`, homogenized as given.
    pub fn from_parts(a: Vec<i64>, q: u64, beta: Vec<f64>) -> Result<ArcPoint> {
        if q == 0 {
            return Err(Error::invalid("q must be positive"));
        }
        if a.len() != beta.len() {
            return Err(Error::Dimension { expected: a.len(), got: beta.len() });
        }
        let alpha = a.iter().zip(&beta).map(|(&aj, b)| frac(aj as f64 / q as f64 + b)).collect();
        let approx = a
            .iter()
            .zip(&beta)
            .map(|(&aj, &b)| {
                let g = num_integer::gcd(aj.rem_euclid(q as i64) as u64, q);
                let g = if g == 0 { q } else { g };
                ((aj.rem_euclid(q as i64) as u64 / g) as i64, q / g, b)
            })
            .collect();
        let a = a.iter().map(|v| v.rem_euclid(q as i64)).collect();
        Ok(ArcPoint { alpha, approx: Some(approx), homogenized: Some(Homogenized { a, q, beta }) })
    }

    pub fn r(&self) -> usize {
        self.alpha.len()
    }
}

/// Major-arc parameters: `θ`, the width constant `c`, the scale `P` and
/// `η = log γ_max / log P`. `gamma_hat` holds `γ̂_j`, empty meaning all ones.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcParams {
    pub theta: f64,
    pub c: f64,
    pub p: f64,
    pub eta: f64,
    pub gamma_hat: Vec<f64>,
}

impl ArcParams {
    pub fn new(theta: f64, c: f64, p: f64) -> Result<ArcParams> {
        let params = ArcParams { theta, c, p, eta: 0.0, gamma_hat: Vec::new() };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta <= 1.0 - self.eta) {
            return Err(Error::invalid("θ must satisfy 0 < θ ≤ 1 − η"));
        }
        if !(self.c > 0.0) || !(self.p >= 1.0) {
            return Err(Error::invalid("need c > 0 and P ≥ 1"));
        }
        if !(0.0..1.0).contains(&self.eta) {
            return Err(Error::invalid("η must lie in [0, 1)"));
        }
        Ok(())
    }

    /// Largest admissible denominator, `min(c·P^{(d−1)θ}, 10⁶)`.
    pub fn max_denominator(&self, d: u32) -> u64 {
        let q = self.c * libm::pow(self.p, (d as f64 - 1.0) * self.theta);
        if q >= DENOMINATOR_CUTOFF as f64 {
            DENOMINATOR_CUTOFF
        } else {
            libm::floor(q) as u64
        }
    }

    /// `c·P^{−d+(d−1)θ}·γ̂_j`.
    pub fn width(&self, d: u32, j: usize) -> f64 {
        let g = self.gamma_hat.get(j).copied().unwrap_or(1.0);
        self.c * libm::pow(self.p, -(d as f64) + (d as f64 - 1.0) * self.theta) * g
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArcClass {
    Major(ArcPoint),
    Minor,
}

impl ArcClass {
    pub fn is_major(&self) -> bool {
        matches!(self, ArcClass::Major(_))
    }
}

/// `α` as an exact dyadic fraction `num/den`, or `None` when it is below
/// `2^−120`.
fn dyadic(alpha: f64) -> Option<(u128, u128)> {
    if alpha == 0.0 {
        return Some((0, 1));
    }
    let bits = alpha.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let mant = if exp == 0 { (bits & ((1 << 52) - 1)) << 1 } else { (bits & ((1 << 52) - 1)) | (1 << 52) };
    // alpha = mant · 2^(exp − 1075)
    let shift = 1075 - exp;
    if shift > 126 {
        return None;
    }
    let (mut num, mut den) = (mant as u128, 1u128 << shift);
    let tz = num.trailing_zeros().min(den.trailing_zeros());
    num >>= tz;
    den >>= tz;
    Some((num, den))
}

/// The last continued-fraction convergent `a/q` of `α ∈ [0,1)` with
/// `q ≤ qmax`; it minimises `|qα − a|` over all `q ≤ qmax`.
pub fn continued_fraction_approximation(alpha: f64, qmax: u64) -> (i64, u64) {
    let alpha = frac(alpha);
    let Some((mut num, mut den)) = dyadic(alpha) else {
        return (0, 1);
    };
    // Convergents h/k, starting from h₋₁/k₋₁ = 1/0 and h₋₂/k₋₂ = 0/1.
    let (mut h1, mut k1, mut h2, mut k2) = (1u128, 0u128, 0u128, 1u128);
    let mut best = (0u128, 1u128);
    while den != 0 {
        let a = num / den;
        let h = a.checked_mul(h1).and_then(|v| v.checked_add(h2));
        let k = a.checked_mul(k1).and_then(|v| v.checked_add(k2));
        match (h, k) {
            (Some(h), Some(k)) if k <= qmax as u128 => {
                best = (h, k);
                (h2, k2, h1, k1) = (h1, k1, h, k);
            }
            _ => break,
        }
        (num, den) = (den, num - a * den);
    }
    (best.0 as i64, best.1 as u64)
}

/// Classifies `α` as major (every coordinate close to a fraction with small
/// denominator) or minor. Major points come back homogenized with
/// `q = lcm_j q_j`.
pub fn classify_arc(alpha: &[f64], params: &ArcParams, d: u32) -> Result<ArcClass> {
    params.validate()?;
    let qmax = params.max_denominator(d).max(1);
    let mut approx = Vec::with_capacity(alpha.len());
    for (j, &x) in alpha.iter().enumerate() {
        let x = frac(x);
        let (a, q) = continued_fraction_approximation(x, qmax);
        let dist = (x * q as f64 - a as f64).abs();
        if dist > params.width(d, j) {
            return Ok(ArcClass::Minor);
        }
        let beta = x - a as f64 / q as f64;
        let (a, q) = if a as u64 == q { (0, 1) } else { (a, q) };
        approx.push((a, q, beta));
    }
    let mut q: u128 = 1;
    for &(_, qj, _) in &approx {
        q = num_integer::lcm(q, qj as u128);
    }
    let homogenized = u64::try_from(q).ok().map(|q| Homogenized {
        a: approx.iter().map(|&(a, qj, _)| a * (q / qj) as i64).collect(),
        q,
        beta: approx.iter().map(|&(_, _, b)| b).collect(),
    });
    Ok(ArcClass::Major(ArcPoint {
        alpha: alpha.iter().map(|&x| frac(x)).collect(),
        approx: Some(approx),
        homogenized,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn convergents() {
        assert_eq!(continued_fraction_approximation(0.0, 100), (0, 1));
        assert_eq!(continued_fraction_approximation(0.25, 100), (1, 4));
        let pi_frac = core::f64::consts::PI - 3.0;
        assert_eq!(continued_fraction_approximation(pi_frac, 100), (1, 7));
        assert_eq!(continued_fraction_approximation(pi_frac, 110), (15, 106));
        assert_eq!(continued_fraction_approximation(pi_frac, 200), (16, 113));
        let golden = (libm::sqrt(5.0) - 1.0) / 2.0;
        assert_eq!(continued_fraction_approximation(golden, 100), (55, 89));
        assert_eq!(continued_fraction_approximation(0.999, 10), (1, 1));
    }

    #[test]
    fn origin_is_major() {
        let p = ArcParams::new(0.5, 1.0, 100.0).unwrap();
        match classify_arc(&[0.0, 0.0, 0.0], &p, 2).unwrap() {
            ArcClass::Major(pt) => {
                let h = pt.homogenized.unwrap();
                assert_eq!(h.q, 1);
                assert_eq!(h.a, vec![0, 0, 0]);
            }
            ArcClass::Minor => panic!("0 must be major"),
        }
    }

    #[test]
    fn golden_ratio_is_minor() {
        let golden = (libm::sqrt(5.0) - 1.0) / 2.0;
        let p = ArcParams::new(0.1, 1.0, 1e6).unwrap();
        assert_eq!(classify_arc(&[golden], &p, 2).unwrap(), ArcClass::Minor);
    }

    #[test]
    fn small_fractions_are_found() {
        let p = ArcParams::new(0.5, 1.0, 1e4).unwrap();
        match classify_arc(&[1.0 / 3.0, 0.5], &p, 2).unwrap() {
            ArcClass::Major(pt) => {
                let approx = pt.approx.unwrap();
                assert_eq!((approx[0].0, approx[0].1), (1, 3));
                assert_eq!((approx[1].0, approx[1].1), (1, 2));
                let h = pt.homogenized.unwrap();
                assert_eq!((h.a.clone(), h.q), (vec![2, 3], 6));
            }
            ArcClass::Minor => panic!("1/3 is major"),
        }
    }

    #[test]
    fn near_one_wraps_to_zero() {
        let p = ArcParams::new(0.5, 1.0, 100.0).unwrap();
        match classify_arc(&[1.0 - 1e-9], &p, 2).unwrap() {
            ArcClass::Major(pt) => {
                let h = pt.homogenized.unwrap();
                assert_eq!((h.a[0], h.q), (0, 1));
                assert!((h.beta[0] + 1e-9).abs() < 1e-15);
            }
            ArcClass::Minor => panic!("expected major"),
        }
    }

    #[test]
    fn parameters_are_validated() {
        assert!(ArcParams::new(0.0, 1.0, 10.0).is_err());
        assert!(ArcParams::new(1.5, 1.0, 10.0).is_err());
        let mut p = ArcParams::new(0.9, 1.0, 10.0).unwrap();
        p.eta = 0.2;
        assert!(p.validate().is_err());
    }
}
