use alloc::vec;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use rand::Rng;

use super::{DensityEstimate, Level, Method, Tally};
use crate::linalg::IntMatrix;
use crate::psi::big_ln;
use crate::rng::{self, StreamTag};
use crate::{Error, ExpandedSystem, Result};

pub const MIN_SLAB_SAMPLES: u64 = 100_000;

fn check_slab(sys: &ExpandedSystem, psi_norm: &[f64], eps: f64) -> Result<()> {
    if psi_norm.len() != sys.r() {
        return Err(Error::Dimension { expected: sys.r(), got: psi_norm.len() });
    }
    if !(eps > 0.0) {
        return Err(Error::invalid("eps must be positive"));
    }
    Ok(())
}

/// Uniform `ξ̄ ∈ [−1,1]^{ms}` with `|Φ_j(ξ̄) − ñ_j| ≤ ε` for all `j`, on one
/// shard of the stream.
pub fn slab_hits(
    sys: &ExpandedSystem,
    psi_norm: &[f64],
    eps: f64,
    samples: u64,
    seed: u64,
    shard: u64,
) -> Result<Tally> {
    check_slab(sys, psi_norm, eps)?;
    let mut rng = rng::stream(seed, StreamTag::ChiInfSlab, shard);
    let mut xi = vec![0.0; sys.nvars()];
    let mut hits = 0;
    for _ in 0..samples {
        for v in xi.iter_mut() {
            *v = 2.0 * rng.gen::<f64>() - 1.0;
        }
        if sys.compiled().iter().zip(psi_norm).all(|(p, &n)| (p.eval_f64(&xi) - n).abs() <= eps) {
            hits += 1;
        }
    }
    Ok(Tally { hits, samples })
}

/// `2^{ms}·(hit fraction)/(2ε)^r`.
pub fn slab_estimate(sys: &ExpandedSystem, eps: f64, tally: Tally) -> DensityEstimate {
    let scale = libm::pow(2.0, sys.nvars() as f64) / libm::pow(2.0 * eps, sys.r() as f64);
    DensityEstimate {
        value: scale * tally.fraction(),
        method: Method::Sampled,
        level: Level::Slab { eps, samples: tally.samples },
        stderr: scale * tally.stderr(),
    }
}

/// Thickened-slab estimate of `χ_∞` for the normalised target `ñ`.
pub fn chi_inf_slab(
    sys: &ExpandedSystem,
    psi_norm: &[f64],
    eps: f64,
    samples: u64,
    seed: u64,
) -> Result<DensityEstimate> {
    if samples < MIN_SLAB_SAMPLES {
        return Err(Error::invalid("chi_inf_slab needs at least 10^5 samples"));
    }
    let tally = slab_hits(sys, psi_norm, eps, samples, seed, 0)?;
    Ok(slab_estimate(sys, eps, tally))
}

/// `c_{s,m} = (√π)^{ms − m(m+1)/2} ∏_{j=m+1}^{s} Γ((j−m)/2)^{−1}`.
pub fn raghavan_constant(s: usize, m: usize) -> Result<f64> {
    if m == 0 || s <= m {
        return Err(Error::invalid("need s > m ≥ 1"));
    }
    let exp = (m * s) as f64 - (m * (m + 1)) as f64 / 2.0;
    let mut c = libm::pow(core::f64::consts::PI, exp / 2.0);
    for j in m + 1..=s {
        c /= libm::tgamma((j - m) as f64 / 2.0);
    }
    Ok(c)
}

/// `(det A)^{−m/2} (det B / ∏b_i)^{(s−m−1)/2} c_{s,m}`.
pub fn chi_inf_closed_quadratic(a: &IntMatrix, b: &IntMatrix) -> Result<f64> {
    if !a.is_square() || !b.is_square() {
        return Err(Error::invalid("Gram matrices must be square"));
    }
    if !a.is_symmetric() || !b.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    if !a.is_positive_definite() || !b.is_positive_definite() {
        return Err(Error::Indefinite);
    }
    let (s, m) = (a.rows(), b.rows());
    if s < m + 2 {
        return Err(Error::invalid("need s ≥ m + 2"));
    }
    let diag: BigInt = (0..m).fold(BigInt::one(), |acc, i| acc * &b[(i, i)]);
    let log = -(m as f64) / 2.0 * big_ln(&a.det())
        + (s - m - 1) as f64 / 2.0 * (big_ln(&b.det().abs()) - big_ln(&diag));
    Ok(libm::exp(log) * raghavan_constant(s, m)?)
}
