use num_bigint::BigInt;
use num_traits::Signed;

use super::{
    euler_product_with, raghavan_constant, DensityEstimate, EulerProduct, LevelSchedule, CHI_P_WORK_LIMIT,
};
use crate::linalg::IntMatrix;
use crate::psi::{big_ln, magnitude, normalize_psi};
use crate::{expand_system, Error, ExpandedSystem, Form, Result, TargetForm};

/// Everything the predicted main term depends on. There is no default seed.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityConfig {
    pub p_max: u64,
    pub schedule: LevelSchedule,
    pub eps: f64,
    pub samples: u64,
    pub seed: u64,
    pub chi_p_limit: u128,
    /// Samples for local factors over the work limit; `None` refuses them.
    pub chi_p_fallback_samples: Option<u64>,
}

impl DensityConfig {
    pub fn new(seed: u64) -> DensityConfig {
        DensityConfig {
            p_max: 53,
            schedule: LevelSchedule::default(),
            eps: 0.05,
            samples: 1_000_000,
            seed,
            chi_p_limit: CHI_P_WORK_LIMIT,
            chi_p_fallback_samples: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MainTermReport {
    /// `⟨ψ⟩^{(ms−rd)/(md)}`.
    pub magnitude_factor: f64,
    /// `(∏P_i)^{s−rd/m}` with `P_i = n_i^{1/d}`; equal to the above up to rounding.
    pub boxed_factor: f64,
    pub chi_inf: DensityEstimate,
    /// The same slab estimate at `ε/2`, on an independent stream.
    pub chi_inf_half: Option<DensityEstimate>,
    /// The two slab estimates agree within three combined standard errors.
    pub eps_consistent: bool,
    pub euler: EulerProduct,
    pub prediction: f64,
    pub stderr: f64,
}

fn exponent(sys_s: usize, psi: &TargetForm) -> f64 {
    let (m, d, r) = (psi.m() as f64, psi.d() as f64, psi.r() as f64);
    (m * sys_s as f64 - r * d) / (m * d)
}

/// `⟨ψ⟩^{(ms−rd)/(md)}`.
pub fn magnitude_factor(psi: &TargetForm, s: usize) -> Result<f64> {
    let mag = magnitude(psi)?;
    let k = exponent(s, psi);
    if k == 0.0 {
        return Ok(1.0);
    }
    Ok(libm::exp(k * big_ln(&mag)))
}

/// `(P₁⋯P_m)^{s−rd/m}` with `P_i = n_i^{1/d}`.
pub fn boxed_magnitude_factor(psi: &TargetForm, s: usize) -> Result<f64> {
    magnitude(psi)?;
    let k = s as f64 - (psi.r() * psi.d() as usize) as f64 / psi.m() as f64;
    let d = psi.d() as f64;
    Ok(psi.diagonals().iter().map(|n| libm::exp(k * big_ln(n) / d)).product())
}

fn consistent(a: &DensityEstimate, b: &DensityEstimate) -> bool {
    (a.value - b.value).abs() <= 3.0 * libm::sqrt(a.stderr * a.stderr + b.stderr * b.stderr)
}

/// Assembles the prediction from separately computed factors.
pub fn main_term_from_parts(
    sys: &ExpandedSystem,
    psi: &TargetForm,
    chi_inf: DensityEstimate,
    chi_inf_half: Option<DensityEstimate>,
    euler: EulerProduct,
) -> Result<MainTermReport> {
    sys.check_target(psi)?;
    let magnitude_factor = magnitude_factor(psi, sys.s())?;
    let boxed_factor = boxed_magnitude_factor(psi, sys.s())?;
    let e = &euler.estimate;
    let prediction = magnitude_factor * chi_inf.value * e.value;
    let stderr = if euler.local_obstruction {
        0.0
    } else if prediction == 0.0 {
        magnitude_factor * e.value * chi_inf.stderr
    } else {
        let rel_inf = chi_inf.stderr / chi_inf.value;
        let rel_e = e.stderr / e.value;
        prediction * libm::sqrt(rel_inf * rel_inf + rel_e * rel_e)
    };
    let eps_consistent = chi_inf_half.as_ref().map_or(true, |h| consistent(&chi_inf, h));
    Ok(MainTermReport {
        magnitude_factor,
        boxed_factor,
        chi_inf,
        chi_inf_half,
        eps_consistent,
        euler,
        prediction,
        stderr,
    })
}

/// `⟨ψ⟩^{(ms−rd)/(md)}·χ_∞·∏_{p ≤ p_max} χ_p`.
///
/// `χ_∞` is estimated at `ε` on stream shard 0 and at `ε/2` on shard 1.
pub fn main_term(f: &Form, psi: &TargetForm, cfg: &DensityConfig) -> Result<MainTermReport> {
    let sys = expand_system(f, psi.m())?;
    sys.check_target(psi)?;
    let norm = normalize_psi(psi)?;
    let tally = super::slab_hits(&sys, &norm, cfg.eps, cfg.samples, cfg.seed, 0)?;
    let chi_inf = super::slab_estimate(&sys, cfg.eps, tally);
    let half = super::slab_hits(&sys, &norm, cfg.eps / 2.0, cfg.samples, cfg.seed, 1)?;
    let chi_inf_half = super::slab_estimate(&sys, cfg.eps / 2.0, half);
    let fallback = cfg.chi_p_fallback_samples.map(|n| (n, cfg.seed));
    let euler = euler_product_with(&sys, psi, cfg.p_max, &cfg.schedule, cfg.chi_p_limit, fallback)?;
    main_term_from_parts(&sys, psi, chi_inf, Some(chi_inf_half), euler)
}

/// `c_{s,m}·(det A)^{−m/2}·(det B)^{(s−m−1)/2}·∏χ_p` with the local
/// factors in Raghavan's normalization.
pub fn raghavan_main_term(a: &IntMatrix, b: &IntMatrix, chi_p: &[f64]) -> Result<f64> {
    if !a.is_square() || !b.is_square() {
        return Err(Error::invalid("Gram matrices must be square"));
    }
    if !a.is_positive_definite() || !b.is_positive_definite() {
        return Err(Error::Indefinite);
    }
    let (s, m) = (a.rows(), b.rows());
    let c = raghavan_constant(s, m)?;
    let product: f64 = chi_p.iter().product();
    if product == 0.0 {
        return Ok(0.0);
    }
    let det_a: BigInt = a.det();
    let det_b: BigInt = b.det().abs();
    let log = -(m as f64) / 2.0 * big_ln(&det_a) + (s as f64 - m as f64 - 1.0) / 2.0 * big_ln(&det_b);
    Ok(c * libm::exp(log) * product)
}
