//! Local and real densities and the predicted main term.
//!
//! `χ_p` counts solutions of `Φ_j ≡ n_j` modulo `p^l`; `χ_∞` is the volume of
//! the normalised real solution set in the unit box, estimated on a thin slab.

mod main_term;
mod padic;
mod real;
mod series;

pub use main_term::{
    boxed_magnitude_factor, magnitude_factor, main_term, main_term_from_parts, raghavan_main_term, DensityConfig,
    MainTermReport,
};
pub use padic::{
    chi_p_exact, chi_p_exact_with, chi_p_sampled, euler_product, euler_product_with, hensel_nonsingular, is_prime,
    primes_up_to, raghavan_chi_p, raghavan_count, residue_count, residue_count_with, sampled_hits, sampled_estimate,
    EulerProduct, LevelSchedule, CHI_P_WORK_LIMIT,
};
pub use real::{
    chi_inf_closed_quadratic, chi_inf_slab, raghavan_constant, slab_estimate, slab_hits, MIN_SLAB_SAMPLES,
};
pub use series::{singular_series_truncated, singular_series_truncated_with};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    Sampled,
    Quadrature,
    ClosedForm,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Sampled => "sampled",
            Method::Quadrature => "quadrature",
            Method::ClosedForm => "closed-form",
        }
    }
}

/// The truncation behind an estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Level {
    PAdic { p: u64, l: u32 },
    Slab { eps: f64, samples: u64 },
    Series { q_max: u64 },
    Product { p_max: u64 },
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityEstimate {
    pub value: f64,
    pub method: Method,
    pub level: Level,
    /// Zero exactly for exact and closed-form values.
    pub stderr: f64,
}

impl DensityEstimate {
    pub fn exact(value: f64, level: Level) -> DensityEstimate {
        DensityEstimate { value, method: Method::Exact, level, stderr: 0.0 }
    }

    pub fn closed_form(value: f64) -> DensityEstimate {
        DensityEstimate { value, method: Method::ClosedForm, level: Level::None, stderr: 0.0 }
    }
}

/// Hits out of samples for a Bernoulli estimator; shards merge by addition.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub hits: u64,
    pub samples: u64,
}

impl Tally {
    pub fn merge(self, other: Tally) -> Tally {
        Tally { hits: self.hits + other.hits, samples: self.samples + other.samples }
    }

    pub fn fraction(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.hits as f64 / self.samples as f64
        }
    }

    /// Binomial standard error of the hit fraction. With no hits (or no
    /// misses) the rule of three, `3/N`, stands in for it.
    pub fn stderr(&self) -> f64 {
        let n = self.samples as f64;
        if self.hits == 0 || self.hits == self.samples {
            return 3.0 / n;
        }
        let f = self.fraction();
        libm::sqrt(f * (1.0 - f) / n)
    }
}
