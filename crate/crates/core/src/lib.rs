//! Exact and numerical machinery for counting identical representations of
//! one integral form by another.
//!
//! Given a form `F` in `s` variables and a target form `ψ` in `m` variables of
//! the same degree `d`, the crate counts the tuples `x₁, …, x_m ∈ ℤ^s` with
//! `F(t₁x₁ + ⋯ + t_mx_m) = ψ(t)` identically in `t`, and assembles the
//! circle-method prediction for that count from its local factors:
//!
//! * [`form`], [`system`], [`target`]: forms, the expanded coefficient system
//!   `Φ_j`, and target forms.
//! * [`psi`]: magnitude, eccentricity, pseudo-diagonality and normalisation of
//!   the target.
//! * [`enumerate`], [`snf`]: exact counting kernels and Smith normal form.
//! * [`circle`]: exponential sums, Gauss sums, singular-integral integrands,
//!   arc classification and Weyl differencing.
//! * [`density`]: p-adic and real solution densities, the truncated singular
//!   series and the main term.
//!
//! The crate is `no_std` and only needs `alloc`. Every kernel that enumerates
//! a large set takes a [`Partition`] so callers with threads can split the
//! outermost loop and add the results.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod circle;
pub mod density;
pub mod enumerate;
mod error;
pub mod form;
pub mod linalg;
pub mod multi_index;
pub mod poly;
pub mod psi;
pub mod rng;
pub mod snf;
pub mod system;
pub mod target;

pub use error::{Error, ParseError, ParseErrorKind, Result};
pub use form::{Definiteness, Form};
pub use multi_index::{multi_index_set, MultiIndex};
pub use poly::Poly;
pub use system::{expand_system, ExpandedSystem};
pub use target::TargetForm;

/// Default cap on the number of points an enumeration kernel will visit.
pub const DEFAULT_ENUMERATION_LIMIT: u128 = 100_000_000;

/// A slice `index` of `count` equal parts of some outermost loop.
///
/// Kernels that accept a partition only visit their share of the outermost
/// range; summing the results over `index in 0..count` gives the full answer
/// independent of `count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Partition {
    pub index: usize,
    pub count: usize,
}

impl Partition {
    pub const WHOLE: Partition = Partition { index: 0, count: 1 };

    pub fn new(index: usize, count: usize) -> Partition {
        assert!(count > 0 && index < count, "invalid partition {index}/{count}");
        Partition { index, count }
    }

    /// Sub-range of `0..len` owned by this part.
    pub fn range(&self, len: usize) -> core::ops::Range<usize> {
        let start = len * self.index / self.count;
        let end = len * (self.index + 1) / self.count;
        start..end
    }
}

impl Default for Partition {
    fn default() -> Self {
        Partition::WHOLE
    }
}
