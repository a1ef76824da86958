//! Exponential sums and their circle-method companions.
//!
//! `𝔉(x̄; α) = Σ_j α_j Φ_j(x̄)` throughout, and `e(z) = exp(2πiz)`.

mod arcs;
mod expsum;
pub mod fft;
mod gauss;
mod integral;
mod weyl;

pub use arcs::{classify_arc, continued_fraction_approximation, ArcClass, ArcParams, ArcPoint, Homogenized};
pub use expsum::{
    exponential_sum, exponential_sum_part, exponential_sum_rational, fourier_inversion_count,
    fourier_inversion_count_with, inversion_moduli, FourierCount,
};
pub use gauss::{gauss_sum, gauss_sum_factored, gauss_sum_part};
pub use integral::{major_arc_residual, oscillatory_integral, IntegralEstimate, IntegralMethod, MajorArcReport};
pub use weyl::{weyl_cs_check, weyl_difference, WeylCheck};

use alloc::vec;
use core::ops::AddAssign;

use num_complex::Complex64;

use crate::enumerate::BlockBox;
use crate::Partition;

/// `e(z) = exp(2πiz)` after reducing `z` mod 1.
pub fn e(z: f64) -> Complex64 {
    let t = core::f64::consts::TAU * (z - libm::floor(z));
    Complex64::new(libm::cos(t), libm::sin(t))
}

/// `e(k/q)` for every residue `k`.
pub(crate) fn root_table(q: u64) -> alloc::vec::Vec<Complex64> {
    (0..q).map(|k| e(k as f64 / q as f64)).collect()
}

/// Kahan–Babuška compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    sum: Complex64,
    comp: Complex64,
}

impl ComplexSum {
    pub fn new() -> ComplexSum {
        ComplexSum::default()
    }

    pub fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl AddAssign<Complex64> for ComplexSum {
    fn add_assign(&mut self, z: Complex64) {
        neumaier(&mut self.sum.re, &mut self.comp.re, z.re);
        neumaier(&mut self.sum.im, &mut self.comp.im, z.im);
    }
}

/// Calls `f` on every integer point of the box (flat layout, `s` coordinates
/// per block). The partition splits the points of block 0.
pub(crate) fn for_each_point<F: FnMut(&[i64])>(s: usize, bx: &BlockBox, part: Partition, mut f: F) {
    let m = bx.m();
    let first = bx.block_points(0, s) as usize;
    let mut x = vec![0i64; m * s];
    for idx in part.range(first) {
        crate::enumerate::set_block_from_index(&mut x[..s], idx, bx.floor(0));
        for b in 1..m {
            for v in &mut x[b * s..(b + 1) * s] {
                *v = -bx.floor(b);
            }
        }
        loop {
            f(&x);
            let mut b = 1;
            while b < m {
                if crate::enumerate::odometer(&mut x[b * s..(b + 1) * s], bx.floor(b)) {
                    break;
                }
                b += 1;
            }
            if b >= m {
                break;
            }
        }
    }
}
