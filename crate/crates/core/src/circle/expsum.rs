use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive};

use super::{e, fft, for_each_point, root_table, ComplexSum};
use crate::enumerate::BlockBox;
use crate::{Error, ExpandedSystem, Partition, Result, TargetForm, DEFAULT_ENUMERATION_LIMIT};

fn check_alpha(sys: &ExpandedSystem, len: usize, bx: &BlockBox) -> Result<()> {
    if len != sys.r() {
        return Err(Error::Dimension { expected: sys.r(), got: len });
    }
    if bx.m() != sys.m() {
        return Err(Error::Dimension { expected: sys.m(), got: bx.m() });
    }
    Ok(())
}

/// `T(α; 𝒫) = Σ_{x̄ ∈ 𝒫} e(𝔉(x̄; α))`.
pub fn exponential_sum(sys: &ExpandedSystem, alpha: &[f64], bx: &BlockBox) -> Result<Complex64> {
    exponential_sum_part(sys, alpha, bx, Partition::WHOLE, DEFAULT_ENUMERATION_LIMIT)
}

pub fn exponential_sum_part(
    sys: &ExpandedSystem,
    alpha: &[f64],
    bx: &BlockBox,
    part: Partition,
    limit: u128,
) -> Result<Complex64> {
    check_alpha(sys, alpha.len(), bx)?;
    Error::check_budget(bx.point_count(sys.s()), limit)?;
    let mut acc = ComplexSum::new();
    let mut overflow = false;
    for_each_point(sys.s(), bx, part, |x| {
        let mut z = 0.0;
        for (p, &a) in sys.compiled().iter().zip(alpha) {
            match p.eval_i128(x) {
                Some(v) => {
                    let t = a * v as f64;
                    z += t - libm::floor(t);
                }
                None => overflow = true,
            }
        }
        acc += e(z);
    });
    if overflow {
        return Err(Error::Overflow);
    }
    Ok(acc.value())
}

/// `T(a/q; 𝒫)` with phases reduced exactly modulo `q`.
pub fn exponential_sum_rational(sys: &ExpandedSystem, a: &[i64], q: u64, bx: &BlockBox) -> Result<Complex64> {
    check_alpha(sys, a.len(), bx)?;
    if q == 0 {
        return Err(Error::invalid("q must be positive"));
    }
    Error::check_budget(bx.point_count(sys.s()), DEFAULT_ENUMERATION_LIMIT)?;
    let hist = residue_histogram(sys, a, q, bx)?;
    Ok(sum_histogram(&hist, q))
}

/// Counts of `Σ a_j Φ_j(x̄) mod q` over the box.
fn residue_histogram(sys: &ExpandedSystem, a: &[i64], q: u64, bx: &BlockBox) -> Result<Vec<u64>> {
    let qi = q as i128;
    let mut hist = vec![0u64; q as usize];
    let mut overflow = false;
    for_each_point(sys.s(), bx, Partition::WHOLE, |x| {
        let mut k: i128 = 0;
        for (p, &aj) in sys.compiled().iter().zip(a) {
            match p.eval_i128(x) {
                Some(v) => k = (k + (v.rem_euclid(qi) * (aj as i128).rem_euclid(qi)) % qi) % qi,
                None => overflow = true,
            }
        }
        hist[k as usize] += 1;
    });
    if overflow {
        return Err(Error::Overflow);
    }
    Ok(hist)
}

fn sum_histogram(hist: &[u64], q: u64) -> Complex64 {
    let roots = root_table(q);
    let mut acc = ComplexSum::new();
    for (k, &c) in hist.iter().enumerate() {
        if c != 0 {
            acc += roots[k] * c as f64;
        }
    }
    acc.value()
}

/// Result of the discrete orthogonality count.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCount {
    pub count: u128,
    /// Modulus used for each coefficient equation.
    pub moduli: Vec<u64>,
    /// The unrounded inversion sum.
    pub raw: Complex64,
    /// `true` when `T` on the grid came from an FFT of the value histogram.
    pub via_fft: bool,
}

/// Grid size above which the inversion refuses.
pub const MAX_INVERSION_GRID: u128 = 1 << 22;
/// `grid × points` up to which `T(a/Q)` is summed point by point.
const DIRECT_WORK: u128 = 10_000_000;

/// Moduli `Q_j`, powers of two exceeding `max_𝒫 |Φ_j| + |n_j|`, together
/// with the targets clamped to `±(max_𝒫 |Φ_j| + 1)` (which leaves the count
/// unchanged).
pub fn inversion_moduli(sys: &ExpandedSystem, psi: &TargetForm, bx: &BlockBox) -> Result<(Vec<u64>, Vec<i128>)> {
    sys.check_target(psi)?;
    check_alpha(sys, psi.r(), bx)?;
    Error::check_budget(bx.point_count(sys.s()), DEFAULT_ENUMERATION_LIMIT)?;
    let r = sys.r();
    let mut maxabs = vec![0i128; r];
    let mut overflow = false;
    for_each_point(sys.s(), bx, Partition::WHOLE, |x| {
        for (j, p) in sys.compiled().iter().enumerate() {
            match p.eval_i128(x) {
                Some(v) => maxabs[j] = maxabs[j].max(v.abs()),
                None => overflow = true,
            }
        }
    });
    if overflow {
        return Err(Error::Overflow);
    }
    let mut moduli = Vec::with_capacity(r);
    let mut targets = Vec::with_capacity(r);
    for (j, n) in psi.coefficients().iter().enumerate() {
        let b = maxabs[j];
        let n = match n.to_i128() {
            Some(v) => v.clamp(-(b + 1), b + 1),
            None if n.is_negative() => -(b + 1),
            None => b + 1,
        };
        let need = (b + n.abs() + 1) as u128;
        let q = need.checked_next_power_of_two().ok_or(Error::Overflow)?;
        moduli.push(u64::try_from(q).map_err(|_| Error::Overflow)?);
        targets.push(n);
    }
    Ok((moduli, targets))
}

/// `(1/∏Q_j) Σ_a T(a/Q; 𝒫) e(−Σ_j a_j n_j/Q_j)`, rounded.
pub fn fourier_inversion_count(sys: &ExpandedSystem, psi: &TargetForm, bx: &BlockBox) -> Result<FourierCount> {
    let (moduli, targets) = inversion_moduli(sys, psi, bx)?;
    fourier_inversion_count_with(sys, &targets, bx, &moduli)
}

/// Inversion with caller-chosen moduli; exact only when every `Q_j` exceeds
/// `max |Φ_j − n_j|` over the box.
pub fn fourier_inversion_count_with(
    sys: &ExpandedSystem,
    targets: &[i128],
    bx: &BlockBox,
    moduli: &[u64],
) -> Result<FourierCount> {
    check_alpha(sys, moduli.len(), bx)?;
    check_alpha(sys, targets.len(), bx)?;
    let grid: u128 = moduli.iter().fold(1u128, |acc, &q| acc.saturating_mul(q as u128));
    Error::check_budget(grid, MAX_INVERSION_GRID)?;
    let points = bx.point_count(sys.s());
    let (raw, via_fft) = if grid.saturating_mul(points) <= DIRECT_WORK {
        (direct_inversion(sys, targets, bx, moduli)?, false)
    } else {
        (fft_inversion(sys, targets, bx, moduli)?, true)
    };
    let count = libm::round(raw.re).max(0.0) as u128;
    Ok(FourierCount { count, moduli: moduli.to_vec(), raw, via_fft })
}

/// Grid points `a` in mixed radix, last coordinate fastest.
fn grid_point(mut idx: usize, moduli: &[u64], a: &mut [i64]) {
    for j in (0..moduli.len()).rev() {
        a[j] = (idx % moduli[j] as usize) as i64;
        idx /= moduli[j] as usize;
    }
}

fn direct_inversion(sys: &ExpandedSystem, targets: &[i128], bx: &BlockBox, moduli: &[u64]) -> Result<Complex64> {
    let q = moduli.iter().fold(1u64, |acc, &m| num_integer::lcm(acc, m));
    let qi = q as i128;
    let grid: usize = moduli.iter().map(|&m| m as usize).product();
    let roots = root_table(q);
    let mut a = vec![0i64; moduli.len()];
    let mut acc = ComplexSum::new();
    for idx in 0..grid {
        grid_point(idx, moduli, &mut a);
        let scaled: Vec<i64> = a.iter().zip(moduli).map(|(&aj, &qj)| aj * (q / qj) as i64).collect();
        let t = exponential_sum_rational(sys, &scaled, q, bx)?;
        let k = scaled
            .iter()
            .zip(targets)
            .fold(0i128, |acc, (&aj, &n)| (acc + aj as i128 * n.rem_euclid(qi)) % qi);
        acc += t * roots[((qi - k) % qi) as usize];
    }
    Ok(acc.value() / grid as f64)
}

fn fft_inversion(sys: &ExpandedSystem, targets: &[i128], bx: &BlockBox, moduli: &[u64]) -> Result<Complex64> {
    let grid: usize = moduli.iter().map(|&m| m as usize).product();
    let mut hist = vec![0u64; grid];
    let mut overflow = false;
    for_each_point(sys.s(), bx, Partition::WHOLE, |x| {
        let mut idx = 0usize;
        for (p, &q) in sys.compiled().iter().zip(moduli) {
            match p.eval_i128(x) {
                Some(v) => idx = idx * q as usize + v.rem_euclid(q as i128) as usize,
                None => overflow = true,
            }
        }
        hist[idx] += 1;
    });
    if overflow {
        return Err(Error::Overflow);
    }
    // T(a/Q) = Σ_u H[u] e(Σ_j a_j u_j / Q_j) on the whole grid.
    let mut t: Vec<Complex64> = hist.iter().map(|&c| Complex64::new(c as f64, 0.0)).collect();
    let shape: Vec<usize> = moduli.iter().map(|&q| q as usize).collect();
    fft::fft_nd(&mut t, &shape, 1.0);
    let mut a = vec![0i64; moduli.len()];
    let mut acc = ComplexSum::new();
    for (idx, &tv) in t.iter().enumerate() {
        grid_point(idx, moduli, &mut a);
        let z: f64 = a
            .iter()
            .zip(targets)
            .zip(moduli)
            .map(|((&aj, &n), &q)| (aj as i128 * n.rem_euclid(q as i128) % q as i128) as f64 / q as f64)
            .sum();
        acc += tv * e(-z);
    }
    Ok(acc.value() / grid as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::count_boxed;
    use crate::linalg::IntMatrix;
    use crate::{expand_system, Form};

    #[test]
    fn trivial_phase() {
        let sys = expand_system(&Form::sum_of_squares(2), 2).unwrap();
        let bx = BlockBox::new(vec![1.5, 2.0]).unwrap();
        let t = exponential_sum(&sys, &[0.0; 3], &bx).unwrap();
        assert!((t.re - (9.0 * 25.0)).abs() < 1e-9 && t.im.abs() < 1e-9);
    }

    #[test]
    fn hand_sum_of_x_squared() {
        let sys = expand_system(&Form::parse("x1^2", 1).unwrap(), 1).unwrap();
        let bx = BlockBox::uniform(1, 2.0).unwrap();
        let t = exponential_sum(&sys, &[0.5], &bx).unwrap();
        assert!((t - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let t = exponential_sum_rational(&sys, &[1], 2, &bx).unwrap();
        assert!((t - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn conjugate_symmetry() {
        let sys = expand_system(&Form::parse("x1^3 + 2 x1 x2^2 - x2^3", 2).unwrap(), 2).unwrap();
        let bx = BlockBox::uniform(2, 2.0).unwrap();
        let alpha = [0.123, 0.77, 0.31, 0.05];
        let neg: Vec<f64> = alpha.iter().map(|a| -a).collect();
        let t = exponential_sum(&sys, &alpha, &bx).unwrap();
        let u = exponential_sum(&sys, &neg, &bx).unwrap();
        assert!((t - u.conj()).norm() < 1e-9);
        assert!(t.norm() <= 625.0);
    }

    #[test]
    fn inversion_matches_enumeration() {
        let f = Form::parse("x1^2", 1).unwrap();
        let sys = expand_system(&f, 2).unwrap();
        let bx = BlockBox::uniform(2, 1.0).unwrap();
        let psi = TargetForm::from_gram(&IntMatrix::identity(2)).unwrap();
        let got = fourier_inversion_count(&sys, &psi, &bx).unwrap();
        // x₁² = 1, x₂² = 1, 2x₁x₂ = 0 has no solutions.
        assert_eq!(got.count, 0);
        assert_eq!(got.count, count_boxed(&sys, &psi, &bx).unwrap());
        let psi = TargetForm::parse("11:1,12:2,22:1", 2, 2).unwrap();
        assert_eq!(fourier_inversion_count(&sys, &psi, &bx).unwrap().count, 2);

        let f = Form::parse("x1^2 + x1 x2 - 2 x2^2", 2).unwrap();
        let sys = expand_system(&f, 2).unwrap();
        let bx = BlockBox::new(vec![2.0, 3.0]).unwrap();
        for text in ["11:0,12:0,22:0", "11:4,12:-3,22:-2", "11:1,12:0,22:1", "11:500,12:0,22:0"] {
            let psi = TargetForm::parse(text, 2, 2).unwrap();
            let got = fourier_inversion_count(&sys, &psi, &bx).unwrap();
            assert_eq!(got.count, count_boxed(&sys, &psi, &bx).unwrap(), "{text}");
            assert!((got.raw.re - got.count as f64).abs() < 1e-6);
        }
    }

    #[test]
    fn fft_route_matches_direct_route() {
        let f = Form::parse("x1^2 - x2^2", 2).unwrap();
        let sys = expand_system(&f, 2).unwrap();
        let bx = BlockBox::uniform(2, 3.0).unwrap();
        let psi = TargetForm::parse("11:0,12:0,22:5", 2, 2).unwrap();
        let (moduli, targets) = inversion_moduli(&sys, &psi, &bx).unwrap();
        let d = direct_inversion(&sys, &targets, &bx, &moduli).unwrap();
        let v = fft_inversion(&sys, &targets, &bx, &moduli).unwrap();
        assert!((d - v).norm() < 1e-6);
        assert_eq!(libm::round(d.re) as u128, count_boxed(&sys, &psi, &bx).unwrap());
    }
}
