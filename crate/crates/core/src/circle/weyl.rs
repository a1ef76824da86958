use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{e, for_each_point, ComplexSum};
use crate::enumerate::BlockBox;
use crate::poly::Poly;
use crate::{Error, ExpandedSystem, Partition, Result, DEFAULT_ENUMERATION_LIMIT};

/// `Φ_j(…, x_i + h, …) − Φ_j(…, x_i, …)` for every `j`.
pub fn weyl_difference(sys: &ExpandedSystem, i: usize, h: &[i64]) -> Result<Vec<Poly>> {
    let s = sys.s();
    if h.len() != s {
        return Err(Error::Dimension { expected: s, got: h.len() });
    }
    if i >= sys.m() {
        return Err(Error::Dimension { expected: sys.m(), got: i + 1 });
    }
    let shift: Vec<(usize, i64)> = h.iter().enumerate().map(|(n, &v)| (i * s + n, v)).collect();
    Ok(sys.polys().iter().map(|p| p.shift(&shift).sub(p)).collect())
}

/// Both sides of the first Weyl differencing step,
/// `|T(α)|² ≤ N_y · Σ_h |Σ_{x̄} e(Δ_{j₁,h}𝔉(x̄; α))|`, where `N_y` counts the
/// other blocks and block `j₁` is clipped so that `x, x + h` stay in the box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylCheck {
    pub lhs_squared: f64,
    pub rhs_bound: f64,
    /// `lhs ≤ rhs` up to floating-point rounding; equality holds at `α = 0`.
    pub holds: bool,
}

pub fn weyl_cs_check(sys: &ExpandedSystem, alpha: &[f64], bx: &BlockBox, j1: usize) -> Result<WeylCheck> {
    let s = sys.s();
    let m = sys.m();
    if alpha.len() != sys.r() {
        return Err(Error::Dimension { expected: sys.r(), got: alpha.len() });
    }
    if bx.m() != m || j1 >= m {
        return Err(Error::Dimension { expected: m, got: bx.m().max(j1 + 1) });
    }
    let p = bx.floor(j1);
    let side = (2 * p + 1) as usize;
    let nx = side.pow(s as u32);
    let ny: usize = (0..m).filter(|&b| b != j1).map(|b| bx.block_points(b, s) as usize).product();
    let shifts = ((4 * p + 1) as u128).pow(s as u32);
    Error::check_budget(shifts * nx as u128 * ny as u128, DEFAULT_ENUMERATION_LIMIT)?;

    // table[x][y] = e(𝔉(x̄; α)).
    let mut table = vec![Complex64::new(0.0, 0.0); nx * ny];
    let mut total = ComplexSum::new();
    for_each_point(s, bx, Partition::WHOLE, |x| {
        let z: f64 = sys
            .compiled()
            .iter()
            .zip(alpha)
            .map(|(q, &a)| {
                let t = a * q.eval_f64(&x.iter().map(|&v| v as f64).collect::<Vec<_>>());
                t - libm::floor(t)
            })
            .sum();
        let v = e(z);
        total += v;
        let xi = block_index(&x[j1 * s..(j1 + 1) * s], p);
        let mut yi = 0usize;
        for b in (0..m).rev().filter(|&b| b != j1) {
            let pb = bx.floor(b);
            yi = yi * bx.block_points(b, s) as usize + block_index(&x[b * s..(b + 1) * s], pb);
        }
        table[xi * ny + yi] = v;
    });
    let t = total.value();
    let lhs = t.norm_sqr();

    let mut rhs = ComplexSum::new();
    let mut h = vec![-2 * p; s];
    let mut x = vec![0i64; s];
    let mut xh = vec![0i64; s];
    loop {
        let mut inner = ComplexSum::new();
        for xi in 0..nx {
            coords(xi, p, &mut x);
            let mut inside = true;
            for n in 0..s {
                xh[n] = x[n] + h[n];
                inside &= xh[n].abs() <= p;
            }
            if !inside {
                continue;
            }
            let xhi = block_index(&xh, p);
            let (a, b) = (&table[xhi * ny..(xhi + 1) * ny], &table[xi * ny..(xi + 1) * ny]);
            let mut acc = Complex64::new(0.0, 0.0);
            for (u, v) in a.iter().zip(b) {
                acc += u * v.conj();
            }
            inner += acc;
        }
        rhs += Complex64::new(inner.value().norm(), 0.0);
        if !crate::enumerate::odometer(&mut h, 2 * p) {
            break;
        }
    }
    let rhs = ny as f64 * rhs.value().re;
    let holds = lhs <= rhs * (1.0 + 1e-12) + 1e-9;
    Ok(WeylCheck { lhs_squared: lhs, rhs_bound: rhs, holds })
}

/// Index of `v ∈ [−p, p]^len`, first coordinate fastest.
fn block_index(v: &[i64], p: i64) -> usize {
    let side = 2 * p + 1;
    v.iter().rev().fold(0i64, |acc, &c| acc * side + c + p) as usize
}

fn coords(mut idx: usize, p: i64, out: &mut [i64]) {
    let side = (2 * p + 1) as usize;
    for c in out.iter_mut() {
        *c = (idx % side) as i64 - p;
        idx /= side;
    }
}
