//! Exact counting kernels.
//!
//! * [`count_representations`]: `N(F;ψ)` for definite `F`, built from the
//!   finite level sets `{x : F(x) = n_i}`.
//! * [`count_boxed`]: solutions with `x_i ∈ [−P_i, P_i]^s`, any `F`.
//! * [`count_lattice`]: solutions `X ∈ ℤ^{s×m}C` of height at most `P`.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::linalg::{ldl_rational, IntMatrix};
use crate::multi_index::multi_index_set;
use crate::poly::CompiledPoly;
use crate::rng::{self, StreamTag};
use crate::{Definiteness, Error, ExpandedSystem, Form, Partition, Result, TargetForm};
use crate::DEFAULT_ENUMERATION_LIMIT;

/// Per-block symmetric bounds: block `i` ranges over `[−P_i, P_i]^s`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockBox {
    bounds: Vec<f64>,
}

impl BlockBox {
    pub fn new(bounds: Vec<f64>) -> Result<BlockBox> {
        if bounds.is_empty() {
            return Err(Error::invalid("a box needs at least one block"));
        }
        if bounds.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::invalid("box bounds must be positive and finite"));
        }
        Ok(BlockBox { bounds })
    }

    pub fn uniform(m: usize, p: f64) -> Result<BlockBox> {
        BlockBox::new(vec![p; m])
    }

    pub fn m(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[f64] {
        &self.bounds
    }

    /// `⌊P_i⌋`.
    pub fn floor(&self, i: usize) -> i64 {
        libm::floor(self.bounds[i]) as i64
    }

    /// Number of integer points in block `i`, `(2⌊P_i⌋+1)^s`.
    pub fn block_points(&self, i: usize, s: usize) -> u128 {
        let side = (2 * self.floor(i) + 1) as u128;
        side.saturating_pow(s as u32)
    }

    /// `∏_i (2⌊P_i⌋+1)^s`, saturating.
    pub fn point_count(&self, s: usize) -> u128 {
        (0..self.m()).fold(1u128, |acc, i| acc.saturating_mul(self.block_points(i, s)))
    }

    /// `∏_i (2P_i)^s`, the real volume.
    pub fn volume(&self, s: usize) -> f64 {
        self.bounds.iter().map(|p| libm::pow(2.0 * p, s as f64)).product()
    }

    /// Blocks ordered by increasing bound (stable).
    pub fn block_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.m()).collect();
        order.sort_by(|&a, &b| self.bounds[a].total_cmp(&self.bounds[b]));
        order
    }

    /// Every bound divided by `k`.
    pub fn shrink(&self, k: f64) -> Result<BlockBox> {
        BlockBox::new(self.bounds.iter().map(|p| p / k).collect())
    }
}

/// Integer vectors of length `s` stored contiguously.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VectorList {
    s: usize,
    data: Vec<i64>,
}

impl VectorList {
    pub fn new(s: usize) -> VectorList {
        VectorList { s, data: Vec::new() }
    }

    pub fn len(&self) -> usize {
        if self.s == 0 {
            0
        } else {
            self.data.len() / self.s
        }
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, k: usize) -> &[i64] {
        &self.data[k * self.s..(k + 1) * self.s]
    }

    pub fn push(&mut self, v: &[i64]) {
        debug_assert_eq!(v.len(), self.s);
        self.data.extend_from_slice(v);
    }

    pub fn iter(&self) -> impl Iterator<Item = &[i64]> + '_ {
        self.data.chunks_exact(self.s.max(1))
    }

    pub fn to_vecs(&self) -> Vec<Vec<i64>> {
        self.iter().map(<[i64]>::to_vec).collect()
    }

    fn sort(&mut self) {
        let mut v = self.to_vecs();
        v.sort();
        self.data = v.concat();
    }
}

/// Definiteness gate shared by the kernels that need finite level sets.
fn require_definite(f: &Form) -> Result<()> {
    match f.is_positive_definite() {
        Definiteness::ProvenPositive | Definiteness::HeuristicPositive => Ok(()),
        _ => Err(Error::Indefinite),
    }
}

/// All `x ∈ ℤ^s` with `F(x) = n`, sorted lexicographically.
pub fn list_representations(f: &Form, n: &BigInt) -> Result<Vec<Vec<i64>>> {
    Ok(level_set(f, n, DEFAULT_ENUMERATION_LIMIT)?.to_vecs())
}

/// [`list_representations`] into a flat list, with a work limit for the
/// box search used when `d ≥ 4`.
pub fn level_set(f: &Form, n: &BigInt, limit: u128) -> Result<VectorList> {
    require_definite(f)?;
    let s = f.s();
    let mut out = VectorList::new(s);
    if n.is_negative() {
        return Ok(out);
    }
    if n.is_zero() {
        out.push(&vec![0; s]);
        return Ok(out);
    }
    let c = f.compile()?;
    let target = n.to_i128().ok_or(Error::Overflow)?;
    if f.d() == 2 {
        Error::check_budget(ellipsoid_points(f, target)?, limit)?;
        fincke_pohst(f, &c, target, &mut out)?;
    } else {
        box_search(f, &c, target, limit, &mut out)?;
    }
    out.sort();
    Ok(out)
}

/// Volume of `xᵀHx ≤ 2n`, about the number of lattice points the interval
/// nesting visits.
fn ellipsoid_points(f: &Form, n: i128) -> Result<u128> {
    let s = f.s() as f64;
    let det = f.hessian()?.det().to_f64().unwrap_or(f64::INFINITY);
    if !(det > 0.0) {
        return Err(Error::Indefinite);
    }
    let ball = libm::pow(core::f64::consts::PI, s / 2.0) / libm::tgamma(s / 2.0 + 1.0);
    let v = ball * libm::pow(2.0 * n as f64, s / 2.0) / libm::sqrt(det);
    Ok(if v >= u128::MAX as f64 { u128::MAX } else { libm::ceil(v) as u128 })
}

/// Interval nesting on `xᵀHx = 2n` through the exact `LDLᵀ` factorisation
/// of the Hessian. Float bounds are widened; leaves are checked exactly.
fn fincke_pohst(f: &Form, c: &CompiledPoly, n: i128, out: &mut VectorList) -> Result<()> {
    let h = f.hessian()?;
    let (d, mu) = ldl_rational(&h).ok_or(Error::Indefinite)?;
    let s = f.s();
    let d: Vec<f64> = d.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
    let mu: Vec<Vec<f64>> = mu
        .iter()
        .map(|row| row.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect())
        .collect();
    if d.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Indefinite);
    }
    let total = 2.0 * n as f64;
    let tol = 1e-9 * (1.0 + total);
    let mut x = vec![0i64; s];
    // Remaining budget after fixing coordinates k+1..s.
    let mut rem = vec![0.0; s + 1];
    rem[s] = total;
    let mut hi = vec![0i64; s];
    let mut k = s - 1;
    let bounds = |k: usize, x: &[i64], rem: f64| -> (i64, i64) {
        let centre: f64 = -(k + 1..s).map(|l| mu[k][l] * x[l] as f64).sum::<f64>();
        if rem < -tol {
            return (1, 0);
        }
        let r = libm::sqrt(f64::max(rem, 0.0) / d[k]) + 1e-7 * (1.0 + centre.abs());
        (libm::ceil(centre - r) as i64, libm::floor(centre + r) as i64)
    };
    let (lo0, hi0) = bounds(k, &x, rem[s]);
    x[k] = lo0;
    hi[k] = hi0;
    loop {
        if x[k] > hi[k] {
            if k == s - 1 {
                break;
            }
            k += 1;
            x[k] += 1;
            continue;
        }
        let centre: f64 = -(k + 1..s).map(|l| mu[k][l] * x[l] as f64).sum::<f64>();
        let dev = x[k] as f64 - centre;
        rem[k] = rem[k + 1] - d[k] * dev * dev;
        if k == 0 {
            if rem[0].abs() <= tol + 1e-6 * total && c.eval_i128(x.as_slice()) == Some(n) {
                out.push(&x);
            }
            x[0] += 1;
            continue;
        }
        k -= 1;
        let (lo, h) = bounds(k, &x, rem[k + 1]);
        x[k] = lo;
        hi[k] = h;
    }
    Ok(())
}

/// Box search `|x|_∞ ≤ (n/μ)^{1/d}` with `μ` a sampled minimum of `F` on the
/// unit sup-norm sphere, lowered by 10%.
fn box_search(f: &Form, c: &CompiledPoly, n: i128, limit: u128, out: &mut VectorList) -> Result<()> {
    let s = f.s();
    let mu = 0.9 * sup_sphere_minimum(c, s);
    if !(mu > 0.0) {
        return Err(Error::Indefinite);
    }
    let b = libm::floor(libm::pow(n as f64 / mu, 1.0 / f.d() as f64) * (1.0 + 1e-12)) as i64;
    let side = (2 * b + 1) as u128;
    Error::check_budget(side.saturating_pow(s as u32), limit)?;
    let mut x = vec![-b; s];
    loop {
        if c.eval_i128(&x) == Some(n) {
            out.push(&x);
        }
        let mut k = 0;
        while k < s {
            x[k] += 1;
            if x[k] <= b {
                break;
            }
            x[k] = -b;
            k += 1;
        }
        if k == s {
            break;
        }
    }
    Ok(())
}

/// Sampled `min F` over `{|x|_∞ = 1}`: random faces plus the axis points.
fn sup_sphere_minimum(c: &CompiledPoly, s: usize) -> f64 {
    use rand::Rng;
    let mut rng = rng::stream(0x5eed, StreamTag::Definiteness, 1);
    let mut best = f64::INFINITY;
    let mut x = vec![0.0; s];
    for k in 0..s {
        x.iter_mut().for_each(|v| *v = 0.0);
        x[k] = 1.0;
        best = best.min(c.eval_f64(&x));
    }
    for _ in 0..20_000 {
        for v in x.iter_mut() {
            *v = rng::symmetric_unit(&mut rng);
        }
        let face = rng.gen_range(0..s);
        x[face] = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        best = best.min(c.eval_f64(&x));
    }
    best
}

/// `N(F;ψ)` for positive definite `F`.
pub fn count_representations(f: &Form, psi: &TargetForm) -> Result<u128> {
    count_representations_part(f, psi, Partition::WHOLE, DEFAULT_ENUMERATION_LIMIT)
}

/// One partition of [`count_representations`]; the outermost loop runs over
/// the level set of the first parameter. `limit` caps both the ellipsoid
/// volume searched for each level set and the size of the first pairing.
pub fn count_representations_part(f: &Form, psi: &TargetForm, part: Partition, limit: u128) -> Result<u128> {
    if psi.d() != f.d() {
        return Err(Error::Degree { expected: f.d(), got: psi.d() });
    }
    require_definite(f)?;
    let m = psi.m();
    if psi.diagonals().iter().any(|n| n.is_negative()) {
        return Ok(0);
    }
    let mut lists: Vec<VectorList> = Vec::with_capacity(m);
    for i in 0..m {
        let n = psi.diag(i);
        match (0..i).find(|&k| psi.diag(k) == n) {
            Some(k) => {
                let l = lists[k].clone();
                lists.push(l);
            }
            None => lists.push(level_set(f, n, limit)?),
        }
    }
    if lists.iter().any(VectorList::is_empty) {
        return Ok(0);
    }
    if m == 1 {
        return Ok(part.range(lists[0].len()).len() as u128);
    }
    // The first two levels are always paired exhaustively.
    Error::check_budget((lists[0].len() as u128) * (lists[1].len() as u128), limit)?;
    if f.d() == 2 {
        Ok(count_quadratic(f, psi, &lists, part)?)
    } else {
        Ok(count_general(f, psi, &lists, part)?)
    }
}

/// Quadratic case: `Φ_(i,k)(x̄) = x_iᵀ H x_k`, checked with precomputed `H·v`.
fn count_quadratic(f: &Form, psi: &TargetForm, lists: &[VectorList], part: Partition) -> Result<u128> {
    let h = f.hessian()?;
    let s = f.s();
    let m = psi.m();
    let hrows: Vec<Vec<i64>> = (0..s)
        .map(|a| (0..s).map(|b| h[(a, b)].to_i64().ok_or(Error::Overflow)).collect())
        .collect::<Result<_>>()?;
    let hv: Vec<VectorList> = lists
        .iter()
        .map(|l| {
            let mut out = VectorList::new(s);
            let mut w = vec![0i64; s];
            for v in l.iter() {
                for a in 0..s {
                    w[a] = (0..s).map(|b| hrows[a][b] * v[b]).sum();
                }
                out.push(&w);
            }
            out
        })
        .collect();
    // cross[i][k] = n_(i,k) for i < k.
    let mut cross = vec![vec![0i64; m]; m];
    for i in 0..m {
        for k in i + 1..m {
            let j = crate::MultiIndex::new(vec![i as u16, k as u16]);
            cross[i][k] = psi.get(&j).expect("index").to_i64().ok_or(Error::Overflow)?;
        }
    }
    let mut chosen = vec![0usize; m];
    let mut total: u128 = 0;
    for a in part.range(lists[0].len()) {
        chosen[0] = a;
        total += extend_quadratic(1, &mut chosen, lists, &hv, &cross);
    }
    Ok(total)
}

fn extend_quadratic(
    i: usize,
    chosen: &mut [usize],
    lists: &[VectorList],
    hv: &[VectorList],
    cross: &[Vec<i64>],
) -> u128 {
    let m = chosen.len();
    let mut count = 0u128;
    'cand: for b in 0..lists[i].len() {
        let v = lists[i].get(b);
        for k in 0..i {
            let w = hv[k].get(chosen[k]);
            let dot: i64 = w.iter().zip(v).map(|(p, q)| p * q).sum();
            if dot != cross[k][i] {
                continue 'cand;
            }
        }
        if i + 1 == m {
            count += 1;
        } else {
            chosen[i] = b;
            count += extend_quadratic(i + 1, chosen, lists, hv, cross);
        }
    }
    count
}

/// Pending equations: `Φ_j` is checked once every block it involves is set.
struct Checks {
    /// `checks[step]` lists `(poly index, target)` decided at that step.
    by_step: Vec<Vec<(usize, i128)>>,
}

impl Checks {
    fn new(sys: &ExpandedSystem, targets: &[i128], order: &[usize], skip_diagonal: bool) -> Checks {
        let masks = sys.block_masks();
        let mut by_step = vec![Vec::new(); order.len()];
        let mut assigned = 0u64;
        for (step, &b) in order.iter().enumerate() {
            assigned |= 1 << b;
            for (j, &mask) in masks.iter().enumerate() {
                let newly = mask & (1 << b) != 0 || (mask == 0 && step == 0);
                if mask & !assigned == 0 && newly {
                    if skip_diagonal && sys.indices()[j].diagonal().is_some() {
                        continue;
                    }
                    by_step[step].push((j, targets[j]));
                }
            }
        }
        Checks { by_step }
    }

    fn pass(&self, step: usize, sys: &ExpandedSystem, x: &[i64]) -> bool {
        self.by_step[step]
            .iter()
            .all(|&(j, t)| sys.compiled()[j].eval_i128(x) == Some(t))
    }
}

fn targets_i128(psi: &TargetForm) -> Result<Vec<i128>> {
    psi.coefficients().iter().map(|c| c.to_i128().ok_or(Error::Overflow)).collect()
}

/// Higher degree: off-diagonal equations through the expanded system.
fn count_general(f: &Form, psi: &TargetForm, lists: &[VectorList], part: Partition) -> Result<u128> {
    let m = psi.m();
    let s = f.s();
    let sys = crate::expand_system(f, m)?;
    let order: Vec<usize> = (0..m).collect();
    let checks = Checks::new(&sys, &targets_i128(psi)?, &order, true);
    let mut x = vec![0i64; m * s];
    let mut total = 0u128;
    for a in part.range(lists[0].len()) {
        x[..s].copy_from_slice(lists[0].get(a));
        if checks.pass(0, &sys, &x) {
            total += extend_general(1, &mut x, lists, &sys, &checks);
        }
    }
    Ok(total)
}

fn extend_general(i: usize, x: &mut [i64], lists: &[VectorList], sys: &ExpandedSystem, checks: &Checks) -> u128 {
    let s = sys.s();
    let mut count = 0u128;
    for b in 0..lists[i].len() {
        x[i * s..(i + 1) * s].copy_from_slice(lists[i].get(b));
        if !checks.pass(i, sys, x) {
            continue;
        }
        count += if i + 1 == lists.len() { 1 } else { extend_general(i + 1, x, lists, sys, checks) };
    }
    x[i * s..(i + 1) * s].iter_mut().for_each(|v| *v = 0);
    count
}

/// Work estimate for [`count_boxed`]: the worst case of the nested loops.
pub fn boxed_work(sys: &ExpandedSystem, bx: &BlockBox) -> u128 {
    let mut acc = 1u128;
    let mut work = 0u128;
    for b in bx.block_order() {
        acc = acc.saturating_mul(bx.block_points(b, sys.s()));
        work = work.saturating_add(acc);
    }
    work
}

/// Solutions of `Φ_j = n_j` with `x_i ∈ [−P_i, P_i]^s`.
pub fn count_boxed(sys: &ExpandedSystem, psi: &TargetForm, bx: &BlockBox) -> Result<u128> {
    count_boxed_part(sys, psi, bx, Partition::WHOLE, DEFAULT_ENUMERATION_LIMIT)
}

/// One partition of [`count_boxed`], split over the first enumerated block.
pub fn count_boxed_part(
    sys: &ExpandedSystem,
    psi: &TargetForm,
    bx: &BlockBox,
    part: Partition,
    limit: u128,
) -> Result<u128> {
    sys.check_target(psi)?;
    if bx.m() != sys.m() {
        return Err(Error::Dimension { expected: sys.m(), got: bx.m() });
    }
    Error::check_budget(boxed_work(sys, bx), limit)?;
    let s = sys.s();
    let order = bx.block_order();
    let checks = Checks::new(sys, &targets_i128(psi)?, &order, false);
    let mut x = vec![0i64; sys.nvars()];
    let first = order[0];
    let n_first = bx.block_points(first, s) as usize;
    let mut total = 0u128;
    for idx in part.range(n_first) {
        set_block_from_index(&mut x[first * s..(first + 1) * s], idx, bx.floor(first));
        if checks.pass(0, sys, &x) {
            total += boxed_rest(1, &order, &mut x, sys, bx, &checks);
        }
    }
    Ok(total)
}

fn boxed_rest(step: usize, order: &[usize], x: &mut [i64], sys: &ExpandedSystem, bx: &BlockBox, checks: &Checks) -> u128 {
    if step == order.len() {
        return 1;
    }
    let s = sys.s();
    let b = order[step];
    let p = bx.floor(b);
    let mut count = 0u128;
    for v in x[b * s..(b + 1) * s].iter_mut() {
        *v = -p;
    }
    loop {
        if checks.pass(step, sys, x) {
            count += boxed_rest(step + 1, order, x, sys, bx, checks);
        }
        if !odometer(&mut x[b * s..(b + 1) * s], p) {
            break;
        }
    }
    x[b * s..(b + 1) * s].iter_mut().for_each(|v| *v = 0);
    count
}

/// Advances `v ∈ [−p, p]^len` lexicographically (first coordinate fastest);
/// `false` after the last point.
pub(crate) fn odometer(v: &mut [i64], p: i64) -> bool {
    for c in v.iter_mut() {
        *c += 1;
        if *c <= p {
            return true;
        }
        *c = -p;
    }
    false
}

/// The `idx`-th point of `[−p, p]^len` in [`odometer`] order.
pub(crate) fn set_block_from_index(v: &mut [i64], mut idx: usize, p: i64) {
    let side = (2 * p + 1) as usize;
    for c in v.iter_mut() {
        *c = (idx % side) as i64 - p;
        idx /= side;
    }
}

/// Rows `y ∈ ℤ^m` with `|yC|_∞ ≤ P`, returned as the rows `x = yC`.
fn lattice_rows(c: &IntMatrix, p: f64) -> Result<Vec<Vec<i64>>> {
    let m = c.rows();
    let inv = c.inverse_rational().ok_or(Error::Singular)?;
    // y = x C⁻¹ with |x_k| ≤ P gives |y_i| ≤ P Σ_k |C⁻¹_{k,i}|.
    let ybound: Vec<i64> = (0..m)
        .map(|i| {
            let w: f64 = (0..m).map(|k| inv[k][i].to_f64().unwrap_or(f64::INFINITY).abs()).sum();
            libm::floor(p * w + 1e-9) as i64
        })
        .collect();
    let cm: Vec<Vec<i64>> = c
        .to_rows()
        .iter()
        .map(|r| r.iter().map(|v| v.to_i64().ok_or(Error::Overflow)).collect())
        .collect::<Result<_>>()?;
    let pf = libm::floor(p) as i64;
    let mut rows = Vec::new();
    let mut y: Vec<i64> = ybound.iter().map(|b| -b).collect();
    'outer: loop {
        let x: Vec<i64> = (0..m).map(|k| (0..m).map(|i| y[i] * cm[i][k]).sum()).collect();
        if x.iter().all(|v| v.abs() <= pf) {
            rows.push(x);
        }
        for i in 0..m {
            y[i] += 1;
            if y[i] <= ybound[i] {
                continue 'outer;
            }
            y[i] = -ybound[i];
        }
        break;
    }
    Ok(rows)
}

/// Matrices `X ∈ ℤ^{s×m}C` with entries in `[−P, P]` whose columns satisfy
/// `Φ_j = 0` for all `j`.
pub fn count_lattice(sys: &ExpandedSystem, c: &IntMatrix, p: f64) -> Result<u128> {
    count_lattice_part(sys, c, p, Partition::WHOLE, DEFAULT_ENUMERATION_LIMIT)
}

pub fn count_lattice_part(sys: &ExpandedSystem, c: &IntMatrix, p: f64, part: Partition, limit: u128) -> Result<u128> {
    let m = sys.m();
    let s = sys.s();
    if !c.is_square() || c.rows() != m {
        return Err(Error::Dimension { expected: m, got: c.rows() });
    }
    let rows = lattice_rows(c, p)?;
    Error::check_budget((rows.len() as u128).saturating_pow(s as u32), limit)?;
    let zero = TargetForm::zero(m, sys.d())?;
    let targets = targets_i128(&zero)?;
    let mut choice = vec![0usize; s];
    let mut x = vec![0i64; m * s];
    let mut total = 0u128;
    // Row n of X is coordinate n of every column x_i.
    for first in part.range(rows.len()) {
        choice[0] = first;
        choice[1..].iter_mut().for_each(|v| *v = 0);
        loop {
            for (n, &r) in choice.iter().enumerate() {
                for i in 0..m {
                    x[i * s + n] = rows[r][i];
                }
            }
            if sys.compiled().iter().zip(&targets).all(|(q, &t)| q.eval_i128(&x) == Some(t)) {
                total += 1;
            }
            let mut n = 1;
            while n < s {
                choice[n] += 1;
                if choice[n] < rows.len() {
                    break;
                }
                choice[n] = 0;
                n += 1;
            }
            if n >= s {
                break;
            }
        }
    }
    Ok(total)
}

/// Both sides of `∏_{j∈J} γ̂_j = (γ₁⋯γ_m)^{rd/m}`, `γ̂_j = γ_{j₁}⋯γ_{j_d}`.
pub fn gamma_product_identity(gammas: &[u64], d: usize) -> Result<(BigInt, BigInt)> {
    let m = gammas.len();
    if m == 0 || gammas.contains(&0) {
        return Err(Error::invalid("need m ≥ 1 and every γ_i ≥ 1"));
    }
    let index = multi_index_set(m, d);
    let lhs: BigInt = index
        .iter()
        .map(|j| j.entries().iter().map(|&k| BigInt::from(gammas[k as usize])).product::<BigInt>())
        .product();
    let rd = index.len() * d;
    if rd % m != 0 {
        return Err(Error::invalid("rd is not divisible by m"));
    }
    let base: BigInt = gammas.iter().map(|&g| BigInt::from(g)).product();
    Ok((lhs, num_traits::pow(base, rd / m)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expand_system;

    fn brute_level(f: &Form, n: i64, b: i64) -> Vec<Vec<i64>> {
        let s = f.s();
        let mut out = Vec::new();
        let mut x = vec![-b; s];
        loop {
            if f.evaluate_i64(&x).unwrap() == BigInt::from(n) {
                out.push(x.clone());
            }
            if !odometer(&mut x, b) {
                break;
            }
        }
        out.sort();
        out
    }

    #[test]
    fn level_sets_of_squares() {
        let f2 = Form::sum_of_squares(2);
        assert_eq!(list_representations(&f2, &BigInt::from(1)).unwrap().len(), 4);
        assert_eq!(list_representations(&f2, &BigInt::from(25)).unwrap().len(), 12);
        assert_eq!(list_representations(&f2, &BigInt::from(25)).unwrap(), brute_level(&f2, 25, 5));
        assert_eq!(list_representations(&f2, &BigInt::from(3)).unwrap().len(), 0);
        assert_eq!(list_representations(&f2, &BigInt::from(0)).unwrap(), vec![vec![0, 0]]);
        assert!(list_representations(&f2, &BigInt::from(-1)).unwrap().is_empty());
        let f3 = Form::sum_of_squares(3);
        assert_eq!(list_representations(&f3, &BigInt::from(1)).unwrap().len(), 6);
    }

    #[test]
    fn level_sets_of_skew_forms() {
        let f = Form::parse("3 x1^2 + 2 x1 x2 + 5 x2^2 - x2 x3 + 2 x3^2", 3).unwrap();
        for n in [1, 7, 30, 41] {
            assert_eq!(list_representations(&f, &BigInt::from(n)).unwrap(), brute_level(&f, n, 6));
        }
        let q = Form::parse("x1^4 + x1^2 x2^2 + 2 x2^4", 2).unwrap();
        for n in [1, 2, 4, 17, 32, 81] {
            assert_eq!(list_representations(&q, &BigInt::from(n)).unwrap(), brute_level(&q, n, 4));
        }
    }

    #[test]
    fn indefinite_forms_are_refused() {
        let f = Form::parse("x1 x2", 2).unwrap();
        assert!(matches!(list_representations(&f, &BigInt::from(1)), Err(Error::Indefinite)));
        let c = Form::parse("x1^3 + x2^3", 2).unwrap();
        assert!(matches!(list_representations(&c, &BigInt::from(1)), Err(Error::Indefinite)));
    }

    #[test]
    fn representation_examples() {
        let f2 = Form::sum_of_squares(2);
        let i2 = TargetForm::from_gram(&IntMatrix::identity(2)).unwrap();
        assert_eq!(count_representations(&f2, &i2).unwrap(), 8);
        let f3 = Form::sum_of_squares(3);
        assert_eq!(count_representations(&f3, &i2).unwrap(), 24);
        let three = TargetForm::diagonal(2, &[3, 1]).unwrap();
        assert_eq!(count_representations(&f2, &three).unwrap(), 0);
        let neg = TargetForm::diagonal(2, &[-1, 1]).unwrap();
        assert_eq!(count_representations(&f2, &neg).unwrap(), 0);
    }

    #[test]
    fn partitions_add_up() {
        let f = Form::sum_of_squares(4);
        let psi = TargetForm::parse("11:5,12:2,22:6", 2, 2).unwrap();
        let whole = count_representations(&f, &psi).unwrap();
        assert!(whole > 0);
        let parts: u128 = (0..3)
            .map(|k| count_representations_part(&f, &psi, Partition::new(k, 3), DEFAULT_ENUMERATION_LIMIT).unwrap())
            .sum();
        assert_eq!(parts, whole);
        let sys = expand_system(&f, 2).unwrap();
        let bx = BlockBox::uniform(2, 3.0).unwrap();
        let boxed = count_boxed(&sys, &psi, &bx).unwrap();
        assert_eq!(boxed, whole);
        let parts: u128 = (0..4)
            .map(|k| count_boxed_part(&sys, &psi, &bx, Partition::new(k, 4), DEFAULT_ENUMERATION_LIMIT).unwrap())
            .sum();
        assert_eq!(parts, whole);
    }

    #[test]
    fn boxed_examples() {
        let f = Form::sum_of_squares(3);
        let sys = expand_system(&f, 2).unwrap();
        let zero = TargetForm::zero(2, 2).unwrap();
        assert_eq!(count_boxed(&sys, &zero, &BlockBox::new(vec![2.5, 1.0]).unwrap()).unwrap(), 1);
        let g = Form::parse("x1 x2", 2).unwrap();
        let sys = expand_system(&g, 2).unwrap();
        // x_i = (a_i, b_i): a1 b1 = 0, a1 b2 + a2 b1 = 0, a2 b2 = 0.
        let bx = BlockBox::uniform(2, 2.0).unwrap();
        let mut brute = 0;
        for a1 in -2i64..=2 {
            for b1 in -2i64..=2 {
                for a2 in -2i64..=2 {
                    for b2 in -2i64..=2 {
                        if a1 * b1 == 0 && a1 * b2 + a2 * b1 == 0 && a2 * b2 == 0 {
                            brute += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(count_boxed(&sys, &zero, &bx).unwrap(), brute);
        assert!(matches!(
            count_boxed_part(&sys, &zero, &BlockBox::uniform(2, 100.0).unwrap(), Partition::WHOLE, 1000),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn lattice_examples() {
        let g = Form::parse("x1 x2", 2).unwrap();
        let sys = expand_system(&g, 2).unwrap();
        let zero = TargetForm::zero(2, 2).unwrap();
        for gamma in 1..=3i64 {
            let c = IntMatrix::diagonal(&[gamma, gamma]);
            let lhs = count_lattice(&sys, &c, 5.0).unwrap();
            let rhs = count_boxed(&sys, &zero, &BlockBox::uniform(2, 5.0 / gamma as f64).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
        let f = Form::sum_of_squares(2);
        let sys = expand_system(&f, 2).unwrap();
        let c = IntMatrix::from_rows(&[vec![2i64, 1], vec![0, 3]]).unwrap();
        assert_eq!(count_lattice(&sys, &c, 4.0).unwrap(), 1);
    }

    #[test]
    fn gamma_identity() {
        assert_eq!(gamma_product_identity(&[1, 1, 1], 3).unwrap(), (BigInt::from(1), BigInt::from(1)));
        let (l, r) = gamma_product_identity(&[2, 3], 2).unwrap();
        assert_eq!(l, BigInt::from(216));
        assert_eq!(r, BigInt::from(216));
    }
}
