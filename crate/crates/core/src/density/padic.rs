use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;

use super::{DensityEstimate, Level, Method, Tally};
use crate::linalg::IntMatrix;
use crate::multi_index::multi_index_set;
use crate::poly::{ModPoly, Poly};
use crate::rng::{self, StreamTag};
use crate::{Error, ExpandedSystem, Form, Result, TargetForm, DEFAULT_ENUMERATION_LIMIT};

/// Default work limit for exact local counts, in residue evaluations plus
/// table updates.
pub const CHI_P_WORK_LIMIT: u128 = 4_000_000_000;

/// Residue tables larger than this many cells are refused.
const MAX_TABLE: u128 = 1 << 26;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2u64;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    let n = n as usize;
    if n < 2 {
        return Vec::new();
    }
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut k = i * i;
            while k <= n {
                sieve[k] = false;
                k += i;
            }
        }
        i += 1;
    }
    sieve.iter().enumerate().filter(|(_, &b)| b).map(|(k, _)| k as u64).collect()
}

fn prime_power(p: u64, l: u32) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::invalid(alloc::format!("{p} is not prime")));
    }
    if l == 0 {
        return Err(Error::invalid("level must be at least 1"));
    }
    p.checked_pow(l).filter(|&q| q <= u32::MAX as u64).ok_or(Error::Overflow)
}

fn residues(coeffs: &[BigInt], q: u64) -> Vec<u64> {
    let qb = BigInt::from(q);
    coeffs.iter().map(|c| (((c % &qb) + &qb) % &qb).to_u64().unwrap_or(0)).collect()
}

/// A group of variable-disjoint copies of one polynomial system mod `q`.
struct Piece {
    polys: Vec<ModPoly>,
    nvars: usize,
    mult: usize,
}

fn system_pieces(sys: &ExpandedSystem, q: u64) -> Result<Vec<Piece>> {
    Ok(sys
        .components()?
        .into_iter()
        .map(|(c, mult)| Piece {
            polys: c.compiled().iter().map(|p| p.reduce_mod(q)).collect(),
            nvars: c.nvars(),
            mult,
        })
        .collect())
}

/// Steps `x` through `(ℤ/q)^n`; false after the last point.
fn next_residue(x: &mut [u64], q: u64) -> bool {
    for v in x.iter_mut() {
        *v += 1;
        if *v < q {
            return true;
        }
        *v = 0;
    }
    false
}

fn pow_u128(q: u64, k: usize) -> u128 {
    (q as u128).checked_pow(k as u32).unwrap_or(u128::MAX)
}

fn cell_of(polys: &[ModPoly], x: &[u64], q: u64) -> usize {
    polys.iter().rev().fold(0usize, |acc, p| acc * q as usize + p.eval(x) as usize)
}

/// Nonzero cells of the value histogram of one copy of `piece`.
fn histogram(piece: &Piece, q: u64, cells: usize) -> Vec<(usize, u128)> {
    let mut dense = vec![0u128; cells];
    let mut x = vec![0u64; piece.nvars];
    loop {
        dense[cell_of(&piece.polys, &x, q)] += 1;
        if !next_residue(&mut x, q) {
            break;
        }
    }
    dense.into_iter().enumerate().filter(|&(_, c)| c != 0).collect()
}

/// `(a + b)` digit-wise mod `q` over `digits` base-`q` digits.
fn add_cells(mut a: usize, mut b: usize, q: usize, digits: usize) -> usize {
    let (mut out, mut scale) = (0, 1);
    for _ in 0..digits {
        out += ((a % q + b % q) % q) * scale;
        a /= q;
        b /= q;
        scale *= q;
    }
    out
}

fn convolve(sparse: &[(usize, u128)], dense: &[u128], q: usize, r: usize) -> Vec<u128> {
    let mut out = vec![0u128; dense.len()];
    let rows = dense.len() / q;
    for &(v, c) in sparse {
        let (v0, vhi) = (v % q, v / q);
        for row in 0..rows {
            let dst_row = add_cells(row, vhi, q, r - 1);
            let src = &dense[row * q..(row + 1) * q];
            let dst = &mut out[dst_row * q..(dst_row + 1) * q];
            for u in 0..q - v0 {
                dst[u + v0] += c * src[u];
            }
            for u in q - v0..q {
                dst[u + v0 - q] += c * src[u];
            }
        }
    }
    out
}

fn accumulate(hists: &[&Vec<(usize, u128)>], cells: usize, q: usize, r: usize) -> Vec<u128> {
    let mut dense = vec![0u128; cells];
    for &(v, c) in hists[0] {
        dense[v] = c;
    }
    for h in &hists[1..] {
        dense = convolve(h, &dense, q, r);
    }
    dense
}

/// `#{x̄ mod q : P_j(x̄) ≡ t_j}` for a sum of variable-disjoint pieces.
///
/// Each piece contributes a histogram of its values on `(ℤ/q)^r`; the count
/// is the value at `t` of the convolution of all of them. Half the copies are
/// folded into each of two dense tables, which are then paired at `t`.
fn count_solutions(pieces: &[Piece], target: &[u64], q: u64, limit: u128) -> Result<u128> {
    let r = target.len();
    let total_vars: usize = pieces.iter().map(|p| p.nvars * p.mult).sum();
    if total_vars as f64 * libm::log2(q as f64) >= 127.0 {
        return Err(Error::Overflow);
    }
    let copies: usize = pieces.iter().map(|p| p.mult).sum();
    if copies == 1 {
        let piece = &pieces[0];
        Error::check_budget(pow_u128(q, piece.nvars), limit)?;
        let mut x = vec![0u64; piece.nvars];
        let mut count = 0u128;
        loop {
            if piece.polys.iter().zip(target).all(|(p, &t)| p.eval(&x) == t) {
                count += 1;
            }
            if !next_residue(&mut x, q) {
                return Ok(count);
            }
        }
    }
    let cells = pow_u128(q, r);
    Error::check_budget(cells, MAX_TABLE)?;
    let points = pieces.iter().fold(0u128, |acc, p| acc.saturating_add(pow_u128(q, p.nvars)));
    Error::check_budget(points, limit)?;
    let (cells, qu) = (cells as usize, q as usize);
    let hists: Vec<Vec<(usize, u128)>> = pieces.iter().map(|p| histogram(p, q, cells)).collect();
    let nnz = hists.iter().map(Vec::len).max().unwrap_or(0) as u128;
    let work = (copies as u128 - 2)
        .saturating_mul(nnz)
        .saturating_mul(cells as u128)
        .saturating_add(points + (cells * r) as u128);
    Error::check_budget(work, limit)?;

    let mut seq: Vec<&Vec<(usize, u128)>> = Vec::with_capacity(copies);
    for (h, p) in hists.iter().zip(pieces) {
        seq.extend(core::iter::repeat(h).take(p.mult));
    }
    let half = copies / 2;
    let left = accumulate(&seq[..half], cells, qu, r);
    let right = accumulate(&seq[half..], cells, qu, r);

    // Σ_v L(v)·R(t − v)
    let mut digits = vec![0usize; r];
    let mut count = 0u128;
    for &lv in &left {
        if lv != 0 {
            let mut w = 0usize;
            for j in (0..r).rev() {
                w = w * qu + (target[j] as usize + qu - digits[j]) % qu;
            }
            count += lv * right[w];
        }
        for d in digits.iter_mut() {
            *d += 1;
            if *d < qu {
                break;
            }
            *d = 0;
        }
    }
    Ok(count)
}

/// `count·q^k` rounded once, so equal rationals give equal floats.
fn scaled_count(count: u128, q: u64, k: i64) -> f64 {
    let scale = num_traits::pow(BigInt::from(q), k.unsigned_abs() as usize);
    let c = BigInt::from(count);
    let ratio = if k >= 0 {
        BigRational::from_integer(c * scale)
    } else {
        BigRational::new(c, scale)
    };
    ratio.to_f64().unwrap_or(f64::INFINITY)
}

/// `#{x̄ mod q : Φ_j(x̄) ≡ n_j ∀j}` for any modulus `q ≥ 1`.
pub fn residue_count(sys: &ExpandedSystem, psi: &TargetForm, q: u64) -> Result<u128> {
    residue_count_with(sys, psi, q, CHI_P_WORK_LIMIT)
}

pub fn residue_count_with(sys: &ExpandedSystem, psi: &TargetForm, q: u64, limit: u128) -> Result<u128> {
    sys.check_target(psi)?;
    if q == 0 || q > u32::MAX as u64 {
        return Err(Error::invalid("modulus must lie in 1..2^32"));
    }
    let target = residues(psi.coefficients(), q);
    count_solutions(&system_pieces(sys, q)?, &target, q, limit)
}

/// `χ_p` at level `l`: `(p^l)^{r−ms}·#{x̄ mod p^l : Φ_j ≡ n_j}`.
pub fn chi_p_exact(sys: &ExpandedSystem, psi: &TargetForm, p: u64, l: u32) -> Result<DensityEstimate> {
    chi_p_exact_with(sys, psi, p, l, CHI_P_WORK_LIMIT)
}

pub fn chi_p_exact_with(sys: &ExpandedSystem, psi: &TargetForm, p: u64, l: u32, limit: u128) -> Result<DensityEstimate> {
    let q = prime_power(p, l)?;
    let count = residue_count_with(sys, psi, q, limit)?;
    let value = scaled_count(count, q, sys.r() as i64 - sys.nvars() as i64);
    Ok(DensityEstimate::exact(value, Level::PAdic { p, l }))
}

/// Hits among `samples` uniform `x̄ mod q` on one shard of the stream.
pub fn sampled_hits(sys: &ExpandedSystem, psi: &TargetForm, q: u64, samples: u64, seed: u64, shard: u64) -> Result<Tally> {
    sys.check_target(psi)?;
    if q == 0 || q > u32::MAX as u64 {
        return Err(Error::invalid("modulus must lie in 1..2^32"));
    }
    let target = residues(psi.coefficients(), q);
    let polys: Vec<ModPoly> = sys.compiled().iter().map(|p| p.reduce_mod(q)).collect();
    let mut rng = rng::stream(seed, StreamTag::ChiPSampled, shard);
    let mut x = vec![0u64; sys.nvars()];
    let mut hits = 0;
    for _ in 0..samples {
        for v in x.iter_mut() {
            *v = rng.gen_range(0..q);
        }
        if polys.iter().zip(&target).all(|(p, &t)| p.eval(&x) == t) {
            hits += 1;
        }
    }
    Ok(Tally { hits, samples })
}

/// `(p^l)^r` times the hit fraction.
pub fn sampled_estimate(sys: &ExpandedSystem, p: u64, l: u32, tally: Tally) -> Result<DensityEstimate> {
    let q = prime_power(p, l)?;
    let scale = libm::pow(q as f64, sys.r() as f64);
    Ok(DensityEstimate {
        value: scale * tally.fraction(),
        method: Method::Sampled,
        level: Level::PAdic { p, l },
        stderr: scale * tally.stderr(),
    })
}

pub fn chi_p_sampled(
    sys: &ExpandedSystem,
    psi: &TargetForm,
    p: u64,
    l: u32,
    samples: u64,
    seed: u64,
) -> Result<DensityEstimate> {
    if samples < 10_000 {
        return Err(Error::invalid("chi_p_sampled needs at least 10^4 samples"));
    }
    let q = prime_power(p, l)?;
    let tally = sampled_hits(sys, psi, q, samples, seed, 0)?;
    sampled_estimate(sys, p, l, tally)
}

/// Rank of a matrix over `𝔽_p`.
fn rank_mod_p(mut a: Vec<Vec<u64>>, p: u64) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(rank, piv);
        let inv = pow_mod(a[rank][c], p - 2, p);
        for i in 0..rows {
            if i != rank && a[i][c] != 0 {
                let f = a[i][c] * inv % p;
                for k in c..cols {
                    a[i][k] = (a[i][k] + p * p - f * a[rank][k] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// True when every solution of `Φ_j ≡ n_j (mod p)` has a Jacobian of full
/// rank `r` mod `p`, so solutions lift uniquely and `χ_p` is stable from
/// level 1.
pub fn hensel_nonsingular(sys: &ExpandedSystem, psi: &TargetForm, p: u64) -> Result<bool> {
    sys.check_target(psi)?;
    if !is_prime(p) {
        return Err(Error::invalid(alloc::format!("{p} is not prime")));
    }
    let n = sys.nvars();
    Error::check_budget(pow_u128(p, n), DEFAULT_ENUMERATION_LIMIT)?;
    let target = residues(psi.coefficients(), p);
    let polys: Vec<ModPoly> = sys.compiled().iter().map(|c| c.reduce_mod(p)).collect();
    let mut jac: Vec<Vec<ModPoly>> = Vec::with_capacity(sys.r());
    for poly in sys.polys() {
        let row = (0..n)
            .map(|v| poly.derivative(v).compile().map(|c| c.reduce_mod(p)).ok_or(Error::Overflow))
            .collect::<Result<Vec<_>>>()?;
        jac.push(row);
    }
    let mut x = vec![0u64; n];
    loop {
        if polys.iter().zip(&target).all(|(q, &t)| q.eval(&x) == t) {
            let m: Vec<Vec<u64>> = jac.iter().map(|row| row.iter().map(|d| d.eval(&x)).collect()).collect();
            if rank_mod_p(m, p) < sys.r() {
                return Ok(false);
            }
        }
        if !next_residue(&mut x, p) {
            return Ok(true);
        }
    }
}

/// Truncation level per prime: `small_level` for `p ≤ small_bound`,
/// `default_level` otherwise, unless overridden.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSchedule {
    pub small_bound: u64,
    pub small_level: u32,
    pub default_level: u32,
    pub overrides: Vec<(u64, u32)>,
}

impl Default for LevelSchedule {
    fn default() -> LevelSchedule {
        LevelSchedule { small_bound: 5, small_level: 2, default_level: 1, overrides: Vec::new() }
    }
}

impl LevelSchedule {
    pub fn level(&self, p: u64) -> u32 {
        if let Some(&(_, l)) = self.overrides.iter().find(|(q, _)| *q == p) {
            return l;
        }
        if p <= self.small_bound {
            self.small_level
        } else {
            self.default_level
        }
    }

    pub fn with(mut self, p: u64, l: u32) -> LevelSchedule {
        self.overrides.retain(|(q, _)| *q != p);
        self.overrides.push((p, l));
        self
    }

    /// Parses overrides such as `2:5,3:3` on top of the default schedule.
    pub fn parse(text: &str) -> Result<LevelSchedule> {
        let mut out = LevelSchedule::default();
        for item in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (p, l) = item
                .split_once(':')
                .ok_or_else(|| Error::invalid(alloc::format!("expected p:l, got '{item}'")))?;
            let p: u64 = p.trim().parse().map_err(|_| Error::invalid(alloc::format!("bad prime '{p}'")))?;
            let l: u32 = l.trim().parse().map_err(|_| Error::invalid(alloc::format!("bad level '{l}'")))?;
            if !is_prime(p) || l == 0 {
                return Err(Error::invalid(alloc::format!("bad schedule entry '{item}'")));
            }
            out = out.with(p, l);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerProduct {
    pub estimate: DensityEstimate,
    pub factors: Vec<(u64, DensityEstimate)>,
    /// Some factor is exactly zero.
    pub local_obstruction: bool,
}

impl EulerProduct {
    pub fn from_factors(factors: Vec<(u64, DensityEstimate)>, p_max: u64) -> EulerProduct {
        let value: f64 = factors.iter().map(|(_, f)| f.value).product();
        let obstruction = factors.iter().any(|(_, f)| f.value == 0.0);
        let rel: f64 = factors
            .iter()
            .filter(|(_, f)| f.value > 0.0)
            .map(|(_, f)| (f.stderr / f.value) * (f.stderr / f.value))
            .sum();
        let sampled = factors.iter().any(|(_, f)| f.method != Method::Exact);
        let stderr = if obstruction { 0.0 } else { value * libm::sqrt(rel) };
        EulerProduct {
            estimate: DensityEstimate {
                value,
                method: if sampled { Method::Sampled } else { Method::Exact },
                level: Level::Product { p_max },
                stderr,
            },
            factors,
            local_obstruction: obstruction,
        }
    }
}

/// `∏_{p ≤ p_max} χ_p` with exact factors.
pub fn euler_product(sys: &ExpandedSystem, psi: &TargetForm, p_max: u64, schedule: &LevelSchedule) -> Result<EulerProduct> {
    euler_product_with(sys, psi, p_max, schedule, CHI_P_WORK_LIMIT, None)
}

/// Like [`euler_product`]; factors over the work limit are sampled with
/// `fallback = (samples, seed)` when given, on the stream shard `p`.
pub fn euler_product_with(
    sys: &ExpandedSystem,
    psi: &TargetForm,
    p_max: u64,
    schedule: &LevelSchedule,
    limit: u128,
    fallback: Option<(u64, u64)>,
) -> Result<EulerProduct> {
    let mut factors = Vec::new();
    for p in primes_up_to(p_max) {
        let l = schedule.level(p);
        let f = match (chi_p_exact_with(sys, psi, p, l, limit), fallback) {
            (Err(Error::Budget { .. }), Some((samples, seed))) => {
                let tally = sampled_hits(sys, psi, prime_power(p, l)?, samples, seed, p)?;
                sampled_estimate(sys, p, l, tally)?
            }
            (r, _) => r?,
        };
        factors.push((p, f));
    }
    Ok(EulerProduct::from_factors(factors, p_max))
}

/// The system `x_iᵀ A x_k` (`i ≤ k`) on one connected block of `A`.
fn raghavan_pieces(a: &IntMatrix, m: usize, q: u64) -> Result<Vec<Piece>> {
    let f = Form::from_gram(a)?;
    let index = multi_index_set(m, 2);
    let mut out: Vec<(IntMatrix, Piece)> = Vec::new();
    for vars in f.variable_components() {
        let sub = a.submatrix(&vars, &vars);
        if let Some((_, piece)) = out.iter_mut().find(|(g, _)| *g == sub) {
            piece.mult += 1;
            continue;
        }
        let sc = vars.len();
        let polys = index
            .iter()
            .map(|j| {
                let (i, k) = (j.entries()[0] as usize, j.entries()[1] as usize);
                let mut p = Poly::zero(m * sc);
                for u in 0..sc {
                    for v in 0..sc {
                        let mut e = vec![0u32; m * sc];
                        e[i * sc + u] += 1;
                        e[k * sc + v] += 1;
                        p.add_term(e, sub[(u, v)].clone());
                    }
                }
                p.compile().map(|c| c.reduce_mod(q)).ok_or(Error::Overflow)
            })
            .collect::<Result<Vec<_>>>()?;
        out.push((sub, Piece { polys, nvars: m * sc, mult: 1 }));
    }
    Ok(out.into_iter().map(|(_, p)| p).collect())
}

fn check_gram_pair(a: &IntMatrix, b: &IntMatrix) -> Result<()> {
    if !a.is_square() || !b.is_square() {
        return Err(Error::invalid("Gram matrices must be square"));
    }
    if !a.is_symmetric() || !b.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    Ok(())
}

/// `#{X mod q : XᵀAX ≡ B}` over the `m(m+1)/2` upper entries.
pub fn raghavan_count(a: &IntMatrix, b: &IntMatrix, q: u64) -> Result<u128> {
    check_gram_pair(a, b)?;
    if q == 0 || q > u32::MAX as u64 {
        return Err(Error::invalid("modulus must lie in 1..2^32"));
    }
    let m = b.rows();
    let entries: Vec<BigInt> = multi_index_set(m, 2)
        .iter()
        .map(|j| b[(j.entries()[0] as usize, j.entries()[1] as usize)].clone())
        .collect();
    let target = residues(&entries, q);
    count_solutions(&raghavan_pieces(a, m, q)?, &target, q, CHI_P_WORK_LIMIT)
}

/// `χ_p` in Raghavan's normalization, `(p^l)^{m(m+1)/2 − ms}·#{X : XᵀAX ≡ B}`.
pub fn raghavan_chi_p(a: &IntMatrix, b: &IntMatrix, p: u64, l: u32) -> Result<DensityEstimate> {
    let q = prime_power(p, l)?;
    let count = raghavan_count(a, b, q)?;
    let (s, m) = (a.rows() as i64, b.rows() as i64);
    let value = scaled_count(count, q, m * (m + 1) / 2 - m * s);
    Ok(DensityEstimate::exact(value, Level::PAdic { p, l }))
}
