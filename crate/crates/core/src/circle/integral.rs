use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use super::{e, exponential_sum, gauss_sum, ArcPoint, ComplexSum};
use crate::enumerate::BlockBox;
use crate::rng::{self, StreamTag};
use crate::{Error, ExpandedSystem, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntegralMethod {
    /// Tensor Gauss–Legendre with `nodes` and `2·nodes` points per axis; the
    /// finer value is returned and the difference is the error.
    Quadrature { nodes: usize },
    /// Uniform sampling with the standard error.
    MonteCarlo { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralEstimate {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: u128,
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// `v_𝒫(β) = ∫_𝒫 e(𝔉(ξ̄; β)) dξ̄` over the real box.
pub fn oscillatory_integral(
    sys: &ExpandedSystem,
    beta: &[f64],
    bx: &BlockBox,
    method: IntegralMethod,
    budget: u128,
) -> Result<IntegralEstimate> {
    if beta.len() != sys.r() {
        return Err(Error::Dimension { expected: sys.r(), got: beta.len() });
    }
    if bx.m() != sys.m() {
        return Err(Error::Dimension { expected: sys.m(), got: bx.m() });
    }
    let dim = sys.nvars();
    let scale: Vec<f64> = (0..dim).map(|v| bx.bounds()[v / sys.s()]).collect();
    let phase = |xi: &[f64]| -> f64 { sys.compiled().iter().zip(beta).map(|(p, b)| b * p.eval_f64(xi)).sum() };
    match method {
        IntegralMethod::Quadrature { nodes } => {
            if nodes == 0 {
                return Err(Error::invalid("quadrature needs at least one node"));
            }
            let coarse_n = (nodes as u128).saturating_pow(dim as u32);
            let fine_n = (2 * nodes as u128).saturating_pow(dim as u32);
            Error::check_budget(coarse_n.saturating_add(fine_n), budget)?;
            let coarse = tensor_rule(nodes, &scale, &phase);
            let fine = tensor_rule(2 * nodes, &scale, &phase);
            Ok(IntegralEstimate { value: fine, error: (fine - coarse).norm(), evaluations: coarse_n + fine_n })
        }
        IntegralMethod::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return Err(Error::invalid("Monte Carlo needs at least two samples"));
            }
            Error::check_budget(samples as u128, budget)?;
            let mut rng = rng::stream(seed, StreamTag::Oscillatory, 0);
            let mut xi = vec![0.0; dim];
            let (mut sum, mut sq) = (ComplexSum::new(), 0.0);
            for _ in 0..samples {
                for (v, &p) in xi.iter_mut().zip(&scale) {
                    *v = p * (2.0 * rng.gen::<f64>() - 1.0);
                }
                let z = e(phase(&xi));
                sum += z;
                sq += z.norm_sqr();
            }
            let n = samples as f64;
            let mean = sum.value() / n;
            let var = (sq / n - mean.norm_sqr()).max(0.0) * n / (n - 1.0);
            let vol = bx.volume(sys.s());
            Ok(IntegralEstimate { value: mean * vol, error: vol * libm::sqrt(var / n), evaluations: samples as u128 })
        }
    }
}

fn tensor_rule(n: usize, scale: &[f64], phase: &dyn Fn(&[f64]) -> f64) -> Complex64 {
    let dim = scale.len();
    let (x, w) = gauss_legendre(n);
    let mut idx = vec![0usize; dim];
    let mut xi = vec![0.0; dim];
    let jac: f64 = scale.iter().product();
    let mut acc = ComplexSum::new();
    loop {
        let mut weight = jac;
        for v in 0..dim {
            xi[v] = scale[v] * x[idx[v]];
            weight *= w[idx[v]];
        }
        acc += e(phase(&xi)) * weight;
        let mut v = 0;
        while v < dim {
            idx[v] += 1;
            if idx[v] < n {
                break;
            }
            idx[v] = 0;
            v += 1;
        }
        if v == dim {
            break;
        }
    }
    acc.value()
}

/// `T(α)` next to its major-arc model `q^{−ms} S_q(a) v_𝒫(β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MajorArcReport {
    pub t: Complex64,
    pub gauss: Complex64,
    pub integral: IntegralEstimate,
    pub approx: Complex64,
    pub residual: f64,
}

pub fn major_arc_residual(
    sys: &ExpandedSystem,
    arc: &ArcPoint,
    bx: &BlockBox,
    method: IntegralMethod,
    budget: u128,
) -> Result<MajorArcReport> {
    let h = arc
        .homogenized
        .as_ref()
        .ok_or_else(|| Error::invalid("arc point is not homogenized"))?;
    let t = exponential_sum(sys, &arc.alpha, bx)?;
    let gauss = gauss_sum(sys, &h.a, h.q)?;
    let integral = oscillatory_integral(sys, &h.beta, bx, method, budget)?;
    let norm = libm::pow(h.q as f64, -(sys.nvars() as f64));
    let approx = gauss * integral.value * norm;
    Ok(MajorArcReport { t, gauss, integral, approx, residual: (t - approx).norm() })
}
