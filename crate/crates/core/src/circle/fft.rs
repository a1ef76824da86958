//! Radix-2 complex FFT, one- and multi-dimensional.

use alloc::vec::Vec;

use num_complex::Complex64;

/// In-place transform `X_k = Σ_n x_n e(sign·kn/N)` for `N` a power of two.
pub fn fft(data: &mut [Complex64], sign: f64) {
    let n = data.len();
    assert!(n.is_power_of_two(), "FFT length must be a power of two");
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            data.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let twiddles: Vec<Complex64> = (0..half)
            .map(|k| {
                let t = sign * core::f64::consts::TAU * k as f64 / len as f64;
                Complex64::new(libm::cos(t), libm::sin(t))
            })
            .collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let a = data[start + k];
                let b = data[start + k + half] * twiddles[k];
                data[start + k] = a + b;
                data[start + k + half] = a - b;
            }
        }
        len *= 2;
    }
}

/// Transform along every axis of a row-major array with the given shape
/// (last axis contiguous).
pub fn fft_nd(data: &mut [Complex64], shape: &[usize], sign: f64) {
    let total: usize = shape.iter().product();
    assert_eq!(total, data.len());
    let mut stride = 1;
    let mut line = Vec::new();
    for &len in shape.iter().rev() {
        let block = stride * len;
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                line.clear();
                line.extend((0..len).map(|k| data[outer + inner + k * stride]));
                fft(&mut line, sign);
                for (k, v) in line.iter().enumerate() {
                    data[outer + inner + k * stride] = *v;
                }
            }
        }
        stride = block;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn naive(x: &[Complex64], sign: f64) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let t = sign * core::f64::consts::TAU * (k * j) as f64 / n as f64;
                        v * Complex64::new(libm::cos(t), libm::sin(t))
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        let x: Vec<Complex64> = (0..16).map(|k| Complex64::new(k as f64 * 0.3 - 1.0, (k * k % 7) as f64)).collect();
        for sign in [1.0, -1.0] {
            let mut y = x.clone();
            fft(&mut y, sign);
            for (a, b) in y.iter().zip(naive(&x, sign)) {
                assert!((a - b).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn two_dimensional_delta() {
        // A delta at (1, 2) in a 4×8 grid transforms to e(±(k₀/4 + 2k₁/8)).
        let mut x = vec![Complex64::new(0.0, 0.0); 32];
        x[8 + 2] = Complex64::new(1.0, 0.0);
        fft_nd(&mut x, &[4, 8], 1.0);
        for k0 in 0..4 {
            for k1 in 0..8 {
                let t = core::f64::consts::TAU * (k0 as f64 / 4.0 + 2.0 * k1 as f64 / 8.0);
                let want = Complex64::new(libm::cos(t), libm::sin(t));
                assert!((x[k0 * 8 + k1] - want).norm() < 1e-12);
            }
        }
    }
}
