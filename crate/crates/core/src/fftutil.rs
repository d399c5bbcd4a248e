//! Small n-dimensional FFT helpers over `rustfft`.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// In-place n-dimensional complex FFT on row-major data (last axis fastest).
/// Unnormalized in both directions, matching `rustfft`.
pub fn fft_nd(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    let total: usize = shape.iter().product();
    assert_eq!(data.len(), total, "data length must match the shape");
    let mut planner = FftPlanner::new();
    for (axis, &n) in shape.iter().enumerate() {
        if n == 1 {
            continue;
        }
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        let stride: usize = shape[axis + 1..].iter().product();
        let block = stride * n;
        let mut lane = vec![Complex64::default(); n];
        for base in 0..total / block {
            for offset in 0..stride {
                let start = base * block + offset;
                for k in 0..n {
                    lane[k] = data[start + k * stride];
                }
                fft.process(&mut lane);
                for k in 0..n {
                    data[start + k * stride] = lane[k];
                }
            }
        }
    }
}

/// Row-major strides for a shape (last axis fastest).
pub fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

/// Decompose a linear row-major index into per-axis indices.
pub fn unravel(mut idx: usize, shape: &[usize], out: &mut [usize]) {
    for i in (0..shape.len()).rev() {
        out[i] = idx % shape[i];
        idx /= shape[i];
    }
}

/// Linear row-major index from per-axis indices.
pub fn ravel(indices: &[usize], shape: &[usize]) -> usize {
    let mut idx = 0usize;
    for (i, &k) in indices.iter().enumerate() {
        debug_assert!(k < shape[i]);
        idx = idx * shape[i] + k;
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_2d() {
        let shape = [4usize, 6];
        let mut data: Vec<Complex64> = (0..24)
            .map(|i| Complex64::new(i as f64, (i * i % 7) as f64))
            .collect();
        let orig = data.clone();
        fft_nd(&mut data, &shape, false);
        fft_nd(&mut data, &shape, true);
        let n = 24.0;
        for (a, b) in data.iter().zip(&orig) {
            assert!((a / n - b).norm() < 1e-12);
        }
    }

    #[test]
    fn forward_matches_direct_dft_1d() {
        let shape = [8usize];
        let mut data: Vec<Complex64> =
            (0..8).map(|i| Complex64::new((i as f64).sin(), 0.25 * i as f64)).collect();
        let orig = data.clone();
        fft_nd(&mut data, &shape, false);
        for k in 0..8 {
            let mut sum = Complex64::default();
            for j in 0..8 {
                let phase = -2.0 * std::f64::consts::PI * (j * k) as f64 / 8.0;
                sum += orig[j] * Complex64::new(phase.cos(), phase.sin());
            }
            assert!((sum - data[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn ravel_unravel_agree() {
        let shape = [3usize, 4, 5];
        let mut idx = [0usize; 3];
        for lin in 0..60 {
            unravel(lin, &shape, &mut idx);
            assert_eq!(ravel(&idx, &shape), lin);
        }
    }
}
