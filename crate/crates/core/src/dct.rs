//! Orthonormal DCT-II and its inverse (DCT-III).
//!
//! The DCT-II basis `cos(πq(i + ½)/N)` is even about both half-sample
//! boundaries, exactly the symmetry of the reflective halo, so it
//! diagonalizes every reflective difference operator. Large lengths go
//! through a single complex FFT of the even/odd reordered input; short
//! lengths use the dense cosine matrix.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// Lengths below this use the dense matrix.
pub const DENSE_BELOW: usize = 32;

enum Kernel {
    Dense {
        // row q holds w_q cos(πq(i+½)/N)
        matrix: Vec<f64>,
    },
    Fft {
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
        // e^{-iπq/(2N)}
        twiddle: Vec<Complex<f64>>,
    },
}

pub struct CosineTransform {
    n: usize,
    weights: Vec<f64>,
    kernel: Kernel,
}

/// Per-call work space; one per worker.
pub struct Scratch {
    buf: Vec<Complex<f64>>,
    fft: Vec<Complex<f64>>,
    tmp: Vec<f64>,
}

impl std::fmt::Debug for CosineTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.kernel {
            Kernel::Dense { .. } => "dense",
            Kernel::Fft { .. } => "fft",
        };
        f.debug_struct("CosineTransform").field("n", &self.n).field("kernel", &kind).finish()
    }
}

impl CosineTransform {
    pub fn new(n: usize) -> Self {
        if n < DENSE_BELOW {
            Self::dense(n)
        } else {
            Self::fft(n)
        }
    }

    fn weights(n: usize) -> Vec<f64> {
        (0..n).map(|q| if q == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() }).collect()
    }

    pub fn dense(n: usize) -> Self {
        let weights = Self::weights(n);
        let mut matrix = vec![0.0; n * n];
        for q in 0..n {
            for i in 0..n {
                matrix[q * n + i] = weights[q] * basis_cos(q, i, n);
            }
        }
        CosineTransform { n, weights, kernel: Kernel::Dense { matrix } }
    }

    pub fn fft(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let twiddle = (0..n).map(|q| Complex::from_polar(1.0, -PI * q as f64 / (2.0 * n as f64))).collect();
        CosineTransform { n, weights: Self::weights(n), kernel: Kernel::Fft { forward, inverse, twiddle } }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn scratch(&self) -> Scratch {
        let fft_len = match &self.kernel {
            Kernel::Fft { forward, inverse, .. } => {
                forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len())
            }
            Kernel::Dense { .. } => 0,
        };
        Scratch {
            buf: vec![Complex::default(); self.n],
            fft: vec![Complex::default(); fft_len],
            tmp: vec![0.0; self.n],
        }
    }

    /// In-place orthonormal DCT-II.
    pub fn forward(&self, x: &mut [f64], s: &mut Scratch) {
        let n = self.n;
        assert_eq!(x.len(), n);
        match &self.kernel {
            Kernel::Dense { matrix } => {
                for q in 0..n {
                    let row = &matrix[q * n..(q + 1) * n];
                    s.tmp[q] = row.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
                }
                x.copy_from_slice(&s.tmp);
            }
            Kernel::Fft { forward, twiddle, .. } => {
                let half = n.div_ceil(2);
                for m in 0..half {
                    s.buf[m] = Complex::new(x[2 * m], 0.0);
                }
                for m in 0..n / 2 {
                    s.buf[n - 1 - m] = Complex::new(x[2 * m + 1], 0.0);
                }
                forward.process_with_scratch(&mut s.buf, &mut s.fft);
                for q in 0..n {
                    x[q] = self.weights[q] * (twiddle[q] * s.buf[q]).re;
                }
            }
        }
    }

    /// In-place orthonormal DCT-III, the inverse of [`Self::forward`].
    pub fn inverse(&self, x: &mut [f64], s: &mut Scratch) {
        let n = self.n;
        assert_eq!(x.len(), n);
        match &self.kernel {
            Kernel::Dense { matrix } => {
                s.tmp.iter_mut().for_each(|v| *v = 0.0);
                for q in 0..n {
                    let row = &matrix[q * n..(q + 1) * n];
                    let c = x[q];
                    for (t, m) in s.tmp.iter_mut().zip(row) {
                        *t += m * c;
                    }
                }
                x.copy_from_slice(&s.tmp);
            }
            Kernel::Fft { inverse, twiddle, .. } => {
                // unnormalized DCT-II coefficients C_q = X_q / w_q
                for q in 0..n {
                    s.tmp[q] = x[q] / self.weights[q];
                }
                for q in 0..n {
                    let c_rev = if q == 0 { 0.0 } else { s.tmp[n - q] };
                    s.buf[q] = twiddle[q].conj() * Complex::new(s.tmp[q], -c_rev);
                }
                inverse.process_with_scratch(&mut s.buf, &mut s.fft);
                let inv_n = 1.0 / n as f64;
                let half = n.div_ceil(2);
                for m in 0..half {
                    x[2 * m] = s.buf[m].re * inv_n;
                }
                for m in 0..n / 2 {
                    x[2 * m + 1] = s.buf[n - 1 - m].re * inv_n;
                }
            }
        }
    }
}

/// `cos(πq(i + ½)/n)` with the angle reduced exactly in integers first.
pub fn basis_cos(q: usize, i: usize, n: usize) -> f64 {
    let num = (q as u128 * (2 * i as u128 + 1)) % (4 * n as u128);
    (PI * num as f64 / (2.0 * n as f64)).cos()
}
