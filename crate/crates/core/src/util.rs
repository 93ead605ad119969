//! Shared numeric helpers: roots of unity, the periodic (wrap-around) metric
//! on `Z_N`, FFT plans, and the seeded random streams used by every
//! experiment.
//!
//! Randomness convention: all seeded draws use the ChaCha20 stream cipher as
//! a counter-based generator, seeded via `ChaCha20Rng::seed_from_u64`.
//! Uniform doubles are the standard 53-bit construction `(x >> 11) * 2^-53`
//! from one 64-bit output word; complex Gaussians are Box-Muller pairs of
//! those uniforms (see [`SeededRng::complex_gaussian`]). Any implementation
//! following these conventions reproduces the exact streams.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

pub type C64 = Complex64;

/// `e^{2 pi i k / n}` with the angle reduced before evaluation so large
/// multiples of `n` do not lose precision.
pub fn root_of_unity(n: usize, k: i64) -> C64 {
    let m = k.rem_euclid(n as i64);
    C64::from_polar(1.0, 2.0 * PI * m as f64 / n as f64)
}

/// Canonical representative of `k mod n` in `[0, n)`.
pub fn modn(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// Signed representative of `k mod n` in `(-n/2, n/2]`.
pub fn signed_rep(k: i64, n: usize) -> i64 {
    let m = k.rem_euclid(n as i64);
    if 2 * m > n as i64 {
        m - n as i64
    } else {
        m
    }
}

/// Periodic absolute value `|k|_N = min(k mod N, N - k mod N)`.
pub fn per_abs(k: i64, n: usize) -> f64 {
    signed_rep(k, n).unsigned_abs() as f64
}

/// Periodic Euclidean length of a phase-plane point.
pub fn per_norm2(p: (i64, i64), n: usize) -> f64 {
    let a = per_abs(p.0, n);
    let b = per_abs(p.1, n);
    (a * a + b * b).sqrt()
}

/// `<p> = sqrt(1 + |p|_N^2)`, the periodic Japanese bracket.
pub fn per_bracket(p: (i64, i64), n: usize) -> f64 {
    let a = per_abs(p.0, n);
    let b = per_abs(p.1, n);
    (1.0 + a * a + b * b).sqrt()
}

/// Multiplicative inverse of 2 in `Z_N` for odd `N`: `(N + 1) / 2`.
pub fn half_mod(n: usize) -> usize {
    debug_assert!(n % 2 == 1);
    (n + 1) / 2
}

/// Forward DFT plan of size `n`: `F(k) = sum_t x(t) e^{-2 pi i k t / n}`.
///
/// Wraps rustfft (unnormalized, mixed-radix/Bluestein so odd sizes are fine)
/// and owns the scratch buffer.
pub struct Dft {
    n: usize,
    plan: Arc<dyn Fft<f64>>,
    scratch_len: usize,
}

impl Dft {
    pub fn forward(n: usize) -> Self {
        let plan = FftPlanner::new().plan_fft_forward(n);
        let scratch_len = plan.get_inplace_scratch_len();
        Dft {
            n,
            plan,
            scratch_len,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// Transform `buf` in place. `buf.len()` must equal the plan size.
    pub fn run(&self, buf: &mut [C64]) {
        debug_assert_eq!(buf.len(), self.n);
        let mut scratch = vec![C64::default(); self.scratch_len];
        self.plan.process_with_scratch(buf, &mut scratch);
    }

    /// Transform every length-`n` row of a row-major `rows x n` buffer.
    pub fn run_rows(&self, data: &mut [C64]) {
        debug_assert_eq!(data.len() % self.n, 0);
        let mut scratch = vec![C64::default(); self.scratch_len];
        for row in data.chunks_exact_mut(self.n) {
            self.plan.process_with_scratch(row, &mut scratch);
        }
    }
}

/// Two-dimensional forward DFT on an `n x n` row-major grid:
/// `F(k1,k2) = sum_{t1,t2} x(t1,t2) e^{-2 pi i (k1 t1 + k2 t2) / n}`.
pub struct Dft2 {
    n: usize,
    plan: Dft,
}

impl Dft2 {
    pub fn new(n: usize) -> Self {
        Dft2 {
            n,
            plan: Dft::forward(n),
        }
    }

    pub fn run(&self, data: &mut [C64]) {
        let n = self.n;
        debug_assert_eq!(data.len(), n * n);
        // Rows (second index), then columns (first index) via transpose.
        self.plan.run_rows(data);
        transpose_square(data, n);
        self.plan.run_rows(data);
        transpose_square(data, n);
    }
}

fn transpose_square(data: &mut [C64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// Seeded, counter-based random stream (ChaCha20). See the module docs for
/// the exact cross-language conventions.
pub struct SeededRng(ChaCha20Rng);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng(ChaCha20Rng::seed_from_u64(seed))
    }

    /// Uniform double in `[0, 1)` (53-bit construction).
    pub fn uniform(&mut self) -> f64 {
        (self.0.gen::<u64>() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Uniform integer in `[0, bound)` by scaling one uniform draw.
    pub fn below(&mut self, bound: usize) -> usize {
        let u = self.uniform();
        ((u * bound as f64) as usize).min(bound - 1)
    }

    /// Standard complex Gaussian: Box-Muller from two uniforms, normalized so
    /// `E|z|^2 = 1`.
    pub fn complex_gaussian(&mut self) -> C64 {
        let u1 = self.uniform().max(1e-300);
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let th = 2.0 * PI * u2;
        C64::new(r * th.cos(), r * th.sin()) / C64::new(2f64.sqrt(), 0.0)
    }

    /// Unit-modulus complex number with uniform phase.
    pub fn unit_phase(&mut self) -> C64 {
        C64::from_polar(1.0, 2.0 * PI * self.uniform())
    }
}
