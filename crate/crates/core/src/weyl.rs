//! Finite Weyl calculus on `Z_N`: quantization of phase-plane symbols to
//! `N x N` operators, the inverse map, covariance identities linking matrix
//! elements to the symbol-plane STFT, and twisted products.
//!
//! The quantization rule is
//!
//! ```text
//! (sigma^w f)(x) = (1/N) sum_{y,xi} sigma(h(x+y), xi) e^{2 pi i (x-y) xi / N} f(y),
//! ```
//!
//! with `h = 2^{-1} mod N`. The prefactor `1/N` is pinned by requiring
//! `quantize(1) = identity`. With the crate's unnormalized inner product the
//! calculus then satisfies, exactly in exact arithmetic:
//!
//! - `<sigma^w f, g> = (1/N) <sigma, W(g,f)>`;
//! - `dequantize(outer(f,g)) = W(f,g)` (rank-one operators have Wigner
//!   symbols with constant exactly 1);
//! - `|<sigma^w pi(z)g, pi(w)g>| = (1/N) |V_Phi sigma(h(w+z), j(w-z))|`
//!   where `Phi = W(g,g)` — the matrix elements of `sigma^w` against a Gabor
//!   system are, in modulus, samples of a symbol-plane STFT.
//!
//! The convention constants `1/N` and `1` above are measured facts of this
//! normalization and are frozen by regression tests.

use crate::error::{Error, Result};
use crate::phase::{stft, stft2, tf_shift, wigner, PhasePoint, Signal, Symbol};
use crate::util::{half_mod, Dft, SeededRng, C64};
use nalgebra::DMatrix;

/// Dense `N x N` operator acting on [`Signal`]s.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    n: usize,
    mat: DMatrix<C64>,
}

impl OperatorMatrix {
    pub fn new(mat: DMatrix<C64>) -> Result<Self> {
        let n = mat.nrows();
        if n == 0 || n % 2 == 0 || mat.ncols() != n {
            return Err(Error::InvalidParameter(format!(
                "operator matrix must be square with odd size, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(OperatorMatrix { n, mat })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        Self::new(DMatrix::from_fn(n, n, |r, c| f(r, c)))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n, n))
    }

    /// Rank-one operator `h -> <h, g> f`.
    pub fn outer(f: &Signal, g: &Signal) -> Result<Self> {
        if f.n() != g.n() {
            return Err(Error::LatticeMismatch(format!(
                "signal lengths differ: {} vs {}",
                f.n(),
                g.n()
            )));
        }
        let n = f.n();
        Self::from_fn(n, |r, c| f.values()[r] * g.values()[c].conj())
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }
    pub fn entry(&self, x: usize, y: usize) -> C64 {
        self.mat[(x, y)]
    }

    pub fn apply(&self, f: &Signal) -> Result<Signal> {
        if f.n() != self.n {
            return Err(Error::LatticeMismatch(format!(
                "operator size {} does not match signal length {}",
                self.n,
                f.n()
            )));
        }
        let mut out = vec![C64::default(); self.n];
        for (r, slot) in out.iter_mut().enumerate() {
            let mut acc = C64::default();
            for c in 0..self.n {
                acc += self.mat[(r, c)] * f.values()[c];
            }
            *slot = acc;
        }
        Signal::new(out)
    }

    pub fn compose(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        if self.n != other.n {
            return Err(Error::LatticeMismatch(format!(
                "operator sizes differ: {} vs {}",
                self.n, other.n
            )));
        }
        Ok(OperatorMatrix {
            n: self.n,
            mat: &self.mat * &other.mat,
        })
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        OperatorMatrix {
            n: self.n,
            mat: self.mat.adjoint(),
        }
    }

    pub fn scale(&self, c: C64) -> OperatorMatrix {
        OperatorMatrix {
            n: self.n,
            mat: self.mat.map(|v| v * c),
        }
    }

    pub fn add(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        if self.n != other.n {
            return Err(Error::LatticeMismatch("operator sizes differ".into()));
        }
        Ok(OperatorMatrix {
            n: self.n,
            mat: &self.mat + &other.mat,
        })
    }

    /// Largest entry modulus of the difference, a cheap operator distance.
    pub fn max_abs_diff(&self, other: &OperatorMatrix) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.n {
            for c in 0..self.n {
                worst = worst.max((self.mat[(r, c)] - other.mat[(r, c)]).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Spectral norm via SVD.
    pub fn operator_norm(&self) -> f64 {
        self.mat
            .clone()
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }
}

/// Weyl quantization: the kernel is
/// `K(x,y) = (1/N) sum_xi sigma(h(x+y), xi) e^{2 pi i (x-y) xi / N}`,
/// computed with one DFT per symbol row.
pub fn quantize(sigma: &Symbol) -> OperatorMatrix {
    let n = sigma.n();
    let h = half_mod(n);
    let plan = Dft::forward(n);
    // rows[u][k] = sum_xi sigma(u, xi) e^{-2 pi i k xi / N}
    let mut rows = sigma.values().to_vec();
    plan.run_rows(&mut rows);
    let scale = 1.0 / n as f64;
    let mat = DMatrix::from_fn(n, n, |x, y| {
        let u = (h * (x + y)) % n;
        // e^{+2 pi i (x-y) xi} sum = forward DFT evaluated at (y - x) mod N.
        let k = (y + n - x) % n;
        rows[u * n + k] * scale
    });
    OperatorMatrix { n, mat }
}

/// Inverse of [`quantize`]: the symbol is the DFT of the kernel along the
/// antidiagonal parametrization, `sigma(u, xi) = sum_t K(u+ht, u-ht) e^{-2 pi i t xi / N}`.
pub fn dequantize(t: &OperatorMatrix) -> Symbol {
    let n = t.n;
    let h = half_mod(n);
    let plan = Dft::forward(n);
    let mut values = vec![C64::default(); n * n];
    for u in 0..n {
        let row = &mut values[u * n..(u + 1) * n];
        for s in 0..n {
            let x = (u + h * s) % n;
            let y = (u + n * n - h * s) % n;
            row[s] = t.mat[(x, y)];
        }
        plan.run(row);
    }
    Symbol::new(n, values).expect("kernel dimensions are valid by construction")
}

/// Twisted product `sigma # tau`, defined by
/// `quantize(sigma # tau) = quantize(sigma) . quantize(tau)` and computed by
/// compose-then-dequantize (exact in finite dimensions).
pub fn twisted_product(sigma: &Symbol, tau: &Symbol) -> Result<Symbol> {
    if sigma.n() != tau.n() {
        return Err(Error::LatticeMismatch(format!(
            "symbol moduli differ: {} vs {}",
            sigma.n(),
            tau.n()
        )));
    }
    let prod = quantize(sigma).compose(&quantize(tau))?;
    Ok(dequantize(&prod))
}

#[derive(Debug, Clone, Copy)]
pub struct CovarianceReport {
    /// Worst deviation of `|<sigma^w pi(z)g, pi(w)g>|` from
    /// `constant * |V_Phi sigma(h(w+z), j(w-z))|`, relative to the largest
    /// matrix-element modulus encountered.
    pub max_rel_err: f64,
    /// Worst deviation of the read-back direction: `|V_Phi sigma(u, v)|`
    /// reconstructed from the matrix element at `z = u + h j(v)`,
    /// `w = u - h j(v)`, relative to the largest STFT modulus encountered.
    pub read_back_max_rel_err: f64,
    /// The measured convention constant relating the two sides (`1/N` for
    /// this normalization; pinned by a regression test).
    pub constant: f64,
    /// Number of `(z, w)` pairs checked.
    pub pairs: usize,
}

/// Verifies that Gabor matrix elements of `sigma^w` are, in modulus, samples
/// of the symbol-plane STFT with window `Phi = W(g,g)`:
///
/// ```text
/// |<sigma^w pi(z)g, pi(w)g>| = (1/N) |V_Phi sigma(h(w+z), j(w-z))|,
/// ```
///
/// checked over the full `(z,w)` grid for `N <= 15` and over a seeded sample
/// of at least `10^4` pairs otherwise. The same data re-indexed gives the
/// read-back direction, which reconstructs `|V_Phi sigma|` from matrix
/// elements; both worst-case errors are reported.
pub fn covariance_check(sigma: &Symbol, g: &Signal) -> Result<CovarianceReport> {
    let n = sigma.n();
    if g.n() != n {
        return Err(Error::LatticeMismatch(format!(
            "symbol modulus {} does not match window length {}",
            n,
            g.n()
        )));
    }
    if g.norm_sq() == 0.0 {
        return Err(Error::DegenerateWindow("covariance window is zero".into()));
    }
    let op = quantize(sigma);
    let phi = wigner(g, g)?;
    let table = stft2(sigma, &phi)?;
    let constant = 1.0 / n as f64;

    // Forward direction: group pairs by z; <T pi(z)g, pi(w)g> over all w is
    // one STFT of T pi(z) g with window g.
    let zs: Vec<PhasePoint> = if n <= 15 {
        (0..n * n)
            .map(|l| PhasePoint { x: l / n, xi: l % n })
            .collect()
    } else {
        let mut rng = SeededRng::new(0x5eed_c01a);
        (0..128)
            .map(|_| PhasePoint {
                x: rng.below(n),
                xi: rng.below(n),
            })
            .collect()
    };
    let full = n <= 15;
    let mut rng_w = SeededRng::new(0x5eed_c01b);
    let mut worst_abs = 0.0f64;
    let mut scale = 0.0f64;
    let mut pairs = 0usize;
    for &z in &zs {
        let moved = op.apply(&tf_shift(z, g))?;
        let v = stft(&moved, g)?;
        let ws: Vec<PhasePoint> = if full {
            (0..n * n)
                .map(|l| PhasePoint { x: l / n, xi: l % n })
                .collect()
        } else {
            (0..128)
                .map(|_| PhasePoint {
                    x: rng_w.below(n),
                    xi: rng_w.below(n),
                })
                .collect()
        };
        for w in ws {
            let lhs = v.at_point(w).norm();
            let arg_z = w.add(z, n).halve(n);
            let arg_zeta = w.sub(z, n).rot_j(n);
            let rhs = constant * table.at(arg_z, arg_zeta).norm();
            worst_abs = worst_abs.max((lhs - rhs).abs());
            scale = scale.max(lhs.max(rhs));
            pairs += 1;
        }
    }
    let max_rel_err = if scale > 0.0 { worst_abs / scale } else { 0.0 };

    // Read-back direction: enumerate (u, v) on the symbol plane, reconstruct
    // |V_Phi sigma(u, v)| from one directly computed matrix element.
    let uvs: Vec<(PhasePoint, PhasePoint)> = if full {
        let mut all = Vec::with_capacity(n * n * n * n);
        for ul in 0..n * n {
            for vl in 0..n * n {
                all.push((
                    PhasePoint {
                        x: ul / n,
                        xi: ul % n,
                    },
                    PhasePoint {
                        x: vl / n,
                        xi: vl % n,
                    },
                ));
            }
        }
        all
    } else {
        let mut rng = SeededRng::new(0x5eed_c01c);
        (0..10_000)
            .map(|_| {
                (
                    PhasePoint {
                        x: rng.below(n),
                        xi: rng.below(n),
                    },
                    PhasePoint {
                        x: rng.below(n),
                        xi: rng.below(n),
                    },
                )
            })
            .collect()
    };
    let mut rb_abs = 0.0f64;
    let mut rb_scale = 0.0f64;
    for (u, v) in uvs {
        let hjv = v.rot_j(n).halve(n);
        let z = u.add(hjv, n);
        let w = u.sub(hjv, n);
        let elem = op.apply(&tf_shift(z, g))?.inner(&tf_shift(w, g));
        let lhs = table.at(u, v).norm();
        let rhs = elem.norm() / constant;
        rb_abs = rb_abs.max((lhs - rhs).abs());
        rb_scale = rb_scale.max(lhs.max(rhs));
    }
    let read_back_max_rel_err = if rb_scale > 0.0 { rb_abs / rb_scale } else { 0.0 };

    Ok(CovarianceReport {
        max_rel_err,
        read_back_max_rel_err,
        constant,
        pairs,
    })
}
