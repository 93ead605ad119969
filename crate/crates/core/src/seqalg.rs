//! Phase-space lattices in `Z_N x Z_N`, weight families, and the solid
//! convolution algebras of sequences they induce.
//!
//! A separable lattice `Lambda = alpha Z_N x beta Z_N` (with `alpha, beta`
//! divisors of odd `N` and `alpha * beta < N`) carries weighted sequence
//! spaces `l^q_w(Lambda)` for `q` in `{1, inf}`. With the weight conditions
//! checked by [`check_algebra_weight`] these are Banach *-algebras under
//! convolution `(a * b)(lam) = sum_mu a(mu) b(lam - mu)` and involution
//! `a^*(lam) = conj(a(-lam))`, and they act boundedly on solid sequence
//! spaces over the same lattice.

use crate::error::{Error, Result};
use crate::util::{per_norm2, C64};
use std::f64::consts::PI;
use std::sync::Arc;

/// Separable lattice `alpha Z_N x beta Z_N` inside the finite phase plane.
///
/// Points are enumerated position-major: index `k * (N/beta) + l` holds the
/// point `(k*alpha, l*beta)` with `0 <= k < N/alpha`, `0 <= l < N/beta`.
/// The box `{0..alpha-1} x {0..beta-1}` is a fundamental domain whose lattice
/// translates tile the phase plane exactly once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseLattice {
    n: usize,
    alpha: usize,
    beta: usize,
    na: usize,
    nb: usize,
}

impl PhaseLattice {
    pub fn new(n: usize, alpha: usize, beta: usize) -> Result<Arc<Self>> {
        if n == 0 || n % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "modulus must be odd and positive, got N={n}"
            )));
        }
        if alpha == 0 || beta == 0 || n % alpha != 0 || n % beta != 0 {
            return Err(Error::InvalidParameter(format!(
                "lattice steps must divide N: N={n}, alpha={alpha}, beta={beta}"
            )));
        }
        if alpha * beta >= n {
            return Err(Error::InvalidParameter(format!(
                "undersampled lattice (alpha*beta must be < N): \
                 N={n}, alpha={alpha}, beta={beta}"
            )));
        }
        Ok(Arc::new(PhaseLattice {
            n,
            alpha,
            beta,
            na: n / alpha,
            nb: n / beta,
        }))
    }

    pub fn modulus(&self) -> usize {
        self.n
    }
    pub fn alpha(&self) -> usize {
        self.alpha
    }
    pub fn beta(&self) -> usize {
        self.beta
    }
    /// Number of lattice points `(N/alpha) * (N/beta)`.
    pub fn len(&self) -> usize {
        self.na * self.nb
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Canonical coordinates of the lattice point at `idx`.
    pub fn point(&self, idx: usize) -> (usize, usize) {
        let (k, l) = (idx / self.nb, idx % self.nb);
        (k * self.alpha, l * self.beta)
    }

    /// Index of a phase-plane point if it lies on the lattice.
    pub fn index_of(&self, p: (usize, usize)) -> Option<usize> {
        let (x, xi) = (p.0 % self.n, p.1 % self.n);
        if x % self.alpha == 0 && xi % self.beta == 0 {
            Some((x / self.alpha) * self.nb + xi / self.beta)
        } else {
            None
        }
    }

    /// Group addition on lattice indices (coordinates add mod `N`).
    pub fn add(&self, a: usize, b: usize) -> usize {
        let (ka, la) = (a / self.nb, a % self.nb);
        let (kb, lb) = (b / self.nb, b % self.nb);
        ((ka + kb) % self.na) * self.nb + (la + lb) % self.nb
    }

    /// Group subtraction on lattice indices.
    pub fn sub(&self, a: usize, b: usize) -> usize {
        let (ka, la) = (a / self.nb, a % self.nb);
        let (kb, lb) = (b / self.nb, b % self.nb);
        ((ka + self.na - kb) % self.na) * self.nb + (la + self.nb - lb) % self.nb
    }

    /// Group negation on a lattice index.
    pub fn neg(&self, a: usize) -> usize {
        self.sub(0, a)
    }

    /// Periodic Euclidean length `|lam|_N` of the point at `idx`.
    pub fn metric(&self, idx: usize) -> f64 {
        let (x, xi) = self.point(idx);
        per_norm2((x as i64, xi as i64), self.n)
    }

    /// Periodic bracket `<lam> = sqrt(1 + |lam|_N^2)`.
    pub fn bracket(&self, idx: usize) -> f64 {
        let r = self.metric(idx);
        (1.0 + r * r).sqrt()
    }

    /// The box fundamental domain `{0..alpha-1} x {0..beta-1}`.
    pub fn fundamental_domain(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.alpha * self.beta);
        for u in 0..self.alpha {
            for v in 0..self.beta {
                out.push((u, v));
            }
        }
        out
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.n == other.n && self.alpha == other.alpha && self.beta == other.beta
    }
}

/// Weight families over the periodic metric `|k|_N = min(k mod N, N - k mod N)`
/// (per coordinate, combined Euclidean).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightKind {
    /// `w = 1`.
    Flat,
    /// `<lam>^s = (1 + |lam|^2)^{s/2}`.
    Polynomial { s: f64 },
    /// `exp(delta * |lam|^b)` with `0 < b < 1`.
    Subexponential { delta: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSpec {
    pub kind: WeightKind,
}

/// Default subexponential parameters, matching the decay class used for
/// frame-window envelopes `|V_g g(z)| <= C exp(-delta |z|^b)`.
pub const SUBEXP_DEFAULT_DELTA: f64 = 0.2;
pub const SUBEXP_DEFAULT_B: f64 = 0.5;

impl WeightSpec {
    pub fn flat() -> Self {
        WeightSpec {
            kind: WeightKind::Flat,
        }
    }

    pub fn polynomial(s: f64) -> Result<Self> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "polynomial weight needs s >= 0, got {s}"
            )));
        }
        Ok(WeightSpec {
            kind: WeightKind::Polynomial { s },
        })
    }

    pub fn subexponential(delta: f64, b: f64) -> Result<Self> {
        if !(delta > 0.0) || !(b > 0.0 && b < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "subexponential weight needs delta > 0 and 0 < b < 1, \
                 got delta={delta}, b={b}"
            )));
        }
        Ok(WeightSpec {
            kind: WeightKind::Subexponential { delta, b },
        })
    }

    pub fn subexponential_default() -> Self {
        Self::subexponential(SUBEXP_DEFAULT_DELTA, SUBEXP_DEFAULT_B).unwrap()
    }

    fn of_radius(&self, r: f64) -> f64 {
        match self.kind {
            WeightKind::Flat => 1.0,
            WeightKind::Polynomial { s } => (1.0 + r * r).powf(s / 2.0),
            WeightKind::Subexponential { delta, b } => (delta * r.powf(b)).exp(),
        }
    }

    /// Weight of a phase-plane point under the periodic metric mod `n`.
    pub fn eval_periodic(&self, p: (i64, i64), n: usize) -> f64 {
        self.of_radius(per_norm2(p, n))
    }

    /// Weight of an integer point of `Z^2` without periodic wrap (used by
    /// the asymptotic growth profile).
    pub fn eval_unwrapped(&self, p: (i64, i64)) -> f64 {
        let r = ((p.0 * p.0 + p.1 * p.1) as f64).sqrt();
        self.of_radius(r)
    }
}

/// Norm exponent of the sequence algebra; only the endpoint spaces are used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormExponent {
    One,
    Infinity,
}

/// A solid convolution algebra `l^q_w(Lambda)`: weight, endpoint exponent,
/// and the lattice, with per-point weight values precomputed.
#[derive(Debug, Clone)]
pub struct AlgebraSpec {
    weight: WeightSpec,
    q: NormExponent,
    lattice: Arc<PhaseLattice>,
    w: Vec<f64>,
}

impl AlgebraSpec {
    /// Builds the algebra after checking weight admissibility: `q = 1` needs
    /// a submultiplicative weight (all provided kinds qualify); `q = inf`
    /// needs a weight whose reciprocal is summable on the unbounded lattice,
    /// i.e. polynomial with `s > 2` on the 2-D phase lattice, or
    /// subexponential.
    pub fn new(
        weight: WeightSpec,
        q: NormExponent,
        lattice: Arc<PhaseLattice>,
    ) -> Result<Self> {
        let report = check_algebra_weight(&weight, q, &lattice);
        if !report.ok {
            return Err(Error::InvalidParameter(format!(
                "weight {:?} is not admissible for q={:?} \
                 (reciprocal not summable on the unbounded lattice)",
                weight.kind, q
            )));
        }
        let w = (0..lattice.len())
            .map(|i| {
                let (x, xi) = lattice.point(i);
                weight.eval_periodic((x as i64, xi as i64), lattice.modulus())
            })
            .collect();
        Ok(AlgebraSpec {
            weight,
            q,
            lattice,
            w,
        })
    }

    pub fn weight(&self) -> &WeightSpec {
        &self.weight
    }
    pub fn q(&self) -> NormExponent {
        self.q
    }
    pub fn lattice(&self) -> &Arc<PhaseLattice> {
        &self.lattice
    }
    /// Weight value at lattice index `idx`.
    pub fn weight_at(&self, idx: usize) -> f64 {
        self.w[idx]
    }
}

/// Complex sequence indexed by the points of one lattice.
#[derive(Debug, Clone)]
pub struct LatticeSeq {
    lattice: Arc<PhaseLattice>,
    values: Vec<C64>,
}

impl LatticeSeq {
    pub fn from_values(lattice: Arc<PhaseLattice>, values: Vec<C64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::LatticeMismatch(format!(
                "sequence has {} values for a lattice of {} points",
                values.len(),
                lattice.len()
            )));
        }
        Ok(LatticeSeq { lattice, values })
    }

    pub fn from_fn(lattice: Arc<PhaseLattice>, f: impl FnMut(usize) -> C64) -> Self {
        let values = (0..lattice.len()).map(f).collect();
        LatticeSeq { lattice, values }
    }

    pub fn zeros(lattice: Arc<PhaseLattice>) -> Self {
        Self::from_fn(lattice, |_| C64::default())
    }

    /// Kronecker delta at lattice index `idx`.
    pub fn delta(lattice: Arc<PhaseLattice>, idx: usize) -> Self {
        Self::from_fn(lattice, |i| {
            if i == idx {
                C64::new(1.0, 0.0)
            } else {
                C64::default()
            }
        })
    }

    pub fn lattice(&self) -> &Arc<PhaseLattice> {
        &self.lattice
    }
    pub fn values(&self) -> &[C64] {
        &self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Convolution over the lattice group: `(a * b)(lam) = sum_mu a(mu) b(lam - mu)`.
pub fn convolve(a: &LatticeSeq, b: &LatticeSeq) -> Result<LatticeSeq> {
    if !a.lattice.same_as(&b.lattice) {
        return Err(Error::LatticeMismatch(
            "convolution operands live on different lattices".into(),
        ));
    }
    let lat = &a.lattice;
    let m = lat.len();
    let mut out = vec![C64::default(); m];
    for mu in 0..m {
        let av = a.values[mu];
        if av == C64::default() {
            continue;
        }
        for nu in 0..m {
            out[lat.add(mu, nu)] += av * b.values[nu];
        }
    }
    Ok(LatticeSeq {
        lattice: a.lattice.clone(),
        values: out,
    })
}

/// Involution `a^*(lam) = conj(a(-lam))`.
pub fn involute(a: &LatticeSeq) -> LatticeSeq {
    let lat = &a.lattice;
    LatticeSeq {
        lattice: a.lattice.clone(),
        values: (0..lat.len()).map(|i| a.values[lat.neg(i)].conj()).collect(),
    }
}

/// Weighted endpoint norm: `sum |a| w` for `q = 1`, `max |a| w` for `q = inf`.
pub fn algebra_norm(a: &LatticeSeq, spec: &AlgebraSpec) -> f64 {
    debug_assert!(a.lattice.same_as(&spec.lattice));
    match spec.q {
        NormExponent::One => a
            .values
            .iter()
            .zip(&spec.w)
            .map(|(v, w)| v.norm() * w)
            .sum(),
        NormExponent::Infinity => a
            .values
            .iter()
            .zip(&spec.w)
            .map(|(v, w)| v.norm() * w)
            .fold(0.0, f64::max),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct WeightCheckReport {
    /// Admissibility on the unbounded lattice (parametric criterion).
    pub ok: bool,
    /// Measured smallest constant on this finite lattice: for `q = 1` the
    /// submultiplicativity constant in `w(lam+mu) <= C w(lam) w(mu)`, for
    /// `q = inf` the subconvolutivity constant in
    /// `(w^-1 * w^-1)(lam) <= C w^-1(lam)`.
    pub worst_ratio: f64,
}

/// Scans all lattice pairs for the algebra-weight condition matching `q` and
/// reports the measured constant together with the parametric admissibility
/// verdict (the finite scan is always finite; `ok` answers whether the same
/// weight works on the unbounded lattice, which for polynomial weights with
/// `q = inf` requires `s > 2` in two phase-space dimensions).
pub fn check_algebra_weight(
    weight: &WeightSpec,
    q: NormExponent,
    lattice: &PhaseLattice,
) -> WeightCheckReport {
    let n = lattice.modulus();
    let m = lattice.len();
    let w: Vec<f64> = (0..m)
        .map(|i| {
            let (x, xi) = lattice.point(i);
            weight.eval_periodic((x as i64, xi as i64), n)
        })
        .collect();
    let worst_ratio = match q {
        NormExponent::One => {
            let mut worst = 0.0f64;
            for a in 0..m {
                for b in 0..m {
                    let r = w[lattice.add(a, b)] / (w[a] * w[b]);
                    worst = worst.max(r);
                }
            }
            worst
        }
        NormExponent::Infinity => {
            let mut worst = 0.0f64;
            for lam in 0..m {
                let mut conv = 0.0;
                for mu in 0..m {
                    conv += 1.0 / (w[mu] * w[lattice.sub(lam, mu)]);
                }
                worst = worst.max(conv * w[lam]);
            }
            worst
        }
    };
    let ok = match q {
        NormExponent::One => true,
        NormExponent::Infinity => match weight.kind {
            WeightKind::Flat => false,
            WeightKind::Polynomial { s } => s > 2.0,
            WeightKind::Subexponential { .. } => true,
        },
    };
    WeightCheckReport { ok, worst_ratio }
}

/// Growth profile `w(n*lam)^(1/n)` for `n = 1..n_max`, evaluated on the
/// unwrapped integer lattice `Z^2`. A trend toward 1 indicates the
/// Gelfand-Raikov-Shilov condition; geometric weights stay away from 1.
pub fn grs_profile(weight: &WeightSpec, lambda: (i64, i64), n_max: usize) -> Vec<f64> {
    if lambda == (0, 0) {
        return vec![1.0; n_max];
    }
    (1..=n_max)
        .map(|k| {
            let p = (lambda.0 * k as i64, lambda.1 * k as i64);
            weight.eval_unwrapped(p).powf(1.0 / k as f64)
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct L1MaximalityReport {
    pub l1: f64,
    pub sup_f: f64,
    pub rel_err: f64,
}

/// Checks `||a||_1 = max_xi |sum_k |a(k)| e^{-2 pi i k xi}|` by evaluating the
/// right side on `grid_m` uniform points of the torus. The nonnegative
/// coefficient sequence peaks at `xi = 0`, so the grid maximum reproduces the
/// l^1 norm; `rel_err` records the (rounding-level) discrepancy.
pub fn l1_maximality_check(
    a: &[C64],
    start: i64,
    grid_m: usize,
) -> Result<L1MaximalityReport> {
    if grid_m < 64 {
        return Err(Error::InvalidParameter(format!(
            "grid must have at least 64 points, got {grid_m}"
        )));
    }
    let mags: Vec<f64> = a.iter().map(|v| v.norm()).collect();
    let l1: f64 = mags.iter().sum();
    if l1 == 0.0 {
        return Ok(L1MaximalityReport {
            l1: 0.0,
            sup_f: 0.0,
            rel_err: 0.0,
        });
    }
    let mut sup_f = 0.0f64;
    for j in 0..grid_m {
        let xi = j as f64 / grid_m as f64;
        let mut acc = C64::default();
        for (off, &m) in mags.iter().enumerate() {
            let k = start + off as i64;
            acc += C64::from_polar(m, -2.0 * PI * k as f64 * xi);
        }
        sup_f = sup_f.max(acc.norm());
    }
    Ok(L1MaximalityReport {
        l1,
        sup_f,
        rel_err: (l1 - sup_f).abs() / l1,
    })
}
