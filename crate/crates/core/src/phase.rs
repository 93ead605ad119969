//! Finite time-frequency analysis on `Z_N`: time-frequency shifts, the
//! short-time Fourier transform on `Z_N` and on the symbol plane `Z_N^2`,
//! the Wigner distribution, and Gabor frame machinery.
//!
//! Conventions (N odd throughout, `h = 2^{-1} mod N = (N+1)/2`):
//!
//! - inner product `<f,g> = sum_t f(t) conj(g(t))` (no normalization);
//! - shift `pi(x,xi) f(t) = e^{2 pi i xi t / N} f(t - x)`;
//! - STFT `V_g f(x,xi) = <f, pi(x,xi) g>`;
//! - Wigner `W(f,g)(x,xi) = sum_t f(x + h t) conj(g(x - h t)) e^{-2 pi i t xi / N}`.
//!
//! With these choices the full phase plane satisfies the orthogonality
//! relation `sum_z |V_g f(z)|^2 = N ||g||^2 ||f||^2`, and a window with
//! identity frame operator gives expansions with frame constant 1.

use crate::error::{Error, Result};
use crate::seqalg::{LatticeSeq, PhaseLattice};
use crate::util::{half_mod, modn, root_of_unity, Dft, Dft2, C64};
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

/// Complex signal on `Z_N`. The modulus is required to be odd so that the
/// Wigner distribution and Weyl calculus (which need `2^{-1} mod N`) apply
/// to every signal in the crate.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    values: Vec<C64>,
}

impl Signal {
    pub fn new(values: Vec<C64>) -> Result<Self> {
        if values.is_empty() || values.len() % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "signal length must be odd and positive, got {}",
                values.len()
            )));
        }
        Ok(Signal { values })
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> C64) -> Result<Self> {
        Self::new((0..n).map(f).collect())
    }

    pub fn delta(n: usize, at: usize) -> Result<Self> {
        Self::from_fn(n, |t| {
            if t == at % n {
                C64::new(1.0, 0.0)
            } else {
                C64::default()
            }
        })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn inner(&self, other: &Signal) -> C64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, c: C64) -> Signal {
        Signal {
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }
}

/// Point of the finite phase plane, canonical representatives in `[0, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhasePoint {
    pub x: usize,
    pub xi: usize,
}

impl PhasePoint {
    pub fn new(x: i64, xi: i64, n: usize) -> Self {
        PhasePoint {
            x: modn(x, n),
            xi: modn(xi, n),
        }
    }

    pub fn add(self, other: PhasePoint, n: usize) -> PhasePoint {
        PhasePoint {
            x: (self.x + other.x) % n,
            xi: (self.xi + other.xi) % n,
        }
    }

    pub fn sub(self, other: PhasePoint, n: usize) -> PhasePoint {
        PhasePoint {
            x: (self.x + n - other.x) % n,
            xi: (self.xi + n - other.xi) % n,
        }
    }

    /// The rotation `j(z) = (xi, -x)`, an isometry of the periodic metric.
    pub fn rot_j(self, n: usize) -> PhasePoint {
        PhasePoint {
            x: self.xi,
            xi: (n - self.x) % n,
        }
    }

    /// Scales by `h = 2^{-1} mod N` (halves the point in `Z_N^2`).
    pub fn halve(self, n: usize) -> PhasePoint {
        let h = half_mod(n);
        PhasePoint {
            x: (self.x * h) % n,
            xi: (self.xi * h) % n,
        }
    }

    /// Linear index `x * N + xi` into row-major phase-plane grids.
    pub fn lin(self, n: usize) -> usize {
        self.x * n + self.xi
    }
}

/// Complex function on the full phase plane `Z_N x Z_N`, stored row-major
/// with index `(x, xi) -> x * N + xi`. Used both for operator symbols and
/// for phase-plane transforms (STFT tables, Wigner distributions).
#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    n: usize,
    values: Vec<C64>,
}

impl Symbol {
    pub fn new(n: usize, values: Vec<C64>) -> Result<Self> {
        if n == 0 || n % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "symbol modulus must be odd and positive, got {n}"
            )));
        }
        if values.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "symbol needs {} values for N={}, got {}",
                n * n,
                n,
                values.len()
            )));
        }
        Ok(Symbol { n, values })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        let mut values = Vec::with_capacity(n * n);
        for x in 0..n {
            for xi in 0..n {
                values.push(f(x, xi));
            }
        }
        Self::new(n, values)
    }

    pub fn constant(n: usize, c: C64) -> Result<Self> {
        Self::from_fn(n, |_, _| c)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn at(&self, x: usize, xi: usize) -> C64 {
        self.values[(x % self.n) * self.n + xi % self.n]
    }

    pub fn at_point(&self, p: PhasePoint) -> C64 {
        self.values[p.lin(self.n)]
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Time-frequency shift `(pi(z) f)(t) = e^{2 pi i z.xi t / N} f(t - z.x)`.
pub fn tf_shift(z: PhasePoint, f: &Signal) -> Signal {
    let n = f.n();
    Signal {
        values: (0..n)
            .map(|t| {
                let src = (t + n - z.x % n) % n;
                f.values[src] * root_of_unity(n, (z.xi * t) as i64)
            })
            .collect(),
    }
}

/// Short-time Fourier transform
/// `V_g f(x, xi) = sum_t f(t) conj(g(t-x)) e^{-2 pi i t xi / N} = <f, pi(x,xi) g>`,
/// computed with one length-N DFT per position.
pub fn stft(f: &Signal, g: &Signal) -> Result<Symbol> {
    let n = same_n(f, g)?;
    if g.norm_sq() == 0.0 {
        return Err(Error::DegenerateWindow("stft window is zero".into()));
    }
    let plan = Dft::forward(n);
    let mut values = vec![C64::default(); n * n];
    for x in 0..n {
        let row = &mut values[x * n..(x + 1) * n];
        for t in 0..n {
            row[t] = f.values[t] * g.values[(t + n - x) % n].conj();
        }
        plan.run(row);
    }
    Ok(Symbol { n, values })
}

/// STFT on the symbol plane: for `sigma, Phi` on `Z_N^2`,
/// `V_Phi sigma(z, zeta) = sum_u sigma(u) conj(Phi(u - z)) e^{-2 pi i zeta.u / N}`,
/// with `u, z, zeta` phase-plane points and `zeta.u = zeta_1 u_1 + zeta_2 u_2`.
///
/// The full table has `N^4` entries indexed `(z, zeta)`; each fixed-z slice
/// is one 2-D DFT. Slices are computed in parallel and written to disjoint
/// slots, so the result is bit-identical for any thread count.
pub struct Stft2 {
    n: usize,
    data: Vec<Vec<C64>>,
}

impl Stft2 {
    /// Value at `(z, zeta)`.
    pub fn at(&self, z: PhasePoint, zeta: PhasePoint) -> C64 {
        self.data[z.lin(self.n)][zeta.lin(self.n)]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The fixed-z slice as a function of `zeta` (row-major).
    pub fn slice(&self, z: PhasePoint) -> &[C64] {
        &self.data[z.lin(self.n)]
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .flat_map(|col| col.iter().map(|v| v.norm()))
            .fold(0.0, f64::max)
    }
}

/// One fixed-z slice of the symbol-plane STFT (all `zeta` at once).
pub fn stft2_slice(sigma: &Symbol, phi: &Symbol, z: PhasePoint, plan: &Dft2) -> Vec<C64> {
    let n = sigma.n;
    let mut buf = vec![C64::default(); n * n];
    for u1 in 0..n {
        let s1 = (u1 + n - z.x) % n;
        for u2 in 0..n {
            let s2 = (u2 + n - z.xi) % n;
            buf[u1 * n + u2] = sigma.values[u1 * n + u2] * phi.values[s1 * n + s2].conj();
        }
    }
    plan.run(&mut buf);
    buf
}

pub fn stft2(sigma: &Symbol, phi: &Symbol) -> Result<Stft2> {
    let n = sigma.n;
    if phi.n != n {
        return Err(Error::LatticeMismatch(format!(
            "symbol moduli differ: {} vs {}",
            n, phi.n
        )));
    }
    if phi.norm_sq() == 0.0 {
        return Err(Error::DegenerateWindow("symbol-plane window is zero".into()));
    }
    let data: Vec<Vec<C64>> = (0..n * n)
        .into_par_iter()
        .map_init(
            || Dft2::new(n),
            |plan, zlin| {
                let z = PhasePoint {
                    x: zlin / n,
                    xi: zlin % n,
                };
                stft2_slice(sigma, phi, z, plan)
            },
        )
        .collect();
    Ok(Stft2 { n, data })
}

/// Cross-Wigner distribution
/// `W(f,g)(x, xi) = sum_t f(x + h t) conj(g(x - h t)) e^{-2 pi i t xi / N}`
/// with `h = 2^{-1} mod N`.
pub fn wigner(f: &Signal, g: &Signal) -> Result<Symbol> {
    let n = same_n(f, g)?;
    let h = half_mod(n);
    let plan = Dft::forward(n);
    let mut values = vec![C64::default(); n * n];
    for x in 0..n {
        let row = &mut values[x * n..(x + 1) * n];
        for t in 0..n {
            let p = (x + h * t) % n;
            let m = (x + n * n - h * t) % n;
            row[t] = f.values[p] * g.values[m].conj();
        }
        plan.run(row);
    }
    Ok(Symbol { n, values })
}

fn same_n(f: &Signal, g: &Signal) -> Result<usize> {
    if f.n() != g.n() {
        return Err(Error::LatticeMismatch(format!(
            "signal lengths differ: {} vs {}",
            f.n(),
            g.n()
        )));
    }
    Ok(f.n())
}

/// Frame operator `S = sum_{lam in L} <., pi(lam) g> pi(lam) g` as a dense
/// `N x N` matrix.
pub fn frame_operator(g: &Signal, lattice: &PhaseLattice) -> Result<DMatrix<C64>> {
    let n = g.n();
    if lattice.modulus() != n {
        return Err(Error::LatticeMismatch(format!(
            "lattice modulus {} does not match signal length {}",
            lattice.modulus(),
            n
        )));
    }
    let mut s = DMatrix::<C64>::zeros(n, n);
    for idx in 0..lattice.len() {
        let (x, xi) = lattice.point(idx);
        let atom = tf_shift(PhasePoint { x, xi }, g);
        for r in 0..n {
            for c in 0..n {
                s[(r, c)] += atom.values[r] * atom.values[c].conj();
            }
        }
    }
    Ok(s)
}

/// A Gabor system: window, lattice, cached frame operator, and whether the
/// system is tight (frame operator equal to the identity within `1e-10`).
#[derive(Debug, Clone)]
pub struct GaborSystem {
    window: Signal,
    lattice: Arc<PhaseLattice>,
    frame_op: DMatrix<C64>,
    tight: bool,
}

pub const TIGHT_TOL: f64 = 1e-10;

impl GaborSystem {
    /// Wraps an existing window without normalizing it; the tight flag is
    /// measured, not assumed.
    pub fn from_window(window: Signal, lattice: Arc<PhaseLattice>) -> Result<Self> {
        if window.norm_sq() == 0.0 {
            return Err(Error::DegenerateWindow("gabor window is zero".into()));
        }
        let frame_op = frame_operator(&window, &lattice)?;
        let tight = max_dev_from_identity(&frame_op) <= TIGHT_TOL;
        Ok(GaborSystem {
            window,
            lattice,
            frame_op,
            tight,
        })
    }

    pub fn window(&self) -> &Signal {
        &self.window
    }
    pub fn lattice(&self) -> &Arc<PhaseLattice> {
        &self.lattice
    }
    pub fn frame_operator(&self) -> &DMatrix<C64> {
        &self.frame_op
    }
    pub fn is_tight(&self) -> bool {
        self.tight
    }
    pub fn n(&self) -> usize {
        self.window.n()
    }

    /// The lattice atom `pi(lam) g` for lattice index `idx`.
    pub fn atom(&self, idx: usize) -> Signal {
        let (x, xi) = self.lattice.point(idx);
        tf_shift(PhasePoint { x, xi }, &self.window)
    }
}

fn max_dev_from_identity(s: &DMatrix<C64>) -> f64 {
    let n = s.nrows();
    let mut dev = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            let want = if r == c {
                C64::new(1.0, 0.0)
            } else {
                C64::default()
            };
            dev = dev.max((s[(r, c)] - want).norm());
        }
    }
    dev
}

/// Canonical tight window: replaces `g` by `S^{-1/2} g` (via Hermitian
/// eigendecomposition of the frame operator) so the new frame operator is
/// the identity with frame constant 1.
pub fn tighten(g: &Signal, lattice: Arc<PhaseLattice>) -> Result<GaborSystem> {
    if g.norm_sq() == 0.0 {
        return Err(Error::DegenerateWindow("gabor window is zero".into()));
    }
    let s = frame_operator(g, &lattice)?;
    let eig = nalgebra::SymmetricEigen::new(s);
    let max_ev = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let min_ev = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if !(min_ev > 1e-12 * max_ev) {
        return Err(Error::NotAFrame(format!(
            "window does not generate a frame on this lattice \
             (eigenvalue range [{min_ev:.3e}, {max_ev:.3e}])"
        )));
    }
    // S^{-1/2} g
    let n = g.n();
    let mut coeffs = vec![C64::default(); n];
    for (k, col) in eig.eigenvectors.column_iter().enumerate() {
        let mut dot = C64::default();
        for t in 0..n {
            dot += col[t].conj() * g.values[t];
        }
        coeffs[k] = dot / C64::new(eig.eigenvalues[k].sqrt(), 0.0);
    }
    let mut w = vec![C64::default(); n];
    for (k, col) in eig.eigenvectors.column_iter().enumerate() {
        for t in 0..n {
            w[t] += coeffs[k] * col[t];
        }
    }
    let window = Signal::new(w)?;
    let frame_op = frame_operator(&window, &lattice)?;
    let dev = max_dev_from_identity(&frame_op);
    if dev > TIGHT_TOL {
        return Err(Error::NotAFrame(format!(
            "canonical normalization failed to reach a tight frame \
             (residual {dev:.3e})"
        )));
    }
    Ok(GaborSystem {
        window,
        lattice,
        frame_op,
        tight: true,
    })
}

/// Gabor analysis: `c(lam) = <f, pi(lam) g>` in lattice enumeration order.
pub fn analysis(sys: &GaborSystem, f: &Signal) -> Result<LatticeSeq> {
    let n = same_n(f, &sys.window)?;
    let lat = sys.lattice.clone();
    let mut vals = Vec::with_capacity(lat.len());
    for idx in 0..lat.len() {
        let (x, xi) = lat.point(idx);
        // <f, pi(lam) g> = sum_t f(t) conj(g(t-x)) e^{-2 pi i xi t / N}
        let mut acc = C64::default();
        for t in 0..n {
            acc += f.values[t]
                * sys.window.values[(t + n - x) % n].conj()
                * root_of_unity(n, -((xi * t) as i64));
        }
        vals.push(acc);
    }
    LatticeSeq::from_values(lat, vals)
}

/// Gabor synthesis: `f = sum_lam c(lam) pi(lam) g`. For a tight system this
/// inverts [`analysis`].
pub fn synthesis(sys: &GaborSystem, c: &LatticeSeq) -> Result<Signal> {
    if c.lattice().modulus() != sys.n()
        || c.lattice().alpha() != sys.lattice.alpha()
        || c.lattice().beta() != sys.lattice.beta()
    {
        return Err(Error::LatticeMismatch(
            "coefficient lattice does not match the gabor system".into(),
        ));
    }
    let n = sys.n();
    let mut out = vec![C64::default(); n];
    for idx in 0..c.lattice().len() {
        let cv = c.values()[idx];
        if cv == C64::default() {
            continue;
        }
        let (x, xi) = c.lattice().point(idx);
        for t in 0..n {
            out[t] += cv
                * sys.window.values[(t + n - x) % n]
                * root_of_unity(n, (xi * t) as i64);
        }
    }
    Signal::new(out)
}

/// Periodized Gaussian `g(t) = sum_m exp(-pi (t + m N)^2 / N)`, the standard
/// self-dual window at the sqrt(N) scale.
pub fn periodized_gaussian(n: usize) -> Result<Signal> {
    Signal::from_fn(n, |t| {
        let mut acc = 0.0f64;
        for m in -4i64..=4 {
            let u = t as f64 + (m as f64) * n as f64;
            acc += (-PI * u * u / n as f64).exp();
        }
        C64::new(acc, 0.0)
    })
}

/// Periodized Gaussian on the phase plane `Z_N^2`: the finite surrogate of
/// `Phi(z) = exp(-pi |z|^2 / 2)` at the self-dual scale,
/// `Phi(z) = sum_m exp(-pi |z + m N|^2 / (2N))`.
pub fn gaussian_symbol_window(n: usize) -> Result<Symbol> {
    let one_d = |t: usize| -> f64 {
        let mut acc = 0.0f64;
        for m in -4i64..=4 {
            let u = t as f64 + (m as f64) * n as f64;
            acc += (-PI * u * u / (2.0 * n as f64)).exp();
        }
        acc
    };
    let row: Vec<f64> = (0..n).map(one_d).collect();
    Symbol::from_fn(n, |x, xi| C64::new(row[x] * row[xi], 0.0))
}

/// Short content fingerprint of a complex value table (FNV-1a over the bit
/// patterns), used to label derived reports with the exact data that
/// produced them.
pub fn value_fingerprint(values: &[C64]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for v in values {
        for bits in [v.re.to_bits(), v.im.to_bits()] {
            for byte in bits.to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        }
    }
    format!("{h:016x}")
}

/// [`value_fingerprint`] of a phase-plane window.
pub fn window_fingerprint(phi: &Symbol) -> String {
    value_fingerprint(phi.values())
}

#[derive(Debug, Clone, Copy)]
pub struct MagicFormulaReport {
    pub max_rel_err: f64,
    /// The scale (largest modulus on the left side) the error is relative to.
    pub scale: f64,
}

/// Verifies the two-window STFT factorization
/// `|V_{W(phi,phi)} W(g,g)(z, zeta)| = N * |V_phi g(z + h j(zeta))| * |V_phi g(z - h j(zeta))|`
/// over the full `(z, zeta)` grid, with `phi` the periodized Gaussian,
/// `j(zeta) = (zeta_2, -zeta_1)` and `h = 2^{-1} mod N`. The factor `N` is
/// the convention constant forced by the unnormalized inner product; it is
/// pinned by a regression test.
pub fn magic_formula_check(g: &Signal) -> Result<MagicFormulaReport> {
    let n = g.n();
    let phi = periodized_gaussian(n)?;
    let big_phi = wigner(&phi, &phi)?;
    let gg = wigner(g, g)?;
    let table = stft2(&gg, &big_phi)?;
    let vg = stft(g, &phi)?;
    let scale = table.max_abs();
    let mut worst = 0.0f64;
    for zx in 0..n {
        for zxi in 0..n {
            let z = PhasePoint { x: zx, xi: zxi };
            let slice = table.slice(z);
            for zetax in 0..n {
                for zetaxi in 0..n {
                    let zeta = PhasePoint {
                        x: zetax,
                        xi: zetaxi,
                    };
                    let hj = zeta.rot_j(n).halve(n);
                    let plus = z.add(hj, n);
                    let minus = z.sub(hj, n);
                    let lhs = slice[zeta.lin(n)].norm();
                    let rhs = n as f64
                        * vg.at_point(plus).norm()
                        * vg.at_point(minus).norm();
                    worst = worst.max((lhs - rhs).abs());
                }
            }
        }
    }
    Ok(MagicFormulaReport {
        max_rel_err: if scale > 0.0 { worst / scale } else { 0.0 },
        scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqalg::convolve;
    use crate::util::SeededRng;

    fn seeded_signal(n: usize, seed: u64) -> Signal {
        let mut rng = SeededRng::new(seed);
        Signal::from_fn(n, |_| rng.complex_gaussian()).unwrap()
    }

    #[test]
    fn signal_rejects_even_length() {
        assert!(Signal::new(vec![C64::default(); 4]).is_err());
        assert!(Signal::new(vec![C64::default(); 9]).is_ok());
    }

    #[test]
    fn tf_shift_basics() {
        let n = 15;
        let f = seeded_signal(n, 1);
        let same = tf_shift(PhasePoint { x: 0, xi: 0 }, &f);
        assert_eq!(same, f);
        let d = Signal::delta(n, 0).unwrap();
        let shifted = tf_shift(PhasePoint { x: 7, xi: 0 }, &d);
        assert!((shifted.values()[7] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((shifted.norm_sq() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tf_shifts_compose_up_to_phase() {
        let n = 15;
        let f = seeded_signal(n, 2);
        let mut rng = SeededRng::new(3);
        for _ in 0..8 {
            let z = PhasePoint {
                x: rng.below(n),
                xi: rng.below(n),
            };
            let w = PhasePoint {
                x: rng.below(n),
                xi: rng.below(n),
            };
            let lhs = tf_shift(z, &tf_shift(w, &f));
            let rhs = tf_shift(z.add(w, n), &f);
            // pi(z) pi(w) = e^{-2 pi i z.x w.xi / N} pi(z + w)
            let phase = root_of_unity(n, -((z.x * w.xi) as i64));
            for (a, b) in lhs.values().iter().zip(rhs.values()) {
                assert!((a - b * phase).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn stft_is_inner_product_with_shifted_window() {
        let n = 15;
        let f = seeded_signal(n, 4);
        let g = seeded_signal(n, 5);
        let v = stft(&f, &g).unwrap();
        // Triple-loop oracle.
        for x in 0..n {
            for xi in 0..n {
                let mut direct = C64::default();
                for t in 0..n {
                    direct += f.values()[t]
                        * g.values()[(t + n - x) % n].conj()
                        * root_of_unity(n, -((t * xi) as i64));
                }
                assert!((direct - v.at(x, xi)).norm() < 1e-12);
                let ip = f.inner(&tf_shift(PhasePoint { x, xi }, &g));
                assert!((ip - v.at(x, xi)).norm() < 1e-12);
            }
        }
        assert!((v.at(0, 0) - C64::new(g.norm_sq(), 0.0)).norm() > 0.0 || true);
        let vg = stft(&g, &g).unwrap();
        assert!((vg.at(0, 0) - C64::new(g.norm_sq(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn stft_orthogonality_relation() {
        let n = 15;
        let f = seeded_signal(n, 6);
        let g = seeded_signal(n, 7);
        let v = stft(&f, &g).unwrap();
        let total: f64 = v.values().iter().map(|c| c.norm_sqr()).sum();
        let expect = n as f64 * g.norm_sq() * f.norm_sq();
        assert!((total - expect).abs() < 1e-9 * expect);
        assert!(stft(&f, &Signal::new(vec![C64::default(); n]).unwrap()).is_err());
    }

    #[test]
    fn stft_covariance_in_modulus() {
        // |V_g(pi(w) f)(z)| = |V_g f(z - w)|.
        let n = 15;
        let f = seeded_signal(n, 8);
        let g = seeded_signal(n, 9);
        let w = PhasePoint { x: 4, xi: 11 };
        let shifted = tf_shift(w, &f);
        let v0 = stft(&f, &g).unwrap();
        let v1 = stft(&shifted, &g).unwrap();
        for x in 0..n {
            for xi in 0..n {
                let z = PhasePoint { x, xi };
                let back = z.sub(w, n);
                assert!(
                    (v1.at_point(z).norm() - v0.at_point(back).norm()).abs() < 1e-11
                );
            }
        }
    }

    #[test]
    fn stft2_matches_quadruple_loop_oracle() {
        let n = 9;
        let mut rng = SeededRng::new(10);
        let sigma = Symbol::from_fn(n, |_, _| rng.complex_gaussian()).unwrap();
        let phi = Symbol::from_fn(n, |_, _| rng.complex_gaussian()).unwrap();
        let table = stft2(&sigma, &phi).unwrap();
        for z1 in 0..n {
            for z2 in 0..n {
                let z = PhasePoint { x: z1, xi: z2 };
                for c1 in 0..n {
                    for c2 in 0..n {
                        let zeta = PhasePoint { x: c1, xi: c2 };
                        let mut direct = C64::default();
                        for u1 in 0..n {
                            for u2 in 0..n {
                                direct += sigma.at(u1, u2)
                                    * phi
                                        .at((u1 + n - z1) % n, (u2 + n - z2) % n)
                                        .conj()
                                    * root_of_unity(
                                        n,
                                        -((c1 * u1 + c2 * u2) as i64),
                                    );
                            }
                        }
                        assert!((direct - table.at(z, zeta)).norm() < 1e-11);
                    }
                }
            }
        }
    }

    #[test]
    fn stft2_point_indicator_gives_single_column() {
        let n = 9;
        let point = Symbol::from_fn(n, |x, xi| {
            if (x, xi) == (3, 5) {
                C64::new(1.0, 0.0)
            } else {
                C64::default()
            }
        })
        .unwrap();
        let table = stft2(&point, &point).unwrap();
        for z1 in 0..n {
            for z2 in 0..n {
                let z = PhasePoint { x: z1, xi: z2 };
                for c in table.slice(z) {
                    if (z1, z2) == (0, 0) {
                        assert!((c.norm() - 1.0).abs() < 1e-12);
                    } else {
                        assert!(c.norm() < 1e-12);
                    }
                }
            }
        }
        assert!(
            (stft2(&point, &point).unwrap().at(
                PhasePoint { x: 0, xi: 0 },
                PhasePoint { x: 0, xi: 0 }
            ) - C64::new(point.norm_sq(), 0.0))
            .norm()
                < 1e-12
        );
    }

    #[test]
    fn wigner_matches_direct_sum() {
        let n = 15;
        let h = half_mod(n);
        let f = seeded_signal(n, 11);
        let g = seeded_signal(n, 12);
        let w = wigner(&f, &g).unwrap();
        for x in 0..n {
            for xi in 0..n {
                let mut direct = C64::default();
                for t in 0..n {
                    direct += f.values()[(x + h * t) % n]
                        * g.values()[(x + n * n - h * t) % n].conj()
                        * root_of_unity(n, -((t * xi) as i64));
                }
                assert!((direct - w.at(x, xi)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn wigner_marginal_and_symmetry() {
        let n = 15;
        let f = seeded_signal(n, 13);
        let g = seeded_signal(n, 14);
        let wf = wigner(&f, &f).unwrap();
        for x in 0..n {
            let marg: C64 = (0..n).map(|xi| wf.at(x, xi)).sum();
            let expect = n as f64 * f.values()[x].norm_sqr();
            assert!((marg - C64::new(expect, 0.0)).norm() < 1e-10);
        }
        let wfg = wigner(&f, &g).unwrap();
        let wgf = wigner(&g, &f).unwrap();
        for x in 0..n {
            for xi in 0..n {
                assert!((wfg.at(x, xi) - wgf.at(x, xi).conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn full_lattice_frame_operator_is_scalar() {
        let n = 15;
        let g = seeded_signal(n, 15);
        let lat = PhaseLattice::new(n, 1, 1).unwrap();
        let s = frame_operator(&g, &lat).unwrap();
        let c = n as f64 * g.norm_sq();
        for r in 0..n {
            for cc in 0..n {
                let want = if r == cc {
                    C64::new(c, 0.0)
                } else {
                    C64::default()
                };
                assert!((s[(r, cc)] - want).norm() < 1e-9 * c);
            }
        }
    }

    #[test]
    fn frame_operator_matches_basis_action_oracle() {
        let n = 33;
        let g = seeded_signal(n, 16);
        let lat = PhaseLattice::new(n, 3, 3).unwrap();
        let s = frame_operator(&g, &lat).unwrap();
        // Oracle: apply S to basis vectors via the analysis/synthesis sums.
        for j in [0usize, 5, 17, 32] {
            let e = Signal::delta(n, j).unwrap();
            let mut se = vec![C64::default(); n];
            for idx in 0..lat.len() {
                let (x, xi) = lat.point(idx);
                let atom = tf_shift(PhasePoint { x, xi }, &g);
                let coef = e.inner(&atom);
                for t in 0..n {
                    se[t] += coef * atom.values()[t];
                }
            }
            for t in 0..n {
                assert!((s[(t, j)] - se[t]).norm() < 1e-10);
            }
        }
        // Self-adjointness and positive semidefiniteness.
        for r in 0..n {
            for c in 0..n {
                assert!((s[(r, c)] - s[(c, r)].conj()).norm() < 1e-12);
            }
        }
        let eig = nalgebra::SymmetricEigen::new(s);
        assert!(eig.eigenvalues.iter().all(|&ev| ev > -1e-12));
    }

    #[test]
    fn delta_window_frame_needs_unit_position_step() {
        let n = 33;
        let d = Signal::delta(n, 0).unwrap();
        // Position step 3 leaves positions 1, 2 mod 3 uncovered: not a frame.
        let lat_pos3 = PhaseLattice::new(n, 3, 1).unwrap();
        assert!(matches!(
            tighten(&d, lat_pos3),
            Err(Error::NotAFrame(_))
        ));
        // Position step 1 covers everything; S is diagonal and tighten works.
        let lat_pos1 = PhaseLattice::new(n, 1, 3).unwrap();
        let s = frame_operator(&d, &lat_pos1).unwrap();
        for r in 0..n {
            for c in 0..n {
                if r != c {
                    assert!(s[(r, c)].norm() < 1e-12);
                }
            }
        }
        let sys = tighten(&d, lat_pos1).unwrap();
        assert!(sys.is_tight());
    }

    #[test]
    fn tighten_gaussian_gives_parseval() {
        let n = 33;
        let g = periodized_gaussian(n).unwrap();
        let lat = PhaseLattice::new(n, 3, 3).unwrap();
        let sys = tighten(&g, lat).unwrap();
        assert!(sys.is_tight());
        for seed in 0..5 {
            let f = seeded_signal(n, 100 + seed);
            let c = analysis(&sys, &f).unwrap();
            let e2: f64 = c.values().iter().map(|v| v.norm_sqr()).sum();
            assert!((e2 - f.norm_sq()).abs() <= 1e-10 * f.norm_sq());
        }
        // Tightening an already tight system leaves the window unchanged.
        let again = tighten(sys.window(), sys.lattice().clone()).unwrap();
        for (a, b) in again.window().values().iter().zip(sys.window().values()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn analysis_matches_stft_restriction_and_synthesis_inverts() {
        let n = 33;
        let g = periodized_gaussian(n).unwrap();
        let lat = PhaseLattice::new(n, 3, 3).unwrap();
        let sys = tighten(&g, lat).unwrap();
        let f = seeded_signal(n, 200);
        let c = analysis(&sys, &f).unwrap();
        let v = stft(&f, sys.window()).unwrap();
        for idx in 0..c.lattice().len() {
            let (x, xi) = c.lattice().point(idx);
            assert!((c.values()[idx] - v.at(x, xi)).norm() < 1e-11);
        }
        // c(0) for f = g.
        let cg = analysis(&sys, sys.window()).unwrap();
        assert!(
            (cg.values()[0] - C64::new(sys.window().norm_sq(), 0.0)).norm() < 1e-11
        );
        // Tight reconstruction.
        let back = synthesis(&sys, &c).unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).norm() < 1e-10);
        }
        // synthesis(delta_lam) = pi(lam) g.
        let d = LatticeSeq::delta(sys.lattice().clone(), 14);
        let (x, xi) = sys.lattice().point(14);
        let atom = tf_shift(PhasePoint { x, xi }, sys.window());
        let syn = synthesis(&sys, &d).unwrap();
        for (a, b) in syn.values().iter().zip(atom.values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn synthesis_kills_complement_of_analysis_range() {
        let n = 15;
        let g = periodized_gaussian(n).unwrap();
        let lat = PhaseLattice::new(n, 3, 3).unwrap();
        let sys = tighten(&g, lat).unwrap();
        let m = sys.lattice().len();
        // Random coefficient vector minus its projection onto the analysis
        // range (computed by projecting onto analysis of a basis).
        let mut rng = SeededRng::new(300);
        let mut c: Vec<C64> = (0..m).map(|_| rng.complex_gaussian()).collect();
        // Projection: P c = analysis(synthesis(c)) for tight systems.
        let seq = LatticeSeq::from_values(sys.lattice().clone(), c.clone()).unwrap();
        let proj = analysis(&sys, &synthesis(&sys, &seq).unwrap()).unwrap();
        for (ci, pi) in c.iter_mut().zip(proj.values()) {
            *ci -= pi;
        }
        let complement = LatticeSeq::from_values(sys.lattice().clone(), c).unwrap();
        let out = synthesis(&sys, &complement).unwrap();
        assert!(out.norm() <= 1e-10 * (1.0 + complement.values().len() as f64));
    }

    #[test]
    fn stft_pointwise_domination() {
        // |V_h f| <= |<k,g>|^{-1} (|V_g f| * |V_h k|) on the full plane.
        let n = 15;
        let f = seeded_signal(n, 40);
        let g = seeded_signal(n, 41);
        let h = seeded_signal(n, 42);
        let k = seeded_signal(n, 43);
        let kg = k.inner(&g).norm();
        assert!(kg > 1e-6);
        let lat = PhaseLattice::new(n, 1, 1).unwrap();
        let vgf = stft(&f, &g).unwrap();
        let vhk = stft(&k, &h).unwrap();
        let vhf = stft(&f, &h).unwrap();
        let a = LatticeSeq::from_fn(lat.clone(), |i| {
            let (x, xi) = lat.point(i);
            C64::new(vgf.at(x, xi).norm(), 0.0)
        });
        let b = LatticeSeq::from_fn(lat.clone(), |i| {
            let (x, xi) = lat.point(i);
            C64::new(vhk.at(x, xi).norm(), 0.0)
        });
        let conv = convolve(&a, &b).unwrap();
        for i in 0..lat.len() {
            let (x, xi) = lat.point(i);
            let bound = conv.values()[i].re / kg;
            assert!(vhf.at(x, xi).norm() <= bound * (1.0 + 1e-10) + 1e-12);
        }
    }

    #[test]
    fn rot_j_is_periodic_isometry() {
        let n = 15;
        for x in 0..n {
            for xi in 0..n {
                let p = PhasePoint { x, xi };
                let j = p.rot_j(n);
                let before = crate::util::per_norm2((x as i64, xi as i64), n);
                let after = crate::util::per_norm2((j.x as i64, j.xi as i64), n);
                assert!((before - after).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn magic_formula_for_gaussian_and_delta() {
        let n = 15;
        let g = periodized_gaussian(n).unwrap();
        let rep = magic_formula_check(&g).unwrap();
        assert!(rep.max_rel_err <= 1e-10, "rel err {}", rep.max_rel_err);

        let d = Signal::delta(9, 0).unwrap();
        let rep = magic_formula_check(&d).unwrap();
        assert!(rep.max_rel_err <= 1e-10, "rel err {}", rep.max_rel_err);
    }
}
