//! Time-frequency molecules, bell functions, and periodized local sine bases.
//!
//! Two themes meet here. On the lattice side, a *molecule family* attaches
//! to every lattice point `mu` a signal `e_mu = pi(z_mu) phi_mu` whose
//! time-frequency content concentrates near `mu`:
//!
//! ```text
//! |<e_mu, pi(lam) g>| <= a(lam - mu)
//! ```
//!
//! for an envelope sequence `a`. Operators with well-decaying Gabor matrices
//! map molecules to molecules, and their matrix elements between two such
//! families are dominated by `a' * a^* * h` with `h` the matrix envelope
//! ([`molecule_almost_diag`]).
//!
//! On the continuous side, a bell function
//! `b(t) = sin(theta(t)) cos(theta(t - alpha))` built from a polynomial
//! bump generates the periodized local sine basis
//!
//! ```text
//! psi_{k,l}(t) = sqrt(2/alpha) b(t - alpha k) sin((2l+1) pi (t - alpha k) / (2 alpha)),
//! ```
//!
//! an orthonormal basis of the period torus. Each `psi_{k,l}` splits into
//! two time-frequency shifts of modulated bells
//! ([`exponential_split_check`]), so sine-basis coefficients of a smooth
//! operator decay away from the diagonal in both index differences; the
//! measured constants are tabulated by [`sine_basis_almost_diag`].

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::aldiag::{envelope_h, gabor_matrix};
use crate::error::{Error, Result};
use crate::phase::{stft, tf_shift, value_fingerprint, GaborSystem, PhasePoint, Signal, Symbol};
use crate::seqalg::{convolve, involute, AlgebraSpec, LatticeSeq};
use crate::util::{signed_rep, C64, SeededRng};
use crate::weyl::quantize;

use std::f64::consts::PI;

/// Shape parameters of a bell function: the bump
/// `zeta(t) = c_N (max(0, 1 - (t/eps)^2))^N` is normalized so that
/// `int zeta = pi/2`, its primitive `theta` rises from `0` to `pi/2`
/// across `[-eps, eps]`, and `b(t) = sin(theta(t)) cos(theta(t - alpha))`.
#[derive(Debug, Clone)]
pub struct BellSpec {
    alpha: f64,
    epsilon: f64,
    smoothness: u32,
    grid_step: f64,
    /// `binom(N, j) (-1)^j / (2j + 1)` for the polynomial primitive.
    theta_coeffs: Vec<f64>,
    /// Normalizing constant of the bump.
    c_n: f64,
}

impl BellSpec {
    /// Validates the parameters, fixes the normalizing constant
    /// analytically, and confirms `int zeta = pi/2` by trapezoid quadrature
    /// to `1e-10`.
    pub fn new(alpha: f64, epsilon: f64, smoothness: u32, grid_step: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bell period must be positive, got {alpha}"
            )));
        }
        if !(epsilon > 0.0 && epsilon < alpha / 2.0) {
            return Err(Error::InvalidParameter(format!(
                "transition half-width must satisfy 0 < eps < alpha/2, got eps = {epsilon} at alpha = {alpha}"
            )));
        }
        if smoothness < 1 {
            return Err(Error::InvalidParameter(
                "bump smoothness must be at least 1".into(),
            ));
        }
        if !(grid_step > 0.0 && grid_step.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "grid step must be positive, got {grid_step}"
            )));
        }
        let n = smoothness as i64;
        let mut theta_coeffs = Vec::with_capacity(smoothness as usize + 1);
        let mut binom = 1.0f64;
        for j in 0..=n {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            theta_coeffs.push(sign * binom / (2 * j + 1) as f64);
            binom *= (n - j) as f64 / (j + 1) as f64;
        }
        // int_{-1}^{1} (1 - u^2)^N du expanded binomially.
        let moment: f64 = theta_coeffs.iter().map(|c| 2.0 * c).sum();
        let c_n = (PI / 2.0) / (epsilon * moment);
        let spec = BellSpec {
            alpha,
            epsilon,
            smoothness,
            grid_step,
            theta_coeffs,
            c_n,
        };

        let panels = 200_000usize;
        let h = 2.0 * epsilon / panels as f64;
        let mut quad = 0.5 * (spec.zeta(-epsilon) + spec.zeta(epsilon));
        for i in 1..panels {
            quad += spec.zeta(-epsilon + i as f64 * h);
        }
        quad *= h;
        if (quad - PI / 2.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "bump quadrature {quad} misses pi/2 beyond 1e-10"
            )));
        }
        Ok(spec)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn smoothness(&self) -> u32 {
        self.smoothness
    }

    pub fn grid_step(&self) -> f64 {
        self.grid_step
    }

    /// The bump `zeta(t) = c_N (max(0, 1 - (t/eps)^2))^N`.
    pub fn zeta(&self, t: f64) -> f64 {
        let u = t / self.epsilon;
        let body = 1.0 - u * u;
        if body <= 0.0 {
            0.0
        } else {
            self.c_n * body.powi(self.smoothness as i32)
        }
    }

    /// The primitive `theta(t) = int_{-inf}^t zeta`, evaluated from the
    /// polynomial antiderivative: `0` below the transition, `pi/2` above.
    pub fn theta(&self, t: f64) -> f64 {
        if t <= -self.epsilon {
            return 0.0;
        }
        if t >= self.epsilon {
            return PI / 2.0;
        }
        let u = t / self.epsilon;
        let mut acc = 0.0;
        for (j, c) in self.theta_coeffs.iter().enumerate() {
            acc += c * (u.powi(2 * j as i32 + 1) + 1.0);
        }
        self.c_n * self.epsilon * acc
    }
}

/// Raw (unperiodized) bell value
/// `b(t) = sin(theta(t)) cos(theta(t - alpha))`, supported in
/// `[-eps, alpha + eps]` with plateau `1` on `[eps, alpha - eps]`.
pub fn bell_value(spec: &BellSpec, t: f64) -> f64 {
    spec.theta(t).sin() * spec.theta(t - spec.alpha).cos()
}

/// A function sampled on a uniform grid over one period, with the
/// quadrature inner product `<u, v> = step . sum u conj(v)`.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    samples: Vec<C64>,
    step: f64,
    period: f64,
}

impl SampledFunction {
    /// Samples `f` at `0, step, 2 step, ...` across one period; the period
    /// must be an integer number of steps.
    pub fn from_fn(period: f64, step: f64, mut f: impl FnMut(f64) -> C64) -> Result<Self> {
        if !(period > 0.0 && step > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "period {period} and step {step} must be positive"
            )));
        }
        let ratio = period / step;
        let m = ratio.round();
        if (ratio - m).abs() > 1e-9 * ratio.max(1.0) || m < 2.0 {
            return Err(Error::InvalidParameter(format!(
                "period {period} is not an integer number of steps {step}"
            )));
        }
        let m = m as usize;
        let samples = (0..m).map(|i| f(i as f64 * step)).collect();
        Ok(SampledFunction {
            samples,
            step,
            period,
        })
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Quadrature inner product `step . sum u conj(v)`.
    pub fn inner(&self, other: &SampledFunction) -> Result<C64> {
        if self.len() != other.len() || (self.step - other.step).abs() > 1e-12 * self.step {
            return Err(Error::LatticeMismatch(format!(
                "sampled functions disagree: {} points at step {} against {} at {}",
                self.len(),
                self.step,
                other.len(),
                other.step
            )));
        }
        let sum: C64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(u, v)| u * v.conj())
            .sum();
        Ok(sum * self.step)
    }

    pub fn norm(&self) -> f64 {
        (self.step * self.samples.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }
}

/// The bell periodized over the minimal even bell count, `P = 2 alpha`,
/// sampled at the spec's grid step. Real-valued; within each period the
/// support is the wrap of `[-eps, alpha + eps]`.
pub fn bell(spec: &BellSpec) -> Result<SampledFunction> {
    let p = 2.0 * spec.alpha;
    SampledFunction::from_fn(p, spec.grid_step, |t| {
        let mut acc = 0.0;
        for m in -1..=1 {
            acc += bell_value(spec, t + m as f64 * p);
        }
        C64::new(acc, 0.0)
    })
}

fn raw_sine_member(spec: &BellSpec, k: usize, l: usize, t: f64) -> f64 {
    let u = t - spec.alpha * k as f64;
    (2.0 / spec.alpha).sqrt()
        * bell_value(spec, u)
        * ((2 * l + 1) as f64 * PI * u / (2.0 * spec.alpha)).sin()
}

/// Periodized local sine basis over `P = alpha K`:
/// `psi_{k,l}(t) = sqrt(2/alpha) b(t - alpha k) sin((2l+1) pi (t - alpha k)/(2 alpha))`
/// for `k = 0..K-1`, `l = 0..=l_max`, returned in `k`-major order. `K`
/// must be even so that the frequencies `l/(2 alpha)` are exact torus
/// frequencies of the period.
pub fn local_sine_basis(
    spec: &BellSpec,
    k_count: usize,
    l_max: usize,
) -> Result<Vec<SampledFunction>> {
    if k_count < 2 || k_count % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "period mismatch: the bell count must be even and at least 2, got {k_count}"
        )));
    }
    if l_max < 1 {
        return Err(Error::InvalidParameter(format!(
            "the top sine index must be at least 1, got {l_max}"
        )));
    }
    let p = spec.alpha * k_count as f64;
    let mut basis = Vec::with_capacity(k_count * (l_max + 1));
    for k in 0..k_count {
        for l in 0..=l_max {
            basis.push(SampledFunction::from_fn(p, spec.grid_step, |t| {
                let mut acc = 0.0;
                for m in -1..=1 {
                    acc += raw_sine_member(spec, k, l, t + m as f64 * p);
                }
                C64::new(acc, 0.0)
            })?);
        }
    }
    Ok(basis)
}

/// Residual of the exponential splitting of one sine-basis member.
#[derive(Debug, Clone, Copy)]
pub struct SplitReport {
    /// Largest pointwise modulus of the difference over the grid.
    pub max_point_err: f64,
}

/// Verifies on the grid that a sine-basis member splits into two
/// time-frequency shifts of the modulated bells
/// `b_pm(t) = e^{+- pi i t/(2 alpha)} b(t)`:
///
/// ```text
/// psi_{k,l} = ((-1)^{kl} / 2i) sqrt(2/alpha)
///             (pi(alpha k,  l/(2 alpha)) b_+  -  pi(alpha k, -l/(2 alpha)) b_-),
/// ```
///
/// with `pi(x0, w0) f(t) = e^{2 pi i w0 t} f(t - x0)` realized by analytic
/// evaluation at grid points and both sides periodized over `P = alpha K`
/// for the smallest even `K` containing the bell — the periodized identity
/// is the arbiter for how the half-frequency modulations of `b_pm` interact
/// with the torus.
pub fn exponential_split_check(spec: &BellSpec, k: usize, l: usize) -> Result<SplitReport> {
    let k_count = if (k + 2) % 2 == 0 { k + 2 } else { k + 3 };
    let p = spec.alpha * k_count as f64;
    let alpha = spec.alpha;
    let sign = if (k * l) % 2 == 0 { 1.0 } else { -1.0 };
    let pref = C64::new(0.0, -0.5) * sign * (2.0 / alpha).sqrt();
    let lhs = SampledFunction::from_fn(p, spec.grid_step, |t| {
        let mut acc = 0.0;
        for m in -1..=1 {
            acc += raw_sine_member(spec, k, l, t + m as f64 * p);
        }
        C64::new(acc, 0.0)
    })?;
    let rhs = SampledFunction::from_fn(p, spec.grid_step, |t| {
        let mut acc = C64::new(0.0, 0.0);
        for m in -1..=1 {
            let tt = t + m as f64 * p;
            let u = tt - alpha * k as f64;
            let b = bell_value(spec, u);
            if b == 0.0 {
                continue;
            }
            let plus = C64::from_polar(1.0, 2.0 * PI * l as f64 * tt / (2.0 * alpha))
                * C64::from_polar(1.0, PI * u / (2.0 * alpha));
            let minus = C64::from_polar(1.0, -2.0 * PI * l as f64 * tt / (2.0 * alpha))
                * C64::from_polar(1.0, -PI * u / (2.0 * alpha));
            acc += pref * (plus - minus) * b;
        }
        acc
    })?;
    let max_point_err = lhs
        .samples()
        .iter()
        .zip(rhs.samples())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(SplitReport { max_point_err })
}

/// A family of signals `e_mu = pi(z_mu) phi_mu`, one per lattice point,
/// whose correlations against the frame atoms are bounded by a stored
/// envelope: `|<e_mu, pi(lam) g>| <= a(lam - mu)`.
#[derive(Debug, Clone)]
pub struct MoleculeFamily {
    members: Vec<Signal>,
    envelope_bound: LatticeSeq,
    system: GaborSystem,
}

impl MoleculeFamily {
    pub fn members(&self) -> &[Signal] {
        &self.members
    }

    pub fn member(&self, idx: usize) -> &Signal {
        &self.members[idx]
    }

    /// Envelope `a` with `|<e_mu, pi(lam) g>| <= a(lam - mu)`, nonnegative
    /// real values.
    pub fn envelope_bound(&self) -> &LatticeSeq {
        &self.envelope_bound
    }

    pub fn system(&self) -> &GaborSystem {
        &self.system
    }

    /// Rescans every `(mu, lam)` pair and returns the largest signed excess
    /// of a correlation over the stored envelope — at most roundoff for a
    /// family whose envelope was computed from its members.
    pub fn verify_envelope(&self) -> f64 {
        let rescan = scan_envelope(&self.system, &self.members);
        rescan
            .values()
            .iter()
            .zip(self.envelope_bound.values())
            .map(|(fresh, stored)| fresh.re - stored.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Builds a family from explicit members by the exhaustive scan, storing
/// the tightest valid envelope.
pub fn molecule_family_from_members(
    sys: &GaborSystem,
    members: Vec<Signal>,
) -> Result<MoleculeFamily> {
    let lat = sys.lattice();
    if members.len() != lat.len() {
        return Err(Error::InvalidParameter(format!(
            "family needs one member per lattice point ({}), got {}",
            lat.len(),
            members.len()
        )));
    }
    for e in &members {
        if e.n() != sys.n() {
            return Err(Error::LatticeMismatch(format!(
                "member length {} does not match the system modulus {}",
                e.n(),
                sys.n()
            )));
        }
    }
    let envelope_bound = scan_envelope(sys, &members);
    Ok(MoleculeFamily {
        members,
        envelope_bound,
        system: sys.clone(),
    })
}

/// `a(nu) = max over mu of |<e_mu, pi(mu + nu) g>|`.
fn scan_envelope(sys: &GaborSystem, members: &[Signal]) -> LatticeSeq {
    let lat = sys.lattice().clone();
    let g = sys.window();
    let n = lat.modulus();
    let vals = members
        .par_iter()
        .enumerate()
        .map(|(mu, e)| {
            let table = stft(e, g).expect("window is nonzero");
            (0..lat.len())
                .map(|nu| {
                    let lam = lat.add(mu, nu);
                    let (x, xi) = lat.point(lam);
                    table.at(x % n, xi % n).norm()
                })
                .collect::<Vec<f64>>()
        })
        .reduce(
            || vec![0.0; lat.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x = x.max(y);
                }
                a
            },
        );
    LatticeSeq::from_fn(lat, |i| C64::new(vals[i], 0.0))
}

/// Generates a seeded molecule family over a tight system: each member is
/// `pi(z_mu) phi_mu` with `z_mu` an integer jitter of `mu` within
/// `jitter_bound` and `phi_mu` a window perturbed by seeded combinations of
/// time-shifted periodized Gaussians, rescaled until the measured
/// correlation `|V_g phi_mu|` verifiably sits below `C <z>^{-s}` (with `C`
/// twice the window's own measured constant). `jitter_bound = 0` reproduces
/// the frame itself (`z_mu = mu`, `phi_mu = g`). Requires `s > 2`, the
/// summability threshold of `<z>^{-s}` on the phase plane.
pub fn make_molecules(
    sys: &GaborSystem,
    jitter_bound: f64,
    s: f64,
    seed: u64,
) -> Result<MoleculeFamily> {
    if !sys.is_tight() {
        return Err(Error::NotAFrame(
            "molecule generation needs a tight system (run tighten first)".into(),
        ));
    }
    if !(s > 2.0) {
        return Err(Error::InvalidParameter(format!(
            "envelope decay order must exceed 2, got {s}"
        )));
    }
    if !(jitter_bound >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "jitter bound must be nonnegative, got {jitter_bound}"
        )));
    }
    let lat = sys.lattice();
    let n = lat.modulus();
    let g = sys.window();
    let g_norm = g.norm();

    if jitter_bound == 0.0 {
        let members: Vec<Signal> = (0..lat.len()).map(|idx| sys.atom(idx)).collect();
        return molecule_family_from_members(sys, members);
    }

    // Measured decay constant of the window against itself sets the target.
    let vgg = stft(g, g)?;
    let weighted_sup = |table: &Symbol| -> f64 {
        let mut sup = 0.0f64;
        for x in 0..n {
            for xi in 0..n {
                let w = crate::util::per_bracket((x as i64, xi as i64), n).powf(s);
                sup = sup.max(w * table.at(x, xi).norm());
            }
        }
        sup
    };
    let target = 2.0 * weighted_sup(&vgg);

    let base = crate::phase::periodized_gaussian(n)?;
    let reach = jitter_bound.floor() as i64;
    let mut rng = SeededRng::new(seed);
    let mut members = Vec::with_capacity(lat.len());
    for idx in 0..lat.len() {
        let (mx, mxi) = lat.point(idx);
        let (dx, dxi) = loop {
            let dx = rng.below((2 * reach + 1) as usize) as i64 - reach;
            let dxi = rng.below((2 * reach + 1) as usize) as i64 - reach;
            if ((dx * dx + dxi * dxi) as f64).sqrt() <= jitter_bound {
                break (dx, dxi);
            }
        };
        let z = PhasePoint::new(mx as i64 + dx, mxi as i64 + dxi, n);

        let shifts: Vec<(usize, C64)> = (0..3)
            .map(|_| (rng.below(n), rng.complex_gaussian() / 3.0))
            .collect();
        let mut delta = 0.25f64;
        let phi = loop {
            let raw = Signal::from_fn(n, |t| {
                let mut v = g.values()[t];
                for &(x0, c) in &shifts {
                    v += c * delta * base.values()[(t + n - x0) % n];
                }
                v
            })?;
            let phi = raw.scale(C64::new(g_norm / raw.norm().max(1e-300), 0.0));
            if weighted_sup(&stft(&phi, g)?) <= target || delta <= 1e-8 {
                break phi;
            }
            delta /= 2.0;
        };
        members.push(tf_shift(z, &phi));
    }
    molecule_family_from_members(sys, members)
}

/// Domination report for matrix elements between two molecule families.
#[derive(Debug, Clone)]
pub struct MoleculeDiagReport {
    /// The dominating sequence `a_F * a_E^* * h` built from the two stored
    /// envelopes and the Gabor-matrix envelope of the symbol.
    pub h_tilde: LatticeSeq,
    /// No element exceeded its bound beyond `1e-10` relative slack.
    pub ok: bool,
    /// Largest signed excess `|<sigma^w f_mu, e_lam>| - h_tilde(lam - mu)`.
    pub max_excess: f64,
    /// Largest element modulus, for scaling.
    pub scale: f64,
}

/// Verifies `|<sigma^w f_mu, e_lam>| <= h_tilde(lam - mu)` for every pair,
/// with `h_tilde = a_F * a_E^* * h`: expanding `f_mu` in the tight frame,
/// pushing the operator onto the atoms, and expanding against `e_lam` turns
/// each element into a double sum that the triple convolution dominates.
pub fn molecule_almost_diag(
    sigma: &Symbol,
    fam_e: &MoleculeFamily,
    fam_f: &MoleculeFamily,
    spec: &AlgebraSpec,
) -> Result<MoleculeDiagReport> {
    let sys = fam_e.system();
    if !sys.lattice().same_as(fam_f.system().lattice())
        || value_fingerprint(sys.window().values())
            != value_fingerprint(fam_f.system().window().values())
    {
        return Err(Error::LatticeMismatch(
            "molecule families live over different Gabor systems".into(),
        ));
    }
    if !spec.lattice().same_as(sys.lattice()) {
        return Err(Error::LatticeMismatch(
            "algebra lattice does not match the families' lattice".into(),
        ));
    }
    if sigma.n() != sys.n() {
        return Err(Error::LatticeMismatch(format!(
            "symbol modulus {} does not match system modulus {}",
            sigma.n(),
            sys.n()
        )));
    }
    let lat = sys.lattice();
    let h = envelope_h(&gabor_matrix(sigma, sys)?);
    let h_abs = LatticeSeq::from_fn(lat.clone(), |i| C64::new(h.values()[i].norm(), 0.0));
    let h_tilde = convolve(
        &convolve(fam_f.envelope_bound(), &involute(fam_e.envelope_bound()))?,
        &h_abs,
    )?;

    let op = quantize(sigma);
    let images: Vec<Signal> = fam_f
        .members()
        .par_iter()
        .map(|f| op.apply(f).expect("operator size matches member length"))
        .collect();
    let (max_excess, scale) = (0..lat.len())
        .into_par_iter()
        .map(|lam| {
            let mut worst = f64::NEG_INFINITY;
            let mut local_scale = 0.0f64;
            for (mu, image) in images.iter().enumerate() {
                let elem = image.inner(fam_e.member(lam)).norm();
                let bound = h_tilde.values()[lat.sub(lam, mu)].re;
                worst = worst.max(elem - bound);
                local_scale = local_scale.max(elem);
            }
            (worst, local_scale)
        })
        .reduce(
            || (f64::NEG_INFINITY, 0.0),
            |a, b| (a.0.max(b.0), a.1.max(b.1)),
        );
    Ok(MoleculeDiagReport {
        h_tilde,
        ok: max_excess <= 1e-10 * scale.max(1.0),
        max_excess,
        scale,
    })
}

/// A trigonometric polynomial on the (time, frequency) torus:
/// `sigma(t, w) = sum coeff . e^{2 pi i (p t / period + shift . w)}`, each
/// mode quantizing to a modulated time shift by `shift`.
#[derive(Debug, Clone)]
pub struct TorusSymbol {
    period: f64,
    modes: Vec<(i64, f64, C64)>,
}

impl TorusSymbol {
    /// Modes as `(p, shift, coeff)`: time frequency `p / period` and
    /// frequency-side exponential `e^{2 pi i shift . w}`.
    pub fn new(period: f64, modes: Vec<(i64, f64, C64)>) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "torus period must be positive, got {period}"
            )));
        }
        Ok(TorusSymbol { period, modes })
    }

    pub fn constant(period: f64, c: C64) -> Result<Self> {
        TorusSymbol::new(period, vec![(0, 0.0, c)])
    }

    /// `cos(2 pi harmonic t / period)`, independent of frequency.
    pub fn time_cosine(period: f64, harmonic: i64) -> Result<Self> {
        TorusSymbol::new(
            period,
            vec![
                (harmonic, 0.0, C64::new(0.5, 0.0)),
                (-harmonic, 0.0, C64::new(0.5, 0.0)),
            ],
        )
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn modes(&self) -> &[(i64, f64, C64)] {
        &self.modes
    }
}

/// Measured sine-basis almost-diagonalization constants.
#[derive(Debug, Clone)]
pub struct SineDiagReport {
    /// `(s, C_s)` pairs: the smallest constant making the two-term bound
    /// hold over all off-diagonal index pairs.
    pub c_table: Vec<(f64, f64)>,
    /// Moduli of all matrix elements `<sigma^w psi_{k',l'}, psi_{k,l}>`,
    /// row index `(k, l)` in `k`-major order, column `(k', l')`.
    pub element_moduli: DMatrix<f64>,
    /// Largest modulus asymmetry under swapping the two indices.
    pub max_asymmetry: f64,
}

/// Applies the quadrature realization of `sigma^w` on the period grid:
/// each mode `(p, shift, c)` acts as
/// `(A f)(t) = c . e^{2 pi i p ((t + t')/2) / P} f(t')` with `t' = t + shift`
/// on the torus — the frequency integral of the mode's kernel collapses to
/// an exact grid shift when `shift` is a multiple of the step.
fn apply_torus_weyl(sigma: &TorusSymbol, f: &[C64], step: f64, period: f64) -> Result<Vec<C64>> {
    let m = f.len();
    let mut shifted: Vec<(i64, i64, C64)> = Vec::with_capacity(sigma.modes.len());
    for &(p, s, c) in &sigma.modes {
        let qf = s / step;
        let q = qf.round();
        if (qf - q).abs() > 1e-9 * qf.abs().max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "mode shift {s} is not aligned with the quadrature step {step}"
            )));
        }
        shifted.push((p, q as i64, c));
    }
    let mut out = vec![C64::new(0.0, 0.0); m];
    for (i, slot) in out.iter_mut().enumerate() {
        let ti = i as f64 * step;
        let mut acc = C64::new(0.0, 0.0);
        for &(p, q, c) in &shifted {
            let j = (i as i64 + q).rem_euclid(m as i64) as usize;
            let tj = j as f64 * step;
            let phase = C64::from_polar(1.0, 2.0 * PI * p as f64 * (ti + tj) / (2.0 * period));
            acc += c * phase * f[j];
        }
        *slot = acc;
    }
    Ok(out)
}

/// Computes all sine-basis matrix elements of `sigma^w` by quadrature and,
/// for each `s`, the smallest `C_s` with
///
/// ```text
/// |<sigma^w psi_{k',l'}, psi_{k,l}>|
///   <= C_s ( <(alpha dk, (l-l')/(2 alpha))>^{-s} + <(alpha dk, (l+l')/(2 alpha))>^{-s} ),
/// ```
///
/// where `dk` is the signed periodic difference of the bell indices. The
/// diagonal pairs `(k,l) = (k',l')` are excluded from the table — they are
/// bounded by the operator norm and carry no decay information.
pub fn sine_basis_almost_diag(
    sigma: &TorusSymbol,
    spec: &BellSpec,
    k_count: usize,
    l_max: usize,
    s_list: &[f64],
) -> Result<SineDiagReport> {
    if spec.grid_step > spec.epsilon / 8.0 {
        return Err(Error::InvalidParameter(format!(
            "quadrature grid too coarse: step {} exceeds eps/8 = {}",
            spec.grid_step,
            spec.epsilon / 8.0
        )));
    }
    let p = spec.alpha * k_count as f64;
    if (sigma.period - p).abs() > 1e-9 * p {
        return Err(Error::LatticeMismatch(format!(
            "symbol period {} does not match the basis period {}",
            sigma.period, p
        )));
    }
    let basis = local_sine_basis(spec, k_count, l_max)?;
    let b = basis.len();
    let step = spec.grid_step;

    let images: Vec<Vec<C64>> = basis
        .par_iter()
        .map(|psi| {
            apply_torus_weyl(sigma, psi.samples(), step, p)
                .expect("mode alignment was validated once per call")
        })
        .collect();
    // Validate alignment up front so the parallel loop cannot fail.
    apply_torus_weyl(sigma, basis[0].samples(), step, p)?;

    let mut elements = DMatrix::<f64>::zeros(b, b);
    for row in 0..b {
        for (col, image) in images.iter().enumerate() {
            let e: C64 = image
                .iter()
                .zip(basis[row].samples())
                .map(|(u, v)| u * v.conj())
                .sum();
            elements[(row, col)] = (e * step).norm();
        }
    }

    let mut max_asymmetry = 0.0f64;
    for a in 0..b {
        for c in (a + 1)..b {
            max_asymmetry = max_asymmetry.max((elements[(a, c)] - elements[(c, a)]).abs());
        }
    }

    let stride = l_max + 1;
    let bracket = |x: f64, y: f64| (1.0 + x * x + y * y).sqrt();
    let mut c_table = Vec::with_capacity(s_list.len());
    for &s in s_list {
        let mut c_s = 0.0f64;
        for a in 0..b {
            let (k, l) = (a / stride, a % stride);
            for cix in 0..b {
                if a == cix {
                    continue;
                }
                let (kp, lp) = (cix / stride, cix % stride);
                let dk = signed_rep(k as i64 - kp as i64, k_count) as f64;
                let dm = (l as f64 - lp as f64) / (2.0 * spec.alpha);
                let dp = (l as f64 + lp as f64) / (2.0 * spec.alpha);
                let bound =
                    bracket(spec.alpha * dk, dm).powf(-s) + bracket(spec.alpha * dk, dp).powf(-s);
                c_s = c_s.max(elements[(a, cix)] / bound);
            }
        }
        c_table.push((s, c_s));
    }
    Ok(SineDiagReport {
        c_table,
        element_moduli: elements,
        max_asymmetry,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdmat;
    use crate::phase::{periodized_gaussian, tighten};
    use crate::seqalg::{NormExponent, PhaseLattice, WeightSpec};
    use crate::util::{per_bracket, signed_rep};
    use crate::weyl::quantize;

    fn spec(alpha: f64, eps: f64, n: u32, step: f64) -> BellSpec {
        BellSpec::new(alpha, eps, n, step).unwrap()
    }

    fn desk_system(n: usize, a: usize, b: usize) -> GaborSystem {
        let lat = PhaseLattice::new(n, a, b).unwrap();
        tighten(&periodized_gaussian(n).unwrap(), lat).unwrap()
    }

    fn bump_symbol(n: usize, amp: f64) -> Symbol {
        Symbol::from_fn(n, |x, xi| {
            let dx = signed_rep(x as i64, n) as f64;
            let dxi = signed_rep(xi as i64, n) as f64;
            C64::new(
                1.0 + amp * (-PI * (dx * dx + dxi * dxi) / n as f64).exp(),
                0.0,
            )
        })
        .unwrap()
    }

    #[test]
    fn bell_spec_validates_parameters() {
        assert!(BellSpec::new(1.0, 0.5, 3, 1.0 / 512.0).is_err());
        assert!(BellSpec::new(1.0, 0.6, 3, 1.0 / 512.0).is_err());
        assert!(BellSpec::new(1.0, -0.1, 3, 1.0 / 512.0).is_err());
        assert!(BellSpec::new(1.0, 0.25, 0, 1.0 / 512.0).is_err());
        assert!(BellSpec::new(1.0, 0.25, 3, 0.0).is_err());
        assert!(BellSpec::new(-1.0, 0.25, 3, 1.0 / 512.0).is_err());
        assert!(BellSpec::new(1.0, 0.25, 3, 1.0 / 512.0).is_ok());
    }

    #[test]
    fn bump_is_even_normalized_and_theta_monotone() {
        for n in [1u32, 2, 3, 5] {
            let sp = spec(1.0, 0.25, n, 1.0 / 512.0);
            for i in 0..40 {
                let t = i as f64 * 0.25 / 40.0;
                assert!((sp.zeta(t) - sp.zeta(-t)).abs() <= 1e-14);
            }
            assert_eq!(sp.zeta(0.26), 0.0);
            assert_eq!(sp.theta(-0.3), 0.0);
            assert!((sp.theta(0.25) - PI / 2.0).abs() <= 1e-14);
            assert!((sp.theta(10.0) - PI / 2.0).abs() <= 1e-14);
            let mut prev = -1.0;
            for i in 0..=100 {
                let t = -0.3 + i as f64 * 0.6 / 100.0;
                let th = sp.theta(t);
                assert!(th >= prev - 1e-14, "theta not monotone at {t}");
                prev = th;
            }
        }
    }

    #[test]
    fn bell_has_plateau_support_and_reality() {
        let sp = spec(1.0, 0.25, 3, 1.0 / 512.0);
        let b = bell(&sp).unwrap();
        assert_eq!(b.len(), 1024);
        for (i, v) in b.samples().iter().enumerate() {
            assert_eq!(v.im, 0.0);
            let t = i as f64 * sp.grid_step();
            if t >= 0.25 && t <= 0.75 {
                assert!((v.re - 1.0).abs() <= 1e-13, "plateau broken at {t}");
            }
            if t > 1.25 && t < 1.75 {
                assert!(v.re.abs() <= 1e-15, "support leaked to {t}");
            }
        }
        // The raw bell vanishes left of the transition.
        assert_eq!(bell_value(&sp, -0.25), 0.0);
        assert_eq!(bell_value(&sp, -1.0), 0.0);
    }

    #[test]
    fn bell_squares_are_compatible_across_one_period() {
        let sp = spec(1.0, 0.25, 2, 1.0 / 512.0);
        for i in 0..=256 {
            let t = 0.75 + i as f64 * 0.5 / 256.0;
            let sum = bell_value(&sp, t).powi(2) + bell_value(&sp, t - 1.0).powi(2);
            assert!((sum - 1.0).abs() <= 1e-10, "compatibility broken at {t}");
        }
    }

    #[test]
    fn bell_translates_partition_unity() {
        let sp = spec(1.0, 0.3, 4, 1.0 / 256.0);
        let k_count = 4;
        let p = sp.alpha() * k_count as f64;
        let m = (p / sp.grid_step()).round() as usize;
        for i in 0..m {
            let t = i as f64 * sp.grid_step();
            let mut acc = 0.0;
            for k in 0..k_count {
                for mm in -1..=1 {
                    let u = t - sp.alpha() * k as f64 + mm as f64 * p;
                    acc += bell_value(&sp, u).powi(2);
                }
            }
            assert!((acc - 1.0).abs() <= 1e-10, "partition broken at {t}");
        }
    }

    #[test]
    fn sine_basis_is_orthonormal_by_quadrature() {
        let sp = spec(1.0, 0.25, 3, 4.0 / 2048.0);
        assert!(matches!(
            local_sine_basis(&sp, 3, 4),
            Err(Error::InvalidParameter(msg)) if msg.contains("period mismatch")
        ));
        let basis = local_sine_basis(&sp, 4, 7).unwrap();
        assert_eq!(basis.len(), 32);
        for (a, psi) in basis.iter().enumerate() {
            assert!((psi.norm() - 1.0).abs() <= 1e-5, "member {a} norm");
            for chi in basis.iter().skip(a + 1) {
                assert!(psi.inner(chi).unwrap().norm() <= 1e-5);
            }
        }
    }

    #[test]
    fn sine_members_are_localized_to_their_bell() {
        let sp = spec(1.0, 0.25, 3, 4.0 / 2048.0);
        let basis = local_sine_basis(&sp, 4, 3).unwrap();
        let p = 4.0;
        for k in 0..4usize {
            let psi = &basis[k * 4 + 2];
            for (i, v) in psi.samples().iter().enumerate() {
                let t = i as f64 * sp.grid_step();
                // Distance to the support interval [alpha k - eps, alpha (k+1) + eps] mod P.
                let inside = (-1..=1).any(|m| {
                    let u = t + m as f64 * p - k as f64;
                    (-0.25..=1.25).contains(&u)
                });
                if !inside {
                    assert!(v.norm() <= 1e-15, "member {k} leaked to {t}");
                }
            }
        }
    }

    #[test]
    fn exponential_split_is_exact_on_the_grid() {
        let sp = spec(1.0, 0.25, 3, 1.0 / 512.0);
        assert!(exponential_split_check(&sp, 0, 0).unwrap().max_point_err <= 1e-12);
        let mut rng = SeededRng::new(0x5eed_5911);
        for _ in 0..6 {
            let k = rng.below(5);
            let l = rng.below(9);
            let rep = exponential_split_check(&sp, k, l).unwrap();
            assert!(
                rep.max_point_err <= 1e-12,
                "split failed at ({k}, {l}): {}",
                rep.max_point_err
            );
        }
    }

    #[test]
    fn exponential_split_sign_bookkeeping() {
        // Recompute the right-hand side with both signs for (k, l) = (1, 1)
        // and (1, 2): the prefactor (-1)^{kl} is -1 for the first, +1 for
        // the second, and the wrong sign is off by twice the member.
        let sp = spec(1.0, 0.25, 3, 1.0 / 512.0);
        let alpha = 1.0;
        for (k, l, expected_sign) in [(1usize, 1usize, -1.0), (1, 2, 1.0)] {
            let k_count = 4;
            let p = alpha * k_count as f64;
            let m = (p / sp.grid_step()).round() as usize;
            let mut max_good = 0.0f64;
            let mut max_bad = 0.0f64;
            let mut max_member = 0.0f64;
            for i in 0..m {
                let t = i as f64 * sp.grid_step();
                let mut lhs = 0.0;
                let mut rhs = C64::new(0.0, 0.0);
                for mm in -1..=1 {
                    let tt = t + mm as f64 * p;
                    let u = tt - alpha * k as f64;
                    lhs += raw_sine_member(&sp, k, l, tt);
                    let b = bell_value(&sp, u);
                    let plus = C64::from_polar(1.0, 2.0 * PI * l as f64 * tt / (2.0 * alpha))
                        * C64::from_polar(1.0, PI * u / (2.0 * alpha));
                    let minus = C64::from_polar(1.0, -2.0 * PI * l as f64 * tt / (2.0 * alpha))
                        * C64::from_polar(1.0, -PI * u / (2.0 * alpha));
                    rhs += C64::new(0.0, -0.5) * (2.0f64 / alpha).sqrt() * (plus - minus) * b;
                }
                max_good = max_good.max((C64::new(lhs, 0.0) - rhs * expected_sign).norm());
                max_bad = max_bad.max((C64::new(lhs, 0.0) + rhs * expected_sign).norm());
                max_member = max_member.max(lhs.abs());
            }
            assert!(max_good <= 1e-12, "({k},{l}) correct sign residual {max_good}");
            assert!(
                max_bad >= max_member,
                "({k},{l}) flipped sign should be off by twice the member"
            );
            assert!(max_member > 0.5);
        }
    }

    #[test]
    fn zero_jitter_molecules_are_the_frame_itself() {
        let sys = desk_system(15, 3, 3);
        let fam = make_molecules(&sys, 0.0, 4.0, 7).unwrap();
        for (idx, e) in fam.members().iter().enumerate() {
            let atom = sys.atom(idx);
            let dev = e
                .values()
                .iter()
                .zip(atom.values())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(dev <= 1e-12);
        }
        let vgg = stft(sys.window(), sys.window()).unwrap();
        let lat = sys.lattice();
        for nu in 0..lat.len() {
            let (x, xi) = lat.point(nu);
            assert!(
                (fam.envelope_bound().values()[nu].re - vgg.at(x, xi).norm()).abs() <= 1e-12,
                "envelope is not the window self-correlation at {nu}"
            );
        }
        assert!(fam.verify_envelope() <= 1e-12);
    }

    #[test]
    fn seeded_molecules_verify_their_stored_envelope() {
        let sys = desk_system(33, 3, 3);
        let s = 4.0;
        let fam = make_molecules(&sys, 1.5, s, 0x5eed_301e).unwrap();
        assert!(fam.verify_envelope() <= 1e-12);
        for v in fam.envelope_bound().values() {
            assert!(v.re >= 0.0 && v.im == 0.0);
        }
        // The scan constant C'' absorbs the jitter: a(nu) <= C'' <nu>^{-s}.
        let n = sys.n();
        let lat = sys.lattice();
        let mut c2 = 0.0f64;
        for nu in 0..lat.len() {
            let (x, xi) = lat.point(nu);
            c2 = c2.max(fam.envelope_bound().values()[nu].re * per_bracket((x as i64, xi as i64), n).powf(s));
        }
        assert!(c2.is_finite() && c2 > 0.0);
        for nu in 0..lat.len() {
            let (x, xi) = lat.point(nu);
            let bound = c2 * per_bracket((x as i64, xi as i64), n).powf(-s);
            assert!(fam.envelope_bound().values()[nu].re <= bound * (1.0 + 1e-12));
        }

        assert!(matches!(
            make_molecules(&sys, 1.5, 2.0, 1),
            Err(Error::InvalidParameter(_))
        ));
        let lat2 = PhaseLattice::new(15, 3, 3).unwrap();
        let loose = GaborSystem::from_window(periodized_gaussian(15).unwrap(), lat2).unwrap();
        assert!(matches!(
            make_molecules(&loose, 1.0, 4.0, 1),
            Err(Error::NotAFrame(_))
        ));
    }

    #[test]
    fn molecule_bounds_are_window_robust() {
        let n = 33;
        let sys1 = desk_system(n, 3, 3);
        let fam = make_molecules(&sys1, 1.5, 4.0, 0x5eed_20b5).unwrap();
        let narrow = Signal::from_fn(n, |t| {
            let d = signed_rep(t as i64, n) as f64;
            C64::new((-1.5 * PI * d * d / n as f64).exp(), 0.0)
        })
        .unwrap();
        let sys2 = tighten(&narrow, sys1.lattice().clone()).unwrap();
        let fam2 = molecule_family_from_members(&sys2, fam.members().to_vec()).unwrap();

        let fit1 = cdmat::decay_fit(fam.envelope_bound(), 1.0).unwrap();
        let fit2 = cdmat::decay_fit(fam2.envelope_bound(), 1.0).unwrap();
        assert!(fit1.s_hat > 0.0 && fit2.s_hat > 0.0);
        let rel = (fit1.s_hat - fit2.s_hat).abs() / fit1.s_hat.max(fit2.s_hat);
        assert!(
            rel <= 0.2,
            "envelope exponents moved by {rel} between windows ({} vs {})",
            fit1.s_hat,
            fit2.s_hat
        );
    }

    #[test]
    fn operator_images_of_atoms_match_the_matrix_envelope() {
        let sys = desk_system(15, 3, 3);
        let sigma = bump_symbol(15, 0.4);
        let op = quantize(&sigma);
        let members: Vec<Signal> = (0..sys.lattice().len())
            .map(|idx| op.apply(&sys.atom(idx)).unwrap())
            .collect();
        let fam = molecule_family_from_members(&sys, members).unwrap();
        let h = envelope_h(&gabor_matrix(&sigma, &sys).unwrap());
        let scale = fam
            .envelope_bound()
            .values()
            .iter()
            .map(|v| v.re)
            .fold(0.0, f64::max);
        for nu in 0..sys.lattice().len() {
            let a = h.values()[nu].norm();
            let b = fam.envelope_bound().values()[nu].re;
            assert!(
                (a - b).abs() <= 1e-12 * scale,
                "matrix envelope and image-family envelope differ at {nu}"
            );
        }
    }

    #[test]
    fn molecule_elements_are_dominated() {
        let sys = desk_system(15, 3, 3);
        let spec_a = AlgebraSpec::new(
            WeightSpec::flat(),
            NormExponent::One,
            sys.lattice().clone(),
        )
        .unwrap();

        // Frame against frame, zero symbol, then a bump symbol.
        let frame = make_molecules(&sys, 0.0, 4.0, 1).unwrap();
        let zero = Symbol::constant(15, C64::new(0.0, 0.0)).unwrap();
        let rep = molecule_almost_diag(&zero, &frame, &frame, &spec_a).unwrap();
        assert!(rep.ok && rep.scale <= 1e-300);

        let sigma = bump_symbol(15, 0.3);
        let rep = molecule_almost_diag(&sigma, &frame, &frame, &spec_a).unwrap();
        assert!(rep.ok, "frame/frame domination failed: {}", rep.max_excess);

        // Two distinct seeded families.
        let fam_e = make_molecules(&sys, 1.5, 4.0, 0x5eed_e001).unwrap();
        let fam_f = make_molecules(&sys, 1.0, 3.5, 0x5eed_f002).unwrap();
        let rep = molecule_almost_diag(&sigma, &fam_e, &fam_f, &spec_a).unwrap();
        assert!(rep.ok, "seeded-family domination failed: {}", rep.max_excess);
        assert!(rep.scale > 0.0);

        // Families over different systems are rejected.
        let other = desk_system(15, 1, 3);
        let fam_o = make_molecules(&other, 0.0, 4.0, 1).unwrap();
        assert!(matches!(
            molecule_almost_diag(&sigma, &frame, &fam_o, &spec_a),
            Err(Error::LatticeMismatch(_))
        ));
    }

    #[test]
    fn identity_symbol_gives_the_quadrature_gram() {
        let sp = spec(1.0, 0.25, 3, 4.0 / 2048.0);
        let sigma = TorusSymbol::constant(4.0, C64::new(1.0, 0.0)).unwrap();
        let rep = sine_basis_almost_diag(&sigma, &sp, 4, 7, &[2.0]).unwrap();
        let b = rep.element_moduli.nrows();
        for a in 0..b {
            for c in 0..b {
                if a == c {
                    assert!((rep.element_moduli[(a, c)] - 1.0).abs() <= 1e-5);
                } else {
                    assert!(rep.element_moduli[(a, c)] <= 1e-5);
                }
            }
        }
        assert!(rep.c_table[0].1 <= 1e-3, "C_2 = {}", rep.c_table[0].1);
        assert!(rep.max_asymmetry <= 1e-10);
    }

    #[test]
    fn coarse_quadrature_grid_is_rejected() {
        let sp = spec(1.0, 0.25, 3, 0.25 / 4.0);
        let sigma = TorusSymbol::constant(4.0, C64::new(1.0, 0.0)).unwrap();
        match sine_basis_almost_diag(&sigma, &sp, 4, 3, &[2.0]) {
            Err(Error::InvalidParameter(msg)) => {
                assert!(msg.contains("too coarse"), "unexpected message: {msg}")
            }
            other => panic!("expected a coarse-grid error, got {other:?}"),
        }
    }

    #[test]
    fn cosine_symbol_constants_match_the_recorded_fixture() {
        let sp = spec(1.0, 0.25, 3, 4.0 / 2048.0);
        let sigma = TorusSymbol::time_cosine(4.0, 1).unwrap();
        let rep = sine_basis_almost_diag(&sigma, &sp, 4, 15, &[2.0, 3.0, 4.0]).unwrap();
        for &(s, c_s) in &rep.c_table {
            assert!(c_s.is_finite() && c_s > 0.0, "C_{s} not finite");
        }
        assert!(rep.max_asymmetry <= 1e-10);
        // Regression fixture measured on the 2048-point grid with K = 4,
        // l_max = 15, smoothness 3: the constants must reproduce exactly up
        // to roundoff drift.
        let fixture = [0.2667530261977, 0.2998671880158, 1.348154923433];
        for (&(s, c_s), &pinned) in rep.c_table.iter().zip(&fixture) {
            assert!(
                (c_s - pinned).abs() <= 1e-9 * pinned,
                "C_{s} drifted from the fixture: {c_s} vs {pinned}"
            );
        }
    }
}
