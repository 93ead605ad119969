//! Experiment configuration: defaults, JSON config files, CLI overrides.
//!
//! Resolution order is fixed: built-in defaults are overwritten by the JSON
//! config file (when `--config` is given), which in turn is overwritten by
//! individual CLI flags.  The fully resolved configuration is echoed into
//! every report so a run can be reproduced from its artifacts alone.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use tfpsi_core::phase::{periodized_gaussian, GaborSystem, Signal, Symbol};
use tfpsi_core::seqalg::{AlgebraSpec, NormExponent, PhaseLattice, WeightSpec};
use tfpsi_core::util::{per_norm2, root_of_unity, SeededRng, C64};
use tfpsi_core::{Error, Result};

/// Window choice for the discrete experiments.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum WindowKind {
    /// Periodized Gaussian `sum_j exp(-pi (t + jN)^2 / N)`, the default.
    PeriodizedGaussian,
    /// Unit impulse at the origin (useful for degenerate-frame experiments).
    Delta,
    /// Signal loaded from a `.csv` or `.bin` file.
    #[serde(alias = "custom-file")]
    CustomFile { path: String },
}

/// Symbol presets.  Seeded presets fall back to the experiment seed when no
/// per-preset seed is given.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "preset", rename_all = "camelCase", deny_unknown_fields)]
pub enum SymbolPreset {
    /// Constant symbol `sigma = value` (quantizes to `value * I`).
    Constant {
        #[serde(default = "default_one")]
        value: f64,
    },
    /// `1 + amplitude * exp(-pi |z|^2 / N)`, a smooth perturbation of the
    /// identity; invertible for moderate amplitudes.
    Bump {
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
    /// Trigonometric polynomial with seeded Gaussian coefficients on the
    /// frequency box `|k1|, |k2| <= degree`.
    TrigPoly {
        #[serde(default = "default_degree")]
        degree: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
    /// Seeded symbol whose 2-D Fourier coefficients live in the Euclidean
    /// ball of the given radius.
    RandomBandlimited {
        #[serde(default)]
        bandwidth: Option<usize>,
        #[serde(default)]
        seed: Option<u64>,
    },
    /// Independent seeded Gaussian value at every phase-space point; no
    /// smoothness at all.
    Rough {
        #[serde(default)]
        seed: Option<u64>,
    },
    /// Symbol loaded from a `.csv` or `.bin` file.
    FromFile { path: String },
}

/// Weight choice for the matrix algebra.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum WeightConfig {
    Flat,
    Polynomial { s: f64 },
    Subexponential { delta: f64, b: f64 },
}

/// Envelope norm exponent for the matrix algebra.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub enum QConfig {
    One,
    Infinity,
}

/// Matrix-algebra parameters (weight and envelope exponent).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct AlgebraConfig {
    pub weight: WeightConfig,
    pub q: QConfig,
}

impl Default for AlgebraConfig {
    fn default() -> Self {
        AlgebraConfig {
            weight: WeightConfig::Flat,
            q: QConfig::One,
        }
    }
}

/// Per-suite knobs.  Every tolerance used to decide `pass` lives here, with
/// defaults matching the acceptance criteria; the library itself only
/// reports measured values.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct SuiteOptions {
    /// Number of random probe signals for frame / operator checks.
    pub probes: usize,
    /// Number of seeded symbols in family-style suites (`aldiag`).
    pub symbol_family: usize,
    /// Parseval residual tolerance (relative to `||f||^2`).
    pub parseval_tol: f64,
    /// Covariance and read-back relative-error tolerance.
    pub covariance_tol: f64,
    /// Spreading/magic identity relative-error tolerance.
    pub magic_tol: f64,
    /// Slack for the per-element grand-symbol bound.
    pub element_slack: f64,
    /// Slack for the dominating-envelope sweep.
    pub domination_slack: f64,
    /// Tolerance for the composition identity on the coefficient range.
    pub algebra_tol: f64,
    /// Tolerance for annihilation of the coefficient-space complement.
    pub complement_tol: f64,
    /// Slack for weighted boundedness quotients.
    pub boundedness_slack: f64,
    /// Slack, relative to scale, for envelope submultiplicativity.
    pub submult_slack: f64,
    /// Relative tolerance for the pseudoinverse cross-check.
    pub pinv_tol: f64,
    /// Residual tolerance for inversion / spectral-invariance probes.
    pub invariance_tol: f64,
    /// Relative singular-value cutoff used when inverting symbols.
    pub invert_rtol: f64,
    /// Polynomial decay rate `s` for molecule envelopes.
    pub molecule_s: f64,
    /// Maximum time-frequency jitter applied when synthesizing molecules.
    pub molecule_jitter: f64,
    /// Slack, relative to scale, for molecule almost-diagonalization.
    pub molecule_slack: f64,
    /// Off-diagonal band the operator kernel must vanish beyond.
    pub band_distance: usize,
    /// Kernel-modulus tolerance beyond `band_distance`.
    pub band_tol: f64,
    /// Decay rates probed by the `hormander` suite.
    pub hormander_s_list: Vec<f64>,
    /// Number of translated bells in the local sine basis.
    pub sine_k: usize,
    /// Highest sine frequency index per bell.
    pub sine_l_max: usize,
    /// Bell smoothness order (vanishing derivatives at the cut edges).
    pub sine_smoothness: u32,
    /// Bell spacing `alpha` on the real line.
    pub sine_alpha: f64,
    /// Bell transition half-width `epsilon`.
    pub sine_epsilon: f64,
    /// Samples per symbol period for the continuous quadrature grid.
    pub sine_grid_points: usize,
    /// Decay rates for the sine-basis off-diagonal constants.
    pub sine_s_list: Vec<f64>,
    /// Gram-matrix deviation tolerance for the sine basis.
    pub gram_tol: f64,
    /// Pointwise tolerance for the exponential splitting identity.
    pub split_tol: f64,
    /// Grid resolution for the convolution-algebra maximality check.
    pub l1_grid_m: usize,
    /// Relative-error tolerance for the maximality check.
    pub l1_tol: f64,
    /// Oversampling factor (times lattice size) for the diagonal Fourier
    /// expansion check.
    pub fourier_oversample: usize,
    /// Max-error tolerance for the diagonal Fourier expansion.
    pub fourier_tol: f64,
    /// Weight growth rate for the root-limit profile.
    pub grs_s: f64,
    /// Lattice direction for the root-limit profile.
    pub grs_lambda: (i64, i64),
    /// Number of points in the root-limit profile.
    pub grs_n_max: usize,
    /// The profile must end below this value.
    pub grs_end: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            probes: 20,
            symbol_family: 5,
            parseval_tol: 1e-10,
            covariance_tol: 1e-9,
            magic_tol: 1e-10,
            element_slack: 1e-11,
            domination_slack: 1e-10,
            algebra_tol: 1e-8,
            complement_tol: 1e-9,
            boundedness_slack: 1e-10,
            submult_slack: 1e-12,
            pinv_tol: 1e-8,
            invariance_tol: 1e-9,
            invert_rtol: tfpsi_core::aldiag::INVERT_RTOL,
            molecule_s: 4.0,
            molecule_jitter: 1.5,
            molecule_slack: 1e-10,
            band_distance: 6,
            band_tol: 1e-10,
            hormander_s_list: vec![0.0, 2.0, 4.0, 6.0, 8.0],
            sine_k: 4,
            sine_l_max: 15,
            sine_smoothness: 3,
            sine_alpha: 1.0,
            sine_epsilon: 0.25,
            sine_grid_points: 2048,
            sine_s_list: vec![2.0, 3.0, 4.0],
            gram_tol: 1e-5,
            split_tol: 1e-12,
            l1_grid_m: 4096,
            l1_tol: 1e-3,
            fourier_oversample: 2,
            fourier_tol: 1e-10,
            grs_s: 3.0,
            grs_lambda: (1, 1),
            grs_n_max: 50,
            grs_end: 1.3,
        }
    }
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Ambient dimension; must be odd.
    pub n: usize,
    /// Lattice step in time.
    pub alpha: usize,
    /// Lattice step in frequency.
    pub beta: usize,
    pub window_kind: WindowKind,
    pub algebra: AlgebraConfig,
    /// Symbol preset; when absent each suite fills in its canonical choice.
    pub symbol_preset: Option<SymbolPreset>,
    /// Master seed; all randomness in a run derives from it.
    pub seed: u64,
    /// Directory receiving `report.json` and CSV artifacts.
    pub out_dir: String,
    pub suite: SuiteOptions,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 33,
            alpha: 3,
            beta: 3,
            window_kind: WindowKind::PeriodizedGaussian,
            algebra: AlgebraConfig::default(),
            symbol_preset: None,
            seed: 7,
            out_dir: "out".into(),
            suite: SuiteOptions::default(),
        }
    }
}

impl ExperimentConfig {
    /// Load a JSON config file on top of the defaults.
    pub fn from_file(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            path: path.into(),
            line: 0,
            msg: format!("cannot read config: {e}"),
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.into(),
            line: e.line(),
            msg: e.to_string(),
        })
    }

    /// Fill the symbol preset with `fallback` when the user did not choose
    /// one, so the echoed config always states what actually ran.
    pub fn resolve_symbol(&mut self, fallback: SymbolPreset) {
        if self.symbol_preset.is_none() {
            self.symbol_preset = Some(fallback);
        }
    }

    pub fn lattice(&self) -> Result<Arc<PhaseLattice>> {
        PhaseLattice::new(self.n, self.alpha, self.beta)
    }

    pub fn window(&self) -> Result<Signal> {
        match &self.window_kind {
            WindowKind::PeriodizedGaussian => periodized_gaussian(self.n),
            WindowKind::Delta => Signal::delta(self.n, 0),
            WindowKind::CustomFile { path } => {
                let g = crate::io::load_signal(path)?;
                if g.n() != self.n {
                    return Err(Error::InvalidParameter(format!(
                        "windowKind file has length {} but n = {}",
                        g.n(),
                        self.n
                    )));
                }
                Ok(g)
            }
        }
    }

    /// Canonical tight system for the configured window and lattice.
    pub fn system(&self) -> Result<GaborSystem> {
        tfpsi_core::phase::tighten(&self.window()?, self.lattice()?)
    }

    pub fn weight(&self) -> Result<WeightSpec> {
        match self.algebra.weight {
            WeightConfig::Flat => Ok(WeightSpec::flat()),
            WeightConfig::Polynomial { s } => WeightSpec::polynomial(s),
            WeightConfig::Subexponential { delta, b } => WeightSpec::subexponential(delta, b),
        }
    }

    pub fn algebra_spec(&self, lat: &Arc<PhaseLattice>) -> Result<AlgebraSpec> {
        let q = match self.algebra.q {
            QConfig::One => NormExponent::One,
            QConfig::Infinity => NormExponent::Infinity,
        };
        AlgebraSpec::new(self.weight()?, q, lat.clone())
    }

    /// Build the configured symbol (index 0 of the seeded family).
    pub fn symbol(&self) -> Result<Symbol> {
        self.symbol_at(0)
    }

    /// Seeded presets yield a family of `suite.symbol_family` distinct
    /// symbols; deterministic presets collapse to a single member.
    pub fn family_size(&self) -> usize {
        match self.symbol_preset {
            Some(SymbolPreset::TrigPoly { .. })
            | Some(SymbolPreset::RandomBandlimited { .. })
            | Some(SymbolPreset::Rough { .. }) => self.suite.symbol_family.max(1),
            _ => 1,
        }
    }

    /// Build the `idx`-th member of the symbol family: seeded presets shift
    /// their seed by `idx`, deterministic presets repeat.
    pub fn symbol_at(&self, idx: u64) -> Result<Symbol> {
        let preset = self.symbol_preset.as_ref().ok_or_else(|| {
            Error::InvalidParameter("symbolPreset is not set for this suite".into())
        })?;
        build_symbol(preset, self.n, self.seed, idx)
    }
}

fn default_one() -> f64 {
    1.0
}
fn default_amplitude() -> f64 {
    0.3
}
fn default_degree() -> usize {
    2
}

fn build_symbol(preset: &SymbolPreset, n: usize, run_seed: u64, idx: u64) -> Result<Symbol> {
    match preset {
        SymbolPreset::Constant { value } => Symbol::constant(n, C64::new(*value, 0.0)),
        SymbolPreset::Bump { amplitude } => {
            let a = *amplitude;
            Symbol::from_fn(n, |x, xi| {
                let d2 = per_norm2((x as i64, xi as i64), n);
                C64::new(1.0 + a * (-std::f64::consts::PI * d2 / n as f64).exp(), 0.0)
            })
        }
        SymbolPreset::TrigPoly { degree, seed } => {
            trig_symbol(n, seed.unwrap_or(run_seed) + idx, *degree as i64, false)
        }
        SymbolPreset::RandomBandlimited { bandwidth, seed } => {
            let bw = bandwidth.unwrap_or_else(|| (n / 8).max(1)) as i64;
            trig_symbol(n, seed.unwrap_or(run_seed) + idx, bw, true)
        }
        SymbolPreset::Rough { seed } => {
            let mut rng = SeededRng::new(seed.unwrap_or(run_seed) + idx);
            let vals: Vec<C64> = (0..n * n).map(|_| rng.complex_gaussian()).collect();
            Symbol::from_fn(n, |x, xi| vals[x * n + xi])
        }
        SymbolPreset::FromFile { path } => {
            let sigma = crate::io::load_symbol(path)?;
            if sigma.n() != n {
                return Err(Error::InvalidParameter(format!(
                    "symbolPreset file has modulus {} but n = {}",
                    sigma.n(),
                    n
                )));
            }
            Ok(sigma)
        }
    }
}

/// Seeded symbol with Fourier support on the box (`ball = false`) or the
/// Euclidean ball (`ball = true`) of radius `radius`.
fn trig_symbol(n: usize, seed: u64, radius: i64, ball: bool) -> Result<Symbol> {
    let mut rng = SeededRng::new(seed);
    let mut modes: Vec<(i64, i64, C64)> = Vec::new();
    for k1 in -radius..=radius {
        for k2 in -radius..=radius {
            if ball && k1 * k1 + k2 * k2 > radius * radius {
                continue;
            }
            let scale = 1.0 / (1.0 + (k1 * k1 + k2 * k2) as f64);
            modes.push((k1, k2, rng.complex_gaussian() * scale));
        }
    }
    Symbol::from_fn(n, |x, xi| {
        let mut acc = C64::new(0.0, 0.0);
        for &(k1, k2, c) in &modes {
            acc += c * root_of_unity(n, k1 * x as i64 + k2 * xi as i64);
        }
        acc
    })
}
