//! Experiment suites.
//!
//! Each suite drives one slice of the library, collects scalar metrics,
//! applies the configured tolerances, and drops CSV artifacts next to the
//! report.  Suites are deterministic functions of the resolved
//! configuration; all randomness flows through the counter-based seeded
//! generator, so reports are byte-identical across thread counts.

use std::path::Path;
use std::time::Instant;

use tfpsi_core::aldiag::{
    algebra_identity_check, boundedness_check, dominating_h, dominating_h_norm_bound,
    domination_check, envelope_h, gabor_matrix, invert_symbol, norm_equivalence_check,
    spectral_invariance_experiment, SequenceExponent,
};
use tfpsi_core::cdmat::{envelope_product_bound, CDMatrix};
use tfpsi_core::molecules::{
    bell, exponential_split_check, local_sine_basis, make_molecules, molecule_almost_diag,
    sine_basis_almost_diag, BellSpec, TorusSymbol,
};
use tfpsi_core::phase::{
    analysis, magic_formula_check, synthesis, wigner, GaborSystem, PhasePoint, Signal,
};
use tfpsi_core::seqalg::{algebra_norm, grs_profile, l1_maximality_check, LatticeSeq};
use tfpsi_core::symclass::{
    element_envelope, grand_symbol, hormander_profile, operator_band_profile,
};
use tfpsi_core::util::{per_bracket, SeededRng, C64};
use tfpsi_core::weyl::{covariance_check, quantize, OperatorMatrix};
use tfpsi_core::{Error, Result};

use crate::config::{ExperimentConfig, SymbolPreset};
use crate::io::{fmt_f64, write_csv};
use crate::report::{Outcome, Report};

pub const SUITES: &[&str] = &[
    "frame",
    "covariance",
    "aldiag",
    "algebra",
    "invert",
    "hormander",
    "molecules",
    "sinebasis",
    "appendix",
];

/// Canonical symbol for suites the user did not configure one for.
fn default_symbol(suite: &str) -> Option<SymbolPreset> {
    match suite {
        "covariance" => Some(SymbolPreset::RandomBandlimited {
            bandwidth: None,
            seed: None,
        }),
        "aldiag" | "algebra" | "molecules" => Some(SymbolPreset::TrigPoly {
            degree: 3,
            seed: None,
        }),
        "invert" => Some(SymbolPreset::Bump { amplitude: 0.3 }),
        "hormander" => Some(SymbolPreset::TrigPoly {
            degree: 2,
            seed: None,
        }),
        _ => None,
    }
}

/// Resolve per-suite defaults, run the suite, write `report.json` and CSV
/// artifacts, and hand back the report plus tolerance violations.
pub fn execute(suite: &str, mut cfg: ExperimentConfig) -> Result<(Report, Vec<String>)> {
    if let Some(preset) = default_symbol(suite) {
        cfg.resolve_symbol(preset);
    }
    let out = Path::new(&cfg.out_dir).to_path_buf();
    std::fs::create_dir_all(&out)?;
    let start = Instant::now();
    let outcome = match suite {
        "frame" => frame(&cfg, &out),
        "covariance" => covariance(&cfg, &out),
        "aldiag" => aldiag(&cfg, &out),
        "algebra" => algebra(&cfg),
        "invert" => invert(&cfg, &out),
        "hormander" => hormander(&cfg, &out),
        "molecules" => molecules(&cfg, &out),
        "sinebasis" => sinebasis(&cfg, &out),
        "appendix" => appendix(&cfg, &out),
        other => Err(Error::InvalidParameter(format!(
            "unknown suite {other:?}; expected one of {SUITES:?}"
        ))),
    }?;
    let report = Report {
        suite_name: suite.into(),
        config_echo: cfg,
        metrics: outcome.metrics.clone(),
        pass: outcome.pass(),
        wall_time_ms: start.elapsed().as_millis() as u64,
    };
    report.write(&out)?;
    Ok((report, outcome.failures))
}

/// Seeded Gaussian probe signal, one fresh draw per call.
fn probe(rng: &mut SeededRng, n: usize) -> Signal {
    Signal::from_fn(n, |_| rng.complex_gaussian()).expect("odd n checked by config")
}

/// Metric-key suffix for a decay rate: `2.0 -> "2"`, `2.5 -> "2.5"`.
fn s_key(s: f64) -> String {
    if s.fract() == 0.0 {
        format!("{}", s as i64)
    } else {
        format!("{s}")
    }
}

/// Write a lattice sequence (real part) as `x,xi,value` rows.
fn write_lattice_csv(path: &Path, seq: &LatticeSeq) -> Result<()> {
    let lat = seq.lattice();
    write_csv(
        path.to_str().expect("utf-8 path"),
        "x,xi,value",
        (0..lat.len()).map(|idx| {
            let (x, xi) = lat.point(idx);
            format!("{x},{xi},{}", fmt_f64(seq.values()[idx].re))
        }),
    )
}

// ---------------------------------------------------------------------------
// frame
// ---------------------------------------------------------------------------

fn frame(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let mut o = Outcome::new();
    let lat = cfg.lattice()?;
    let g = cfg.window()?;
    let raw = GaborSystem::from_window(g, lat.clone())?;

    let eig = nalgebra::SymmetricEigen::new(raw.frame_operator().clone());
    let upper = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let lower = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    o.set("frameUpperBound", upper);
    o.set("frameLowerBound", lower);

    let sys = match tfpsi_core::phase::tighten(raw.window(), lat) {
        Ok(sys) => sys,
        Err(Error::NotAFrame(_)) => {
            o.check_flag("isFrame", false);
            return Ok(o);
        }
        Err(e) => return Err(e),
    };
    o.check_flag("isFrame", true);
    o.set("tightWindowNormSq", sys.window().norm_sq());

    let ident = OperatorMatrix::identity(sys.n())?;
    let tight_op = OperatorMatrix::new(sys.frame_operator().clone())?;
    o.check_le(
        "tightDeviation",
        tight_op.max_abs_diff(&ident),
        cfg.suite.parseval_tol,
    );

    let mut rng = SeededRng::new(cfg.seed);
    let mut parseval = 0.0f64;
    let mut recon = 0.0f64;
    for _ in 0..cfg.suite.probes {
        let f = probe(&mut rng, cfg.n);
        let coeffs = analysis(&sys, &f)?;
        let energy: f64 = coeffs.values().iter().map(|c| c.norm_sqr()).sum();
        parseval = parseval.max((energy - f.norm_sq()).abs() / f.norm_sq());
        let back = synthesis(&sys, &coeffs)?;
        let err_sq: f64 = (0..cfg.n)
            .map(|i| (back.values()[i] - f.values()[i]).norm_sqr())
            .sum();
        recon = recon.max((err_sq / f.norm_sq()).sqrt());
    }
    o.check_le("parsevalMaxRelResidual", parseval, cfg.suite.parseval_tol);
    o.check_le("reconstructionMaxRelErr", recon, cfg.suite.parseval_tol);

    crate::io::save_signal(sys.window(), out.join("tight_window.csv").to_str().unwrap())?;
    Ok(o)
}

// ---------------------------------------------------------------------------
// covariance
// ---------------------------------------------------------------------------

fn covariance(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let mut o = Outcome::new();
    let g = cfg.window()?;
    let sigma = cfg.symbol()?;
    crate::io::save_symbol(&sigma, out.join("symbol.csv").to_str().unwrap())?;

    let cov = covariance_check(&sigma, &g)?;
    o.check_le("covarianceMaxRelErr", cov.max_rel_err, cfg.suite.covariance_tol);
    o.check_le(
        "covarianceReadBackMaxRelErr",
        cov.read_back_max_rel_err,
        cfg.suite.covariance_tol,
    );
    o.set("covarianceConstant", cov.constant);
    o.set("covariancePairs", cov.pairs as f64);

    let magic = magic_formula_check(&g)?;
    o.check_le("magicMaxRelErr", magic.max_rel_err, cfg.suite.magic_tol);
    o.set("magicScale", magic.scale);
    Ok(o)
}

// ---------------------------------------------------------------------------
// aldiag
// ---------------------------------------------------------------------------

fn aldiag(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let mut o = Outcome::new();
    let sys = cfg.system()?;
    let lat = sys.lattice().clone();
    let spec = cfg.algebra_spec(&lat)?;
    let n = cfg.n;

    let phi = wigner(sys.window(), sys.window())?;
    let count = cfg.family_size();

    let mut diagram = 0.0f64;
    let mut element_excess = 0.0f64;
    let mut element_scale = 0.0f64;
    let mut domination_rel = 0.0f64;
    let mut bound_ratio = 0.0f64;
    let mut c_lower_max = 0.0f64;
    let mut equivalence_ok = true;
    let mut last: Option<(LatticeSeq, Vec<f64>, CDMatrix)> = None;

    for k in 0..count {
        let sigma = cfg.symbol_at(k as u64)?;
        let gm = gabor_matrix(&sigma, &sys)?;
        diagram = diagram.max(gm.diagram_residual());

        // Per-element bound: every matrix element of the quantized symbol
        // against time-frequency shifts of g is controlled by 1/N times the
        // grand symbol at the rotated difference.
        let elem = element_envelope(&sigma, sys.window())?;
        let gs = grand_symbol(&sigma, &phi)?;
        for idx in 0..n * n {
            let nu = PhasePoint {
                x: idx / n,
                xi: idx % n,
            };
            let bound = gs.at(nu.rot_j(n)) / n as f64;
            element_scale = element_scale.max(bound);
            element_excess = element_excess.max(elem.values()[idx].re - bound);
        }

        let env = envelope_h(&gm);
        let big_h = dominating_h(&env, &sys)?;
        let dom = domination_check(&sigma, &sys, &big_h)?;
        domination_rel = domination_rel.max(dom.max_excess / dom.scale.max(1.0));

        let bound_rep = dominating_h_norm_bound(&env, &sys, &spec)?;
        if !bound_rep.ok {
            o.failures.push(format!(
                "dominating envelope norm bound violated for symbol {k}: \
                 |H| = {:.6e} > {:.6e}",
                bound_rep.big_h_amalgam,
                bound_rep.constant * bound_rep.h_norm
            ));
        }
        bound_ratio = bound_ratio.max(
            bound_rep.big_h_amalgam / (bound_rep.constant * bound_rep.h_norm).max(f64::MIN_POSITIVE),
        );

        let eq = norm_equivalence_check(&sigma, &sys, &spec)?;
        equivalence_ok &= eq.upper_ok;
        c_lower_max = c_lower_max.max(eq.c_lower);

        last = Some((env, big_h, gm.matrix().clone()));
    }

    o.check_le("diagramMaxResidual", diagram, cfg.suite.algebra_tol);
    o.set("elementBoundScale", element_scale);
    o.check_le(
        "elementBoundMaxExcess",
        element_excess,
        cfg.suite.element_slack * element_scale.max(1.0),
    );
    o.check_le("dominationMaxRelExcess", domination_rel, cfg.suite.domination_slack);
    // Flat weight at q = 1 attains the bound with equality, so allow the
    // same roundoff slack on the ratio.
    o.check_le(
        "dominatingNormBoundRatio",
        bound_ratio,
        1.0 + cfg.suite.domination_slack,
    );
    o.check_flag("normEquivalenceUpperOk", equivalence_ok);
    o.set("normEquivalenceCLower", c_lower_max);

    // Kernel structure: composition against itself must annihilate the
    // complement of the coefficient range.
    let sigma0 = cfg.symbol_at(0)?;
    let alg = algebra_identity_check(&sigma0, &sigma0, &sys)?;
    o.check_le(
        "kernelComplementResidual",
        alg.complement_residual,
        cfg.suite.complement_tol,
    );

    if let Some((env, big_h, matrix)) = last {
        write_lattice_csv(&out.join("envelope.csv"), &env)?;
        write_csv(
            out.join("dominating_h.csv").to_str().unwrap(),
            "x,xi,value",
            (0..n * n).map(|idx| {
                format!("{},{},{}", idx / n, idx % n, fmt_f64(big_h[idx]))
            }),
        )?;
        crate::io::save_matrix(
            matrix.entries(),
            out.join("gabor_matrix.csv").to_str().unwrap(),
        )?;
    }
    Ok(o)
}

// ---------------------------------------------------------------------------
// algebra
// ---------------------------------------------------------------------------

fn algebra(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut o = Outcome::new();
    let sys = cfg.system()?;
    let lat = sys.lattice().clone();
    let spec = cfg.algebra_spec(&lat)?;
    let y_weight = cfg.weight()?;

    let sigma = cfg.symbol_at(0)?;
    let tau = cfg.symbol_at(1)?;

    let alg = algebra_identity_check(&sigma, &tau, &sys)?;
    o.check_le("productMaxErrOnRange", alg.max_err_on_range, cfg.suite.algebra_tol);
    o.check_le(
        "complementResidual",
        alg.complement_residual,
        cfg.suite.complement_tol,
    );

    for (p, tag) in [
        (SequenceExponent::One, "P1"),
        (SequenceExponent::Two, "P2"),
        (SequenceExponent::Infinity, "PInf"),
    ] {
        let rep = boundedness_check(&sigma, &sys, &spec, &y_weight, p)?;
        o.check_le(
            &format!("boundedWorstQuotient{tag}"),
            rep.worst_quotient,
            1.0 + cfg.suite.boundedness_slack,
        );
        if tag == "P2" {
            o.set("boundedMatrixNorm", rep.matrix_norm);
            o.set("boundedActionConstant", rep.action_constant);
        }
    }

    let gm_s = gabor_matrix(&sigma, &sys)?;
    let gm_t = gabor_matrix(&tau, &sys)?;
    let env = envelope_product_bound(gm_s.matrix(), gm_t.matrix())?;
    o.set("envelopeProductScale", env.scale);
    o.check_le(
        "envelopeProductMaxViolation",
        env.max_violation,
        cfg.suite.submult_slack * env.scale.max(1.0),
    );
    Ok(o)
}

// ---------------------------------------------------------------------------
// invert
// ---------------------------------------------------------------------------

fn invert(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let mut o = Outcome::new();
    let sys = cfg.system()?;
    let lat = sys.lattice().clone();
    let spec = cfg.algebra_spec(&lat)?;
    let sigma = cfg.symbol()?;

    let (tau, rep) = match invert_symbol(&sigma, &sys, cfg.suite.invert_rtol) {
        Ok(pair) => pair,
        Err(Error::NotInvertible { .. }) => {
            o.check_flag("invertible", false);
            return Ok(o);
        }
        Err(e) => return Err(e),
    };
    o.check_flag("invertible", true);
    o.check_le("pinvMatchRel", rep.pinv_match_rel, cfg.suite.pinv_tol);
    o.set("conditionNumber", rep.condition);
    if let Some(fit) = rep.forward_fit {
        o.set("forwardDecayExponent", fit.s_hat);
    }
    if let Some(fit) = rep.inverse_fit {
        o.set("inverseDecayExponent", fit.s_hat);
    }

    // tau quantizes to the actual operator inverse: check on probe signals.
    let op_s = quantize(&sigma);
    let op_t = quantize(&tau);
    let comp = op_t.compose(&op_s)?;
    let mut rng = SeededRng::new(cfg.seed);
    let mut worst = 0.0f64;
    for _ in 0..cfg.suite.probes.max(10) {
        let f = probe(&mut rng, cfg.n);
        let back = comp.apply(&f)?;
        let err_sq: f64 = (0..cfg.n)
            .map(|i| (back.values()[i] - f.values()[i]).norm_sqr())
            .sum();
        worst = worst.max((err_sq / f.norm_sq()).sqrt());
    }
    o.check_le("composeMaxResidual", worst, cfg.suite.invariance_tol);

    let si = spectral_invariance_experiment(&sigma, &sys, &spec, SequenceExponent::Two, &cfg.weight()?)?;
    o.check_le("spectralMaxResidual", si.max_residual, cfg.suite.invariance_tol);
    o.set("inverseClassNorm", si.class_norm);

    let env_f = envelope_h(&gabor_matrix(&sigma, &sys)?);
    let env_i = envelope_h(&gabor_matrix(&tau, &sys)?);
    write_csv(
        out.join("decay.csv").to_str().unwrap(),
        "x,xi,forward,inverse",
        (0..lat.len()).map(|idx| {
            let (x, xi) = lat.point(idx);
            format!(
                "{x},{xi},{},{}",
                fmt_f64(env_f.values()[idx].re),
                fmt_f64(env_i.values()[idx].re)
            )
        }),
    )?;
    Ok(o)
}

// ---------------------------------------------------------------------------
// hormander
// ---------------------------------------------------------------------------

fn hormander(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let mut o = Outcome::new();
    let sys = cfg.system()?;
    let sigma = cfg.symbol()?;

    let band = operator_band_profile(&sigma);
    let beyond = band
        .iter()
        .enumerate()
        .filter(|(d, _)| *d > cfg.suite.band_distance)
        .map(|(_, v)| *v)
        .fold(0.0f64, f64::max);
    o.check_le("bandBeyondMax", beyond, cfg.suite.band_tol);
    o.set("bandDiagonalPeak", band[0]);

    let profile = hormander_profile(&sigma, sys.window(), &cfg.suite.hormander_s_list)?;
    let mut rows = Vec::new();
    for point in &profile {
        o.check_finite(&format!("cS{}", s_key(point.s)), point.c_s);
        let fitted = point.fit.map(|f| f.s_hat).unwrap_or(f64::NAN);
        rows.push(format!(
            "{},{},{}",
            fmt_f64(point.s),
            fmt_f64(point.c_s),
            fmt_f64(fitted)
        ));
    }
    write_csv(
        out.join("hormander.csv").to_str().unwrap(),
        "s,cS,fittedDecayExponent",
        rows,
    )?;
    write_csv(
        out.join("band_profile.csv").to_str().unwrap(),
        "distance,peak",
        band.iter()
            .enumerate()
            .map(|(d, v)| format!("{d},{}", fmt_f64(*v))),
    )?;
    Ok(o)
}

// ---------------------------------------------------------------------------
// molecules
// ---------------------------------------------------------------------------

fn molecules(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let mut o = Outcome::new();
    let sys = cfg.system()?;
    let lat = sys.lattice().clone();
    let spec = cfg.algebra_spec(&lat)?;
    let sigma = cfg.symbol()?;

    let fam_e = make_molecules(&sys, cfg.suite.molecule_jitter, cfg.suite.molecule_s, cfg.seed)?;
    let fam_f = make_molecules(
        &sys,
        cfg.suite.molecule_jitter,
        cfg.suite.molecule_s,
        cfg.seed + 1,
    )?;
    o.check_le("envelopeRescanExcessE", fam_e.verify_envelope(), cfg.suite.molecule_slack);
    o.check_le("envelopeRescanExcessF", fam_f.verify_envelope(), cfg.suite.molecule_slack);

    let rep = molecule_almost_diag(&sigma, &fam_e, &fam_f, &spec)?;
    o.set("moleculeScale", rep.scale);
    o.check_le(
        "moleculeMaxExcess",
        rep.max_excess,
        cfg.suite.molecule_slack * rep.scale.max(1.0),
    );
    o.set("hTildeAlgebraNorm", algebra_norm(&rep.h_tilde, &spec));

    write_lattice_csv(&out.join("molecule_envelope_e.csv"), fam_e.envelope_bound())?;
    write_lattice_csv(&out.join("molecule_envelope_f.csv"), fam_f.envelope_bound())?;
    write_lattice_csv(&out.join("h_tilde.csv"), &rep.h_tilde)?;
    Ok(o)
}

// ---------------------------------------------------------------------------
// sinebasis
// ---------------------------------------------------------------------------

fn sinebasis(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let mut o = Outcome::new();
    let so = &cfg.suite;
    let period = so.sine_alpha * so.sine_k as f64;
    let step = period / so.sine_grid_points as f64;
    let spec = BellSpec::new(so.sine_alpha, so.sine_epsilon, so.sine_smoothness, step)?;

    let basis = local_sine_basis(&spec, so.sine_k, so.sine_l_max)?;
    let mut gram_dev = 0.0f64;
    for i in 0..basis.len() {
        for j in i..basis.len() {
            let ip = basis[i].inner(&basis[j])?;
            let target = if i == j { 1.0 } else { 0.0 };
            gram_dev = gram_dev.max((ip - C64::new(target, 0.0)).norm());
        }
    }
    o.check_le("gramMaxDeviation", gram_dev, so.gram_tol);
    o.set("basisSize", basis.len() as f64);

    let mut split = 0.0f64;
    for (k, l) in [(0usize, 0usize), (1, 2), (2, 5)] {
        split = split.max(exponential_split_check(&spec, k, l)?.max_point_err);
    }
    o.check_le("splitMaxPointErr", split, so.split_tol);

    let sigma = TorusSymbol::time_cosine(period, 1)?;
    let rep = sine_basis_almost_diag(&sigma, &spec, so.sine_k, so.sine_l_max, &so.sine_s_list)?;
    for &(s, c_s) in &rep.c_table {
        o.check_finite(&format!("sineCs{}", s_key(s)), c_s);
    }
    o.check_le("sineMaxAsymmetry", rep.max_asymmetry, so.gram_tol);

    write_csv(
        out.join("sine_cs.csv").to_str().unwrap(),
        "s,cS",
        rep.c_table
            .iter()
            .map(|(s, c)| format!("{},{}", fmt_f64(*s), fmt_f64(*c))),
    )?;
    let b = bell(&spec)?;
    write_csv(
        out.join("bell.csv").to_str().unwrap(),
        "t,value",
        b.samples()
            .iter()
            .enumerate()
            .map(|(i, z)| format!("{},{}", fmt_f64(i as f64 * b.step()), fmt_f64(z.re))),
    )?;
    Ok(o)
}

// ---------------------------------------------------------------------------
// appendix
// ---------------------------------------------------------------------------

fn appendix(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let mut o = Outcome::new();
    let so = &cfg.suite;
    let lat = cfg.lattice()?;

    // Convolution-algebra maximality: the l1 norm is recovered as the sup of
    // the associated nonnegative trigonometric sum.
    let mut rng = SeededRng::new(cfg.seed);
    let start: i64 = -64;
    let coeffs: Vec<C64> = (start..=64)
        .map(|k| rng.unit_phase() * (1.0 + (k * k) as f64).powf(-1.0))
        .collect();
    let l1 = l1_maximality_check(&coeffs, start, so.l1_grid_m)?;
    o.check_le("l1MaximalityRelErr", l1.rel_err, so.l1_tol);
    o.set("l1Norm", l1.l1);
    o.set("l1SupF", l1.sup_f);

    // Fourier-series expansion of lattice-commuting matrices: the diagonal
    // reconstruction must reproduce the matrix.
    let mut rng2 = SeededRng::new(cfg.seed + 1);
    let phases: Vec<C64> = (0..lat.len()).map(|_| rng2.unit_phase()).collect();
    let seq = LatticeSeq::from_fn(lat.clone(), |idx| {
        let (x, xi) = lat.point(idx);
        phases[idx] * per_bracket((x as i64, xi as i64), cfg.n).powf(-3.0)
    });
    let mat = CDMatrix::circulant(&seq);
    let four = tfpsi_core::cdmat::diagonal_fourier_check(&mat, lat.len() * so.fourier_oversample)?;
    o.check_le("fourierDiagonalMaxErr", four.max_err, so.fourier_tol);
    o.set("fourierTSamples", four.t_samples as f64);

    // Root-limit profile of the weight along a lattice ray: must settle
    // below the configured ceiling and decrease at the tail.
    let weight = tfpsi_core::seqalg::WeightSpec::polynomial(so.grs_s)?;
    let profile = grs_profile(&weight, so.grs_lambda, so.grs_n_max);
    let end = *profile.last().expect("profile is nonempty");
    o.check_le("grsProfileEnd", end, so.grs_end);
    let tail_ok = profile
        .iter()
        .rev()
        .take(10)
        .collect::<Vec<_>>()
        .windows(2)
        .all(|w| w[0] <= w[1]);
    o.check_flag("grsTailDecreasing", tail_ok);

    write_csv(
        out.join("grs_profile.csv").to_str().unwrap(),
        "k,value",
        profile
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{},{}", i + 1, fmt_f64(*v))),
    )?;
    Ok(o)
}
