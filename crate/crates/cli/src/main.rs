//! `tfpsi` — experiment runner for the finite time-frequency laboratory.
//!
//! Usage: `tfpsi <suite> [--config file.json] [--n 33 --alpha 3 --beta 3
//! --seed 7 --out dir] [suite flags]`.  Every run writes `report.json` (and
//! CSV artifacts) into the output directory.
//!
//! Exit codes: `0` — suite ran and passed; `2` — suite ran but a tolerance
//! was violated (the report records `pass: false` and stderr names the
//! offending metrics); `1` — the run could not start (bad flag, malformed
//! config or data file, structural errors such as an even dimension).
//!
//! `TFPSI_THREADS` caps the worker-thread count; results are byte-identical
//! across thread counts.

use clap::{Args, Parser, Subcommand};
use tfpsi_cli::config::{ExperimentConfig, SymbolPreset, WindowKind};
use tfpsi_cli::suites;
use tfpsi_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "tfpsi",
    version,
    about = "Numerical experiments with pseudodifferential operators on cyclic groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration file (defaults < file < flags).
    #[arg(long)]
    config: Option<String>,
    /// Ambient dimension (odd).
    #[arg(long)]
    n: Option<usize>,
    /// Lattice step in time.
    #[arg(long)]
    alpha: Option<usize>,
    /// Lattice step in frequency.
    #[arg(long)]
    beta: Option<usize>,
    /// Master seed for all randomness in the run.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for report.json and CSV artifacts.
    #[arg(long, value_name = "DIR")]
    out: Option<String>,
    /// Window kind: periodizedGaussian or delta.
    #[arg(long)]
    window: Option<String>,
    /// Load the window from a .csv or .bin signal file.
    #[arg(long, value_name = "PATH")]
    window_file: Option<String>,
    /// Symbol preset: constant, bump, trigPoly, randomBandlimited, rough.
    #[arg(long)]
    symbol: Option<String>,
    /// Load the symbol from a .csv or .bin symbol file.
    #[arg(long, value_name = "PATH")]
    symbol_file: Option<String>,
    /// Bump amplitude (with --symbol bump).
    #[arg(long)]
    amplitude: Option<f64>,
    /// Constant value (with --symbol constant).
    #[arg(long)]
    value: Option<f64>,
    /// Trigonometric degree (with --symbol trigPoly).
    #[arg(long)]
    degree: Option<usize>,
    /// Fourier-ball radius (with --symbol randomBandlimited).
    #[arg(long)]
    bandwidth: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tighten the window and verify the Parseval identity on probes.
    Frame(RunArgs),
    /// Symplectic covariance of matrix elements and the spreading identity.
    Covariance(RunArgs),
    /// Almost-diagonalization: element bounds, dominating envelope, norms.
    Aldiag(RunArgs),
    /// Matrix algebra: composition identity and weighted boundedness.
    Algebra(RunArgs),
    /// Symbol inversion, pseudoinverse cross-check, spectral invariance.
    Invert(RunArgs),
    /// Off-diagonal decay profile over a range of polynomial rates.
    Hormander(RunArgs),
    /// Jittered molecule families and their almost-diagonalization.
    Molecules(RunArgs),
    /// Local sine basis: orthonormality, splitting, decay constants.
    Sinebasis(RunArgs),
    /// Side checks: l1 maximality, Fourier diagonals, weight root limits.
    Appendix(RunArgs),
}

impl Cmd {
    fn split(&self) -> (&'static str, &RunArgs) {
        match self {
            Cmd::Frame(a) => ("frame", a),
            Cmd::Covariance(a) => ("covariance", a),
            Cmd::Aldiag(a) => ("aldiag", a),
            Cmd::Algebra(a) => ("algebra", a),
            Cmd::Invert(a) => ("invert", a),
            Cmd::Hormander(a) => ("hormander", a),
            Cmd::Molecules(a) => ("molecules", a),
            Cmd::Sinebasis(a) => ("sinebasis", a),
            Cmd::Appendix(a) => ("appendix", a),
        }
    }
}

fn resolve_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(alpha) = args.alpha {
        cfg.alpha = alpha;
    }
    if let Some(beta) = args.beta {
        cfg.beta = beta;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    if let Some(window) = &args.window {
        cfg.window_kind = match window.as_str() {
            "periodizedGaussian" => WindowKind::PeriodizedGaussian,
            "delta" => WindowKind::Delta,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "--window: unknown kind {other:?} (expected periodizedGaussian \
                     or delta; use --window-file to load one)"
                )))
            }
        };
    }
    if let Some(path) = &args.window_file {
        cfg.window_kind = WindowKind::CustomFile { path: path.clone() };
    }
    if let Some(symbol) = &args.symbol {
        cfg.symbol_preset = Some(match symbol.as_str() {
            "constant" => SymbolPreset::Constant {
                value: args.value.unwrap_or(1.0),
            },
            "bump" => SymbolPreset::Bump {
                amplitude: args.amplitude.unwrap_or(0.3),
            },
            "trigPoly" => SymbolPreset::TrigPoly {
                degree: args.degree.unwrap_or(2),
                seed: None,
            },
            "randomBandlimited" => SymbolPreset::RandomBandlimited {
                bandwidth: args.bandwidth,
                seed: None,
            },
            "rough" => SymbolPreset::Rough { seed: None },
            other => {
                return Err(Error::InvalidParameter(format!(
                    "--symbol: unknown preset {other:?} (expected constant, bump, \
                     trigPoly, randomBandlimited, or rough; use --symbol-file to \
                     load one)"
                )))
            }
        });
    }
    if let Some(path) = &args.symbol_file {
        cfg.symbol_preset = Some(SymbolPreset::FromFile { path: path.clone() });
    }
    if cfg.n % 2 == 0 || cfg.n == 0 {
        return Err(Error::InvalidParameter(format!(
            "n: must be odd and positive, got {}",
            cfg.n
        )));
    }
    Ok(cfg)
}

/// Apply the `TFPSI_THREADS` cap before any parallel work starts.
fn configure_threads() -> Result<()> {
    if let Ok(raw) = std::env::var("TFPSI_THREADS") {
        let threads: usize = raw.parse().map_err(|_| {
            Error::InvalidParameter(format!(
                "TFPSI_THREADS: expected a positive integer, got {raw:?}"
            ))
        })?;
        if threads == 0 {
            return Err(Error::InvalidParameter(
                "TFPSI_THREADS: expected a positive integer, got 0".into(),
            ));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidParameter(format!("TFPSI_THREADS: {e}")))?;
    }
    Ok(())
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage problems (including --help/--version requests) never
            // reach a suite; report them on clap's channel and exit 1 for
            // true errors, 0 for help output.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let (suite, args) = cli.command.split();
    let run = configure_threads()
        .and_then(|()| resolve_config(args))
        .and_then(|cfg| suites::execute(suite, cfg));
    match run {
        Ok((report, failures)) => {
            if report.pass {
                println!(
                    "{suite}: pass ({} metrics, {} ms) -> {}/report.json",
                    report.metrics.len(),
                    report.wall_time_ms,
                    report.config_echo.out_dir
                );
            } else {
                eprintln!("{suite}: FAIL");
                for f in &failures {
                    eprintln!("  {f}");
                }
                std::process::exit(2);
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
