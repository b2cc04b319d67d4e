mod commands;
mod input;
mod output;

use clap::{Args, Parser, Subcommand};
use mexp::lattice::DensityMode;
use output::{Failure, Run};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mexp", version = mexp::VERSION, about = "Exponential Riesz bases and biorthogonal systems on unions of intervals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct Common {
    /// Spectrum JSON (inline or a file path): `{"intervals": [[a, b], ...]}` or `[[a, b], ...]`.
    #[arg(long)]
    pub spectrum: Option<String>,
    /// Frequency file: a FrequencySet JSON or an array of reals / `[re, im]` pairs.
    #[arg(long)]
    pub freqs: Option<PathBuf>,
    /// Frequencies are generated with `|γ| ≤ trunc`.
    #[arg(long, default_value_t = 200)]
    pub trunc: usize,
    #[arg(long, default_value = "mexp-out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub tol: Tolerances,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct Tolerances {
    #[arg(long, default_value_t = 1e-8)]
    pub tol_defect: f64,
    /// Vanishing on the frequency set, relative to the probe-grid scale.
    #[arg(long, default_value_t = 1e-6)]
    pub tol_vanish: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_forms: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_cofactor: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol_proportional: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol_s: f64,
    #[arg(long, default_value_t = 0.1)]
    pub tol_residual: f64,
    #[arg(long, default_value_t = 0.1)]
    pub tol_jitter: f64,
    #[arg(long, default_value_t = 0.05)]
    pub tol_density: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Measure, gaps, glued form and reduction order of a spectrum.
    Spectrum {
        #[command(flatten)]
        common: Common,
    },
    /// Construct the Riesz basis and its generating function.
    Basis {
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate the generating function.
    GenfunEval {
        #[command(flatten)]
        common: Common,
        /// Evaluation point `re,im` (repeatable); random strip points otherwise.
        #[arg(long = "z", allow_hyphen_values = true)]
        points: Vec<String>,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Strip comparability, exponential type and derivatives at zeros.
    GenfunCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 100.0)]
        y_max: f64,
    },
    /// Riesz bounds of centered Gram sections.
    GramBounds {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "50,100,200")]
        windows: Vec<usize>,
    },
    /// Dual (biorthogonal) system of a centered section.
    Dual {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 120)]
        window: usize,
    },
    /// Determinant-formula biorthogonal element and the S trace.
    Biorth {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 120)]
        window: usize,
        /// Pole `re,im`; defaults to the non-anchor point nearest the origin.
        #[arg(long, allow_hyphen_values = true)]
        pole: Option<String>,
    },
    /// Run every check and exit 4 on the first failed invariant.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 120)]
        window: usize,
    },
    /// Counting-density estimates.
    Density {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "50,100,200,500")]
        radius: Vec<f64>,
        #[arg(long, default_value = "disk")]
        mode: DensityMode,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Spectrum { common }
            | Command::Basis { common }
            | Command::GenfunEval { common, .. }
            | Command::GenfunCheck { common, .. }
            | Command::GramBounds { common, .. }
            | Command::Dual { common, .. }
            | Command::Biorth { common, .. }
            | Command::Verify { common, .. }
            | Command::Density { common, .. } => common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum { .. } => "spectrum",
            Command::Basis { .. } => "basis",
            Command::GenfunEval { .. } => "genfun-eval",
            Command::GenfunCheck { .. } => "genfun-check",
            Command::GramBounds { .. } => "gram-bounds",
            Command::Dual { .. } => "dual",
            Command::Biorth { .. } => "biorth",
            Command::Verify { .. } => "verify",
            Command::Density { .. } => "density",
        }
    }

    fn extra(&self) -> serde_json::Value {
        use serde_json::json;
        match self {
            Command::GenfunEval { points, count, .. } => json!({ "z": points, "count": count }),
            Command::GenfunCheck { samples, y_max, .. } => json!({ "samples": samples, "y_max": y_max }),
            Command::GramBounds { windows, .. } => json!({ "windows": windows }),
            Command::Dual { window, .. } | Command::Verify { window, .. } => json!({ "window": window }),
            Command::Biorth { window, pole, .. } => json!({ "window": window, "pole": pole }),
            Command::Density { radius, mode, .. } => json!({ "radius": radius, "mode": mode }),
            _ => json!({}),
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Some(raw) = std::env::var_os("MEXP_THREADS") else { return Ok(()) };
    let n: usize = raw
        .to_str()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Parse(format!("MEXP_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Other(e.to_string()))
}

fn dispatch(cmd: &Command, run: &mut Run) -> Result<(), Failure> {
    configure_threads()?;
    match cmd {
        Command::Spectrum { common } => commands::spectrum(common, run),
        Command::Basis { common } => commands::basis(common, run),
        Command::GenfunEval { common, points, count } => commands::genfun_eval(common, run, points, *count),
        Command::GenfunCheck { common, samples, y_max } => commands::genfun_check(common, run, *samples, *y_max),
        Command::GramBounds { common, windows } => commands::gram_bounds(common, run, windows),
        Command::Dual { common, window } => commands::dual(common, run, *window),
        Command::Biorth { common, window, pole } => commands::biorth(common, run, *window, pole.as_deref()),
        Command::Verify { common, window } => commands::verify(common, run, *window),
        Command::Density { common, radius, mode } => commands::density(common, run, radius, *mode),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = cli.command;
    let common = cmd.common().clone();
    let mut run = match Run::create(&common.out) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: cannot create output directory {}: {e}", common.out.display());
            return ExitCode::from(1);
        }
    };
    let outcome = if common.trunc < 50 {
        Err(Failure::Parse(format!("--trunc must be at least 50, got {}", common.trunc)))
    } else {
        dispatch(&cmd, &mut run)
    };
    let code = outcome.as_ref().map_or_else(Failure::code, |_| 0);
    if let Err(f) = &outcome {
        eprintln!("error: {f}");
    }
    if let Err(e) = run.write_manifest(cmd.name(), &common, cmd.extra(), outcome.as_ref().err()) {
        eprintln!("error: cannot write manifest: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}
