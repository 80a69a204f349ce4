//! wavebranch: streams, dispersion, spectra, expansions and branch
//! continuation for steady water waves with vorticity.

mod config;
mod emit;

use clap::{Args, Parser, Subcommand};
use config::{validate_grid, validate_tolerances, ConfigError, FileConfig};
use std::path::PathBuf;
use std::process::ExitCode;
use wavebranch_core::continuation as cont;
use wavebranch_core::dispersion;
use wavebranch_core::expansion;
use wavebranch_core::frechet;
use wavebranch_core::spectra;
use wavebranch_core::stream;
use wavebranch_core::verify;
use wavebranch_core::vorticity::VorticityModel;
use wavebranch_core::WaveError;

#[derive(Parser)]
#[command(name = "wavebranch", version, about, disable_help_subcommand = true)]
struct Cli {
    /// flat key-value config file; command-line flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// vorticity coefficients, increasing degree: "[c0,c1,...]"
    #[arg(long, global = true, allow_hyphen_values = true)]
    omega: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Uniform stream constants as CSV (columns s,d,R,F,kappa,rho0)
    Stream(StreamArgs),
    /// Dispersion curve σ(τ) as CSV plus a JSON summary
    Dispersion(DispersionArgs),
    /// Interval eigenproblem report
    Spectrum1d(Spectrum1dArgs),
    /// Physical-plane spectrum of a stored wave file
    Spectrum2d(Spectrum2dArgs),
    /// Newton continuation of the small-amplitude branch
    Branch(BranchArgs),
    /// Physical-plane reconstruction of a branch point (or a flat stream)
    Reconstruct(ReconstructArgs),
    /// Small-amplitude expansion coefficients
    Expansion(ExpansionArgs),
    /// Built-in invariant suite over the vorticity matrix
    Verify(VerifyArgs),
}

#[derive(Args)]
struct StreamArgs {
    /// surface shear values (repeatable / comma separated)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    s: Vec<f64>,
    #[arg(long)]
    n_samples: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DispersionArgs {
    #[arg(long)]
    s: Option<f64>,
    /// τ grid upper end (defaults to 2τ* when a root exists, else 5)
    #[arg(long)]
    tau_max: Option<f64>,
    /// τ grid points
    #[arg(long)]
    n: Option<usize>,
    /// CSV destination (stdout when absent)
    #[arg(long)]
    csv: Option<PathBuf>,
    /// JSON summary destination (stdout when absent)
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct Spectrum1dArgs {
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Spectrum2dArgs {
    /// wave file produced by `reconstruct`
    #[arg(long)]
    wave: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BranchArgs {
    /// Bernoulli constant (must lie in (R_c, R_0))
    #[arg(long, allow_hyphen_values = true)]
    r: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Newton step damping
    #[arg(long)]
    damp: Option<f64>,
    /// amplitude increment per step
    #[arg(long)]
    amp_step: Option<f64>,
    #[arg(long)]
    n_q: Option<usize>,
    #[arg(long)]
    n_p: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReconstructArgs {
    /// branch file produced by `branch`
    #[arg(long)]
    branch: Option<PathBuf>,
    /// point index along the branch (defaults to the last)
    #[arg(long)]
    index: Option<usize>,
    /// build the flat domain of a uniform stream instead
    #[arg(long)]
    flat: bool,
    #[arg(long)]
    s: Option<f64>,
    /// truncation length of the flat domain
    #[arg(long)]
    length: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExpansionArgs {
    #[arg(long, allow_hyphen_values = true)]
    r: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    Validation(String),
    Numerical(WaveError),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Validation(e.0)
    }
}

impl From<WaveError> for CliError {
    fn from(e: WaveError) -> Self {
        match e {
            WaveError::InvalidInput { what } => CliError::Validation(what.to_string()),
            other => CliError::Numerical(other),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap usage/help go to stdout with success; argument errors are
            // validation failures
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Numerical(e)) => {
            eprintln!("error: {}: {e}", e.name());
            ExitCode::from(2)
        }
    }
}

fn load_config(cli: &Cli) -> Result<FileConfig, CliError> {
    let cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    validate_tolerances(&cfg)?;
    Ok(cfg)
}

fn model_from(cli: &Cli, cfg: &FileConfig) -> Result<VorticityModel, CliError> {
    let coeffs = match &cli.omega {
        Some(text) => config::parse_list(text)?,
        None => cfg.f64_list("omega")?.unwrap_or_else(|| vec![0.0]),
    };
    Ok(VorticityModel::new(&coeffs)?)
}

fn write_out(path: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn grid_value(
    flag: Option<usize>,
    cfg: &FileConfig,
    key: &str,
    default: usize,
) -> Result<usize, CliError> {
    let v = match flag {
        Some(v) => v,
        None => cfg.usize(key)?.unwrap_or(default),
    };
    validate_grid(key, v)?;
    Ok(v)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = load_config(&cli)?;
    match &cli.command {
        Command::Stream(args) => {
            let model = model_from(&cli, &cfg)?;
            let n_samples = grid_value(args.n_samples, &cfg, "n_samples", 512)?;
            let mut shears = args.s.clone();
            if shears.is_empty() {
                if let Some(s) = cfg.f64("s")? {
                    shears.push(s);
                }
            }
            if shears.is_empty() {
                return Err(CliError::Validation("stream needs at least one --s".to_string()));
            }
            let mut out = String::from("s,d,R,F,kappa,rho0\n");
            for &s in &shears {
                let sol = stream::solve_stream(&model, s, n_samples)?;
                for v in [sol.s(), sol.d(), sol.bernoulli(), sol.froude(), sol.kappa(), sol.rho0()]
                {
                    if !v.is_finite() {
                        return Err(CliError::Numerical(WaveError::InternalInconsistency {
                            what: "non-finite stream quantity",
                        }));
                    }
                }
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    fmt(sol.s()),
                    fmt(sol.d()),
                    fmt(sol.bernoulli()),
                    fmt(sol.froude()),
                    fmt(sol.kappa()),
                    fmt(sol.rho0())
                ));
            }
            write_out(&args.out, &out)
        }
        Command::Dispersion(args) => {
            let model = model_from(&cli, &cfg)?;
            let s = require_f64(args.s, &cfg, "s")?;
            let n = grid_value(args.n, &cfg, "n", 256)?;
            let sol = stream::solve_stream(&model, s, 512)?;
            let star = dispersion::tau_star(&sol)?;
            let tau_max = match args.tau_max.or(cfg.f64("tau_max")?) {
                Some(t) => t,
                None => star.as_ref().map(|t| 2.0 * t.tau).unwrap_or(5.0),
            };
            if !(tau_max > 0.0) {
                return Err(CliError::Validation("tau_max must be positive".to_string()));
            }
            let grid: Vec<f64> = (0..=n).map(|i| tau_max * i as f64 / n as f64).collect();
            let prof = dispersion::profile(&sol, &grid, false)?;
            let mut csv = String::from("tau,sigma\n");
            for (t, sg) in prof.tau_grid.iter().zip(&prof.sigma_values) {
                csv.push_str(&format!("{},{}\n", fmt(*t), fmt(*sg)));
            }
            write_out(&args.csv, &csv)?;
            let mut json = String::from("{");
            match star {
                Some(ts) => {
                    json.push_str(&format!("\"tau_star\":{}", emit::fmt_f64(ts.tau)));
                    json.push_str(&format!(",\"lambda0\":{}", emit::fmt_f64(ts.lambda0)));
                }
                None => json.push_str("\"tau_star\":null,\"lambda0\":null"),
            }
            json.push_str(&format!(",\"sigma0\":{}", emit::fmt_f64(prof.sigma0)));
            json.push_str("}\n");
            write_out(&args.summary, &json)
        }
        Command::Spectrum1d(args) => {
            let model = model_from(&cli, &cfg)?;
            let s = require_f64(args.s, &cfg, "s")?;
            let k = args.k.or(cfg.usize("k")?).unwrap_or(4);
            if k == 0 || k > 64 {
                return Err(CliError::Validation("k must be between 1 and 64".to_string()));
            }
            let n = grid_value(args.n, &cfg, "n", 1024)?;
            let sol = stream::solve_stream(&model, s, 512)?;
            let rep = spectra::interval_spectrum_n(&sol, k, n)?;
            assert_finite(&rep.eigenvalues)?;
            write_out(&args.out, &emit::spectrum_json(&rep, &[]))
        }
        Command::Spectrum2d(args) => {
            let path = args
                .wave
                .clone()
                .or_else(|| cfg.string("wave").map(PathBuf::from))
                .ok_or_else(|| CliError::Validation("spectrum2d needs --wave FILE".to_string()))?;
            let k = args.k.or(cfg.usize("k")?).unwrap_or(4);
            if k == 0 || k > 64 {
                return Err(CliError::Validation("k must be between 1 and 64".to_string()));
            }
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
            let wave = emit::wave_from_json(&text)?;
            let spec = frechet::physical_spectrum(&wave, k)?;
            assert_finite(&spec.report.eigenvalues)?;
            let extra = vec![(
                "truncation_warning",
                if spec.truncation_warning { "true".to_string() } else { "false".to_string() },
            )];
            write_out(&args.out, &emit::spectrum_json(&spec.report, &extra))
        }
        Command::Branch(args) => {
            let model = model_from(&cli, &cfg)?;
            let r = require_f64(args.r, &cfg, "r")?;
            let steps = args.steps.or(cfg.usize("steps")?).unwrap_or(5);
            if steps == 0 || steps > 400 {
                return Err(CliError::Validation("steps must be between 1 and 400".to_string()));
            }
            let damp = args.damp.or(cfg.f64("damp")?).unwrap_or(1.0);
            if !(damp > 0.0 && damp <= 1.0) {
                return Err(CliError::Validation("damp must lie in (0, 1]".to_string()));
            }
            let amp_step = args.amp_step.or(cfg.f64("amp_step")?).unwrap_or(2e-3);
            if !(amp_step > 0.0) {
                return Err(CliError::Validation("amp_step must be positive".to_string()));
            }
            let n_q = grid_value(args.n_q, &cfg, "n_q", 64)?;
            let n_p = grid_value(args.n_p, &cfg, "n_p", 64)?;
            let roots = stream::invert_bernoulli(&model, r)?;
            let s_plus = roots.s_plus.ok_or(WaveError::NoSolution {
                what: "no subcritical stream at this Bernoulli level (R ≥ R_0)",
            })?;
            let sol = stream::solve_stream(&model, s_plus, 512)?;
            let mut branch = cont::branch_start(&sol, n_q, n_p)?;
            cont::branch_extend(&mut branch, amp_step, steps, damp)?;
            write_out(&args.out, &emit::branch_to_json(&branch))
        }
        Command::Reconstruct(args) => {
            let nx = grid_value(args.nx, &cfg, "nx", 128)?;
            let ny = grid_value(args.ny, &cfg, "ny", 128)?;
            if args.flat {
                let model = model_from(&cli, &cfg)?;
                let s = require_f64(args.s, &cfg, "s")?;
                let sol = stream::solve_stream(&model, s, 512)?;
                let nu0 = spectra::interval_spectrum_n(&sol, 1, 512)?.eigenvalues[0];
                let length = match args.length.or(cfg.f64("length")?) {
                    Some(l) if l > 0.0 => l,
                    Some(_) => {
                        return Err(CliError::Validation("length must be positive".to_string()))
                    }
                    None => {
                        if nu0 > 0.0 {
                            (8.0 / nu0.sqrt()).max(10.0)
                        } else {
                            10.0
                        }
                    }
                };
                let wave = frechet::PhysicalWave::uniform(&sol, length, nx, ny);
                write_out(&args.out, &emit::wave_to_json(&wave))
            } else {
                let path = args
                    .branch
                    .clone()
                    .or_else(|| cfg.string("branch").map(PathBuf::from))
                    .ok_or_else(|| {
                        CliError::Validation(
                            "reconstruct needs --branch FILE (or --flat --s S)".to_string(),
                        )
                    })?;
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    CliError::Validation(format!("cannot read {}: {e}", path.display()))
                })?;
                let branch = emit::branch_from_json(&text)?;
                let index = args.index.or(cfg.usize("index")?).unwrap_or(branch.points.len() - 1);
                let point = branch.points.get(index).ok_or_else(|| {
                    CliError::Validation(format!("branch index {index} out of range"))
                })?;
                let wave = cont::reconstruct_physical(&point.field, nx, ny)?;
                write_out(&args.out, &emit::wave_to_json(&wave))
            }
        }
        Command::Expansion(args) => {
            let model = model_from(&cli, &cfg)?;
            let r = require_f64(args.r, &cfg, "r")?;
            let roots = stream::invert_bernoulli(&model, r)?;
            let s_plus = roots.s_plus.ok_or(WaveError::NoSolution {
                what: "no subcritical stream at this Bernoulli level (R ≥ R_0)",
            })?;
            let sol = stream::solve_stream(&model, s_plus, 512)?;
            let e = expansion::expand(&sol)?;
            for v in [e.c1, e.lambda2, e.mu2, e.tau_star] {
                if !v.is_finite() {
                    return Err(CliError::Numerical(WaveError::InternalInconsistency {
                        what: "non-finite expansion output",
                    }));
                }
            }
            let mut json = String::from("{");
            json.push_str(&format!("\"s_plus\":{}", emit::fmt_f64(s_plus)));
            json.push_str(&format!(",\"tau_star\":{}", emit::fmt_f64(e.tau_star)));
            json.push_str(&format!(",\"c1\":{}", emit::fmt_f64(e.c1)));
            json.push_str(&format!(",\"lambda2\":{}", emit::fmt_f64(e.lambda2)));
            json.push_str(&format!(",\"mu2\":{}", emit::fmt_f64(e.mu2)));
            json.push_str(&format!(
                ",\"lambda2_small_tau\":{}",
                emit::fmt_f64(e.lambda2_small_tau)
            ));
            json.push_str(&format!(
                ",\"lambda2_small_tau_corrected\":{}",
                emit::fmt_f64(e.lambda2_small_tau_corrected)
            ));
            json.push_str(&format!(
                ",\"corrector_error_estimate\":{}",
                emit::fmt_f64(e.corrector_error_estimate)
            ));
            json.push_str("}\n");
            write_out(&args.out, &json)
        }
        Command::Verify(args) => {
            let report = verify::run()?;
            let mut out = String::new();
            for e in &report.entries {
                out.push_str(&format!(
                    "{} {} — {}\n",
                    if e.passed { "PASS" } else { "FAIL" },
                    e.name,
                    e.detail
                ));
            }
            out.push_str(&format!(
                "{}: {} checks\n",
                if report.all_passed() { "OK" } else { "VIOLATIONS FOUND" },
                report.entries.len()
            ));
            write_out(&args.out, &out)?;
            if report.all_passed() {
                Ok(())
            } else {
                Err(CliError::Numerical(WaveError::InternalInconsistency {
                    what: "verify suite reported violations",
                }))
            }
        }
    }
}

fn require_f64(flag: Option<f64>, cfg: &FileConfig, key: &str) -> Result<f64, CliError> {
    flag.map(Ok)
        .or_else(|| cfg.f64(key).transpose())
        .transpose()?
        .ok_or_else(|| CliError::Validation(format!("missing required value: --{key}")))
}

fn assert_finite(values: &[f64]) -> Result<(), CliError> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Numerical(WaveError::InternalInconsistency {
            what: "non-finite value in report",
        }));
    }
    Ok(())
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}
