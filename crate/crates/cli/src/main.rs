//! Command-line driver: experiment configs in, CSV/JSON artifacts out.
//!
//! Exit codes: 0 success, 1 validation failure or runtime error, 2 bad
//! usage (malformed config, out-of-domain parameters, unknown flags).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use exclusion_core::harness::{self, Mode};
use exclusion_core::kernel::JumpKernel;
use exclusion_core::pde::{regime_for_kind, RegimeKind};
use exclusion_core::profile::Profile;
use exclusion_core::stationary::stationary_profile;
use exclusion_core::{Error, ReservoirVariant};

#[derive(Parser)]
#[command(
    name = "exclusion",
    about = "Exclusion process with long jumps: simulation, hydrodynamic PDEs, validation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured seed ensemble and write ensemble.csv.
    Simulate(ConfigArgs),
    /// Solve the matching hydrodynamic PDE and write pde.csv.
    Pde(ConfigArgs),
    /// Evaluate a stationary profile and write it as CSV.
    Stationary(StationaryArgs),
    /// Run ensemble and PDE, compare, and grade against tolerances.
    Validate(ValidateArgs),
    /// Classify the (gamma, theta) grid and write the regime map.
    Sweep(SweepArgs),
    /// Print jump-kernel constants for one gamma as JSON.
    KernelInfo(KernelInfoArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment configuration file (JSON).
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override the configured L1 tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Args)]
struct StationaryArgs {
    /// Regime label: reaction_only, reaction_diffusion_dirichlet,
    /// heat_dirichlet, heat_robin, or heat_neumann.
    #[arg(long)]
    regime: String,
    #[arg(long)]
    gamma: f64,
    /// Left reservoir density.
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    /// Right reservoir density.
    #[arg(long, default_value_t = 0.8)]
    beta: f64,
    /// Reservoir strength kappa.
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    /// Reservoir variant: extended, site_coupled, or boundary_only.
    #[arg(long, default_value = "extended")]
    variant: String,
    /// Number of grid cells.
    #[arg(long, default_value_t = 200)]
    cells: usize,
    /// Initial density used by the conserved-mean (Neumann) profile.
    #[arg(long, default_value_t = 0.5)]
    mean: f64,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Inclusive gamma grid start:end:step, for example 2.2:4.0:0.2.
    #[arg(long, value_name = "A:B:S", allow_hyphen_values = true)]
    gamma_range: String,
    /// Inclusive theta grid start:end:step.
    #[arg(long, value_name = "A:B:S", allow_hyphen_values = true)]
    theta_range: String,
    #[arg(long, default_value = "extended")]
    variant: String,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct KernelInfoArgs {
    #[arg(long)]
    gamma: f64,
    /// Sites x at which to report the reservoir tail mass r(x).
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
    tails: Vec<usize>,
}

fn parse_variant(s: &str) -> Result<ReservoirVariant, Error> {
    match s {
        "extended" => Ok(ReservoirVariant::Extended),
        "site_coupled" => Ok(ReservoirVariant::SiteCoupled),
        "boundary_only" => Ok(ReservoirVariant::BoundaryOnly),
        other => Err(Error::config(format!(
            "unknown variant {other:?}; expected extended, site_coupled, or boundary_only"
        ))),
    }
}

/// Parse an inclusive "start:end:step" grid.
fn parse_range(s: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::config(format!(
            "range {s:?} must have the form start:end:step"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .map_err(|e| Error::config(format!("range {s:?}: {e}")))
        })
        .collect::<Result<_, _>>()?;
    let (a, b, step) = (nums[0], nums[1], nums[2]);
    if !a.is_finite() || !b.is_finite() || !(step > 0.0) || b < a {
        return Err(Error::config(format!(
            "range {s:?} needs finite bounds, end >= start, and a positive step"
        )));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| a + i as f64 * step).collect())
}

/// Write to stdout, treating a closed pipe (`exclusion ... | head`) as a
/// normal early exit instead of a panic.
fn print_stdout(text: &str) -> Result<(), Error> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(Error::from(e)),
    }
}

fn write_or_print(path: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => {
            if let Some(parent) = p.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(p, text)?;
            Ok(())
        }
        None => print_stdout(text),
    }
}

fn execute_and_report(cfg: &harness::ExperimentConfig) -> Result<bool, Error> {
    let outcome = harness::execute(cfg)?;
    for p in &outcome.written {
        eprintln!("wrote {}", p.display());
    }
    if let Some(report) = &outcome.report {
        for row in &report.times {
            eprintln!(
                "t = {}: L1 = {}, Linf = {}, max stderr = {}",
                row.t, row.l1, row.linf, row.max_stderr
            );
        }
        for failure in &report.failures {
            eprintln!("FAIL {failure}");
        }
        eprintln!(
            "validation: {}",
            if report.passed { "PASS" } else { "FAIL" }
        );
    }
    Ok(outcome.passed)
}

fn run_config_mode(path: &PathBuf, mode: Mode) -> Result<bool, Error> {
    let mut cfg = harness::parse_config(path)?;
    cfg.mode = mode;
    execute_and_report(&cfg)
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Simulate(args) => run_config_mode(&args.config, Mode::Simulate),
        Command::Pde(args) => run_config_mode(&args.config, Mode::Pde),
        Command::Validate(args) => {
            let mut cfg = harness::parse_config(&args.config)?;
            cfg.mode = Mode::Validate;
            if let Some(tol) = args.tolerance {
                cfg.tolerances.l1 = tol;
                cfg.validate()?;
            }
            execute_and_report(&cfg)
        }
        Command::Stationary(args) => {
            let kind = RegimeKind::from_label(&args.regime).ok_or_else(|| {
                Error::config(format!(
                    "unknown regime {:?}; expected one of {}",
                    args.regime,
                    RegimeKind::all()
                        .iter()
                        .map(|k| k.label())
                        .collect::<Vec<_>>()
                        .join(", ")
                ))
            })?;
            let variant = parse_variant(&args.variant)?;
            let kernel = JumpKernel::new(args.gamma)?;
            let regime = regime_for_kind(variant, kind, &kernel, args.kappa);
            let g = Profile::constant(args.cells.max(1), args.mean);
            let sp = stationary_profile(&regime, args.alpha, args.beta, Some(&g), args.cells)?;
            let mut text = String::from("q,rho_bar\n");
            for (j, &v) in sp.profile.values().iter().enumerate() {
                text.push_str(&format!("{},{v}\n", sp.profile.cell_center(j)));
            }
            write_or_print(&args.output, &text)?;
            eprintln!(
                "regime {} ({}), closed form: {}",
                regime.kind.label(),
                args.variant,
                sp.closed_form.label()
            );
            Ok(true)
        }
        Command::Sweep(args) => {
            let gammas = parse_range(&args.gamma_range)?;
            let thetas = parse_range(&args.theta_range)?;
            let variant = parse_variant(&args.variant)?;
            let rows = harness::phase_sweep(&gammas, &thetas, variant, args.kappa)?;
            let mut text =
                String::from("gamma,theta,regime,sigma_hat,kappa_hat,m_hat,theta_exponent\n");
            for r in &rows {
                text.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    r.gamma,
                    r.theta,
                    r.regime.label(),
                    r.sigma_hat,
                    r.kappa_hat,
                    r.m_hat,
                    r.time_scale_exponent
                ));
            }
            write_or_print(&args.output, &text)?;
            Ok(true)
        }
        Command::KernelInfo(args) => {
            let kernel = JumpKernel::new(args.gamma)?;
            let tails: serde_json::Map<String, serde_json::Value> = args
                .tails
                .iter()
                .map(|&x| {
                    (
                        x.to_string(),
                        serde_json::json!(kernel.mass_ge(x.max(1))),
                    )
                })
                .collect();
            let info = serde_json::json!({
                "gamma": kernel.gamma(),
                "normalization": kernel.normalization(),
                "sigma_sq": kernel.variance(),
                "mean_m": kernel.mean_m(),
                "tail_mass": tails,
            });
            let mut text = serde_json::to_string_pretty(&info).expect("static shape");
            text.push('\n');
            print_stdout(&text)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
