mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kcbo::admissibility::{check_assumptions, suggest_admissible, AdmissibilityReport, Profile};
use kcbo::experiments::{
    run_concentration, run_contrast, run_moment_decay, run_optimize, run_poc_sweep, run_simulate,
    run_stability_sweep, run_wm_mc_rate, ExperimentConfig, ExperimentOutput, Status,
};
use kcbo::{make_objective, KcboError};

const EXIT_FAIL: u8 = 1;
const EXIT_ADMISSIBILITY: u8 = 2;
const EXIT_BLOWUP: u8 = 3;

#[derive(Parser)]
#[command(name = "kcbo", version, about = "Kinetic consensus-based optimization: simulate, diagnose, check")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML experiment configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for series.csv and summary.json (default kcbo-out/<command>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the summary as JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Clone)]
struct PlotArgs {
    /// Directory holding series.csv; plots are written next to it.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Explicit CSV path (default <out>/series.csv).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Print the written file list as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check the parameter conditions and print every constant and clause margin.
    Check(Common),
    /// Run trajectories and record the diagnostic report series.
    Simulate(Common),
    /// Centered-moment decay rates against their predicted values.
    Decay(Common),
    /// Propagation-of-chaos exponent from a J sweep.
    Poc(Common),
    /// Stability control run and remainder extrapolation.
    Stability(Common),
    /// Monte-Carlo rate of the weighted mean.
    WmRate(Common),
    /// Shifted versus unshifted Lyapunov functionals.
    Contrast(Common),
    /// Tail frequency of the weighted Lyapunov supremum.
    Concentration(Common),
    /// Optimization benchmark on the configured objective.
    Optimize(Common),
    /// Render series.csv columns as SVG line plots.
    Plot(PlotArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}

fn error_code(e: &KcboError) -> u8 {
    match e {
        KcboError::Admissibility(_) | KcboError::NotFound { .. } => EXIT_ADMISSIBILITY,
        KcboError::Blowup { .. } | KcboError::BlowupDominated { .. } => EXIT_BLOWUP,
        _ => EXIT_FAIL,
    }
}

fn load_config(common: &Common) -> kcbo::Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(common: &Common, name: &str) -> PathBuf {
    common.out.clone().unwrap_or_else(|| Path::new("kcbo-out").join(name))
}

fn run(command: Command) -> kcbo::Result<u8> {
    type Runner = fn(&ExperimentConfig) -> kcbo::Result<ExperimentOutput>;
    let (name, common, runner): (&str, Common, Runner) = match command {
        Command::Check(c) => return run_check(&c),
        Command::Plot(p) => return run_plot(&p),
        Command::Simulate(c) => ("simulate", c, run_simulate),
        Command::Decay(c) => ("decay", c, run_moment_decay),
        Command::Poc(c) => ("poc", c, run_poc_sweep),
        Command::Stability(c) => ("stability", c, run_stability_sweep),
        Command::WmRate(c) => ("wm-rate", c, run_wm_mc_rate),
        Command::Contrast(c) => ("contrast", c, run_contrast),
        Command::Concentration(c) => ("concentration", c, run_concentration),
        Command::Optimize(c) => ("optimize", c, run_optimize),
    };
    let cfg = load_config(&common)?;
    let output = runner(&cfg)?;
    let dir = out_dir(&common, name);
    output.write(&dir)?;
    let summary = &output.summary;
    if common.json {
        println!("{}", serde_json::to_string_pretty(summary)?);
    } else {
        println!("{name}: wrote {}", dir.display());
        println!(
            "replicas: {} requested, {} completed, {} excluded",
            summary.replicas.requested, summary.replicas.completed, summary.replicas.excluded
        );
        for v in &summary.verdicts {
            println!("{:<12} {:<24} {}", status_label(v.status), v.name, v.detail);
        }
    }
    Ok(if summary.replicas.blowup_dominated() {
        EXIT_BLOWUP
    } else if summary.passed() {
        0
    } else {
        EXIT_FAIL
    })
}

fn status_label(status: Status) -> &'static str {
    match status {
        Status::Pass => "PASS",
        Status::PassTrivial => "PASS_TRIVIAL",
        Status::Fail => "FAIL",
        Status::Diagnostic => "DIAGNOSTIC",
    }
}

/// Every profile the configured experiments rely on.
fn profiles(cfg: &ExperimentConfig) -> Vec<Profile> {
    let mut out: Vec<Profile> = cfg.orders().into_iter().map(Profile::CenteredDecay).collect();
    out.push(Profile::PoC(cfg.poc.r));
    out.push(Profile::Stability(cfg.stability.q));
    out
}

fn run_check(common: &Common) -> kcbo::Result<u8> {
    let cfg = load_config(common)?;
    let objective = make_objective(&cfg.objective, cfg.dim)?;
    let params = match cfg.params {
        Some(p) => p,
        None => match suggest_admissible(&objective, &cfg.orders(), cfg.search.budget, &cfg.search_options()) {
            Ok((p, _)) => p,
            Err(KcboError::NotFound { best }) => {
                eprintln!("no admissible parameter set found within the search budget");
                if let Some(best) = best {
                    eprintln!("closest candidate:\n{}", best.to_text());
                }
                return Ok(EXIT_ADMISSIBILITY);
            }
            Err(e) => return Err(e),
        },
    };
    let reports: Vec<AdmissibilityReport> =
        profiles(&cfg).into_iter().map(|p| check_assumptions(&params, &objective, p)).collect();
    if let Some(dir) = &common.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&reports)?)?;
    }
    if common.json {
        println!("{}", serde_json::to_string_pretty(&reports)?);
    } else {
        for r in &reports {
            println!("{}", r.to_text());
        }
    }
    Ok(if reports.iter().all(AdmissibilityReport::passed) {
        0
    } else {
        EXIT_ADMISSIBILITY
    })
}

fn run_plot(args: &PlotArgs) -> kcbo::Result<u8> {
    let input = args.input.clone().unwrap_or_else(|| args.out.join("series.csv"));
    let written = plot::plot_series(&input, &args.out)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&written)?);
    } else {
        for path in &written {
            println!("{}", path.display());
        }
    }
    Ok(0)
}
