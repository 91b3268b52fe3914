use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use noiseprobe::experiment::{
    self, synthetic, ExperimentConfig, RunOptions, BREAKDOWN_CSV, FEATURE_SHIFT_CSV, PERFORMANCE_CSV, REPORTS_DIR,
};

/// Audits how environmental noise affects speech classifiers.
#[derive(Parser)]
#[command(name = "noiseprobe", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a configuration and everything it points at.
    Validate(GridArgs),
    /// Write a synthetic two-class corpus (and optionally a noise bank).
    SynthCorpus {
        #[arg(long)]
        out: PathBuf,
        /// Clips per class.
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        seed: u64,
        /// Also write the six-subcategory synthetic noise bank here.
        #[arg(long)]
        noise_bank: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        exemplars: usize,
    },
    /// Run the experiment grid.
    Run {
        #[command(flatten)]
        grid: GridArgs,
        /// Worker threads; overrides the config.
        #[arg(long)]
        jobs: Option<usize>,
        /// Keep completed cells from an earlier run.
        #[arg(long)]
        resume: bool,
    },
    /// Write reports from a finished run.
    Report {
        #[command(subcommand)]
        kind: ReportKind,
    },
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    config: PathBuf,
    /// Restrict to a subcategory, feature set or model (repeatable).
    #[arg(long)]
    only: Vec<String>,
    /// Comma-separated seeds; overrides the config.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
}

#[derive(Args)]
struct ReportSource {
    /// Take the results directory from this config.
    #[arg(long, conflicts_with = "results")]
    config: Option<PathBuf>,
    /// Results directory of a run.
    #[arg(long)]
    results: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ReportKind {
    /// Share of features significantly shifted by each noise.
    Features(ReportSource),
    /// Noise-versus-clean classification performance.
    Performance(ReportSource),
}

fn load_grid(args: &GridArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    experiment::restrict(&mut cfg, &args.only)?;
    if let Some(seeds) = &args.seeds {
        cfg.evaluation.seeds = seeds.clone();
    }
    Ok(cfg)
}

fn results_dir(src: &ReportSource) -> Result<PathBuf> {
    match (&src.config, &src.results) {
        (_, Some(r)) => Ok(r.clone()),
        (Some(c), None) => Ok(ExperimentConfig::load(c)?.output.dir),
        (None, None) => bail!("pass --config or --results"),
    }
}

fn validate(args: &GridArgs) -> Result<ExitCode> {
    let cfg = load_grid(args)?;
    let report = experiment::validate(&cfg);
    if report.is_ok() {
        println!("ok, 0 violations ({} clips, {} cells)", report.clips, report.cells);
        return Ok(ExitCode::SUCCESS);
    }
    println!("{} violation(s):", report.violations.len());
    for v in &report.violations {
        println!("  - {v}");
    }
    Ok(ExitCode::from(1))
}

fn run(grid: &GridArgs, jobs: Option<usize>, resume: bool) -> Result<ExitCode> {
    let mut cfg = load_grid(grid)?;
    if let Some(j) = jobs {
        cfg.output.jobs = j;
    }
    let report = experiment::validate(&cfg);
    if !report.is_ok() {
        eprintln!("{} violation(s):", report.violations.len());
        for v in &report.violations {
            eprintln!("  - {v}");
        }
        return Ok(ExitCode::from(1));
    }
    let summary = experiment::run(
        &cfg,
        RunOptions {
            resume,
            max_new_cells: None,
        },
    )?;
    println!(
        "{} cells: {} computed, {} reused, {} failed",
        summary.cells,
        summary.computed,
        summary.reused,
        summary.failed.len()
    );
    println!("ledger: {}", cfg.output.dir.join(experiment::LEDGER_FILE).display());
    if summary.failed.is_empty() {
        return Ok(ExitCode::SUCCESS);
    }
    for f in &summary.failed {
        eprintln!(
            "failed {} {} {} seed {}: {}",
            f.condition,
            f.features,
            f.model.as_str(),
            f.seed,
            f.error
        );
    }
    Ok(ExitCode::from(2))
}

fn print_written(dir: &Path, names: &[&str]) {
    for n in names {
        let p = dir.join(REPORTS_DIR).join(n);
        if p.exists() {
            println!("wrote {}", p.display());
        }
    }
}

fn real_main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate(args) => validate(&args),
        Command::SynthCorpus {
            out,
            n,
            seed,
            noise_bank,
            exemplars,
        } => {
            let m = synthetic::make_synthetic_corpus(&out, n, seed).context("writing corpus")?;
            println!("wrote {} clips and {}", m.len(), out.join("manifest.csv").display());
            if let Some(bank) = noise_bank {
                synthetic::make_synthetic_noise_bank(&bank, &synthetic::DESK_SUBCATEGORIES, exemplars, seed)
                    .context("writing noise bank")?;
                println!("wrote noise bank under {}", bank.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { grid, jobs, resume } => run(&grid, jobs, resume),
        Command::Report { kind } => match kind {
            ReportKind::Features(src) => {
                let dir = results_dir(&src)?;
                let rows = experiment::report_features(&dir)?;
                println!("{} rows", rows.len());
                print_written(&dir, &[FEATURE_SHIFT_CSV, "feature_shift.md"]);
                Ok(ExitCode::SUCCESS)
            }
            ReportKind::Performance(src) => {
                let dir = results_dir(&src)?;
                let r = experiment::report_performance(&dir)?;
                println!("{} rows", r.rows.len());
                print_written(
                    &dir,
                    &[PERFORMANCE_CSV, "performance.md", BREAKDOWN_CSV, "breakdown.md"],
                );
                Ok(ExitCode::SUCCESS)
            }
        },
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
