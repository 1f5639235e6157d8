//! Library side of the `ictac` binary: argument types, mask generation,
//! PNG/JSON I/O and the three subcommands (`mask`, `complete`, `metrics`).

pub mod io;

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ictac::{
    missing_ratio, run_ictac, run_ka_tmactt, run_tmac_tt, ssim, synth, validate_ictac_shape,
    DenseTensor, ExtractMode, KaSpec, KaVariant, ObservationMask, PipelineConfig, RankSpec,
    SolveReport, SolverConfig, StackMode, TTRankVector, Weights,
};

#[derive(Parser)]
#[command(
    name = "ictac",
    version,
    about = "Color image completion via tensor augmentation and completion"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate a seeded observation mask PNG for an image.
    Mask(MaskArgs),
    /// Corrupt an image (or load a mask) and recover it.
    Complete(CompleteArgs),
    /// Compare a recovered image against a reference.
    Metrics(MetricsArgs),
}

#[derive(Args)]
pub struct MaskArgs {
    /// Image whose shape the mask must match.
    pub image: PathBuf,
    /// Missing ratio in percent (0..=100).
    #[arg(long)]
    pub mr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output mask PNG path.
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    /// Factorization solver on the raw image tensor.
    TmacTt,
    /// Ket augmentation (square 2^n addressing) plus the solver.
    KaTmacTt,
    /// Concatenated completion: copies, combined row mode, modified ket
    /// augmentation, solver, extraction.
    Ictac,
}

impl Algorithm {
    pub fn label(self) -> &'static str {
        match self {
            Algorithm::TmacTt => "tmac-tt",
            Algorithm::KaTmacTt => "ka-tmac-tt",
            Algorithm::Ictac => "ictac",
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum StackModeArg {
    Interleave,
    Stack,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum ExtractArg {
    First,
    Average,
}

#[derive(Args)]
pub struct CompleteArgs {
    /// Input 8-bit RGB PNG.
    pub image: PathBuf,
    #[arg(long, value_enum, default_value_t = Algorithm::Ictac)]
    pub algo: Algorithm,
    /// Observation mask PNG (alternative to --mr).
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Missing ratio in percent; entries are removed uniformly at random.
    #[arg(long)]
    pub mr: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Image copies for the ictac pipeline.
    #[arg(long, default_value_t = 81)]
    pub copies: usize,
    /// Comma-separated per-prefix ranks; omit to pick ranks from the
    /// singular-value energy.
    #[arg(long, value_delimiter = ',')]
    pub ranks: Option<Vec<usize>>,
    /// Singular-value energy fraction for automatic rank selection.
    #[arg(long, default_value_t = 0.98)]
    pub rank_energy: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = StackModeArg::Interleave)]
    pub stack_mode: StackModeArg,
    #[arg(long, value_enum, default_value_t = ExtractArg::First)]
    pub extract: ExtractArg,
    /// Worker threads (1 guarantees byte-identical reruns).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub struct MetricsArgs {
    /// Recovered image PNG.
    pub recovered: PathBuf,
    /// Reference image PNG.
    pub reference: PathBuf,
    /// Optional mask PNG; adds the missing ratio to the report.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Output JSON path (stdout when omitted).
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

/// The JSON report written by `complete`.
#[derive(Serialize)]
pub struct RunReport {
    pub algorithm: String,
    pub input: String,
    pub shape: Vec<usize>,
    pub mr_percent: f64,
    pub seed: Option<u64>,
    pub rse: f64,
    pub ssim: f64,
    pub iterations: usize,
    pub converged: bool,
    pub wall_seconds: f64,
    pub rng: String,
    pub ranks: Vec<usize>,
}

/// Mask with round(mr/100 * entries) missing entries drawn uniformly
/// without replacement.
pub fn gen_mask(shape: &[usize], mr_percent: f64, seed: u64) -> Result<ObservationMask> {
    if !(0.0..=100.0).contains(&mr_percent) {
        bail!("--mr must lie in 0..=100, got {mr_percent}");
    }
    let total: usize = shape.iter().product();
    let missing = (mr_percent / 100.0 * total as f64).round() as usize;
    Ok(synth::random_mask(shape, missing, seed)?)
}

pub fn cmd_mask(args: &MaskArgs) -> Result<()> {
    let img = io::load_image(&args.image)?;
    let mask = gen_mask(img.shape(), args.mr, args.seed)?;
    io::save_mask(&mask, &args.out)?;
    println!(
        "wrote {} ({:.2}% missing, seed {})",
        args.out.display(),
        missing_ratio(&mask),
        args.seed
    );
    Ok(())
}

fn solver_config(args: &CompleteArgs) -> SolverConfig {
    SolverConfig {
        ranks: match &args.ranks {
            Some(r) => RankSpec::Fixed(TTRankVector::new(r.clone())),
            None => RankSpec::Auto {
                energy: args.rank_energy,
            },
        },
        weights: Weights::Uniform,
        max_iters: args.max_iters,
        tol: args.tol,
        seed: args.seed,
        ..SolverConfig::default()
    }
}

/// Shape validation with messages that name valid sizes, run before any
/// allocation.
fn validate_shape_for_algo(args: &CompleteArgs, shape: &[usize]) -> Result<()> {
    match args.algo {
        Algorithm::TmacTt => Ok(()),
        Algorithm::KaTmacTt => {
            KaSpec::for_shape(shape, KaVariant::Original).map_err(|_| {
                anyhow!(
                    "ka-tmac-tt needs a square 2^n x 2^n image (e.g. 128x128, 256x256, \
                     512x512); got {}x{}",
                    shape[0],
                    shape[1]
                )
            })?;
            Ok(())
        }
        Algorithm::Ictac => {
            validate_ictac_shape(shape, args.copies, KaVariant::Modified).map_err(|_| {
                let suggestions: Vec<String> = (1..=12u32)
                    .filter_map(|n| {
                        let rows = 3usize.pow(n);
                        let cols = 2usize.pow(n);
                        (rows % args.copies == 0 && rows / args.copies > 1).then(|| {
                            format!("{}x{}", rows / args.copies, cols)
                        })
                    })
                    .take(3)
                    .collect();
                anyhow!(
                    "ictac with {} copies needs the stacked rows (copies x height) to form a \
                     3^n x 2^n grid; valid sizes: {}; got {}x{}",
                    args.copies,
                    if suggestions.is_empty() {
                        "none (copies must divide a power of 3)".to_string()
                    } else {
                        suggestions.join(", ")
                    },
                    shape[0],
                    shape[1]
                )
            })?;
            Ok(())
        }
    }
}

fn run_algorithm(
    args: &CompleteArgs,
    input: &DenseTensor,
    mask: &ObservationMask,
) -> Result<(DenseTensor, SolveReport)> {
    let solver = solver_config(args);
    let run = || -> Result<(DenseTensor, SolveReport)> {
        match args.algo {
            Algorithm::TmacTt => Ok(run_tmac_tt(input, mask, &solver)?),
            Algorithm::KaTmacTt => {
                let cfg = PipelineConfig {
                    copies: 1,
                    ka_variant: KaVariant::Original,
                    solver,
                    ..PipelineConfig::default()
                };
                Ok(run_ka_tmactt(input, mask, &cfg)?)
            }
            Algorithm::Ictac => {
                let cfg = PipelineConfig {
                    copies: args.copies,
                    stack_mode: match args.stack_mode {
                        StackModeArg::Interleave => StackMode::Interleave,
                        StackModeArg::Stack => StackMode::Stack,
                    },
                    extract_mode: match args.extract {
                        ExtractArg::First => ExtractMode::First,
                        ExtractArg::Average => ExtractMode::Average,
                    },
                    ka_variant: KaVariant::Modified,
                    solver,
                };
                Ok(run_ictac(input, mask, &cfg)?)
            }
        }
    };
    match args.threads {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .context("cannot build thread pool")?;
            pool.install(run)
        }
        None => run(),
    }
}

pub fn cmd_complete(args: &CompleteArgs) -> Result<()> {
    let input = io::load_image(&args.image)?;
    let shape = input.shape().to_vec();

    let (mask, seed_used) = match (&args.mask, args.mr) {
        (Some(path), None) => (io::load_mask(path, &shape)?, None),
        (None, Some(mr)) => (gen_mask(&shape, mr, args.seed)?, Some(args.seed)),
        (Some(_), Some(_)) => bail!("give either --mask or --mr, not both"),
        (None, None) => bail!("one of --mask or --mr is required"),
    };
    validate_shape_for_algo(args, &shape)?;

    let corrupted = mask.zero_missing(&input)?;
    let start = Instant::now();
    let (recovered, solve_report) = run_algorithm(args, &input, &mask)?;
    let wall_seconds = start.elapsed().as_secs_f64();

    let report = RunReport {
        algorithm: args.algo.label().to_string(),
        input: args.image.display().to_string(),
        shape: shape.clone(),
        mr_percent: missing_ratio(&mask),
        seed: seed_used,
        rse: ictac::rse(&recovered, &input)?,
        ssim: ssim(&recovered, &input)?,
        iterations: solve_report.iterations_run,
        converged: solve_report.converged,
        wall_seconds,
        rng: synth::RNG_NAME.to_string(),
        ranks: solve_report.ranks.clone(),
    };

    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("cannot create {}", args.out_dir.display()))?;
    let stem = args
        .image
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("image");
    let out = |suffix: &str, ext: &str| args.out_dir.join(format!("{stem}_{suffix}.{ext}"));

    io::save_image(&recovered, &out("recovered", "png"))?;
    io::save_image(&corrupted, &out("corrupted", "png"))?;
    io::save_mask(&mask, &out("mask", "png"))?;
    write_json(&report, &out("report", "json"))?;

    println!(
        "{}: rse {:.4}, ssim {:.4}, {} iterations in {:.1}s -> {}",
        report.algorithm,
        report.rse,
        report.ssim,
        report.iterations,
        report.wall_seconds,
        args.out_dir.display()
    );
    Ok(())
}

pub fn cmd_metrics(args: &MetricsArgs) -> Result<()> {
    let recovered = io::load_image(&args.recovered)?;
    let reference = io::load_image(&args.reference)?;
    let mr_percent = match &args.mask {
        Some(path) => missing_ratio(&io::load_mask(path, reference.shape())?),
        None => 0.0,
    };
    let report = ictac::MetricsReport {
        algorithm: "metrics".to_string(),
        shape: reference.shape().to_vec(),
        rse: ictac::rse(&recovered, &reference)?,
        ssim: ssim(&recovered, &reference)?,
        mr_percent,
    };
    match &args.out {
        Some(path) => write_json(&report, path)?,
        None => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    Ok(())
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Mask(args) => cmd_mask(args),
        Command::Complete(args) => cmd_complete(args),
        Command::Metrics(args) => cmd_metrics(args),
    }
}
