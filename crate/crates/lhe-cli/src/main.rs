//! `lhetool`: command-line front end for the LHE solution-space toolkit.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags or parameter
//! combinations), 2 on I/O or input-format errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use lhe_core::harness::{self, SimilarityAxis};
use lhe_core::opt::{self, InitStrategy, OptimizerConfig, StepPolicy};
use lhe_core::pgm;
use lhe_core::stark::{self, StarkConfig, StarkMetric};
use lhe_core::{dof, mse, ssim, GrayImage, SsimConfig, WindowSpec};

#[derive(Parser)]
#[command(
    name = "lhetool",
    version,
    about = "Local histogram equalization with explicit degrees of freedom: \
             classic LHE, MSE/SSIM-optimal solutions, SPL enhancement and \
             trade-off sweeps over 8-bit PGM images"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Basic LHE: the upper end of every pixel's solution interval.
    Lhe {
        #[arg(long = "in", value_name = "PGM")]
        input: PathBuf,
        #[arg(long, value_name = "PGM")]
        out: PathBuf,
        #[arg(short, long, value_name = "HALF-WIDTH")]
        w: usize,
    },
    /// Per-pixel solution intervals, written as two rasters.
    Dof {
        #[arg(long = "in", value_name = "PGM")]
        input: PathBuf,
        #[arg(long, value_name = "PGM")]
        lower: PathBuf,
        #[arg(long, value_name = "PGM")]
        upper: PathBuf,
        #[arg(short, long, value_name = "HALF-WIDTH")]
        w: usize,
        /// Also print the solution-space size as a base-2 logarithm.
        #[arg(long)]
        log2_size: bool,
    },
    /// The solution closest to the input in the MSE sense.
    MinMse {
        #[arg(long = "in", value_name = "PGM")]
        input: PathBuf,
        #[arg(long, value_name = "PGM")]
        out: PathBuf,
        #[arg(short, long, value_name = "HALF-WIDTH")]
        w: usize,
    },
    /// The solution farthest from the input in the MSE sense.
    MaxMse {
        #[arg(long = "in", value_name = "PGM")]
        input: PathBuf,
        #[arg(long, value_name = "PGM")]
        out: PathBuf,
        #[arg(short, long, value_name = "HALF-WIDTH")]
        w: usize,
    },
    /// Gradient-ascent search for the solution most similar to the input.
    SsimOpt {
        #[arg(long = "in", value_name = "PGM")]
        input: PathBuf,
        #[arg(long, value_name = "PGM")]
        out: PathBuf,
        #[arg(short, long, value_name = "HALF-WIDTH")]
        w: usize,
        #[arg(long, value_enum, default_value_t = InitArg::Mid)]
        init: InitArg,
        #[arg(long, value_enum, default_value_t = StepArg::Beta0)]
        step: StepArg,
        /// Fraction of the step estimate used by the beta0 policy, in (0, 1].
        #[arg(long, default_value_t = 0.5, value_name = "FRACTION")]
        beta_frac: f64,
        #[arg(long, default_value_t = 50, value_name = "COUNT")]
        iters: usize,
        #[arg(long, value_enum, default_value_t = KernelArg::Box)]
        kernel: KernelArg,
    },
    /// Signed power-law enhancement, optionally optimized within its
    /// solution space.
    Stark {
        #[arg(long = "in", value_name = "PGM")]
        input: PathBuf,
        #[arg(long, value_name = "PGM")]
        out: PathBuf,
        #[arg(short, long, value_name = "HALF-WIDTH")]
        w: usize,
        #[arg(long, value_name = "0..1")]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = OptimizeArg::None)]
        optimize: OptimizeArg,
    },
    /// PSNR, SSIM and total local energy of a result against a reference.
    Metrics {
        #[arg(long = "ref", value_name = "PGM")]
        reference: PathBuf,
        #[arg(long = "test", value_name = "PGM")]
        test: PathBuf,
        #[arg(short, long, value_name = "HALF-WIDTH")]
        w: usize,
    },
    /// Contrast/similarity trade-off of the SPL method and its optimized
    /// variants over a list of alpha values.
    Sweep {
        #[arg(long = "in", value_name = "PGM")]
        input: PathBuf,
        #[arg(short, long, value_name = "HALF-WIDTH")]
        w: usize,
        /// Comma-separated values in [0, 1].
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1"
        )]
        alphas: Vec<f64>,
        #[arg(long, value_name = "FILE")]
        csv: PathBuf,
        #[arg(long, value_name = "FILE")]
        plot: Option<PathBuf>,
        /// Vertical axis of the plot.
        #[arg(long = "y", value_enum, default_value_t = AxisArg::Psnr)]
        y_axis: AxisArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Mid,
    Minmse,
}

#[derive(Clone, Copy, ValueEnum)]
enum StepArg {
    Beta0,
    Search,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Box,
    Gauss,
}

#[derive(Clone, Copy, ValueEnum)]
enum OptimizeArg {
    None,
    Mse,
    Ssim,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Psnr,
    Ssim,
}

enum AppError {
    Usage(String),
    Data(String),
}

impl From<pgm::PgmError> for AppError {
    fn from(e: pgm::PgmError) -> Self {
        AppError::Data(e.to_string())
    }
}

impl From<lhe_core::Error> for AppError {
    fn from(e: lhe_core::Error) -> Self {
        AppError::Data(e.to_string())
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            // clap renders help to stdout and errors to stderr.
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(AppError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_image(path: &Path, win: WindowSpec) -> Result<GrayImage, AppError> {
    let image =
        pgm::read_pgm(path).map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
    win.check_fits(image.width(), image.height()).map_err(|_| {
        AppError::Usage(format!(
            "window of side {} does not fit {} ({}x{})",
            win.side(),
            path.display(),
            image.width(),
            image.height()
        ))
    })?;
    Ok(image)
}

fn window(w: usize) -> Result<WindowSpec, AppError> {
    WindowSpec::new(w).map_err(|e| AppError::Usage(e.to_string()))
}

fn check_alpha(alpha: f64) -> Result<(), AppError> {
    if !alpha.is_finite() || !(0.0..=1.0).contains(&alpha) {
        return Err(AppError::Usage(format!("alpha {alpha} outside [0, 1]")));
    }
    Ok(())
}

fn write_image(image: &GrayImage, path: &Path) -> Result<(), AppError> {
    pgm::write_pgm(image, path).map_err(|e| AppError::Data(format!("{}: {e}", path.display())))
}

fn ssim_config(kernel: KernelArg, w: usize, image: &GrayImage) -> Result<SsimConfig, AppError> {
    match kernel {
        KernelArg::Box => Ok(SsimConfig::box_kernel(w, image.levels())),
        KernelArg::Gauss => {
            if image.width() < 11 || image.height() < 11 {
                return Err(AppError::Usage(format!(
                    "gaussian kernel needs an image of at least 11x11, got {}x{}",
                    image.width(),
                    image.height()
                )));
            }
            Ok(SsimConfig::gaussian(image.levels()))
        }
    }
}

fn run(command: Command) -> Result<(), AppError> {
    match command {
        Command::Lhe { input, out, w } => {
            let win = window(w)?;
            let image = load_image(&input, win)?;
            write_image(&dof::basic_lhe(&image, win), &out)
        }
        Command::Dof {
            input,
            lower,
            upper,
            w,
            log2_size,
        } => {
            let win = window(w)?;
            let image = load_image(&input, win)?;
            let bounds = dof::dof_bounds(&image, win);
            let make = |pixels: &[u16]| {
                GrayImage::new(
                    image.width(),
                    image.height(),
                    image.levels(),
                    pixels.to_vec(),
                )
                .expect("bounds are valid gray levels")
            };
            write_image(&make(bounds.lower()), &lower)?;
            write_image(&make(bounds.upper()), &upper)?;
            if log2_size {
                println!("{:.6}", dof::solution_space_log2(&bounds));
            }
            Ok(())
        }
        Command::MinMse { input, out, w } => {
            let win = window(w)?;
            let image = load_image(&input, win)?;
            let bounds = dof::dof_bounds(&image, win);
            write_image(&mse::min_mse_solution(&image, &bounds), &out)
        }
        Command::MaxMse { input, out, w } => {
            let win = window(w)?;
            let image = load_image(&input, win)?;
            let bounds = dof::dof_bounds(&image, win);
            write_image(&mse::max_mse_solution(&image, &bounds), &out)
        }
        Command::SsimOpt {
            input,
            out,
            w,
            init,
            step,
            beta_frac,
            iters,
            kernel,
        } => {
            if !(beta_frac > 0.0 && beta_frac <= 1.0) {
                return Err(AppError::Usage(format!(
                    "--beta-frac {beta_frac} outside (0, 1]"
                )));
            }
            if iters == 0 {
                return Err(AppError::Usage("--iters must be at least 1".into()));
            }
            let win = window(w)?;
            let image = load_image(&input, win)?;
            let scfg = ssim_config(kernel, w, &image)?;
            let ocfg = OptimizerConfig {
                init: match init {
                    InitArg::Mid => InitStrategy::Midpoint,
                    InitArg::Minmse => InitStrategy::MinMse,
                },
                step: match step {
                    StepArg::Beta0 => StepPolicy::FixedBeta0 {
                        fraction: beta_frac,
                    },
                    StepArg::Search => StepPolicy::ScalarSearch,
                },
                max_iters: iters,
                ..OptimizerConfig::default()
            };
            let bounds = dof::dof_bounds(&image, win);
            let (result, _) = opt::maximize_ssim(&image, &bounds, &ocfg, &scfg)?;
            write_image(&result, &out)
        }
        Command::Stark {
            input,
            out,
            w,
            alpha,
            optimize,
        } => {
            check_alpha(alpha)?;
            let win = window(w)?;
            let image = load_image(&input, win)?;
            let cfg = StarkConfig::new(alpha, win).map_err(|e| AppError::Usage(e.to_string()))?;
            let result = match optimize {
                OptimizeArg::None => stark::stark_baseline(&image, &cfg),
                OptimizeArg::Mse | OptimizeArg::Ssim => {
                    let metric = if matches!(optimize, OptimizeArg::Mse) {
                        StarkMetric::Mse
                    } else {
                        StarkMetric::Ssim
                    };
                    let scfg = SsimConfig::box_kernel(w, image.levels());
                    stark::enhance_stark(&image, &cfg, metric, &OptimizerConfig::default(), &scfg)?
                        .0
                }
            };
            write_image(&result, &out)
        }
        Command::Metrics { reference, test, w } => {
            let win = window(w)?;
            let reference_img = load_image(&reference, win)?;
            let test_img = load_image(&test, win)?;
            let scfg = SsimConfig::box_kernel(w, reference_img.levels());
            let psnr = mse::psnr(&reference_img, &test_img)?;
            let index = ssim::ssim(&reference_img, &test_img, &scfg)?;
            let energy = harness::total_local_energy(&test_img, win);
            println!("psnr_db: {psnr:.6}");
            println!("ssim: {index:.6}");
            println!("local_energy: {energy:.6}");
            Ok(())
        }
        Command::Sweep {
            input,
            w,
            alphas,
            csv,
            plot,
            y_axis,
        } => {
            if alphas.is_empty() {
                return Err(AppError::Usage("--alphas list is empty".into()));
            }
            for &alpha in &alphas {
                check_alpha(alpha)?;
            }
            let win = window(w)?;
            let image = load_image(&input, win)?;
            let scfg = SsimConfig::box_kernel(w, image.levels());
            let ocfg = OptimizerConfig {
                init: InitStrategy::MinMse,
                step: StepPolicy::ScalarSearch,
                ..OptimizerConfig::default()
            };
            let records = harness::sweep(&image, &alphas, win, &ocfg, &scfg)?;
            harness::emit_csv(&records, &csv)
                .map_err(|e| AppError::Data(format!("{}: {e}", csv.display())))?;
            if let Some(plot_path) = plot {
                let axis = match y_axis {
                    AxisArg::Psnr => SimilarityAxis::Psnr,
                    AxisArg::Ssim => SimilarityAxis::Ssim,
                };
                harness::emit_plot(&records, axis, &plot_path)
                    .map_err(|e| AppError::Data(format!("{}: {e}", plot_path.display())))?;
            }
            Ok(())
        }
    }
}
