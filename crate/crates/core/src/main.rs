//! Command-line interface.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 solver
//! non-convergence.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use windens::error::Error;
use windens::io::{read_samples, write_plot_grid, write_samples, ModelFile};
use windens::{
    bench, estimator, fit, generate, partition, true_pdf, Method, SampleSource, SolverConfig,
};

#[derive(Parser)]
#[command(
    name = "windens",
    version,
    about = "Maximum-likelihood density estimation over normalized spline windows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct MethodArgs {
    /// Estimation method: bezier, bspline or pbezier
    #[arg(long, default_value = "bezier")]
    method: String,
    /// Bernstein degree for bezier/pbezier
    #[arg(long, default_value_t = estimator::DEFAULT_BEZIER_DEGREE)]
    degree: usize,
    /// Spline order for bspline
    #[arg(long, default_value_t = estimator::DEFAULT_BSPLINE_ORDER)]
    order: usize,
}

impl MethodArgs {
    fn resolve(&self) -> Result<Method, Error> {
        match self.method.as_str() {
            "bezier" => Ok(Method::Bezier {
                degree: self.degree,
            }),
            "bspline" => Ok(Method::BSpline { order: self.order }),
            "pbezier" => Ok(Method::PiecewiseBezier {
                degree: self.degree,
            }),
            _ => Err(Error::InvalidConfig(
                "method must be one of bezier, bspline, pbezier",
            )),
        }
    }
}

#[derive(clap::Args, Debug)]
struct ConfigArgs {
    /// Constraint radius
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    /// Outer termination tolerance
    #[arg(long, default_value_t = 1e-8)]
    eps: f64,
    /// Inner residual tolerance (default: 1e-9 per sample)
    #[arg(long)]
    delta: Option<f64>,
    /// Smallest piece size for domain partitioning
    #[arg(long = "min-piece")]
    min_piece: Option<usize>,
    /// Gap dominance factor for domain partitioning
    #[arg(long = "gap-dominance", default_value_t = windens::config::DEFAULT_MIN_GAP_DOMINANCE)]
    gap_dominance: f64,
    /// Domain extension fraction at each end (B-spline knot construction)
    #[arg(long = "extend", default_value_t = windens::config::DEFAULT_EXTENSION_FRACTION)]
    extend: f64,
}

impl ConfigArgs {
    fn resolve(&self) -> SolverConfig {
        SolverConfig {
            r: self.r,
            eps_outer: self.eps,
            delta_inner: self.delta,
            min_piece_size: self.min_piece,
            min_gap_dominance: self.gap_dominance,
            extension_fraction: self.extend,
            ..SolverConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate samples from a built-in distribution (one value per line)
    Sample {
        /// Distribution: exponential, bimodal or trimodal
        #[arg(long)]
        dist: String,
        /// Number of samples
        #[arg(long)]
        m: usize,
        /// Generator seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a density to a sample file and write the model
    Fit {
        /// Sample file (one decimal per line)
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        method: MethodArgs,
        #[command(flatten)]
        config: ConfigArgs,
        /// Model output path
        #[arg(long = "model-out")]
        model_out: PathBuf,
    },
    /// Partition a sample file at dominant gaps (TSV on stdout)
    Partition {
        /// Sample file (one decimal per line)
        #[arg(long = "in")]
        input: PathBuf,
        /// Smallest piece size
        #[arg(long = "min-piece")]
        min_piece: Option<usize>,
        /// Gap dominance factor
        #[arg(long = "gap-dominance", default_value_t = windens::config::DEFAULT_MIN_GAP_DOMINANCE)]
        gap_dominance: f64,
    },
    /// Evaluate a fitted model on a grid (TSV)
    Plotdata {
        /// Model file written by `fit`
        #[arg(long)]
        model: PathBuf,
        /// Number of grid rows
        #[arg(long, default_value_t = 512)]
        grid: usize,
        /// Add a third column with this distribution's exact density
        #[arg(long)]
        truth: Option<String>,
        /// Output path
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep fits over sample sizes and seeds (TSV)
    Bench {
        /// Distribution: exponential, bimodal or trimodal
        #[arg(long)]
        dist: String,
        #[command(flatten)]
        method: MethodArgs,
        /// Sample sizes, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<usize>,
        /// Number of seeds (0..seeds-1)
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        /// Output path
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Sample { dist, m, seed, out } => {
            if m == 0 {
                return Err(Error::TooFewSamples { got: 0, min: 1 });
            }
            let source: SampleSource = dist.parse()?;
            let set = generate(source, m, seed)?;
            let mut writer = BufWriter::new(File::create(&out)?);
            write_samples(&set, &mut writer)?;
            writer.flush()?;
            Ok(())
        }
        Command::Fit {
            input,
            method,
            config,
            model_out,
        } => {
            let method = method.resolve()?;
            let config = config.resolve();
            let samples = read_samples(&input)?;
            let est = fit(&samples, method, &config)?;
            let report = est.report();
            if report.terminated_by == windens::Termination::Budget {
                eprintln!(
                    "warning: outer budget exhausted before the epsilon test \
                     (uv sum {:.12})",
                    report.final_uv_sum
                );
            }
            ModelFile::from_estimate(&est, &config).save(&model_out)?;
            println!(
                "method={} windows={} pieces={} outer={} uv_sum={:.12} loglik={:.6}",
                est.method().name(),
                est.basis().window_count(),
                est.basis().pieces().len(),
                report.outer_iterations,
                report.final_uv_sum,
                est.log_likelihood(samples.values()),
            );
            Ok(())
        }
        Command::Partition {
            input,
            min_piece,
            gap_dominance,
        } => {
            let samples = read_samples(&input)?;
            let config = SolverConfig {
                min_piece_size: min_piece,
                min_gap_dominance: gap_dominance,
                ..SolverConfig::default()
            };
            let part = partition(samples.values(), &config)?;
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            writeln!(out, "# piece\tlo\thi\tsample_count")?;
            for (i, piece) in part.pieces.iter().enumerate() {
                writeln!(
                    out,
                    "{i}\t{}\t{}\t{}",
                    piece.domain.lo(),
                    piece.domain.hi(),
                    piece.sample_count()
                )?;
            }
            for (cut, gap) in part.cut_indices.iter().zip(&part.removed_gaps) {
                writeln!(out, "# cut\t{cut}\t{}\t{}", gap.0, gap.1)?;
            }
            Ok(())
        }
        Command::Plotdata {
            model,
            grid,
            truth,
            out,
        } => {
            let est = ModelFile::load(&model)?.into_estimate()?;
            let truth_fn = match truth {
                Some(name) => Some(true_pdf(name.parse()?)?),
                None => None,
            };
            let mut writer = BufWriter::new(File::create(&out)?);
            write_plot_grid(&est, grid, truth_fn, &mut writer)?;
            writer.flush()?;
            Ok(())
        }
        Command::Bench {
            dist,
            method,
            m,
            seeds,
            out,
        } => {
            if m.is_empty() || seeds == 0 {
                return Err(Error::InvalidConfig(
                    "bench needs at least one sample size and one seed",
                ));
            }
            let source: SampleSource = dist.parse()?;
            let method = method.resolve()?;
            let mut writer = BufWriter::new(File::create(&out)?);
            bench::run_bench(
                source,
                method,
                &m,
                seeds,
                &SolverConfig::default(),
                &mut writer,
            )?;
            writer.flush()?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            if let Error::SolverFailed { report, .. } = &e {
                match serde_json::to_string_pretty(report.as_ref()) {
                    Ok(dump) => eprintln!("fit report up to failure:\n{dump}"),
                    Err(_) => eprintln!("fit report unavailable"),
                }
            }
            let code = if e.is_usage() {
                1
            } else if e.is_nonconvergence() {
                3
            } else {
                2
            };
            ExitCode::from(code)
        }
    }
}
