//! `dlap-debias`: run the debiasing experiments, check the estimators against
//! exact oracles, and convert discrete releases to continuous ones.

mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dlap_debias::experiments::{
    erdos_renyi, ingest_edge_list, ingest_histogram, summarize, uniform_histogram, write_csv,
    zipf_histogram, EdgeListGraph, ExperimentRun, Histogram, TrialConfig,
};
use dlap_debias::numeric::format_g17;
use dlap_debias::rng::{stream_rng, Parallelism};
use dlap_debias::transform::{to_laplace, to_staircase};
use dlap_debias::{Error, NoisyVector, PrivacyParams};

#[derive(Parser)]
#[command(
    name = "dlap-debias",
    version,
    about = "Unbiased estimation under the discrete Laplace mechanism"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sum of C(d_i, k) over a graph's degree sequence.
    Kstars {
        #[command(flatten)]
        run: RunArgs,
        /// Star size, at least 2.
        #[arg(long, default_value_t = 2)]
        k: u32,
    },
    /// Shannon entropy (natural log) of a histogram with a public total.
    Entropy {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        hist: HistogramArgs,
    },
    /// Partition function Σ exp(t·x_i) of a histogram.
    Partition {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        hist: HistogramArgs,
        /// Exponent; must satisfy |t| < epsilon.
        #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
        t: f64,
    },
    /// Count profile φ_k for k = 0..=k-max.
    Profile {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        hist: HistogramArgs,
        #[arg(long, default_value_t = 5)]
        k_max: u32,
    },
    /// Check the estimators against exact oracles on random instances.
    Verify {
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        /// Random instances per check.
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Re-noise a discrete Laplace release into a continuous one.
    Transform {
        target: Target,
        /// Noisy integer values, one per line; `#` lines are comments.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Privacy budget of the release (sensitivity 1).
        #[arg(long)]
        epsilon: f64,
        /// Inner width of the staircase bridge, in [0, 1/2].
        #[arg(long, required_if_eq("target", "staircase"))]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Laplace,
    Staircase,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Input file; a synthetic default is used when absent.
    #[arg(long)]
    input: Option<PathBuf>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially. Output does not depend on it.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    parallel: u64,
}

impl RunArgs {
    fn config(&self) -> TrialConfig {
        let parallelism = match self.parallel {
            1 => Parallelism::Sequential,
            n => Parallelism::Threads(n as usize),
        };
        TrialConfig::new(self.epsilon, self.trials, self.seed).with_parallelism(parallelism)
    }
}

#[derive(Args)]
struct HistogramArgs {
    /// Declares the column total public; must equal the sum of the input.
    #[arg(long)]
    public_total: Option<i64>,
}

enum Synthetic {
    Uniform,
    Zipf,
}

fn load_histogram(
    run: &RunArgs,
    hist: &HistogramArgs,
    default: Synthetic,
) -> Result<Histogram, Error> {
    match &run.input {
        Some(path) => {
            let h = ingest_histogram(path)?;
            Histogram::new(h.counts().to_vec(), hist.public_total)
        }
        None => {
            let h = match default {
                Synthetic::Uniform => uniform_histogram(64, 6400)?,
                Synthetic::Zipf => zipf_histogram(1000, 1.5, 100_000)?,
            };
            match hist.public_total {
                Some(s) => Histogram::new(h.counts().to_vec(), Some(s)),
                None => Ok(h),
            }
        }
    }
}

fn load_graph(run: &RunArgs) -> Result<EdgeListGraph, Error> {
    match &run.input {
        Some(path) => ingest_edge_list(path),
        None => erdos_renyi(200, 0.05, 7),
    }
}

/// Standard output or a file, with I/O errors tagged by the path.
fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) => File::create(p)
            .map(|f| Box::new(BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|source| io_error(p, source)),
    }
}

fn io_error(path: &Path, source: io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn output_name(path: Option<&Path>) -> PathBuf {
    path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf)
}

fn emit(run: &RunArgs, result: &ExperimentRun) -> Result<(), Error> {
    let out = run.output.as_deref();
    let mut w = open_output(out)?;
    write_csv(&mut w, Some(&result.metadata), &result.records)
        .and_then(|()| w.flush())
        .map_err(|e| io_error(&output_name(out), e))?;
    let mut names: Vec<&str> = Vec::new();
    for r in &result.records {
        if !names.contains(&r.experiment.as_str()) {
            names.push(&r.experiment);
        }
    }
    for name in names {
        if let Some(s) = summarize(&result.records, name) {
            eprintln!(
                "{name}: true {:.6}  naive {:.6} ± {:.2e}  unbiased {:.6} ± {:.2e}",
                s.true_value, s.naive_mean, s.naive_se, s.unbiased_mean, s.unbiased_se
            );
        }
    }
    Ok(())
}

fn read_noisy_values(path: &Path) -> Result<Vec<i64>, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v = line.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: format!("expected an integer, found {line:?}"),
        })?;
        values.push(v);
    }
    Ok(values)
}

fn transform(
    target: Target,
    input: &Path,
    output: Option<&Path>,
    epsilon: f64,
    gamma: Option<f64>,
    seed: u64,
) -> Result<(), Error> {
    let params = PrivacyParams::from_epsilon(epsilon)?;
    let noisy = NoisyVector::new(read_noisy_values(input)?, params)?;
    let mut rng = stream_rng(seed, 0);
    let values = match target {
        Target::Laplace => to_laplace(&noisy, &mut rng),
        Target::Staircase => to_staircase(&noisy, gamma.unwrap_or(0.5), &mut rng)?,
    };
    let mut w = open_output(output)?;
    let written: io::Result<()> = (|| {
        for v in values {
            writeln!(w, "{}", format_g17(v))?;
        }
        w.flush()
    })();
    written.map_err(|e| io_error(&output_name(output), e))
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Kstars { run, k } => {
            let graph = load_graph(&run)?;
            emit(
                &run,
                &dlap_debias::experiments::experiment_kstars(&graph, k, &run.config())?,
            )?;
        }
        Command::Entropy { run, hist } => {
            let h = load_histogram(&run, &hist, Synthetic::Uniform)?;
            emit(
                &run,
                &dlap_debias::experiments::experiment_entropy(&h, &run.config())?,
            )?;
        }
        Command::Partition { run, hist, t } => {
            let h = load_histogram(&run, &hist, Synthetic::Uniform)?;
            emit(
                &run,
                &dlap_debias::experiments::experiment_partition(&h, t, &run.config())?,
            )?;
        }
        Command::Profile { run, hist, k_max } => {
            let h = load_histogram(&run, &hist, Synthetic::Zipf)?;
            emit(
                &run,
                &dlap_debias::experiments::experiment_profile(&h, k_max, &run.config())?,
            )?;
        }
        Command::Verify {
            epsilon,
            trials,
            seed,
        } => {
            return verify::run(epsilon, trials, seed);
        }
        Command::Transform {
            target,
            input,
            output,
            epsilon,
            gamma,
            seed,
        } => transform(target, &input, output.as_deref(), epsilon, gamma, seed)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Domain(_) | Error::Config(_) | Error::Precondition(_) => 2,
        Error::Input(_)
        | Error::Structure(_)
        | Error::Evaluation(_)
        | Error::Parse { .. }
        | Error::Io { .. } => 3,
        Error::ResourceLimit(_) => 4,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
