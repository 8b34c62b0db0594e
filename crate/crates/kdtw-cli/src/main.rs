//! Command-line pipelines over the curve-dissimilarity toolkit: pairwise
//! distance matrices, agglomerative clustering, l-NN cross-validation,
//! parameter tuning, synthetic data generation, fixture generation, and the
//! robustness experiment.
//!
//! All outputs are deterministic functions of the inputs, flags and seed; the
//! thread count never changes a single output byte.

mod commands;
mod measure;
mod output;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use measure::MeasureParams;

#[derive(Parser)]
#[command(
    name = "kdtw",
    about = "Curve dissimilarity pipelines around the k-largest DTW distance",
    version
)]
struct Cli {
    /// Worker threads for pairwise computations (default: logical cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone)]
struct MeasureArgs {
    /// Measure spec, comma-separated for commands that accept several:
    /// frechet|weak-frechet|dtw|kdtw|kdtw-approx|erp|window-dtw|segment-dtw.
    /// kdtw accepts an inline parameter, e.g. kdtw=17.
    #[arg(long, default_value = "kdtw")]
    measure: String,

    /// k parameter for kdtw / kdtw-approx.
    #[arg(long)]
    k: Option<usize>,

    /// Approximation parameter in (0, 1] for kdtw-approx.
    #[arg(long)]
    epsilon: Option<f64>,

    /// Exponent for DTW_q.
    #[arg(long, default_value_t = 1.0)]
    q: f64,

    /// Band width for window-dtw.
    #[arg(long, default_value_t = 50)]
    window: usize,

    /// Segment count for segment-dtw.
    #[arg(long, default_value_t = 10)]
    segments: usize,

    /// ERP gap point as comma-separated coordinates (default: origin).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    gap: Option<Vec<f64>>,
}

impl MeasureArgs {
    fn params(&self) -> MeasureParams {
        MeasureParams {
            k: self.k,
            epsilon: self.epsilon,
            q: self.q,
            window: self.window,
            segments: self.segments,
            gap: self.gap.clone(),
        }
    }
}

#[derive(clap::Args, Debug, Clone)]
struct InputArgs {
    /// Dataset path: JSON file or CSV directory.
    #[arg(long)]
    input: PathBuf,

    /// Merge consecutive duplicate vertices on load.
    #[arg(long)]
    dedup_vertices: bool,
}

#[derive(clap::Args, Debug, Clone)]
struct CvArgs {
    /// Cross-validation folds.
    #[arg(long, default_value_t = 6)]
    folds: usize,

    /// Independent cross-validation repetitions.
    #[arg(long, default_value_t = 100)]
    repeats: usize,

    /// Neighbor count (default: ceil(sqrt(n))).
    #[arg(long)]
    l: Option<usize>,

    /// Stratify folds by class label.
    #[arg(long)]
    stratify: bool,

    /// Base seed for fold shuffles.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the full pairwise distance matrix of a dataset.
    Dist {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        measure: MeasureArgs,
        /// Output CSV path.
        #[arg(long)]
        output: PathBuf,
        /// Also write per-pair instrumentation JSON (k-DTW measures only)
        /// next to the output as `<output>.instrument.json`.
        #[arg(long)]
        instrument: bool,
    },
    /// Hierarchical agglomerative clustering of a dataset.
    Cluster {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        measure: MeasureArgs,
        /// single or complete.
        #[arg(long, default_value = "single")]
        linkage: String,
        /// Number of clusters to cut the dendrogram into.
        #[arg(long)]
        cut: usize,
        /// Output directory (dendrogram.json, heatmap.csv, clusters.json).
        #[arg(long)]
        output: PathBuf,
    },
    /// Repeated cross-validated l-NN classification under several measures.
    Knn {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        measure: MeasureArgs,
        #[command(flatten)]
        cv: CvArgs,
        /// Output directory (metrics.json, metrics.csv).
        #[arg(long)]
        output: PathBuf,
    },
    /// Tune k on a train split and evaluate the winner on hold-out data.
    Tune {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        cv: CvArgs,
        /// Hold-out test fraction in (0, 1).
        #[arg(long, default_value_t = 1.0 / 3.0)]
        split: f64,
        /// Comma-separated candidate k values (default: ln m, sqrt m, m/10,
        /// m/4 for complexity m).
        #[arg(long)]
        candidates: Option<String>,
        /// Baseline measures evaluated on the test split alongside the
        /// winner.
        #[arg(long, default_value = "frechet,dtw")]
        baselines: String,
        /// Use the (1+epsilon)-approximation for the k-DTW candidates.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Output directory (tune.json, tune_train.csv, tune_test.csv).
        #[arg(long)]
        output: PathBuf,
    },
    /// Generate the synthetic A/B/C curve ensemble as a dataset JSON.
    Synth {
        /// Curve complexity of the form 4*m_hat+1.
        #[arg(long, default_value_t = 201)]
        m: usize,
        /// Curves per type.
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Small-value bound.
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
        /// Base peak count for type A (cycles over base..base+3).
        #[arg(long, default_value_t = 5)]
        peaks: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output dataset JSON path.
        #[arg(long)]
        output: PathBuf,
    },
    /// Write a named fixture dataset plus its expected distance values.
    Fixtures {
        /// triangle | k-gadget | d-gadget | long-short.
        #[arg(long)]
        name: String,
        /// Curve complexity (triangle, long-short).
        #[arg(long)]
        m: Option<usize>,
        /// Epsilon for the triangle (default 0.2) / long-short (default 0.1).
        #[arg(long)]
        epsilon: Option<f64>,
        /// Gadget count (k-gadget, d-gadget).
        #[arg(long, default_value_t = 1)]
        mhat: usize,
        /// Gadget height L (k-gadget, d-gadget).
        #[arg(long, default_value_t = 10.0)]
        height: f64,
        /// k used for the expected k-DTW values.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Output directory (dataset.json, expected.json).
        #[arg(long)]
        output: PathBuf,
    },
    /// Breakdown-point experiment for the top-k median estimator.
    Robust {
        /// Optional dataset; the first curve's vertices form the point set.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Number of generated unit-ball points when no input is given.
        #[arg(long, default_value_t = 20)]
        n: usize,
        /// Dimension of generated points.
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        k: usize,
        /// Corruption magnitude for the bounded part.
        #[arg(long, default_value_t = 1e6)]
        magnitude: f64,
        /// Comma-separated magnitudes for the unbounded part.
        #[arg(long, default_value = "1e4,1e6")]
        magnitudes: String,
        /// Output report JSON path.
        #[arg(long)]
        output: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(threads) = cli.threads {
        builder = builder.num_threads(threads);
    }
    let pool = builder.build().context("building thread pool")?;
    pool.install(|| dispatch(cli.command))
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Dist {
            input,
            measure,
            output,
            instrument,
        } => commands::dist(&input, &measure, &output, instrument),
        Command::Cluster {
            input,
            measure,
            linkage,
            cut,
            output,
        } => commands::cluster(&input, &measure, &linkage, cut, &output),
        Command::Knn {
            input,
            measure,
            cv,
            output,
        } => commands::knn(&input, &measure, &cv, &output),
        Command::Tune {
            input,
            cv,
            split,
            candidates,
            baselines,
            epsilon,
            output,
        } => commands::tune(
            &input,
            &cv,
            split,
            candidates.as_deref(),
            &baselines,
            epsilon,
            &output,
        ),
        Command::Synth {
            m,
            count,
            epsilon,
            peaks,
            seed,
            output,
        } => commands::synth(m, count, epsilon, peaks, seed, &output),
        Command::Fixtures {
            name,
            m,
            epsilon,
            mhat,
            height,
            k,
            output,
        } => commands::fixtures(&name, m, epsilon, mhat, height, k, &output),
        Command::Robust {
            input,
            n,
            dim,
            seed,
            k,
            magnitude,
            magnitudes,
            output,
        } => commands::robust(
            input.as_deref(),
            n,
            dim,
            seed,
            k,
            magnitude,
            &magnitudes,
            &output,
        ),
    }
}
