//! `envelope`: search, score and report admissible envelope extensions.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use envelope_core::EdgeListFormat;

#[derive(Debug, Parser)]
#[command(name = "envelope", version, about = "Admissible envelope extensions of directed graphs")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Eigenvalues below this (relative to the spectral radius) count as zero.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol_zero: f64,
    /// Eigenvalues closer than this (relative) count as repeated.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_gap: f64,
    /// Weight of every added edge.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub weight: f64,
    /// Sum weights when an added edge lands on an existing one.
    #[arg(long, global = true)]
    pub allow_multi: bool,
    /// File of row indices every row dependency list must contain.
    #[arg(long, global = true, value_name = "FILE")]
    pub restrict_rows: Option<PathBuf>,
    /// Restrict row dependency lists to those containing every duplicated row.
    #[arg(long, global = true, conflicts_with = "restrict_rows")]
    pub detect_duplicate_rows: bool,
    /// Worker threads (0: one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Output directory.
    #[arg(long, global = true, env = "ENVELOPE_OUT", default_value = "envelope-out")]
    pub out: PathBuf,
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct GraphInput {
    /// Edge list (plain `src dst [w]`, CSV `src,dst,weight` or JSON).
    pub graph: PathBuf,
    /// File format; guessed from the extension when omitted.
    #[arg(long)]
    pub format: Option<EdgeListFormat>,
    /// Vertex count, when the file does not determine it.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Reverse every edge (transpose the adjacency matrix) after loading.
    #[arg(long)]
    pub reverse_edges: bool,
}

#[derive(Debug, Args)]
pub struct Thresholds {
    /// Minimum Kendall tau against the base PageRank, in [-1, 1].
    #[arg(long, default_value_t = 0.91, allow_negative_numbers = true)]
    pub tau_min: f64,
    /// Maximum condition number of the eigenvector matrix, at least 1.
    #[arg(long, default_value_t = 80.0)]
    pub cond_max: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate every candidate extension and write scorecards.
    Enumerate {
        #[command(flatten)]
        input: GraphInput,
        #[command(flatten)]
        thresholds: Thresholds,
        /// Only count dependency lists and candidates.
        #[arg(long)]
        count_only: bool,
        /// Stop after this many candidates.
        #[arg(long)]
        limit: Option<usize>,
        /// Reuse scorecards already in the output directory.
        #[arg(long)]
        resume: bool,
        /// Skip the Cayley fallback for inadmissible extensions.
        #[arg(long)]
        no_cayley_hints: bool,
    },
    /// Apply the tau and condition thresholds to stored scorecards.
    Filter {
        #[command(flatten)]
        input: GraphInput,
        #[command(flatten)]
        thresholds: Thresholds,
    },
    /// Write the figure CSV files for the filtered selection.
    Report {
        #[command(flatten)]
        input: GraphInput,
        #[command(flatten)]
        thresholds: Thresholds,
    },
    /// Convolve signals, or apply a polynomial system, on an admissible graph.
    Convolve {
        #[command(flatten)]
        input: GraphInput,
        /// Signal: `delta:k`, `ones`, comma-separated reals or JSON `[[re, im], ..]`.
        #[arg(long)]
        x: String,
        /// Second signal.
        #[arg(long, conflicts_with = "system", required_unless_present = "system")]
        y: Option<String>,
        /// Polynomial coefficients, lowest degree first (`1, 0.5, 0:2` for 1 + 0.5 z + 2i z^2).
        #[arg(long)]
        system: Option<String>,
    },
    /// Structural metrics of a graph, optionally ranked against a reference.
    Metrics {
        #[command(flatten)]
        input: GraphInput,
        /// Graph whose PageRank the Kendall tau is taken against.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Motifs to count.
        #[arg(long, value_delimiter = ',', default_values = ["3cycle", "ffl"])]
        motifs: Vec<envelope_core::metrics::Motif>,
    },
    /// Cayley digraph spectra, or the Cayley embedding of a graph.
    Cayley {
        /// Number of vertices.
        #[arg(long, required_unless_present = "graph")]
        n: Option<usize>,
        /// Connection set residues.
        #[arg(long, value_delimiter = ',', required_unless_present = "graph")]
        gamma: Vec<usize>,
        /// Embed this (non-singular) graph instead.
        #[arg(long, conflicts_with_all = ["n", "gamma"])]
        graph: Option<PathBuf>,
    },
    /// Closed-form check on the line digraph closed by a weighted edge.
    ReproLine {
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_values = ["1", "0.5", "0.01"])]
        weights: Vec<f64>,
    },
    /// Full pipeline on a social digraph: counts, restricted search, filters, reports.
    ReproFriendship {
        #[command(flatten)]
        input: GraphInput,
        #[command(flatten)]
        thresholds: Thresholds,
    },
    /// Full pipeline on a seeded random digraph.
    Demo {
        #[arg(long, default_value_t = 7)]
        n: usize,
        /// Edge probability.
        #[arg(long, default_value_t = 0.3)]
        p: f64,
        /// Minimum Kendall tau.
        #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
        tau_min: f64,
        /// Maximum condition number.
        #[arg(long, default_value_t = 1e6)]
        cond_max: f64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
