use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "surfmem",
    version,
    about = "Idling surface code memory: circuits, decoding, round-count sweeps",
    arg_required_else_help = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the patch layout as JSON.
    Layout(Common),
    /// Print the noisy memory circuit as text.
    EmitCircuit(Common),
    /// Print the X and Z matching graphs as edge lists.
    EmitGraph(Common),
    /// Sweep the number of rounds and write the per-N CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Also write a gnuplot script plotting pL against N.
        #[arg(long, value_name = "PATH")]
        gnuplot: Option<PathBuf>,
    },
    /// Sweep a two-parameter grid (give --grid twice).
    Heatmap(Common),
    /// Closed-form optima per distance; optionally compare with a sweep CSV.
    Analytic {
        #[command(flatten)]
        common: Common,
        /// Sweep CSV to compare against (uses the single --d).
        #[arg(long, value_name = "CSV")]
        compare: Option<PathBuf>,
        /// Cycle time; adds the number of whole rounds that fit into T.
        #[arg(long, value_name = "TIME")]
        cycle: Option<String>,
    },
    /// Check fault distance and noise-free determinism of the circuits.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Largest fault weight searched (default: d).
        #[arg(long)]
        max_weight: Option<usize>,
    },
    /// Sample shots of one circuit into the packed binary format.
    Sample(Common),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// JSON config file; flags override its values.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Code distance (odd, >= 3); `analytic` accepts a comma list.
    #[arg(long)]
    pub d: Option<String>,
    /// x, y, z, all or a comma list.
    #[arg(long)]
    pub basis: Option<String>,
    /// N, min:max:step or a comma list.
    #[arg(long)]
    pub rounds: Option<String>,
    /// Relaxation time, e.g. 2T, 20us or inf.
    #[arg(long)]
    pub t1: Option<String>,
    /// Pure dephasing time, e.g. 12T or inf.
    #[arg(long)]
    pub tphi: Option<String>,
    /// Depolarizing probability after every gate.
    #[arg(long)]
    pub p: Option<f64>,
    /// Readout flip probability.
    #[arg(long)]
    pub q: Option<f64>,
    /// Total idling time (default 1s); other times may be given as multiples of it.
    #[arg(long = "T", value_name = "TIME")]
    pub total_time: Option<String>,
    /// Shots per basis.
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (results do not depend on this).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// hook-safe (default) or hook-aligned.
    #[arg(long)]
    pub cnot_order: Option<String>,
    /// Grid axis NAME=V1,V2,... with NAME in t1, tphi, p, q.
    #[arg(long)]
    pub grid: Vec<String>,
}
