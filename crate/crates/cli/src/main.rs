//! `linkshroud` command-line driver: perturb a snapshot sequence, measure
//! the result, run application evaluators and collect a report.

mod commands;
mod config;
mod error;
mod provenance;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{RunConfig, Settings};
use crate::error::{CliError, Result};

#[derive(Parser)]
#[command(name = "linkshroud", version, about = "Link obfuscation for temporal social graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Perturb every snapshot and write g_prime_<t>.txt, record.json and
    /// provenance.json per mechanism.
    Perturb(Flags),
    /// Compute privacy and utility metrics into metrics.csv / metrics.json.
    Metrics(Flags),
    /// Run application evaluators into eval.csv.
    Eval(Flags),
    /// Merge metrics.csv and eval.csv into report.csv.
    Report(Flags),
}

/// Every flag can also be given in the `--config` file as `key = value`.
#[derive(Args, Default)]
struct Flags {
    /// Key-value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Manifest listing one edge-list file per snapshot.
    #[arg(long)]
    manifest: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// Random-walk length.
    #[arg(long)]
    k: Option<String>,
    /// Hop radius freed around changed links.
    #[arg(long)]
    m: Option<String>,
    /// Vertex overlap for a community to count as unchanged.
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Comma-separated: linkmirage, static-baseline, hay-baseline.
    #[arg(long)]
    mechanism: Option<String>,
    /// Comma-separated: anti-inference, indistinguishability,
    /// anti-aggregation, ud, modularity, pagerank, structure, spectral.
    #[arg(long)]
    metric: Option<String>,
    /// Monte Carlo samples per hypothesis and snapshot.
    #[arg(long)]
    samples: Option<String>,
    /// Comma-separated walk lengths for utility distance.
    #[arg(long)]
    l: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    /// appendixC (degree product) or algorithm1 (size weighted).
    #[arg(long)]
    inter_cluster_form: Option<String>,
    /// Queried link as u,v,t.
    #[arg(long)]
    query: Option<String>,
    /// worst-case, common-neighbors, jaccard, adamic-adar or fixed:<p>.
    #[arg(long)]
    prior: Option<String>,
    /// Per-node malicious probability for the attack evaluator.
    #[arg(long)]
    f: Option<String>,
    /// Comma-separated target vertices for the attack evaluator.
    #[arg(long)]
    targets: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    damping: Option<String>,
    /// Use the lazy walk (P + I)/2 for mixing times.
    #[arg(long)]
    lazy: bool,
    #[arg(long)]
    sybil_scenario: Option<String>,
    /// Comma-separated: attack, sampling, sybil.
    #[arg(long)]
    eval: Option<String>,
}

impl Flags {
    fn resolve(&self) -> Result<RunConfig> {
        let mut s = match &self.config {
            Some(p) => Settings::from_file(p)?,
            None => Settings::default(),
        };
        let pairs: [(&str, &Option<String>); 20] = [
            ("manifest", &self.manifest),
            ("out", &self.out),
            ("k", &self.k),
            ("m", &self.m),
            ("theta", &self.theta),
            ("seed", &self.seed),
            ("mechanism", &self.mechanism),
            ("metric", &self.metric),
            ("samples", &self.samples),
            ("l", &self.l),
            ("threads", &self.threads),
            ("inter-cluster-form", &self.inter_cluster_form),
            ("query", &self.query),
            ("prior", &self.prior),
            ("f", &self.f),
            ("targets", &self.targets),
            ("epsilon", &self.epsilon),
            ("damping", &self.damping),
            ("sybil-scenario", &self.sybil_scenario),
            ("eval", &self.eval),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                s.set(key, v.clone());
            }
        }
        if self.lazy {
            s.set("lazy", "true");
        }
        s.resolve()
    }
}

fn run(cli: &Cli) -> Result<()> {
    let (flags, action): (&Flags, fn(&RunConfig) -> Result<()>) = match &cli.command {
        Command::Perturb(f) => (f, commands::perturb),
        Command::Metrics(f) => (f, commands::metrics),
        Command::Eval(f) => (f, commands::eval),
        Command::Report(f) => (f, commands::report),
    };
    let cfg = flags.resolve()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(|| action(&cfg))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
