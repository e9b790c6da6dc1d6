use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand as ClapSubcommand};
use l1sketch::{run, ExperimentConfig, Subcommand};

/// Exit status when a run completed but an asserted bound did not hold.
const EXIT_BOUND_VIOLATED: u8 = 3;
/// Exit status for invalid configuration or any other error.
const EXIT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "l1sketch", version, about = "Sparse recovery experiments: codebooks, bounds, protocol simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Root seed; every artifact is a function of the config and this seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of trials (samples or instances, depending on the experiment).
    #[arg(long)]
    trials: Option<u64>,
    /// Write the artifact here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Build a greedy q-ary code and write its binary expansion.
    Codebook {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        k: Option<String>,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long = "rejection-budget")]
        rejection_budget: Option<String>,
    },
    /// Tabulate the deterministic row lower bound; n, k, C take comma lists.
    Bounds {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        k: Option<String>,
        #[arg(long = "C")]
        c: Option<String>,
    },
    /// Nearest-codeword recovery from Gaussian sketches under uniform ℓ1 noise.
    RecoverExperiment {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        k: Option<String>,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        m: Option<String>,
        #[arg(long)]
        safety: Option<String>,
        /// Multiplies the noise radius; values above 1 are not asserted.
        #[arg(long = "noise-scale")]
        noise_scale: Option<String>,
        #[arg(long = "min-success")]
        min_success: Option<String>,
    },
    /// Simulate the Augmented Indexing protocol against a recovery oracle.
    ProtocolSim {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        k: Option<String>,
        #[arg(long = "C")]
        c: Option<String>,
        /// topk, nn or zero.
        #[arg(long)]
        oracle: Option<String>,
        /// Sketch rows (defaults to n, or n/2 for the nn oracle).
        #[arg(long)]
        rows: Option<String>,
    },
    /// Monte Carlo and exact checks of the supporting lemmas.
    VerifyLemmas {
        #[command(flatten)]
        common: Common,
        #[arg(long = "matrix-trials")]
        matrix_trials: Option<String>,
    },
    /// Discretize random orthonormal matrices and check the shadow-vector bounds.
    DiscretizeCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        m: Option<String>,
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        b: Option<String>,
    },
}

impl Command {
    fn split(self) -> (Subcommand, Common, Vec<(&'static str, Option<String>)>) {
        match self {
            Command::Codebook { common, q, k, eps, rejection_budget } => (
                Subcommand::Codebook,
                common,
                vec![("q", q), ("k", k), ("eps", eps), ("rejection-budget", rejection_budget)],
            ),
            Command::Bounds { common, n, k, c } => (Subcommand::Bounds, common, vec![("n", n), ("k", k), ("C", c)]),
            Command::RecoverExperiment { common, q, k, eps, m, safety, noise_scale, min_success } => (
                Subcommand::RecoverExperiment,
                common,
                vec![
                    ("q", q),
                    ("k", k),
                    ("eps", eps),
                    ("m", m),
                    ("safety", safety),
                    ("noise-scale", noise_scale),
                    ("min-success", min_success),
                ],
            ),
            Command::ProtocolSim { common, n, k, c, oracle, rows } => (
                Subcommand::ProtocolSim,
                common,
                vec![("n", n), ("k", k), ("C", c), ("oracle", oracle), ("rows", rows)],
            ),
            Command::VerifyLemmas { common, matrix_trials } => {
                (Subcommand::VerifyLemmas, common, vec![("matrix-trials", matrix_trials)])
            }
            Command::DiscretizeCheck { common, m, n, b } => {
                (Subcommand::DiscretizeCheck, common, vec![("m", m), ("n", n), ("b", b)])
            }
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<bool> {
    let (subcommand, common, params) = cli.command.split();
    let mut config = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::new(),
    };
    if let Some(seed) = common.seed {
        config.set("seed", seed);
    }
    if let Some(trials) = common.trials {
        config.set("trials", trials);
    }
    for (key, value) in params {
        if let Some(v) = value {
            config.set(key, v);
        }
    }

    let outcome = run(subcommand, &config).with_context(|| format!("{} failed", subcommand.name()))?;
    match &common.out {
        Some(path) => {
            fs::write(path, &outcome.artifact).with_context(|| format!("writing {}", path.display()))?;
            write_stdout(&outcome.summary)?;
        }
        None => {
            write_stdout(&outcome.artifact)?;
            eprint!("{}", outcome.summary);
        }
    }
    Ok(outcome.bounds_held)
}

fn write_stdout(text: &str) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: an asserted bound was violated");
            ExitCode::from(EXIT_BOUND_VIOLATED)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
