mod commands;
mod config;
mod error;
mod shard;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use emsr_core::{EmsrParams, InnerParams, OuterParams};

#[derive(Parser)]
#[command(
    name = "emsr",
    version,
    about = "epsilon-MSR erasure codes: encode, repair, decode, analyse"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Code parameters. Defaults give the 25-block desk instance.
#[derive(Args, Clone, Debug)]
pub struct CodeArgs {
    /// Inner code length
    #[arg(long, default_value_t = 5)]
    n: usize,
    /// Inner code dimension
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Inner repair degree (helpers per inner repair)
    #[arg(long, default_value_t = 3)]
    t: usize,
    /// Outer alphabet size (a prime)
    #[arg(long, default_value_t = 5)]
    q: u32,
    /// Outer code length
    #[arg(long = "N", default_value_t = 4)]
    big_n: usize,
    /// Outer code dimension
    #[arg(long = "K", default_value_t = 2)]
    big_k: usize,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// Field modulus; searched for when omitted
    #[arg(long)]
    p: Option<u64>,
}

impl CodeArgs {
    fn params(&self) -> EmsrParams {
        EmsrParams {
            inner: InnerParams {
                n: self.n,
                k: self.k,
                t: self.t,
            },
            outer: OuterParams {
                q: self.q,
                length: self.big_n,
                dimension: self.big_k,
            },
            epsilon: self.eps,
            modulus: self.p,
        }
    }
}

#[derive(Args, Clone, Debug)]
struct OuterArgs {
    #[arg(long, default_value_t = 5)]
    q: u32,
    #[arg(long = "N", default_value_t = 4)]
    big_n: usize,
    #[arg(long = "K", default_value_t = 2)]
    big_k: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a code and print (or save) its descriptor
    Build {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split a file into one shard per block
    Encode {
        file: PathBuf,
        #[arg(long)]
        dir: PathBuf,
        #[command(flatten)]
        code: CodeArgs,
    },
    /// Simulate the loss of a block by deleting its shard
    Fail {
        block: usize,
        #[arg(long)]
        dir: PathBuf,
    },
    /// Rebuild a block's shard from helpers and report the download
    Repair {
        block: usize,
        #[arg(long)]
        dir: PathBuf,
        /// Explicit helper blocks (comma separated)
        #[arg(long, value_delimiter = ',')]
        helpers: Option<Vec<usize>>,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
    },
    /// Reassemble the original file from any M - r shards
    Decode {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the MDS property by rank of parity submatrices
    VerifyMds {
        #[command(flatten)]
        code: CodeArgs,
        /// Check every r-subset of blocks (the default)
        #[arg(long, conflicts_with = "sample")]
        exhaustive: bool,
        /// Check this many random r-subsets instead
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Weight distribution and full-weight count of a Reed-Solomon outer code
    CountFullWeight {
        #[command(flatten)]
        outer: OuterArgs,
    },
    /// Lower bound on full-weight codewords of a genus-g outer code
    FwBound {
        #[arg(long)]
        genus: u64,
        #[command(flatten)]
        outer: OuterArgs,
    },
    /// Outer-code family parameters for a target (r, epsilon, u)
    PlanAg {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        u: u32,
    },
    /// Run fail-and-repair trials on an in-memory cluster
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Per-trial CSV report (overrides the config)
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Full JSON report (overrides the config)
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = error::CliError::BadArguments(e.kind().to_string());
            eprintln!("{}", err.to_json());
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    match commands::run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
