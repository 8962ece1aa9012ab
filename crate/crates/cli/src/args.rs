use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Theory {
    Au,
    F,
    G,
    Free,
    H,
}

#[derive(Debug, Parser)]
#[command(name = "hashcol", version, about = "Attack search for protocols using collision-prone hash functions")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand. Unset values fall back to the config
/// file, then to the built-in defaults.
#[derive(Debug, Default, Args)]
pub struct GlobalArgs {
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Letters the word solver may peel off a single variable.
    #[arg(long, global = true, value_name = "N")]
    pub max_word_len: Option<usize>,
    /// Search states per word-equation problem.
    #[arg(long, global = true, value_name = "N")]
    pub max_states: Option<usize>,
    #[arg(long, global = true, value_name = "N")]
    pub max_branches: Option<usize>,
    /// Largest number of hash classes tried by the reduction.
    #[arg(long, global = true, value_name = "N")]
    pub max_k: Option<usize>,
    /// Treat h as a free function symbol.
    #[arg(long, global = true)]
    pub no_collisions: bool,
    #[arg(long, global = true, value_name = "N")]
    pub sessions: Option<usize>,
    /// Recorded in the report; the search itself is deterministic.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// `key = value` file with defaults for the flags above.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Include wall-clock time in reports.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for an attack on a protocol narration.
    Analyze { file: PathBuf },
    /// Decide a constraint file for one intruder.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "h")]
        theory: Theory,
    },
    /// Decide whether a goal is derivable from a knowledge set.
    Derive {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "h")]
        theory: Theory,
    },
    /// Solve a word-equation system with constant restrictions.
    Unify { file: PathBuf },
    /// Print the branches of the hash reduction of a constraint file.
    Reduce { file: PathBuf },
}
