//! Command-line parsing into a [`RunSpec`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Table1,
    Table2,
    PoissonCheck,
    CorrCheck,
    Exact,
    Asymptotics,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Table1 => "table1",
            Command::Table2 => "table2",
            Command::PoissonCheck => "poisson-check",
            Command::CorrCheck => "corr-check",
            Command::Exact => "exact",
            Command::Asymptotics => "asymptotics",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Everything one invocation needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub command: Command,
    pub n_list: Vec<usize>,
    pub p: Option<f64>,
    pub reps: Option<u64>,
    pub seed: u64,
    pub t_grid: Vec<f64>,
    pub format: Format,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

pub const DEFAULT_SEED: u64 = 42;
pub const TABLE_N_LIST: [usize; 6] = [10, 20, 50, 100, 1000, 10_000];
pub const POISSON_T_GRID: [f64; 4] = [-1.0, 0.0, 1.0, 2.0];
pub const TABLE_P: f64 = 2.0 / 3.0;

#[derive(Parser, Debug)]
#[command(
    name = "roundrobin",
    version,
    about = "Winner's-score distributions in round-robin tournaments with draws"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Maximum score: simulation versus Gumbel-limit moments.
    Table1(Flags),
    /// Second and third largest scores: simulation versus limit moments.
    Table2(Flags),
    /// Exceedance counts against the Poisson law.
    PoissonCheck(Flags),
    /// Correlation of two players' scores.
    CorrCheck(Flags),
    /// Exact distributions by convolution and full enumeration (n <= 6).
    Exact(Flags),
    /// Normalizing constants, limit CDFs and moment approximations.
    Asymptotics(Flags),
}

#[derive(Args, Debug)]
struct Flags {
    /// Player counts (repeatable or comma separated).
    #[arg(long = "n", value_delimiter = ',')]
    n: Vec<usize>,
    /// Draw probability, as a decimal or a fraction such as 2/3.
    #[arg(long, value_parser = parse_probability)]
    p: Option<f64>,
    /// Replications per n (default depends on n).
    #[arg(long)]
    reps: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Threshold parameters t (repeatable or comma separated).
    #[arg(long = "t", value_delimiter = ',', allow_negative_numbers = true)]
    t: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads for the simulation.
    #[arg(long)]
    threads: Option<usize>,
    /// Output file (standard output when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_probability(s: &str) -> Result<f64, String> {
    let value = match s.split_once('/') {
        Some((a, b)) => {
            let num: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
            let den: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
            num / den
        }
        None => s.trim().parse().map_err(|e| format!("{e}"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("{s} is not a finite number"))
    }
}

impl RunSpec {
    /// Parses a full argument list (including the program name).
    pub fn parse_from<I, T>(args: I) -> Result<RunSpec, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<std::ffi::OsString> + Clone,
    {
        let cli = Cli::try_parse_from(args)?;
        let (command, f) = match cli.command {
            Sub::Table1(f) => (Command::Table1, f),
            Sub::Table2(f) => (Command::Table2, f),
            Sub::PoissonCheck(f) => (Command::PoissonCheck, f),
            Sub::CorrCheck(f) => (Command::CorrCheck, f),
            Sub::Exact(f) => (Command::Exact, f),
            Sub::Asymptotics(f) => (Command::Asymptotics, f),
        };
        Ok(RunSpec {
            command,
            n_list: f.n,
            p: f.p,
            reps: f.reps,
            seed: f.seed,
            t_grid: f.t,
            format: f.format,
            threads: f.threads,
            out: f.out,
        })
    }

    /// Canonical argument list (without program name) that parses back to
    /// an equal spec.
    pub fn to_flags(&self) -> Vec<String> {
        let mut args = vec![self.command.name().to_string()];
        if !self.n_list.is_empty() {
            let list: Vec<String> = self.n_list.iter().map(|n| n.to_string()).collect();
            args.push(format!("--n={}", list.join(",")));
        }
        if let Some(p) = self.p {
            args.push(format!("--p={p:?}"));
        }
        if let Some(r) = self.reps {
            args.push(format!("--reps={r}"));
        }
        args.push(format!("--seed={}", self.seed));
        if !self.t_grid.is_empty() {
            let list: Vec<String> = self.t_grid.iter().map(|t| format!("{t:?}")).collect();
            args.push(format!("--t={}", list.join(",")));
        }
        args.push(format!("--format={}", self.format.name()));
        if let Some(k) = self.threads {
            args.push(format!("--threads={k}"));
        }
        if let Some(out) = &self.out {
            args.push(format!("--out={}", out.display()));
        }
        args
    }

    /// `p`, falling back to the table default for the table commands.
    pub fn resolved_p(&self) -> Result<f64, CliError> {
        match (self.p, self.command) {
            (Some(p), _) => Ok(p),
            (None, Command::Table1 | Command::Table2) => Ok(TABLE_P),
            (None, c) => Err(CliError::Usage(format!("{} requires --p", c.name()))),
        }
    }

    pub fn resolved_n_list(&self) -> Result<Vec<usize>, CliError> {
        match (self.n_list.is_empty(), self.command) {
            (false, _) => Ok(self.n_list.clone()),
            (true, Command::Table1 | Command::Table2) => Ok(TABLE_N_LIST.to_vec()),
            (true, c) => Err(CliError::Usage(format!("{} requires --n", c.name()))),
        }
    }

    pub fn resolved_t_grid(&self) -> Vec<f64> {
        if !self.t_grid.is_empty() {
            return self.t_grid.clone();
        }
        match self.command {
            Command::Exact => vec![0.0],
            _ => POISSON_T_GRID.to_vec(),
        }
    }
}
