//! Command-line front end.
//!
//! Every command writes its result to stdout and ends with one status line,
//! `status=ok|fail|error key=value ...`. The exit code is 0 on `ok`, 1 on
//! `fail` and 2 on `error`. Rationals are exact `p/q` strings; only `--dt`
//! and `--t-end` take floating input.

mod commands;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::dynamics::DynError;
use crate::liealg::registry::{AlgebraRecord, Registry, RegistryError};
use crate::symkernel::{format_rational, parse_rational, ParamEnv, Rational};

/// Seed for every randomized spot check unless `--seed` is given.
pub const DEFAULT_SEED: u64 = 2024;

/// Environment variable naming the default registry file.
pub const REGISTRY_ENV: &str = "NAMBU_REGISTRY";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error("unknown algebra '{0}' (see `nambu list`)")]
    UnknownAlgebra(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Compute(String),
    #[error(transparent)]
    Dynamics(#[from] DynError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Parser, Debug)]
#[command(name = "nambu", version, about = "Multiplicative Nambu structures on four-dimensional real Lie groups")]
pub struct Cli {
    /// Registry file [default: the bundled registry]
    #[arg(long, global = true, env = REGISTRY_ENV)]
    pub registry: Option<PathBuf>,
    /// Parameter binding `name=p/q`; repeatable
    #[arg(long = "param", global = true, value_name = "NAME=P/Q", value_parser = parse_binding)]
    pub params: Vec<(String, Rational)>,
    /// Seed of the randomized spot checks
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output format of reports and listings
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report (or CSV) here instead of stdout
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List algebras, their brackets, subalgebras and printed structures
    List {
        #[arg(long)]
        algebra: Option<String>,
    },
    /// Solve the multiplicativity equations of one algebra
    Solve {
        #[arg(long)]
        algebra: String,
        /// 4 for the top-order structure, 3 for the subalgebra rows
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(3..=4))]
        order: u8,
        /// Only this subalgebra (order 3)
        #[arg(long)]
        sub: Option<String>,
    },
    /// Verify the tables against the registry
    Verify(VerifyArgs),
    /// Evaluate the bracket of a top-order structure on functions
    Bracket {
        /// Use `eta X_1 ^ ... ^ X_n` on this algebra's frame; coordinate fields otherwise
        #[arg(long)]
        algebra: Option<String>,
        /// The scalar eta [default: the algebra's printed structure, or 1]
        #[arg(long)]
        eta: Option<String>,
        /// One function per dimension
        #[arg(required = true, allow_hyphen_values = true)]
        functions: Vec<String>,
    },
    /// The Hamiltonian system on A^0_{4,9}
    Dynamics {
        #[command(subcommand)]
        action: DynamicsCommand,
    },
    /// Derive a left-invariant frame from the structure constants
    DeriveFrame {
        #[arg(long)]
        algebra: String,
        /// Second-kind ordering of the basis, 1-based, e.g. `4,3,2,1`
        #[arg(long, value_delimiter = ',')]
        ordering: Option<Vec<usize>>,
    },
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Every row of both tables
    #[arg(long)]
    pub all: bool,
    #[arg(long, value_enum)]
    pub table: Option<TableArg>,
    /// Restrict to these algebras; repeatable
    #[arg(long)]
    pub algebra: Vec<String>,
    /// `none` leaves out rows with free parameters
    #[arg(long, value_enum, default_value_t = SweepMode::Default)]
    pub param_sweep: SweepMode,
    /// Fundamental-identity trials per binding
    #[arg(long, default_value_t = 2)]
    pub trials: usize,
    /// Also judge every erratum; unsound ones count as failures
    #[arg(long)]
    pub errata: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TableArg {
    #[value(name = "I", alias = "1", alias = "i")]
    I,
    #[value(name = "II", alias = "2", alias = "ii")]
    II,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepMode {
    Default,
    None,
}

#[derive(Subcommand, Debug)]
pub enum DynamicsCommand {
    /// Exact checks: charge closure, the Casimir identity, the Pfaffian form
    Check {
        #[command(flatten)]
        model: ModelArgs,
        /// Random quadruples for the Pfaffian check
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
    /// Integrate the flow with RK4 and write a CSV trajectory
    Evolve {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3, allow_hyphen_values = true)]
        dt: f64,
        /// Evaluate the eta prefactor once at the initial point
        #[arg(long)]
        freeze_eta: bool,
        #[arg(long, default_value = "0", value_parser = parse_exact, allow_hyphen_values = true)]
        x1: Rational,
        #[arg(long, default_value = "0", value_parser = parse_exact, allow_hyphen_values = true)]
        x2: Rational,
        #[arg(long, default_value = "1", value_parser = parse_exact, allow_hyphen_values = true)]
        p1: Rational,
        #[arg(long, default_value = "0", value_parser = parse_exact, allow_hyphen_values = true)]
        p2: Rational,
    },
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Bracket scale, `{x1,x4} = alpha`
    #[arg(long, default_value = "1", value_parser = parse_exact, allow_hyphen_values = true)]
    pub alpha: Rational,
    /// Parameter `a` of the invariant metric
    #[arg(long, default_value = "1", value_parser = parse_exact, allow_hyphen_values = true)]
    pub metric_a: Rational,
    /// Constant of the structure `q4 (exp(-2 x4) - 1)`
    #[arg(long, default_value = "1", value_parser = parse_exact, allow_hyphen_values = true)]
    pub q4: Rational,
}

fn parse_exact(s: &str) -> Result<Rational, String> {
    parse_rational(s).ok_or_else(|| format!("expected an exact rational p/q, got '{s}'"))
}

fn parse_binding(s: &str) -> Result<(String, Rational), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=p/q, got '{s}'"))?;
    let k = k.trim();
    if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(format!("bad parameter name '{k}'"));
    }
    Ok((k.to_string(), parse_exact(v)?))
}

/// Final verdict of a command, printed as the status line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub ok: bool,
    pub fields: Vec<(String, String)>,
}

impl Outcome {
    fn new(ok: bool) -> Self {
        Self { ok, fields: Vec::new() }
    }

    fn with(mut self, k: &str, v: impl ToString) -> Self {
        self.fields.push((k.to_string(), v.to_string()));
        self
    }

    pub fn status_line(&self) -> String {
        let mut s = format!("status={}", if self.ok { "ok" } else { "fail" });
        for (k, v) in &self.fields {
            s.push_str(&format!(" {k}={v}"));
        }
        s
    }
}

/// Resolved global settings.
pub struct Context {
    pub registry: Registry,
    pub env: ParamEnv,
    pub seed: u64,
    pub format: Format,
    pub output: Option<PathBuf>,
}

impl Context {
    fn new(cli: &Cli) -> Result<Self, CliError> {
        let registry = match &cli.registry {
            Some(p) => Registry::load(p)?,
            None => Registry::bundled(),
        };
        let mut env = ParamEnv::new();
        for (k, v) in &cli.params {
            env.bind(k, v.clone());
        }
        Ok(Self {
            registry,
            env,
            seed: cli.seed,
            format: cli.format,
            output: cli.output.clone(),
        })
    }

    fn algebra(&self, id: &str) -> Result<&AlgebraRecord, CliError> {
        self.registry.find(id).ok_or_else(|| CliError::UnknownAlgebra(id.to_string()))
    }

    /// The bindings of `names`, all of which must be given.
    fn require(&self, what: &str, names: &[String]) -> Result<ParamEnv, CliError> {
        let mut env = ParamEnv::new();
        let mut missing = Vec::new();
        for n in names {
            match self.env.get(n) {
                Some(v) => env.bind(n, v.clone()),
                None => missing.push(n.as_str()),
            }
        }
        if !missing.is_empty() {
            let hint: Vec<String> = missing.iter().map(|n| format!("--param {n}=p/q")).collect();
            return Err(CliError::Usage(format!("{what} needs {}", hint.join(" "))));
        }
        Ok(env)
    }
}

/// Binding as a registry sweep entry.
fn sweep_entry(env: &ParamEnv, names: &[String]) -> BTreeMap<String, String> {
    names
        .iter()
        .filter_map(|n| env.get(n).map(|v| (n.clone(), format_rational(v))))
        .collect()
}

/// Runs one command; the caller prints the status line.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome, CliError> {
    let ctx = Context::new(cli)?;
    match &cli.command {
        Command::List { algebra } => commands::list(&ctx, algebra.as_deref(), out),
        Command::Solve { algebra, order, sub } => commands::solve(&ctx, algebra, *order, sub.as_deref(), out),
        Command::Verify(args) => commands::verify(&ctx, args, out),
        Command::Bracket { algebra, eta, functions } => {
            commands::bracket(&ctx, algebra.as_deref(), eta.as_deref(), functions, out)
        }
        Command::Dynamics { action } => commands::dynamics(&ctx, action, out, err),
        Command::DeriveFrame { algebra, ordering } => commands::derive(&ctx, algebra, ordering.as_deref(), out),
    }
}

/// Parses `args` (program name first), runs, and writes the status line.
/// Returns the exit code.
pub fn run_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
                return 0;
            }
            let _ = write!(err, "{text}");
            let _ = writeln!(out, "status=error kind=usage");
            return 2;
        }
    };
    // CSV on stdout keeps the status line out of the data.
    let status_to_err = matches!(&cli.command, Command::Dynamics { action: DynamicsCommand::Evolve { .. } }) && cli.output.is_none();
    let (line, code) = match run(&cli, out, err) {
        Ok(o) => (o.status_line(), if o.ok { 0 } else { 1 }),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            let kind = match e {
                CliError::Registry(_) => "registry",
                CliError::UnknownAlgebra(_) => "unknown-algebra",
                CliError::Usage(_) => "usage",
                CliError::Compute(_) => "compute",
                CliError::Dynamics(_) => "dynamics",
                CliError::Io(_) => "io",
            };
            (format!("status=error kind={kind}"), 2)
        }
    };
    if status_to_err {
        let _ = writeln!(err, "{line}");
    } else {
        let _ = writeln!(out, "{line}");
    }
    code
}

/// Entry point of the binary.
pub fn main() -> ExitCode {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = run_args(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    ExitCode::from(code)
}
