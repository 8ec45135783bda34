use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use edss::protocols::ProtocolKind;
use edss::sweep::{describe, parse_config, parse_pairs, run_checks, run_sweep, CheckSuite};
use edss::Error;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_INVALID_INPUT: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "edss", version, about = "Entanglement distribution by separable states under noisy channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep one noise parameter and write CSV (and optionally SVG) curves.
    Sweep(Box<SweepArgs>),
    /// Run a verification suite: all, identity, separability or closed_form.
    Check { suite: String },
    /// Print the step sequence, partitions and closed forms of a protocol.
    Describe { protocol: String },
}

/// Flags override values read from `--config`.
#[derive(Args)]
struct SweepArgs {
    /// Flat `key = value` file with the same keys as the long flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// two_qubit, ghz or qudit.
    #[arg(long)]
    protocol: Option<String>,
    /// prob or det.
    #[arg(long)]
    mode: Option<String>,
    /// depolarizing, amplitude_damping or canonical.
    #[arg(long)]
    channel: Option<String>,
    /// Qudit dimension: `3`, `2,3,4` or `2..6`.
    #[arg(long)]
    d: Option<String>,
    /// Largest accepted qudit dimension.
    #[arg(long)]
    max_d: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda3: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t3: Option<String>,
    /// Swept parameter: p, gamma, or a canonical parameter.
    #[arg(long)]
    param: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    from: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    to: Option<String>,
    #[arg(long)]
    points: Option<String>,
    #[arg(long)]
    csv: Option<String>,
    #[arg(long)]
    svg: Option<String>,
    /// Comma-separated: identity, separability, closed_form.
    #[arg(long)]
    check: Option<String>,
}

impl SweepArgs {
    fn pairs(&self) -> Result<BTreeMap<String, String>, Error> {
        let mut pairs = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                parse_config(&text)?
            }
            None => BTreeMap::new(),
        };
        let flags = [
            ("protocol", &self.protocol),
            ("mode", &self.mode),
            ("channel", &self.channel),
            ("d", &self.d),
            ("max_d", &self.max_d),
            ("lambda1", &self.lambda1),
            ("lambda2", &self.lambda2),
            ("lambda3", &self.lambda3),
            ("t3", &self.t3),
            ("param", &self.param),
            ("from", &self.from),
            ("to", &self.to),
            ("points", &self.points),
            ("csv", &self.csv),
            ("svg", &self.svg),
            ("check", &self.check),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                pairs.insert(k.to_string(), v.clone());
            }
        }
        Ok(pairs)
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(match e {
        Error::Io(_) => EXIT_IO,
        _ => EXIT_INVALID_INPUT,
    })
}

fn sweep(args: &SweepArgs) -> ExitCode {
    let spec = match args.pairs().and_then(|p| parse_pairs(&p)) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    match run_sweep(&spec) {
        Ok(out) => {
            println!("wrote {} rows to {}", out.rows.len(), spec.csv.display());
            if let Some(svg) = &spec.svg {
                println!("wrote {}", svg.display());
            }
            for f in &out.failures {
                println!(
                    "row {} ({} = {}): {} check failed, deviation {:e}: {}",
                    f.row, spec.param, out.rows[f.row].parameter, f.check, f.deviation, f.detail
                );
            }
            if out.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CHECK_FAILED)
            }
        }
        Err(e) => fail(&e),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INVALID_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Sweep(args) => sweep(&args),
        Command::Check { suite } => match suite.parse::<CheckSuite>() {
            Ok(s) => {
                let report = run_checks(s);
                print!("{report}");
                if report.passed() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(EXIT_CHECK_FAILED)
                }
            }
            Err(e) => fail(&e),
        },
        Command::Describe { protocol } => match protocol.parse::<ProtocolKind>() {
            Ok(k) => {
                print!("{}", describe(k));
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
    }
}
