use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use smtpd::analysis::{PrivacyStrategy, PrivacyTarget};
use smtpd::attacks::Attack;
use smtpd::channels::adversaries::AdversaryKind;

mod commands;
mod output;


#[derive(Parser)]
#[command(name = "smtpd", version, about = "Experiments on message transmission by public discussion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo failure rate against the analytic bound.
    Reliability(ReliabilityArgs),
    /// Exhaustive view-distance check at tiny parameters.
    Privacy(PrivacyArgs),
    /// Exact attack demonstration on a toy protocol.
    Attack(AttackArgs),
    /// Bit accounting of one untampered execution, optionally over a sweep of message lengths.
    Rate(RateArgs),
    /// Print a built-in toy protocol as JSON, or list the built-ins.
    Toy(ToyArgs),
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, env = "SMTPD_SEED", default_value_t = 0)]
    seed: u64,
    /// Write records here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Omit timestamps so reruns are byte-identical.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct Shape {
    /// Number of wires.
    #[arg(long)]
    n: Option<usize>,
    /// Corruption budget, default n - 1.
    #[arg(long)]
    t: Option<usize>,
    /// Tag and pad length.
    #[arg(long, conflicts_with = "kappa")]
    l: Option<usize>,
    /// Security parameter; derives l from the reliability bound.
    #[arg(long)]
    kappa: Option<usize>,
}

#[derive(Args)]
struct ReliabilityArgs {
    #[command(flatten)]
    shape: Shape,
    #[arg(long, default_value_t = 64)]
    m: usize,
    #[arg(long, default_value = "substitute", value_parser = parse_from_str::<AdversaryKind>)]
    adversary: AdversaryKind,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Emit only the summary record.
    #[arg(long)]
    summary_only: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct PrivacyArgs {
    #[command(flatten)]
    shape: Shape,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value = "eavesdrop", value_parser = parse_from_str::<PrivacyStrategy>)]
    adversary: PrivacyStrategy,
    #[arg(long, default_value = "pi1", value_parser = parse_from_str::<PrivacyTarget>)]
    protocol: PrivacyTarget,
    /// Run every execution through the channel simulator instead of the reduced view.
    #[arg(long)]
    raw: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long, value_parser = parse_from_str::<Attack>)]
    demo: Attack,
    /// Built-in toy name or path to a toy JSON file. Defaults to a toy suited to the demo.
    #[arg(long)]
    toy: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct RateArgs {
    #[command(flatten)]
    shape: Shape,
    /// Message lengths, comma separated.
    #[arg(long, value_delimiter = ',')]
    m: Vec<usize>,
    /// Sweep m over powers of two, `LO:HI` in log2.
    #[arg(long, value_parser = parse_sweep)]
    sweep_log2: Option<(u32, u32)>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ToyArgs {
    name: Option<String>,
}

fn parse_from_str<T: std::str::FromStr<Err = String>>(s: &str) -> Result<T, String> {
    s.parse()
}

fn parse_sweep(s: &str) -> Result<(u32, u32), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo: u32 = lo.parse().map_err(|e| format!("{e}"))?;
    let hi: u32 = hi.parse().map_err(|e| format!("{e}"))?;
    if lo < 1 || lo > hi || hi > 40 {
        return Err(format!("need 1 <= LO <= HI <= 40, got {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Reliability(a) => commands::reliability(a),
        Command::Privacy(a) => commands::privacy(a),
        Command::Attack(a) => commands::attack(a),
        Command::Rate(a) => commands::rate(a),
        Command::Toy(a) => commands::toy(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
