use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use semireg_cli::{execute, Command, Format, Options, EXIT_SCHEMA};

#[derive(Parser)]
#[command(name = "semireg", version, about = "Exact Lie pair, Atiyah class and semiregularity computations")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Cohomology of an algebroid, optionally with module coefficients.
    Cohomology(Args),
    /// Leray filtration, Bott module and E1 page of a pair.
    Pair(Args),
    /// Atiyah class of a pair and module, or of a two-chart model.
    Atiyah(Args),
    /// Deformations, obstructions and semiregularity certificates.
    Deform(Args),
    /// Whitney integration checks and Čech cohomology of a two-chart model.
    Tot(Args),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(clap::Args)]
struct Args {
    /// Instance file, `-` for stdin.
    #[arg(long)]
    input: PathBuf,
    /// Report destination, `-` for stdout.
    #[arg(long, default_value = "-")]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    /// Exponent window `LO:HI` of the chart tier.
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
    window: Option<(i64, i64)>,
    /// Truncation level of Tot elements.
    #[arg(long, default_value_t = semireg::tot::DEFAULT_NMAX)]
    nmax: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_window(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo = lo.trim().parse().map_err(|_| format!("bad LO {lo:?}"))?;
    let hi = hi.trim().parse().map_err(|_| format!("bad HI {hi:?}"))?;
    if lo > hi {
        return Err("LO must not exceed HI".into());
    }
    Ok((lo, hi))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, args) = match cli.command {
        Cmd::Cohomology(a) => (Command::Cohomology, a),
        Cmd::Pair(a) => (Command::Pair, a),
        Cmd::Atiyah(a) => (Command::Atiyah, a),
        Cmd::Deform(a) => (Command::Deform, a),
        Cmd::Tot(a) => (Command::Tot, a),
    };
    let mut input = Vec::new();
    let read = if args.input.as_os_str() == "-" {
        std::io::stdin().read_to_end(&mut input).map(|_| ())
    } else {
        std::fs::read(&args.input).map(|b| input = b)
    };
    if let Err(e) = read {
        eprintln!("semireg: cannot read {}: {e}", args.input.display());
        return ExitCode::from(EXIT_SCHEMA as u8);
    }
    let format = match args.format {
        FormatArg::Text => Format::Text,
        FormatArg::Json => Format::Json,
    };
    let opts = Options { window: args.window, nmax: args.nmax, seed: args.seed };
    let (code, report) = execute(cmd, &input, &opts, format);
    let written = if args.output.as_os_str() == "-" {
        std::io::stdout().write_all(report.as_bytes())
    } else {
        std::fs::write(&args.output, report)
    };
    if let Err(e) = written {
        eprintln!("semireg: cannot write {}: {e}", args.output.display());
        return ExitCode::from(EXIT_SCHEMA as u8);
    }
    if code != 0 {
        eprintln!("semireg: {} failed with exit code {code}", cmd.name());
    }
    ExitCode::from(code as u8)
}
