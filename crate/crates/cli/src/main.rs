use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use wco_cli::commands::{self, parse_windows, Command, Format, Options, Outcome, EXIT_ORACLE, EXIT_PARSE};
use wco_cli::suite::{render_table, run_suite, Status};
use wco_core::oracle::Check;
use wco_core::rational;

#[derive(Parser)]
#[command(name = "wco", version, about = "Exact analysis of weighted composition operators on ℓp")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[arg(long, value_enum, default_value = "text", global = true)]
    format: FormatArg,
    /// Absolute width of norm enclosures, as a rational.
    #[arg(long, global = true, value_name = "RATIONAL")]
    enclosure_width: Option<String>,
    /// Run every loop on one thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckArg {
    Kernel,
    Range,
    All,
}

#[derive(Subcommand)]
enum Cmd {
    /// Full report.
    Analyze {
        spec: String,
        /// Also run the truncation-matrix oracle.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value = "16,32,64")]
        windows: String,
    },
    /// Kernel dimension of a power, optionally with basis vectors.
    Kernel {
        spec: String,
        #[arg(long, default_value_t = 1)]
        power: u32,
        /// List the first L basis vectors.
        #[arg(long, value_name = "L")]
        basis: Option<usize>,
    },
    /// Range co-dimension and membership.
    Range {
        spec: String,
        /// Coordinates "<index>:<rational>,…" of a vector to test.
        #[arg(long, value_name = "COORDS")]
        member: Option<String>,
    },
    /// Fredholm index.
    Fredholm { spec: String },
    /// Image of a finitely supported vector.
    Apply {
        spec: String,
        /// Coordinates "<index>:<rational>,…"; unlisted entries are zero.
        #[arg(long, value_name = "COORDS")]
        vector: String,
    },
    /// Cross-check against truncation matrices.
    Oracle {
        spec: String,
        #[arg(long, default_value = "16,32,64")]
        windows: String,
        #[arg(long, value_enum, default_value = "all")]
        check: CheckArg,
    },
    /// Run the embedded fixture suite.
    PaperSuite,
}

fn emit(o: Outcome) -> ExitCode {
    print!("{}", o.stdout);
    eprint!("{}", o.stderr);
    ExitCode::from(o.code as u8)
}

fn fail(msg: String) -> ExitCode {
    emit(Outcome { code: EXIT_PARSE, stdout: String::new(), stderr: format!("{msg}\n") })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut opts = Options {
        format: match cli.format {
            FormatArg::Text => Format::Text,
            FormatArg::Json => Format::Json,
        },
        ..Options::default()
    };
    if let Some(w) = &cli.enclosure_width {
        match rational::parse(w) {
            Some(q) if q > rational::int(0) => opts = opts.with_width(q),
            _ => return fail(format!("--enclosure-width: expected a positive rational, found '{w}'")),
        }
    }
    if cli.sequential {
        opts = opts.with_exec(wco_core::Exec::Sequential);
    }
    let windows = |s: &str| parse_windows(s).map_err(|e| format!("--windows: {e}"));
    let (cmd, path) = match cli.command {
        Cmd::PaperSuite => {
            let rows = run_suite(opts.tolerance.exec);
            let failed = rows.iter().any(|r| r.status == Status::Fail);
            let stdout = match opts.format {
                Format::Text => render_table(&rows),
                Format::Json => serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n",
            };
            return emit(Outcome { code: if failed { EXIT_ORACLE } else { 0 }, stdout, stderr: String::new() });
        }
        Cmd::Analyze { spec, oracle, windows: w } => {
            let oracle = if oracle {
                match windows(&w) {
                    Ok(v) => Some(v),
                    Err(e) => return fail(e),
                }
            } else {
                None
            };
            (Command::Analyze { oracle }, spec)
        }
        Cmd::Kernel { spec, power, basis } => (Command::Kernel { power, basis }, spec),
        Cmd::Range { spec, member } => (Command::Range { member }, spec),
        Cmd::Fredholm { spec } => (Command::Fredholm, spec),
        Cmd::Apply { spec, vector } => (Command::Apply { vector }, spec),
        Cmd::Oracle { spec, windows: w, check } => {
            let windows = match windows(&w) {
                Ok(v) => v,
                Err(e) => return fail(e),
            };
            let check = match check {
                CheckArg::Kernel => Check::Kernel,
                CheckArg::Range => Check::Range,
                CheckArg::All => Check::All,
            };
            (Command::Oracle { windows, check }, spec)
        }
    };
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => return fail(format!("{path}: {e}")),
    };
    emit(commands::run(&cmd, &text, &opts))
}
