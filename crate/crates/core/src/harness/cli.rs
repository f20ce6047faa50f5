//! `tabres run` and `tabres bench`.
//!
//! Exit codes: 0 when every query ran to a verdict (`SUCCESS` or
//! `EXHAUSTED`), 1 on unreadable or unparsable input, 2 when a step or
//! size limit cut a run short, 64 on usage errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use super::bench::{run_bench, write_csv, BenchRow, BenchSpec, EngineChoice, Family, CSV_HEADER};
use crate::engine::{Engine, InstanceOrder, Mode, RunLimits, SolveOptions};
use crate::program::Program;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_LIMIT: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

pub const TRACE_HEADER: &str = "# trace-v1";

#[derive(Parser, Debug)]
#[command(name = "tabres", version, about = "Typeclass resolution: SLD and tabled engines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve every query in a program file.
    Run(RunArgs),
    /// Sweep a benchmark family and write one CSV row per measurement.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EngineArg {
    Sld,
    Tabled,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BenchEngineArg {
    Sld,
    Tabled,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OrderArg {
    Decl,
    Reverse,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StatsArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Diamond,
    Append,
    Cycle,
}

#[derive(Args, Debug)]
struct RunArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "tabled")]
    engine: EngineArg,
    /// Enumerate every answer instead of stopping at the first.
    #[arg(long)]
    all: bool,
    #[arg(long, default_value_t = RunLimits::default().max_steps)]
    max_steps: u64,
    #[arg(long, default_value_t = RunLimits::default().max_term_size)]
    max_term_size: u64,
    #[arg(long, value_enum, default_value = "decl")]
    instance_order: OrderArg,
    /// Keep answers that differ only in their proof.
    #[arg(long)]
    distinct_proofs: bool,
    #[arg(long)]
    trace: bool,
    #[arg(long, value_enum)]
    stats: Option<StatsArg>,
    /// Print the final answer table (tabled engine).
    #[arg(long)]
    dump_table: bool,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(value_enum)]
    family: FamilyArg,
    /// Comma-separated, strictly ascending. Ignored for `cycle`.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    sizes: Vec<u64>,
    #[arg(long, value_enum, default_value = "both")]
    engine: BenchEngineArg,
    #[arg(long, default_value_t = 1)]
    reps: u32,
    #[arg(long, default_value_t = 100_000_000)]
    max_steps: u64,
    #[arg(long, default_value_t = 100_000_000)]
    max_term_size: u64,
    /// CSV destination; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(args, out, err),
        Command::Bench(args) => cmd_bench(args, out, err),
    };
    result.unwrap_or_else(|e| {
        let _ = writeln!(err, "error: {e}");
        EXIT_INPUT
    })
}

fn cmd_run(args: RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> std::io::Result<i32> {
    let text = match fs::read_to_string(&args.file) {
        Ok(t) => t,
        Err(e) => {
            writeln!(err, "error: {}: {e}", args.file.display())?;
            return Ok(EXIT_INPUT);
        }
    };
    let program = match Program::parse(&text) {
        Ok(p) => p,
        Err(e) => {
            writeln!(err, "{}:{e}", args.file.display())?;
            return Ok(EXIT_INPUT);
        }
    };
    let engine = match args.engine {
        EngineArg::Sld => Engine::Sld,
        EngineArg::Tabled => Engine::Tabled,
    };
    let opts = SolveOptions {
        limits: RunLimits { max_steps: args.max_steps, max_term_size: args.max_term_size },
        mode: if args.all { Mode::All } else { Mode::First },
        order: match args.instance_order {
            OrderArg::Decl => InstanceOrder::Declaration,
            OrderArg::Reverse => InstanceOrder::Reverse,
        },
        distinct_proofs: args.distinct_proofs,
        trace: args.trace,
    };

    let mut code = EXIT_OK;
    let mut rows = Vec::new();
    for (i, query) in program.queries().iter().enumerate() {
        let outcome = engine.solve(&program, query, &opts);
        if args.trace {
            writeln!(out, "{TRACE_HEADER}")?;
            for event in &outcome.trace {
                writeln!(out, "{event}")?;
            }
        }
        for answer in &outcome.answers {
            writeln!(out, "{answer}")?;
        }
        if args.dump_table {
            match &outcome.table {
                Some(table) => write!(out, "{table}")?,
                None => writeln!(err, "note: --dump-table has no effect with --engine sld")?,
            }
        }
        writeln!(err, "{}: {}", query.goal.display_with(|m| query.var_names.get(m.id as usize).map(|n| format!("?{n}"))), outcome.verdict)?;
        if outcome.verdict.is_limit() {
            code = EXIT_LIMIT;
        }
        rows.push(BenchRow::from_outcome(engine, "run", i as u64 + 1, 0, &outcome));
    }
    match args.stats {
        Some(StatsArg::Csv) => {
            write_csv(&rows, &mut *out).map_err(std::io::Error::other)?;
        }
        Some(StatsArg::Json) => {
            for row in &rows {
                writeln!(out, "{}", serde_json::to_string(row).map_err(std::io::Error::other)?)?;
            }
        }
        None => {}
    }
    Ok(code)
}

fn cmd_bench(args: BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> std::io::Result<i32> {
    let spec = BenchSpec {
        family: match args.family {
            FamilyArg::Diamond => Family::Diamond,
            FamilyArg::Append => Family::Append,
            FamilyArg::Cycle => Family::Cycle,
        },
        sizes: args.sizes,
        engine: match args.engine {
            BenchEngineArg::Sld => EngineChoice::Sld,
            BenchEngineArg::Tabled => EngineChoice::Tabled,
            BenchEngineArg::Both => EngineChoice::Both,
        },
        limits: RunLimits { max_steps: args.max_steps, max_term_size: args.max_term_size },
        repetitions: args.reps,
    };
    let rows = match run_bench(&spec) {
        Ok(rows) => rows,
        Err(e) => {
            writeln!(err, "error: {e}")?;
            return Ok(EXIT_USAGE);
        }
    };
    match &args.out {
        Some(path) => {
            let file = fs::File::create(path)?;
            write_csv(&rows, file).map_err(std::io::Error::other)?;
            writeln!(err, "wrote {} rows ({CSV_HEADER}) to {}", rows.len(), path.display())?;
        }
        None => write_csv(&rows, &mut *out).map_err(std::io::Error::other)?,
    }
    Ok(EXIT_OK)
}
