use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};

use pdmod::cli::{self, CoordsMode, Input, Options, OutputFormat};
use pdmod::format::parse_operator_file;
use pdmod::Error;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Coords {
    Auto,
    Identity,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Table,
    Json,
}

/// Exact computations with linear differential operator matrices.
#[derive(Debug, Parser)]
#[command(name = "pdmod", version)]
struct Args {
    /// adjoint, compose, cc, involution, characters, tabular, symbol, rank, torsion,
    /// parametrize, min-parametrize, sequence or gallery
    command: String,
    /// Operator file; repeat for `compose` (left factor first).
    #[arg(long)]
    file: Vec<String>,
    /// Gallery operator name; repeat for `compose`. Files come before gallery operators.
    #[arg(long)]
    gallery: Vec<String>,
    /// Dimension for gallery operators.
    #[arg(long)]
    n: Option<usize>,
    /// euclid, minkowski or diag:a,b,...
    #[arg(long, default_value = "euclid")]
    metric: String,
    /// Order budget for completions (default: operator order + 5).
    #[arg(long)]
    max_order: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "auto")]
    coords: Coords,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    /// Number of compatibility stages for `sequence`.
    #[arg(long, default_value_t = 2)]
    steps: usize,
}

fn load(args: &Args) -> Result<Vec<Input>, Error> {
    let mut inputs = Vec::new();
    for path in &args.file {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
        inputs.push(Input { source: format!("file:{path}"), op: parse_operator_file(&text)? });
    }
    for name in &args.gallery {
        inputs.push(cli::gallery_input(name, args.n, &args.metric)?);
    }
    Ok(inputs)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let opts = Options {
        max_order: args.max_order,
        seed: args.seed,
        coords: match args.coords {
            Coords::Auto => CoordsMode::Auto,
            Coords::Identity => CoordsMode::Identity,
        },
        format: match args.format {
            Format::Table => OutputFormat::Table,
            Format::Json => OutputFormat::Json,
        },
        steps: args.steps,
    };
    let start = Instant::now();
    let report = match load(&args) {
        Ok(inputs) => cli::run_command(&args.command, &inputs, &opts),
        Err(e) => cli::error_report(&args.command, &e),
    };
    print!("{}", report.render(opts.format));
    eprintln!("elapsed: {:.3} s", start.elapsed().as_secs_f64());
    ExitCode::from(report.exit_code as u8)
}
