//! Command-line front end.
//!
//! Data goes to `--out` or standard output; run reports and progress go to
//! standard error. Exit codes: 0 success, 1 usage or configuration error,
//! 2 verification mismatch, 3 I/O failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::catalog::build_class_catalog;
use crate::deficiency::{deficiency_set, DeficiencyMode};
use crate::error::Error;
use crate::io::{read_solutions, OutputFormat};
use crate::lattice::WaveVector;
use crate::oracle::{brute_force, compare, ORACLE_MAX_DOMAIN};
use crate::quad::Symmetry;
use crate::solver::{solve_streaming, solve_with_progress, OutputSink, SolverConfig};
use crate::stats::{
    is_nondecreasing, power_law_exponent, series_fit, series_limits, ShapeKind, SolutionTally,
};

/// Environment variable overriding the worker thread count.
pub const WORKERS_ENV: &str = "RESONANCE_WORKERS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "resonance",
    version,
    about = "Two-class four-wave resonances for ω = (m² + n²)^(1/4)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate all two-class solutions in |m|, |n| <= D.
    Solve(SolveArgs),
    /// Summarize (and optionally list) the classes realized in the domain.
    Classes(ClassesArgs),
    /// Domain series and multiplicity histogram of a solution file or an
    /// in-process solve.
    Stats(StatsArgs),
    /// Compare the solver against brute force (D <= 12).
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Complete,
    PaperCompat,
}

impl From<ModeArg> for DeficiencyMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Complete => DeficiencyMode::Complete,
            ModeArg::PaperCompat => DeficiencyMode::PaperCompat,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Jsonl,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Jsonl => OutputFormat::Jsonl,
        }
    }
}

#[derive(Debug, Args)]
pub struct DomainArgs {
    /// Domain limit D.
    #[arg(long = "max-coord", value_parser = clap::value_parser!(u32).range(1..))]
    pub max_coord: u32,
    #[arg(long, value_enum, default_value = "complete")]
    pub mode: ModeArg,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    /// Keep reflected images as separate solutions.
    #[arg(long)]
    pub expand_signs: bool,
    #[arg(long, value_enum, default_value = "jsonl")]
    pub format: FormatArg,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-pass progress on standard error.
    #[arg(long)]
    pub progress: bool,
    /// Also write the run report as JSON.
    #[arg(long)]
    pub report_json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassesArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    /// List every vector as CSV `q,gamma,m,n`.
    #[arg(long)]
    pub list: bool,
    /// List every deficiency point as CSV `q,dm,dn`.
    #[arg(long)]
    pub deficiencies: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableArg {
    Square,
    Circle,
    Ring,
    Histogram,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Solution file written by `solve`.
    #[arg(
        long,
        required_unless_present = "max_coord",
        conflicts_with = "max_coord"
    )]
    pub input: Option<PathBuf>,
    /// Solve in-process for this D and aggregate without writing solutions.
    #[arg(long = "max-coord", value_parser = clap::value_parser!(u32).range(1..))]
    pub max_coord: Option<u32>,
    /// Mode of the in-process solve.
    #[arg(long, value_enum, default_value = "complete")]
    pub mode: ModeArg,
    /// Count reflected images separately in the in-process solve.
    #[arg(long)]
    pub expand_signs: bool,
    /// Input format; guessed from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long, value_enum, default_value = "square")]
    pub table: TableArg,
    #[arg(long, default_value_t = 50)]
    pub start: u32,
    /// Last D of the series; defaults to the domain limit.
    #[arg(long)]
    pub end: Option<u32>,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u32).range(1..))]
    pub step: u32,
    #[arg(long, default_value_t = 50)]
    pub ring_width: u32,
    /// Report the multiplicity of a vector `m,n`.
    #[arg(long, value_parser = parse_vector)]
    pub vector: Vec<WaveVector>,
    /// Label printed with the report for file input (e.g. canonical or
    /// sign-expanded).
    #[arg(long, default_value = "as-read")]
    pub symmetry_label: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    #[arg(long)]
    pub expand_signs: bool,
}

fn parse_vector(s: &str) -> Result<WaveVector, String> {
    let (m, n) = s
        .split_once(',')
        .ok_or_else(|| format!("expected m,n but got `{s}`"))?;
    let m = m.trim().parse().map_err(|e| format!("{e}"))?;
    let n = n.trim().parse().map_err(|e| format!("{e}"))?;
    Ok(WaveVector::new(m, n))
}

/// Parses arguments, runs the subcommand and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    configure_workers();
    let result = match cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Classes(a) => run_classes(a),
        Command::Stats(a) => run_stats(a),
        Command::Verify(a) => run_verify(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Sink { .. } => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

fn configure_workers() {
    if let Some(n) = std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        // fails only if a pool already exists, e.g. when called twice in-process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| {
            Error::Sink {
                path: p.to_path_buf(),
                source,
            }
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run_solve(a: SolveArgs) -> Result<i32, Error> {
    let config = SolverConfig::new(a.domain.max_coord)
        .with_mode(a.domain.mode.into())
        .with_expand_signs(a.expand_signs)
        .with_sink(OutputSink {
            format: a.format.into(),
            path: a.out.clone(),
        });
    let progress = a.progress;
    let report = solve_streaming(
        &config,
        |msg| {
            if progress {
                eprintln!("{msg}");
            }
        },
        |_| Ok(()),
    )?;
    eprint!("{report}");
    if let Some(path) = &a.report_json {
        let wrap = |source| Error::Sink {
            path: path.clone(),
            source,
        };
        let mut w = BufWriter::new(File::create(path).map_err(wrap)?);
        serde_json::to_writer_pretty(&mut w, &report)
            .map_err(io::Error::from)
            .map_err(wrap)?;
        w.flush().map_err(wrap)?;
    }
    Ok(EXIT_OK)
}

fn run_classes(a: ClassesArgs) -> Result<i32, Error> {
    let limit = a.domain.max_coord;
    let catalog = build_class_catalog(limit)?;
    let summary = format!(
        "D={limit}\nclasses={}\nweights={}\nvectors={}\n",
        catalog.class_count(),
        catalog.weight_count(),
        catalog.vector_count()
    );
    if !a.list && !a.deficiencies {
        let mut w = open_output(a.out.as_deref())?;
        w.write_all(summary.as_bytes())?;
        w.flush()?;
        return Ok(EXIT_OK);
    }
    eprint!("{summary}");
    let mut w = open_output(a.out.as_deref())?;
    if a.list {
        writeln!(w, "q,gamma,m,n")?;
        for rec in catalog.records() {
            for g in &rec.weights {
                for k in &g.vectors {
                    writeln!(w, "{},{},{},{}", rec.q, g.gamma, k.m, k.n)?;
                }
            }
        }
    }
    if a.deficiencies {
        let mode: DeficiencyMode = a.domain.mode.into();
        writeln!(w, "q,dm,dn")?;
        for rec in catalog.records() {
            for p in deficiency_set(rec, mode) {
                writeln!(w, "{},{},{}", rec.q, p.dm, p.dn)?;
            }
        }
    }
    w.flush()?;
    Ok(EXIT_OK)
}

fn run_stats(a: StatsArgs) -> Result<i32, Error> {
    let (tally, label) = match (&a.input, a.max_coord) {
        (Some(input), _) => {
            let format = match a.format {
                Some(f) => f.into(),
                None => OutputFormat::from_path(input).unwrap_or_default(),
            };
            let file = File::open(input)?;
            let solutions = read_solutions(BufReader::new(file), format)?;
            let reach = solutions
                .iter()
                .flat_map(|q| q.vectors())
                .map(|k| k.m.unsigned_abs().max(k.n.unsigned_abs()))
                .max()
                .unwrap_or(1);
            let mut tally = SolutionTally::new(reach, a.ring_width);
            solutions.iter().for_each(|q| tally.observe(q));
            (tally, a.symmetry_label.clone())
        }
        (None, Some(limit)) => {
            let config = SolverConfig::new(limit)
                .with_mode(a.mode.into())
                .with_expand_signs(a.expand_signs);
            let mut tally = SolutionTally::new(limit, a.ring_width);
            let report = solve_streaming(
                &config,
                |_| {},
                |batch| {
                    batch.iter().for_each(|q| tally.observe(q));
                    Ok(())
                },
            )?;
            eprint!("{report}");
            (tally, format!("{}, {}", config.mode, config.symmetry()))
        }
        (None, None) => unreachable!("clap requires --input or --max-coord"),
    };
    eprintln!(
        "stats: {} solutions ({label}), domain limit {}",
        tally.total(),
        tally.limit()
    );

    let mut w = open_output(a.out.as_deref())?;
    match a.table {
        TableArg::Histogram => {
            let h = tally.histogram();
            writeln!(w, "multiplicity,vector_count")?;
            for (m, c) in &h.bins {
                writeln!(w, "{m},{c}")?;
            }
            eprintln!(
                "histogram: {} vectors, mass {} (= 4 x {})",
                h.vector_count(),
                h.mass(),
                tally.total()
            );
        }
        table => {
            let kind = match table {
                TableArg::Square => ShapeKind::Square,
                TableArg::Circle => ShapeKind::Circle,
                _ => ShapeKind::Ring {
                    width: a.ring_width,
                },
            };
            let end = a.end.unwrap_or(tally.limit());
            let limits = series_limits(a.start, end, a.step);
            let series = tally.series(kind, &limits);
            writeln!(w, "D,count")?;
            for (d, c) in &series {
                writeln!(w, "{d},{c}")?;
            }
            eprintln!(
                "series {}: nondecreasing={}",
                kind.label(),
                is_nondecreasing(&series)
            );
            if let Some(fit) = power_law_exponent(&series) {
                eprintln!(
                    "  log-log exponent {:.3} (r² {:.4})",
                    fit.slope, fit.r_squared
                );
            }
            if let Some(fit) = series_fit(&series) {
                eprintln!(
                    "  linear slope {:.3} per unit D (r² {:.4})",
                    fit.slope, fit.r_squared
                );
            }
        }
    }
    w.flush()?;

    for k in &a.vector {
        eprintln!("multiplicity of {k}: {}", tally.multiplicity(*k));
    }
    Ok(EXIT_OK)
}

fn run_verify(a: VerifyArgs) -> Result<i32, Error> {
    let limit = a.domain.max_coord;
    if limit > ORACLE_MAX_DOMAIN {
        return Err(Error::OracleLimit {
            limit,
            max: ORACLE_MAX_DOMAIN,
        });
    }
    let config = SolverConfig::new(limit)
        .with_mode(a.domain.mode.into())
        .with_expand_signs(a.expand_signs);
    let solved = solve_with_progress(&config, |_| {})?;
    let oracle = brute_force(limit, Symmetry::from_expand_signs(a.expand_signs))?;
    let report = compare(limit, &solved.solutions, &oracle);
    eprint!("{}", solved.report);
    print!("{report}");
    Ok(if report.is_match() {
        EXIT_OK
    } else {
        EXIT_MISMATCH
    })
}
