use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Cursor, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cityseq::bench::{write_access_csv, write_sweep_csv};
use cityseq::{
    bench_access_modes, bench_size_sweep, cat, collect, document_stats, filter_bbox, filter_random,
    generate_adjacent, generate_random, read_document, read_stream, stream_stats, synth, validate_stream,
    write_json_line, Bbox, Error, PeakAlloc, SweepMode,
};

#[global_allocator]
static ALLOC: PeakAlloc = PeakAlloc::new();

/// Convert between CityJSON (.city.json) and CityJSONSeq (.city.jsonl).
/// Inputs default to stdin, outputs go to stdout.
#[derive(Parser)]
#[command(name = "cityseq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// CityJSON document -> CityJSONSeq stream
    Cat { file: Option<PathBuf> },
    /// CityJSONSeq stream -> CityJSON document
    Collect { file: Option<PathBuf> },
    /// Keep a subset of the features of a stream
    Filter(FilterArgs),
    /// Check a stream against the CityJSONSeq rules; exit status 0 iff clean
    Validate {
        file: Option<PathBuf>,
        /// Print the report as JSON on stdout
        #[arg(long)]
        json: bool,
    },
    /// Dataset statistics as JSON (document or stream input, detected)
    Stats { file: Option<PathBuf> },
    /// Write a synthetic document of cuboid buildings
    Synth(SynthArgs),
    /// Benchmarks, CSV on stdout
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Args)]
struct FilterArgs {
    /// Keep features whose 2D extent intersects this box (CRS units)
    #[arg(long, num_args = 4, value_names = ["MINX", "MINY", "MAXX", "MAXY"], allow_negative_numbers = true,
          conflicts_with = "random", required_unless_present = "random")]
    bbox: Option<Vec<f64>>,
    /// Keep each feature with probability 1/N
    #[arg(long, value_name = "N")]
    random: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    file: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Number of buildings
    #[arg(long)]
    n: usize,
    /// Target fraction of vertices shared between adjacent buildings
    #[arg(long, value_name = "F")]
    adjacent: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Side of the square area in metres (default: about 30 m per building)
    #[arg(long)]
    extent: Option<f64>,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Compression factor over synthetic datasets
    SizeSweep {
        /// Building counts for disconnected cuboids
        #[arg(long, value_delimiter = ',', conflicts_with = "fractions", required_unless_present = "fractions")]
        counts: Option<Vec<usize>>,
        /// Target shared fractions for adjacent cuboids (with --n)
        #[arg(long, value_delimiter = ',', requires = "n")]
        fractions: Option<Vec<f64>>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        extent: Option<f64>,
    },
    /// Peak memory and time of whole-document vs streaming geometry counting
    AccessModes {
        document: PathBuf,
        stream: PathBuf,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
    },
}

fn input(file: &Option<PathBuf>) -> io::Result<Box<dyn BufRead>> {
    Ok(match file {
        Some(p) if p != Path::new("-") => Box::new(BufReader::new(File::open(p)?)),
        _ => Box::new(BufReader::new(io::stdin().lock())),
    })
}

type Out = BufWriter<io::StdoutLock<'static>>;

fn run(cli: Cli, out: &mut Out) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Cat { file } => {
            let doc = read_document(input(&file)?)?;
            let (stream, summary) = cat(&doc)?;
            if summary.unreferenced_vertices > 0 {
                eprintln!("warning: {} unreferenced vertices dropped", summary.unreferenced_vertices);
            }
            if !summary.is_invertible() {
                eprintln!(
                    "warning: objects with several parents ({}) are kept with their first parent only; \
                     the stream cannot be collected back",
                    summary.multi_parent.join(", ")
                );
            }
            stream.write_to(out)?;
        }
        Command::Collect { file } => {
            let rs = read_stream(input(&file)?)?;
            let c = collect(rs.stream)?;
            write_json_line(out, &c.document)?;
        }
        Command::Filter(a) => {
            let rs = read_stream(input(&a.file)?)?;
            writeln!(out, "{}", rs.header_raw)?;
            let transform = rs.stream.header.transform;
            let features = rs.stream.features;
            if let Some(b) = a.bbox {
                let bbox = Bbox::new(b[0], b[1], b[2], b[3])?;
                cityseq::stream::write_features(filter_bbox(features, transform, bbox), out)?;
            } else if let Some(n) = a.random {
                cityseq::stream::write_features(filter_random(features, n, a.seed)?, out)?;
            }
        }
        Command::Validate { file, json } => {
            let report = validate_stream(input(&file)?);
            for v in &report.violations {
                eprintln!("{v}");
            }
            if json {
                serde_json::to_writer_pretty(&mut *out, &report).map_err(io::Error::from)?;
                writeln!(out)?;
            } else {
                eprintln!(
                    "{} lines, {} features, {} violations",
                    report.lines,
                    report.features,
                    report.violations.len()
                );
            }
            if !report.is_clean() {
                out.flush()?;
                return Ok(ExitCode::from(1));
            }
        }
        Command::Stats { file } => {
            let stats = stats_of(input(&file)?)?;
            serde_json::to_writer_pretty(&mut *out, &stats).map_err(io::Error::from)?;
            writeln!(out)?;
        }
        Command::Synth(a) => {
            let extent = a.extent.unwrap_or_else(|| synth::default_extent(a.n));
            let doc = match a.adjacent {
                None => generate_random(a.n, extent, a.seed)?,
                Some(f) => {
                    let d = generate_adjacent(a.n, extent, f, a.seed)?;
                    eprintln!(
                        "achieved shared fraction {:.4} ({} shared walls)",
                        d.achieved_shared_fraction, d.shared_walls
                    );
                    d.document
                }
            };
            write_json_line(out, &doc)?;
        }
        Command::Bench(BenchCommand::SizeSweep {
            counts,
            fractions,
            n,
            seed,
            extent,
        }) => {
            let mode = match (counts, fractions, n) {
                (Some(counts), _, _) => SweepMode::Random { counts },
                (None, Some(fractions), Some(n)) => SweepMode::Adjacent { n, fractions },
                _ => unreachable!("enforced by the argument parser"),
            };
            let rows = bench_size_sweep(&mode, extent, seed)?;
            write_sweep_csv(&rows, out)?;
        }
        Command::Bench(BenchCommand::AccessModes {
            document,
            stream,
            repeats,
        }) => {
            let m = bench_access_modes(&document, &stream, &ALLOC, repeats)?;
            write_access_csv(&m, out)?;
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

/// A stream starts with a one-line CityJSON object followed by more lines;
/// anything else is read as a whole document.
fn stats_of(mut reader: Box<dyn BufRead>) -> Result<cityseq::DatasetStats, Error> {
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let is_stream = serde_json::from_str::<serde_json::Value>(first.trim()).is_ok_and(|v| v["type"] == "CityJSON")
        && !reader.fill_buf()?.is_empty();
    let joined = Cursor::new(first).chain(reader);
    if is_stream {
        let rs = read_stream(BufReader::new(joined))?;
        stream_stats(rs.stream.features)
    } else {
        document_stats(&read_document(joined)?)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = BufWriter::new(io::stdout().lock());
    match run(cli, &mut out) {
        Ok(code) => code,
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
