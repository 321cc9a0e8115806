use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dynpred::error::Error;
use dynpred::generate::{generate, ErrorModel, ProblemKind, Workload};
use dynpred::harness::{self, bench, sweep_models, BenchRow, Instance, Mode, RunOptions};
use dynpred::io::{self as dio, InsertionInstance};
use dynpred::model::{FeedKind, PredictionFeed, RealEvent};

const PREDICTIONS: &str = "predictions.txt";
const STREAM: &str = "stream.txt";
const BUNDLES: &str = "bundles.txt";
const META: &str = "meta.txt";
const DELETIONS: &str = "deletions.txt";
const INSERTIONS: &str = "insertions.txt";

#[derive(Parser)]
#[command(name = "dynpred", version, about = "Dynamic algorithms driven by predicted update days")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a stream, its predictions and the prediction bundles.
    Generate(GenerateArgs),
    /// Run one mode over an instance directory and print the daily outputs.
    Run(RunArgs),
    /// Compare a mode against the brute-force answers day by day.
    Verify(RunArgs),
    /// Sweep error levels and write one CSV row per run.
    Bench(BenchArgs),
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, default_value = "uniform")]
    model: String,
    #[arg(long, default_value_t = 4.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.1)]
    rho: f64,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    problem: ProblemKind,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long = "T")]
    horizon: u32,
    /// Elements for counter and decmax, vertices for graph problems.
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory to write into; created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    problem: ProblemKind,
    /// Directory holding the generated files.
    #[arg(long, default_value = ".")]
    dir: PathBuf,
    #[arg(long, default_value = "predicted")]
    mode: Mode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Engines per backstop, or instances per doubling when boosted.
    #[arg(long, default_value_t = 1)]
    k: u32,
    #[arg(long, default_value_t = 8)]
    instances_cap: u32,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "counter")]
    problem: ProblemKind,
    #[arg(long = "T", default_value_t = 1024)]
    horizon: u32,
    #[arg(long, default_value_t = 64)]
    n: u32,
    /// First seed of the range.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    /// A single model instead of the default error sweep.
    #[arg(long)]
    model: Option<String>,
    #[arg(long, default_value_t = 4.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.1)]
    rho: f64,
    /// CSV file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Mismatch,
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Input(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Failure {
        Failure::Input(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Failure {
        Failure::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let r = match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Run(a) => cmd_run(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Bench(a) => cmd_bench(&a),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn cmd_generate(a: &GenerateArgs) -> Result<(), Failure> {
    let model = ErrorModel::parse(&a.model.model, a.model.sigma, a.model.rho)?;
    let w = generate(a.problem, model, a.n, a.horizon, a.seed)?;
    fs::create_dir_all(&a.out)?;
    dio::write(&a.out.join(PREDICTIONS), &dio::write_predictions(&w.predictions))?;
    dio::write(&a.out.join(STREAM), &dio::write_stream(&w.stream))?;
    dio::write(&a.out.join(BUNDLES), &dio::write_bundles(&w.bundles))?;
    write_partial_feeds(&w, &a.out)?;
    let meta = [
        ("problem", w.problem.to_string()),
        ("model", w.model.to_string()),
        ("n", a.n.to_string()),
        ("vertices", w.vertices.to_string()),
        ("T", w.horizon.to_string()),
        ("seed", a.seed.to_string()),
        ("l1_error", w.l1.to_string()),
    ];
    dio::write(&a.out.join(META), &dio::write_meta(&meta))?;
    println!("wrote {} days to {} (l1_error={})", w.stream.len(), a.out.display(), w.l1);
    Ok(())
}

/// The deletion-only and insertion-only views of the same instance.
fn write_partial_feeds(w: &Workload, dir: &Path) -> Result<(), Error> {
    let annotate = |feed: &mut PredictionFeed| -> Vec<RealEvent> {
        w.stream.iter().map(|r| feed.annotate(r.day, &r.event)).collect()
    };
    let deletions = annotate(&mut PredictionFeed::new(FeedKind::Deletions, &w.predictions));
    dio::write(&dir.join(DELETIONS), &dio::write_real_events(&deletions))?;
    let mut feed = PredictionFeed::new(FeedKind::Insertions, &w.predictions);
    let inst = InsertionInstance { members: feed.first_insertions(), ground: w.ground.clone(), events: annotate(&mut feed) };
    dio::write(&dir.join(INSERTIONS), &dio::write_insertion_instance(&inst))
}

fn load(a: &RunArgs) -> Result<Instance, Error> {
    let stream = dio::parse_stream(&dio::read(&a.dir.join(STREAM))?)?;
    let predictions = match dio::read(&a.dir.join(PREDICTIONS)) {
        Ok(text) => dio::parse_predictions(&text)?,
        Err(_) if matches!(a.mode, Mode::Offline | Mode::BruteForce | Mode::Boosted) => Vec::new(),
        Err(e) => return Err(e),
    };
    let bundles = match dio::read(&a.dir.join(BUNDLES)) {
        Ok(text) => dio::parse_bundles(&text)?,
        Err(_) if a.mode != Mode::Boosted => Vec::new(),
        Err(e) => return Err(e),
    };
    let vertices = match dio::read(&a.dir.join(META)) {
        Ok(text) => match dio::parse_meta(&text)?.get("vertices") {
            Some(v) => v.parse().map_err(|_| Error::InvalidParameters(format!("bad vertex count `{v}` in meta")))?,
            None => 0,
        },
        Err(_) => 0,
    };
    Instance::new(a.problem, vertices, stream, predictions, bundles)
}

fn options(a: &RunArgs) -> RunOptions {
    let mut o = RunOptions::new(a.mode, a.seed);
    o.k = a.k;
    o.instances_cap = a.instances_cap;
    o
}

fn sink(out: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_run(a: &RunArgs) -> Result<(), Failure> {
    let inst = load(a)?;
    let r = harness::run(&inst, &options(a))?;
    let mut w = sink(&a.out)?;
    let mut epochs = r.epochs.iter().peekable();
    for (i, o) in r.outputs.iter().enumerate() {
        let day = i as u32 + 1;
        while let Some(e) = epochs.next_if(|e| e.start_day == day) {
            writeln!(w, "{}", e.header())?;
        }
        writeln!(w, "{day} {o}")?;
    }
    if let Some(c) = &r.counters {
        for line in c.dump().lines() {
            writeln!(w, "# {line}")?;
        }
    }
    if let Some(d) = r.depth {
        writeln!(w, "# depth={d}")?;
    }
    if let Some(m) = r.meta_steps {
        writeln!(w, "# meta_steps={m}")?;
        writeln!(w, "# max_spread={}", r.max_spread)?;
    }
    writeln!(w, "# work={}", r.work)?;
    w.flush()?;
    Ok(())
}

fn cmd_verify(a: &RunArgs) -> Result<(), Failure> {
    let inst = load(a)?;
    let bad = harness::verify(&inst, &options(a))?;
    if bad.is_empty() {
        println!("ok: {} days match brute force in {} mode", inst.stream.len(), a.mode);
        return Ok(());
    }
    for m in bad.iter().take(20) {
        println!("day {}: expected {} found {}", m.day, m.expected, m.found);
    }
    println!("{} of {} days differ", bad.len(), inst.stream.len());
    Err(Failure::Mismatch)
}

fn cmd_bench(a: &BenchArgs) -> Result<(), Failure> {
    let models = match &a.model {
        Some(name) => vec![ErrorModel::parse(name, a.sigma, a.rho)?],
        None => sweep_models(a.horizon),
    };
    let rows = bench(a.problem, a.n, a.horizon, &models, a.seed..a.seed + a.seeds)?;
    let mut csv = csv::Writer::from_writer(sink(&a.out)?);
    csv.write_record(BenchRow::HEADER)?;
    for row in &rows {
        csv.write_record(row.record())?;
    }
    csv.flush()?;
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.l1_error as f64, r.retrigger_units as f64)).collect();
    if let Some(s) = harness::loglog_slope(&points) {
        eprintln!("log-log slope of retrigger_units on l1_error: {s:.3}");
    }
    Ok(())
}
