//! `sbg`: build, query and benchmark labeled-graph sketches.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde_json::json;

use sbg_sketch::bench::{bench_run, budget_for_factor, BenchConfig};
use sbg_sketch::bounds::{bound_curve, simulate_eviction, write_curve_csv, BoundForm, BoundParams};
use sbg_sketch::metrics::average_relative_error;
use sbg_sketch::query_file::{evaluate, read_queries, write_queries, Answer, Query};
use sbg_sketch::snapshot::Snapshot;
use sbg_sketch::stream::{load_stream, write_stream, LabelDictionary, LoadedStream, StreamSource};
use sbg_sketch::workload::{
    gen_edge_queries, gen_skewed_stream, gen_subgraph_queries, gen_unreachable_queries, EdgeSampling, LabelWeights,
    SkewedStreamSpec, SubgraphShape,
};
use sbg_sketch::{AggregateMode, EdgeEvent, ExactGraph, SbgSketch, SketchConfig, TcmConfig, TcmSketch};

const SEED_ENV: &str = "SBG_SEED";

#[derive(Parser)]
#[command(name = "sbg", version, about = "Fixed-memory sketches of labeled graph streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a sketch from a stream file and save a snapshot.
    Build(BuildArgs),
    /// Answer a query file against a snapshot, as JSON.
    Query(QueryArgs),
    /// Compare the ranked sketch with the baseline on one workload, as JSON.
    Bench(BenchArgs),
    /// Write a synthetic stream and, optionally, a query file.
    Gen(GenArgs),
    /// Write the analytic error curves as CSV.
    Bounds(BoundsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Unit,
    Weighted,
}

impl From<Mode> for AggregateMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Unit => AggregateMode::Unit,
            Mode::Weighted => AggregateMode::Weighted,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum Structure {
    Sbg,
    Tcm,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sampling {
    Uniform,
    FrequencyWeighted,
}

impl From<Sampling> for EdgeSampling {
    fn from(s: Sampling) -> Self {
        match s {
            Sampling::Uniform => EdgeSampling::Uniform,
            Sampling::FrequencyWeighted => EdgeSampling::FrequencyWeighted,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Statement,
    Proof,
}

/// Sketch shape shared by `build` and `bench`.
#[derive(Args)]
struct SketchArgs {
    /// Number of hash functions (layers).
    #[arg(long, default_value_t = 2)]
    hashes: usize,
    #[arg(long, value_enum, default_value_t = Mode::Unit)]
    mode: Mode,
    /// Skip tie updates in rented cells on an edge's first arrival. Unit mode
    /// only; defaults to on there.
    #[arg(long, value_enum)]
    optimize_first_arrival: Option<Switch>,
    /// Number of stored rank vectors; defaults to min((L-1)!, 64).
    #[arg(long)]
    rank_vectors: Option<usize>,
    /// Seed; overrides SBG_SEED.
    #[arg(long)]
    seed: Option<u64>,
}

impl SketchArgs {
    fn first_arrival(&self) -> Result<bool> {
        match (self.mode, self.optimize_first_arrival) {
            (Mode::Weighted, Some(Switch::On)) => bail!("--optimize-first-arrival on requires --mode unit"),
            (Mode::Weighted, _) => Ok(false),
            (Mode::Unit, switch) => Ok(switch != Some(Switch::Off)),
        }
    }
}

/// Where a synthetic stream comes from: a JSON spec file or flags.
#[derive(Args)]
struct WorkloadArgs {
    /// JSON stream specification; overrides the generator flags below.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    events: usize,
    #[arg(long, default_value_t = 100_000)]
    vertices: u64,
    /// Zipf exponent of the label frequencies.
    #[arg(long, default_value_t = 1.2)]
    zipf: f64,
    /// Explicit relative label frequencies, e.g. `100,1`; overrides --zipf.
    #[arg(long, value_delimiter = ',')]
    label_weights: Option<Vec<f64>>,
    /// Size of the pool of distinct edges; defaults to a fifth of the events.
    #[arg(long)]
    distinct: Option<usize>,
    /// Zipf exponent of edge popularity inside the pool.
    #[arg(long, default_value_t = 1.0)]
    edge_skew: f64,
    /// Draw fresh endpoints for every event instead of replaying a pool.
    #[arg(long)]
    no_pool: bool,
}

impl WorkloadArgs {
    fn spec(&self, num_labels: usize, mode: AggregateMode, seed: u64) -> Result<SkewedStreamSpec> {
        if let Some(path) = &self.spec {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            return serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()));
        }
        let weights = match &self.label_weights {
            Some(w) => LabelWeights::Explicit(w.clone()),
            None => LabelWeights::Zipf(self.zipf),
        };
        let mut spec = SkewedStreamSpec::new(self.vertices, num_labels, weights, self.events).mode(mode).seed(seed);
        if !self.no_pool {
            spec = spec.edge_pool(self.distinct.unwrap_or((self.events / 5).max(1)), self.edge_skew);
        }
        Ok(spec)
    }
}

#[derive(Args)]
struct BuildArgs {
    /// Stream file: `src<TAB>dst<TAB>label<TAB>weight` per line.
    #[arg(long)]
    stream: PathBuf,
    /// Label dictionary (JSON name -> index); every label must be in it.
    #[arg(long)]
    dictionary: Option<PathBuf>,
    /// Write the label dictionary used for the build here.
    #[arg(long)]
    dictionary_out: Option<PathBuf>,
    /// Number of labels; defaults to the number found in the stream.
    #[arg(long)]
    labels: Option<usize>,
    /// Memory as a fraction of the stream's byte size.
    #[arg(long, conflicts_with = "memory")]
    factor: Option<f64>,
    /// Memory budget in bytes.
    #[arg(long)]
    memory: Option<usize>,
    #[arg(long, value_enum, default_value_t = Structure::Sbg)]
    structure: Structure,
    /// Refuse streams with more events than this.
    #[arg(long)]
    cap: Option<usize>,
    #[command(flatten)]
    sketch: SketchArgs,
    /// Snapshot file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    snapshot: PathBuf,
    /// Query file: `E src dst label`, `G e1; e2; ...` or `R src dst l1,l2`.
    #[arg(long)]
    queries: PathBuf,
    /// Label dictionary for symbolic labels.
    #[arg(long)]
    dictionary: Option<PathBuf>,
    /// Stream the snapshot was built from; adds exact answers and errors.
    #[arg(long)]
    stream: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Benchmark on this stream file instead of a synthetic one.
    #[arg(long, conflicts_with = "spec")]
    stream: Option<PathBuf>,
    /// Number of labels of the synthetic stream.
    #[arg(long, default_value_t = 5)]
    labels: usize,
    /// Memory as a fraction of the stream's byte size.
    #[arg(long, default_value_t = 0.1)]
    factor: f64,
    #[arg(long, default_value_t = 10_000)]
    edge_queries: usize,
    #[arg(long, default_value_t = 1_000)]
    subgraph_queries: usize,
    #[arg(long, default_value_t = 1_000)]
    reach_queries: usize,
    #[arg(long, value_enum, default_value_t = Sampling::Uniform)]
    sampling: Sampling,
    #[command(flatten)]
    sketch: SketchArgs,
    #[command(flatten)]
    workload: WorkloadArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 5)]
    labels: usize,
    #[arg(long, value_enum, default_value_t = Mode::Unit)]
    mode: Mode,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    workload: WorkloadArgs,
    /// Stream file to write.
    #[arg(long)]
    out: PathBuf,
    /// Also write a query file drawn from the generated stream.
    #[arg(long)]
    queries_out: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    edge_queries: usize,
    #[arg(long, default_value_t = 20)]
    subgraph_queries: usize,
    #[arg(long, default_value_t = 20)]
    reach_queries: usize,
    #[arg(long, value_enum, default_value_t = Sampling::Uniform)]
    sampling: Sampling,
}

/// Defaults reproduce the skewed two-curve setting: 100 labels, one hash,
/// 50 same-label collisions per counter.
#[derive(Args)]
struct BoundsArgs {
    #[arg(long, default_value_t = 100)]
    labels: usize,
    #[arg(long, default_value_t = 1)]
    hashes: usize,
    /// Counter reduction 1/(1+alpha) caused by rank bytes.
    #[arg(long, default_value_t = 1.0 / 9.0)]
    alpha: f64,
    /// Same-label collision rate per counter.
    #[arg(long, default_value_t = 50.0)]
    lambda0: f64,
    /// Other-label arrival rate per counter.
    #[arg(long, default_value_t = 49.5)]
    lambda: f64,
    #[arg(long, default_value_t = 0)]
    k_min: usize,
    #[arg(long, default_value_t = 200)]
    k_max: usize,
    /// Fixed truncation of the collision sum.
    #[arg(long)]
    truncation: Option<usize>,
    #[arg(long, value_enum, default_value_t = Form::Statement)]
    form: Form,
    /// Add Monte-Carlo columns from this many trials.
    #[arg(long)]
    simulate: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// `--seed`, else `SBG_SEED`, else 0.
fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().with_context(|| format!("{SEED_ENV}={v:?} is not an unsigned integer")),
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(e) => Err(e).context(SEED_ENV),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(path: Option<&Path>, value: &impl serde::Serialize) -> Result<()> {
    let mut out = output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn load_dictionary(path: Option<&PathBuf>) -> Result<Option<LabelDictionary>> {
    path.map(|p| LabelDictionary::load(p).with_context(|| format!("reading dictionary {}", p.display()))).transpose()
}

fn load(path: &Path, dictionary: Option<LabelDictionary>, cap: Option<usize>) -> Result<LoadedStream> {
    let source = StreamSource {
        path: path.to_path_buf(),
        dictionary,
        event_cap: cap,
    };
    load_stream(&source).with_context(|| format!("reading stream {}", path.display()))
}

fn label_count(requested: Option<usize>, loaded: &LoadedStream) -> Result<usize> {
    let found = loaded.labels.len().max(1);
    match requested {
        Some(n) if n < found => bail!("--labels {n} but the stream uses {found} labels"),
        Some(n) => Ok(n),
        None => Ok(found),
    }
}

fn build(args: BuildArgs) -> Result<()> {
    let loaded = load(&args.stream, load_dictionary(args.dictionary.as_ref())?, args.cap)?;
    let num_labels = label_count(args.labels, &loaded)?;
    let budget = match (args.memory, args.factor) {
        (Some(bytes), _) => bytes,
        (None, factor) => budget_for_factor(factor.unwrap_or(0.1), loaded.events.len())?,
    };
    let seed = resolve_seed(args.sketch.seed)?;
    let mode = AggregateMode::from(args.sketch.mode);
    let snapshot = match args.structure {
        Structure::Sbg => {
            let mut cfg = SketchConfig::new(num_labels, args.sketch.hashes, budget)
                .mode(mode)
                .first_arrival(args.sketch.first_arrival()?)
                .seed(seed);
            if let Some(r) = args.sketch.rank_vectors {
                cfg = cfg.rank_vectors(r);
            }
            let mut sketch = SbgSketch::new(cfg)?;
            sketch.insert_batch(&loaded.events)?;
            Snapshot::Sbg(sketch)
        }
        Structure::Tcm => {
            let mut sketch = TcmSketch::new(TcmConfig::new(num_labels, args.sketch.hashes, budget).mode(mode).seed(seed))?;
            sketch.insert_batch(&loaded.events)?;
            Snapshot::Tcm(sketch)
        }
    };
    snapshot.save(&args.out).with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(path) = &args.dictionary_out {
        loaded.labels.save(path)?;
    }
    let sketch = snapshot.as_graph_sketch();
    info!("built {} over {} events into {}", sketch.name(), loaded.events.len(), args.out.display());
    write_json(
        None,
        &json!({
            "structure": sketch.name(),
            "events": loaded.events.len(),
            "labels": num_labels,
            "memory_budget_bytes": budget,
            "memory_bytes": sketch.memory_footprint(),
            "seed": seed,
        }),
    )
}

fn query(args: QueryArgs) -> Result<()> {
    let snapshot = Snapshot::load(&args.snapshot).with_context(|| format!("reading snapshot {}", args.snapshot.display()))?;
    let sketch = snapshot.as_graph_sketch();
    let dictionary = load_dictionary(args.dictionary.as_ref())?;
    let file = File::open(&args.queries).with_context(|| format!("reading {}", args.queries.display()))?;
    let queries = read_queries(BufReader::new(file), dictionary.as_ref())?;
    let oracle = match &args.stream {
        Some(path) => {
            let loaded = load(path, dictionary.clone(), None)?;
            let mode = match &snapshot {
                Snapshot::Sbg(s) => s.config().aggregate_mode,
                Snapshot::Tcm(t) => t.config().aggregate_mode,
            };
            let mut oracle = ExactGraph::new(sketch.num_labels(), mode);
            oracle.insert_all(&loaded.events)?;
            Some(oracle)
        }
        None => None,
    };
    let results = queries
        .iter()
        .map(|(text, q)| evaluate(sketch, text, q, oracle.as_ref()).with_context(|| format!("query {text:?}")))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(f64, f64)> = results
        .iter()
        .filter_map(|r| match (r.estimate, r.exact) {
            (Answer::Weight(e), Some(Answer::Weight(x))) if x > 0.0 => Some((e, x)),
            _ => None,
        })
        .collect();
    let are = if pairs.is_empty() { None } else { Some(average_relative_error(&pairs)?) };
    write_json(
        args.out.as_deref(),
        &json!({ "structure": sketch.name(), "results": results, "average_relative_error": are }),
    )
}

fn bench(args: BenchArgs) -> Result<()> {
    let seed = resolve_seed(args.sketch.seed)?;
    let mode = AggregateMode::from(args.sketch.mode);
    let (events, num_labels): (Vec<EdgeEvent>, usize) = match &args.stream {
        Some(path) => {
            let loaded = load(path, None, None)?;
            let n = loaded.labels.len().max(1);
            (loaded.events, n)
        }
        None => {
            let spec = args.workload.spec(args.labels, mode, seed)?;
            (gen_skewed_stream(&spec)?, spec.num_labels)
        }
    };
    let config = BenchConfig {
        factor: args.factor,
        num_hashes: args.sketch.hashes,
        mode,
        first_arrival: args.sketch.first_arrival()?,
        rank_vectors: args.sketch.rank_vectors,
        seed,
        edge_queries: args.edge_queries,
        subgraph_queries: args.subgraph_queries,
        reach_queries: args.reach_queries,
        sampling: args.sampling.into(),
        ..BenchConfig::default()
    };
    let report = bench_run(&events, num_labels, &config)?;
    info!(
        "edge ARE: ranked {:?}, baseline {:?}",
        report.sbg.edge_are, report.tcm.edge_are
    );
    write_json(args.out.as_deref(), &report)
}

fn gen(args: GenArgs) -> Result<()> {
    let seed = resolve_seed(args.seed)?;
    let spec = args.workload.spec(args.labels, args.mode.into(), seed)?;
    let events = gen_skewed_stream(&spec)?;
    let mut out = output(Some(&args.out))?;
    write_stream(&mut out, &events, None)?;
    out.flush()?;
    if let Some(path) = &args.queries_out {
        let mut oracle = ExactGraph::new(spec.num_labels, spec.mode);
        oracle.insert_all(&events)?;
        let mut queries: Vec<Query> =
            gen_edge_queries(&oracle, args.edge_queries, seed, args.sampling.into()).into_iter().map(Query::Edge).collect();
        queries.extend(
            gen_subgraph_queries(&oracle, args.subgraph_queries, seed, &SubgraphShape::default_mix())
                .into_iter()
                .map(Query::Subgraph),
        );
        queries.extend(gen_unreachable_queries(&oracle, args.reach_queries, seed).into_iter().map(Query::Reach));
        let mut out = output(Some(path))?;
        write_queries(&mut out, &queries, None)?;
        out.flush()?;
    }
    info!("wrote {} events to {}", events.len(), args.out.display());
    Ok(())
}

fn bounds(args: BoundsArgs) -> Result<()> {
    if args.k_min > args.k_max {
        bail!("--k-min {} exceeds --k-max {}", args.k_min, args.k_max);
    }
    let mut params = BoundParams::new(args.labels, args.hashes, args.alpha, args.lambda0, args.lambda);
    params.k_max = args.truncation;
    let form = match args.form {
        Form::Statement => BoundForm::Statement,
        Form::Proof => BoundForm::Proof,
    };
    let curve = bound_curve(&params, args.k_min..=args.k_max, form)?;
    let sim = match args.simulate {
        Some(trials) => Some(simulate_eviction(&params, trials, resolve_seed(args.seed)?)?),
        None => None,
    };
    let mut out = output(args.out.as_deref())?;
    write_curve_csv(&mut out, &curve, sim.as_ref())?;
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Build(a) => build(a),
        Command::Query(a) => query(a),
        Command::Bench(a) => bench(a),
        Command::Gen(a) => gen(a),
        Command::Bounds(a) => bounds(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
