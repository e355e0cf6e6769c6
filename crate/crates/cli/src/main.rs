use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use log::info;

use mdrq_core::bench::{
    emit_report, run_benchmark, sweep, BenchmarkConfig, BenchmarkReport, SweepAxis, SweepBase,
};
use mdrq_core::engine::{Engine, EngineConfig, MethodId};
use mdrq_core::exec::physical_cores;
use mdrq_core::kernel::{KernelMode, MatchKernel};
use mdrq_core::scan::sequential_scan;
use mdrq_core::workload::{
    gen_gmrqb, gen_pair_queries, load_csv, load_queries, save_queries, write_gmrqb_csv,
    ClusterLayout, CsvSchema, GeneratorSpec, TemplateSet,
};
use mdrq_core::{DataSet, RangeQuery};

#[derive(Parser)]
#[command(
    name = "mdrq",
    version,
    about = "Multidimensional range-query engine and benchmark driver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset.
    Gen(GenArgs),
    /// Generate a query batch (JSON lines).
    Queries(QueriesArgs),
    /// Measure throughput of one or more methods, optionally over a sweep.
    Bench(BenchArgs),
    /// Check every method against the sequential-scan oracle.
    Verify(VerifyArgs),
    /// Convert JSON-lines benchmark reports into the CSV report format.
    Report(ReportArgs),
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Binary dataset file; generated from the flags below when absent.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    dims: usize,
    /// Clustered data with this many clusters (uniform when absent).
    #[arg(long)]
    clusters: Option<usize>,
    #[arg(long)]
    extent: Option<f32>,
    #[arg(long, value_parser = parse_layout, default_value = "diagonal")]
    layout: ClusterLayout,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl DataArgs {
    fn spec(&self) -> GeneratorSpec {
        let mut s = match self.clusters {
            Some(k) => GeneratorSpec::clustered(self.n, self.dims, k, self.seed),
            None => GeneratorSpec::uniform(self.n, self.dims, self.seed),
        };
        if let Some(e) = self.extent {
            s.cluster_extent = e;
        }
        s.with_layout(self.layout)
    }

    fn load(&self) -> mdrq_core::Result<DataSet> {
        match &self.data {
            Some(p) => DataSet::load(p),
            None => self.spec().generate(),
        }
    }
}

#[derive(Args, Clone)]
struct QuerySource {
    /// JSON-lines query batch; pair queries are generated when absent.
    #[arg(long)]
    queries_file: Option<PathBuf>,
    /// Number of generated pair queries.
    #[arg(long, default_value_t = 1000)]
    queries: usize,
    #[arg(long, default_value_t = 2)]
    query_seed: u64,
}

impl QuerySource {
    fn load(&self, data: &DataSet) -> mdrq_core::Result<Vec<RangeQuery>> {
        match &self.queries_file {
            Some(p) => load_queries(p),
            None => gen_pair_queries(data, self.queries, self.query_seed),
        }
    }
}

#[derive(Args, Clone)]
struct ExecArgs {
    /// Comma-separated methods: seq, hscan, vscan, kdtree, rstar, vafile, or all.
    #[arg(long, default_value = "all")]
    method: String,
    #[arg(long, env = "MDRQ_THREADS", default_value_t = 1)]
    threads: usize,
    /// Horizontal partitions (default: one per thread).
    #[arg(long)]
    partitions: Option<usize>,
    #[arg(long, value_parser = parse_kernel, default_value = "vector")]
    kernel: KernelMode,
    /// Seed for partitioning and insertion order.
    #[arg(long = "build-seed", default_value_t = 7)]
    build_seed: u64,
}

impl ExecArgs {
    fn methods(&self) -> mdrq_core::Result<Vec<MethodId>> {
        if self.method == "all" {
            return Ok(MethodId::ALL.to_vec());
        }
        self.method.split(',').map(|m| m.trim().parse()).collect()
    }

    fn engine(&self, method: MethodId) -> EngineConfig {
        let mut e = EngineConfig::new(method)
            .threads(self.threads)
            .kernel(MatchKernel::new(self.kernel))
            .seed(self.build_seed);
        e.partitions = self.partitions;
        e
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Write the 19-column genomic stand-in instead.
    #[arg(long)]
    gmrqb: bool,
    /// With --gmrqb: write CSV instead of the binary format.
    #[arg(long)]
    csv: bool,
    /// Ingest a CSV file with this column spec (e.g. "n,n,c") instead of generating.
    #[arg(long)]
    from_csv: Option<PathBuf>,
    #[arg(long)]
    schema: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct QueriesArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 1000)]
    count: usize,
    /// Instantiate templates ("1".."8", comma-separated, or "mixed") instead of pair queries.
    #[arg(long)]
    templates: Option<String>,
    #[arg(long, default_value_t = 2)]
    query_seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    queries: QuerySource,
    #[command(flatten)]
    exec: ExecArgs,
    #[arg(long, default_value_t = 3)]
    repetitions: usize,
    /// Sweep axis: selectivity, dimensionality, dataset_size, clusters, threads.
    #[arg(long)]
    sweep: Option<SweepAxis>,
    /// Comma-separated grid values for --sweep (threads default to 1..=physical cores).
    #[arg(long)]
    grid: Option<String>,
    /// Override the detected physical core count.
    #[arg(long)]
    physical_cores: Option<usize>,
    /// CSV report path (printed to stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also append JSON-lines reports here.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    queries: QuerySource,
    #[command(flatten)]
    exec: ExecArgs,
}

#[derive(Args)]
struct ReportArgs {
    /// JSON-lines report files written by `bench --json`.
    #[arg(long = "in", required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_kernel(s: &str) -> Result<KernelMode, String> {
    s.parse().map_err(|e: mdrq_core::Error| e.to_string())
}

fn parse_layout(s: &str) -> Result<ClusterLayout, String> {
    match s {
        "diagonal" => Ok(ClusterLayout::Diagonal),
        "uniform" => Ok(ClusterLayout::Uniform),
        other => Err(format!("unknown cluster layout {other:?}")),
    }
}

enum Failure {
    Usage(String),
    Verify,
}

impl From<mdrq_core::Error> for Failure {
    fn from(e: mdrq_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn gen(args: GenArgs) -> CmdResult {
    if let Some(src) = &args.from_csv {
        let schema = match &args.schema {
            Some(s) => CsvSchema::parse(s)?,
            None if args.gmrqb => CsvSchema::gmrqb(),
            None => {
                return Err(Failure::Usage(
                    "--from-csv needs --schema or --gmrqb".into(),
                ))
            }
        };
        let data = load_csv(src, &schema)?;
        data.save(&args.out)?;
        info!(
            "ingested {} x {} from {}",
            data.len(),
            data.dims(),
            src.display()
        );
        return Ok(());
    }
    if args.gmrqb {
        if args.csv {
            write_gmrqb_csv(&args.out, args.data.n, args.data.seed)?;
        } else {
            gen_gmrqb(args.data.n, args.data.seed)?.save(&args.out)?;
        }
        return Ok(());
    }
    let data = args.data.spec().generate()?;
    data.save(&args.out)?;
    info!(
        "wrote {} x {} to {}",
        data.len(),
        data.dims(),
        args.out.display()
    );
    Ok(())
}

fn queries(args: QueriesArgs) -> CmdResult {
    let data = args.data.load()?;
    let qs = match args.templates.as_deref() {
        None => gen_pair_queries(&data, args.count, args.query_seed)?,
        Some(spec) => {
            let all = TemplateSet::gmrqb();
            let ids: Vec<u8> = if spec == "mixed" {
                all.templates().iter().map(|t| t.id).collect()
            } else {
                spec.split(',')
                    .map(|s| {
                        s.trim()
                            .parse()
                            .map_err(|_| Failure::Usage(format!("bad template id {s:?}")))
                    })
                    .collect::<Result<_, _>>()?
            };
            let per = args.count.div_ceil(ids.len().max(1));
            let mut out = Vec::new();
            for (k, id) in ids.iter().enumerate() {
                let t = all
                    .get(*id)
                    .ok_or_else(|| Failure::Usage(format!("no template {id}")))?;
                for i in 0..per {
                    let seed = args.query_seed
                        ^ ((k * per + i) as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                    out.push(mdrq_core::workload::instantiate_template(t, &data, seed)?);
                }
            }
            out
        }
    };
    save_queries(&args.out, &qs)?;
    Ok(())
}

fn bench(args: BenchArgs) -> CmdResult {
    let methods = args.exec.methods()?;
    let mut base_cfg = BenchmarkConfig::new(methods[0]);
    base_cfg.engine = args.exec.engine(methods[0]);
    base_cfg.repetitions = args.repetitions;
    base_cfg.clusters = args.data.clusters;

    let reports: Vec<BenchmarkReport> = match args.sweep {
        None => {
            let data = Arc::new(args.data.load()?);
            let qs = args.queries.load(&data)?;
            let mut out = Vec::new();
            for m in methods {
                let mut cfg = base_cfg;
                cfg.engine = args.exec.engine(m);
                out.push(run_benchmark(&cfg, Arc::clone(&data), &qs)?);
            }
            out
        }
        Some(axis) => {
            let cores = args.physical_cores.unwrap_or_else(physical_cores);
            let grid: Vec<f64> = match (&args.grid, axis) {
                (Some(g), _) => g
                    .split(',')
                    .map(|v| {
                        v.trim()
                            .parse()
                            .map_err(|_| Failure::Usage(format!("bad grid value {v:?}")))
                    })
                    .collect::<Result<_, _>>()?,
                (None, SweepAxis::Threads) => (1..=cores).map(|t| t as f64).collect(),
                (None, _) => return Err(Failure::Usage("--sweep needs --grid".into())),
            };
            let mut base = SweepBase::new(args.data.spec(), methods);
            base.bench = base_cfg;
            base.queries = args.queries.queries;
            base.query_seed = args.queries.query_seed;
            let outcome = sweep(axis, &grid, &base)?;
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            outcome.reports()
        }
    };

    if let Some(path) = &args.json {
        use std::io::Write;
        let mut f = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        for r in &reports {
            let line = serde_json::to_string(r).map_err(|e| Failure::Usage(e.to_string()))?;
            writeln!(f, "{line}").map_err(|e| Failure::Usage(e.to_string()))?;
        }
    }
    match &args.out {
        Some(p) => emit_report(&reports, p)?,
        None => mdrq_core::bench::write_report(std::io::stdout().lock(), &reports)?,
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> CmdResult {
    let data = Arc::new(args.data.load()?);
    let qs = args.queries.load(&data)?;
    let expect: Vec<_> = qs
        .iter()
        .map(|q| sequential_scan(&data, q, MatchKernel::SCALAR))
        .collect::<Result<_, _>>()?;
    let mut failures = 0usize;
    for m in args.exec.methods()? {
        let engine = Engine::build(Arc::clone(&data), args.exec.engine(m))?;
        for (i, (q, e)) in qs.iter().zip(&expect).enumerate() {
            let got = engine.search(q)?;
            if &got != e {
                let (extra, missing) = got.diff(e);
                println!("MISMATCH method={m} query={i} extra={extra:?} missing={missing:?}");
                failures += 1;
            }
        }
        println!("{m}: {} queries checked", qs.len());
    }
    if failures > 0 {
        println!("verify: {failures} mismatching results");
        return Err(Failure::Verify);
    }
    println!("verify: all methods agree with the oracle");
    Ok(())
}

fn report(args: ReportArgs) -> CmdResult {
    let mut reports = Vec::new();
    for p in &args.inputs {
        let text = std::fs::read_to_string(p)
            .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
        for (i, line) in text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
        {
            let r: BenchmarkReport = serde_json::from_str(line)
                .map_err(|e| Failure::Usage(format!("{}:{}: {e}", p.display(), i + 1)))?;
            reports.push(r);
        }
    }
    emit_report(&reports, &args.out)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Queries(a) => queries(a),
        Command::Bench(a) => bench(a),
        Command::Verify(a) => verify(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Verify) => ExitCode::from(2),
    }
}
