//! Throughput measurement, parameter sweeps and CSV reports.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::counters::CounterSnapshot;
use crate::data::DataSet;
use crate::engine::{Engine, EngineConfig, MethodId};
use crate::error::{Error, Result};
use crate::query::RangeQuery;
use crate::selectivity::joint_selectivity;
use crate::workload::{query_from_pair, GeneratorSpec};

pub const REPORT_HEADER: &str =
    "method,n,m,threads,partitions,kernel,clusters,avg_selectivity,queries,seconds,qps,objects_compared,nodes_visited";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkConfig {
    pub engine: EngineConfig,
    pub repetitions: usize,
    /// Queries whose selectivity the oracle measures for the report.
    pub selectivity_sample: usize,
    /// Cluster count of the dataset, echoed into the report.
    pub clusters: Option<usize>,
}

impl BenchmarkConfig {
    pub fn new(method: MethodId) -> Self {
        Self {
            engine: EngineConfig::new(method),
            repetitions: 3,
            selectivity_sample: 100,
            clusters: None,
        }
    }

    pub fn with_engine(mut self, f: impl FnOnce(EngineConfig) -> EngineConfig) -> Self {
        self.engine = f(self.engine);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.engine.threads == 0 {
            return Err(Error::ZeroThreads);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub method: MethodId,
    pub n: usize,
    pub m: usize,
    pub threads: usize,
    pub partitions: usize,
    pub kernel: String,
    pub clusters: Option<usize>,
    pub build_seconds: f64,
    /// Median wall time of one full batch.
    pub seconds: f64,
    pub queries: usize,
    pub qps: f64,
    pub avg_selectivity: f64,
    pub sigma_selectivity: f64,
    /// Summed result cardinalities of one batch.
    pub result_count: u64,
    pub objects_compared: u64,
    pub nodes_visited: u64,
    pub peak_rss_bytes: Option<u64>,
}

pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of nothing");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

pub fn throughput(queries: usize, seconds: f64) -> f64 {
    queries as f64 / seconds
}

fn mean_sigma(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Runs the batch once; returns wall seconds and summed cardinalities.
pub fn time_batch(engine: &Engine, queries: &[RangeQuery]) -> Result<(f64, u64)> {
    let start = Instant::now();
    let mut total = 0u64;
    for q in queries {
        total += std::hint::black_box(engine.search(q)?).len() as u64;
    }
    Ok((start.elapsed().as_secs_f64(), total))
}

/// Builds the method, runs one untimed warmup batch and `repetitions`
/// timed batches, and reports the median.
pub fn run_benchmark(
    config: &BenchmarkConfig,
    data: Arc<DataSet>,
    queries: &[RangeQuery],
) -> Result<BenchmarkReport> {
    config.validate()?;
    if let Some(q) = queries.iter().find(|q| q.dims() != data.dims()) {
        return Err(Error::DimensionMismatch {
            expected: data.dims(),
            found: q.dims(),
        });
    }
    let sample = &queries[..config.selectivity_sample.min(queries.len())];
    let sel: Vec<f64> = sample
        .iter()
        .map(|q| joint_selectivity(&data, q))
        .collect::<Result<_>>()?;
    let (avg_selectivity, sigma_selectivity) = mean_sigma(&sel);

    let start = Instant::now();
    let engine = Engine::build(Arc::clone(&data), config.engine)?;
    let build_seconds = start.elapsed().as_secs_f64();
    measure(
        config,
        &engine,
        queries,
        build_seconds,
        avg_selectivity,
        sigma_selectivity,
    )
}

fn measure(
    config: &BenchmarkConfig,
    engine: &Engine,
    queries: &[RangeQuery],
    build_seconds: f64,
    avg_selectivity: f64,
    sigma_selectivity: f64,
) -> Result<BenchmarkReport> {
    let (_, warm_count) = time_batch(engine, queries)?;
    engine.reset_counters();
    let mut times = Vec::with_capacity(config.repetitions);
    for _ in 0..config.repetitions {
        let (t, count) = time_batch(engine, queries)?;
        debug_assert_eq!(count, warm_count);
        times.push(t);
    }
    let reps = config.repetitions as u64;
    let c: CounterSnapshot = engine.counters();
    let seconds = median(&times);
    Ok(BenchmarkReport {
        method: engine.method(),
        n: engine.len(),
        m: engine.dims(),
        threads: config.engine.threads,
        partitions: config.engine.effective_partitions(),
        kernel: config.engine.kernel.mode.to_string(),
        clusters: config.clusters,
        build_seconds,
        seconds,
        queries: queries.len(),
        qps: throughput(queries.len(), seconds),
        avg_selectivity,
        sigma_selectivity,
        result_count: warm_count,
        objects_compared: c.objects_compared / reps,
        nodes_visited: c.nodes_visited / reps,
        peak_rss_bytes: peak_rss_bytes(),
    })
}

/// High-water resident set size, where the platform reports it.
pub fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Grid values are ascending upper edges of selectivity buckets.
    Selectivity,
    Dimensionality,
    DatasetSize,
    Clusters,
    Threads,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "selectivity" => SweepAxis::Selectivity,
            "dimensionality" | "dims" => SweepAxis::Dimensionality,
            "dataset_size" | "n" => SweepAxis::DatasetSize,
            "clusters" => SweepAxis::Clusters,
            "threads" => SweepAxis::Threads,
            other => return Err(Error::Config(format!("unknown sweep axis {other:?}"))),
        })
    }
}

/// Everything held fixed by a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepBase {
    pub generator: GeneratorSpec,
    pub methods: Vec<MethodId>,
    pub bench: BenchmarkConfig,
    pub queries: usize,
    pub query_seed: u64,
    /// Selectivity axis: candidate pair queries drawn per bucket.
    pub pool_factor: usize,
    /// Selectivity axis: objects sampled for binning.
    pub binning_sample: usize,
}

impl SweepBase {
    pub fn new(generator: GeneratorSpec, methods: Vec<MethodId>) -> Self {
        Self {
            generator,
            methods,
            bench: BenchmarkConfig::new(MethodId::Seq),
            queries: 1000,
            query_seed: 1,
            pool_factor: 20,
            binning_sample: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub report: BenchmarkReport,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepOutcome {
    pub points: Vec<SweepPoint>,
    pub warnings: Vec<String>,
}

impl SweepOutcome {
    pub fn reports(&self) -> Vec<BenchmarkReport> {
        self.points.iter().map(|p| p.report.clone()).collect()
    }

    fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }
}

/// One report per feasible grid point per method.
pub fn sweep(axis: SweepAxis, grid: &[f64], base: &SweepBase) -> Result<SweepOutcome> {
    if grid.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    let mut out = SweepOutcome::default();
    if axis == SweepAxis::Selectivity {
        return sweep_selectivity(grid, base, out);
    }
    let mut cached: Option<(GeneratorSpec, Arc<DataSet>, Vec<RangeQuery>)> = None;
    for &value in grid {
        let mut gen = base.generator.clone();
        let mut bench = base.bench;
        let as_count = value as usize;
        let feasible = value.is_finite() && value >= 1.0 && value.fract() == 0.0;
        if !feasible && axis != SweepAxis::DatasetSize {
            out.warn(format!("{axis:?} = {value} is infeasible; skipped"));
            continue;
        }
        match axis {
            SweepAxis::Dimensionality => gen.m = as_count,
            SweepAxis::DatasetSize => {
                if !(value.is_finite() && value >= 2.0 && value.fract() == 0.0) {
                    out.warn(format!("dataset size {value} is infeasible; skipped"));
                    continue;
                }
                gen.n = as_count;
            }
            SweepAxis::Clusters => {
                gen.kind = crate::workload::GeneratorKind::Clustered;
                gen.cluster_count = as_count;
                bench.clusters = Some(as_count);
            }
            SweepAxis::Threads => bench.engine.threads = as_count,
            SweepAxis::Selectivity => unreachable!(),
        }
        if gen.kind == crate::workload::GeneratorKind::Clustered {
            bench.clusters = Some(gen.cluster_count);
        }
        let (data, queries) = match &cached {
            Some((spec, d, q)) if *spec == gen => (Arc::clone(d), q.clone()),
            _ => {
                let d = Arc::new(gen.generate()?);
                let q = crate::workload::gen_pair_queries(&d, base.queries, base.query_seed)?;
                cached = Some((gen.clone(), Arc::clone(&d), q.clone()));
                (d, q)
            }
        };
        for &method in &base.methods {
            bench.engine.method = method;
            let report = run_benchmark(&bench, Arc::clone(&data), &queries)?;
            out.points.push(SweepPoint { value, report });
        }
    }
    Ok(out)
}

/// Pair queries binned into `(grid[i-1], grid[i]]` by selectivity on an
/// object sample.
fn sweep_selectivity(
    grid: &[f64],
    base: &SweepBase,
    mut out: SweepOutcome,
) -> Result<SweepOutcome> {
    let data = Arc::new(base.generator.generate()?);
    let buckets = bin_pair_queries(&data, grid, base)?;
    let mut lower = 0.0;
    for (&upper, queries) in grid.iter().zip(&buckets) {
        if queries.is_empty() {
            out.warn(format!(
                "no queries in selectivity bucket ({lower}, {upper}]; skipped"
            ));
            lower = upper;
            continue;
        }
        if queries.len() < base.queries {
            out.warn(format!(
                "selectivity bucket ({lower}, {upper}] holds {} of {} queries",
                queries.len(),
                base.queries
            ));
        }
        for &method in &base.methods {
            let mut bench = base.bench;
            bench.engine.method = method;
            let report = run_benchmark(&bench, Arc::clone(&data), queries)?;
            out.points.push(SweepPoint {
                value: upper,
                report,
            });
        }
        lower = upper;
    }
    Ok(out)
}

/// Draws up to `pool_factor · queries · buckets` pair queries and bins
/// them by selectivity estimated on `binning_sample` objects.
pub fn bin_pair_queries(
    data: &DataSet,
    edges: &[f64],
    base: &SweepBase,
) -> Result<Vec<Vec<RangeQuery>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(base.query_seed);
    let sample = object_sample(data, base.binning_sample, base.query_seed ^ 0x5eed);
    let mut buckets: Vec<Vec<RangeQuery>> = vec![Vec::new(); edges.len()];
    let draws = base.pool_factor * base.queries * edges.len();
    for _ in 0..draws {
        if buckets.iter().all(|b| b.len() >= base.queries) {
            break;
        }
        let q = query_from_pair(data, &mut rng)?;
        let s = joint_selectivity(&sample, &q)?;
        if let Some(i) = edges.iter().position(|&e| s <= e) {
            if buckets[i].len() < base.queries {
                buckets[i].push(q);
            }
        }
    }
    Ok(buckets)
}

fn object_sample(data: &DataSet, size: usize, seed: u64) -> DataSet {
    if data.len() <= size {
        return data.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = rand::seq::index::sample(&mut rng, data.len(), size);
    let mut values = Vec::with_capacity(size * data.dims());
    for i in picks.iter() {
        values.extend_from_slice(data.row(i));
    }
    DataSet::new(data.dims(), values).expect("rows of a valid dataset")
}

pub fn write_report<W: Write>(w: W, reports: &[BenchmarkReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    let err = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(REPORT_HEADER.split(',')).map_err(err)?;
    for r in reports {
        w.write_record([
            r.method.to_string(),
            r.n.to_string(),
            r.m.to_string(),
            r.threads.to_string(),
            r.partitions.to_string(),
            r.kernel.clone(),
            r.clusters.map(|c| c.to_string()).unwrap_or_default(),
            format!("{:.8}", r.avg_selectivity),
            r.queries.to_string(),
            format!("{:.6}", r.seconds),
            format!("{:.3}", r.qps),
            r.objects_compared.to_string(),
            r.nodes_visited.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_report(reports: &[BenchmarkReport], path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(Error::at_path(path))?;
    write_report(std::io::BufWriter::new(f), reports)
}
