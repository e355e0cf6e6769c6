//! End-to-end acceptance checks. Runs sequentially (timing-sensitive) and
//! prints one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use mdrq_core::bench::{
    bin_pair_queries, run_benchmark, BenchmarkConfig, BenchmarkReport, SweepBase,
};
use mdrq_core::engine::{Engine, EngineConfig, MethodId};
use mdrq_core::exec::physical_cores;
use mdrq_core::kdtree::KdTree;
use mdrq_core::kernel::{match_scalar, match_vectorized, KernelMode, MatchKernel};
use mdrq_core::parallel::Partition;
use mdrq_core::rstar::{RStarConfig, RStarTree};
use mdrq_core::scan::{sequential_scan, VerticalScan};
use mdrq_core::selectivity::selectivity;
use mdrq_core::vafile::VaFile;
use mdrq_core::workload::{gen_gmrqb, gen_pair_queries, GeneratorSpec, TemplateSet};
use mdrq_core::{DataSet, Executor, RangeQuery};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Self {
            pass,
            summary: summary.into(),
            details: Vec::new(),
        }
    }

    fn detail(mut self, d: impl Into<String>) -> Self {
        self.details.push(d.into());
        self
    }
}

fn cores() -> usize {
    std::env::var("MDRQ_PHYSICAL_CORES")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(physical_cores)
        .max(1)
}

fn bench(
    method: MethodId,
    threads: usize,
    data: &Arc<DataSet>,
    queries: &[RangeQuery],
) -> BenchmarkReport {
    let mut cfg = BenchmarkConfig::new(method).with_engine(|e| e.threads(threads).seed(7));
    cfg.selectivity_sample = 200;
    run_benchmark(&cfg, Arc::clone(data), queries).expect("benchmark runs")
}

fn oracle_equivalence() -> Outcome {
    let sets = [
        ("10k x 5 uniform", GeneratorSpec::uniform(10_000, 5, 11)),
        ("10k x 20 uniform", GeneratorSpec::uniform(10_000, 20, 12)),
        (
            "10k x 5 clustered(5)",
            GeneratorSpec::clustered(10_000, 5, 5, 13),
        ),
    ];
    let mut mismatches = Vec::new();
    let mut checked = 0usize;
    for (name, spec) in sets {
        let data = Arc::new(spec.generate().unwrap());
        let queries = gen_pair_queries(&data, 500, 14).unwrap();
        let expect: Vec<_> = queries
            .iter()
            .map(|q| sequential_scan(&data, q, MatchKernel::SCALAR).unwrap())
            .collect();
        for method in MethodId::ALL {
            for mode in [KernelMode::Scalar, KernelMode::Vectorized] {
                let cfg = EngineConfig::new(method)
                    .threads(cores())
                    .partitions(4)
                    .kernel(MatchKernel::new(mode))
                    .seed(3);
                let engine = Engine::build(Arc::clone(&data), cfg).unwrap();
                for (i, (q, e)) in queries.iter().zip(&expect).enumerate() {
                    checked += 1;
                    let got = engine.search(q).unwrap();
                    if &got != e {
                        let (extra, missing) = got.diff(e);
                        mismatches.push(format!(
                            "{name} {method}/{mode} query {i}: extra {extra:?} missing {missing:?}"
                        ));
                    }
                }
            }
        }
    }
    let mut o = Outcome::new(
        mismatches.is_empty(),
        format!(
            "{checked} (method, kernel, query) results vs oracle, {} mismatches",
            mismatches.len()
        ),
    );
    for m in mismatches.into_iter().take(5) {
        o = o.detail(m);
    }
    o
}

fn kernel_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut disagreements = 0usize;
    let mut oracle_disagreements = 0usize;
    let mut boundary = 0usize;
    let mut matched = 0usize;
    let pairs = 100_000;
    for m in [1usize, 7, 8, 9, 20, 100] {
        for i in 0..pairs {
            let mut lo = Vec::with_capacity(m);
            let mut hi = Vec::with_capacity(m);
            let mut obj = Vec::with_capacity(m);
            for _ in 0..m {
                let (a, b): (f32, f32) = (rng.gen(), rng.gen());
                let (l, h) = if rng.gen_bool(0.1) {
                    (a, a)
                } else {
                    (a.min(b), a.max(b))
                };
                lo.push(l);
                hi.push(h);
                // Mostly inside so that matches are common at high m; some on
                // the bounds exactly, some just outside.
                let v = match rng.gen_range(0..20) {
                    0 => l,
                    1 => h,
                    2 => f32::from_bits(l.to_bits().wrapping_sub(1)),
                    3 => h + f32::EPSILON,
                    _ if i % 2 == 0 => l + (h - l) * rng.gen::<f32>(),
                    _ => rng.gen(),
                };
                if v == l || v == h {
                    boundary += 1;
                }
                obj.push(v);
            }
            // Every tenth pair sits exactly on the box corners.
            if i % 10 == 0 {
                for j in 0..m {
                    obj[j] = if j % 2 == 0 { lo[j] } else { hi[j] };
                }
            }
            let q = RangeQuery::new(lo.clone(), hi.clone()).unwrap();
            let s = match_scalar(&obj, &q).unwrap();
            let v = match_vectorized(&obj, &q).unwrap();
            let naive = (0..m).all(|j| lo[j] <= obj[j] && obj[j] <= hi[j]);
            disagreements += (s != v) as usize;
            oracle_disagreements += (s != naive) as usize;
            matched += s as usize;
        }
    }
    Outcome::new(
        disagreements == 0 && oracle_disagreements == 0,
        format!(
            "6 x {pairs} pairs, vector/scalar disagreements {disagreements}, scalar/naive {oracle_disagreements}"
        ),
    )
    .detail(format!("{matched} matching pairs, {boundary} boundary-equal coordinates"))
}

fn selectivity_product_law() -> Outcome {
    let data = GeneratorSpec::uniform(100_000, 5, 31).generate().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let mut err = 0.0;
    let count = 200;
    for _ in 0..count {
        let (mut lo, mut hi) = (vec![], vec![]);
        for _ in 0..5 {
            let (a, b): (f32, f32) = (rng.gen(), rng.gen());
            lo.push(a.min(b));
            hi.push(a.max(b));
        }
        let s = selectivity(&data, &RangeQuery::new(lo, hi).unwrap()).unwrap();
        err += (s.joint - s.independent_estimate()).abs();
    }
    let mean_pp = err / count as f64 * 100.0;
    Outcome::new(
        mean_pp <= 0.5,
        format!("mean |joint - product| = {mean_pp:.4} pp over {count} queries (limit 0.5)"),
    )
}

fn crossover() -> Outcome {
    let t = cores();
    let data = Arc::new(GeneratorSpec::uniform(1_000_000, 5, 41).generate().unwrap());
    let mut base = SweepBase::new(GeneratorSpec::uniform(0, 5, 0), vec![]);
    base.queries = 200;
    base.query_seed = 42;
    base.pool_factor = 100;
    base.binning_sample = 5000;
    let edges = [0.001, 0.049_999, 1.0];
    let buckets = bin_pair_queries(&data, &edges, &base).unwrap();
    let (low, high) = (&buckets[0], &buckets[2]);
    let kd_low = bench(MethodId::KdTree, t, &data, low);
    let hs_low = bench(MethodId::HScan, t, &data, low);
    let kd_high = bench(MethodId::KdTree, t, &data, high);
    let hs_high = bench(MethodId::HScan, t, &data, high);
    let ok_low = !low.is_empty() && kd_low.qps > hs_low.qps;
    let ok_high = !high.is_empty() && hs_high.qps >= kd_high.qps;
    Outcome::new(
        ok_low && ok_high,
        format!(
            "t={t}: sel<=0.1% kd {:.0} vs hscan {:.0} q/s; sel>=5% kd {:.1} vs hscan {:.1} q/s",
            kd_low.qps, hs_low.qps, kd_high.qps, hs_high.qps
        ),
    )
    .detail(format!(
        "buckets: {} queries (mean sel {:.4}%), {} queries (mean sel {:.2}%)",
        low.len(),
        kd_low.avg_selectivity * 100.0,
        high.len(),
        kd_high.avg_selectivity * 100.0
    ))
}

fn dimensionality() -> Outcome {
    let t = cores();
    let n = 100_000;
    let queries = 1000;
    let d5 = Arc::new(GeneratorSpec::uniform(n, 5, 51).generate().unwrap());
    let d100 = Arc::new(GeneratorSpec::uniform(n, 100, 52).generate().unwrap());
    let q5 = gen_pair_queries(&d5, queries, 53).unwrap();
    let q100 = gen_pair_queries(&d100, queries, 54).unwrap();
    let h5 = bench(MethodId::HScan, t, &d5, &q5);
    let h100 = bench(MethodId::HScan, t, &d100, &q100);
    let ratio = h5.qps / h100.qps;
    let scan_ok = ratio <= 3.0;

    let tree = KdTree::build(Partition::whole(&d100), MatchKernel::default(), 55);
    let mut fractions = Vec::new();
    for q in &q100 {
        let s = mdrq_core::selectivity::joint_selectivity(&d100, q).unwrap();
        if s < 0.0001 {
            let mut stats = Default::default();
            tree.range_search_counted(q, &mut stats).unwrap();
            fractions.push(stats.nodes_visited as f64 / tree.len() as f64);
        }
    }
    let mean_frac = fractions.iter().sum::<f64>() / fractions.len().max(1) as f64;
    let kd_ok = !fractions.is_empty() && mean_frac > 0.5;
    Outcome::new(
        scan_ok && kd_ok,
        format!(
            "hscan m=5 {:.0} q/s vs m=100 {:.0} q/s (ratio {ratio:.2}, limit 3); kd visited fraction at m=100 {:.4}% (limit >50%)",
            h5.qps,
            h100.qps,
            mean_frac * 100.0
        ),
    )
    .detail(format!("hscan part {}", if scan_ok { "PASS" } else { "FAIL" }))
    .detail(format!(
        "kd visited-node part {} over {} queries with selectivity < 0.01%",
        if kd_ok { "PASS" } else { "FAIL" },
        fractions.len()
    ))
}

fn threading() -> Outcome {
    let cores = cores();
    let data = Arc::new(GeneratorSpec::uniform(1_000_000, 5, 61).generate().unwrap());
    let queries = gen_pair_queries(&data, 200, 62).unwrap();
    let qps: Vec<f64> = (1..=cores)
        .map(|t| bench(MethodId::HScan, t, &data, &queries).qps)
        .collect();
    let monotone = qps.windows(2).all(|w| w[1] >= 0.9 * w[0]);
    let speedup = qps[cores - 1] / qps[0];
    let speedup_ok = cores < 4 || speedup >= 2.0;
    let mut o = Outcome::new(
        monotone && speedup_ok,
        format!(
            "physical cores {cores}: q/s {:?}; speedup {speedup:.2}{}",
            qps.iter().map(|q| q.round()).collect::<Vec<_>>(),
            if cores < 4 {
                " (speedup clause n/a below 4 cores)"
            } else {
                ""
            }
        ),
    );
    if cores == 1 {
        o = o.detail("single physical core: only t = 1 is measurable, the trend is vacuous");
    }
    o
}

fn va_occupancy() -> Outcome {
    let n = 1_000_000;
    let data = GeneratorSpec::uniform(n, 5, 71).generate().unwrap();
    let va = VaFile::build(&data, MatchKernel::default());
    let occ = va.occupancy();
    let target = n as f64 / 1024.0;
    let within = (occ.mean - target).abs() <= 0.1 * target;
    let audit = va.audit(n);
    Outcome::new(
        within && audit.is_ok(),
        format!(
            "mean occupied-bucket size {:.1} vs {target:.1} (+-10%), audit {}",
            occ.mean,
            match &audit {
                Ok(()) => "ok".to_string(),
                Err(e) => e.clone(),
            }
        ),
    )
    .detail(occ.to_string())
}

fn structural_audits() -> Outcome {
    let mut failures = Vec::new();
    let mut lines = Vec::new();
    for (i, m) in [3usize, 5, 19].into_iter().enumerate() {
        let data = GeneratorSpec::uniform(100_000, m, 80 + i as u64)
            .generate()
            .unwrap();
        let part = Partition::whole(&data);
        let start = Instant::now();
        let r = RStarTree::build(part.clone(), RStarConfig::default(), 9).unwrap();
        let r_secs = start.elapsed().as_secs_f64();
        match r.audit() {
            Ok(a) => lines.push(format!(
                "m={m}: R* height {} nodes {} leaves {} ({:.1}s build), {}",
                a.height,
                a.nodes,
                a.leaves,
                r_secs,
                r.stats().to_string().replace('\n', "; ")
            )),
            Err(e) => failures.push(format!("m={m} R*: {e}")),
        }
        let kd = KdTree::build(part, MatchKernel::default(), 10);
        match kd.audit() {
            Ok(a) => lines.push(format!(
                "m={m}: kd nodes {} max depth {} mean depth {:.1}",
                a.nodes, a.max_depth, a.mean_depth
            )),
            Err(e) => failures.push(format!("m={m} kd: {e}")),
        }
    }
    let mut o = Outcome::new(
        failures.is_empty(),
        format!(
            "R* and kd audits at m in {{3, 5, 19}}, 100k objects: {} failures",
            failures.len()
        ),
    );
    for l in failures.into_iter().chain(lines) {
        o = o.detail(l);
    }
    o
}

fn cluster_trend() -> Outcome {
    let t = cores();
    let mut sel = Vec::new();
    let mut ratios = Vec::new();
    let mut details = Vec::new();
    for k in [1usize, 5, 10, 20] {
        let data = Arc::new(
            GeneratorSpec::clustered(100_000, 5, k, 90 + k as u64)
                .generate()
                .unwrap(),
        );
        let queries = gen_pair_queries(&data, 1000, 91).unwrap();
        let mut cfg = BenchmarkConfig::new(MethodId::KdTree).with_engine(|e| e.threads(t).seed(7));
        cfg.selectivity_sample = 1000;
        cfg.clusters = Some(k);
        let kd = run_benchmark(&cfg, Arc::clone(&data), &queries).unwrap();
        let hs = bench(MethodId::HScan, t, &data, &queries);
        sel.push(kd.avg_selectivity);
        ratios.push(kd.qps / hs.qps);
        details.push(format!(
            "{k} clusters: mean sel {:.2}%, kd {:.0} q/s, hscan {:.0} q/s",
            kd.avg_selectivity * 100.0,
            kd.qps,
            hs.qps
        ));
    }
    let increasing = sel.windows(2).all(|w| w[1] > w[0]);
    let narrows = ratios[3] < ratios[0];
    let mut o = Outcome::new(
        increasing && narrows,
        format!(
            "selectivity strictly increasing: {increasing}; kd/hscan throughput ratio {:.2} -> {:.2}",
            ratios[0], ratios[3]
        ),
    );
    for d in details {
        o = o.detail(d);
    }
    o
}

fn partial_match() -> Outcome {
    let t = cores();
    let data = Arc::new(gen_gmrqb(1_000_000, 101).unwrap());
    let template = TemplateSet::gmrqb().get(1).cloned().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let queries: Vec<RangeQuery> = (0..200)
        .map(|_| mdrq_core::workload::instantiate_template(&template, &data, rng.gen()).unwrap())
        .collect();

    let exec = if t == 1 {
        Arc::new(Executor::sequential())
    } else {
        Executor::with_threads(t).unwrap()
    };
    let vs = VerticalScan::from_dataset(&data, exec);
    for q in &queries {
        vs.search(q).unwrap();
    }
    let scans = vs.counters().snapshot().columns_scanned;
    let exact = scans == 2 * queries.len() as u64;

    let v = bench(MethodId::VScan, t, &data, &queries);
    let h = bench(MethodId::HScan, t, &data, &queries);
    Outcome::new(
        exact && v.qps > h.qps,
        format!(
            "column scans {scans} for {} queries (expect {}); vscan {:.1} q/s vs hscan {:.1} q/s",
            queries.len(),
            2 * queries.len(),
            v.qps,
            h.qps
        ),
    )
    .detail(format!(
        "mean selectivity {:.3}%",
        v.avg_selectivity * 100.0
    ))
}

fn main() -> ExitCode {
    // `cargo test` passes harness flags; a name filter selects criteria.
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    type Check = (&'static str, fn() -> Outcome);
    let criteria: [Check; 10] = [
        ("oracle_equivalence", oracle_equivalence),
        ("kernel_equivalence", kernel_equivalence),
        ("selectivity_product_law", selectivity_product_law),
        ("crossover_trend", crossover),
        ("dimensionality_robustness", dimensionality),
        ("threading_trend", threading),
        ("vafile_occupancy", va_occupancy),
        ("structural_audits", structural_audits),
        ("cluster_trend", cluster_trend),
        ("partial_match_advantage", partial_match),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "{status} criterion {:>2} {name}: {} [{:.1}s]",
            i + 1,
            o.summary,
            start.elapsed().as_secs_f64()
        );
        for d in &o.details {
            println!("       {d}");
        }
        failed += (!o.pass) as usize;
    }
    println!("acceptance: {failed} failing");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
