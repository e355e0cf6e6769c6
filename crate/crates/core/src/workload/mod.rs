//! Synthetic datasets and query workloads.

mod gmrqb;
mod templates;

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::DataSet;
use crate::error::{Error, Result};
use crate::query::RangeQuery;
use crate::rstar::Mbr;

pub use gmrqb::{
    categorical_hash, gen_gmrqb, gmrqb_records, load_csv, write_gmrqb_csv, ColumnKind, CsvSchema,
    Field, GMRQB_COLUMNS, GMRQB_DIMS,
};
pub use templates::{
    instantiate_template, PredicateStyle, QueryTemplate, TemplatePredicate, TemplateSet,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    #[default]
    Uniform,
    Clustered,
}

/// Placement of cluster centers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterLayout {
    /// Cluster `k` of `K` is centered at `(k + u) / K` in every dimension,
    /// `u` uniform in `[0, 1)`: clusters spread along the main diagonal.
    #[default]
    Diagonal,
    /// Every center coordinate drawn independently from `[0, 1)`.
    Uniform,
}

pub const DEFAULT_CLUSTER_EXTENT: f32 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub n: usize,
    pub m: usize,
    pub cluster_count: usize,
    /// Side length of each cluster box as a fraction of the unit domain.
    pub cluster_extent: f32,
    pub layout: ClusterLayout,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn uniform(n: usize, m: usize, seed: u64) -> Self {
        Self {
            kind: GeneratorKind::Uniform,
            n,
            m,
            cluster_count: 1,
            cluster_extent: DEFAULT_CLUSTER_EXTENT,
            layout: ClusterLayout::Diagonal,
            seed,
        }
    }

    pub fn clustered(n: usize, m: usize, clusters: usize, seed: u64) -> Self {
        Self {
            kind: GeneratorKind::Clustered,
            cluster_count: clusters,
            ..Self::uniform(n, m, seed)
        }
    }

    pub fn with_extent(mut self, extent: f32) -> Self {
        self.cluster_extent = extent;
        self
    }

    pub fn with_layout(mut self, layout: ClusterLayout) -> Self {
        self.layout = layout;
        self
    }

    pub fn generate(&self) -> Result<DataSet> {
        match self.kind {
            GeneratorKind::Uniform => gen_uniform(self),
            GeneratorKind::Clustered => gen_clustered(self),
        }
    }
}

/// `n·m` independent uniform draws from `[0, 1)`.
pub fn gen_uniform(spec: &GeneratorSpec) -> Result<DataSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let values = (0..spec.n * spec.m).map(|_| rng.gen::<f32>()).collect();
    DataSet::new(spec.m, values)
}

/// The boxes `gen_clustered` draws from, in cluster order.
pub fn cluster_boxes(spec: &GeneratorSpec) -> Result<Vec<Mbr>> {
    Ok(cluster_geometry(spec, &mut ChaCha8Rng::seed_from_u64(spec.seed))?.0)
}

fn cluster_geometry(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Result<(Vec<Mbr>, f32)> {
    if spec.cluster_count == 0 {
        return Err(Error::Config("cluster count must be at least 1".into()));
    }
    if !(spec.cluster_extent > 0.0 && spec.cluster_extent <= 1.0) {
        return Err(Error::Config("cluster extent must lie in (0, 1]".into()));
    }
    let e = spec.cluster_extent;
    let k_total = spec.cluster_count;
    let place = |c: f32| (c - e / 2.0).clamp(0.0, 1.0 - e);
    let boxes = (0..k_total)
        .map(|k| {
            let low: Vec<f32> = match spec.layout {
                ClusterLayout::Diagonal => {
                    let c = (k as f32 + rng.gen::<f32>()) / k_total as f32;
                    vec![place(c); spec.m]
                }
                ClusterLayout::Uniform => (0..spec.m).map(|_| place(rng.gen())).collect(),
            };
            let high = low.iter().map(|&l| (l + e).min(1.0)).collect();
            Mbr::new(low, high)
        })
        .collect();
    Ok((boxes, e))
}

/// Objects assigned to clusters round-robin, uniform inside each box.
pub fn gen_clustered(spec: &GeneratorSpec) -> Result<DataSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (boxes, _) = cluster_geometry(spec, &mut rng)?;
    let mut values = Vec::with_capacity(spec.n * spec.m);
    for i in 0..spec.n {
        let b = &boxes[i % boxes.len()];
        for j in 0..spec.m {
            let v = b.low[j] + rng.gen::<f32>() * (b.high[j] - b.low[j]);
            values.push(v.min(b.high[j]));
        }
    }
    DataSet::new(spec.m, values)
}

/// Complete-match query spanned by two distinct random objects.
pub fn gen_query_from_pair(data: &DataSet, seed: u64) -> Result<RangeQuery> {
    query_from_pair(data, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// `count` pair queries from one seeded stream.
pub fn gen_pair_queries(data: &DataSet, count: usize, seed: u64) -> Result<Vec<RangeQuery>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| query_from_pair(data, &mut rng))
        .collect()
}

pub(crate) fn query_from_pair<R: Rng>(data: &DataSet, rng: &mut R) -> Result<RangeQuery> {
    let n = data.len();
    if n < 2 {
        return Err(Error::NotEnoughObjects {
            needed: 2,
            found: n,
        });
    }
    let a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    Ok(pair_query(data.row(a), data.row(b)))
}

/// Per-dimension min/max box of two objects.
pub fn pair_query(a: &[f32], b: &[f32]) -> RangeQuery {
    let lower = a.iter().zip(b).map(|(x, y)| x.min(*y)).collect();
    let upper = a.iter().zip(b).map(|(x, y)| x.max(*y)).collect();
    RangeQuery::new(lower, upper).expect("finite objects give valid bounds")
}

#[derive(Serialize, Deserialize)]
struct QueryLine {
    lower: Vec<Option<f32>>,
    upper: Vec<Option<f32>>,
}

/// One JSON object per line; unbounded sides are written as `null`.
pub fn write_queries<W: Write>(mut w: W, queries: &[RangeQuery]) -> Result<()> {
    for q in queries {
        let side = |v: &[f32]| v.iter().map(|&x| x.is_finite().then_some(x)).collect();
        let line = QueryLine {
            lower: side(q.lower()),
            upper: side(q.upper()),
        };
        serde_json::to_writer(&mut w, &line).map_err(|e| Error::Format(e.to_string()))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_queries<R: BufRead>(r: R) -> Result<Vec<RangeQuery>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| Error::QueryBatch {
            line: i + 1,
            message,
        };
        let q: QueryLine = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        let lower = q
            .lower
            .iter()
            .map(|v| v.unwrap_or(f32::NEG_INFINITY))
            .collect();
        let upper = q.upper.iter().map(|v| v.unwrap_or(f32::INFINITY)).collect();
        out.push(RangeQuery::new(lower, upper).map_err(|e| bad(e.to_string()))?);
    }
    Ok(out)
}

pub fn save_queries(path: &Path, queries: &[RangeQuery]) -> Result<()> {
    let f = File::create(path).map_err(Error::at_path(path))?;
    write_queries(BufWriter::new(f), queries)
}

pub fn load_queries(path: &Path) -> Result<Vec<RangeQuery>> {
    let f = File::open(path).map_err(Error::at_path(path))?;
    read_queries(BufReader::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selectivity::joint_selectivity;

    #[test]
    fn uniform_is_deterministic_and_in_range() {
        let spec = GeneratorSpec::uniform(1000, 3, 5);
        let a = gen_uniform(&spec).unwrap();
        assert_eq!(a, gen_uniform(&spec).unwrap());
        assert!(a.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(gen_uniform(&GeneratorSpec::uniform(0, 3, 5))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn uniform_means() {
        let d = gen_uniform(&GeneratorSpec::uniform(100_000, 5, 9)).unwrap();
        for j in 0..5 {
            let mean: f64 = d.rows().map(|r| r[j] as f64).sum::<f64>() / d.len() as f64;
            assert!((0.495..=0.505).contains(&mean), "dim {j} mean {mean}");
        }
    }

    #[test]
    fn clustered_objects_stay_in_their_box() {
        for layout in [ClusterLayout::Diagonal, ClusterLayout::Uniform] {
            let spec = GeneratorSpec::clustered(5000, 4, 5, 3)
                .with_extent(0.1)
                .with_layout(layout);
            let d = gen_clustered(&spec).unwrap();
            let boxes = cluster_boxes(&spec).unwrap();
            for (i, row) in d.rows().enumerate() {
                assert!(boxes[i % 5].contains(&Mbr::point(row)), "object {i}");
            }
            for b in &boxes {
                for j in 0..4 {
                    assert!((b.high[j] - b.low[j] - 0.1).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn full_extent_cluster_is_unit_cube() {
        let spec = GeneratorSpec::clustered(10, 3, 1, 1).with_extent(1.0);
        let b = &cluster_boxes(&spec).unwrap()[0];
        assert_eq!(b.low, vec![0.0; 3]);
        assert_eq!(b.high, vec![1.0; 3]);
    }

    #[test]
    fn pair_query_is_min_max_box() {
        let q = pair_query(&[0.2, 0.8], &[0.6, 0.4]);
        assert_eq!(q.lower(), &[0.2, 0.4]);
        assert_eq!(q.upper(), &[0.6, 0.8]);
        let p = pair_query(&[0.5], &[0.5]);
        assert_eq!(p.lower(), p.upper());
    }

    #[test]
    fn pair_queries_select_their_generators() {
        let d = gen_uniform(&GeneratorSpec::uniform(500, 4, 2)).unwrap();
        for q in gen_pair_queries(&d, 50, 8).unwrap() {
            assert!(joint_selectivity(&d, &q).unwrap() >= 2.0 / 500.0);
        }
        let one = DataSet::new(2, vec![0.0, 0.0]).unwrap();
        assert!(gen_query_from_pair(&one, 0).is_err());
    }

    #[test]
    fn query_batch_round_trip() {
        let qs = vec![
            RangeQuery::new(vec![0.1, 0.2], vec![0.3, 0.4]).unwrap(),
            RangeQuery::unbounded(2)
                .with_predicate(1, 0.5, 0.5)
                .unwrap(),
        ];
        let mut buf = Vec::new();
        write_queries(&mut buf, &qs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().nth(1).unwrap().contains("null"));
        assert_eq!(read_queries(buf.as_slice()).unwrap(), qs);
        assert!(read_queries("{\"lower\":[1],\"upper\":[0]}\n".as_bytes()).is_err());
    }
}
