use std::sync::Arc;

use mdrq_core::engine::{Engine, EngineConfig, MethodId};
use mdrq_core::exec::Executor;
use mdrq_core::kernel::{match_scalar, match_vectorized, MatchKernel};
use mdrq_core::scan::{chunked_and, scan_column, sequential_scan, BitMask};
use mdrq_core::vafile::VaGrid;
use mdrq_core::workload::pair_query;
use mdrq_core::{DataSet, PartitionLayout, RangeQuery};
use proptest::prelude::*;

/// Values from a small grid so that equality with bounds is common.
fn coord() -> impl Strategy<Value = f32> {
    prop_oneof![(0u8..=8).prop_map(|v| v as f32 / 8.0), 0.0f32..1.0]
}

fn dataset(max_n: usize, m: usize) -> impl Strategy<Value = DataSet> {
    prop::collection::vec(prop::collection::vec(coord(), m), 0..max_n)
        .prop_map(move |rows| DataSet::from_rows(m, &rows).unwrap())
}

fn query(m: usize) -> impl Strategy<Value = RangeQuery> {
    prop::collection::vec(prop::option::weighted(0.8, (coord(), coord())), m).prop_map(|preds| {
        RangeQuery::from_predicates(
            preds
                .into_iter()
                .map(|p| p.map(|(a, b)| (a.min(b), a.max(b)))),
        )
        .unwrap()
    })
}

fn data_and_query(max_n: usize) -> impl Strategy<Value = (DataSet, RangeQuery)> {
    (1usize..12).prop_flat_map(move |m| (dataset(max_n, m), query(m)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn kernels_agree(m in 1usize..40, seed in any::<u64>()) {
        let mut rng = seed;
        let mut next = || { rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); ((rng >> 40) % 9) as f32 / 8.0 };
        let obj: Vec<f32> = (0..m).map(|_| next()).collect();
        let (lo, hi): (Vec<f32>, Vec<f32>) = (0..m).map(|_| { let (a, b) = (next(), next()); (a.min(b), a.max(b)) }).unzip();
        let q = RangeQuery::new(lo.clone(), hi.clone()).unwrap();
        let naive = (0..m).all(|j| lo[j] <= obj[j] && obj[j] <= hi[j]);
        prop_assert_eq!(match_scalar(&obj, &q).unwrap(), naive);
        prop_assert_eq!(match_vectorized(&obj, &q).unwrap(), naive);
    }

    #[test]
    fn every_method_matches_the_oracle((data, q) in data_and_query(300), p in 1usize..5) {
        let data = Arc::new(data);
        let expect = sequential_scan(&data, &q, MatchKernel::SCALAR).unwrap();
        for method in MethodId::ALL {
            let mut cfg = EngineConfig::new(method).threads(2).partitions(p).seed(5);
            cfg.rstar = mdrq_core::rstar::RStarConfig::with_capacity(6);
            let e = Engine::build(Arc::clone(&data), cfg).unwrap();
            prop_assert_eq!(&e.search(&q).unwrap(), &expect, "{}", method);
        }
    }

    #[test]
    fn shrinking_a_query_shrinks_the_result((data, q) in data_and_query(200), dim_pick in any::<prop::sample::Index>()) {
        let m = q.dims();
        let d = dim_pick.index(m);
        let (lo, hi) = (q.lower()[d], q.upper()[d]);
        let narrower = if lo.is_finite() {
            let mid = lo + (hi - lo) / 2.0;
            q.clone().with_predicate(d, lo, mid).unwrap()
        } else {
            q.clone().with_predicate(d, 0.25, 0.5).unwrap()
        };
        let wide = sequential_scan(&data, &q, MatchKernel::SCALAR).unwrap();
        let narrow = sequential_scan(&data, &narrower, MatchKernel::SCALAR).unwrap();
        prop_assert!(narrow.iter().all(|id| wide.contains(*id)));
    }

    #[test]
    fn permuting_objects_permutes_ids((data, q) in data_and_query(200), seed in any::<u64>()) {
        let layout = PartitionLayout::new(data.len(), 1, seed).unwrap();
        let perm = layout.members(0).to_vec();
        use rand::{seq::SliceRandom, SeedableRng};
        let mut perm = perm;
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let rows: Vec<Vec<f32>> = perm.iter().map(|&i| data.row(i as usize).to_vec()).collect();
        let shuffled = Arc::new(DataSet::from_rows(data.dims(), &rows).unwrap());
        let base = sequential_scan(&data, &q, MatchKernel::SCALAR).unwrap();
        for method in [MethodId::KdTree, MethodId::RStar, MethodId::VaFile] {
            let e = Engine::build(Arc::clone(&shuffled), EngineConfig::new(method)).unwrap();
            let mut mapped: Vec<u32> = e.search(&q).unwrap().iter().map(|&i| perm[i as usize]).collect();
            mapped.sort_unstable();
            prop_assert_eq!(mapped.as_slice(), base.ids());
        }
    }

    #[test]
    fn layouts_are_balanced_disjoint_covers(n in 0usize..500, p in 1usize..20, seed in any::<u64>()) {
        let l = PartitionLayout::new(n, p, seed).unwrap();
        let sizes = l.sizes();
        prop_assert_eq!(sizes.len(), p);
        prop_assert_eq!(sizes.iter().sum::<usize>(), n);
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        let mut all: Vec<u32> = (0..p).flat_map(|i| l.members(i).to_vec()).collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n as u32).collect::<Vec<_>>());
    }

    #[test]
    fn pair_queries_contain_their_objects(a in prop::collection::vec(coord(), 1..20), seed in any::<u64>()) {
        let b: Vec<f32> = a.iter().enumerate().map(|(j, v)| (v + (seed >> (j % 60)) as f32 % 1.0) % 1.0).collect();
        let q = pair_query(&a, &b);
        prop_assert!(match_scalar(&a, &q).unwrap());
        prop_assert!(match_scalar(&b, &q).unwrap());
    }

    #[test]
    fn grid_intervals_are_monotone(lo in -10.0f32..10.0, width in 0.0f32..10.0, mut xs in prop::collection::vec(-20.0f32..20.0, 2..50)) {
        let g = VaGrid::new(vec![lo], vec![lo + width]).unwrap();
        xs.sort_by(f32::total_cmp);
        let idx: Vec<u8> = xs.iter().map(|&x| g.interval(0, x)).collect();
        prop_assert!(idx.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(idx.iter().all(|&i| i < 4));
    }

    #[test]
    fn chunked_and_matches_naive(cols in prop::collection::vec(prop::collection::vec(coord(), 130), 1..4), chunks in 1usize..6) {
        let masks: Vec<BitMask> = cols.iter().map(|c| scan_column(c, 0.25, 0.75)).collect();
        let words: Vec<u64> = chunked_and(&masks, chunks, &Executor::sequential()).concat();
        for i in 0..130 {
            let expect = cols.iter().all(|c| (0.25..=0.75).contains(&c[i]));
            prop_assert_eq!((words[i / 64] >> (i % 64)) & 1 == 1, expect);
        }
    }
}
