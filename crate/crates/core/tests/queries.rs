// SPDX-License-Identifier: Apache-2.0

mod common;

use common::*;
use gptree::geometry::exact_predicate;
use gptree::query::{
    clipped_parts, eps_distance_query, filter, knn_query, range_query, range_query_with,
    refine_candidate, FilterMode, HitTag, QueryOptions, QueryPlan, QueryStats, TrueHitRule,
};
use gptree::{oracle_query, Answer, Ghsi, Predicate, QueryMode};
use proptest::prelude::*;

#[test]
fn range_matches_oracle_in_every_tree_state() {
    let objs = mixed(600, 11);
    let trees = build_all(&objs, config(), unit());
    let mut rng = rng(12);
    for _ in 0..40 {
        let q = query_polygon(&mut rng);
        for theta in [Predicate::Intersects, Predicate::Contains] {
            let want = oracle_query(&objs, &q, QueryMode::Range(theta)).unwrap().ids();
            for (name, tree) in trees.all() {
                assert_eq!(range_query(tree, &trees.table, &q, theta).unwrap(), want, "{name} {q}");
            }
        }
    }
}

#[test]
fn query_rasterization_depth_does_not_change_answers() {
    let objs = mixed(400, 21);
    let trees = build_all(&objs, config(), unit());
    let mut rng = rng(22);
    for _ in 0..25 {
        let q = query_polygon(&mut rng);
        let want = oracle_query(&objs, &q, QueryMode::Range(Predicate::Intersects)).unwrap().ids();
        for depth in [0, 1, 4] {
            let opts = QueryOptions { query_fit_levels: depth, ..Default::default() };
            let got = range_query_with(
                &trees.pruned,
                &trees.table,
                &q,
                Predicate::Intersects,
                &opts,
                &mut QueryStats::default(),
            )
            .unwrap();
            assert_eq!(got, want, "depth {depth}");
        }
    }
}

#[test]
fn line_and_point_queries_match_oracle() {
    let objs = mixed(600, 13);
    let trees = build_all(&objs, config(), unit());
    let mut rng = rng(14);
    for i in 0..40 {
        let q = if i % 2 == 0 {
            let start = query_point(&mut rng).centroid();
            walk(&mut rng, start, 0.01, 20)
        } else {
            query_point(&mut rng)
        };
        let want = oracle_query(&objs, &q, QueryMode::Range(Predicate::Intersects)).unwrap().ids();
        for (name, tree) in trees.all() {
            assert_eq!(range_query(tree, &trees.table, &q, Predicate::Intersects).unwrap(), want, "{name}");
        }
    }
}

#[test]
fn eps_distance_matches_oracle() {
    let objs = mixed(600, 15);
    let trees = build_all(&objs, config(), unit());
    let mut rng = rng(16);
    for i in 0..30 {
        let q = if i % 2 == 0 { query_point(&mut rng) } else { query_polygon(&mut rng) };
        for eps in [0.01, 0.03, 0.1] {
            let want = oracle_query(&objs, &q, QueryMode::EpsDistance(eps)).unwrap().ids();
            for (name, tree) in trees.all() {
                assert_eq!(eps_distance_query(tree, &trees.table, &q, eps).unwrap(), want, "{name} {eps}");
            }
        }
    }
}

#[test]
fn knn_matches_oracle_distances() {
    let objs = mixed(600, 17);
    let trees = build_all(&objs, config(), unit());
    let ghsi = Ghsi::build(&objs, 6, unit()).unwrap();
    let mut rng = rng(18);
    for i in 0..30 {
        let q = if i % 3 == 0 { query_polygon(&mut rng) } else { query_point(&mut rng) };
        for k in [1, 5, 10, 20, 50] {
            let Answer::Ranked(want) = oracle_query(&objs, &q, QueryMode::Knn(k)).unwrap() else {
                unreachable!()
            };
            for (name, tree) in trees.all() {
                let got = knn_query(tree, &trees.table, &ghsi, &q, k).unwrap();
                assert_eq!(got, want, "{name} k={k}");
            }
        }
    }
}

#[test]
fn true_hits_are_sound_and_filtering_is_complete() {
    let objs = mixed(800, 19);
    let trees = build_all(&objs, config(), unit());
    let mut rng = rng(20);
    let mut true_hits = 0;
    for _ in 0..60 {
        let q = query_polygon(&mut rng);
        let want = oracle_query(&objs, &q, QueryMode::Range(Predicate::Intersects)).unwrap().ids();
        for (name, tree) in trees.all() {
            let plan = QueryPlan::new(&q, tree).unwrap();
            let cands = filter(
                tree,
                &plan.cells,
                FilterMode::Range(Predicate::Intersects),
                TrueHitRule::Sound,
                &mut QueryStats::default(),
            );
            for c in &cands {
                assert!(!c.overlaps.is_empty());
                if c.hit_tag == HitTag::TrueHit {
                    true_hits += 1;
                    let g = &trees.table.get(c.s_id).unwrap().geometry;
                    assert!(exact_predicate(&q, g, Predicate::Intersects), "{name} {}", c.s_id);
                }
            }
            let mut ids: Vec<u64> = cands.iter().map(|c| c.s_id).collect();
            ids.sort_unstable();
            let n = ids.len();
            ids.dedup();
            assert_eq!(n, ids.len(), "one match per object");
            assert!(want.iter().all(|id| ids.binary_search(id).is_ok()), "{name}");
        }
    }
    assert!(true_hits > 0);
}

#[test]
fn refinement_agrees_with_exact_predicate_on_clipped_input() {
    let objs = mixed(800, 21);
    let trees = build_all(&objs, config(), unit());
    let mut rng = rng(22);
    let mut checked = 0;
    while checked < 1000 {
        let q = query_polygon(&mut rng);
        let tree = &trees.optimized;
        let plan = QueryPlan::new(&q, tree).unwrap();
        let cands = filter(
            tree,
            &plan.cells,
            FilterMode::Range(Predicate::Intersects),
            TrueHitRule::Sound,
            &mut QueryStats::default(),
        );
        for c in cands.iter().filter(|c| c.hit_tag == HitTag::Uncertain) {
            let e = trees.table.get(c.s_id).unwrap();
            let verdict = refine_candidate(&plan, c, &trees.table, Predicate::Intersects).unwrap();
            assert_eq!(verdict, exact_predicate(&q, &e.geometry, Predicate::Intersects));
            let (qs, ss) = clipped_parts(&plan, c, &trees.table).unwrap();
            let rects: Vec<_> = c.overlaps.iter().map(|o| tree.extent().cell_bounds(o.cell)).collect();
            for s in qs.iter().chain(&ss) {
                assert!(rects.iter().any(|r| gptree::geometry::segment_intersects_rect(s, r)));
            }
            assert!(ss.len() <= e.segments().len());
            checked += 1;
        }
    }
}

#[test]
fn loose_true_hit_rule_is_caught_by_the_oracle() {
    // A query cell can be interior while the object only meets a different
    // part of a larger object cell.
    let objs = mixed(800, 23);
    let trees = build_all(&objs, config(), unit());
    let mut rng = rng(24);
    let mut wrong = 0;
    for _ in 0..100 {
        let q = query_polygon(&mut rng);
        let plan = QueryPlan::new(&q, &trees.basic).unwrap();
        for c in filter(
            &trees.basic,
            &plan.cells,
            FilterMode::Range(Predicate::Intersects),
            TrueHitRule::AnyInterior,
            &mut QueryStats::default(),
        ) {
            let g = &trees.table.get(c.s_id).unwrap().geometry;
            if c.hit_tag == HitTag::TrueHit && !exact_predicate(&q, g, Predicate::Intersects) {
                wrong += 1;
            }
        }
    }
    assert!(wrong > 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eps_answers_grow_with_eps(seed in 0u64..1000, e1 in 0.001f64..0.1, e2 in 0.001f64..0.1) {
        let objs = mixed(150, seed);
        let (tree, table) = gptree::GpTree::build_optimized(&objs, config(), unit()).unwrap();
        let mut r = rng(seed + 1);
        let q = query_point(&mut r);
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let a = eps_distance_query(&tree, &table, &q, lo).unwrap();
        let b = eps_distance_query(&tree, &table, &q, hi).unwrap();
        prop_assert!(a.iter().all(|id| b.binary_search(id).is_ok()));
    }

    #[test]
    fn knn_results_are_prefixes(seed in 0u64..1000, k1 in 1usize..40, k2 in 1usize..40) {
        let objs = mixed(150, seed);
        let (tree, table) = gptree::GpTree::build_optimized(&objs, config(), unit()).unwrap();
        let ghsi = Ghsi::from_table(&table, 5, unit()).unwrap();
        let mut r = rng(seed + 2);
        let q = query_point(&mut r);
        let (lo, hi) = if k1 <= k2 { (k1, k2) } else { (k2, k1) };
        let a = knn_query(&tree, &table, &ghsi, &q, lo).unwrap();
        let b = knn_query(&tree, &table, &ghsi, &q, hi).unwrap();
        prop_assert_eq!(&b[..a.len()], &a[..]);
    }
}
