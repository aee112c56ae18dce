use hypertile::avd::{build_avd_cells, build_avd_points, AvdIndex};
use hypertile::metrics::{d1, d2};
use hypertile::oracle::{nn_bruteforce, Metric};
use hypertile::quadtree::QuadTree;
use hypertile::spanner::build_spanner;
use hypertile::{CellId, HPoint};
use proptest::prelude::*;

fn margin_cell() -> impl Strategy<Value = CellId> {
    (2i32..9).prop_flat_map(|depth| {
        let side = 1i64 << depth;
        (Just(depth), side / 4..side / 2).prop_map(|(d, k)| CellId::from_i64(-d, &[k]))
    })
}

fn query_cell() -> impl Strategy<Value = CellId> {
    (0i32..11).prop_flat_map(|depth| (Just(depth), 0..1i64 << depth).prop_map(|(d, k)| CellId::from_i64(-d, &[k])))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn avd_matches_bruteforce(points in prop::collection::vec(margin_cell(), 1..24),
                              queries in prop::collection::vec(query_cell(), 1..40)) {
        let ix = build_avd_cells(&points).unwrap();
        for q in &queries {
            prop_assert_eq!(ix.query(q).ok(), nn_bruteforce(&points, q, Metric::D2));
        }
        let back = AvdIndex::from_json(&ix.to_json()).unwrap();
        for q in &queries {
            prop_assert_eq!(back.query(q).unwrap(), ix.query(q).unwrap());
        }
    }

    #[test]
    fn spanner_within_sandwich(points in prop::collection::vec(query_cell(), 2..20)) {
        let g = build_spanner(&points).unwrap();
        for (i, p) in points.iter().enumerate() {
            let dist = g.dijkstra(g.input_vertex[i]);
            for (j, q) in points.iter().enumerate() {
                let ds = dist[g.input_vertex[j]];
                prop_assert!(ds >= d1(p, q) as f64 && ds <= d2(p, q) as f64);
            }
        }
    }

    #[test]
    fn quadtree_json_round_trip(points in prop::collection::vec(query_cell(), 1..30)) {
        let t = QuadTree::build(2, &points).unwrap();
        let v = t.to_json();
        prop_assert_eq!(QuadTree::from_json(&v).unwrap().to_json(), v);
    }
}

#[test]
fn continuous_points_answer_themselves() {
    let pts: Vec<HPoint> = (0..20)
        .map(|i| HPoint::new(vec![i as f64 * 0.7 - 3.0], 0.05 * (1 + i % 7) as f64).unwrap())
        .collect();
    let ix = build_avd_points(&pts).unwrap();
    for (i, p) in pts.iter().enumerate() {
        let got = ix.query_hyperbolic(p).unwrap();
        let moved = ix.transform().unwrap().apply(p);
        let cell = hypertile::hyperbolic::embed(&moved).unwrap();
        assert_eq!(ix.points()[got], cell, "{i}");
    }
}
