//! Seeded oracle suites over generated sets, summarized as a JSON report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::avd::{additive_window, build_avd_cells, build_avd_points};
use crate::datasets;
use crate::error::Result;
use crate::hyperbolic::{distortion_report, hyperbolic_distance, DistortionReport};
use crate::metrics::{bridge_level_estimate, d1, d2, d2_path};
use crate::oracle::{d1_bfs, nn_bruteforce, nn_bruteforce_hyperbolic, CellGraphWindow, Metric};
use crate::quadtree::QuadTree;
use crate::spanner::{build_hyperbolic_spanner_parts, build_spanner};
use crate::tiling::CellId;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub cases: usize,
    pub violations: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Constants {
    pub quadtree_nodes_per_point: f64,
    pub refined_nodes_per_tree_node: f64,
    pub avd_regions_per_point: f64,
    pub avd_max_representatives: usize,
    pub avd_max_adjacent_compressed: usize,
    pub spanner_steiner_per_point: f64,
    pub spanner_edges_per_point: f64,
    pub avd_hyperbolic_max_error: f64,
    pub avd_hyperbolic_window: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub dim: usize,
    pub n: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub constants: Constants,
    pub distortion: DistortionReport,
    pub pass: bool,
}

fn check(name: &'static str, cases: usize, violations: usize) -> Check {
    Check {
        name,
        cases,
        violations,
        pass: violations == 0,
    }
}

/// Smallest level used for an `n`-point in-margin set.
pub fn margin_depth(n: usize) -> i32 {
    -2 - 2 * (n.max(2) as f64).log2().ceil() as i32
}

fn pair_checks(rng: &mut ChaCha8Rng, cells: &[CellId], out: &mut Vec<Check>) {
    let pairs = 2000;
    let (mut sandwich, mut bridge, mut bridge_cases) = (0, 0, 0);
    for _ in 0..pairs {
        let p = &cells[rng.gen_range(0..cells.len())];
        let q = &cells[rng.gen_range(0..cells.len())];
        let (a, b) = (d1(p, q), d2(p, q));
        if !(a <= b && b <= a + 2) {
            sandwich += 1;
        }
        if !p.is_ancestor_or_self_of(q) && !q.is_ancestor_or_self_of(p) {
            bridge_cases += 1;
            let l = d2_path(p, q).bridge_level();
            match bridge_level_estimate(p, q) {
                Ok(e) if e == l || e == l - 1 => {}
                _ => bridge += 1,
            }
        }
    }
    out.push(check("metric_sandwich", pairs, sandwich));
    out.push(check("bridge_level", bridge_cases, bridge));

    let dim = cells[0].dim();
    let small = datasets::level_stratified(rng, dim, 200, -5);
    let mut bad = 0;
    for pq in small.chunks(2) {
        let w = CellGraphWindow::around(&pq[0], &pq[1], 2, 4);
        if d1_bfs(&pq[0], &pq[1], &w).ok() != Some(d1(&pq[0], &pq[1])) {
            bad += 1;
        }
    }
    out.push(check("d1_recurrence_vs_bfs", small.len() / 2, bad));
}

fn quadtree_checks(rng: &mut ChaCha8Rng, t: &QuadTree, out: &mut Vec<Check>) {
    out.push(check("quadtree_invariants", 1, usize::from(t.check_invariants().is_err())));
    let regions = t.regions();
    let samples = 1000;
    let mut bad = 0;
    for _ in 0..samples {
        let x: Vec<f64> = (0..t.dim() - 1).map(|_| rng.gen_range(0.0..1.0)).collect();
        let hits: Vec<_> = regions.iter().copied().filter(|&v| t.region_contains(v, &x)).collect();
        if hits.len() != 1 || t.locate(&x).ok() != Some(hits[0]) {
            bad += 1;
        }
    }
    out.push(check("quadtree_partition", samples, bad));
}

fn spanner_checks(cells: &[CellId], out: &mut Vec<Check>) -> Result<(f64, f64)> {
    let g = build_spanner(cells)?;
    let (mut sandwich, mut longer, mut cases) = (0, 0, 0);
    for (i, p) in cells.iter().enumerate() {
        let dist = g.dijkstra(g.input_vertex[i]);
        for (j, q) in cells.iter().enumerate().skip(i + 1) {
            cases += 1;
            let ds = dist[g.input_vertex[j]];
            let a = d1(p, q) as f64;
            if ds < a || ds > a + 2.0 {
                sandwich += 1;
            }
            if ds > d2(p, q) as f64 {
                longer += 1;
            }
        }
    }
    out.push(check("spanner_sandwich", cases, sandwich));
    out.push(check("spanner_d2_path_present", cases, longer));
    let n = cells.len() as f64;
    Ok((g.steiner_count() as f64 / n, g.edge_count() as f64 / n))
}

/// Runs every suite on seeded sets of `n` points in dimension `dim`.
pub fn run(dim: usize, n: usize, seed: u64) -> Result<Report> {
    if n == 0 {
        return Err(crate::Error::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = datasets::in_margin(&mut rng, dim, n, margin_depth(n));
    let mut checks = Vec::new();
    pair_checks(&mut rng, &cells, &mut checks);

    let t = QuadTree::build(dim, &cells)?;
    quadtree_checks(&mut rng, &t, &mut checks);
    let (steiner, edges) = spanner_checks(&cells, &mut checks)?;

    let ix = build_avd_cells(&cells)?;
    let mut queries = datasets::queries_near(&mut rng, &cells, 2000);
    queries.extend(datasets::query_cells(&mut rng, dim, 500, margin_depth(n) - 2));
    let bad = queries
        .iter()
        .filter(|q| ix.query(q).ok() != nn_bruteforce(&cells, q, Metric::D2))
        .count();
    checks.push(check("avd_exact", queries.len(), bad));
    let far = CellId::from_i64(-1, &vec![7; dim - 1]);
    checks.push(check("avd_out_of_box", 1, usize::from(ix.query(&far).ok() != Some(ix.highest()))));

    let points = datasets::uniform_in_box(&mut rng, dim, n.max(2));
    let distortion = distortion_report(&points, 2000, rng.gen())?;
    checks.push(check("embedding_windows", distortion.samples, distortion.violations));

    let (hs, shortcuts, _) = build_hyperbolic_spanner_parts(&points, 2)?;
    checks.push(check("shortcut_hops", hs.vertex_count(), usize::from(shortcuts.verify_hops().is_err())));

    let hix = build_avd_points(&points)?;
    let w = additive_window(dim);
    let mut max_err: f64 = 0.0;
    let mut bad = 0;
    let trials = 1000;
    for _ in 0..trials {
        let q = datasets::uniform_in_box(&mut rng, dim, 1).remove(0);
        let got = hix.query_hyperbolic(&q)?;
        let best = nn_bruteforce_hyperbolic(&points, &q).unwrap_or(got);
        let err = hyperbolic_distance(&q, &points[got])? - hyperbolic_distance(&q, &points[best])?;
        max_err = max_err.max(err);
        if err > w {
            bad += 1;
        }
    }
    checks.push(check("avd_hyperbolic_window", trials, bad));

    let st = ix.stats();
    let constants = Constants {
        quadtree_nodes_per_point: t.len() as f64 / n as f64,
        refined_nodes_per_tree_node: st.refined_nodes as f64 / st.tree_nodes as f64,
        avd_regions_per_point: st.regions as f64 / n as f64,
        avd_max_representatives: st.max_representatives,
        avd_max_adjacent_compressed: st.max_adjacent_compressed,
        spanner_steiner_per_point: steiner,
        spanner_edges_per_point: edges,
        avd_hyperbolic_max_error: max_err,
        avd_hyperbolic_window: w,
    };
    let pass = checks.iter().all(|c| c.pass);
    Ok(Report {
        dim,
        n,
        seed,
        checks,
        constants,
        distortion,
        pass,
    })
}
