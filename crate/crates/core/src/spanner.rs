//! Steiner spanners: the `d2`-path overlay in the cell graph, its `ln 2`
//! scaling, and the shortcut-based hyperbolic spanner.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{dist_unchecked, normalize, NormalizeTransform};
use crate::metrics::{bridge_level_estimate, d2_path};
use crate::quadtree::{NodeId, NodeKind, QuadTree};
use crate::shortcut::{shortcut_forest, ShortcutSet};
use crate::tiling::{cell_of, CellId, HPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Input,
    Steiner,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricTag {
    D1Weighted,
    Ln2Scaled,
    Hyperbolic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub role: Role,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cell: Option<CellId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<HPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Bridge {
    pub left: CellId,
    pub right: CellId,
}

impl Bridge {
    /// Endpoints in canonical order.
    pub fn new(a: CellId, b: CellId) -> Self {
        if a <= b {
            Bridge { left: a, right: b }
        } else {
            Bridge { left: b, right: a }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpannerGraph {
    pub metric: MetricTag,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    /// Vertex of each input, by input index.
    pub input_vertex: Vec<usize>,
    #[serde(skip)]
    adj: Vec<Vec<(usize, f64)>>,
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl SpannerGraph {
    fn new(metric: MetricTag, vertices: Vec<Vertex>, edges: Vec<Edge>, input_vertex: Vec<usize>) -> Self {
        let mut adj = vec![Vec::new(); vertices.len()];
        for e in &edges {
            adj[e.u].push((e.v, e.w));
            adj[e.v].push((e.u, e.w));
        }
        for a in adj.iter_mut() {
            a.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
        }
        SpannerGraph {
            metric,
            vertices,
            edges,
            input_vertex,
            adj,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn steiner_count(&self) -> usize {
        self.vertices.iter().filter(|v| v.role == Role::Steiner).count()
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adj[v]
    }

    pub fn vertex_of_cell(&self, cell: &CellId) -> Option<usize> {
        self.vertices.iter().position(|v| v.cell.as_ref() == Some(cell))
    }

    /// Single-source shortest paths; unreachable vertices get `inf`.
    pub fn dijkstra(&self, source: usize) -> Vec<f64> {
        let n = self.vertices.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(HeapItem(0.0, source));
        while let Some(HeapItem(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &(u, w) in &self.adj[v] {
                let nd = d + w;
                if nd < dist[u] {
                    dist[u] = nd;
                    heap.push(HeapItem(nd, u));
                }
            }
        }
        dist
    }

    /// Least weight of a path from `source` using at most `hops` edges.
    pub fn hop_bounded(&self, source: usize, hops: usize) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.vertices.len()];
        dist[source] = 0.0;
        for _ in 0..hops {
            let mut next = dist.clone();
            for e in &self.edges {
                if dist[e.u] + e.w < next[e.v] {
                    next[e.v] = dist[e.u] + e.w;
                }
                if dist[e.v] + e.w < next[e.u] {
                    next[e.u] = dist[e.v] + e.w;
                }
            }
            dist = next;
        }
        dist
    }

    /// `u v w` lines.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        for e in &self.edges {
            s.push_str(&format!("{} {} {}\n", e.u, e.v, e.w));
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("graph serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let g: SpannerGraph = serde_json::from_value(value.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let n = g.vertices.len();
        if g.edges.iter().any(|e| e.u >= n || e.v >= n) || g.input_vertex.iter().any(|&v| v >= n) {
            return Err(Error::Parse("vertex reference out of range".into()));
        }
        Ok(SpannerGraph::new(g.metric, g.vertices, g.edges, g.input_vertex))
    }
}

fn nonempty(t: &QuadTree, c: &CellId) -> bool {
    t.highest_under(c).is_some()
}

fn nonempty_children(t: &QuadTree, c: &CellId) -> Vec<CellId> {
    c.children().into_iter().filter(|ch| nonempty(t, ch)).collect()
}

/// Nonempty children of `r` whose points have a `d2`-path bridging at `r -- r2`.
fn participating_children(t: &QuadTree, r: &CellId, r2: &CellId) -> Vec<CellId> {
    let mine = nonempty_children(t, r);
    if t.point_at(r2).is_some() {
        return mine;
    }
    let theirs = nonempty_children(t, r2);
    mine.into_iter()
        .filter(|c| theirs.iter().any(|c2| !c.is_neighbor(c2)))
        .collect()
}

/// Whether neighbors `r`, `r2` form the bridge of some stored pair.
fn is_used_bridge(t: &QuadTree, r: &CellId, r2: &CellId) -> bool {
    if !nonempty(t, r) || !nonempty(t, r2) {
        return false;
    }
    if t.point_at(r).is_some() || t.point_at(r2).is_some() {
        return true;
    }
    !participating_children(t, r, r2).is_empty()
}

/// Compressed nodes whose closed boxes touch that of `mu` without nesting.
fn touching_compressed(t: &QuadTree, mu: NodeId) -> Vec<NodeId> {
    let cell = &t.node(mu).cell;
    let mut out = Vec::new();
    let mut stack = vec![QuadTree::ROOT];
    while let Some(v) = stack.pop() {
        let n = t.node(v);
        if !n.cell.boxes_touch(cell) {
            continue;
        }
        let nested = n.cell.is_ancestor_or_self_of(cell) || cell.is_ancestor_or_self_of(&n.cell);
        if n.kind == NodeKind::Compressed && !nested {
            out.push(v);
        }
        if !cell.is_ancestor_or_self_of(&n.cell) {
            stack.extend(n.children.iter().copied());
        }
    }
    out
}

/// Every bridge used by the `d2`-path of some pair of stored points.
pub fn enumerate_bridges(t: &QuadTree) -> Vec<Bridge> {
    let mut out = BTreeSet::new();
    for v in t.preorder() {
        let n = t.node(v);
        if n.highest.is_none() {
            continue;
        }
        for r2 in n.cell.horizontal_neighbors() {
            if is_used_bridge(t, &n.cell, &r2) {
                out.insert(Bridge::new(n.cell.clone(), r2));
            }
        }
    }
    // bridges strictly inside two compressed edges
    for mu in t.preorder() {
        if t.node(mu).kind != NodeKind::Compressed {
            continue;
        }
        let a = &t.node(t.node(mu).children[0]).cell;
        for nu in touching_compressed(t, mu) {
            if nu < mu {
                continue;
            }
            let b = &t.node(t.node(nu).children[0]).cell;
            let est = bridge_level_estimate(a, b).expect("disjoint subtrees");
            let path = d2_path(a, b);
            let level = path.bridge_level();
            debug_assert!(est == level || est == level - 1);
            if path.has_bridge && level > a.level() && level > b.level() {
                out.insert(Bridge::new(path.apex_p, path.apex_q));
            }
        }
    }
    out.into_iter().collect()
}

/// Cells of the overlay where vertical runs of two `d2`-paths merge.
fn merge_cells(t: &QuadTree, bridges: &[Bridge]) -> Vec<CellId> {
    let mut marked: HashSet<NodeId> = HashSet::new();
    for b in bridges {
        for (r, r2) in [(&b.left, &b.right), (&b.right, &b.left)] {
            for c in participating_children(t, r, r2) {
                if let Some(top) = t.cell_query(&c).0 {
                    marked.insert(top);
                }
            }
        }
    }
    for v in t.preorder() {
        if t.node(v).stored_point.is_some() {
            marked.extend(t.node(v).children.iter().copied());
        }
    }
    let mut out = Vec::new();
    let mut stack = vec![(QuadTree::ROOT, false)];
    while let Some((v, inherited)) = stack.pop() {
        let n = t.node(v);
        let flag = inherited || marked.contains(&v);
        if flag && n.kind == NodeKind::Ordinary {
            let branches = n.children.iter().filter(|&&c| t.node(c).highest.is_some()).count();
            if branches >= 2 {
                out.push(n.cell.clone());
            }
        }
        for &c in n.children.iter().rev() {
            stack.push((c, flag));
        }
    }
    out
}

/// The overlay of all `d2`-paths between `points`, as a graph with `d1`
/// edge weights.
pub fn build_spanner(points: &[CellId]) -> Result<SpannerGraph> {
    let (g, _) = build_spanner_with_bridges(points)?;
    Ok(g)
}

pub fn build_spanner_with_bridges(points: &[CellId]) -> Result<(SpannerGraph, Vec<Bridge>)> {
    let first = points.first().ok_or(Error::Empty)?;
    let t = QuadTree::build(first.dim(), points)?;
    let bridges = enumerate_bridges(&t);

    let mut vertices: Vec<Vertex> = Vec::new();
    let mut id_of: HashMap<CellId, usize> = HashMap::new();
    let mut input_vertex = Vec::with_capacity(points.len());
    for p in points {
        let id = *id_of.entry(p.clone()).or_insert_with(|| {
            vertices.push(Vertex {
                role: Role::Input,
                cell: Some(p.clone()),
                point: None,
            });
            vertices.len() - 1
        });
        input_vertex.push(id);
    }
    let mut steiner: BTreeSet<CellId> = BTreeSet::new();
    for b in &bridges {
        steiner.insert(b.left.clone());
        steiner.insert(b.right.clone());
    }
    steiner.extend(merge_cells(&t, &bridges));
    for c in steiner {
        if !id_of.contains_key(&c) {
            id_of.insert(c.clone(), vertices.len());
            vertices.push(Vertex {
                role: Role::Steiner,
                cell: Some(c),
                point: None,
            });
        }
    }

    let mut edges = Vec::new();
    for (v, vert) in vertices.iter().enumerate() {
        let cell = vert.cell.as_ref().expect("cell vertex");
        let mut a = cell.clone();
        while a.level() < 0 {
            a = a.parent();
            if let Some(&u) = id_of.get(&a) {
                edges.push(Edge {
                    u: v,
                    v: u,
                    w: f64::from(a.level() - cell.level()),
                });
                break;
            }
        }
    }
    for b in &bridges {
        edges.push(Edge {
            u: id_of[&b.left],
            v: id_of[&b.right],
            w: 1.0,
        });
    }
    Ok((SpannerGraph::new(MetricTag::D1Weighted, vertices, edges, input_vertex), bridges))
}

/// Normalized, embedded, spanned and scaled by `ln 2`. Returns the graph and
/// the transform; `input_vertex` gives `b(p)` for each input.
pub fn build_embedding_graph(points: &[HPoint]) -> Result<(SpannerGraph, NormalizeTransform)> {
    let (t, moved) = normalize(points)?;
    let cells = moved.iter().map(cell_of).collect::<Result<Vec<_>>>()?;
    let mut g = build_spanner(&cells)?;
    for e in g.edges.iter_mut() {
        e.w *= std::f64::consts::LN_2;
    }
    let g = SpannerGraph::new(MetricTag::Ln2Scaled, g.vertices, g.edges, g.input_vertex);
    Ok((g, t))
}

/// `S_k`: input points joined to their cells, shortcut vertical runs, and the
/// overlay bridges, all weighted by hyperbolic distance.
pub fn build_hyperbolic_spanner(points: &[HPoint], k: usize) -> Result<SpannerGraph> {
    let (g, _, _) = build_hyperbolic_spanner_parts(points, k)?;
    Ok(g)
}

/// Also returns the shortcut set on the cell vertices and the transform.
pub fn build_hyperbolic_spanner_parts(
    points: &[HPoint],
    k: usize,
) -> Result<(SpannerGraph, ShortcutSet, NormalizeTransform)> {
    if k < 1 {
        return Err(Error::BadK);
    }
    let (tr, moved) = normalize(points)?;
    let cells = moved.iter().map(cell_of).collect::<Result<Vec<_>>>()?;
    let s = build_spanner(&cells)?;
    let m = s.vertices.len();
    let mut parent = vec![None; m];
    let mut bridge_edges = Vec::new();
    for e in &s.edges {
        let (cu, cv) = (s.vertices[e.u].cell.as_ref().unwrap(), s.vertices[e.v].cell.as_ref().unwrap());
        if cv.is_proper_ancestor_of(cu) {
            parent[e.u] = Some(e.v);
        } else {
            bridge_edges.push((e.u, e.v));
        }
    }
    let sc = shortcut_forest(&parent, k)?;
    // vertices: cell centers in original coordinates, then the inputs
    let mut vertices: Vec<Vertex> = s
        .vertices
        .iter()
        .map(|v| {
            let c = v.cell.as_ref().unwrap();
            Vertex {
                role: Role::Steiner,
                cell: Some(c.clone()),
                point: Some(tr.invert(&c.center())),
            }
        })
        .collect();
    let mut edges = Vec::new();
    let weight = |vs: &[Vertex], a: usize, b: usize| {
        dist_unchecked(vs[a].point.as_ref().unwrap(), vs[b].point.as_ref().unwrap())
    };
    for (u, a) in sc.edges() {
        edges.push(Edge { u, v: a, w: weight(&vertices, u, a) });
    }
    for (u, v) in bridge_edges {
        edges.push(Edge { u, v, w: weight(&vertices, u, v) });
    }
    let mut input_vertex = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let id = vertices.len();
        vertices.push(Vertex {
            role: Role::Input,
            cell: None,
            point: Some(p.clone()),
        });
        let b = s.input_vertex[i];
        edges.push(Edge { u: id, v: b, w: weight(&vertices, id, b) });
        input_vertex.push(id);
    }
    Ok((SpannerGraph::new(MetricTag::Hyperbolic, vertices, edges, input_vertex), sc, tr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::hyperbolic_distance;
    use crate::datasets::{uniform_in_box, wide};
    use crate::metrics::{d1, d2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::LN_2;

    fn c(level: i32, k: &[i64]) -> CellId {
        CellId::from_i64(level, k)
    }

    fn random_cells(rng: &mut ChaCha8Rng, dim: usize, n: usize) -> Vec<CellId> {
        (0..n)
            .map(|_| {
                let level = rng.gen_range(-7..=-1);
                let k: Vec<i64> = (0..dim - 1).map(|_| rng.gen_range(0..1i64 << -level)).collect();
                c(level, &k)
            })
            .collect()
    }

    /// Bridges of all input pairs, straight from `d2_path`.
    fn bridge_oracle(points: &[CellId]) -> BTreeSet<Bridge> {
        let mut out = BTreeSet::new();
        for p in points {
            for q in points {
                let path = d2_path(p, q);
                if path.has_bridge {
                    out.insert(Bridge::new(path.apex_p, path.apex_q));
                }
            }
        }
        out
    }

    #[test]
    fn neighbors_bridge_themselves() {
        let pts = [c(-2, &[1]), c(-2, &[2])];
        let t = QuadTree::build(2, &pts).unwrap();
        assert_eq!(enumerate_bridges(&t), vec![Bridge::new(pts[0].clone(), pts[1].clone())]);
        let g = build_spanner(&pts).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn singleton() {
        let g = build_spanner(&[c(-4, &[3, 9])]).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (1, 0));
        assert_eq!(build_spanner(&[]).unwrap_err(), Error::Empty);
    }

    #[test]
    fn bridges_match_all_pairs_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for dim in [2, 3] {
            for n in [2, 5, 16, 64] {
                for _ in 0..6 {
                    let pts = random_cells(&mut rng, dim, n);
                    let t = QuadTree::build(dim, &pts).unwrap();
                    let got: BTreeSet<Bridge> = enumerate_bridges(&t).into_iter().collect();
                    assert_eq!(got, bridge_oracle(&pts));
                }
            }
        }
    }

    #[test]
    fn spanner_sandwich_and_d2_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for dim in [2, 3] {
            for n in [3, 20, 64] {
                let pts = random_cells(&mut rng, dim, n);
                let g = build_spanner(&pts).unwrap();
                for e in &g.edges {
                    let (a, b) = (g.vertices[e.u].cell.as_ref().unwrap(), g.vertices[e.v].cell.as_ref().unwrap());
                    assert_eq!(e.w, d1(a, b) as f64);
                    assert!(a.is_neighbor(b) || a.is_proper_ancestor_of(b) || b.is_proper_ancestor_of(a));
                }
                for (i, p) in pts.iter().enumerate() {
                    let dist = g.dijkstra(g.input_vertex[i]);
                    for (j, q) in pts.iter().enumerate() {
                        let ds = dist[g.input_vertex[j]];
                        assert!(ds >= d1(p, q) as f64 && ds <= d2(p, q) as f64, "{p} {q}");
                        // the d2-path itself runs through vertices of the graph
                        let path = d2_path(p, q);
                        let (a, b) = (g.vertex_of_cell(&path.apex_p).unwrap(), g.vertex_of_cell(&path.apex_q).unwrap());
                        let da = dist[a];
                        let db = g.dijkstra(b)[g.input_vertex[j]];
                        let bridge = if path.has_bridge { 1.0 } else { 0.0 };
                        assert_eq!(da + bridge + db, d2(p, q) as f64);
                        assert_eq!(da, f64::from(path.apex_p.level() - p.level()));
                    }
                }
            }
        }
    }

    #[test]
    fn steiner_vertices_are_bridge_ends_or_merges() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let pts = random_cells(&mut rng, 2, 64);
        let (g, bridges) = build_spanner_with_bridges(&pts).unwrap();
        let ends: HashSet<&CellId> = bridges.iter().flat_map(|b| [&b.left, &b.right]).collect();
        let cells: Vec<&CellId> = g.vertices.iter().map(|v| v.cell.as_ref().unwrap()).collect();
        for v in g.vertices.iter().filter(|v| v.role == Role::Steiner) {
            let cell = v.cell.as_ref().unwrap();
            let below: HashSet<CellId> = cells
                .iter()
                .filter(|x| cell.is_proper_ancestor_of(x))
                .map(|x| x.ancestor(cell.level() - 1))
                .collect();
            assert!(ends.contains(cell) || below.len() >= 2, "{cell}");
        }
    }

    #[test]
    fn overlay_can_beat_d2() {
        // p -- r and r -- q bridge one level up; p -- q needs two levels
        let pts = [c(-3, &[0]), c(-3, &[2]), c(-3, &[4])];
        let g = build_spanner(&pts).unwrap();
        let ds = g.dijkstra(g.input_vertex[0])[g.input_vertex[2]];
        assert_eq!(d2(&pts[0], &pts[2]), 5);
        assert_eq!(d1(&pts[0], &pts[2]), 4);
        assert_eq!(ds, 4.0);
    }

    #[test]
    fn size_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let mut ratios = Vec::new();
        for n in [64, 128, 256, 512, 1024] {
            let pts: Vec<CellId> = uniform_in_box(&mut rng, 2, n).iter().map(|p| cell_of(p).unwrap()).collect();
            let g = build_spanner(&pts).unwrap();
            ratios.push((g.vertex_count() + g.edge_count()) as f64 / n as f64);
        }
        let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
        assert!(hi / lo <= 1.5, "{ratios:?}");
    }

    fn random_hpoints(rng: &mut ChaCha8Rng, dim: usize, n: usize) -> Vec<HPoint> {
        wide(rng, dim, n)
    }

    #[test]
    fn embedding_graph_vertical_and_window() {
        let stack: Vec<HPoint> = [0, -2, -5].iter().map(|&i| HPoint::new(vec![0.3], 1.5 * 2f64.powi(i)).unwrap()).collect();
        let (g, _) = build_embedding_graph(&stack).unwrap();
        let dist = g.dijkstra(g.input_vertex[0]);
        for (j, q) in stack.iter().enumerate() {
            let dh = hyperbolic_distance(&stack[0], q).unwrap();
            assert!((dist[g.input_vertex[j]] - dh).abs() < 1e-12);
        }

        let dim = 2;
        let lo = -(3.0 * (dim as f64).ln() + 2.0 + 6.0 * LN_2);
        let hi = 2.0 * (dim as f64).ln() + 9.0 * LN_2;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let pts = random_hpoints(&mut rng, dim, 120);
        let (g, _) = build_embedding_graph(&pts).unwrap();
        assert_eq!(g.metric, MetricTag::Ln2Scaled);
        for (i, p) in pts.iter().enumerate() {
            let dist = g.dijkstra(g.input_vertex[i]);
            for (j, q) in pts.iter().enumerate() {
                let dev = dist[g.input_vertex[j]] - hyperbolic_distance(p, q).unwrap();
                assert!(dev >= lo - 1e-9 && dev <= hi + 1e-9, "{dev}");
            }
        }
    }

    #[test]
    fn hyperbolic_spanner_singleton_and_saturation() {
        let p = HPoint::new(vec![3.0, -1.0], 0.2).unwrap();
        let g = build_hyperbolic_spanner(&[p], 2).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (2, 1));
        assert!(g.edges[0].w < 3f64.ln());
        assert_eq!(build_hyperbolic_spanner(&[HPoint::new(vec![0.0], 1.0).unwrap()], 0).unwrap_err(), Error::BadK);

        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let pts = random_hpoints(&mut rng, 2, 60);
        // one hop per vertical run: p, b(p), apex, apex', b(q), q
        let g = build_hyperbolic_spanner(&pts, 1).unwrap();
        for i in 0..pts.len() {
            let dist = g.hop_bounded(g.input_vertex[i], 5);
            assert!(g.input_vertex.iter().all(|&v| dist[v].is_finite()));
        }
        let (g, sc, _) = build_hyperbolic_spanner_parts(&pts, 64).unwrap();
        assert!(sc.extra_edges.is_empty());
        for i in 0..pts.len() {
            let dist = g.hop_bounded(g.input_vertex[i], 2 * 64 + 3);
            assert!(g.input_vertex.iter().all(|&v| dist[v].is_finite()));
        }
    }

    #[test]
    fn hyperbolic_spanner_hop_bounded_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let dim = 2;
        let per_hop = 3.0 * (dim as f64).ln() + 2.0 + 8.0 * LN_2;
        for k in [2, 3] {
            let pts = random_hpoints(&mut rng, dim, 256);
            let g = build_hyperbolic_spanner(&pts, k).unwrap();
            for e in &g.edges {
                assert!(e.w >= 0.0);
            }
            for i in (0..pts.len()).step_by(8) {
                let dist = g.hop_bounded(g.input_vertex[i], 2 * k + 3);
                for (j, q) in pts.iter().enumerate() {
                    let err = dist[g.input_vertex[j]] - hyperbolic_distance(&pts[i], q).unwrap();
                    assert!(err >= -1e-9 && err <= (2 * k + 3) as f64 * per_hop, "k={k} err={err}");
                }
            }
        }
    }
}
