//! Exact `d2` nearest-neighbor structure: refined quadtree, per-node `n2`,
//! and per-region representative points.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{embed, normalize, NormalizeTransform};
use crate::metrics::d2;
use crate::quadtree::{NodeId, NodeKind, QuadNode, QuadTree};
use crate::tiling::{CellId, HPoint};

/// `2 (3 ln D + 2 + 6 ln 2) + 2 ln 2 + 2 ln D`.
pub fn additive_window(dim: usize) -> f64 {
    let ln_d = (dim as f64).ln();
    let ln2 = std::f64::consts::LN_2;
    2.0 * (3.0 * ln_d + 2.0 + 6.0 * ln2) + 2.0 * ln2 + 2.0 * ln_d
}

/// Whether every point cell has its center in `[1/4, 1/2]^(D-1)`.
pub fn in_margin(points: &[CellId]) -> bool {
    points.iter().all(|p| {
        p.level() <= 0 && p.center().x.iter().all(|&v| (0.25..=0.5).contains(&v))
    })
}

fn check_margin(t: &QuadTree) -> Result<()> {
    if t.points().is_empty() {
        return Err(Error::Empty);
    }
    if !in_margin(t.points()) {
        return Err(Error::OutsideMargin);
    }
    Ok(())
}

/// Inserts the in-shadow horizontal neighbors of every nonempty node cell.
pub fn refine(t: &QuadTree) -> Result<QuadTree> {
    check_margin(t)?;
    let mut out = t.clone();
    for v in t.preorder() {
        let n = t.node(v);
        if n.highest.is_none() {
            continue;
        }
        for r in n.cell.horizontal_neighbors() {
            if r.in_root_shadow() {
                out.insert_box(&r)?;
            }
        }
    }
    Ok(out)
}

fn closest(points: &[CellId], from: &CellId, cands: impl IntoIterator<Item = usize>) -> Option<usize> {
    cands
        .into_iter()
        .map(|i| (d2(from, &points[i]), i))
        .min()
        .map(|(_, i)| i)
}

/// Fills `h` bottom-up and `n2` top-down.
pub fn annotate(t: &mut QuadTree) {
    t.compute_highest();
    for v in t.preorder() {
        let n2 = nearest_of(t, v);
        t.node_mut(v).nearest = n2;
    }
}

fn nearest_of(t: &QuadTree, v: NodeId) -> Option<usize> {
    let n = t.node(v);
    let c = &n.cell;
    let mut cands: Vec<usize> = n.highest.into_iter().collect();
    let mut bridge_cells = c.horizontal_neighbors();
    if let Some(p) = n.parent {
        let pn = t.node(p);
        cands.extend(pn.nearest);
        for l in c.level() + 1..pn.cell.level() {
            bridge_cells.extend(c.ancestor(l).horizontal_neighbors());
        }
    }
    for r in bridge_cells {
        if r.in_root_shadow() {
            cands.extend(t.highest_under(&r));
        }
    }
    closest(t.points(), c, cands)
}

/// Whether `r`, a cell inside `o`, touches the boundary of `o`.
fn touches_boundary_inside(r: &CellId, o: &CellId) -> bool {
    let span = BigInt::one() << (o.level() - r.level()) as usize;
    let last = &span - 1;
    r.coords().iter().zip(o.coords()).any(|(k, ko)| {
        let off = k - ko * &span;
        off.is_zero() || off == last
    })
}

/// Whether some horizontal neighbor of `r` lies in `c` but not in `hole`.
fn borders_region(r: &CellId, c: &CellId, hole: Option<&CellId>) -> bool {
    r.horizontal_neighbors().iter().any(|w| {
        c.is_ancestor_or_self_of(w) && !hole.is_some_and(|h| h.is_ancestor_or_self_of(w))
    })
}

/// Largest cell of the compressed chain of `v` strictly below level `below`.
fn chain_top(t: &QuadTree, v: NodeId, below: i32) -> Option<CellId> {
    let n = t.node(v);
    if n.cell.level() < below {
        return Some(n.cell.clone());
    }
    if n.kind == NodeKind::Compressed {
        let inner = &t.node(n.children[0]).cell;
        if inner.level() < below - 1 {
            return Some(inner.ancestor(below - 1));
        }
    }
    None
}

/// Nodes owning a nonempty cell smaller than `c`, outside `c`, with a
/// neighbor in `c` minus `hole`.
fn outer_owners(t: &QuadTree, c: &CellId, hole: Option<&CellId>) -> Vec<NodeId> {
    let mut out = Vec::new();
    let mut stack = vec![QuadTree::ROOT];
    while let Some(v) = stack.pop() {
        let n = t.node(v);
        if n.highest.is_none() || c.is_ancestor_or_self_of(&n.cell) {
            continue;
        }
        if let Some(r) = chain_top(t, v, c.level()) {
            if !c.is_ancestor_or_self_of(&r) && borders_region(&r, c, hole) {
                out.push(v);
            }
        }
        stack.extend(n.children.iter().filter(|&&w| t.node(w).cell.boxes_touch(c)));
    }
    out
}

/// Nodes below `v` (inclusive) owning a nonempty cell strictly inside the
/// cell of `v` with a neighbor in `c` outside it.
fn inner_owners(t: &QuadTree, v: NodeId, c: &CellId) -> Vec<NodeId> {
    let o = &t.node(v).cell;
    let mut out = Vec::new();
    let mut stack = vec![v];
    while let Some(w) = stack.pop() {
        let n = t.node(w);
        if n.highest.is_none() {
            continue;
        }
        if let Some(r) = chain_top(t, w, o.level()) {
            if borders_region(&r, c, Some(o)) {
                out.push(w);
            }
        }
        stack.extend(n.children.iter().filter(|&&x| touches_boundary_inside(&t.node(x).cell, o)));
    }
    out
}

/// Representative points of node `v`, sorted by index.
fn representatives(t: &QuadTree, v: NodeId) -> Vec<usize> {
    let n = t.node(v);
    let mut reps: BTreeSet<usize> = n.nearest.into_iter().collect();
    let hole = match n.kind {
        NodeKind::Compressed => Some(&t.node(n.children[0]).cell),
        _ => None,
    };
    if n.kind != NodeKind::Ordinary {
        for w in outer_owners(t, &n.cell, hole) {
            reps.extend(t.node(w).highest);
        }
    }
    if n.kind == NodeKind::Compressed {
        let inner = n.children[0];
        reps.extend(t.node(inner).highest);
        for w in inner_owners(t, inner, &n.cell) {
            reps.extend(t.node(w).highest);
        }
    }
    reps.into_iter().collect()
}

/// Compressed nodes of `t` owning a cell smaller than `c`, outside it and
/// touching it.
fn adjacent_compressed(t: &QuadTree, c: &CellId) -> usize {
    outer_owners(t, c, None)
        .into_iter()
        .filter(|&w| t.node(w).kind == NodeKind::Compressed)
        .count()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AvdStats {
    pub n: usize,
    pub tree_nodes: usize,
    pub refined_nodes: usize,
    pub regions: usize,
    pub max_representatives: usize,
    pub max_adjacent_compressed: usize,
}

#[derive(Clone, Debug)]
pub struct AvdIndex {
    tree: QuadTree,
    reps: Vec<Vec<usize>>,
    transform: Option<NormalizeTransform>,
    highest: usize,
    stats: AvdStats,
}

/// Input of [`build_avd`].
pub enum AvdInput<'a> {
    Cells(&'a [CellId]),
    Points(&'a [HPoint]),
}

pub fn build_avd(input: AvdInput<'_>) -> Result<AvdIndex> {
    match input {
        AvdInput::Cells(c) => build_avd_cells(c),
        AvdInput::Points(p) => build_avd_points(p),
    }
}

/// Index over cells; every center must lie in `[1/4, 1/2]^(D-1)`.
pub fn build_avd_cells(points: &[CellId]) -> Result<AvdIndex> {
    let first = points.first().ok_or(Error::Empty)?;
    let t = QuadTree::build(first.dim(), points)?;
    from_tree(t, None)
}

/// Index over continuous points: normalized, then embedded.
pub fn build_avd_points(points: &[HPoint]) -> Result<AvdIndex> {
    let (tr, moved) = normalize(points)?;
    let cells = moved.iter().map(embed).collect::<Result<Vec<_>>>()?;
    let t = QuadTree::build(cells[0].dim(), &cells)?;
    from_tree(t, Some(tr))
}

fn from_tree(t: QuadTree, transform: Option<NormalizeTransform>) -> Result<AvdIndex> {
    let mut refined = refine(&t)?;
    annotate(&mut refined);
    let reps: Vec<Vec<usize>> = (0..refined.nodes().len()).map(|v| representatives(&refined, v)).collect();
    let regions = refined.regions();
    let stats = AvdStats {
        n: t.points().len(),
        tree_nodes: t.nodes().len(),
        refined_nodes: refined.nodes().len(),
        regions: regions.len(),
        max_representatives: regions.iter().map(|&v| reps[v].len()).max().unwrap_or(0),
        max_adjacent_compressed: regions
            .iter()
            .map(|&v| adjacent_compressed(&t, &refined.node(v).cell))
            .max()
            .unwrap_or(0),
    };
    let highest = refined.node(QuadTree::ROOT).highest.ok_or(Error::Empty)?;
    Ok(AvdIndex {
        tree: refined,
        reps,
        transform,
        highest,
        stats,
    })
}

#[derive(Serialize, Deserialize)]
struct NodeRecord {
    cell: CellId,
    kind: NodeKind,
    parent: Option<usize>,
    children: Vec<usize>,
    stored: bool,
    point: Option<usize>,
    highest: Option<usize>,
    nearest: Option<usize>,
    representatives: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct IndexRecord {
    dim: usize,
    points: Vec<CellId>,
    transform: Option<NormalizeTransform>,
    highest: usize,
    stats: AvdStats,
    nodes: Vec<NodeRecord>,
}

impl AvdIndex {
    pub fn tree(&self) -> &QuadTree {
        &self.tree
    }

    pub fn representatives(&self, v: NodeId) -> &[usize] {
        &self.reps[v]
    }

    pub fn transform(&self) -> Option<&NormalizeTransform> {
        self.transform.as_ref()
    }

    pub fn highest(&self) -> usize {
        self.highest
    }

    pub fn stats(&self) -> &AvdStats {
        &self.stats
    }

    pub fn points(&self) -> &[CellId] {
        self.tree.points()
    }

    /// The node whose region contains `q`, or `None` outside the root shadow.
    pub fn locate(&self, q: &CellId) -> Option<NodeId> {
        if q.dim() != self.tree.dim() || !q.in_root_shadow() {
            return None;
        }
        let mut v = QuadTree::ROOT;
        loop {
            let n = self.tree.node(v);
            match n.kind {
                NodeKind::Leaf => return Some(v),
                NodeKind::Ordinary => {
                    if n.cell == *q {
                        return Some(v);
                    }
                    v = self.tree.node_of(&q.ancestor(n.cell.level() - 1))?;
                }
                NodeKind::Compressed => {
                    let c1 = n.children[0];
                    if self.tree.node(c1).cell.is_ancestor_or_self_of(q) {
                        v = c1;
                    } else {
                        return Some(v);
                    }
                }
            }
        }
    }

    /// Nearest input point under `d2`, smallest index on ties. Cells outside
    /// the root shadow get the highest point.
    pub fn query(&self, q: &CellId) -> Result<usize> {
        if q.dim() != self.tree.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.tree.dim(),
                got: q.dim(),
            });
        }
        Ok(match self.locate(q) {
            None => self.highest,
            Some(v) => closest(self.points(), q, self.reps[v].iter().copied()).unwrap_or(self.highest),
        })
    }

    pub fn query_hyperbolic(&self, q: &HPoint) -> Result<usize> {
        let moved = match &self.transform {
            Some(tr) => tr.apply(q),
            None => q.clone(),
        };
        self.query(&embed(&moved)?)
    }

    /// Deterministic JSON: nodes in preorder.
    pub fn to_json(&self) -> serde_json::Value {
        let order = self.tree.preorder();
        let mut renum = vec![0usize; order.len()];
        for (i, &v) in order.iter().enumerate() {
            renum[v] = i;
        }
        let nodes = order
            .iter()
            .map(|&v| {
                let n = self.tree.node(v);
                NodeRecord {
                    cell: n.cell.clone(),
                    kind: n.kind,
                    parent: n.parent.map(|p| renum[p]),
                    children: n.children.iter().map(|&c| renum[c]).collect(),
                    stored: n.stored,
                    point: n.stored_point,
                    highest: n.highest,
                    nearest: n.nearest,
                    representatives: self.reps[v].clone(),
                }
            })
            .collect();
        let rec = IndexRecord {
            dim: self.tree.dim(),
            points: self.points().to_vec(),
            transform: self.transform.clone(),
            highest: self.highest,
            stats: self.stats.clone(),
            nodes,
        };
        serde_json::to_value(rec).expect("index serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let rec: IndexRecord =
            serde_json::from_value(value.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let mut reps = Vec::with_capacity(rec.nodes.len());
        let nodes = rec
            .nodes
            .into_iter()
            .map(|r| {
                reps.push(r.representatives);
                QuadNode {
                    cell: r.cell,
                    kind: r.kind,
                    parent: r.parent,
                    children: r.children,
                    stored: r.stored,
                    stored_point: r.point,
                    highest: r.highest,
                    nearest: r.nearest,
                }
            })
            .collect();
        let tree = QuadTree::from_nodes(rec.dim, rec.points, nodes)?;
        let n = tree.points().len();
        if rec.highest >= n || reps.iter().flatten().any(|&i| i >= n) {
            return Err(Error::Parse("point reference out of range".into()));
        }
        Ok(AvdIndex {
            tree,
            reps,
            transform: rec.transform,
            highest: rec.highest,
            stats: rec.stats,
        })
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::datasets;
    use crate::oracle::{nn_bruteforce, nn_bruteforce_hyperbolic, Metric};

    fn sets(seed: u64, count: usize) -> Vec<Vec<CellId>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|i| {
                let dim = 2 + i % 2;
                let n = 1 + (i * 7) % 64;
                datasets::in_margin(&mut rng, dim, n, -9)
            })
            .collect()
    }

    #[test]
    fn singleton_everywhere() {
        let p = CellId::from_i64(-3, &[3]);
        let ix = build_avd_cells(&[p.clone()]).unwrap();
        for v in ix.tree().regions() {
            assert_eq!(ix.representatives(v), &[0]);
        }
        assert_eq!(ix.query(&p).unwrap(), 0);
        assert_eq!(ix.query(&CellId::from_i64(-6, &[60])).unwrap(), 0);
    }

    #[test]
    fn refine_inserts_neighbors() {
        let p = CellId::from_i64(-2, &[1, 1]);
        let t = QuadTree::build(3, &[p.clone()]).unwrap();
        let r = refine(&t).unwrap();
        for nb in p.horizontal_neighbors() {
            assert!(r.node_of(&nb).is_some());
        }
        r.check_invariants().unwrap();
    }

    #[test]
    fn refine_rejects_outside_margin() {
        let t = QuadTree::build(2, &[CellId::from_i64(-3, &[7])]).unwrap();
        assert_eq!(refine(&t).unwrap_err(), Error::OutsideMargin);
        assert_eq!(build_avd_cells(&[]).unwrap_err(), Error::Empty);
    }

    #[test]
    fn refinement_refines_regions() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for s in sets(11, 12) {
            let t = QuadTree::build(s[0].dim(), &s).unwrap();
            let r = refine(&t).unwrap();
            for _ in 0..200 {
                let x: Vec<f64> = (0..t.dim() - 1).map(|_| rand::Rng::gen_range(&mut rng, 0.0..1.0)).collect();
                let a = r.locate(&x).unwrap();
                let b = t.locate(&x).unwrap();
                assert!(t.node(b).cell.is_ancestor_or_self_of(&r.node(a).cell) || t.region_contains(b, &x));
            }
        }
    }

    #[test]
    fn two_stacked_points() {
        let pts = [CellId::from_i64(-2, &[1]), CellId::from_i64(-6, &[20])];
        let ix = build_avd_cells(&pts).unwrap();
        for v in ix.tree().preorder() {
            let c = &ix.tree().node(v).cell;
            assert_eq!(ix.tree().node(v).nearest, nn_bruteforce(&pts, c, Metric::D2));
        }
    }

    #[test]
    fn nearest_matches_bruteforce() {
        for s in sets(1, 40) {
            let ix = build_avd_cells(&s).unwrap();
            for v in ix.tree().preorder() {
                let c = &ix.tree().node(v).cell;
                assert_eq!(ix.tree().node(v).nearest, nn_bruteforce(&s, c, Metric::D2), "{c:?}");
            }
        }
    }

    #[test]
    fn queries_match_bruteforce() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for s in sets(3, 30) {
            let ix = build_avd_cells(&s).unwrap();
            let mut qs = datasets::queries_near(&mut rng, &s, 300);
            qs.extend(datasets::query_cells(&mut rng, s[0].dim(), 100, -10));
            for q in qs {
                let want = nn_bruteforce(&s, &q, Metric::D2).unwrap();
                let v = ix.locate(&q).unwrap();
                assert!(ix.representatives(v).contains(&want), "{q:?}");
                assert_eq!(ix.query(&q).unwrap(), want, "{q:?}");
            }
        }
    }

    #[test]
    fn out_of_box_gets_highest() {
        let s = &sets(4, 3)[2];
        let ix = build_avd_cells(s).unwrap();
        let top = ix.highest();
        assert_eq!(ix.query(&CellId::from_i64(-2, &vec![20; s[0].dim() - 1])).unwrap(), top);
        assert_eq!(ix.query(&CellId::from_i64(3, &vec![0; s[0].dim() - 1])).unwrap(), top);
        let far = HPoint::new(vec![5.0; s[0].dim() - 1], 0.01).unwrap();
        assert_eq!(ix.query(&crate::tiling::cell_of(&far).unwrap()).unwrap(), top);
    }

    #[test]
    fn each_query_in_one_region() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for s in sets(9, 6) {
            let ix = build_avd_cells(&s).unwrap();
            let t = ix.tree();
            for q in datasets::queries_near(&mut rng, &s, 200) {
                let hits = t
                    .preorder()
                    .into_iter()
                    .filter(|&v| {
                        let n = t.node(v);
                        match n.kind {
                            NodeKind::Ordinary => n.cell == q,
                            NodeKind::Leaf => n.cell.is_ancestor_or_self_of(&q),
                            NodeKind::Compressed => {
                                n.cell.is_ancestor_or_self_of(&q)
                                    && !t.node(n.children[0]).cell.is_ancestor_or_self_of(&q)
                            }
                        }
                    })
                    .collect::<Vec<_>>();
                assert_eq!(hits, vec![ix.locate(&q).unwrap()]);
            }
        }
    }

    #[test]
    fn hyperbolic_within_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let w = additive_window(2);
        for _ in 0..5 {
            let pts = datasets::wide(&mut rng, 2, 40);
            let ix = build_avd_points(&pts).unwrap();
            for (i, p) in pts.iter().enumerate() {
                let got = ix.query_hyperbolic(p).unwrap();
                assert!(crate::hyperbolic::hyperbolic_distance(p, &pts[got]).unwrap() <= w, "{i}");
            }
            for q in datasets::wide(&mut rng, 2, 300) {
                let got = ix.query_hyperbolic(&q).unwrap();
                let best = nn_bruteforce_hyperbolic(&pts, &q).unwrap();
                let dg = crate::hyperbolic::hyperbolic_distance(&q, &pts[got]).unwrap();
                let db = crate::hyperbolic::hyperbolic_distance(&q, &pts[best]).unwrap();
                assert!(dg <= db + w);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let s = &sets(12, 5)[4];
        let ix = build_avd_cells(s).unwrap();
        let j = ix.to_json();
        let back = AvdIndex::from_json(&j).unwrap();
        assert_eq!(back.to_json(), j);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for q in datasets::queries_near(&mut rng, s, 100) {
            assert_eq!(back.query(&q).unwrap(), ix.query(&q).unwrap());
        }
    }

    #[test]
    fn sizes_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let s = datasets::in_margin(&mut rng, 2, 256, -12);
        let st = build_avd_cells(&s).unwrap().stats().clone();
        assert_eq!(st.n, 256);
        assert!(st.regions <= 40 * st.n, "{st:?}");
        assert!(st.max_representatives >= 1);
    }
}

