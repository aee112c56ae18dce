//! Compressed quadtree over boxes of `[0,1]^(D-1)`, i.e. over cells below the
//! root cell `(0, [0,..,0])`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tiling::{column_cell, lca, CellId};

pub type NodeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Ordinary,
    Compressed,
    Leaf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadNode {
    pub cell: CellId,
    pub kind: NodeKind,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// The cell itself is one of the stored boxes.
    pub stored: bool,
    pub stored_point: Option<usize>,
    /// `h`: highest point in the subtree.
    pub highest: Option<usize>,
    /// `n2`: nearest point under `d2`.
    pub nearest: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct QuadTree {
    dim: usize,
    nodes: Vec<QuadNode>,
    points: Vec<CellId>,
    point_at: HashMap<CellId, usize>,
    index: HashMap<CellId, NodeId>,
}

/// Higher level first, then smaller index.
pub(crate) fn higher_point(points: &[CellId], a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(i), Some(j)) => {
            let key = |k: usize| (std::cmp::Reverse(points[k].level()), k);
            Some(if key(i) <= key(j) { i } else { j })
        }
    }
}

impl QuadTree {
    pub const ROOT: NodeId = 0;

    /// An empty tree over `[0,1]^(D-1)`.
    pub fn empty(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::BadDimension(dim));
        }
        let mut t = QuadTree {
            dim,
            nodes: Vec::new(),
            points: Vec::new(),
            point_at: HashMap::new(),
            index: HashMap::new(),
        };
        t.push(CellId::root(dim), NodeKind::Leaf, None, false);
        Ok(t)
    }

    /// Top-down construction. Repeated cells keep the smallest index.
    pub fn build(dim: usize, points: &[CellId]) -> Result<Self> {
        let mut t = QuadTree::empty(dim)?;
        for p in points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.dim(),
                });
            }
            if !p.in_root_shadow() {
                return Err(Error::OutsideRoot(p.level()));
            }
        }
        t.points = points.to_vec();
        for (i, p) in points.iter().enumerate() {
            t.point_at.entry(p.clone()).or_insert(i);
        }
        let mut boxes: Vec<CellId> = t.point_at.keys().cloned().collect();
        boxes.sort();
        t.nodes.clear();
        t.index.clear();
        t.build_node(CellId::root(dim), None, boxes);
        t.compute_highest();
        Ok(t)
    }

    /// Reassemble a tree from its node list (root first), e.g. after
    /// deserialization.
    pub fn from_nodes(dim: usize, points: Vec<CellId>, nodes: Vec<QuadNode>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::BadDimension(dim));
        }
        let mut point_at = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.dim(),
                });
            }
            point_at.entry(p.clone()).or_insert(i);
        }
        let index = nodes.iter().enumerate().map(|(i, n)| (n.cell.clone(), i)).collect();
        let t = QuadTree {
            dim,
            nodes,
            points,
            point_at,
            index,
        };
        t.check_invariants().map_err(Error::Parse)?;
        Ok(t)
    }

    fn build_node(&mut self, cell: CellId, parent: Option<NodeId>, boxes: Vec<CellId>) -> NodeId {
        let has_self = boxes.iter().any(|b| *b == cell);
        let below: Vec<CellId> = boxes.into_iter().filter(|b| *b != cell).collect();
        if below.is_empty() {
            return self.push(cell, NodeKind::Leaf, parent, has_self);
        }
        let child_level = cell.level() - 1;
        let mut groups: HashMap<CellId, Vec<CellId>> = HashMap::new();
        for b in below.iter() {
            groups.entry(b.ancestor(child_level)).or_default().push(b.clone());
        }
        if has_self || groups.len() >= 2 {
            let id = self.push(cell.clone(), NodeKind::Ordinary, parent, has_self);
            for child in cell.children() {
                let sub = groups.remove(&child).unwrap_or_default();
                let cid = self.build_node(child, Some(id), sub);
                self.nodes[id].children.push(cid);
            }
            id
        } else {
            let a = below.iter().skip(1).fold(below[0].clone(), |acc, b| lca(&acc, b));
            let id = self.push(cell, NodeKind::Compressed, parent, false);
            let cid = self.build_node(a, Some(id), below);
            self.nodes[id].children.push(cid);
            id
        }
    }

    fn push(&mut self, cell: CellId, kind: NodeKind, parent: Option<NodeId>, stored: bool) -> NodeId {
        let id = self.nodes.len();
        let stored_point = if stored { self.point_at.get(&cell).copied() } else { None };
        self.index.insert(cell.clone(), id);
        self.nodes.push(QuadNode {
            cell,
            kind,
            parent,
            children: Vec::new(),
            stored,
            stored_point,
            highest: None,
            nearest: None,
        });
        id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> &[QuadNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &QuadNode {
        &self.nodes[id]
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut QuadNode {
        &mut self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[CellId] {
        &self.points
    }

    pub fn node_of(&self, cell: &CellId) -> Option<NodeId> {
        self.index.get(cell).copied()
    }

    /// Point index stored at `cell`, if any.
    pub fn point_at(&self, cell: &CellId) -> Option<usize> {
        self.point_at.get(cell).copied()
    }

    /// The leaf or compressed node whose box/region contains `x`.
    pub fn locate(&self, x: &[f64]) -> Result<NodeId> {
        if x.len() + 1 != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len() + 1,
            });
        }
        if !x.iter().all(|v| (0.0..1.0).contains(v)) {
            return Err(Error::OutsideRoot(0));
        }
        let mut v = Self::ROOT;
        loop {
            let n = &self.nodes[v];
            match n.kind {
                NodeKind::Leaf => return Ok(v),
                NodeKind::Ordinary => {
                    let c = column_cell(x, n.cell.level() - 1)?;
                    v = self.index[&c];
                }
                NodeKind::Compressed => {
                    let c1 = n.children[0];
                    let cell = &self.nodes[c1].cell;
                    if column_cell(x, cell.level())? == *cell {
                        v = c1;
                    } else {
                        return Ok(v);
                    }
                }
            }
        }
    }

    /// Largest node box inside `query` and smallest node box containing it.
    pub fn cell_query(&self, query: &CellId) -> (Option<NodeId>, Option<NodeId>) {
        if query.dim() != self.dim || !query.in_root_shadow() {
            return (None, None);
        }
        if let Some(&id) = self.index.get(query) {
            return (Some(id), Some(id));
        }
        let mut v = Self::ROOT;
        loop {
            let n = &self.nodes[v];
            match n.kind {
                NodeKind::Leaf => return (None, Some(v)),
                NodeKind::Ordinary => v = self.index[&query.ancestor(n.cell.level() - 1)],
                NodeKind::Compressed => {
                    let c1 = n.children[0];
                    let cell = &self.nodes[c1].cell;
                    if cell.is_proper_ancestor_of(query) {
                        v = c1;
                    } else if query.is_proper_ancestor_of(cell) {
                        return (Some(c1), Some(v));
                    } else {
                        return (None, Some(v));
                    }
                }
            }
        }
    }

    /// Highest input point whose cell lies in the subtree of `cell`.
    pub fn highest_under(&self, cell: &CellId) -> Option<usize> {
        self.cell_query(cell).0.and_then(|id| self.nodes[id].highest)
    }

    /// Add a box; compressed edges are split and children materialized so
    /// the result is the compressed quadtree of the enlarged box set.
    pub fn insert_box(&mut self, b: &CellId) -> Result<()> {
        if b.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: b.dim(),
            });
        }
        if !b.in_root_shadow() {
            return Err(Error::OutsideRoot(b.level()));
        }
        if let Some(&id) = self.index.get(b) {
            if id == Self::ROOT || self.nodes[id].stored {
                return Ok(());
            }
            self.nodes[id].stored = true;
            if self.nodes[id].kind == NodeKind::Compressed {
                let c1 = self.nodes[id].children[0];
                self.make_ordinary(id, vec![c1]);
            }
            return Ok(());
        }
        let mut v = Self::ROOT;
        loop {
            match self.nodes[v].kind {
                NodeKind::Ordinary => {
                    let level = self.nodes[v].cell.level() - 1;
                    v = self.index[&b.ancestor(level)];
                }
                NodeKind::Leaf => {
                    let nb = self.push(b.clone(), NodeKind::Leaf, Some(v), true);
                    if self.nodes[v].stored {
                        self.make_ordinary(v, vec![nb]);
                    } else {
                        self.nodes[v].kind = NodeKind::Compressed;
                        self.nodes[v].children = vec![nb];
                    }
                    break;
                }
                NodeKind::Compressed => {
                    let c1 = self.nodes[v].children[0];
                    let c1_cell = self.nodes[c1].cell.clone();
                    if c1_cell.is_proper_ancestor_of(b) {
                        v = c1;
                        continue;
                    }
                    if b.is_proper_ancestor_of(&c1_cell) {
                        let nb = self.push(b.clone(), NodeKind::Ordinary, Some(v), true);
                        self.nodes[v].children = vec![nb];
                        self.make_ordinary(nb, vec![c1]);
                        break;
                    }
                    let a = lca(b, &c1_cell);
                    let nb = self.push(b.clone(), NodeKind::Leaf, None, true);
                    if a == self.nodes[v].cell {
                        self.make_ordinary(v, vec![c1, nb]);
                    } else {
                        let na = self.push(a, NodeKind::Ordinary, Some(v), false);
                        self.nodes[v].children = vec![na];
                        self.make_ordinary(na, vec![c1, nb]);
                    }
                    break;
                }
            }
        }
        self.compute_highest();
        Ok(())
    }

    /// Turn `id` into an ordinary node whose materialized children lead to
    /// the subtrees `subs`.
    fn make_ordinary(&mut self, id: NodeId, subs: Vec<NodeId>) {
        let cell = self.nodes[id].cell.clone();
        let mut children = Vec::new();
        for child in cell.children() {
            let sub = subs
                .iter()
                .copied()
                .find(|&s| child.is_ancestor_or_self_of(&self.nodes[s].cell));
            let cid = match sub {
                Some(s) if self.nodes[s].cell == child => s,
                Some(s) => {
                    let c = self.push(child, NodeKind::Compressed, Some(id), false);
                    self.nodes[c].children = vec![s];
                    self.nodes[s].parent = Some(c);
                    c
                }
                None => self.push(child, NodeKind::Leaf, Some(id), false),
            };
            self.nodes[cid].parent = Some(id);
            children.push(cid);
        }
        let n = &mut self.nodes[id];
        n.kind = NodeKind::Ordinary;
        n.children = children;
    }

    /// Node ids in preorder, children in offset order.
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![Self::ROOT];
        while let Some(v) = stack.pop() {
            out.push(v);
            stack.extend(self.nodes[v].children.iter().rev());
        }
        out
    }

    /// Recompute `h` bottom-up.
    pub fn compute_highest(&mut self) {
        for v in self.preorder().into_iter().rev() {
            let mut h = self.nodes[v].stored_point;
            for &c in &self.nodes[v].children {
                h = higher_point(&self.points, h, self.nodes[c].highest);
            }
            self.nodes[v].highest = h;
        }
    }

    /// Leaf and compressed nodes: the cells of the partition.
    pub fn regions(&self) -> Vec<NodeId> {
        self.preorder()
            .into_iter()
            .filter(|&v| self.nodes[v].kind != NodeKind::Ordinary)
            .collect()
    }

    /// Whether `x` lies in the region of node `v`.
    pub fn region_contains(&self, v: NodeId, x: &[f64]) -> bool {
        let n = &self.nodes[v];
        match n.kind {
            NodeKind::Ordinary => false,
            NodeKind::Leaf => n.cell.contains_x(x),
            NodeKind::Compressed => {
                n.cell.contains_x(x) && !self.nodes[n.children[0]].cell.contains_x(x)
            }
        }
    }

    /// Structural check; returns a description of the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let stored_below = |v: NodeId| -> Vec<CellId> {
            let mut out = Vec::new();
            let mut stack = self.nodes[v].children.clone();
            while let Some(u) = stack.pop() {
                if self.nodes[u].stored {
                    out.push(self.nodes[u].cell.clone());
                }
                stack.extend(self.nodes[u].children.iter());
            }
            out
        };
        for (v, n) in self.nodes.iter().enumerate() {
            for &c in &n.children {
                if self.nodes[c].parent != Some(v) {
                    return Err(format!("node {v}: child {c} has wrong parent"));
                }
                if !n.cell.is_proper_ancestor_of(&self.nodes[c].cell) {
                    return Err(format!("node {v}: child {c} not below"));
                }
            }
            let below = stored_below(v);
            match n.kind {
                NodeKind::Leaf => {
                    if !n.children.is_empty() || !below.is_empty() {
                        return Err(format!("leaf {v} has content below"));
                    }
                }
                NodeKind::Ordinary => {
                    if n.children.len() != 1 << (self.dim - 1) {
                        return Err(format!("ordinary {v}: children not materialized"));
                    }
                    let nonempty = n
                        .children
                        .iter()
                        .filter(|&&c| self.nodes[c].stored || !stored_below(c).is_empty())
                        .count();
                    if nonempty < 2 && !(n.stored && nonempty >= 1) {
                        return Err(format!("ordinary {v}: too few nonempty children"));
                    }
                }
                NodeKind::Compressed => {
                    if n.stored || n.children.len() != 1 || below.is_empty() {
                        return Err(format!("compressed {v}: bad shape"));
                    }
                    let a = below.iter().skip(1).fold(below[0].clone(), |acc, b| lca(&acc, b));
                    if a != self.nodes[n.children[0]].cell {
                        return Err(format!("compressed {v}: child is not the minimal box"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Inverse of [`QuadTree::to_json`].
    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Rec {
            cell: CellId,
            kind: NodeKind,
            parent: Option<NodeId>,
            children: Vec<NodeId>,
            stored: bool,
            point: Option<usize>,
            highest: Option<usize>,
            nearest: Option<usize>,
        }
        #[derive(Deserialize)]
        struct File {
            dim: usize,
            points: Vec<CellId>,
            nodes: Vec<Rec>,
        }
        let f: File = serde_json::from_value(value.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let nodes = f
            .nodes
            .into_iter()
            .map(|r| QuadNode {
                cell: r.cell,
                kind: r.kind,
                parent: r.parent,
                children: r.children,
                stored: r.stored,
                stored_point: r.point,
                highest: r.highest,
                nearest: r.nearest,
            })
            .collect();
        QuadTree::from_nodes(f.dim, f.points, nodes)
    }

    /// Deterministic JSON: nodes renumbered in preorder.
    pub fn to_json(&self) -> serde_json::Value {
        let order = self.preorder();
        let mut renum = vec![0usize; self.nodes.len()];
        for (i, &v) in order.iter().enumerate() {
            renum[v] = i;
        }
        let nodes: Vec<serde_json::Value> = order
            .iter()
            .map(|&v| {
                let n = &self.nodes[v];
                serde_json::json!({
                    "cell": n.cell,
                    "kind": n.kind,
                    "parent": n.parent.map(|p| renum[p]),
                    "children": n.children.iter().map(|&c| renum[c]).collect::<Vec<_>>(),
                    "stored": n.stored,
                    "point": n.stored_point,
                    "highest": n.highest,
                    "nearest": n.nearest,
                })
            })
            .collect();
        serde_json::json!({
            "dim": self.dim,
            "points": self.points,
            "nodes": nodes,
        })
    }
}
