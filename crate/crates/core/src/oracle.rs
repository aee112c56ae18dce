//! Brute-force references. Slow on purpose; used only to cross-check the
//! fast paths.

use std::collections::{HashMap, VecDeque};

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::hyperbolic::dist_unchecked;
use crate::metrics::{d1, d2};
use crate::tiling::{lca, CellId, HPoint, MoveKind};

/// A finite piece of the cell graph: a level range and, per level, a
/// coordinate box.
#[derive(Clone, Debug)]
pub struct CellGraphWindow {
    pub min_level: i32,
    pub max_level: i32,
    /// `bounds[level - min_level][axis] = (lo, hi)`, inclusive.
    bounds: Vec<Vec<(BigInt, BigInt)>>,
}

impl CellGraphWindow {
    /// Window around `p` and `q`: from the lower endpoint up to two levels
    /// above their common ancestor, with `slack` cells of horizontal margin.
    pub fn around(p: &CellId, q: &CellId, extra_levels: i32, slack: i64) -> Self {
        let min_level = p.level().min(q.level()) - extra_levels.max(0);
        let max_level = lca(p, q).level() + 2 + extra_levels.max(0);
        let m = p.coords().len();
        let span = |c: &CellId, level: i32, j: usize| -> (BigInt, BigInt) {
            if level >= c.level() {
                let k = c.ancestor(level).coords()[j].clone();
                (k.clone(), k)
            } else {
                let s = (c.level() - level) as usize;
                let lo = &c.coords()[j] << s;
                let hi = ((&c.coords()[j] + 1) << s) - 1;
                (lo, hi)
            }
        };
        let bounds = (min_level..=max_level)
            .map(|level| {
                (0..m)
                    .map(|j| {
                        let (a0, a1) = span(p, level, j);
                        let (b0, b1) = span(q, level, j);
                        let lo = a0.min(b0) - slack;
                        let hi = a1.max(b1) + slack;
                        (lo, hi)
                    })
                    .collect()
            })
            .collect();
        CellGraphWindow {
            min_level,
            max_level,
            bounds,
        }
    }

    pub fn contains(&self, c: &CellId) -> bool {
        if c.level() < self.min_level || c.level() > self.max_level {
            return false;
        }
        let b = &self.bounds[(c.level() - self.min_level) as usize];
        c.coords()
            .iter()
            .zip(b)
            .all(|(k, (lo, hi))| lo <= k && k <= hi)
    }

    fn moves(&self, c: &CellId) -> Vec<(CellId, bool)> {
        let mut out = vec![(c.apply(&MoveKind::Up), false)];
        out.extend(c.children().into_iter().map(|ch| (ch, false)));
        out.extend(c.horizontal_neighbors().into_iter().map(|n| (n, true)));
        out.retain(|(n, _)| self.contains(n));
        out
    }
}

/// `d1` by breadth-first search over up/down/horizontal moves inside `w`.
pub fn d1_bfs(p: &CellId, q: &CellId, w: &CellGraphWindow) -> Result<u64> {
    if !w.contains(p) || !w.contains(q) {
        return Err(Error::OutsideWindow);
    }
    let mut dist: HashMap<CellId, u64> = HashMap::new();
    let mut queue = VecDeque::new();
    dist.insert(p.clone(), 0);
    queue.push_back(p.clone());
    while let Some(c) = queue.pop_front() {
        let dc = dist[&c];
        if c == *q {
            return Ok(dc);
        }
        for (n, _) in w.moves(&c) {
            if !dist.contains_key(&n) {
                dist.insert(n.clone(), dc + 1);
                queue.push_back(n);
            }
        }
    }
    Err(Error::OutsideWindow)
}

/// `d2` straight from its definition: BFS over (cell, horizontal move used).
pub fn d2_bfs(p: &CellId, q: &CellId, w: &CellGraphWindow) -> Result<u64> {
    if !w.contains(p) || !w.contains(q) {
        return Err(Error::OutsideWindow);
    }
    let mut dist: HashMap<(CellId, bool), u64> = HashMap::new();
    let mut queue = VecDeque::new();
    dist.insert((p.clone(), false), 0);
    queue.push_back((p.clone(), false));
    while let Some((c, used)) = queue.pop_front() {
        let dc = dist[&(c.clone(), used)];
        if c == *q {
            return Ok(dc);
        }
        for (n, horizontal) in w.moves(&c) {
            if horizontal && used {
                continue;
            }
            let key = (n, used || horizontal);
            if !dist.contains_key(&key) {
                dist.insert(key.clone(), dc + 1);
                queue.push_back(key);
            }
        }
    }
    Err(Error::OutsideWindow)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    D1,
    D2,
}

/// Index of the nearest point, smallest index on ties.
pub fn nn_bruteforce(points: &[CellId], q: &CellId, metric: Metric) -> Option<usize> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let d = match metric {
                Metric::D1 => d1(q, p),
                Metric::D2 => d2(q, p),
            };
            (d, i)
        })
        .min()
        .map(|(_, i)| i)
}

/// Hyperbolic nearest neighbor, smallest index on ties.
pub fn nn_bruteforce_hyperbolic(points: &[HPoint], q: &HPoint) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (i, p) in points.iter().enumerate() {
        let d = dist_unchecked(q, p);
        if best.map_or(true, |(bd, _)| d < bd) {
            best = Some((d, i));
        }
    }
    best.map(|(_, i)| i)
}
