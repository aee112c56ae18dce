//! Shortcut edges on an upward forest so every descendant reaches every
//! ancestor in at most `k` hops.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShortcutSet {
    pub parent: Vec<Option<usize>>,
    pub k: usize,
    /// `(descendant, ancestor)`, excluding tree edges, sorted.
    pub extra_edges: Vec<(usize, usize)>,
}

impl ShortcutSet {
    /// Tree edges followed by the extra edges, all oriented upward.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .parent
            .iter()
            .enumerate()
            .filter_map(|(u, p)| p.map(|p| (u, p)))
            .collect();
        out.extend(self.extra_edges.iter().copied());
        out
    }

    /// Exhaustive check of the hop bound; returns the first failing
    /// `(descendant, ancestor)` pair.
    pub fn verify_hops(&self) -> std::result::Result<(), (usize, usize)> {
        let n = self.parent.len();
        let mut up = vec![Vec::new(); n];
        for (u, a) in self.edges() {
            up[u].push(a);
        }
        let mut seen = vec![usize::MAX; n];
        for u in 0..n {
            let mut queue = VecDeque::from([(u, 0usize)]);
            seen[u] = u;
            while let Some((v, h)) = queue.pop_front() {
                if h == self.k {
                    continue;
                }
                for &a in &up[v] {
                    if seen[a] != u {
                        seen[a] = u;
                        queue.push_back((a, h + 1));
                    }
                }
            }
            let mut a = self.parent[u];
            while let Some(x) = a {
                if seen[x] != u {
                    return Err((u, x));
                }
                a = self.parent[x];
            }
        }
        Ok(())
    }
}

/// Reference growth `lambda_k(n)` for reporting only.
pub fn lambda_reference(k: usize, n: usize) -> f64 {
    let n = n.max(2) as f64;
    match k {
        0 => f64::INFINITY,
        1 => n / 2.0,
        2 => n.log2(),
        3 => n.log2().max(2.0).log2(),
        _ => {
            let mut x = n;
            let mut s = 0.0;
            while x > 1.0 {
                x = x.log2();
                s += 1.0;
            }
            s
        }
    }
}

fn check_forest(parent: &[Option<usize>]) -> Result<()> {
    let n = parent.len();
    for p in parent.iter().flatten() {
        if *p >= n {
            return Err(Error::BadVertex(*p));
        }
    }
    // 0 = unvisited, 1 = on the current walk, 2 = known acyclic
    let mut state = vec![0u8; n];
    for start in 0..n {
        let mut walk = Vec::new();
        let mut v = Some(start);
        while let Some(x) = v {
            match state[x] {
                2 => break,
                1 => return Err(Error::Cycle(x)),
                _ => {
                    state[x] = 1;
                    walk.push(x);
                    v = parent[x];
                }
            }
        }
        for x in walk {
            state[x] = 2;
        }
    }
    Ok(())
}

pub fn shortcut_forest(parent: &[Option<usize>], k: usize) -> Result<ShortcutSet> {
    if k < 1 {
        return Err(Error::BadK);
    }
    check_forest(parent)?;
    let sub = Sub {
        ids: (0..parent.len()).collect(),
        parent: parent.to_vec(),
    };
    let mut out = BTreeSet::new();
    solve(&sub, k, &mut out);
    let extra_edges = out
        .into_iter()
        .filter(|&(u, a)| parent[u] != Some(a))
        .collect();
    Ok(ShortcutSet {
        parent: parent.to_vec(),
        k,
        extra_edges,
    })
}

/// A forest on local indices with a map back to global ids.
struct Sub {
    ids: Vec<usize>,
    parent: Vec<Option<usize>>,
}

impl Sub {
    fn len(&self) -> usize {
        self.ids.len()
    }

    /// Local indices with every parent before its children.
    fn top_down(&self) -> Vec<usize> {
        let n = self.len();
        let mut children = vec![Vec::new(); n];
        let mut order = Vec::with_capacity(n);
        for v in 0..n {
            match self.parent[v] {
                Some(p) => children[p].push(v),
                None => order.push(v),
            }
        }
        let mut i = 0;
        while i < order.len() {
            let v = order[i];
            order.extend(children[v].iter().copied());
            i += 1;
        }
        order
    }

    fn children(&self) -> Vec<Vec<usize>> {
        let mut children = vec![Vec::new(); self.len()];
        for v in 0..self.len() {
            if let Some(p) = self.parent[v] {
                children[p].push(v);
            }
        }
        children
    }

    /// The sub-forest induced on `keep`, with parent = nearest kept ancestor.
    fn contract(&self, keep: &[bool]) -> Sub {
        let mut local = vec![usize::MAX; self.len()];
        let mut ids = Vec::new();
        for v in 0..self.len() {
            if keep[v] {
                local[v] = ids.len();
                ids.push(self.ids[v]);
            }
        }
        let mut parent = Vec::with_capacity(ids.len());
        for v in 0..self.len() {
            if !keep[v] {
                continue;
            }
            let mut a = self.parent[v];
            while let Some(x) = a {
                if keep[x] {
                    break;
                }
                a = self.parent[x];
            }
            parent.push(a.map(|x| local[x]));
        }
        Sub { ids, parent }
    }
}

/// Longest root path, in edges.
fn height(s: &Sub) -> usize {
    let mut depth = vec![0usize; s.len()];
    let mut h = 0;
    for v in s.top_down() {
        if let Some(p) = s.parent[v] {
            depth[v] = depth[p] + 1;
            h = h.max(depth[v]);
        }
    }
    h
}

fn full_closure(s: &Sub, out: &mut BTreeSet<(usize, usize)>) {
    for v in 0..s.len() {
        let mut a = s.parent[v];
        while let Some(x) = a {
            out.insert((s.ids[v], s.ids[x]));
            a = s.parent[x];
        }
    }
}

fn solve(s: &Sub, k: usize, out: &mut BTreeSet<(usize, usize)>) {
    let n = s.len();
    // contracted forests have parent edges that are not tree edges
    for v in 0..n {
        if let Some(p) = s.parent[v] {
            out.insert((s.ids[v], s.ids[p]));
        }
    }
    if n <= 1 || height(s) <= k {
        return;
    }
    if k == 1 || n <= 4 {
        full_closure(s, out);
    } else if k == 2 {
        solve_centroid(s, out);
    } else {
        let b = if k == 3 {
            (n as f64).sqrt().ceil() as usize
        } else {
            (n as f64).log2().ceil() as usize
        }
        .max(3);
        if b >= n {
            full_closure(s, out);
        } else {
            solve_separated(s, k, b, out);
        }
    }
}

/// Two hops: route through a heavy vertex, then recurse on the pieces.
fn solve_centroid(s: &Sub, out: &mut BTreeSet<(usize, usize)>) {
    let n = s.len();
    let order = s.top_down();
    let children = s.children();
    let mut size = vec![1usize; n];
    for &v in order.iter().rev() {
        if let Some(p) = s.parent[v] {
            size[p] += size[v];
        }
    }
    let roots: Vec<usize> = (0..n).filter(|&v| s.parent[v].is_none()).collect();
    if roots.len() > 1 {
        for r in roots {
            let mut keep = vec![false; n];
            mark_subtree(r, &children, &mut keep);
            solve_centroid(&s.contract(&keep), out);
        }
        return;
    }
    let mut c = roots[0];
    while let Some(&h) = children[c].iter().find(|&&ch| 2 * size[ch] >= n) {
        c = h;
    }
    let mut in_sub = vec![false; n];
    mark_subtree(c, &children, &mut in_sub);
    for v in 0..n {
        if in_sub[v] && v != c {
            out.insert((s.ids[v], s.ids[c]));
        }
    }
    let mut a = s.parent[c];
    while let Some(x) = a {
        out.insert((s.ids[c], s.ids[x]));
        a = s.parent[x];
    }
    for &ch in &children[c] {
        let mut keep = vec![false; n];
        mark_subtree(ch, &children, &mut keep);
        solve(&s.contract(&keep), 2, out);
    }
    let rest: Vec<bool> = in_sub.iter().map(|&x| !x).collect();
    if rest.iter().any(|&x| x) {
        solve(&s.contract(&rest), 2, out);
    }
}

fn mark_subtree(v: usize, children: &[Vec<usize>], mark: &mut [bool]) {
    let mut stack = vec![v];
    while let Some(x) = stack.pop() {
        mark[x] = true;
        stack.extend(children[x].iter().copied());
    }
}

/// `k >= 3`: cut the forest into pieces of fewer than `b` vertices with an
/// LCA-closed separator set, route between pieces through the separator
/// forest with `k - 2` hops, and recurse inside pieces.
fn solve_separated(s: &Sub, k: usize, b: usize, out: &mut BTreeSet<(usize, usize)>) {
    let n = s.len();
    let order = s.top_down();
    let children = s.children();
    let mut in_sep = vec![false; n];
    let mut pending = vec![0usize; n];
    for &v in order.iter().rev() {
        let mut p = 1;
        for &c in &children[v] {
            if !in_sep[c] {
                p += pending[c];
            }
        }
        if p >= b {
            in_sep[v] = true;
            p = 0;
        }
        pending[v] = p;
    }
    // close under lowest common ancestors
    let mut has_sep = vec![false; n];
    for &v in order.iter().rev() {
        let branches = children[v].iter().filter(|&&c| has_sep[c]).count();
        if branches >= 2 {
            in_sep[v] = true;
        }
        has_sep[v] = in_sep[v] || branches >= 1;
    }
    // pieces of the complement, identified by their top vertex
    let mut top = vec![usize::MAX; n];
    for &v in &order {
        if in_sep[v] {
            continue;
        }
        top[v] = match s.parent[v] {
            Some(p) if !in_sep[p] => top[p],
            _ => v,
        };
    }
    for v in 0..n {
        if in_sep[v] {
            continue;
        }
        if let Some(st) = s.parent[top[v]] {
            out.insert((s.ids[v], s.ids[st]));
        }
    }
    for v in 0..n {
        if !in_sep[v] {
            continue;
        }
        let mut a = s.parent[v];
        while let Some(x) = a {
            if in_sep[x] {
                break;
            }
            out.insert((s.ids[v], s.ids[x]));
            a = s.parent[x];
        }
    }
    let mut tops: Vec<usize> = (0..n).filter(|&v| !in_sep[v] && top[v] == v).collect();
    tops.sort_unstable();
    for t in tops {
        let keep: Vec<bool> = (0..n).map(|v| !in_sep[v] && top[v] == t).collect();
        solve(&s.contract(&keep), k, out);
    }
    solve(&s.contract(&in_sep), k - 2, out);
}

#[cfg(test)]
mod small_forests {
    use super::*;
    #[test]
    fn exhaustive_small_random_trees() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for n in 5..40 {
            for _ in 0..50 {
                let parent: Vec<Option<usize>> = (0..n).map(|i| if i == 0 { None } else { Some(rng.gen_range(0..i)) }).collect();
                for k in [3, 4] {
                    let s = shortcut_forest(&parent, k).unwrap();
                    assert_eq!(s.verify_hops(), Ok(()), "k={k} {parent:?}");
                }
            }
        }
    }
}
