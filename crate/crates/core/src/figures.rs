//! Small fixed configurations in `D = 2`.

use crate::tiling::CellId;

fn c(level: i32, k: i64) -> CellId {
    CellId::from_i64(level, &[k])
}

/// A pair with `d1 = 5` and `d2 = 6`.
pub fn models_pair() -> (CellId, CellId) {
    (c(-5, 0), c(-4, 4))
}

/// `p, q, r` with `d2(p,q) = d2(q,r) = 1` and `d2(p,r) = 3`.
pub fn triangle_counterexample() -> [CellId; 3] {
    [c(0, 1), c(0, 2), c(0, 3)]
}

/// A pair with `d1 = 3` and `d2 = 5`.
pub fn tight_pair() -> (CellId, CellId) {
    (c(0, 1), c(0, 4))
}

/// Six points `p1..p6` of the spanner example.
pub fn spanner_points() -> Vec<CellId> {
    vec![c(-5, 7), c(-5, 14), c(-4, 14), c(-2, 3), c(-5, 22), c(-5, 21)]
}

/// Steiner vertices `v1..v6` of the spanner example.
pub fn spanner_steiner() -> Vec<CellId> {
    vec![c(-2, 0), c(-2, 2), c(-1, 0), c(-2, 1), c(-1, 1), c(-3, 5)]
}
