//! Seeded random point sets.

use rand::Rng;

use crate::tiling::{CellId, HPoint};

/// Points of `[0,1)^(D-1) x [z_min, 1]` with density `z^-D` (hyperbolic
/// volume), `z_min` chosen so each level holds about `n / 16` cells' worth
/// of points per `n` cells.
pub fn uniform_in_box<R: Rng>(rng: &mut R, dim: usize, n: usize) -> Vec<HPoint> {
    let m = (dim - 1) as f64;
    let top = 16.0 * n.max(1) as f64;
    (0..n)
        .map(|_| {
            let x = (0..dim - 1).map(|_| rng.gen_range(0.0..1.0)).collect();
            let u: f64 = rng.gen_range(1.0..top);
            HPoint { x, z: u.powf(-1.0 / m) }
        })
        .collect()
}

/// Cells with a level drawn uniformly from `min_level..=-1` and uniform
/// coordinates inside the root shadow.
pub fn level_stratified<R: Rng>(rng: &mut R, dim: usize, n: usize, min_level: i32) -> Vec<CellId> {
    (0..n)
        .map(|_| {
            let level = rng.gen_range(min_level..=-1);
            let k: Vec<i64> = (0..dim - 1).map(|_| rng.gen_range(0..1i64 << -level)).collect();
            CellId::from_i64(level, &k)
        })
        .collect()
}

/// Continuous points spread over a wide region, for exercising `normalize`.
pub fn wide<R: Rng>(rng: &mut R, dim: usize, n: usize) -> Vec<HPoint> {
    (0..n)
        .map(|_| {
            let x = (0..dim - 1).map(|_| rng.gen_range(-20.0..20.0)).collect();
            HPoint { x, z: rng.gen_range(-6.0f64..6.0).exp2() }
        })
        .collect()
}

/// Cells with centers in `[1/4, 1/2)^(D-1)`, levels uniform in
/// `min_level..=-2`.
pub fn in_margin<R: Rng>(rng: &mut R, dim: usize, n: usize, min_level: i32) -> Vec<CellId> {
    (0..n)
        .map(|_| {
            let level = rng.gen_range(min_level..=-2);
            let side = 1i64 << -level;
            let k: Vec<i64> = (0..dim - 1).map(|_| rng.gen_range(side / 4..side / 2)).collect();
            CellId::from_i64(level, &k)
        })
        .collect()
}

/// Query cells in the root shadow, levels uniform in `min_level..=0`.
pub fn query_cells<R: Rng>(rng: &mut R, dim: usize, n: usize, min_level: i32) -> Vec<CellId> {
    (0..n)
        .map(|_| {
            let level = rng.gen_range(min_level..=0);
            let k: Vec<i64> = (0..dim - 1).map(|_| rng.gen_range(0..1i64 << -level)).collect();
            CellId::from_i64(level, &k)
        })
        .collect()
}

/// Query cells near random members of `points`: a nearby level, a small
/// horizontal shift, clipped to the root shadow.
pub fn queries_near<R: Rng>(rng: &mut R, points: &[CellId], n: usize) -> Vec<CellId> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p = &points[rng.gen_range(0..points.len())];
        let mut c = p.clone();
        let dl = rng.gen_range(-3i32..=3);
        if dl > 0 {
            c = c.ancestor((p.level() + dl).min(0));
        } else {
            for _ in 0..-dl {
                let ch = c.children();
                c = ch[rng.gen_range(0..ch.len())].clone();
            }
        }
        let off: Vec<i8> = (0..p.dim() - 1).map(|_| rng.gen_range(-2i8..=2)).collect();
        let c = c.shifted(&off);
        if c.in_root_shadow() {
            out.push(c);
        }
    }
    out
}
