//! The discrete distances `d1` (fewest moves) and `d2` (fewest moves with at
//! most one horizontal move) on cell centers.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tiling::{chebyshev, CellId};

/// The unique `d2`-path between two cells: an up-run from `start` to
/// `apex_p`, an optional bridge `apex_p -- apex_q`, and a down-run to `end`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct D2Path {
    pub start: CellId,
    pub end: CellId,
    pub apex_p: CellId,
    pub apex_q: CellId,
    pub has_bridge: bool,
}

impl D2Path {
    pub fn length(&self) -> u64 {
        let up = (self.apex_p.level() - self.start.level()) as u64;
        let down = (self.apex_q.level() - self.end.level()) as u64;
        up + down + u64::from(self.has_bridge)
    }

    /// `lev(p,q)`: the bridge level, or the level of the higher endpoint when
    /// one endpoint is an ancestor-or-self of the other.
    pub fn bridge_level(&self) -> i32 {
        self.apex_p.level()
    }

    /// The cells visited, start to end.
    pub fn cells(&self) -> Vec<CellId> {
        let mut out = Vec::new();
        let mut cur = self.start.clone();
        while cur.level() < self.apex_p.level() {
            out.push(cur.clone());
            cur = cur.parent();
        }
        out.push(cur);
        let mut down = Vec::new();
        let mut cur = self.end.clone();
        while cur.level() < self.apex_q.level() {
            down.push(cur.clone());
            cur = cur.parent();
        }
        if self.has_bridge {
            down.push(cur);
        }
        out.extend(down.into_iter().rev());
        out
    }
}

/// Horizontal distance of two same-level cells, in cell widths.
pub fn lambda(p: &CellId, q: &CellId) -> Result<BigInt> {
    if p.level() != q.level() {
        return Err(Error::LevelMismatch(p.level(), q.level()));
    }
    check_dims(p, q)?;
    Ok(chebyshev(p.coords(), q.coords()))
}

fn check_dims(p: &CellId, q: &CellId) -> Result<()> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: q.dim(),
        });
    }
    Ok(())
}

/// Exact `d1` through the same-level recurrence `d1 = lambda` when
/// `lambda <= 4`, else `2 + d1(parents)`.
pub fn d1(p: &CellId, q: &CellId) -> u64 {
    assert_eq!(p.dim(), q.dim(), "dimension mismatch");
    let top = p.level().max(q.level());
    let mut dist = (top - p.level()) as u64 + (top - q.level()) as u64;
    let mut a = p.ancestor(top);
    let mut b = q.ancestor(top);
    let four = BigInt::from(4);
    loop {
        let lam = chebyshev(a.coords(), b.coords());
        if lam <= four {
            return dist + lam.to_u64().expect("small");
        }
        dist += 2;
        a = a.parent();
        b = b.parent();
    }
}

/// The unique `d2`-path from `p` to `q`.
pub fn d2_path(p: &CellId, q: &CellId) -> D2Path {
    assert_eq!(p.dim(), q.dim(), "dimension mismatch");
    let top = p.level().max(q.level());
    let mut a = p.ancestor(top);
    let mut b = q.ancestor(top);
    loop {
        let lam = chebyshev(a.coords(), b.coords());
        if lam.is_zero() {
            return D2Path {
                start: p.clone(),
                end: q.clone(),
                apex_p: a.clone(),
                apex_q: a,
                has_bridge: false,
            };
        }
        if lam.is_one() {
            return D2Path {
                start: p.clone(),
                end: q.clone(),
                apex_p: a,
                apex_q: b,
                has_bridge: true,
            };
        }
        a = a.parent();
        b = b.parent();
    }
}

pub fn d2(p: &CellId, q: &CellId) -> u64 {
    d2_path(p, q).length()
}

/// `floor(log2 ||x(b(p)) - x(b(q))||_inf)` evaluated in exact integer arithmetic.
/// Lies in `{lev(p,q) - 1, lev(p,q)}`.
pub fn bridge_level_estimate(p: &CellId, q: &CellId) -> Result<i32> {
    check_dims(p, q)?;
    if p.is_ancestor_or_self_of(q) || q.is_ancestor_or_self_of(p) {
        return Err(Error::AncestorPair);
    }
    // centers scaled by 2^(-m): (2k+1) 2^(i-1-m), all integers
    let m = p.level().min(q.level()) - 1;
    let scale = |c: &CellId| -> Vec<BigInt> {
        let s = (c.level() - 1 - m) as usize;
        c.coords()
            .iter()
            .map(|k| ((k << 1usize) + 1) << s)
            .collect()
    };
    let (sp, sq) = (scale(p), scale(q));
    let diff = sp
        .iter()
        .zip(&sq)
        .map(|(a, b)| (a - b).abs())
        .max()
        .unwrap_or_default();
    debug_assert!(diff.is_positive());
    Ok(diff.bits() as i32 - 1 + m)
}
