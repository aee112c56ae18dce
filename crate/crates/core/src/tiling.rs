//! Cells of the binary tiling of the Poincaré halfspace.
//!
//! A cell at level `i` with integer coordinates `k` is the box
//! `prod_j [k_j 2^i, (k_j+1) 2^i] x [2^i, 2^(i+1)]`. The same value names the
//! cell center (a point of the discrete model) and the quadtree box obtained by
//! projecting the cell onto `z = 0`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A cell of the binary tiling.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CellId {
    level: i32,
    coords: Vec<BigInt>,
}

/// A point `(x, z)` of the halfspace, `z > 0`.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct HPoint {
    pub x: Vec<f64>,
    pub z: f64,
}

/// One move of the discrete model.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum MoveKind {
    Up,
    /// Index into `children()`, in `[0, 2^(D-1))`.
    Down(usize),
    /// Offset in `{-1,0,1}^(D-1)`, never all zero.
    Horizontal(Vec<i8>),
}

fn pow2(e: u32) -> BigInt {
    BigInt::one() << e as usize
}

/// `x * 2^e` without intermediate overflow for large `|e|`.
pub(crate) fn ldexp(mut x: f64, mut e: i32) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e)
}

/// Binary exponent of a positive finite float: the `e` with `2^e <= z < 2^(e+1)`.
pub(crate) fn binary_exponent(z: f64) -> i32 {
    let bits = z.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    if biased == 0 {
        let mantissa = bits & ((1u64 << 52) - 1);
        let top = 63 - mantissa.leading_zeros() as i32;
        top - 1074
    } else {
        biased - 1023
    }
}

impl CellId {
    pub fn new(level: i32, coords: Vec<BigInt>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::BadDimension(coords.len() + 1));
        }
        Ok(CellId { level, coords })
    }

    /// Convenience constructor for small coordinates.
    pub fn from_i64(level: i32, coords: &[i64]) -> Self {
        assert!(!coords.is_empty(), "a cell needs at least one horizontal coordinate");
        CellId {
            level,
            coords: coords.iter().map(|&k| BigInt::from(k)).collect(),
        }
    }

    /// The root cell `[0,1]^(D-1) x [1,2]`.
    pub fn root(dim: usize) -> Self {
        assert!(dim >= 2);
        CellId {
            level: 0,
            coords: vec![BigInt::zero(); dim - 1],
        }
    }

    pub fn level(&self) -> i32 {
        self.level
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    /// Ambient dimension `D`.
    pub fn dim(&self) -> usize {
        self.coords.len() + 1
    }

    pub fn parent(&self) -> CellId {
        let two = BigInt::from(2);
        CellId {
            level: self.level + 1,
            coords: self.coords.iter().map(|k| k.div_floor(&two)).collect(),
        }
    }

    /// Ancestor-or-self at `level`. Panics if `level < self.level()`.
    pub fn ancestor(&self, level: i32) -> CellId {
        assert!(level >= self.level, "ancestor level below cell level");
        let shift = (level - self.level) as u32;
        if shift == 0 {
            return self.clone();
        }
        let d = pow2(shift);
        CellId {
            level,
            coords: self.coords.iter().map(|k| k.div_floor(&d)).collect(),
        }
    }

    /// The `2^(D-1)` children, ordered lexicographically by offset (first axis most significant).
    pub fn children(&self) -> Vec<CellId> {
        let m = self.coords.len();
        let base: Vec<BigInt> = self.coords.iter().map(|k| k * 2).collect();
        (0..1usize << m)
            .map(|mask| CellId {
                level: self.level - 1,
                coords: base
                    .iter()
                    .enumerate()
                    .map(|(j, b)| {
                        if (mask >> (m - 1 - j)) & 1 == 1 {
                            b + 1
                        } else {
                            b.clone()
                        }
                    })
                    .collect(),
            })
            .collect()
    }

    /// Offset of this cell inside its parent, each entry 0 or 1.
    pub fn child_offset(&self) -> Vec<u8> {
        self.coords
            .iter()
            .map(|k| if k.is_odd() { 1 } else { 0 })
            .collect()
    }

    /// The `3^(D-1) - 1` same-level cells sharing boundary, diagonals included,
    /// ordered lexicographically by offset.
    pub fn horizontal_neighbors(&self) -> Vec<CellId> {
        neighbor_offsets(self.coords.len())
            .into_iter()
            .map(|off| self.shifted(&off))
            .collect()
    }

    pub fn shifted(&self, offset: &[i8]) -> CellId {
        CellId {
            level: self.level,
            coords: self
                .coords
                .iter()
                .zip(offset)
                .map(|(k, &o)| k + BigInt::from(o))
                .collect(),
        }
    }

    pub fn apply(&self, mv: &MoveKind) -> CellId {
        match mv {
            MoveKind::Up => self.parent(),
            MoveKind::Down(i) => self.children().swap_remove(*i),
            MoveKind::Horizontal(off) => {
                assert!(off.iter().any(|&o| o != 0), "zero horizontal offset");
                self.shifted(off)
            }
        }
    }

    /// Center `b(C)`: `x_j = (k_j + 1/2) 2^i`, `z = 3 * 2^(i-1)`.
    pub fn center(&self) -> HPoint {
        HPoint {
            x: self
                .coords
                .iter()
                .map(|k| ldexp(k.to_f64().unwrap_or(f64::NAN) + 0.5, self.level))
                .collect(),
            z: ldexp(3.0, self.level - 1),
        }
    }

    pub fn is_ancestor_or_self_of(&self, other: &CellId) -> bool {
        self.level >= other.level && other.ancestor(self.level) == *self
    }

    pub fn is_proper_ancestor_of(&self, other: &CellId) -> bool {
        self.level > other.level && other.ancestor(self.level) == *self
    }

    pub fn is_neighbor(&self, other: &CellId) -> bool {
        self.level == other.level && chebyshev(&self.coords, &other.coords).is_one()
    }

    /// Whether the x-box lies in `[0,1]^(D-1)` at a level `<= 0`.
    pub fn in_root_shadow(&self) -> bool {
        if self.level > 0 {
            return false;
        }
        let bound = pow2((-self.level) as u32);
        self.coords.iter().all(|k| !k.is_negative() && *k < bound)
    }

    /// Whether the half-open x-box contains `x`.
    pub fn contains_x(&self, x: &[f64]) -> bool {
        self.coords.iter().zip(x).all(|(k, &v)| {
            let scaled = ldexp(v, -self.level).floor();
            k.to_f64().map(|kf| kf == scaled).unwrap_or(false)
        })
    }

    /// Whether the closed x-boxes of two cells intersect.
    pub fn boxes_touch(&self, other: &CellId) -> bool {
        let m = self.level.min(other.level);
        let sa = pow2((self.level - m) as u32);
        let sb = pow2((other.level - m) as u32);
        self.coords.iter().zip(&other.coords).all(|(a, b)| {
            let lo_a = a * &sa;
            let hi_a = &lo_a + &sa;
            let lo_b = b * &sb;
            let hi_b = &lo_b + &sb;
            lo_a <= hi_b && lo_b <= hi_a
        })
    }
}

/// `max_j |a_j - b_j|`.
pub(crate) fn chebyshev(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .max()
        .unwrap_or_default()
}

/// All offsets in `{-1,0,1}^m` except zero, lexicographic.
pub fn neighbor_offsets(m: usize) -> Vec<Vec<i8>> {
    let total = 3usize.pow(m as u32);
    (0..total)
        .map(|mut t| {
            let mut off = vec![0i8; m];
            for j in (0..m).rev() {
                off[j] = (t % 3) as i8 - 1;
                t /= 3;
            }
            off
        })
        .filter(|off| off.iter().any(|&o| o != 0))
        .collect()
}

/// Lowest common ancestor-or-self of two cells. Panics if the cells lie on
/// opposite sides of a coordinate hyperplane `x_j = 0` (no common ancestor).
pub fn lca(a: &CellId, b: &CellId) -> CellId {
    assert!(
        a.coords.iter().zip(&b.coords).all(|(x, y)| x.is_negative() == y.is_negative()),
        "cells have no common ancestor"
    );
    let top = a.level.max(b.level);
    let mut x = a.ancestor(top);
    let mut y = b.ancestor(top);
    while x != y {
        x = x.parent();
        y = y.parent();
    }
    x
}

/// Preorder of the infinite cell tree: ancestors first, siblings by offset.
pub fn preorder_cmp(a: &CellId, b: &CellId) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    let top = a.level.max(b.level);
    let mut x = a.ancestor(top);
    let mut y = b.ancestor(top);
    if x == y {
        // one is an ancestor of the other
        return b.level.cmp(&a.level);
    }
    loop {
        let px = x.parent();
        let py = y.parent();
        if px == py {
            return x.child_offset().cmp(&y.child_offset());
        }
        x = px;
        y = py;
    }
}

impl PartialOrd for CellId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Total order by level then coordinates; used for canonical sorting only.
impl Ord for CellId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.level
            .cmp(&other.level)
            .then_with(|| self.coords.cmp(&other.coords))
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},[", self.level)?;
        for (j, k) in self.coords.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, "])")
    }
}

impl HPoint {
    pub fn new(x: Vec<f64>, z: f64) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::BadDimension(1));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if !(z > 0.0) || !z.is_finite() {
            return Err(Error::NonPositiveHeight(z));
        }
        Ok(HPoint { x, z })
    }

    pub fn dim(&self) -> usize {
        self.x.len() + 1
    }
}

/// The cell containing `p`, boxes half-open in every coordinate. At a
/// z-boundary this is the cell at the maximum level.
pub fn cell_of(p: &HPoint) -> Result<CellId> {
    if !(p.z > 0.0) || !p.z.is_finite() {
        return Err(Error::NonPositiveHeight(p.z));
    }
    if p.x.is_empty() {
        return Err(Error::BadDimension(1));
    }
    column_cell(&p.x, binary_exponent(p.z))
}

/// The level-`level` cell whose half-open x-box contains `x`.
pub fn column_cell(x: &[f64], level: i32) -> Result<CellId> {
    if x.is_empty() {
        return Err(Error::BadDimension(1));
    }
    let coords = x
        .iter()
        .map(|&v| {
            if !v.is_finite() {
                return Err(Error::NonFinite);
            }
            let k = ldexp(v, -level).floor();
            num_traits::FromPrimitive::from_f64(k).ok_or(Error::NonFinite)
        })
        .collect::<Result<Vec<BigInt>>>()?;
    Ok(CellId { level, coords })
}

fn coord_to_json(k: &BigInt) -> serde_json::Value {
    match k.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::from(k.to_string()),
    }
}

impl Serialize for CellId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CellId", 2)?;
        st.serialize_field("level", &self.level)?;
        let coords: Vec<serde_json::Value> = self.coords.iter().map(coord_to_json).collect();
        st.serialize_field("coords", &coords)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for CellId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            level: i32,
            coords: Vec<serde_json::Value>,
        }
        let raw = Raw::deserialize(d)?;
        let coords = raw
            .coords
            .iter()
            .map(|v| match v {
                serde_json::Value::Number(n) => n
                    .as_i64()
                    .map(BigInt::from)
                    .ok_or_else(|| de::Error::custom("coordinate is not an integer")),
                serde_json::Value::String(s) => s
                    .parse::<BigInt>()
                    .map_err(|_| de::Error::custom("bad integer string")),
                _ => Err(de::Error::custom("coordinate must be an integer")),
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        CellId::new(raw.level, coords).map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(level: i32, k: &[i64]) -> CellId {
        CellId::from_i64(level, k)
    }

    /// Geometric containment of the x-interval of `child` in that of `parent`,
    /// and the top facet of `child` in the bottom facet of `parent`.
    fn facet_contained(child: &CellId, parent: &CellId) -> bool {
        let w = 2f64.powi(child.level());
        let pw = 2f64.powi(parent.level());
        let top = 2f64.powi(child.level() + 1);
        let bottom = pw;
        top == bottom
            && child.coords().iter().zip(parent.coords()).all(|(k, p)| {
                let lo = k.to_f64().unwrap() * w;
                let plo = p.to_f64().unwrap() * pw;
                plo <= lo && lo + w <= plo + pw
            })
    }

    #[test]
    fn parent_examples() {
        assert_eq!(c(0, &[5]).parent(), c(1, &[2]));
        assert_eq!(c(1, &[2]).parent(), c(2, &[1]));
        let p = c(0, &[-1]).parent();
        assert_eq!(p, c(1, &[-1]));
        assert!(facet_contained(&c(0, &[-1]), &p));
        assert!(!facet_contained(&c(0, &[-1]), &c(1, &[0])));
    }

    #[test]
    fn children_examples() {
        assert_eq!(c(1, &[2]).children(), vec![c(0, &[4]), c(0, &[5])]);
        assert_eq!(c(3, &[1, -2]).children().len(), 4);
        assert_eq!(c(0, &[0, 0, 0]).children().len(), 8);
    }

    #[test]
    fn neighbor_examples() {
        assert_eq!(c(0, &[7]).horizontal_neighbors(), vec![c(0, &[6]), c(0, &[8])]);
        assert_eq!(c(-2, &[3, 4]).horizontal_neighbors().len(), 8);
        assert_eq!(c(0, &[0, 0, 0]).horizontal_neighbors().len(), 26);
    }

    #[test]
    fn center_examples() {
        assert_eq!(c(0, &[0]).center(), HPoint { x: vec![0.5], z: 1.5 });
        assert_eq!(c(2, &[1]).center(), HPoint { x: vec![6.0], z: 6.0 });
        assert_eq!(c(-1, &[3]).center(), HPoint { x: vec![1.75], z: 0.75 });
    }

    #[test]
    fn cell_of_examples() {
        let p = |x: f64, z: f64| HPoint::new(vec![x], z).unwrap();
        assert_eq!(cell_of(&p(0.3, 1.5)).unwrap(), c(0, &[0]));
        assert_eq!(cell_of(&p(0.0, 2.0)).unwrap(), c(1, &[0]));
        let q = p(0.999, 3.9);
        let cell = cell_of(&q).unwrap();
        assert_eq!(cell, c(1, &[0]));
        // geometric containment
        assert!((0.0..2.0).contains(&q.x[0]) && (2.0..4.0).contains(&q.z));
        assert!(cell_of(&HPoint { x: vec![0.0], z: 0.0 }).is_err());
        assert!(cell_of(&HPoint { x: vec![0.0], z: -1.0 }).is_err());
    }

    #[test]
    fn exponent_at_powers_of_two() {
        for e in -1070..1000 {
            assert_eq!(binary_exponent(ldexp(1.0, e)), e);
            let below = f64::from_bits(ldexp(1.0, e).to_bits() - 1);
            assert_eq!(binary_exponent(below), e - 1);
        }
        assert_eq!(binary_exponent(f64::MIN_POSITIVE / 8.0), -1025);
    }

    #[test]
    fn negative_coordinates_and_big_levels() {
        let deep = cell_of(&HPoint::new(vec![-0.3], 1e-200).unwrap()).unwrap();
        assert!(deep.level() < -600);
        assert!(deep.coords()[0].is_negative());
        let top = deep.ancestor(2);
        assert_eq!(top, c(2, &[-1]));
    }

    #[test]
    fn preorder_places_ancestors_first() {
        let a = c(0, &[0]);
        let b = c(-1, &[1]);
        let d = c(-2, &[0]);
        assert_eq!(preorder_cmp(&a, &b), Ordering::Less);
        assert_eq!(preorder_cmp(&d, &b), Ordering::Less);
        assert_eq!(preorder_cmp(&b, &d), Ordering::Greater);
    }

    #[test]
    fn serde_roundtrip_big() {
        let big = CellId::new(-100, vec![BigInt::one() << 90usize, BigInt::from(-3)]).unwrap();
        let s = serde_json::to_string(&big).unwrap();
        let back: CellId = serde_json::from_str(&s).unwrap();
        assert_eq!(big, back);
    }

    fn arb_cell(m: usize) -> impl Strategy<Value = CellId> {
        (-6i32..6, proptest::collection::vec(-200i64..200, m))
            .prop_map(|(l, k)| CellId::from_i64(l, &k))
    }

    proptest! {
        #[test]
        fn parent_of_children(cell in arb_cell(2)) {
            for ch in cell.children() {
                prop_assert_eq!(ch.parent(), cell.clone());
            }
            prop_assert!(cell.parent().children().contains(&cell));
        }

        #[test]
        fn neighbors_symmetric_and_parents_close(cell in arb_cell(2), pick in 0usize..8) {
            let nb = cell.horizontal_neighbors();
            prop_assert_eq!(nb.len(), 8);
            let other = &nb[pick];
            prop_assert!(other.horizontal_neighbors().contains(&cell));
            let (pa, pb) = (cell.parent(), other.parent());
            prop_assert!(pa == pb || pa.is_neighbor(&pb));
        }

        #[test]
        fn center_inside_and_located(cell in arb_cell(3)) {
            let b = cell.center();
            prop_assert_eq!(cell_of(&b).unwrap(), cell.clone());
            prop_assert!(cell.contains_x(&b.x));
        }

        #[test]
        fn children_tile_parent(cell in arb_cell(1)) {
            let ch = cell.children();
            let w = 2f64.powi(cell.level());
            let lo = cell.coords()[0].to_f64().unwrap() * w;
            let c0 = ch[0].coords()[0].to_f64().unwrap() * w / 2.0;
            let c1 = ch[1].coords()[0].to_f64().unwrap() * w / 2.0;
            prop_assert_eq!(c0, lo);
            prop_assert_eq!(c1, lo + w / 2.0);
        }
    }
}
