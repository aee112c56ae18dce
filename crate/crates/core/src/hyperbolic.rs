//! Poincaré halfspace distance, isometric normalization, and distortion
//! measurement of the cell embedding.

use std::f64::consts::LN_2;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{d1, d2};
use crate::tiling::{cell_of, CellId, HPoint};

/// Absolute slack used when comparing closed-form real quantities.
pub const EPS: f64 = 1e-9;

/// `d_H(p,q) = 2 arsinh(||pq|| / (2 sqrt(z_p z_q)))`.
pub fn hyperbolic_distance(p: &HPoint, q: &HPoint) -> Result<f64> {
    if p.x.len() != q.x.len() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: q.dim(),
        });
    }
    for z in [p.z, q.z] {
        if !(z > 0.0) || !z.is_finite() {
            return Err(Error::NonPositiveHeight(z));
        }
    }
    Ok(dist_unchecked(p, q))
}

pub(crate) fn dist_unchecked(p: &HPoint, q: &HPoint) -> f64 {
    let horizontal: f64 = p.x.iter().zip(&q.x).map(|(a, b)| (a - b) * (a - b)).sum();
    if horizontal == 0.0 {
        return (q.z / p.z).ln().abs();
    }
    let dz = p.z - q.z;
    let euclid = (horizontal + dz * dz).sqrt();
    2.0 * (0.5 * euclid / (p.z * q.z).sqrt()).asinh()
}

/// The embedding `b(p)`: the cell containing `p`, at the maximum level on ties.
pub fn embed(p: &HPoint) -> Result<CellId> {
    cell_of(p)
}

/// `2 arsinh(sqrt(D)/4)`, the bound on `d_H(p, b(p))` before relaxation to `ln D`.
pub fn embedding_bound(dim: usize) -> f64 {
    2.0 * ((dim as f64).sqrt() / 4.0).asinh()
}

/// Window `[-lower, upper]` for `ln2 * d1(b(p),b(q)) - d_H(p,q)` over arbitrary points.
pub fn d1_window(dim: usize) -> (f64, f64) {
    let ln_d = (dim as f64).ln();
    (3.0 * ln_d + 2.0 + 6.0 * LN_2, 2.0 * ln_d + 7.0 * LN_2)
}

/// Window for `ln2 * d2(b(p),b(q)) - d_H(p,q)`: the `d1` window with the
/// upper side widened by `2 ln 2`.
pub fn d2_window(dim: usize) -> (f64, f64) {
    let (lo, hi) = d1_window(dim);
    (lo, hi + 2.0 * LN_2)
}

/// Bounds on `d_H - ln2 * d1` for two cell centers: `(-7 ln 2, ln D + 2 + 6 ln 2]`.
pub fn center_window(dim: usize) -> (f64, f64) {
    (-7.0 * LN_2, (dim as f64).ln() + 2.0 + 6.0 * LN_2)
}

/// Homothety about the origin followed by a horizontal shift.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizeTransform {
    pub scale: f64,
    pub shift: Vec<f64>,
}

impl NormalizeTransform {
    pub fn identity(dim: usize) -> Self {
        NormalizeTransform {
            scale: 1.0,
            shift: vec![0.0; dim - 1],
        }
    }

    pub fn apply(&self, p: &HPoint) -> HPoint {
        HPoint {
            x: p
                .x
                .iter()
                .zip(&self.shift)
                .map(|(v, s)| self.scale * v + s)
                .collect(),
            z: self.scale * p.z,
        }
    }

    pub fn invert(&self, p: &HPoint) -> HPoint {
        HPoint {
            x: p
                .x
                .iter()
                .zip(&self.shift)
                .map(|(v, s)| (v - s) / self.scale)
                .collect(),
            z: p.z / self.scale,
        }
    }
}

/// Maps `points` isometrically so that every `x` lies in `[1/4, 1/2)^(D-1)`
/// and every `z < 2`.
pub fn normalize(points: &[HPoint]) -> Result<(NormalizeTransform, Vec<HPoint>)> {
    let first = points.first().ok_or(Error::Empty)?;
    let m = first.x.len();
    for p in points {
        if p.x.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m + 1,
                got: p.dim(),
            });
        }
        HPoint::new(p.x.clone(), p.z)?;
    }
    let max_z = points.iter().map(|p| p.z).fold(0.0, f64::max);
    let lo: Vec<f64> = (0..m)
        .map(|j| points.iter().map(|p| p.x[j]).fold(f64::INFINITY, f64::min))
        .collect();
    let hi: Vec<f64> = (0..m)
        .map(|j| points.iter().map(|p| p.x[j]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let inside = lo.iter().all(|&v| v >= 0.25) && hi.iter().all(|&v| v < 0.5) && max_z < 2.0;
    if inside {
        return Ok((NormalizeTransform::identity(m + 1), points.to_vec()));
    }
    let diameter = lo
        .iter()
        .zip(&hi)
        .map(|(a, b)| b - a)
        .fold(0.0, f64::max)
        .max(1e-300);
    let scale = 1f64.min(1.9 / max_z).min(0.23 / diameter);
    let shift = lo.iter().map(|&v| 0.26 - scale * v).collect();
    let t = NormalizeTransform { scale, shift };
    let mapped = points.iter().map(|p| t.apply(p)).collect();
    Ok((t, mapped))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

/// Measured embedding distortion over sampled pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub samples: usize,
    /// `d_H(p,q) - ln2 * d1(b(p),b(q))`
    pub d1_deviation: Deviation,
    /// `d_H(p,q) - ln2 * d2(b(p),b(q))`
    pub d2_deviation: Deviation,
    pub d1_window: (f64, f64),
    pub d2_window: (f64, f64),
    pub violations: usize,
}

fn summarize(values: &[f64]) -> Deviation {
    if values.is_empty() {
        return Deviation::default();
    }
    Deviation {
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean: values.iter().sum::<f64>() / values.len() as f64,
    }
}

/// Samples `samples` random pairs (seeded) and checks the explicit windows.
pub fn distortion_report(points: &[HPoint], samples: usize, seed: u64) -> Result<DistortionReport> {
    if points.len() < 2 {
        return Err(Error::Empty);
    }
    let dim = points[0].dim();
    let cells = points.iter().map(embed).collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w1, w2) = (d1_window(dim), d2_window(dim));
    let mut dev1 = Vec::with_capacity(samples);
    let mut dev2 = Vec::with_capacity(samples);
    let mut violations = 0;
    for _ in 0..samples {
        let i = rng.gen_range(0..points.len());
        let j = rng.gen_range(0..points.len());
        let dh = hyperbolic_distance(&points[i], &points[j])?;
        let a = LN_2 * d1(&cells[i], &cells[j]) as f64;
        let b = LN_2 * d2(&cells[i], &cells[j]) as f64;
        if a - dh < -w1.0 - EPS || a - dh > w1.1 + EPS {
            violations += 1;
        }
        if b - dh < -w2.0 - EPS || b - dh > w2.1 + EPS {
            violations += 1;
        }
        dev1.push(dh - a);
        dev2.push(dh - b);
    }
    Ok(DistortionReport {
        samples,
        d1_deviation: summarize(&dev1),
        d2_deviation: summarize(&dev2),
        d1_window: w1,
        d2_window: w2,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(x: &[f64], z: f64) -> HPoint {
        HPoint::new(x.to_vec(), z).unwrap()
    }

    /// Independent evaluation of `arsinh` via its logarithmic form.
    fn asinh_log(x: f64) -> f64 {
        (x + (x * x + 1.0).sqrt()).ln()
    }

    #[test]
    fn distance_examples() {
        let d = hyperbolic_distance(&hp(&[0.0], 1.0), &hp(&[0.0], 4.0)).unwrap();
        assert!((d - 4f64.ln()).abs() < 1e-12);
        assert_eq!(hyperbolic_distance(&hp(&[0.3], 1.1), &hp(&[0.3], 1.1)).unwrap(), 0.0);
        let d = hyperbolic_distance(&hp(&[0.0], 1.0), &hp(&[3.0], 2.0)).unwrap();
        let arg = 10f64.sqrt() / (2.0 * 2f64.sqrt());
        assert!((arg - 1.118_033_988_749_895).abs() < 1e-12);
        assert!((d - 2.0 * asinh_log(arg)).abs() < 1e-12);
        assert!((d - 1.924_847).abs() < 1e-6);
        assert!(hyperbolic_distance(&hp(&[0.0], 1.0), &hp(&[0.0, 1.0], 1.0)).is_err());
        assert!(hyperbolic_distance(&HPoint { x: vec![0.0], z: 0.0 }, &hp(&[0.0], 1.0)).is_err());
    }

    #[test]
    fn embed_examples() {
        let c = CellId::from_i64(-3, &[5, 2]);
        assert_eq!(embed(&c.center()).unwrap(), c);
        let p = hp(&[0.3], 1.5);
        let cell = embed(&p).unwrap();
        assert_eq!(cell, CellId::from_i64(0, &[0]));
        let d = hyperbolic_distance(&p, &cell.center()).unwrap();
        assert!((d - 2.0 * asinh_log(0.1 / 1.5)).abs() < 1e-12);
        assert!((d - 0.133_235).abs() < 1e-6);
        assert!(d < embedding_bound(2));
    }

    #[test]
    fn embedding_bound_is_ln2_in_the_plane() {
        assert!((embedding_bound(2) - LN_2).abs() < 1e-15);
        for dim in 3..12 {
            assert!(embedding_bound(dim) < (dim as f64).ln());
        }
    }

    #[test]
    fn arsinh_upper_bound() {
        let mut x = 1.0f64;
        while x < 1e12 {
            assert!(x.asinh() < x.ln() + 1.0);
            x *= 1.37;
        }
    }

    #[test]
    fn normalize_examples() {
        let pts = vec![hp(&[0.3], 1.0), hp(&[0.4], 0.5)];
        let (t, out) = normalize(&pts).unwrap();
        assert_eq!(t, NormalizeTransform::identity(2));
        assert_eq!(out, pts);

        let pts = vec![hp(&[-3.0], 1.0), hp(&[5.0], 0.5)];
        let (t, out) = normalize(&pts).unwrap();
        assert!(t.scale <= 1.0 / 32.0);
        for p in &out {
            assert!(p.x[0] >= 0.25 && p.x[0] < 0.5 && p.z < 2.0);
        }
        let before = hyperbolic_distance(&pts[0], &pts[1]).unwrap();
        let after = hyperbolic_distance(&out[0], &out[1]).unwrap();
        assert!((before - after).abs() < 1e-9);
        let back = t.invert(&out[1]);
        assert!((back.x[0] - 5.0).abs() < 1e-12 && (back.z - 0.5).abs() < 1e-12);

        let single = vec![hp(&[7.0, -2.0], 40.0)];
        let (_, out) = normalize(&single).unwrap();
        assert!(out[0].z < 2.0 && out[0].x.iter().all(|&v| (0.25..0.5).contains(&v)));
        assert_eq!(normalize(&[]).unwrap_err(), Error::Empty);
    }

    #[test]
    fn normalize_is_isometric_on_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let pts: Vec<HPoint> = (0..20)
                .map(|_| hp(&[rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)], rng.gen_range(0.01..30.0)))
                .collect();
            let (_, out) = normalize(&pts).unwrap();
            let mut worst: f64 = 0.0;
            for i in 0..pts.len() {
                for j in 0..pts.len() {
                    let a = hyperbolic_distance(&pts[i], &pts[j]).unwrap();
                    let b = hyperbolic_distance(&out[i], &out[j]).unwrap();
                    worst = worst.max((a - b).abs());
                }
            }
            assert!(worst <= 1e-9, "{worst}");
        }
    }

    #[test]
    fn distortion_zero_for_identical_and_vertical_centers() {
        let p = hp(&[0.3], 0.7);
        let r = distortion_report(&[p.clone(), p], 100, 1).unwrap();
        assert_eq!(r.d1_deviation.max, 0.0);
        assert_eq!(r.d1_deviation.min, 0.0);
        // same x, z = 1.5 * 2^i: the embedded cells form one ancestor chain
        let stack: Vec<HPoint> = (-3..4).map(|i| hp(&[0.3], 1.5 * 2f64.powi(i))).collect();
        let r = distortion_report(&stack, 200, 2).unwrap();
        assert!(r.d1_deviation.max.abs() < 1e-12 && r.d1_deviation.min.abs() < 1e-12);
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn distortion_random_plane() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<HPoint> = (0..500)
            .map(|_| hp(&[rng.gen_range(-100.0..100.0)], (rng.gen_range(-8.0f64..8.0)).exp2()))
            .collect();
        let r = distortion_report(&pts, 10_000, 5).unwrap();
        assert_eq!(r.violations, 0);
    }
}
