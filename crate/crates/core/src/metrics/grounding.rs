use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Axis-aligned box. Serializes as `[cx, cy, cz, w, h, l]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 6]", into = "[f64; 6]")]
pub struct Box3 {
    pub center: Vec3,
    pub size: Vec3,
}

impl Box3 {
    pub fn new(center: Vec3, size: Vec3) -> Result<Self> {
        if !(center.is_finite() && size.is_finite()) || size.min_component() <= 0.0 {
            return Err(Error::Validation(format!(
                "box extents must be positive and finite, got {size:?}"
            )));
        }
        Ok(Self { center, size })
    }

    pub fn volume(&self) -> f64 {
        self.size.x * self.size.y * self.size.z
    }

    pub fn min(&self) -> Vec3 {
        self.center - self.size * 0.5
    }

    pub fn max(&self) -> Vec3 {
        self.center + self.size * 0.5
    }
}

impl TryFrom<[f64; 6]> for Box3 {
    type Error = Error;
    fn try_from(a: [f64; 6]) -> Result<Self> {
        Box3::new(Vec3::new(a[0], a[1], a[2]), Vec3::new(a[3], a[4], a[5]))
    }
}

impl From<Box3> for [f64; 6] {
    fn from(b: Box3) -> Self {
        [b.center.x, b.center.y, b.center.z, b.size.x, b.size.y, b.size.z]
    }
}

pub fn iou3(a: &Box3, b: &Box3) -> f64 {
    let (amin, amax, bmin, bmax) = (a.min(), a.max(), b.min(), b.max());
    let overlap = |lo1: f64, hi1: f64, lo2: f64, hi2: f64| (hi1.min(hi2) - lo1.max(lo2)).max(0.0);
    let inter = overlap(amin.x, amax.x, bmin.x, bmax.x)
        * overlap(amin.y, amax.y, bmin.y, bmax.y)
        * overlap(amin.z, amax.z, bmin.z, bmax.z);
    let union = a.volume() + b.volume() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Fraction of index-aligned pairs whose IoU reaches `threshold`.
pub fn grounding_accuracy(preds: &[Box3], gts: &[Box3], threshold: f64) -> Result<f64> {
    if preds.len() != gts.len() {
        return Err(Error::LengthMismatch {
            preds: preds.len(),
            gts: gts.len(),
        });
    }
    if preds.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let hits = preds.iter().zip(gts).filter(|(p, g)| iou3(p, g) >= threshold).count();
    Ok(hits as f64 / preds.len() as f64)
}

/// True positives under greedy one-to-one matching by descending IoU.
pub fn greedy_matches(preds: &[Box3], gts: &[Box3], threshold: f64) -> usize {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, p) in preds.iter().enumerate() {
        for (j, g) in gts.iter().enumerate() {
            let v = iou3(p, g);
            if v >= threshold && v > 0.0 {
                pairs.push((v, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(Ordering::Equal)
            .then((a.1, a.2).cmp(&(b.1, b.2)))
    });
    let (mut used_p, mut used_g) = (vec![false; preds.len()], vec![false; gts.len()]);
    let mut tp = 0;
    for (_, i, j) in pairs {
        if !used_p[i] && !used_g[j] {
            used_p[i] = true;
            used_g[j] = true;
            tp += 1;
        }
    }
    tp
}

/// F1 of a predicted box set against a ground-truth set. Two empty sets
/// score 1; one empty side scores 0.
pub fn multi_object_f1(preds: &[Box3], gts: &[Box3], threshold: f64) -> f64 {
    match (preds.is_empty(), gts.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    // 2PR / (P + R) with P = tp/|preds| and R = tp/|gts|
    let tp = greedy_matches(preds, gts, threshold) as f64;
    2.0 * tp / (preds.len() + gts.len()) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cube(x: f64) -> Box3 {
        Box3::new(Vec3::new(x, 0.0, 0.0), Vec3::new(1.0, 1.0, 1.0)).unwrap()
    }

    #[test]
    fn offset_cubes_third() {
        assert!((iou3(&cube(0.0), &cube(0.5)) - 1.0 / 3.0).abs() < 1e-9);
        assert_eq!(iou3(&cube(0.0), &cube(0.0)), 1.0);
        assert_eq!(iou3(&cube(0.0), &cube(2.0)), 0.0);
    }

    #[test]
    fn offset_cubes_monte_carlo() {
        // sample the joint bounding volume [-0.5, 1.0] x [-0.5, 0.5]^2
        let (a, b) = (cube(0.0), cube(0.5));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let inside = |bx: &Box3, p: Vec3| {
            let (lo, hi) = (bx.min(), bx.max());
            p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z
        };
        let (mut inter, mut union) = (0u32, 0u32);
        for _ in 0..1_000_000 {
            let p = Vec3::new(
                rng.gen_range(-0.5..1.0),
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.5..0.5),
            );
            let (ia, ib) = (inside(&a, p), inside(&b, p));
            inter += (ia && ib) as u32;
            union += (ia || ib) as u32;
        }
        let est = inter as f64 / union as f64;
        assert!((est - iou3(&a, &b)).abs() < 5e-3, "{est}");
    }

    #[test]
    fn accuracy_counts() {
        let g = [cube(0.0), cube(0.0), cube(0.0), cube(0.0)];
        let p = [cube(0.0), cube(3.0), cube(3.0), cube(3.0)];
        assert_eq!(grounding_accuracy(&p, &g, 0.25).unwrap(), 0.25);
        assert_eq!(grounding_accuracy(&g, &g, 0.5).unwrap(), 1.0);
        assert!(matches!(
            grounding_accuracy(&p[..2], &g, 0.5),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn accuracy_matches_recount() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let mut rb = || {
            Box3::new(
                Vec3::new(
                    rng.gen_range(0.0..2.0),
                    rng.gen_range(0.0..2.0),
                    rng.gen_range(0.0..2.0),
                ),
                Vec3::new(
                    rng.gen_range(0.2..1.5),
                    rng.gen_range(0.2..1.5),
                    rng.gen_range(0.2..1.5),
                ),
            )
            .unwrap()
        };
        let p: Vec<Box3> = (0..50).map(|_| rb()).collect();
        let g: Vec<Box3> = (0..50).map(|_| rb()).collect();
        let mut n = 0;
        for i in 0..50 {
            if iou3(&p[i], &g[i]) >= 0.25 {
                n += 1;
            }
        }
        assert_eq!(grounding_accuracy(&p, &g, 0.25).unwrap(), n as f64 / 50.0);
    }

    #[test]
    fn f1_cases() {
        let g = [cube(0.0), cube(5.0), cube(10.0)];
        assert_eq!(multi_object_f1(&g, &g, 0.5), 1.0);
        assert_eq!(multi_object_f1(&[], &[], 0.5), 1.0);
        assert_eq!(multi_object_f1(&[], &g, 0.5), 0.0);
        let p = [cube(0.0), cube(5.0)];
        assert_eq!(multi_object_f1(&p, &g, 0.5), 0.8);
    }

    #[test]
    fn greedy_is_one_to_one() {
        let g = [cube(0.0)];
        let p = [cube(0.0), cube(0.1)];
        assert_eq!(greedy_matches(&p, &g, 0.25), 1);
    }

    #[test]
    fn serde_array_form() {
        let b: Box3 = serde_json::from_str("[1, 2, 3, 0.5, 0.5, 0.5]").unwrap();
        assert_eq!(b.center, Vec3::new(1.0, 2.0, 3.0));
        assert!(serde_json::from_str::<Box3>("[1, 2, 3, 0.5, 0, 0.5]").is_err());
    }
}
