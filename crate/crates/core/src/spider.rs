//! Base point selection. The spider is the set of straight spokes from a base
//! point b to every branch point; it is admissible when the branch points
//! appear around b, anticlockwise, in the tree's terminal cyclic order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::branch::segment_distance;
use crate::config::BranchConfig;
use crate::error::{Error, Result};
use crate::tree::MarkedBinaryTree;

/// Minimum acceptable clearance score.
pub const MIN_SCORE: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spider {
    pub base: Complex64,
    /// Smallest distance from a branch point to a foreign spoke or to b,
    /// relative to the minimum pairwise distance.
    pub score: f64,
}

/// Whether the anticlockwise angular order around `b` is a rotation of `order`.
pub fn angular_order_matches(points: &[Complex64], b: Complex64, order: &[usize]) -> bool {
    let m = points.len();
    let mut by_angle: Vec<usize> = (0..m).collect();
    let ang: Vec<f64> = points.iter().map(|&z| (z - b).arg()).collect();
    by_angle.sort_by(|&i, &j| ang[i].partial_cmp(&ang[j]).unwrap());
    let k = by_angle.iter().position(|&i| i == order[0]).unwrap();
    (0..m).all(|s| by_angle[(k + s) % m] == order[s])
}

/// Clearance score of `b` (0 when inadmissible).
pub fn score(points: &[Complex64], b: Complex64, order: &[usize]) -> f64 {
    if !angular_order_matches(points, b, order) {
        return 0.0;
    }
    let mut minpair = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            minpair = minpair.min((points[i] - points[j]).norm());
        }
    }
    let mut s = f64::INFINITY;
    for (i, &li) in points.iter().enumerate() {
        s = s.min((li - b).norm());
        for (j, &lj) in points.iter().enumerate() {
            if i != j {
                s = s.min(segment_distance(lj, b, li));
            }
        }
    }
    s / minpair
}

/// Searches for the admissible base point with the best worst-case score over
/// all `configs` (all with the same tree). Deterministic for a given seed.
pub fn find_base_point_multi(configs: &[&BranchConfig], tree: &MarkedBinaryTree, seed: u64) -> Result<Spider> {
    let order = tree.cyclic_order();
    let eval = |b: Complex64| configs.iter().map(|c| score(c.points(), b, &order)).fold(f64::INFINITY, f64::min);

    let pts: Vec<Complex64> = configs.iter().flat_map(|c| c.points().iter().copied()).collect();
    let n = pts.len() as f64;
    let centroid = pts.iter().sum::<Complex64>() / n;
    let diam = pts.iter().map(|&z| (z - centroid).norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);

    let mut best = (centroid, eval(centroid));
    let consider = |b: Complex64, best: &mut (Complex64, f64)| {
        let s = eval(b);
        if s > best.1 {
            *best = (b, s);
        }
    };
    for k in 0..72 {
        let dir = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / 72.0);
        for r in [1.5, 3.0, 10.0] {
            consider(centroid + dir * (r * diam), &mut best);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..4000 {
        let z = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        consider(centroid + z * diam, &mut best);
    }
    // Local refinement around the incumbent.
    let mut step = 0.1 * diam;
    for _ in 0..600 {
        let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let cand = best.0 + z * step;
        let before = best.1;
        consider(cand, &mut best);
        if best.1 == before {
            step *= 0.995;
        }
    }
    if best.1 < MIN_SCORE {
        return Err(Error::numerical(
            "spider",
            format!(
                "no base point sees the branch points in the tree's cyclic order {:?} (best clearance {:.2e}); \
                 the configuration is not compatible with this planar tree",
                order, best.1
            ),
        ));
    }
    Ok(Spider { base: best.0, score: best.1 })
}

pub fn find_base_point(config: &BranchConfig, tree: &MarkedBinaryTree, seed: u64) -> Result<Spider> {
    find_base_point_multi(&[config], tree, seed)
}

/// Validates a caller-supplied base point.
pub fn check_base_point(config: &BranchConfig, tree: &MarkedBinaryTree, b: Complex64) -> Result<Spider> {
    let s = score(config.points(), b, &tree.cyclic_order());
    if s < MIN_SCORE {
        return Err(Error::invalid(format!("base point {b} is not admissible (score {s:.2e})")));
    }
    Ok(Spider { base: b, score: s })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_points_get_a_base_point_on_the_correct_side() {
        let c = BranchConfig::from_reals(&[0.0, 1.0, 2.0, 3.0], &[2, 2, 1, 1]).unwrap();
        let t = MarkedBinaryTree::example7();
        let s = find_base_point(&c, &t, 7).unwrap();
        assert!(s.score >= MIN_SCORE);
        assert!(angular_order_matches(c.points(), s.base, &t.cyclic_order()));
        let again = find_base_point(&c, &t, 7).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn incompatible_order_is_rejected() {
        // Branch points on a line in the order 0, 2, 1, 3 cannot be seen in the order 0, 1, 2, 3 from
        // anywhere with clear spokes.
        let c = BranchConfig::from_reals(&[0.0, 2.0, 1.0, 3.0], &[2, 2, 1, 1]).unwrap();
        let t = MarkedBinaryTree::example7();
        assert!(find_base_point(&c, &t, 1).is_err());
    }
}
