//! Spatial index and neighbor queries.
//!
//! The index is a median-split kd-tree over point positions. Query semantics
//! are pinned to brute force: kNN returns the `k` smallest `(distance, index)`
//! pairs in ascending order, and the ε-ball contains every point strictly
//! closer than ε. The query center is always its own neighbor (distance 0).

use nalgebra::Vector3;
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{density, PointCloud};
use crate::rng::seeded_rng;

const LEAF_SIZE: usize = 16;

/// How a neighborhood was selected, which fixes its normalizer convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NeighborhoodKind {
    /// k nearest neighbors; normalizer is the KDE-based inverse density.
    Knn,
    /// ε-ball with a random cap; normalizer is uniform `1/|C|`.
    EpsilonBall,
}

/// A center point together with its selected neighbors.
///
/// `offsets[j]` is exactly `positions[neighbors[j]] - positions[center]`, and
/// `normalizer[j]` is the per-neighbor compensation factor used by the
/// convolution sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighborhood {
    pub kind: NeighborhoodKind,
    pub center: usize,
    pub neighbors: Vec<usize>,
    pub offsets: Vec<Vector3<f64>>,
    pub normalizer: Vec<f64>,
}

impl Neighborhood {
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

enum Node {
    Leaf {
        start: usize,
        len: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

/// kd-tree over a cloud's positions.
pub struct SpatialIndex {
    points: Vec<Vector3<f64>>,
    ids: Vec<u32>,
    root: Node,
    dim: usize,
}

/// Build a spatial index over the cloud's positions.
pub fn build_index(cloud: &PointCloud) -> Result<SpatialIndex> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    Ok(SpatialIndex::new(cloud.positions().to_vec(), cloud.dim()))
}

impl SpatialIndex {
    fn new(points: Vec<Vector3<f64>>, dim: usize) -> Self {
        let mut ids: Vec<u32> = (0..points.len() as u32).collect();
        let root = build_node(&points, &mut ids, 0, dim);
        Self { points, ids, root, dim }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn position(&self, i: usize) -> Vector3<f64> {
        self.points[i]
    }

    /// Indices of the `k` points nearest to `query`, ties broken by
    /// ascending point index, sorted by `(distance, index)`.
    pub fn knn(&self, query: &Vector3<f64>, k: usize) -> Vec<usize> {
        debug_assert!(k >= 1 && k <= self.points.len());
        let mut best: Vec<(f64, u32)> = Vec::with_capacity(k + 1);
        self.knn_walk(&self.root, query, k, &mut best);
        best.sort_unstable_by(cmp_entry);
        best.into_iter().map(|(_, id)| id as usize).collect()
    }

    fn knn_walk(&self, node: &Node, query: &Vector3<f64>, k: usize, best: &mut Vec<(f64, u32)>) {
        match node {
            Node::Leaf { start, len } => {
                for &id in &self.ids[*start..*start + *len] {
                    let d2 = (self.points[id as usize] - query).norm_squared();
                    push_candidate(best, k, (d2, id));
                }
            }
            Node::Split { axis, value, left, right } => {
                let delta = query[*axis] - value;
                let (near, far) = if delta < 0.0 { (left, right) } else { (right, left) };
                self.knn_walk(near, query, k, best);
                // The far side can still hold an equal-distance lower index,
                // so only prune on a strictly larger plane distance.
                let plane_d2 = delta * delta;
                if best.len() < k || plane_d2 <= current_worst(best).0 {
                    self.knn_walk(far, query, k, best);
                }
            }
        }
    }

    /// Indices of all points with `d(point, query) < radius` (strict),
    /// ascending by point index.
    pub fn within_radius(&self, query: &Vector3<f64>, radius: f64) -> Vec<usize> {
        let mut hits: Vec<u32> = Vec::new();
        self.radius_walk(&self.root, query, radius, &mut hits);
        hits.sort_unstable();
        hits.into_iter().map(|id| id as usize).collect()
    }

    fn radius_walk(&self, node: &Node, query: &Vector3<f64>, radius: f64, hits: &mut Vec<u32>) {
        match node {
            Node::Leaf { start, len } => {
                let r2 = radius * radius;
                for &id in &self.ids[*start..*start + *len] {
                    if (self.points[id as usize] - query).norm_squared() < r2 {
                        hits.push(id);
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let delta = query[*axis] - value;
                let (near, far) = if delta < 0.0 { (left, right) } else { (right, left) };
                self.radius_walk(near, query, radius, hits);
                // Points beyond the plane are at least |delta| away; the
                // strict inequality excludes them when |delta| >= radius.
                if delta.abs() < radius {
                    self.radius_walk(far, query, radius, hits);
                }
            }
        }
    }
}

fn build_node(points: &[Vector3<f64>], ids: &mut [u32], start: usize, dim: usize) -> Node {
    if ids.len() <= LEAF_SIZE {
        return Node::Leaf { start, len: ids.len() };
    }
    // Split on the axis with the largest spread.
    let mut axis = 0;
    let mut best_spread = -1.0;
    for a in 0..dim {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &id in ids.iter() {
            let v = points[id as usize][a];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi - lo > best_spread {
            best_spread = hi - lo;
            axis = a;
        }
    }
    let mid = ids.len() / 2;
    ids.select_nth_unstable_by(mid, |&a, &b| {
        points[a as usize][axis].total_cmp(&points[b as usize][axis])
    });
    let value = points[ids[mid] as usize][axis];
    let (left_ids, right_ids) = ids.split_at_mut(mid);
    let left = build_node(points, left_ids, start, dim);
    let right = build_node(points, right_ids, start + mid, dim);
    Node::Split { axis, value, left: Box::new(left), right: Box::new(right) }
}

fn cmp_entry(a: &(f64, u32), b: &(f64, u32)) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

fn current_worst(best: &[(f64, u32)]) -> (f64, u32) {
    *best
        .iter()
        .max_by(|a, b| cmp_entry(a, b))
        .expect("non-empty candidate set")
}

fn push_candidate(best: &mut Vec<(f64, u32)>, k: usize, entry: (f64, u32)) {
    if best.len() < k {
        best.push(entry);
        return;
    }
    let (worst_idx, &worst) = best
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| cmp_entry(a, b))
        .expect("non-empty candidate set");
    if cmp_entry(&entry, &worst) == std::cmp::Ordering::Less {
        best[worst_idx] = entry;
    }
}

/// The `k` nearest neighbors of point `center`, the center itself included.
///
/// Neighbors are ordered by `(distance, index)`; the normalizer is the
/// KDE-based inverse density of [`density::knn_normalizer`].
pub fn knn_query(index: &SpatialIndex, center: usize, k: usize) -> Result<Neighborhood> {
    if k > index.len() {
        return Err(Error::KExceedsCloud { k, n: index.len() });
    }
    if k == 0 {
        return Err(Error::KExceedsCloud { k, n: index.len() });
    }
    let center_pos = index.points[center];
    let neighbors = index.knn(&center_pos, k);
    let offsets: Vec<Vector3<f64>> =
        neighbors.iter().map(|&j| index.points[j] - center_pos).collect();
    let normalizer = density::knn_normalizer(&offsets)?;
    Ok(Neighborhood { kind: NeighborhoodKind::Knn, center, neighbors, offsets, normalizer })
}

/// The ε-ball neighborhood of point `center`: every point strictly within
/// `epsilon`, randomly capped at `k_cap` members with the center always
/// retained. Neighbors are ordered by ascending point index; the normalizer
/// is the uniform `1/|C|`.
pub fn epsilon_ball_query(
    index: &SpatialIndex,
    center: usize,
    epsilon: f64,
    k_cap: usize,
    seed: u64,
) -> Result<Neighborhood> {
    if !(epsilon > 0.0) {
        return Err(Error::NonPositiveEpsilon(epsilon));
    }
    if k_cap == 0 {
        return Err(Error::MisalignedArrays("k_cap must be at least 1".into()));
    }
    let center_pos = index.points[center];
    let candidates = index.within_radius(&center_pos, epsilon);
    debug_assert!(candidates.contains(&center), "center is at distance 0 < epsilon");

    let neighbors = if candidates.len() > k_cap {
        let others: Vec<usize> = candidates.into_iter().filter(|&j| j != center).collect();
        let mut rng = seeded_rng(seed);
        let mut chosen: Vec<usize> = sample(&mut rng, others.len(), k_cap - 1)
            .into_iter()
            .map(|i| others[i])
            .collect();
        chosen.push(center);
        chosen.sort_unstable();
        chosen
    } else {
        candidates
    };

    let offsets: Vec<Vector3<f64>> =
        neighbors.iter().map(|&j| index.points[j] - center_pos).collect();
    let normalizer = vec![1.0 / neighbors.len() as f64; neighbors.len()];
    Ok(Neighborhood {
        kind: NeighborhoodKind::EpsilonBall,
        center,
        neighbors,
        offsets,
        normalizer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_cloud() -> PointCloud {
        PointCloud::from_positions_2d([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]])
    }

    #[test]
    fn build_index_echoes_size() {
        let index = build_index(&line_cloud()).unwrap();
        assert_eq!(index.len(), 4);
    }

    #[test]
    fn empty_cloud_is_an_error() {
        let cloud = PointCloud::from_positions_2d([]);
        assert!(matches!(build_index(&cloud), Err(Error::EmptyCloud)));
    }

    #[test]
    fn single_point_is_its_own_nearest_neighbor() {
        let cloud = PointCloud::from_positions_2d([[0.3, 0.7]]);
        let index = build_index(&cloud).unwrap();
        let nbhd = knn_query(&index, 0, 1).unwrap();
        assert_eq!(nbhd.neighbors, vec![0]);
        assert_eq!(nbhd.offsets[0], Vector3::zeros());
    }

    #[test]
    fn knn_on_line_matches_brute_force() {
        let index = build_index(&line_cloud()).unwrap();
        let nbhd = knn_query(&index, 0, 2).unwrap();
        assert_eq!(nbhd.neighbors, vec![0, 1]);
        assert_eq!(nbhd.offsets[1], Vector3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn knn_ties_break_by_ascending_index() {
        // Unit-square corners plus their centroid. All corners are
        // equidistant from the centroid, so k = 3 takes the two lowest.
        let cloud = PointCloud::from_positions_2d([
            [0.0, 0.0],
            [1.0, 0.0],
            [1.0, 1.0],
            [0.0, 1.0],
            [0.5, 0.5],
        ]);
        let index = build_index(&cloud).unwrap();
        let nbhd = knn_query(&index, 4, 3).unwrap();
        assert_eq!(nbhd.neighbors, vec![4, 0, 1]);
    }

    #[test]
    fn knn_k_larger_than_cloud_errors() {
        let index = build_index(&line_cloud()).unwrap();
        assert!(matches!(
            knn_query(&index, 0, 5),
            Err(Error::KExceedsCloud { k: 5, n: 4 })
        ));
    }

    #[test]
    fn epsilon_ball_on_line() {
        let index = build_index(&line_cloud()).unwrap();
        let nbhd = epsilon_ball_query(&index, 1, 1.5, 8, 0).unwrap();
        assert_eq!(nbhd.neighbors, vec![0, 1, 2]);
        for s in &nbhd.normalizer {
            assert_eq!(*s, 1.0 / 3.0);
        }
    }

    #[test]
    fn epsilon_ball_is_strict() {
        // Distance exactly 1.0 is excluded by d < epsilon.
        let index = build_index(&line_cloud()).unwrap();
        let nbhd = epsilon_ball_query(&index, 1, 1.0, 8, 0).unwrap();
        assert_eq!(nbhd.neighbors, vec![1]);
        assert_eq!(nbhd.normalizer, vec![1.0]);
    }

    #[test]
    fn epsilon_ball_smaller_than_spacing_keeps_center_only() {
        let index = build_index(&line_cloud()).unwrap();
        let nbhd = epsilon_ball_query(&index, 2, 0.5, 8, 0).unwrap();
        assert_eq!(nbhd.neighbors, vec![2]);
        assert_eq!(nbhd.normalizer, vec![1.0]);
    }

    #[test]
    fn epsilon_ball_rejects_nonpositive_epsilon() {
        let index = build_index(&line_cloud()).unwrap();
        assert!(epsilon_ball_query(&index, 0, 0.0, 8, 0).is_err());
        assert!(epsilon_ball_query(&index, 0, -1.0, 8, 0).is_err());
    }

    #[test]
    fn epsilon_ball_cap_is_deterministic_and_keeps_center() {
        use rand::Rng;
        let mut rng = crate::rng::seeded_rng(99);
        let points: Vec<[f64; 2]> = (0..100)
            .map(|_| [rng.gen::<f64>() * 0.1, rng.gen::<f64>() * 0.1])
            .collect();
        let cloud = PointCloud::from_positions_2d(points);
        let index = build_index(&cloud).unwrap();

        let a = epsilon_ball_query(&index, 7, 10.0, 16, 1234).unwrap();
        let b = epsilon_ball_query(&index, 7, 10.0, 16, 1234).unwrap();
        assert_eq!(a.neighbors, b.neighbors);
        assert_eq!(a.len(), 16);
        assert!(a.neighbors.contains(&7));
        for s in &a.normalizer {
            assert_eq!(*s, 1.0 / 16.0);
        }

        let c = epsilon_ball_query(&index, 7, 10.0, 16, 1235).unwrap();
        assert_ne!(a.neighbors, c.neighbors);
    }
}
