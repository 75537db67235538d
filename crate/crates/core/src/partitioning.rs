//! Gating and clustering of radar points into competing measurement partitions.
//!
//! All clustering is done on BEV coordinates. Indices in a [`Cluster`] refer
//! to positions in the point slice handed to the clustering call.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Mat2, Vec2};
use crate::types::RadarPoint;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusteringError {
    #[error("k-means needs at least k={k} points, got {n}")]
    TooFewPoints { k: usize, n: usize },
    #[error("invalid clustering parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Sorted member indices.
    pub indices: Vec<usize>,
    pub centroid: Vec2,
    /// Sum of outer products of the deviations from the centroid.
    pub scatter: Mat2,
}

impl Cluster {
    pub fn from_indices(points: &[RadarPoint], mut indices: Vec<usize>) -> Self {
        assert!(!indices.is_empty(), "a cluster has at least one point");
        indices.sort_unstable();
        indices.dedup();
        let n = indices.len() as f64;
        let centroid = indices
            .iter()
            .fold(Vec2::zeros(), |acc, &i| acc + Vec2::new(points[i].x, points[i].y))
            / n;
        let scatter = indices.iter().fold(Mat2::zeros(), |acc, &i| {
            let d = Vec2::new(points[i].x, points[i].y) - centroid;
            acc + d * d.transpose()
        });
        Self {
            indices,
            centroid,
            scatter,
        }
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.indices.len()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Partition {
    pub clusters: Vec<Cluster>,
}

impl Partition {
    /// Clusters sorted by their smallest member index.
    pub fn canonical(mut clusters: Vec<Cluster>) -> Self {
        clusters.sort_by_key(|c| c.indices[0]);
        Self { clusters }
    }

    /// Checks that the clusters are disjoint and cover exactly `0..n`.
    pub fn check_cover(&self, n: usize) -> Result<(), String> {
        let mut seen = vec![false; n];
        for c in &self.clusters {
            if c.indices.is_empty() {
                return Err("empty cluster".into());
            }
            for &i in &c.indices {
                if i >= n {
                    return Err(format!("index {i} out of range for {n} points"));
                }
                if seen[i] {
                    return Err(format!("point {i} appears in two clusters"));
                }
                seen[i] = true;
            }
        }
        match seen.iter().position(|s| !s) {
            Some(i) => Err(format!("point {i} is not covered")),
            None => Ok(()),
        }
    }

    fn key(&self) -> Vec<&[usize]> {
        self.clusters.iter().map(|c| c.indices.as_slice()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DbscanParams {
    pub eps: f64,
    pub min_pts: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KmeansParams {
    pub k: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum ClusteringSetting {
    Dbscan(DbscanParams),
    Kmeans(KmeansParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusteringConfig {
    pub settings: Vec<ClusteringSetting>,
}

impl ClusteringConfig {
    /// DBSCAN grid over `eps x min_pts`.
    pub fn dbscan_grid(eps: &[f64], min_pts: &[usize]) -> Self {
        let settings = eps
            .iter()
            .flat_map(|&e| {
                min_pts
                    .iter()
                    .map(move |&m| ClusteringSetting::Dbscan(DbscanParams { eps: e, min_pts: m }))
            })
            .collect();
        Self { settings }
    }

    pub fn validate(&self) -> Result<(), ClusteringError> {
        if self.settings.is_empty() {
            return Err(ClusteringError::InvalidParameter("no clustering settings".into()));
        }
        for s in &self.settings {
            match s {
                ClusteringSetting::Dbscan(p) if !(p.eps > 0.0) || p.min_pts < 1 => {
                    return Err(ClusteringError::InvalidParameter(format!(
                        "dbscan needs eps > 0 and min_pts >= 1, got {p:?}"
                    )))
                }
                ClusteringSetting::Kmeans(p) if p.k < 1 => {
                    return Err(ClusteringError::InvalidParameter("kmeans needs k >= 1".into()))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Splits point indices into those within `radius` of at least one predicted
/// object position and the rest. Returns `(gated, ungated)`, both sorted.
pub fn gate_points(points: &[RadarPoint], objects: &[(Vec2, f64)]) -> (Vec<usize>, Vec<usize>) {
    (0..points.len()).partition(|&i| {
        let p = &points[i];
        objects
            .iter()
            .any(|(c, r)| (p.x - c.x).powi(2) + (p.y - c.y).powi(2) <= r * r)
    })
}

fn dist2(a: &RadarPoint, b: &RadarPoint) -> f64 {
    (a.x - b.x).powi(2) + (a.y - b.y).powi(2)
}

/// Density-based clustering. `min_pts` counts the point itself. Returns the
/// clusters and the noise indices.
///
/// Border points reachable from several clusters join the cluster of their
/// nearest core point (ties broken by core coordinates), which makes the
/// result independent of input order.
pub fn dbscan(points: &[RadarPoint], eps: f64, min_pts: usize) -> (Vec<Cluster>, Vec<usize>) {
    let n = points.len();
    let eps2 = eps * eps;
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| dist2(&points[i], &points[j]) <= eps2).collect())
        .collect();
    let core: Vec<bool> = neighbors.iter().map(|nb| nb.len() >= min_pts).collect();

    // connected components of core points
    let mut label = vec![usize::MAX; n];
    let mut n_clusters = 0;
    for start in 0..n {
        if !core[start] || label[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        label[start] = n_clusters;
        while let Some(i) = stack.pop() {
            for &j in &neighbors[i] {
                if core[j] && label[j] == usize::MAX {
                    label[j] = n_clusters;
                    stack.push(j);
                }
            }
        }
        n_clusters += 1;
    }

    let mut noise = Vec::new();
    for i in 0..n {
        if core[i] {
            continue;
        }
        let nearest = neighbors[i].iter().filter(|&&j| core[j]).min_by(|&&a, &&b| {
            dist2(&points[i], &points[a])
                .total_cmp(&dist2(&points[i], &points[b]))
                .then(points[a].x.total_cmp(&points[b].x))
                .then(points[a].y.total_cmp(&points[b].y))
        });
        match nearest {
            Some(&j) => label[i] = label[j],
            None => noise.push(i),
        }
    }

    let mut members = vec![Vec::new(); n_clusters];
    for i in 0..n {
        if label[i] != usize::MAX {
            members[label[i]].push(i);
        }
    }
    let clusters = members
        .into_iter()
        .map(|m| Cluster::from_indices(points, m))
        .collect();
    (clusters, noise)
}

const KMEANS_MAX_ITER: usize = 100;

/// Lloyd's k-means with k-means++ seeding; deterministic for a given seed.
pub fn kmeans(points: &[RadarPoint], k: usize, seed: u64) -> Result<Vec<Cluster>, ClusteringError> {
    let n = points.len();
    if k == 0 {
        return Err(ClusteringError::InvalidParameter("kmeans needs k >= 1".into()));
    }
    if k > n {
        return Err(ClusteringError::TooFewPoints { k, n });
    }
    let pos: Vec<Vec2> = points.iter().map(|p| Vec2::new(p.x, p.y)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = pos.iter().map(|p| (p - pos[chosen[0]]).norm_squared()).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 && target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            if d2[pick] == 0.0 {
                pick = d2.iter().position(|&w| w > 0.0).unwrap_or(pick);
            }
            pick
        } else {
            // all remaining points coincide with a center
            (0..n).find(|i| !chosen.contains(i)).expect("k <= n")
        };
        chosen.push(next);
        for (i, p) in pos.iter().enumerate() {
            d2[i] = d2[i].min((p - pos[next]).norm_squared());
        }
    }
    let mut centers: Vec<Vec2> = chosen.iter().map(|&i| pos[i]).collect();
    // seeds keep their own cluster initially so duplicates still yield k groups
    let mut assign = vec![usize::MAX; n];
    for (c, &i) in chosen.iter().enumerate() {
        assign[i] = c;
    }

    let nearest = |p: &Vec2, centers: &[Vec2]| -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (c, ctr) in centers.iter().enumerate() {
            let d = (p - ctr).norm_squared();
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        best
    };

    for iter in 0..KMEANS_MAX_ITER {
        let mut changed = false;
        for i in 0..n {
            if iter == 0 && assign[i] != usize::MAX {
                continue;
            }
            let c = nearest(&pos[i], &centers);
            if assign[i] != c {
                assign[i] = c;
                changed = true;
            }
        }
        // repair empty clusters with the point farthest from its center
        for c in 0..k {
            if assign.contains(&c) {
                continue;
            }
            let far = (0..n)
                .filter(|&i| assign.iter().filter(|&&a| a == assign[i]).count() > 1)
                .max_by(|&a, &b| {
                    (pos[a] - centers[assign[a]])
                        .norm_squared()
                        .total_cmp(&(pos[b] - centers[assign[b]]).norm_squared())
                        .then(b.cmp(&a))
                })
                .expect("some cluster has two points when one is empty");
            assign[far] = c;
            changed = true;
        }
        for (c, ctr) in centers.iter_mut().enumerate() {
            let members: Vec<&Vec2> = (0..n).filter(|&i| assign[i] == c).map(|i| &pos[i]).collect();
            *ctr = members.iter().fold(Vec2::zeros(), |a, p| a + *p) / members.len() as f64;
        }
        if !changed && iter > 0 {
            break;
        }
    }

    let mut members = vec![Vec::new(); k];
    for (i, &c) in assign.iter().enumerate() {
        members[c].push(i);
    }
    Ok(members
        .into_iter()
        .map(|m| Cluster::from_indices(points, m))
        .collect())
}

/// Runs one clustering setting and returns a full cover of the points
/// (DBSCAN noise becomes singleton clusters; k is capped at the point count).
pub fn cluster_with(points: &[RadarPoint], setting: &ClusteringSetting) -> Partition {
    if points.is_empty() {
        return Partition::default();
    }
    let clusters = match *setting {
        ClusteringSetting::Dbscan(p) => {
            let (mut clusters, noise) = dbscan(points, p.eps, p.min_pts);
            clusters.extend(noise.into_iter().map(|i| Cluster::from_indices(points, vec![i])));
            clusters
        }
        ClusteringSetting::Kmeans(p) => {
            kmeans(points, p.k.min(points.len()).max(1), p.seed).expect("k capped at point count")
        }
    };
    Partition::canonical(clusters)
}

/// One partition per setting, duplicates removed (first occurrence kept).
pub fn generate_partitions(points: &[RadarPoint], cfg: &ClusteringConfig) -> Vec<Partition> {
    if points.is_empty() {
        return vec![Partition::default()];
    }
    let mut out: Vec<Partition> = Vec::with_capacity(cfg.settings.len());
    for s in &cfg.settings {
        let p = cluster_with(points, s);
        if !out.iter().any(|q| q.key() == p.key()) {
            out.push(p);
        }
    }
    out
}
