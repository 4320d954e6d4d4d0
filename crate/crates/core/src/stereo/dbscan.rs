//! Density-based clustering of point clouds.
//!
//! A point is core when at least `min_pts` points (itself included) lie
//! within `eps`. Clusters are the connected components of the core points
//! under the `eps` relation, numbered by their lowest core index. A non-core
//! point within `eps` of a core point joins the lowest-numbered such cluster;
//! everything else is noise. The partition does not depend on the order in
//! which core points are visited.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DbscanParams {
    /// Neighborhood radius in meters.
    pub eps: f64,
    pub min_pts: usize,
}

impl Default for DbscanParams {
    fn default() -> Self {
        DbscanParams { eps: 0.15, min_pts: 8 }
    }
}

impl DbscanParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(Error::param("dbscan.eps must be > 0"));
        }
        if self.min_pts < 1 {
            return Err(Error::param("dbscan.min_pts must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Clustering {
    /// Member indices of each cluster, ascending.
    pub clusters: Vec<Vec<usize>>,
    /// Indices of noise points, ascending.
    pub noise: Vec<usize>,
}

impl Clustering {
    /// Per-point cluster id, `None` for noise.
    pub fn assignments(&self, n: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n];
        for (c, members) in self.clusters.iter().enumerate() {
            for &i in members {
                out[i] = Some(c);
            }
        }
        out
    }
}

/// Uniform-grid neighbor index with cell size `eps`.
struct CellIndex {
    cells: HashMap<[i64; 3], Vec<usize>>,
    inv: f64,
}

impl CellIndex {
    fn new<T: Real>(cloud: &PointCloud<T>, eps: f64) -> Self {
        let inv = 1.0 / eps;
        let mut cells: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for (i, p) in cloud.points.iter().enumerate() {
            cells.entry(Self::key(p.xyz(), inv)).or_default().push(i);
        }
        CellIndex { cells, inv }
    }

    fn key<T: Real>(p: [T; 3], inv: f64) -> [i64; 3] {
        p.map(|c| (c.to_f64_lossy() * inv).floor() as i64)
    }

    fn neighbors<T: Real>(&self, cloud: &PointCloud<T>, i: usize, eps_sq: T, out: &mut Vec<usize>) {
        out.clear();
        let p = &cloud.points[i];
        let [kx, ky, kz] = Self::key(p.xyz(), self.inv);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(list) = self.cells.get(&[kx + dx, ky + dy, kz + dz]) {
                        out.extend(list.iter().copied().filter(|&j| p.dist_sq(&cloud.points[j]) <= eps_sq));
                    }
                }
            }
        }
        out.sort_unstable();
    }
}

pub fn dbscan<T: Real>(cloud: &PointCloud<T>, params: &DbscanParams) -> Result<Clustering> {
    params.validate()?;
    let n = cloud.len();
    if n == 0 {
        return Ok(Clustering::default());
    }
    let index = CellIndex::new(cloud, params.eps);
    let eps = T::lit(params.eps);
    let eps_sq = eps * eps;
    let mut nbrs: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut scratch = Vec::new();
    for i in 0..n {
        index.neighbors(cloud, i, eps_sq, &mut scratch);
        nbrs.push(scratch.clone());
    }
    let core: Vec<bool> = nbrs.iter().map(|l| l.len() >= params.min_pts).collect();

    let mut label: Vec<Option<usize>> = vec![None; n];
    let mut next = 0usize;
    let mut stack = Vec::new();
    for seed in 0..n {
        if !core[seed] || label[seed].is_some() {
            continue;
        }
        label[seed] = Some(next);
        stack.push(seed);
        while let Some(i) = stack.pop() {
            for &j in &nbrs[i] {
                if core[j] && label[j].is_none() {
                    label[j] = Some(next);
                    stack.push(j);
                }
            }
        }
        next += 1;
    }
    for i in 0..n {
        if !core[i] {
            label[i] = nbrs[i].iter().filter(|&&j| core[j]).filter_map(|&j| label[j]).min();
        }
    }

    let mut clusters = vec![Vec::new(); next];
    let mut noise = Vec::new();
    for (i, l) in label.iter().enumerate() {
        match l {
            Some(c) => clusters[*c].push(i),
            None => noise.push(i),
        }
    }
    Ok(Clustering { clusters, noise })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point3;

    fn blob(cx: f64, n: usize) -> Vec<Point3<f64>> {
        (0..n)
            .map(|i| {
                let a = i as f64 / n as f64 * std::f64::consts::TAU;
                Point3::new(cx + 0.04 * a.cos(), 0.04 * a.sin(), 2.0 + 0.01 * i as f64 / n as f64)
            })
            .collect()
    }

    #[test]
    fn two_blobs() {
        let mut pts = blob(0.0, 10);
        pts.extend(blob(1.0, 10));
        let c = dbscan(&PointCloud::new(pts), &DbscanParams { eps: 0.15, min_pts: 4 }).unwrap();
        assert_eq!(c.clusters.len(), 2);
        assert!(c.noise.is_empty());
        assert_eq!(c.clusters[0], (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn single_dense_cluster_and_isolated_noise() {
        let mut pts = blob(0.0, 8);
        pts.push(Point3::new(5.0, 5.0, 5.0));
        let c = dbscan(&PointCloud::new(pts), &DbscanParams { eps: 0.15, min_pts: 8 }).unwrap();
        assert_eq!(c.clusters.len(), 1);
        assert_eq!(c.clusters[0].len(), 8);
        assert_eq!(c.noise, vec![8]);
    }

    #[test]
    fn empty_cloud() {
        let c = dbscan(&PointCloud::<f32>::default(), &DbscanParams::default()).unwrap();
        assert!(c.clusters.is_empty() && c.noise.is_empty());
    }

    #[test]
    fn bad_params() {
        let cloud = PointCloud::new(blob(0.0, 3));
        assert!(dbscan(&cloud, &DbscanParams { eps: 0.0, min_pts: 2 }).is_err());
        assert!(dbscan(&cloud, &DbscanParams { eps: 0.1, min_pts: 0 }).is_err());
    }

    #[test]
    fn border_point_goes_to_lowest_cluster() {
        // Two dense triples joined only through a non-core point at 0.25.
        let xs = [0.0, 0.05, 0.1, 0.4, 0.45, 0.5, 0.25];
        let pts: Vec<Point3<f64>> = xs.iter().map(|&x| Point3::new(x, 0.0, 1.0)).collect();
        let c = dbscan(&PointCloud::new(pts), &DbscanParams { eps: 0.16, min_pts: 4 }).unwrap();
        assert_eq!(c.clusters.len(), 2);
        assert!(c.clusters[0].contains(&6));
    }
}
