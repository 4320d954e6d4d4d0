//! RANSAC ground-plane estimation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{cross, dot, norm, normalize, scale, sub, PlaneModel, PointCloud};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RansacParams {
    pub iterations: usize,
    /// Inlier band, meters of perpendicular distance.
    pub threshold: f64,
    pub seed: u64,
}

impl Default for RansacParams {
    fn default() -> Self {
        RansacParams {
            iterations: 200,
            threshold: 0.02,
            seed: 0,
        }
    }
}

impl RansacParams {
    pub fn validate(&self) -> Result<()> {
        if self.iterations < 1 {
            return Err(Error::param("ransac.iterations must be >= 1"));
        }
        if !(self.threshold > 0.0) || !self.threshold.is_finite() {
            return Err(Error::param("ransac.threshold must be > 0"));
        }
        Ok(())
    }
}

/// Restricts hypotheses to planes whose normal is within `max_tilt_deg` of
/// `up`, and orients the result along `up`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TiltGate<T> {
    pub up: [T; 3],
    pub max_tilt_deg: f64,
}

fn count_inliers<T: Real>(cloud: &PointCloud<T>, normal: [T; 3], offset: T, thr: T) -> usize {
    cloud
        .points
        .iter()
        .filter(|p| (dot(normal, p.xyz()) + offset).abs() <= thr)
        .count()
}

/// Least-squares plane through `pts`: centroid plus the eigenvector of the
/// scatter matrix with the smallest eigenvalue.
pub fn fit_plane_lsq<T: Real>(pts: &[[T; 3]]) -> Result<([T; 3], T)> {
    if pts.len() < 3 {
        return Err(Error::Degenerate(format!("plane fit needs 3 points, got {}", pts.len())));
    }
    let n = T::from_usize_lossy(pts.len());
    let mut c = [T::zero(); 3];
    for p in pts {
        for i in 0..3 {
            c[i] = c[i] + p[i];
        }
    }
    let c = scale(c, T::one() / n);
    let mut m = [[T::zero(); 3]; 3];
    for p in pts {
        let d = sub(*p, c);
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = m[i][j] + d[i] * d[j];
            }
        }
    }
    let (vals, vecs) = symmetric_eigen3(m);
    let k = (0..3)
        .min_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap_or(std::cmp::Ordering::Equal))
        .expect("three eigenvalues");
    let normal = normalize([vecs[0][k], vecs[1][k], vecs[2][k]]);
    if !normal.iter().all(|v| v.is_finite()) {
        return Err(Error::Degenerate("plane fit produced a non-finite normal".into()));
    }
    Ok((normal, -dot(normal, c)))
}

/// Cyclic Jacobi eigen-decomposition of a symmetric 3x3 matrix. Returns the
/// eigenvalues and a matrix whose columns are the eigenvectors.
pub fn symmetric_eigen3<T: Real>(mut a: [[T; 3]; 3]) -> ([T; 3], [[T; 3]; 3]) {
    let mut v = [[T::zero(); 3]; 3];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = T::one();
    }
    for _ in 0..64 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if off <= T::epsilon() * T::epsilon() * (a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2])
            || off == T::zero()
        {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q] == T::zero() {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
            let cs = T::one() / (t * t + T::one()).sqrt();
            let sn = t * cs;
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = cs * akp - sn * akq;
                a[k][q] = sn * akp + cs * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = cs * apk - sn * aqk;
                a[q][k] = sn * apk + cs * aqk;
            }
            for row in v.iter_mut() {
                let vkp = row[p];
                let vkq = row[q];
                row[p] = cs * vkp - sn * vkq;
                row[q] = sn * vkp + cs * vkq;
            }
        }
    }
    ([a[0][0], a[1][1], a[2][2]], v)
}

/// Fits the dominant plane of `cloud` with 3-point RANSAC, refits it by least
/// squares on the consensus set and orients the normal toward the side
/// holding most off-plane points (or along the gate's `up` when given).
pub fn ransac_plane<T: Real>(
    cloud: &PointCloud<T>,
    params: &RansacParams,
    gate: Option<&TiltGate<T>>,
) -> Result<PlaneModel<T>> {
    params.validate()?;
    let n = cloud.len();
    if n < 3 {
        return Err(Error::Degenerate(format!("RANSAC needs at least 3 points, got {n}")));
    }
    let thr = T::lit(params.threshold);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Option<([T; 3], T, usize)> = None;
    let mut saw_noncollinear = false;
    for _ in 0..params.iterations {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let mut k = rng.random_range(0..n - 2);
        for taken in [i.min(j), i.max(j)] {
            if k >= taken {
                k += 1;
            }
        }
        let (a, b, c) = (cloud.points[i].xyz(), cloud.points[j].xyz(), cloud.points[k].xyz());
        let nrm = cross(sub(b, a), sub(c, a));
        let len = norm(nrm);
        let scale_ref = norm(sub(b, a)) * norm(sub(c, a));
        if !(len > T::lit(1e-9) * scale_ref) || !len.is_finite() {
            continue;
        }
        saw_noncollinear = true;
        let normal = scale(nrm, T::one() / len);
        if let Some(g) = gate {
            let tilt = PlaneModel::new(normal, T::zero(), 0).map(|p| p.tilt_deg(g.up)).unwrap_or(90.0);
            if tilt > g.max_tilt_deg {
                continue;
            }
        }
        let offset = -dot(normal, a);
        let count = count_inliers(cloud, normal, offset, thr);
        if best.is_none_or(|(_, _, c)| count > c) {
            best = Some((normal, offset, count));
        }
    }
    let Some((normal, offset, _)) = best else {
        return Err(Error::Degenerate(if saw_noncollinear {
            "no plane hypothesis within the tilt limit".into()
        } else {
            "all sampled point triples are collinear".into()
        }));
    };

    let consensus: Vec<[T; 3]> = cloud
        .points
        .iter()
        .map(|p| p.xyz())
        .filter(|&p| (dot(normal, p) + offset).abs() <= thr)
        .collect();
    let (mut normal, mut offset) = match fit_plane_lsq(&consensus) {
        Ok(fit) => fit,
        Err(_) => (normal, offset),
    };
    if let Some(g) = gate {
        let tilt = PlaneModel::new(normal, offset, 0)?.tilt_deg(g.up);
        if tilt > g.max_tilt_deg {
            return Err(Error::Degenerate("refit ground plane exceeds the tilt limit".into()));
        }
    }

    let flip = match gate {
        Some(g) => dot(normal, g.up) < T::zero(),
        None => {
            let (mut above, mut below) = (0usize, 0usize);
            for p in &cloud.points {
                let d = dot(normal, p.xyz()) + offset;
                if d > thr {
                    above += 1;
                } else if d < -thr {
                    below += 1;
                }
            }
            below > above
        }
    };
    if flip {
        normal = scale(normal, -T::one());
        offset = -offset;
    }
    let inliers = count_inliers(cloud, normal, offset, thr);
    PlaneModel::new(normal, offset, inliers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point3;

    fn plane_cloud() -> PointCloud<f64> {
        let mut pts = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                pts.push(Point3::new(i as f64 * 0.3 - 1.5, 1.5, 1.0 + j as f64 * 0.4));
            }
        }
        PointCloud::new(pts)
    }

    #[test]
    fn exact_plane_recovered() {
        let pl = ransac_plane(&plane_cloud(), &RansacParams::default(), None).unwrap();
        assert!((pl.normal[1].abs() - 1.0).abs() < 1e-9);
        assert!((pl.offset.abs() - 1.5).abs() < 1e-9);
        assert_eq!(pl.inlier_count, 100);
        assert!((norm(pl.normal) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn too_few_points() {
        let cloud = PointCloud::new(vec![Point3::new(0.0, 0.0, 1.0), Point3::new(1.0, 0.0, 1.0)]);
        assert!(matches!(
            ransac_plane(&cloud, &RansacParams::default(), None),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn collinear_points_rejected() {
        let cloud = PointCloud::new((0..20).map(|i| Point3::new(i as f64, 2.0 * i as f64, 1.0)).collect());
        assert!(matches!(
            ransac_plane(&cloud, &RansacParams::default(), None),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn outliers_above_orient_normal() {
        let mut cloud = plane_cloud();
        for i in 0..20 {
            // camera y points down: "above" the floor means smaller y
            cloud.points.push(Point3::new(i as f64 * 0.05, 1.2 - 0.01 * i as f64, 3.0));
        }
        let pl = ransac_plane(&cloud, &RansacParams::default(), None).unwrap();
        assert!(pl.normal[1] < 0.0);
        assert!(pl.signed_distance([0.0, 1.0, 3.0]) > 0.0);
    }

    #[test]
    fn gate_rejects_walls() {
        // A wall (z = 5) with more points than the floor.
        let mut pts = plane_cloud().points;
        for i in 0..15 {
            for j in 0..15 {
                pts.push(Point3::new(i as f64 * 0.2 - 1.5, j as f64 * 0.1 - 0.5, 5.0));
            }
        }
        let cloud = PointCloud::new(pts);
        let free = ransac_plane(&cloud, &RansacParams::default(), None).unwrap();
        assert!(free.normal[2].abs() > 0.99);
        let gate = TiltGate { up: [0.0, -1.0, 0.0], max_tilt_deg: 30.0 };
        let gated = ransac_plane(&cloud, &RansacParams::default(), Some(&gate)).unwrap();
        assert!((gated.normal[1] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn jacobi_diagonalizes() {
        let m: [[f64; 3]; 3] = [[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 1.0]];
        let (vals, vecs) = symmetric_eigen3(m);
        for k in 0..3 {
            let v = [vecs[0][k], vecs[1][k], vecs[2][k]];
            for i in 0..3 {
                let mv = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
                assert!((mv - vals[k] * v[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn works_in_f32() {
        let cloud = PointCloud::new(
            plane_cloud()
                .points
                .iter()
                .map(|p| Point3::new(p.x as f32, p.y as f32, p.z as f32))
                .collect(),
        );
        let pl = ransac_plane(&cloud, &RansacParams::default(), None).unwrap();
        assert!((pl.offset.abs() - 1.5).abs() < 1e-4);
    }
}
