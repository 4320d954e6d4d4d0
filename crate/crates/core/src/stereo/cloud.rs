//! Disparity smoothing by superpixel and unprojection to point clouds.

use crate::error::Result;
use crate::geometry::{CameraModel, Point3, PointCloud};
use crate::grid::{is_valid_disparity, DisparityMap, Grid, LabelMap, INVALID_DISPARITY};
use crate::scalar::Real;

/// Replaces every valid disparity by the mean of the valid disparities in its
/// superpixel. Invalid pixels stay invalid.
pub fn average_disparity_by_superpixel(disp: &DisparityMap, labels: &LabelMap) -> Result<DisparityMap> {
    disp.same_dims(labels.grid())?;
    let mut sum = vec![0f64; labels.num_labels()];
    let mut count = vec![0usize; labels.num_labels()];
    for (&d, &l) in disp.as_slice().iter().zip(labels.as_slice()) {
        if is_valid_disparity(d) {
            sum[l as usize] += d as f64;
            count[l as usize] += 1;
        }
    }
    let data = disp
        .as_slice()
        .iter()
        .zip(labels.as_slice())
        .map(|(&d, &l)| {
            if is_valid_disparity(d) {
                (sum[l as usize] / count[l as usize] as f64) as f32
            } else {
                INVALID_DISPARITY
            }
        })
        .collect();
    Grid::new(disp.width(), disp.height(), data)
}

/// Dense unprojection of every valid pixel, sampled at pixel centers.
/// Points farther than `max_range` meters are dropped.
pub fn unproject<T: Real>(disp: &DisparityMap, cam: &CameraModel<T>, max_range: T) -> PointCloud<T> {
    let mut points = Vec::new();
    let half = T::lit(0.5);
    for y in 0..disp.height() {
        for x in 0..disp.width() {
            let d = *disp.get(x, y);
            if !is_valid_disparity(d) {
                continue;
            }
            let z = cam.depth_from_disparity(T::lit(d as f64));
            if z > max_range {
                continue;
            }
            let u = T::from_usize_lossy(x) + half;
            let v = T::from_usize_lossy(y) + half;
            let [px, py, pz] = cam.backproject(u, v, z);
            points.push(Point3 {
                x: px,
                y: py,
                z: pz,
                src_pixel: [u, v],
            });
        }
    }
    PointCloud::new(points)
}

/// One point per superpixel: the centroid of its valid pixels at the mean of
/// their disparities. Returns the cloud and, per point, its superpixel label.
///
/// On a planar surface disparity is affine in image position, so the centroid
/// at mean disparity lies on the surface.
pub fn superpixel_cloud<T: Real>(
    disp: &DisparityMap,
    labels: &LabelMap,
    cam: &CameraModel<T>,
    max_range: T,
) -> Result<(PointCloud<T>, Vec<u32>)> {
    disp.same_dims(labels.grid())?;
    let n = labels.num_labels();
    let mut acc = vec![[0f64; 4]; n];
    for y in 0..disp.height() {
        for x in 0..disp.width() {
            let d = *disp.get(x, y);
            if !is_valid_disparity(d) {
                continue;
            }
            let a = &mut acc[labels.get(x, y) as usize];
            a[0] += x as f64 + 0.5;
            a[1] += y as f64 + 0.5;
            a[2] += d as f64;
            a[3] += 1.0;
        }
    }
    let mut points = Vec::new();
    let mut owners = Vec::new();
    for (l, a) in acc.iter().enumerate() {
        if a[3] == 0.0 {
            continue;
        }
        let u = T::lit(a[0] / a[3]);
        let v = T::lit(a[1] / a[3]);
        let z = cam.depth_from_disparity(T::lit(a[2] / a[3]));
        if z > max_range {
            continue;
        }
        let [px, py, pz] = cam.backproject(u, v, z);
        points.push(Point3 {
            x: px,
            y: py,
            z: pz,
            src_pixel: [u, v],
        });
        owners.push(l as u32);
    }
    Ok((PointCloud::new(points), owners))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn superpixel_mean() {
        let disp = Grid::new(4, 1, vec![10.0f32, 12.0, 14.0, 0.0]).unwrap();
        let labels = LabelMap::from_raw(Grid::new(4, 1, vec![0u32, 0, 0, 1]).unwrap());
        let out = average_disparity_by_superpixel(&disp, &labels).unwrap();
        assert_eq!(out.as_slice(), &[12.0, 12.0, 12.0, 0.0]);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let disp = Grid::filled(4, 2, 1.0f32);
        let labels = LabelMap::from_raw(Grid::filled(4, 1, 0u32));
        assert!(average_disparity_by_superpixel(&disp, &labels).is_err());
    }

    #[test]
    fn pinhole_depth() {
        let cam = CameraModel::<f64>::new(700.0, 700.0, 2.5, 1.5, 0.12).unwrap();
        let mut disp = Grid::filled(5, 3, 0.0f32);
        *disp.get_mut(2, 1) = 84.0;
        let cloud = unproject(&disp, &cam, 15.0);
        assert_eq!(cloud.len(), 1);
        let p = cloud.points[0];
        assert!((p.z - 1.0).abs() < 1e-12);
        // pixel (2, 1) is centered on the principal point
        assert_eq!((p.x, p.y), (0.0, 0.0));
        assert_eq!(p.src_pixel, [2.5, 1.5]);
    }

    #[test]
    fn range_cutoff_and_sentinel() {
        let cam = CameraModel::new(700.0f32, 700.0, 1.0, 1.0, 0.12).unwrap();
        // d = 84 / 20 puts the point at 20 m
        let disp = Grid::new(2, 1, vec![4.2f32, 0.0]).unwrap();
        assert!(unproject(&disp, &cam, 15.0).is_empty());
    }
}
