//! Depth obstacle channel.
//!
//! Disparity is averaged over SLIC superpixels of the color frame, lifted to
//! a camera-frame cloud, the ground plane is found with RANSAC, points in a
//! height band above it are clustered with DBSCAN, and clusters are mapped
//! back to image boxes.

pub mod cloud;
pub mod dbscan;
pub mod ransac;
pub mod slic;

use serde::{Deserialize, Serialize};

use crate::bbox::{BBox2D, Channel};
use crate::error::{Error, Result};
use crate::geometry::{up_vector, CameraModel, PlaneModel, PointCloud};
use crate::grid::{DisparityMap, ImageRgb, LabelMap, Mask};
use crate::scalar::Real;

pub use cloud::{average_disparity_by_superpixel, superpixel_cloud, unproject};
pub use dbscan::{dbscan, Clustering, DbscanParams};
pub use ransac::{fit_plane_lsq, ransac_plane, RansacParams, TiltGate};
pub use slic::{slic_segment, SlicParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CloudMode {
    /// One point per superpixel.
    #[default]
    Sparse,
    /// One point per valid pixel of the superpixel-averaged disparity.
    Dense,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundParams {
    /// Height band above the ground plane kept as obstacle points, meters.
    pub min_height: f64,
    pub max_height: f64,
    /// Downward pitch of the camera; defines the expected ground normal.
    pub camera_pitch_deg: f64,
    /// Largest accepted angle between the fitted normal and world up.
    pub max_tilt_deg: f64,
}

impl Default for GroundParams {
    fn default() -> Self {
        GroundParams {
            min_height: 0.03,
            max_height: 2.5,
            camera_pitch_deg: 0.0,
            max_tilt_deg: 30.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StereoParams {
    pub slic: SlicParams,
    pub ransac: RansacParams,
    pub ground: GroundParams,
    pub dbscan: DbscanParams,
    pub min_cluster_size: usize,
    pub max_range: f64,
    pub cloud_mode: CloudMode,
}

impl Default for StereoParams {
    fn default() -> Self {
        StereoParams {
            slic: SlicParams::default(),
            ransac: RansacParams::default(),
            ground: GroundParams::default(),
            dbscan: DbscanParams::default(),
            min_cluster_size: 8,
            max_range: 15.0,
            cloud_mode: CloudMode::Sparse,
        }
    }
}

/// Keeps points whose signed distance to `plane` lies in `[min_height, max_height]`.
pub fn filter_above_ground<T: Real>(
    cloud: &PointCloud<T>,
    plane: &PlaneModel<T>,
    min_height: T,
    max_height: T,
) -> PointCloud<T> {
    PointCloud::new(
        above_ground_indices(cloud, plane, min_height, max_height)
            .into_iter()
            .map(|i| cloud.points[i])
            .collect(),
    )
}

fn above_ground_indices<T: Real>(cloud: &PointCloud<T>, plane: &PlaneModel<T>, lo: T, hi: T) -> Vec<usize> {
    cloud
        .points
        .iter()
        .enumerate()
        .filter(|(_, p)| {
            let d = plane.signed_distance(p.xyz());
            d >= lo && d <= hi
        })
        .map(|(i, _)| i)
        .collect()
}

/// Tight box over the source pixels of each cluster with at least
/// `min_cluster_size` members, clamped to a `width` x `height` frame.
pub fn clusters_to_bboxes<T: Real>(
    clusters: &[Vec<usize>],
    cloud: &PointCloud<T>,
    min_cluster_size: usize,
    width: usize,
    height: usize,
) -> Vec<BBox2D> {
    clusters
        .iter()
        .filter(|c| !c.is_empty() && c.len() >= min_cluster_size)
        .filter_map(|members| {
            let mut x0 = i32::MAX;
            let mut y0 = i32::MAX;
            let mut x1 = i32::MIN;
            let mut y1 = i32::MIN;
            for &i in members {
                let [u, v] = cloud.points[i].src_pixel;
                let (px, py) = (u.to_f64_lossy().floor() as i32, v.to_f64_lossy().floor() as i32);
                x0 = x0.min(px);
                y0 = y0.min(py);
                x1 = x1.max(px);
                y1 = y1.max(py);
            }
            BBox2D::new(x0, y0, x1, y1, Channel::Stereo).clamp_to(width, height)
        })
        .collect()
}

/// Pixel extent of every superpixel.
fn superpixel_extents(labels: &LabelMap) -> Vec<[i32; 4]> {
    let mut ext = vec![[i32::MAX, i32::MAX, i32::MIN, i32::MIN]; labels.num_labels()];
    for y in 0..labels.height() {
        for x in 0..labels.width() {
            let e = &mut ext[labels.get(x, y) as usize];
            e[0] = e[0].min(x as i32);
            e[1] = e[1].min(y as i32);
            e[2] = e[2].max(x as i32);
            e[3] = e[3].max(y as i32);
        }
    }
    ext
}

/// Result of the depth channel on one frame.
#[derive(Clone, Debug, PartialEq)]
pub struct StereoOutput {
    pub boxes: Vec<BBox2D>,
    /// `None` when no acceptable ground plane was found.
    pub ground: Option<PlaneModel<f64>>,
    pub cloud_points: usize,
    pub obstacle_points: usize,
}

pub fn detect_stereo(
    frame: &ImageRgb,
    disp: &DisparityMap,
    cam: &CameraModel<f64>,
    roi: &Mask,
    params: &StereoParams,
) -> Result<StereoOutput> {
    frame.same_dims(disp)?;
    frame.same_dims(roi)?;
    params.dbscan.validate()?;
    params.ransac.validate()?;
    let (w, h) = frame.dims();
    cam.validate_for(w, h)?;

    let labels = slic_segment(frame, &params.slic)?;
    let averaged = average_disparity_by_superpixel(disp, &labels)?;
    let (cloud, owners) = match params.cloud_mode {
        CloudMode::Sparse => {
            let (c, o) = superpixel_cloud(&averaged, &labels, cam, params.max_range)?;
            (c, Some(o))
        }
        CloudMode::Dense => (unproject(&averaged, cam, params.max_range), None),
    };

    let gate = TiltGate {
        up: up_vector::<f64>(params.ground.camera_pitch_deg),
        max_tilt_deg: params.ground.max_tilt_deg,
    };
    let plane = match ransac_plane(&cloud, &params.ransac, Some(&gate)) {
        Ok(p) => p,
        Err(Error::Degenerate(msg)) => {
            log::debug!("no ground plane: {msg}");
            return Ok(StereoOutput {
                boxes: Vec::new(),
                ground: None,
                cloud_points: cloud.len(),
                obstacle_points: 0,
            });
        }
        Err(e) => return Err(e),
    };

    let keep = above_ground_indices(&cloud, &plane, params.ground.min_height, params.ground.max_height);
    let obstacles = PointCloud::new(keep.iter().map(|&i| cloud.points[i]).collect());
    let clustering = dbscan(&obstacles, &params.dbscan)?;

    let boxes = match owners {
        Some(owners) => {
            let ext = superpixel_extents(&labels);
            clustering
                .clusters
                .iter()
                .filter(|c| c.len() >= params.min_cluster_size)
                .map(|members| {
                    let mut b = [i32::MAX, i32::MAX, i32::MIN, i32::MIN];
                    for &i in members {
                        let e = ext[owners[keep[i]] as usize];
                        b = [b[0].min(e[0]), b[1].min(e[1]), b[2].max(e[2]), b[3].max(e[3])];
                    }
                    BBox2D::new(b[0], b[1], b[2], b[3], Channel::Stereo)
                })
                .collect()
        }
        None => clusters_to_bboxes(&clustering.clusters, &obstacles, params.min_cluster_size, w, h),
    };
    let boxes = boxes
        .into_iter()
        .filter(|b| {
            let (cx, cy) = b.center_pixel();
            *roi.get(cx as usize, cy as usize)
        })
        .collect();

    Ok(StereoOutput {
        boxes,
        ground: Some(plane),
        cloud_points: cloud.len(),
        obstacle_points: obstacles.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point3;

    fn floor() -> PlaneModel<f64> {
        // y = 1.5 in camera frame, normal pointing up (-y)
        PlaneModel::new([0.0, -1.0, 0.0], 1.5, 0).unwrap()
    }

    #[test]
    fn height_band() {
        let cloud = PointCloud::new(vec![
            Point3::new(0.0, 1.5, 3.0),
            Point3::new(0.0, 1.4, 3.0),
            Point3::new(0.0, -3.5, 3.0),
        ]);
        let kept = filter_above_ground(&cloud, &floor(), 0.03, 2.5);
        assert_eq!(kept.len(), 1);
        assert!((kept.points[0].y - 1.4).abs() < 1e-12);
        let again = filter_above_ground(&kept, &floor(), 0.03, 2.5);
        assert_eq!(again, kept);
    }

    #[test]
    fn cluster_boxes_from_provenance() {
        let mut pts = Vec::new();
        for (u, v) in [(40.5, 50.5), (80.5, 110.5), (60.5, 70.5)] {
            let mut p = Point3::new(0.0, 0.0, 1.0);
            p.src_pixel = [u, v];
            pts.push(p);
        }
        let cloud = PointCloud::new(pts);
        let boxes = clusters_to_bboxes(&[vec![0, 1, 2]], &cloud, 1, 200, 200);
        assert_eq!(boxes, vec![BBox2D::new(40, 50, 80, 110, Channel::Stereo)]);
        assert!(clusters_to_bboxes(&[vec![0, 1]], &cloud, 8, 200, 200).is_empty());
        assert!(clusters_to_bboxes::<f64>(&[], &cloud, 1, 200, 200).is_empty());
    }
}
