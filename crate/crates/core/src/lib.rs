//! Dual-channel road obstacle detection from a stereo camera.
//!
//! One channel segments the color image, the other clusters the disparity
//! point cloud above a fitted ground plane. Their boxes are smoothed over a
//! short window, merged, and gated by a road region of interest.

pub mod bbox;
pub mod error;
pub mod fusion;
pub mod geometry;
pub mod grid;
pub mod pipeline;
pub mod rgb;
pub mod roi;
pub mod scalar;
pub mod stereo;
pub mod synth;

pub use bbox::{bbox_center, bbox_iou, bbox_union, center_distance, BBox2D, Channel};
pub use error::{Error, Result};
pub use fusion::{fuse_by_center_nms, gate_by_roi, Detection, TemporalParams, TemporalWindow};
pub use geometry::{CameraModel, PlaneModel, Point3, PointCloud};
pub use grid::{DisparityMap, Grid, ImageRgb, LabelMap, Mask};
pub use pipeline::{FrameBundle, FrameResult, Pipeline, PipelineConfig};
pub use roi::{rasterize_roi, RoiPolygon};
pub use scalar::Real;

pub type Camera = CameraModel<f64>;
pub type Point = Point3<f64>;
pub type Cloud = PointCloud<f64>;
pub type Plane = PlaneModel<f64>;
