//! Fusion of the two detector channels.

pub mod nms;
pub mod temporal;

pub use nms::{fuse_by_center_nms, fuse_tracked, gate_by_roi, Detection, Priority};
pub use temporal::{temporal_average, AveragedBox, TemporalParams, TemporalWindow};
