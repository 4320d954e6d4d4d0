//! Per-frame orchestration of both channels, smoothing and fusion.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bbox::BBox2D;
use crate::error::Result;
use crate::fusion::{fuse_tracked, gate_by_roi, AveragedBox, Detection, TemporalWindow};
use crate::grid::Mask;
use crate::rgb::detect_rgb;
use crate::roi::rasterize_roi;
use crate::stereo::{detect_stereo, StereoOutput};

use super::config::PipelineConfig;
use super::dataset::FrameBundle;

/// Wall-clock milliseconds. `channels_ms`, `temporal_ms` and `fusion_ms` are
/// consecutive stages of `total_ms`; `rgb_ms` and `stereo_ms` time the two
/// channels inside the (possibly concurrent) channel stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub rgb_ms: f64,
    pub stereo_ms: f64,
    pub channels_ms: f64,
    pub temporal_ms: f64,
    pub fusion_ms: f64,
    pub total_ms: f64,
}

impl Timings {
    pub fn stage_sum(&self) -> f64 {
        self.channels_ms + self.temporal_ms + self.fusion_ms
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameResult {
    pub frame_id: u64,
    pub rgb_boxes: Vec<BBox2D>,
    pub stereo_boxes: Vec<BBox2D>,
    pub rgb_averaged: Vec<AveragedBox>,
    pub stereo_averaged: Vec<AveragedBox>,
    pub detections: Vec<Detection>,
    /// False when the stereo channel found no ground plane; detections then
    /// come from the color channel alone.
    pub ground_found: bool,
    pub timings: Timings,
}

/// Temporal state of one camera stream.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamState {
    pub rgb: TemporalWindow,
    pub stereo: TemporalWindow,
}

impl StreamState {
    pub fn new(cfg: &PipelineConfig) -> Result<Self> {
        let p = cfg.fusion.temporal();
        Ok(StreamState {
            rgb: TemporalWindow::new(p)?,
            stereo: TemporalWindow::new(p)?,
        })
    }
}

/// A validated config bound to a frame size, with its ROI rasterized.
#[derive(Clone, Debug)]
pub struct Pipeline {
    cfg: PipelineConfig,
    roi: Mask,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig, width: usize, height: usize) -> Result<Self> {
        cfg.validate_for(width, height)?;
        let roi = rasterize_roi(&cfg.roi, width, height)?;
        Ok(Pipeline { cfg, roi })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn roi_mask(&self) -> &Mask {
        &self.roi
    }

    pub fn new_state(&self) -> Result<StreamState> {
        StreamState::new(&self.cfg)
    }

    pub fn process(&self, bundle: &FrameBundle, state: &mut StreamState) -> Result<FrameResult> {
        let start = Instant::now();
        bundle.validate()?;
        bundle.rgb.same_dims(&self.roi)?;
        let rgb_params = self.cfg.rgb_params();
        let stereo_params = self.cfg.stereo_params();

        let run_rgb = || {
            let t = Instant::now();
            detect_rgb(&bundle.rgb, &self.roi, &rgb_params).map(|b| (b, ms(t)))
        };
        let run_stereo = || {
            let t = Instant::now();
            detect_stereo(&bundle.rgb, &bundle.disparity, &self.cfg.camera, &self.roi, &stereo_params).map(|s| (s, ms(t)))
        };
        let (rgb, stereo) = if self.cfg.runtime.parallel_channels {
            rayon::join(run_rgb, run_stereo)
        } else {
            (run_rgb(), run_stereo())
        };
        let (rgb_boxes, rgb_ms) = rgb?;
        let (StereoOutput { boxes: stereo_boxes, ground, .. }, stereo_ms) = stereo?;
        let channels_ms = ms(start);

        let t = Instant::now();
        let rgb_averaged = state.rgb.push(&rgb_boxes);
        let stereo_averaged = state.stereo.push(&stereo_boxes);
        let temporal_ms = ms(t);

        let t = Instant::now();
        let tag = |v: &[AveragedBox]| v.iter().map(|a| (a.bbox, a.frames_present)).collect::<Vec<_>>();
        let fused = fuse_tracked(
            &tag(&rgb_averaged),
            &tag(&stereo_averaged),
            self.cfg.fusion.dist_threshold,
            self.cfg.fusion.priority,
        );
        let detections = gate_by_roi(fused, &self.roi);
        let fusion_ms = ms(t);

        Ok(FrameResult {
            frame_id: bundle.frame_id,
            rgb_boxes,
            stereo_boxes,
            rgb_averaged,
            stereo_averaged,
            detections,
            ground_found: ground.is_some(),
            timings: Timings {
                rgb_ms,
                stereo_ms,
                channels_ms,
                temporal_ms,
                fusion_ms,
                total_ms: ms(start),
            },
        })
    }
}

/// One-off form of [`Pipeline::process`]; rasterizes the ROI on every call.
pub fn process_frame(bundle: &FrameBundle, cfg: &PipelineConfig, state: &mut StreamState) -> Result<FrameResult> {
    Pipeline::new(cfg.clone(), bundle.rgb.width(), bundle.rgb.height())?.process(bundle, state)
}
