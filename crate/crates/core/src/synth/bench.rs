//! Running the detector over rendered scenes and scoring each output stage.

use serde::{Deserialize, Serialize};

use crate::bbox::BBox2D;
use crate::error::Result;
use crate::pipeline::{FrameResult, Pipeline, PipelineConfig};

use super::eval::{evaluate, Metrics};
use super::render::{render_frame, GroundTruthFrame};
use super::scene::SceneSpec;

/// Frames before the temporal window is full are not scored.
pub const WARMUP_FRAMES: u64 = 4;

/// Which boxes of a [`FrameResult`] to score.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Fused,
    Rgb,
    Stereo,
}

impl Stage {
    pub fn boxes(self, r: &FrameResult) -> Vec<BBox2D> {
        match self {
            Stage::Fused => r.detections.iter().map(|d| d.bbox).collect(),
            Stage::Rgb => r.rgb_averaged.iter().map(|a| a.bbox).collect(),
            Stage::Stereo => r.stereo_averaged.iter().map(|a| a.bbox).collect(),
        }
    }
}

pub struct SceneRun {
    pub results: Vec<FrameResult>,
    pub truth: Vec<GroundTruthFrame>,
}

/// Renders and processes `spec` frame by frame with a fresh stream state.
pub fn run_scene(spec: &SceneSpec, seed: u64, cfg: &PipelineConfig) -> Result<SceneRun> {
    spec.validate()?;
    let pipeline = Pipeline::new(cfg.clone(), spec.rig.width, spec.rig.height)?;
    let mut state = pipeline.new_state()?;
    let mut results = Vec::with_capacity(spec.frames);
    let mut truth = Vec::with_capacity(spec.frames);
    for f in 0..spec.frames {
        let (bundle, t) = render_frame(spec, seed, f)?;
        results.push(pipeline.process(&bundle, &mut state)?);
        truth.push(t);
    }
    Ok(SceneRun { results, truth })
}

/// Scores one stage over the scored frames of several runs. Frame ids are
/// made unique across runs.
pub fn score(runs: &[SceneRun], stage: Stage, iou: f64) -> Result<Metrics> {
    let mut dets = Vec::new();
    let mut truth = Vec::new();
    for (k, run) in runs.iter().enumerate() {
        let offset = k as u64 * 1_000_000;
        for (r, t) in run.results.iter().zip(&run.truth) {
            if r.frame_id < WARMUP_FRAMES {
                continue;
            }
            dets.push((offset + r.frame_id, stage.boxes(r)));
            let mut t = t.clone();
            t.frame_id += offset;
            truth.push(t);
        }
    }
    evaluate(&dets, &truth, iou)
}
