//! Per-frame detection records and the run summary.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bbox::BBox2D;
use crate::error::{Error, Result};
use crate::fusion::{AveragedBox, Detection};

use super::dataset::FrameWarning;
use super::process::{FrameResult, Timings};

pub const RECORD_SCHEMA: u32 = 1;
pub const DETECTIONS_DIR: &str = "detections";
pub const SUMMARY_FILE: &str = "summary.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything about a frame except its timings, so that records are
/// byte-identical between runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionRecord {
    pub schema: u32,
    pub frame_id: u64,
    pub ground_found: bool,
    pub rgb_boxes: Vec<BBox2D>,
    pub stereo_boxes: Vec<BBox2D>,
    pub rgb_averaged: Vec<AveragedBox>,
    pub stereo_averaged: Vec<AveragedBox>,
    pub detections: Vec<Detection>,
}

impl From<&FrameResult> for DetectionRecord {
    fn from(r: &FrameResult) -> Self {
        DetectionRecord {
            schema: RECORD_SCHEMA,
            frame_id: r.frame_id,
            ground_found: r.ground_found,
            rgb_boxes: r.rgb_boxes.clone(),
            stereo_boxes: r.stereo_boxes.clone(),
            rgb_averaged: r.rgb_averaged.clone(),
            stereo_averaged: r.stereo_averaged.clone(),
            detections: r.detections.clone(),
        }
    }
}

impl DetectionRecord {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("records serialize");
        s.push('\n');
        s
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Record {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameFailure {
    pub frame_id: u64,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameTiming {
    pub frame_id: u64,
    #[serde(flatten)]
    pub timings: Timings,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema: u32,
    pub frames: usize,
    pub detections: usize,
    pub frames_without_ground: usize,
    pub mean_timings: Timings,
    pub frame_timings: Vec<FrameTiming>,
    pub skipped: Vec<FrameWarning>,
    pub failures: Vec<FrameFailure>,
}

fn mean_timings(ts: &[FrameTiming]) -> Timings {
    if ts.is_empty() {
        return Timings::default();
    }
    let n = ts.len() as f64;
    let avg = |f: fn(&Timings) -> f64| ts.iter().map(|t| f(&t.timings)).sum::<f64>() / n;
    Timings {
        rgb_ms: avg(|t| t.rgb_ms),
        stereo_ms: avg(|t| t.stereo_ms),
        channels_ms: avg(|t| t.channels_ms),
        temporal_ms: avg(|t| t.temporal_ms),
        fusion_ms: avg(|t| t.fusion_ms),
        total_ms: avg(|t| t.total_ms),
    }
}

pub fn record_path(out_dir: &Path, frame_id: u64) -> PathBuf {
    out_dir.join(DETECTIONS_DIR).join(format!("{frame_id:06}.json"))
}

/// Streams records into `out_dir/detections/` and finishes with a summary.
/// When a write fails, a manifest of the files already written is left
/// behind before the error is returned.
pub struct ResultWriter {
    out_dir: PathBuf,
    written: Vec<PathBuf>,
    timings: Vec<FrameTiming>,
    detections: usize,
    no_ground: usize,
    failures: Vec<FrameFailure>,
}

impl ResultWriter {
    pub fn create(out_dir: &Path) -> Result<Self> {
        let d = out_dir.join(DETECTIONS_DIR);
        fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
        Ok(ResultWriter {
            out_dir: out_dir.to_path_buf(),
            written: Vec::new(),
            timings: Vec::new(),
            detections: 0,
            no_ground: 0,
            failures: Vec::new(),
        })
    }

    fn fail(&self, err: Error) -> Error {
        let manifest = serde_json::json!({ "complete": false, "written": self.written });
        let _ = fs::write(self.out_dir.join(MANIFEST_FILE), format!("{manifest:#}\n"));
        err
    }

    pub fn push(&mut self, result: &FrameResult) -> Result<PathBuf> {
        let path = record_path(&self.out_dir, result.frame_id);
        if let Err(e) = fs::write(&path, DetectionRecord::from(result).to_json()) {
            return Err(self.fail(Error::io(&path, e)));
        }
        self.written.push(path.clone());
        self.timings.push(FrameTiming {
            frame_id: result.frame_id,
            timings: result.timings,
        });
        self.detections += result.detections.len();
        self.no_ground += usize::from(!result.ground_found);
        Ok(path)
    }

    pub fn record_failure(&mut self, frame_id: u64, err: &Error) {
        self.failures.push(FrameFailure {
            frame_id,
            error: err.to_string(),
        });
    }

    pub fn finish(self, skipped: Vec<FrameWarning>) -> Result<RunSummary> {
        let summary = RunSummary {
            schema: RECORD_SCHEMA,
            frames: self.timings.len(),
            detections: self.detections,
            frames_without_ground: self.no_ground,
            mean_timings: mean_timings(&self.timings),
            frame_timings: self.timings.clone(),
            skipped,
            failures: self.failures.clone(),
        };
        let path = self.out_dir.join(SUMMARY_FILE);
        let text = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
        if let Err(e) = fs::write(&path, text) {
            return Err(self.fail(Error::io(&path, e)));
        }
        Ok(summary)
    }
}

/// Writes every result plus the summary.
pub fn write_results(results: &[FrameResult], out_dir: &Path) -> Result<RunSummary> {
    let mut w = ResultWriter::create(out_dir)?;
    for r in results {
        w.push(r)?;
    }
    w.finish(Vec::new())
}

/// Reads `out_dir/detections/*.json` in frame order.
pub fn read_records(out_dir: &Path) -> Result<Vec<DetectionRecord>> {
    let dir = out_dir.join(DETECTIONS_DIR);
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(|e| Error::io(&dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("json"))
        .collect();
    paths.sort();
    let mut out: Vec<DetectionRecord> = paths.iter().map(|p| DetectionRecord::read(p)).collect::<Result<_>>()?;
    out.sort_by_key(|r| r.frame_id);
    Ok(out)
}
