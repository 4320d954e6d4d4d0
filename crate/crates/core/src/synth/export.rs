//! Writing scenes as ordinary datasets, with truth and a matching config.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::pipeline::dataset::{create_sequence, write_frame, Intrinsics};
use crate::pipeline::PipelineConfig;

use super::render::{render_frame, GroundTruthFrame};
use super::scene::SceneSpec;

pub const TRUTH_DIR: &str = "truth";
pub const CONFIG_FILE: &str = "config.toml";
pub const SCENE_FILE: &str = "scene.json";

/// Detector configuration for a scene: its camera, ROI and mounting pitch.
pub fn scene_config(spec: &SceneSpec) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::new(spec.rig.camera, spec.roi()?, spec.rig.width);
    cfg.ground.camera_pitch_deg = spec.rig.pitch_deg;
    Ok(cfg)
}

pub fn truth_path(dir: &Path, frame_id: u64) -> PathBuf {
    dir.join(TRUTH_DIR).join(format!("{frame_id:06}.json"))
}

/// Renders `spec` into `dir` frame by frame.
pub fn write_scene(spec: &SceneSpec, seed: u64, dir: &Path) -> Result<()> {
    spec.validate()?;
    let intr = Intrinsics::from_camera(&spec.rig.camera, spec.rig.width, spec.rig.height);
    create_sequence(dir, &intr)?;
    let tdir = dir.join(TRUTH_DIR);
    fs::create_dir_all(&tdir).map_err(|e| Error::io(&tdir, e))?;
    scene_config(spec)?.save(&dir.join(CONFIG_FILE))?;
    let scene_json = serde_json::to_string_pretty(spec).expect("scenes serialize") + "\n";
    fs::write(dir.join(SCENE_FILE), scene_json).map_err(|e| Error::io(dir.join(SCENE_FILE), e))?;
    for f in 0..spec.frames {
        let (bundle, truth) = render_frame(spec, seed, f)?;
        write_frame(dir, &bundle, &intr)?;
        let p = truth_path(dir, truth.frame_id);
        let text = serde_json::to_string_pretty(&truth).expect("truth serializes") + "\n";
        fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
    }
    Ok(())
}

/// Reads every `truth/*.json` under `dir`, ordered by frame id.
pub fn read_truth(dir: &Path) -> Result<Vec<GroundTruthFrame>> {
    let tdir = dir.join(TRUTH_DIR);
    let mut out = Vec::new();
    for entry in fs::read_dir(&tdir).map_err(|e| Error::io(&tdir, e))? {
        let path = entry.map_err(|e| Error::io(&tdir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let t: GroundTruthFrame = serde_json::from_str(&text).map_err(|e| Error::Record {
            path: path.clone(),
            message: e.to_string(),
        })?;
        out.push(t);
    }
    out.sort_by_key(|t| t.frame_id);
    Ok(out)
}
