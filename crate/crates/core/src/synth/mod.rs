//! Synthetic scenes with exact ground truth, and detection scoring.

pub mod eval;
pub mod render;
pub mod scene;
pub mod suites;

pub use eval::{evaluate, match_frame, FrameMetrics, Metrics, ObstacleStats};
pub use render::{render_depth, render_frame, render_scene, GroundTruthFrame, Surface, TruthBox};
pub use scene::{DisparityWarp, Floor, Obstacle, Rig, SceneSpec, Wall};
pub use suites::{scene_seed, standard_suites, suite_by_name, suites_hash, Suite, SUITE_VERSION};
pub mod bench;
pub mod export;

pub use bench::{run_scene, score, SceneRun, Stage, WARMUP_FRAMES};
pub use export::{read_truth, scene_config, write_scene};
