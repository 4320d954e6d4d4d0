//! Configuration, dataset I/O and end-to-end frame processing.

pub mod config;
pub mod dataset;
pub mod output;
pub mod overlay;
pub mod process;

pub use config::{ClusterParams, FusionParams, PipelineConfig, RuntimeParams};
pub use dataset::{load_sequence, FrameBundle, FrameWarning, Intrinsics, Sequence};
pub use output::{read_records, write_results, DetectionRecord, ResultWriter, RunSummary};
pub use overlay::render_overlay;
pub use process::{process_frame, FrameResult, Pipeline, StreamState, Timings};
