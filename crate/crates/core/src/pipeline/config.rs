//! The run configuration, stored as TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{Priority, TemporalParams};
use crate::geometry::CameraModel;
use crate::rgb::{ExtractParams, GraphSegParams, PreprocParams, RgbParams};
use crate::roi::RoiPolygon;
use crate::stereo::{CloudMode, DbscanParams, GroundParams, RansacParams, SlicParams, StereoParams};

/// Reference width the fusion distance default is tuned for.
pub const REFERENCE_WIDTH: usize = 1280;
pub const DEFAULT_DIST_THRESHOLD: f64 = 40.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterParams {
    /// Smallest accepted cluster, in cloud points.
    pub min_cluster_size: usize,
    /// Points farther than this (meters) are discarded.
    pub max_range: f64,
    pub cloud_mode: CloudMode,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams {
            min_cluster_size: 8,
            max_range: 15.0,
            cloud_mode: CloudMode::Sparse,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionParams {
    /// Center distance (px) under which boxes merge; also the temporal
    /// match radius.
    pub dist_threshold: f64,
    pub window: usize,
    pub min_presence: usize,
    pub priority: Priority,
}

impl Default for FusionParams {
    fn default() -> Self {
        FusionParams {
            dist_threshold: DEFAULT_DIST_THRESHOLD,
            window: 5,
            min_presence: 3,
            priority: Priority::StereoFirst,
        }
    }
}

impl FusionParams {
    /// Defaults with the distance threshold scaled to `width`.
    pub fn for_width(width: usize) -> Self {
        FusionParams {
            dist_threshold: DEFAULT_DIST_THRESHOLD * width as f64 / REFERENCE_WIDTH as f64,
            ..Default::default()
        }
    }

    pub fn temporal(&self) -> TemporalParams {
        TemporalParams {
            window: self.window,
            match_radius: self.dist_threshold,
            min_presence: self.min_presence,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuntimeParams {
    /// Run the two channels of a frame concurrently.
    pub parallel_channels: bool,
    /// Worker threads; 0 picks the core count.
    pub threads: usize,
}

impl Default for RuntimeParams {
    fn default() -> Self {
        RuntimeParams {
            parallel_channels: true,
            threads: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub camera: CameraModel<f64>,
    pub roi: RoiPolygon,
    #[serde(default)]
    pub preproc: PreprocParams,
    #[serde(default)]
    pub graphseg: GraphSegParams,
    #[serde(default)]
    pub extract: ExtractParams,
    #[serde(default = "pipeline_slic")]
    pub slic: SlicParams,
    #[serde(default)]
    pub ransac: RansacParams,
    #[serde(default)]
    pub ground: GroundParams,
    #[serde(default)]
    pub dbscan: DbscanParams,
    #[serde(default)]
    pub cluster: ClusterParams,
    #[serde(default)]
    pub fusion: FusionParams,
    #[serde(default)]
    pub runtime: RuntimeParams,
}

fn pipeline_slic() -> SlicParams {
    SlicParams {
        region_size: 10,
        ..SlicParams::default()
    }
}

impl PipelineConfig {
    /// Defaults for a camera and ROI. Superpixels are smaller than the
    /// segmentation default so that distant obstacles still yield enough
    /// cloud points to form a cluster.
    pub fn new(camera: CameraModel<f64>, roi: RoiPolygon, width: usize) -> Self {
        PipelineConfig {
            camera,
            roi,
            preproc: PreprocParams::default(),
            graphseg: GraphSegParams::default(),
            extract: ExtractParams::default(),
            slic: pipeline_slic(),
            ransac: RansacParams::default(),
            ground: GroundParams::default(),
            dbscan: DbscanParams::default(),
            cluster: ClusterParams::default(),
            fusion: FusionParams::for_width(width),
            runtime: RuntimeParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.camera.validate()?;
        self.preproc.validate()?;
        self.graphseg.validate()?;
        self.extract.validate()?;
        self.slic.validate()?;
        self.ransac.validate()?;
        self.dbscan.validate()?;
        self.fusion.temporal().validate()?;
        let g = &self.ground;
        if !(g.min_height >= 0.0 && g.max_height > g.min_height) {
            return Err(Error::Config("ground height band must satisfy 0 <= min < max".into()));
        }
        if !(g.max_tilt_deg > 0.0 && g.max_tilt_deg <= 90.0) {
            return Err(Error::Config("ground max_tilt_deg must be in (0, 90]".into()));
        }
        if !g.camera_pitch_deg.is_finite() {
            return Err(Error::Config("camera pitch must be finite".into()));
        }
        if self.cluster.min_cluster_size == 0 || !(self.cluster.max_range > 0.0) {
            return Err(Error::Config("cluster min size and max range must be positive".into()));
        }
        if self.ransac.seed > i64::MAX as u64 {
            return Err(Error::Config("ransac seed must fit in a signed 64-bit integer".into()));
        }
        if !self.roi.is_simple() {
            return Err(Error::InvalidPolygon("ROI polygon self-intersects".into()));
        }
        Ok(())
    }

    /// Checks the config against a frame size.
    pub fn validate_for(&self, width: usize, height: usize) -> Result<()> {
        self.validate()?;
        self.camera.validate_for(width, height)?;
        if !self.roi.within(width, height) {
            return Err(Error::InvalidPolygon(format!("ROI extends beyond the {width}x{height} frame")));
        }
        Ok(())
    }

    pub fn rgb_params(&self) -> RgbParams {
        RgbParams {
            preproc: self.preproc,
            graphseg: self.graphseg,
            extract: self.extract,
        }
    }

    pub fn stereo_params(&self) -> StereoParams {
        StereoParams {
            slic: self.slic,
            ransac: self.ransac,
            ground: self.ground,
            dbscan: self.dbscan,
            min_cluster_size: self.cluster.min_cluster_size,
            max_range: self.cluster.max_range,
            cloud_mode: self.cluster.cloud_mode,
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?).map_err(|e| Error::io(path, e))
    }
}
