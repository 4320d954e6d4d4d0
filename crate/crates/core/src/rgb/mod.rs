//! Monocular obstacle channel.
//!
//! Chain: inverse-copy Pegtop blend, HSV conversion with a saturation boost,
//! median filter, graph segmentation, optional erosion, then ROI-gated
//! segment boxes. Segmentation sees HSV packed as `(H/2, S*255, V)`.

pub mod extract;
pub mod filters;
pub mod graphseg;
pub mod hsv;
pub mod morphology;
pub mod pegtop;

use serde::{Deserialize, Serialize};

use crate::bbox::BBox2D;
use crate::error::{Error, Result};
use crate::grid::{Grid, ImageRgb, Mask};

pub use extract::{extract_obstacle_bboxes, ExtractParams};
pub use filters::{gaussian_smooth, median_filter, median_filter_u8};
pub use graphseg::{graph_segment, GraphSegParams};
pub use hsv::{boost_saturation, encode_hsv8, rgb_to_hsv, Hsv, ImageHsv};
pub use morphology::{erode_labels, erode_mask, BOUNDARY_LABEL};
pub use pegtop::pegtop_softlight;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreprocParams {
    pub saturation_gain: f32,
    pub median_kernel: usize,
    pub erosion_kernel: usize,
    pub apply_erosion: bool,
}

impl Default for PreprocParams {
    fn default() -> Self {
        PreprocParams {
            saturation_gain: 1.5,
            median_kernel: 5,
            erosion_kernel: 7,
            apply_erosion: false,
        }
    }
}

impl PreprocParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.saturation_gain > 0.0) || !self.saturation_gain.is_finite() {
            return Err(Error::param("preproc.saturation_gain must be > 0"));
        }
        for (name, k) in [("median_kernel", self.median_kernel), ("erosion_kernel", self.erosion_kernel)] {
            if k == 0 || k % 2 == 0 {
                return Err(Error::param(format!("preproc.{name} must be odd, got {k}")));
            }
        }
        Ok(())
    }
}

/// Everything the monocular channel needs besides the frame and ROI.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RgbParams {
    pub preproc: PreprocParams,
    pub graphseg: GraphSegParams,
    pub extract: ExtractParams,
}

/// Runs the pre-processing chain and returns the 8-bit HSV raster fed to
/// segmentation.
pub fn preprocess(frame: &ImageRgb, pp: &PreprocParams) -> Result<Grid<[u8; 3]>> {
    pp.validate()?;
    let blended = pegtop_softlight(frame);
    let hsv = boost_saturation(&rgb_to_hsv(&blended), pp.saturation_gain);
    median_filter_u8(&encode_hsv8(&hsv), pp.median_kernel)
}

/// Pre-processes and segments `frame`; erosion applied when enabled.
pub fn segment_frame(frame: &ImageRgb, params: &RgbParams) -> Result<Grid<u32>> {
    let filtered = preprocess(frame, &params.preproc)?;
    let labels = graph_segment(&filters::to_f32(&filtered), &params.graphseg)?;
    if params.preproc.apply_erosion {
        erode_labels(labels.grid(), params.preproc.erosion_kernel)
    } else {
        Ok(labels.grid().clone())
    }
}

/// Obstacle boxes from the monocular channel.
pub fn detect_rgb(frame: &ImageRgb, roi: &Mask, params: &RgbParams) -> Result<Vec<BBox2D>> {
    frame.same_dims(roi)?;
    params.extract.validate()?;
    let labels = segment_frame(frame, params)?;
    extract_obstacle_bboxes(&labels, roi, &params.extract)
}
