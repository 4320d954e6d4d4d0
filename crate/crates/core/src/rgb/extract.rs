//! Turns a segmentation into obstacle boxes inside the ROI.

use serde::{Deserialize, Serialize};

use crate::bbox::{BBox2D, Channel};
use crate::error::{Error, Result};
use crate::grid::{Grid, Mask};
use crate::rgb::morphology::BOUNDARY_LABEL;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractParams {
    /// Smallest segment, in pixels, reported as an obstacle.
    pub min_area: usize,
    /// Largest segment as a fraction of the frame area.
    pub max_area_fraction: f64,
}

impl Default for ExtractParams {
    fn default() -> Self {
        ExtractParams {
            min_area: 64,
            max_area_fraction: 0.25,
        }
    }
}

impl ExtractParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_area_fraction > 0.0 && self.max_area_fraction <= 1.0) {
            return Err(Error::param("extract.max_area_fraction must be in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
struct SegStats {
    count: usize,
    in_roi: usize,
    x0: usize,
    y0: usize,
    x1: usize,
    y1: usize,
}

/// Emits the tight box of every segment whose size is within bounds and whose
/// box center lies in `roi`. The largest segment touching the ROI is taken to
/// be the ground and skipped. Pixels labeled [`BOUNDARY_LABEL`] are ignored.
pub fn extract_obstacle_bboxes(
    labels: &Grid<u32>,
    roi: &Mask,
    params: &ExtractParams,
) -> Result<Vec<BBox2D>> {
    labels.same_dims(roi)?;
    let (w, h) = labels.dims();
    let bound = labels
        .as_slice()
        .iter()
        .filter(|&&l| l != BOUNDARY_LABEL)
        .max()
        .map_or(0, |&m| m as usize + 1);
    let mut stats: Vec<Option<SegStats>> = vec![None; bound];
    for y in 0..h {
        for x in 0..w {
            let l = *labels.get(x, y);
            if l == BOUNDARY_LABEL {
                continue;
            }
            let inside = *roi.get(x, y) as usize;
            let s = stats[l as usize].get_or_insert(SegStats {
                count: 0,
                in_roi: 0,
                x0: x,
                y0: y,
                x1: x,
                y1: y,
            });
            s.count += 1;
            s.in_roi += inside;
            s.x0 = s.x0.min(x);
            s.x1 = s.x1.max(x);
            s.y0 = s.y0.min(y);
            s.y1 = s.y1.max(y);
        }
    }

    let ground = stats
        .iter()
        .enumerate()
        .filter_map(|(l, s)| s.filter(|s| s.in_roi > 0).map(|s| (l, s.count)))
        // Largest wins; ties go to the lowest label.
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(l, _)| l);
    let Some(ground) = ground else {
        return Ok(Vec::new());
    };

    let max_area = params.max_area_fraction * (w * h) as f64;
    let mut out = Vec::new();
    for (l, s) in stats.iter().enumerate() {
        let Some(s) = s else { continue };
        if l == ground || s.count < params.min_area || s.count as f64 > max_area {
            continue;
        }
        let b = BBox2D::new(s.x0 as i32, s.y0 as i32, s.x1 as i32, s.y1 as i32, Channel::Rgb);
        let (cx, cy) = b.center_pixel();
        if *roi.get(cx as usize, cy as usize) {
            out.push(b);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scene(box_at: (usize, usize), side: usize) -> Grid<u32> {
        Grid::from_fn(100, 80, |x, y| {
            let inside = (box_at.0..box_at.0 + side).contains(&x) && (box_at.1..box_at.1 + side).contains(&y);
            if inside {
                1
            } else if y < 10 {
                2
            } else {
                0
            }
        })
    }

    #[test]
    fn single_box_tight() {
        let labels = scene((30, 30), 30);
        let roi = Grid::from_fn(100, 80, |_, y| y >= 10);
        let out = extract_obstacle_bboxes(&labels, &roi, &ExtractParams::default()).unwrap();
        assert_eq!(out, vec![BBox2D::new(30, 30, 59, 59, Channel::Rgb)]);
    }

    #[test]
    fn box_outside_roi_dropped() {
        let labels = scene((30, 30), 30);
        let roi = Grid::from_fn(100, 80, |x, y| y >= 10 && x >= 70);
        let out = extract_obstacle_bboxes(&labels, &roi, &ExtractParams::default()).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn small_segment_dropped_and_empty_roi() {
        let mut labels = Grid::filled(40, 40, 0u32);
        for (x, y) in [(10, 10), (11, 10), (10, 11)] {
            *labels.get_mut(x, y) = 1;
        }
        let roi = Grid::filled(40, 40, true);
        let p = ExtractParams { min_area: 50, ..Default::default() };
        assert!(extract_obstacle_bboxes(&labels, &roi, &p).unwrap().is_empty());
        let none = Grid::filled(40, 40, false);
        assert!(extract_obstacle_bboxes(&labels, &none, &p).unwrap().is_empty());
    }

    #[test]
    fn oversized_segment_dropped() {
        // Second-largest segment covers 40% of the frame.
        let labels = Grid::from_fn(10, 10, |x, _| if x < 5 { 0 } else if x < 9 { 1 } else { 2 });
        let roi = Grid::filled(10, 10, true);
        let p = ExtractParams { min_area: 1, max_area_fraction: 0.25 };
        let out = extract_obstacle_bboxes(&labels, &roi, &p).unwrap();
        assert_eq!(out, vec![BBox2D::new(9, 0, 9, 9, Channel::Rgb)]);
    }

    #[test]
    fn boundary_pixels_ignored() {
        let mut labels = scene((30, 30), 30);
        for x in 0..100 {
            *labels.get_mut(x, 45) = BOUNDARY_LABEL;
        }
        let roi = Grid::from_fn(100, 80, |_, y| y >= 10);
        let out = extract_obstacle_bboxes(&labels, &roi, &ExtractParams::default()).unwrap();
        assert_eq!(out, vec![BBox2D::new(30, 30, 59, 59, Channel::Rgb)]);
    }
}
