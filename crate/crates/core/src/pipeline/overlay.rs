//! Debug raster: ROI tinted pink, color-channel boxes blue, stereo boxes
//! green, final detections with a green-inside-blue double outline.

use crate::bbox::BBox2D;
use crate::grid::{ImageRgb, Mask};

use super::process::FrameResult;

pub const ROI_TINT: [u8; 3] = [255, 105, 180];
pub const RGB_COLOR: [u8; 3] = [0, 0, 255];
pub const STEREO_COLOR: [u8; 3] = [0, 255, 0];
/// Tint weight in tenths.
const ROI_ALPHA_TENTHS: u16 = 3;

fn tint(c: [u8; 3]) -> [u8; 3] {
    let mut out = [0u8; 3];
    for k in 0..3 {
        let v = (10 - ROI_ALPHA_TENTHS) * c[k] as u16 + ROI_ALPHA_TENTHS * ROI_TINT[k] as u16;
        out[k] = ((v + 5) / 10) as u8;
    }
    out
}

/// Draws the outline of `b` grown by `grow` pixels, clipped to the image.
fn outline(img: &mut ImageRgb, b: &BBox2D, grow: i32, color: [u8; 3]) {
    let (w, h) = (img.width() as i32, img.height() as i32);
    let (x0, y0, x1, y1) = (b.x_min - grow, b.y_min - grow, b.x_max + grow, b.y_max + grow);
    let mut put = |x: i32, y: i32| {
        if x >= 0 && y >= 0 && x < w && y < h {
            *img.get_mut(x as usize, y as usize) = color;
        }
    };
    for x in x0..=x1 {
        put(x, y0);
        put(x, y1);
    }
    for y in y0..=y1 {
        put(x0, y);
        put(x1, y);
    }
}

pub fn render_overlay(frame: &ImageRgb, result: &FrameResult, roi: &Mask) -> ImageRgb {
    let mut img = frame.clone();
    for (px, &inside) in img.as_mut_slice().iter_mut().zip(roi.as_slice()) {
        if inside {
            *px = tint(*px);
        }
    }
    for a in &result.rgb_averaged {
        outline(&mut img, &a.bbox, 0, RGB_COLOR);
    }
    for a in &result.stereo_averaged {
        outline(&mut img, &a.bbox, 0, STEREO_COLOR);
    }
    for d in &result.detections {
        outline(&mut img, &d.bbox, 2, RGB_COLOR);
        outline(&mut img, &d.bbox, 3, RGB_COLOR);
        outline(&mut img, &d.bbox, 4, STEREO_COLOR);
        outline(&mut img, &d.bbox, 5, STEREO_COLOR);
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bbox::Channel;
    use crate::fusion::Detection;
    use crate::grid::Grid;
    use crate::pipeline::process::Timings;
    use sha2::{Digest, Sha256};
    use std::collections::BTreeSet;

    fn frame() -> ImageRgb {
        Grid::from_fn(64, 48, |x, y| [(x * 4) as u8, (y * 5) as u8, 90])
    }

    fn roi() -> Mask {
        Grid::from_fn(64, 48, |x, y| y > 20 && x > 4 && x < 60)
    }

    fn result(dets: Vec<Detection>) -> FrameResult {
        FrameResult {
            frame_id: 0,
            rgb_boxes: Vec::new(),
            stereo_boxes: Vec::new(),
            rgb_averaged: Vec::new(),
            stereo_averaged: Vec::new(),
            detections: dets,
            ground_found: true,
            timings: Timings::default(),
        }
    }

    fn det() -> Detection {
        Detection {
            bbox: BBox2D::new(20, 25, 35, 40, Channel::Fused),
            sources: BTreeSet::from([Channel::Rgb, Channel::Stereo]),
            frames_present: 5,
        }
    }

    #[test]
    fn no_detections_only_tints_roi() {
        let (f, m) = (frame(), roi());
        let out = render_overlay(&f, &result(Vec::new()), &m);
        for i in 0..f.len() {
            let changed = out.as_slice()[i] != f.as_slice()[i];
            assert!(!changed || m.as_slice()[i]);
        }
        assert_eq!(*out.get(30, 30), tint(*f.get(30, 30)));
    }

    #[test]
    fn detection_changes_only_outline_pixels() {
        let (f, m) = (frame(), roi());
        let base = render_overlay(&f, &result(Vec::new()), &m);
        let out = render_overlay(&f, &result(vec![det()]), &m);
        let b = det().bbox;
        for y in 0..48 {
            for x in 0..64 {
                if out.get(x, y) != base.get(x, y) {
                    let (x, y) = (x as i32, y as i32);
                    let ring = |g: i32| {
                        (x == b.x_min - g || x == b.x_max + g) && (b.y_min - g..=b.y_max + g).contains(&y)
                            || (y == b.y_min - g || y == b.y_max + g) && (b.x_min - g..=b.x_max + g).contains(&x)
                    };
                    assert!((2..=5).any(ring), "({x}, {y})");
                }
            }
        }
        assert_eq!(*out.get(18, 30), RGB_COLOR);
        assert_eq!(*out.get(15, 30), STEREO_COLOR);
    }

    #[test]
    fn golden_raster() {
        let out = render_overlay(&frame(), &result(vec![det()]), &roi());
        let bytes: Vec<u8> = out.as_slice().iter().flatten().copied().collect();
        let hex: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(hex, GOLDEN);
    }

    const GOLDEN: &str = "84144f62e7283d6ffcfb9d59428137f7e7d811363d988eeda7b25f011dd84798";
}
