//! RGB to HSV conversion and saturation adjustment.
//!
//! Hue is in degrees `[0, 360)`, saturation in `[0, 1]`, value in `[0, 255]`.

use serde::{Deserialize, Serialize};

use crate::grid::{Grid, ImageRgb};

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Hsv {
    pub h: f32,
    pub s: f32,
    pub v: f32,
}

pub type ImageHsv = Grid<Hsv>;

#[inline]
pub fn rgb_to_hsv_pixel([r, g, b]: [u8; 3]) -> Hsv {
    let (rf, gf, bf) = (r as f32, g as f32, b as f32);
    let v = r.max(g).max(b);
    let min = r.min(g).min(b);
    let diff = (v - min) as f32;
    let s = if v != 0 { diff / v as f32 } else { 0.0 };
    let mut h = if v == min {
        0.0
    } else if v == r {
        60.0 * (gf - bf) / diff
    } else if v == g {
        120.0 + 60.0 * (bf - rf) / diff
    } else {
        240.0 + 60.0 * (rf - gf) / diff
    };
    if h < 0.0 {
        h += 360.0;
    }
    Hsv { h, s, v: v as f32 }
}

pub fn rgb_to_hsv(img: &ImageRgb) -> ImageHsv {
    img.map(|&px| rgb_to_hsv_pixel(px))
}

/// Scales saturation by `gain`, clamping at 1.
pub fn boost_saturation(img: &ImageHsv, gain: f32) -> ImageHsv {
    img.map(|p| Hsv {
        s: (p.s * gain).min(1.0),
        ..*p
    })
}

/// Packs HSV into the common 8-bit layout: `(H / 2, S * 255, V)`.
///
/// Hue wraps so that 360 degrees maps back to 0.
pub fn encode_hsv8(img: &ImageHsv) -> Grid<[u8; 3]> {
    img.map(|p| {
        let h = (p.h / 2.0).round() as u32 % 180;
        let s = (p.s * 255.0).round().clamp(0.0, 255.0) as u8;
        let v = p.v.round().clamp(0.0, 255.0) as u8;
        [h as u8, s, v]
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primaries_and_gray() {
        assert_eq!(rgb_to_hsv_pixel([255, 0, 0]), Hsv { h: 0.0, s: 1.0, v: 255.0 });
        assert_eq!(rgb_to_hsv_pixel([0, 255, 0]), Hsv { h: 120.0, s: 1.0, v: 255.0 });
        assert_eq!(rgb_to_hsv_pixel([0, 0, 255]), Hsv { h: 240.0, s: 1.0, v: 255.0 });
        assert_eq!(rgb_to_hsv_pixel([100, 100, 100]), Hsv { h: 0.0, s: 0.0, v: 100.0 });
        assert_eq!(rgb_to_hsv_pixel([0, 0, 0]), Hsv { h: 0.0, s: 0.0, v: 0.0 });
    }

    #[test]
    fn negative_hue_wraps() {
        // magenta-ish red: V = R, G < B
        let p = rgb_to_hsv_pixel([255, 0, 128]);
        assert!((p.h - (360.0 - 60.0 * 128.0 / 255.0)).abs() < 1e-4);
    }

    #[test]
    fn saturation_boost() {
        let img = Grid::new(
            3,
            1,
            vec![
                Hsv { h: 10.0, s: 0.5, v: 3.0 },
                Hsv { h: 10.0, s: 0.8, v: 3.0 },
                Hsv { h: 10.0, s: 0.0, v: 3.0 },
            ],
        )
        .unwrap();
        let out = boost_saturation(&img, 1.5);
        let s: Vec<f32> = out.as_slice().iter().map(|p| p.s).collect();
        assert_eq!(s, vec![0.75, 1.0, 0.0]);
        assert!(out.as_slice().iter().all(|p| p.h == 10.0 && p.v == 3.0));
    }

    #[test]
    fn encode_wraps_hue() {
        let img = Grid::new(1, 1, vec![Hsv { h: 359.5, s: 1.0, v: 12.0 }]).unwrap();
        assert_eq!(encode_hsv8(&img).as_slice(), &[[0, 255, 12]]);
    }
}
