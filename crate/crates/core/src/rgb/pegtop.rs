//! Pegtop soft-light blend of an image with its own inverse.

use std::sync::OnceLock;

use crate::grid::ImageRgb;

/// Pegtop soft light on normalized intensities: `(1 - 2b) a^2 + 2 b a`.
#[inline]
pub fn pegtop(a: f64, b: f64) -> f64 {
    (1.0 - 2.0 * b) * a * a + 2.0 * b * a
}

/// Blends one 8-bit intensity with its inverse (`b = 1 - a`), rounding half up.
#[inline]
pub fn pegtop_inverse_u8(raw: u8) -> u8 {
    let a = raw as f64 / 255.0;
    let out = 255.0 * pegtop(a, 1.0 - a);
    (out + 0.5).floor().clamp(0.0, 255.0) as u8
}

fn lut() -> &'static [u8; 256] {
    static LUT: OnceLock<[u8; 256]> = OnceLock::new();
    LUT.get_or_init(|| {
        let mut t = [0u8; 256];
        for (i, v) in t.iter_mut().enumerate() {
            *v = pegtop_inverse_u8(i as u8);
        }
        t
    })
}

/// Applies the inverse-copy Pegtop blend to every channel of every pixel.
pub fn pegtop_softlight(img: &ImageRgb) -> ImageRgb {
    let t = lut();
    img.map(|&[r, g, b]| [t[r as usize], t[g as usize], t[b as usize]])
}
