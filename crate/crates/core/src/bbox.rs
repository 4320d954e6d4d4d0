//! Axis-aligned pixel boxes.
//!
//! Coordinates are inclusive integer pixel bounds: a box `(x0, y0, x1, y1)`
//! covers every pixel `x0..=x1` by `y0..=y1`, so its pixel area is
//! `(x1 - x0 + 1) * (y1 - y0 + 1)`.

use serde::{Deserialize, Serialize};

/// Which detector produced a box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Rgb,
    Stereo,
    Fused,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BBox2D {
    pub x_min: i32,
    pub y_min: i32,
    pub x_max: i32,
    pub y_max: i32,
    pub channel: Channel,
}

impl BBox2D {
    /// Builds a box, swapping reversed coordinates into order.
    pub fn new(x0: i32, y0: i32, x1: i32, y1: i32, channel: Channel) -> Self {
        BBox2D {
            x_min: x0.min(x1),
            y_min: y0.min(y1),
            x_max: x0.max(x1),
            y_max: y0.max(y1),
            channel,
        }
    }

    pub fn with_channel(self, channel: Channel) -> Self {
        BBox2D { channel, ..self }
    }

    #[inline]
    pub fn width(&self) -> i64 {
        (self.x_max - self.x_min) as i64 + 1
    }

    #[inline]
    pub fn height(&self) -> i64 {
        (self.y_max - self.y_min) as i64 + 1
    }

    #[inline]
    pub fn area(&self) -> i64 {
        self.width() * self.height()
    }

    #[inline]
    pub fn center(&self) -> (f64, f64) {
        bbox_center(self)
    }

    pub fn contains(&self, other: &BBox2D) -> bool {
        self.x_min <= other.x_min
            && self.y_min <= other.y_min
            && self.x_max >= other.x_max
            && self.y_max >= other.y_max
    }

    /// Clamps into a `width` x `height` frame. Returns `None` when the box lies
    /// entirely outside.
    pub fn clamp_to(&self, width: usize, height: usize) -> Option<BBox2D> {
        let (w, h) = (width as i32, height as i32);
        if self.x_max < 0 || self.y_max < 0 || self.x_min >= w || self.y_min >= h {
            return None;
        }
        Some(BBox2D {
            x_min: self.x_min.max(0),
            y_min: self.y_min.max(0),
            x_max: self.x_max.min(w - 1),
            y_max: self.y_max.min(h - 1),
            channel: self.channel,
        })
    }

    /// Pixel whose area contains the box center.
    pub fn center_pixel(&self) -> (i32, i32) {
        // Inclusive bounds: the midpoint of pixel indices is the center pixel.
        (
            (self.x_min + self.x_max).div_euclid(2),
            (self.y_min + self.y_max).div_euclid(2),
        )
    }
}

/// Midpoint of the box in pixel-index coordinates.
pub fn bbox_center(b: &BBox2D) -> (f64, f64) {
    (
        (b.x_min as f64 + b.x_max as f64) / 2.0,
        (b.y_min as f64 + b.y_max as f64) / 2.0,
    )
}

/// Intersection over union, counted in pixels.
pub fn bbox_iou(a: &BBox2D, b: &BBox2D) -> f64 {
    let ix0 = a.x_min.max(b.x_min);
    let iy0 = a.y_min.max(b.y_min);
    let ix1 = a.x_max.min(b.x_max);
    let iy1 = a.y_max.min(b.y_max);
    if ix0 > ix1 || iy0 > iy1 {
        return 0.0;
    }
    let inter = (ix1 - ix0) as i64 + 1;
    let inter = inter * ((iy1 - iy0) as i64 + 1);
    let union = a.area() + b.area() - inter;
    inter as f64 / union as f64
}

/// Smallest box containing both inputs, tagged as fused.
pub fn bbox_union(a: &BBox2D, b: &BBox2D) -> BBox2D {
    BBox2D {
        x_min: a.x_min.min(b.x_min),
        y_min: a.y_min.min(b.y_min),
        x_max: a.x_max.max(b.x_max),
        y_max: a.y_max.max(b.y_max),
        channel: Channel::Fused,
    }
}

/// Euclidean distance between box centers.
pub fn center_distance(a: &BBox2D, b: &BBox2D) -> f64 {
    let (ax, ay) = bbox_center(a);
    let (bx, by) = bbox_center(b);
    (ax - bx).hypot(ay - by)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(x0: i32, y0: i32, x1: i32, y1: i32) -> BBox2D {
        BBox2D::new(x0, y0, x1, y1, Channel::Rgb)
    }

    #[test]
    fn centers() {
        assert_eq!(bbox_center(&b(0, 0, 10, 10)), (5.0, 5.0));
        assert_eq!(bbox_center(&b(3, 3, 3, 3)), (3.0, 3.0));
        assert_eq!(bbox_center(&b(10, 20, 30, 60)), (20.0, 40.0));
    }

    #[test]
    fn iou_basics() {
        let a = b(0, 0, 10, 10);
        assert_eq!(bbox_iou(&a, &a), 1.0);
        assert_eq!(bbox_iou(&a, &b(20, 20, 30, 30)), 0.0);
        // Inclusive bounds: each box holds 11x11 pixels and they share 6x11.
        let iou = bbox_iou(&a, &b(5, 0, 15, 10));
        assert!((iou - 66.0 / 176.0).abs() < 1e-12, "{iou}");
        // A degenerate single-pixel box still overlaps itself fully.
        let p = b(3, 3, 3, 3);
        assert_eq!(bbox_iou(&p, &p), 1.0);
    }

    #[test]
    fn union_examples() {
        let u = bbox_union(&b(0, 0, 5, 5), &b(3, 3, 8, 8));
        assert_eq!((u.x_min, u.y_min, u.x_max, u.y_max), (0, 0, 8, 8));
        assert_eq!(u.channel, Channel::Fused);
        let a = b(2, 4, 6, 9);
        assert_eq!(bbox_union(&a, &a), a.with_channel(Channel::Fused));
        let u = bbox_union(&b(0, 0, 1, 1), &b(9, 9, 10, 10));
        assert_eq!((u.x_min, u.y_min, u.x_max, u.y_max), (0, 0, 10, 10));
    }

    #[test]
    fn clamp_and_center_pixel() {
        let c = b(-5, -5, 5, 5).clamp_to(4, 4).unwrap();
        assert_eq!((c.x_min, c.y_min, c.x_max, c.y_max), (0, 0, 3, 3));
        assert!(b(10, 10, 12, 12).clamp_to(4, 4).is_none());
        assert_eq!(b(0, 0, 3, 3).center_pixel(), (1, 1));
    }

    fn arb_box() -> impl Strategy<Value = BBox2D> {
        (0i32..100, 0i32..100, 0i32..50, 0i32..50)
            .prop_map(|(x, y, w, h)| b(x, y, x + w, y + h))
    }

    proptest! {
        #[test]
        fn iou_symmetric_and_bounded(a in arb_box(), c in arb_box()) {
            let ab = bbox_iou(&a, &c);
            prop_assert_eq!(ab, bbox_iou(&c, &a));
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert_eq!(bbox_iou(&a, &a), 1.0);
        }

        #[test]
        fn union_laws(a in arb_box(), c in arb_box(), d in arb_box()) {
            prop_assert_eq!(bbox_union(&a, &c), bbox_union(&c, &a));
            prop_assert_eq!(
                bbox_union(&bbox_union(&a, &c), &d),
                bbox_union(&a, &bbox_union(&c, &d))
            );
            let u = bbox_union(&a, &c);
            prop_assert_eq!(bbox_union(&u, &u), u);
            prop_assert!(u.contains(&a) && u.contains(&c));
        }
    }
}
