//! Region-of-interest polygons and their rasterization.
//!
//! Polygon vertices live in continuous image coordinates where pixel `(x, y)`
//! covers `[x, x+1) x [y, y+1)`; a pixel belongs to the ROI when its center
//! `(x + 0.5, y + 0.5)` is inside under the even-odd rule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Mask;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct RoiPolygon {
    vertices: Vec<[f64; 2]>,
}

impl RoiPolygon {
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidPolygon(format!(
                "need at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPolygon("non-finite vertex".into()));
        }
        Ok(RoiPolygon { vertices })
    }

    /// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        RoiPolygon {
            vertices: vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]],
        }
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    /// True when no two non-adjacent edges touch.
    pub fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        let edge = |i: usize| (self.vertices[i], self.vertices[(i + 1) % n]);
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                let (a, b) = edge(i);
                let (c, d) = edge(j);
                if segments_intersect(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }

    /// True when every vertex lies within a `width` x `height` frame.
    pub fn within(&self, width: usize, height: usize) -> bool {
        self.vertices.iter().all(|&[x, y]| {
            (0.0..=width as f64).contains(&x) && (0.0..=height as f64).contains(&y)
        })
    }

    /// Even-odd containment test for an arbitrary point.
    pub fn contains(&self, px: f64, py: f64) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let [xi, yi] = self.vertices[i];
            let [xj, yj] = self.vertices[j];
            if (yi > py) != (yj > py) && px < crossing_x(xi, yi, xj, yj, py) {
                inside = !inside;
            }
            j = i;
        }
        inside
    }
}

impl TryFrom<Vec<[f64; 2]>> for RoiPolygon {
    type Error = Error;

    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        RoiPolygon::new(v)
    }
}

impl From<RoiPolygon> for Vec<[f64; 2]> {
    fn from(p: RoiPolygon) -> Self {
        p.vertices
    }
}

#[inline]
fn crossing_x(xi: f64, yi: f64, xj: f64, yj: f64, py: f64) -> f64 {
    (xj - xi) * (py - yi) / (yj - yi) + xi
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

fn segments_intersect(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// Rasterizes `roi` into a `width` x `height` mask by pixel-center containment.
pub fn rasterize_roi(roi: &RoiPolygon, width: usize, height: usize) -> Result<Mask> {
    if roi.vertices.len() < 3 {
        return Err(Error::InvalidPolygon("need at least 3 vertices".into()));
    }
    if width == 0 || height == 0 {
        return Err(Error::param("mask dimensions must be positive"));
    }
    let n = roi.vertices.len();
    let mut data = vec![false; width * height];
    let mut crossings: Vec<f64> = Vec::with_capacity(n);
    for y in 0..height {
        let py = y as f64 + 0.5;
        crossings.clear();
        let mut j = n - 1;
        for i in 0..n {
            let [xi, yi] = roi.vertices[i];
            let [xj, yj] = roi.vertices[j];
            if (yi > py) != (yj > py) {
                crossings.push(crossing_x(xi, yi, xj, yj, py));
            }
            j = i;
        }
        if crossings.is_empty() {
            continue;
        }
        crossings.sort_by(|a, b| a.total_cmp(b));
        // A center is inside iff an odd number of crossings lie strictly to its right.
        let row = &mut data[y * width..(y + 1) * width];
        let mut first_right = 0usize;
        for (x, cell) in row.iter_mut().enumerate() {
            let px = x as f64 + 0.5;
            while first_right < crossings.len() && crossings[first_right] <= px {
                first_right += 1;
            }
            *cell = (crossings.len() - first_right) % 2 == 1;
        }
    }
    Mask::new(width, height, data)
}
