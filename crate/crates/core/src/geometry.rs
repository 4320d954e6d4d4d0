//! Camera-frame geometry: points, pinhole intrinsics, planes.
//!
//! Camera frame: `x` right, `y` down, `z` forward (meters). Image coordinates
//! are continuous with pixel `(i, j)` centered at `(i + 0.5, j + 0.5)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A camera-frame point that remembers the image location it came from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
    /// Continuous image coordinate `(u, v)` the point was unprojected from.
    pub src_pixel: [T; 2],
}

impl<T: Real> Point3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Point3 {
            x,
            y,
            z,
            src_pixel: [T::zero(), T::zero()],
        }
    }

    #[inline]
    pub fn xyz(&self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn dist_sq(&self, other: &Point3<T>) -> T {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        dx * dx + dy * dy + dz * dz
    }
}

/// A set of camera-frame points.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointCloud<T> {
    pub points: Vec<Point3<T>>,
}

impl<T: Real> PointCloud<T> {
    pub fn new(points: Vec<Point3<T>>) -> Self {
        PointCloud { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Rectified pinhole stereo intrinsics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraModel<T> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
    /// Stereo baseline in meters.
    pub baseline: T,
}

impl<T: Real> CameraModel<T> {
    pub fn new(fx: T, fy: T, cx: T, cy: T, baseline: T) -> Result<Self> {
        let cam = CameraModel {
            fx,
            fy,
            cx,
            cy,
            baseline,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: T| v.is_finite() && v > T::zero();
        if !pos(self.fx) || !pos(self.fy) {
            return Err(Error::param("focal lengths must be positive"));
        }
        if !pos(self.baseline) {
            return Err(Error::param("baseline must be positive"));
        }
        if !self.cx.is_finite() || !self.cy.is_finite() {
            return Err(Error::param("principal point must be finite"));
        }
        Ok(())
    }

    /// Checks the principal point lies inside a `width` x `height` image.
    pub fn validate_for(&self, width: usize, height: usize) -> Result<()> {
        self.validate()?;
        let inside = |c: T, n: usize| c >= T::zero() && c < T::from_usize_lossy(n);
        if !inside(self.cx, width) || !inside(self.cy, height) {
            return Err(Error::param(format!(
                "principal point ({:?}, {:?}) outside {width}x{height} image",
                self.cx, self.cy
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn depth_from_disparity(&self, d: T) -> T {
        self.fx * self.baseline / d
    }

    #[inline]
    pub fn disparity_from_depth(&self, z: T) -> T {
        self.fx * self.baseline / z
    }

    /// Camera-frame point to continuous image coordinates.
    #[inline]
    pub fn project(&self, p: [T; 3]) -> [T; 2] {
        [
            self.fx * p[0] / p[2] + self.cx,
            self.fy * p[1] / p[2] + self.cy,
        ]
    }

    /// Back-projects image coordinate `(u, v)` at depth `z`.
    #[inline]
    pub fn backproject(&self, u: T, v: T, z: T) -> [T; 3] {
        [(u - self.cx) * z / self.fx, (v - self.cy) * z / self.fy, z]
    }

    /// Unit-length ray direction through image coordinate `(u, v)`.
    pub fn ray(&self, u: T, v: T) -> [T; 3] {
        normalize([(u - self.cx) / self.fx, (v - self.cy) / self.fy, T::one()])
    }

    pub fn cast<U: Real>(&self) -> CameraModel<U> {
        let c = |v: T| U::lit(v.to_f64_lossy());
        CameraModel {
            fx: c(self.fx),
            fy: c(self.fy),
            cx: c(self.cx),
            cy: c(self.cy),
            baseline: c(self.baseline),
        }
    }
}

/// Plane `{p : normal . p + offset = 0}` with a unit normal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneModel<T> {
    pub normal: [T; 3],
    pub offset: T,
    pub inlier_count: usize,
}

impl<T: Real> PlaneModel<T> {
    /// Normalizes `normal`; fails on a zero-length normal.
    pub fn new(normal: [T; 3], offset: T, inlier_count: usize) -> Result<Self> {
        let len = norm(normal);
        if !(len > T::zero()) || !len.is_finite() {
            return Err(Error::Degenerate("plane normal has zero length".into()));
        }
        Ok(PlaneModel {
            normal: scale(normal, T::one() / len),
            offset: offset / len,
            inlier_count,
        })
    }

    #[inline]
    pub fn signed_distance(&self, p: [T; 3]) -> T {
        dot(self.normal, p) + self.offset
    }

    pub fn flipped(&self) -> Self {
        PlaneModel {
            normal: scale(self.normal, -T::one()),
            offset: -self.offset,
            inlier_count: self.inlier_count,
        }
    }

    /// Angle in degrees between this plane's normal and `dir` (unsigned).
    pub fn tilt_deg(&self, dir: [T; 3]) -> f64 {
        let c = dot(self.normal, normalize(dir)).to_f64_lossy().abs().min(1.0);
        c.acos().to_degrees()
    }
}

#[inline]
pub fn dot<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn sub<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale<T: Real>(a: [T; 3], s: T) -> [T; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn norm<T: Real>(a: [T; 3]) -> T {
    dot(a, a).sqrt()
}

pub fn normalize<T: Real>(a: [T; 3]) -> [T; 3] {
    scale(a, T::one() / norm(a))
}

/// World "up" expressed in the camera frame for a camera pitched down by
/// `pitch_deg` about its x axis (no roll).
pub fn up_vector<T: Real>(pitch_deg: f64) -> [T; 3] {
    let p = pitch_deg.to_radians();
    [T::zero(), T::lit(-p.cos()), T::lit(-p.sin())]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_round_trip() {
        let cam = CameraModel::<f64>::new(700.0, 690.0, 640.0, 360.0, 0.12).unwrap();
        let p = [0.3, -0.2, 4.0];
        let [u, v] = cam.project(p);
        let q = cam.backproject(u, v, 4.0);
        for i in 0..3 {
            assert!((p[i] - q[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn camera_validation() {
        assert!(CameraModel::new(0.0, 1.0, 0.0, 0.0, 0.1).is_err());
        assert!(CameraModel::new(1.0, 1.0, 0.0, 0.0, -0.1).is_err());
        let cam = CameraModel::new(700.0f32, 700.0, 640.0, 360.0, 0.12).unwrap();
        assert!(cam.validate_for(1280, 720).is_ok());
        assert!(cam.validate_for(640, 720).is_err());
    }

    #[test]
    fn plane_normalizes_and_measures() {
        let pl = PlaneModel::new([0.0, 2.0, 0.0], -3.0, 0).unwrap();
        assert_eq!(pl.normal, [0.0, 1.0, 0.0]);
        assert_eq!(pl.offset, -1.5);
        assert_eq!(pl.signed_distance([5.0, 2.0, 1.0]), 0.5);
        assert!(PlaneModel::new([0.0f64; 3], 1.0, 0).is_err());
    }

    #[test]
    fn up_vector_level_camera() {
        let up: [f64; 3] = up_vector(0.0);
        assert_eq!(up, [0.0, -1.0, -0.0]);
        let up: [f64; 3] = up_vector(90.0);
        assert!((up[2] + 1.0).abs() < 1e-12);
    }
}
