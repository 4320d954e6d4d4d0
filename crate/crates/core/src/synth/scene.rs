//! Parametric parking-lot scenes: a flat floor, an optional back wall and
//! axis-aligned cuboids resting on the floor.
//!
//! World frame: X right, Y forward along the floor, Z up. The camera sits at
//! `(0, 0, height_m)` looking along +Y, pitched down by `pitch_deg`.

use serde::{Deserialize, Serialize};

use crate::bbox::{BBox2D, Channel};
use crate::error::{Error, Result};
use crate::geometry::{dot, CameraModel, PlaneModel};
use crate::roi::RoiPolygon;

/// Intrinsics plus mounting pose.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rig {
    pub camera: CameraModel<f64>,
    pub width: usize,
    pub height: usize,
    pub height_m: f64,
    pub pitch_deg: f64,
}

impl Rig {
    /// 1280x720 wide-baseline stereo head (12 cm), 1.5 m up, pitched 25 degrees.
    pub fn zed2() -> Self {
        Rig {
            camera: CameraModel {
                fx: 700.0,
                fy: 700.0,
                cx: 640.0,
                cy: 360.0,
                baseline: 0.12,
            },
            width: 1280,
            height: 720,
            height_m: 1.5,
            pitch_deg: 25.0,
        }
    }

    /// 1280x720 active stereo head with a 9.5 cm baseline.
    pub fn d455() -> Self {
        Rig {
            camera: CameraModel {
                fx: 674.5,
                fy: 674.5,
                cx: 640.0,
                cy: 360.0,
                baseline: 0.095,
            },
            ..Rig::zed2()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.camera.validate_for(self.width, self.height)?;
        if !(self.height_m > 0.0) {
            return Err(Error::Scene("camera height must be > 0".into()));
        }
        if !(self.pitch_deg > -90.0 && self.pitch_deg < 90.0) {
            return Err(Error::Scene("camera pitch must be in (-90, 90) degrees".into()));
        }
        Ok(())
    }

    /// Camera axes (right, down, forward) expressed in world coordinates.
    pub fn axes(&self) -> [[f64; 3]; 3] {
        let (s, c) = self.pitch_deg.to_radians().sin_cos();
        [[1.0, 0.0, 0.0], [0.0, -s, -c], [0.0, c, -s]]
    }

    pub fn origin(&self) -> [f64; 3] {
        [0.0, 0.0, self.height_m]
    }

    pub fn world_to_camera(&self, p: [f64; 3]) -> [f64; 3] {
        let o = self.origin();
        let d = [p[0] - o[0], p[1] - o[1], p[2] - o[2]];
        let [ax, ay, az] = self.axes();
        [dot(d, ax), dot(d, ay), dot(d, az)]
    }

    /// World direction of the ray through continuous image point `(u, v)`,
    /// scaled so its camera-frame depth component is 1.
    pub fn world_ray(&self, u: f64, v: f64) -> [f64; 3] {
        let c = &self.camera;
        let (dx, dy) = ((u - c.cx) / c.fx, (v - c.cy) / c.fy);
        let [ax, ay, az] = self.axes();
        [0, 1, 2].map(|k| dx * ax[k] + dy * ay[k] + az[k])
    }

    /// Image point of a world point, `None` behind the camera.
    pub fn project_world(&self, p: [f64; 3]) -> Option<[f64; 2]> {
        let q = self.world_to_camera(p);
        (q[2] > 1e-9).then(|| self.camera.project(q))
    }

    /// The floor in the camera frame, normal pointing up.
    pub fn ground_plane(&self) -> PlaneModel<f64> {
        let (s, c) = self.pitch_deg.to_radians().sin_cos();
        PlaneModel {
            normal: [0.0, -c, -s],
            offset: self.height_m,
            inlier_count: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Floor {
    pub albedo: [u8; 3],
    /// Std-dev of per-pixel luminance noise, 8-bit units.
    pub texture_sigma: f64,
}

/// Vertical wall across the scene at `distance_m` ahead.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Wall {
    pub distance_m: f64,
    pub albedo: [u8; 3],
}

/// Axis-aligned cuboid standing on the floor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Obstacle {
    pub id: u32,
    /// Extent along X, Y and Z.
    pub size_m: [f64; 3],
    /// Footprint center on the floor at frame 0.
    pub position_m: [f64; 2],
    pub albedo: [u8; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity_mps: Option<[f64; 2]>,
}

impl Obstacle {
    pub fn cube(id: u32, edge: f64, x: f64, y: f64, albedo: [u8; 3]) -> Self {
        Obstacle {
            id,
            size_m: [edge; 3],
            position_m: [x, y],
            albedo,
            velocity_mps: None,
        }
    }

    /// Largest per-channel albedo difference to `floor`.
    pub fn contrast_to(&self, floor: [u8; 3]) -> u8 {
        (0..3)
            .map(|k| self.albedo[k].abs_diff(floor[k]))
            .max()
            .unwrap_or(0)
    }

    pub fn footprint_at(&self, t: f64) -> [f64; 2] {
        let v = self.velocity_mps.unwrap_or([0.0, 0.0]);
        [self.position_m[0] + v[0] * t, self.position_m[1] + v[1] * t]
    }

    /// World-space min and max corners at time `t`.
    pub fn bounds_at(&self, t: f64) -> ([f64; 3], [f64; 3]) {
        let [x, y] = self.footprint_at(t);
        let [sx, sy, sz] = self.size_m;
        ([x - sx / 2.0, y - sy / 2.0, 0.0], [x + sx / 2.0, y + sy / 2.0, sz])
    }

    pub fn vertices_at(&self, t: f64) -> [[f64; 3]; 8] {
        let (lo, hi) = self.bounds_at(t);
        let mut out = [[0.0; 3]; 8];
        for (i, v) in out.iter_mut().enumerate() {
            *v = [
                if i & 1 == 0 { lo[0] } else { hi[0] },
                if i & 2 == 0 { lo[1] } else { hi[1] },
                if i & 4 == 0 { lo[2] } else { hi[2] },
            ];
        }
        out
    }
}

/// Low-frequency sinusoidal disparity distortion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisparityWarp {
    pub amplitude_px: f64,
    pub period_px: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub name: String,
    pub rig: Rig,
    pub floor: Floor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall: Option<Wall>,
    pub obstacles: Vec<Obstacle>,
    pub disparity_noise_sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warp: Option<DisparityWarp>,
    pub frames: usize,
    pub fps: f64,
    /// Drivable area on the floor as (X, Y) vertices in meters.
    pub roi_floor_m: Vec<[f64; 2]>,
}

impl SceneSpec {
    pub fn time_of(&self, frame: usize) -> f64 {
        frame as f64 / self.fps
    }

    pub fn validate(&self) -> Result<()> {
        self.rig.validate()?;
        if self.frames == 0 {
            return Err(Error::Scene(format!("{}: scene needs at least one frame", self.name)));
        }
        if !(self.fps > 0.0) {
            return Err(Error::Scene(format!("{}: fps must be > 0", self.name)));
        }
        if !(self.floor.texture_sigma >= 0.0) || !(self.disparity_noise_sigma >= 0.0) {
            return Err(Error::Scene(format!("{}: noise sigma must be >= 0", self.name)));
        }
        if let Some(w) = &self.warp {
            if !(w.amplitude_px >= 0.0 && w.period_px > 0.0) {
                return Err(Error::Scene(format!("{}: invalid disparity warp", self.name)));
            }
        }
        if let Some(w) = &self.wall {
            if !(w.distance_m > 0.0) {
                return Err(Error::Scene(format!("{}: wall distance must be > 0", self.name)));
            }
        }
        let mut ids: Vec<u32> = self.obstacles.iter().map(|o| o.id).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.obstacles.len() {
            return Err(Error::Scene(format!("{}: duplicate obstacle ids", self.name)));
        }
        for o in &self.obstacles {
            if o.size_m.iter().any(|s| !(*s > 0.0)) {
                return Err(Error::Scene(format!("{}: obstacle {} has non-positive size", self.name, o.id)));
            }
            for f in 0..self.frames {
                if self.truth_box(o, f).is_none() {
                    return Err(Error::Scene(format!(
                        "{}: obstacle {} leaves the camera frustum at frame {f}",
                        self.name, o.id
                    )));
                }
            }
        }
        self.roi()?;
        Ok(())
    }

    /// Exact image box of an obstacle: the pixels whose centers fall inside
    /// the hull of its projected vertices. `None` when any vertex is behind
    /// the camera or outside the image.
    pub fn truth_box(&self, o: &Obstacle, frame: usize) -> Option<BBox2D> {
        let t = self.time_of(frame);
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in o.vertices_at(t) {
            let p = self.rig.project_world(v)?;
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let (w, h) = (self.rig.width as f64, self.rig.height as f64);
        if lo[0] < 0.0 || lo[1] < 0.0 || hi[0] > w || hi[1] > h {
            return None;
        }
        let x0 = (lo[0] - 0.5).ceil() as i32;
        let y0 = (lo[1] - 0.5).ceil() as i32;
        let x1 = (hi[0] - 0.5).floor() as i32;
        let y1 = (hi[1] - 0.5).floor() as i32;
        Some(BBox2D::new(x0, y0, x1.max(x0), y1.max(y0), Channel::Fused))
    }

    /// Image polygon of the drivable area.
    pub fn roi(&self) -> Result<RoiPolygon> {
        let mut verts = Vec::with_capacity(self.roi_floor_m.len());
        for &[x, y] in &self.roi_floor_m {
            let p = self
                .rig
                .project_world([x, y, 0.0])
                .ok_or_else(|| Error::Scene(format!("{}: ROI vertex ({x}, {y}) is behind the camera", self.name)))?;
            verts.push(p);
        }
        let roi = RoiPolygon::new(verts)?;
        if !roi.within(self.rig.width, self.rig.height) {
            return Err(Error::Scene(format!("{}: ROI does not fit in the image", self.name)));
        }
        Ok(roi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn level_rig() -> Rig {
        Rig {
            pitch_deg: 0.0,
            ..Rig::zed2()
        }
    }

    #[test]
    fn axes_are_orthonormal() {
        let r = Rig::zed2();
        let a = r.axes();
        for i in 0..3 {
            for j in 0..3 {
                let d = dot(a[i], a[j]);
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        // camera "up" agrees with the stereo channel's convention
        let up = r.world_to_camera([0.0, 0.0, r.height_m + 1.0]);
        let expect = crate::geometry::up_vector::<f64>(r.pitch_deg);
        for k in 0..3 {
            assert!((up[k] - expect[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn ground_plane_contains_floor_points() {
        let r = Rig::zed2();
        let g = r.ground_plane();
        for p in [[0.0, 2.0, 0.0], [1.3, 7.5, 0.0], [-2.0, 3.0, 0.0]] {
            assert!(g.signed_distance(r.world_to_camera(p)).abs() < 1e-12);
        }
        assert!((g.signed_distance(r.world_to_camera([0.0, 3.0, 0.2])) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn cube_face_width_at_three_meters() {
        // Level camera, cube front face 3 m ahead, centered on the optical axis.
        let spec = SceneSpec {
            name: "t".into(),
            rig: level_rig(),
            floor: Floor { albedo: [120; 3], texture_sigma: 0.0 },
            wall: None,
            obstacles: vec![Obstacle::cube(0, 0.2, 0.0, 3.1, [200; 3])],
            disparity_noise_sigma: 0.0,
            warp: None,
            frames: 1,
            fps: 30.0,
            roi_floor_m: vec![[-1.0, 2.0], [1.0, 2.0], [1.0, 5.0], [-1.0, 5.0]],
        };
        let b = spec.truth_box(&spec.obstacles[0], 0).unwrap();
        // 700 * 0.2 / 3 = 46.67 px spanning [616.67, 663.33)
        assert_eq!((b.x_min, b.x_max), (617, 662));
        assert_eq!(b.width(), 46);
    }

    #[test]
    fn offender_reported() {
        let mut spec = SceneSpec {
            name: "bad".into(),
            rig: Rig::zed2(),
            floor: Floor { albedo: [120; 3], texture_sigma: 0.0 },
            wall: None,
            obstacles: vec![Obstacle::cube(7, 0.2, 30.0, 3.0, [200; 3])],
            disparity_noise_sigma: 0.0,
            warp: None,
            frames: 1,
            fps: 30.0,
            roi_floor_m: vec![[-1.0, 2.0], [1.0, 2.0], [1.0, 5.0], [-1.0, 5.0]],
        };
        let err = spec.validate().unwrap_err().to_string();
        assert!(err.contains("obstacle 7"), "{err}");
        spec.obstacles[0].position_m = [0.0, 3.0];
        spec.validate().unwrap();
    }
}
