//! Analytic ray casting of a [`SceneSpec`] into color and disparity frames.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bbox::BBox2D;
use crate::error::{Error, Result};
use crate::geometry::PlaneModel;
use crate::grid::{DisparityMap, Grid, ImageRgb, INVALID_DISPARITY};
use crate::pipeline::FrameBundle;

use super::scene::SceneSpec;

/// A labelled obstacle box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthBox {
    pub id: u32,
    pub bbox: BBox2D,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthFrame {
    pub frame_id: u64,
    pub true_boxes: Vec<TruthBox>,
    /// Floor plane in the camera frame.
    pub true_plane: PlaneModel<f64>,
}

/// What the ray through a pixel center hits first.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Surface {
    Floor,
    Wall,
    Obstacle(usize),
    Nothing,
}

/// Noise-free camera depth and surface for every pixel.
pub struct DepthFrame {
    pub depth: Grid<f64>,
    pub surface: Grid<Surface>,
}

fn slab_hit(o: [f64; 3], d: [f64; 3], lo: [f64; 3], hi: [f64; 3]) -> Option<f64> {
    let mut t0 = 0.0f64;
    let mut t1 = f64::INFINITY;
    for k in 0..3 {
        if d[k].abs() < 1e-15 {
            if o[k] < lo[k] || o[k] > hi[k] {
                return None;
            }
            continue;
        }
        let a = (lo[k] - o[k]) / d[k];
        let b = (hi[k] - o[k]) / d[k];
        t0 = t0.max(a.min(b));
        t1 = t1.min(a.max(b));
        if t0 > t1 {
            return None;
        }
    }
    (t0 > 0.0).then_some(t0)
}

/// Ray casts every pixel center of `frame`.
pub fn render_depth(spec: &SceneSpec, frame: usize) -> DepthFrame {
    let rig = &spec.rig;
    let (w, h) = (rig.width, rig.height);
    let origin = rig.origin();
    let t = spec.time_of(frame);
    let boxes: Vec<([f64; 3], [f64; 3])> = spec.obstacles.iter().map(|o| o.bounds_at(t)).collect();

    let rows: Vec<Vec<(f64, Surface)>> = (0..h)
        .into_par_iter()
        .map(|y| {
            (0..w)
                .map(|x| {
                    let d = rig.world_ray(x as f64 + 0.5, y as f64 + 0.5);
                    let mut best = (f64::INFINITY, Surface::Nothing);
                    if d[2] < 0.0 {
                        best = (-origin[2] / d[2], Surface::Floor);
                    }
                    if let Some(wall) = &spec.wall {
                        if d[1] > 0.0 {
                            let tw = wall.distance_m / d[1];
                            if tw < best.0 {
                                best = (tw, Surface::Wall);
                            }
                        }
                    }
                    for (i, (lo, hi)) in boxes.iter().enumerate() {
                        if let Some(tb) = slab_hit(origin, d, *lo, *hi) {
                            if tb < best.0 {
                                best = (tb, Surface::Obstacle(i));
                            }
                        }
                    }
                    best
                })
                .collect()
        })
        .collect();

    let flat: Vec<(f64, Surface)> = rows.into_iter().flatten().collect();
    DepthFrame {
        depth: Grid::new(w, h, flat.iter().map(|p| p.0).collect()).expect("sized above"),
        surface: Grid::new(w, h, flat.iter().map(|p| p.1).collect()).expect("sized above"),
    }
}

fn frame_rng(seed: u64, frame: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame as u64 + 1);
    rng
}

/// Renders one frame: color with luminance noise, disparity with Gaussian
/// noise plus the optional warp, and the true boxes.
pub fn render_frame(spec: &SceneSpec, seed: u64, frame: usize) -> Result<(FrameBundle, GroundTruthFrame)> {
    if frame >= spec.frames {
        return Err(Error::Scene(format!("{}: frame {frame} out of range", spec.name)));
    }
    let rig = &spec.rig;
    let (w, h) = (rig.width, rig.height);
    let DepthFrame { depth, surface } = render_depth(spec, frame);

    let mut rng = frame_rng(seed, frame);
    let tex = Normal::new(0.0, spec.floor.texture_sigma).map_err(|e| Error::Scene(e.to_string()))?;
    let dnoise = Normal::new(0.0, spec.disparity_noise_sigma).map_err(|e| Error::Scene(e.to_string()))?;
    let phase: [f64; 2] = [rng.random::<f64>(), rng.random::<f64>()].map(|p| p * std::f64::consts::TAU);
    let fb = rig.camera.fx * rig.camera.baseline;

    let mut rgb: ImageRgb = Grid::filled(w, h, [0u8; 3]);
    let mut disp: DisparityMap = Grid::filled(w, h, INVALID_DISPARITY);
    for y in 0..h {
        for x in 0..w {
            let albedo = match *surface.get(x, y) {
                Surface::Floor => spec.floor.albedo,
                Surface::Wall => spec.wall.map(|wl| wl.albedo).unwrap_or([0; 3]),
                Surface::Obstacle(i) => spec.obstacles[i].albedo,
                Surface::Nothing => [0; 3],
            };
            let n = tex.sample(&mut rng).round();
            *rgb.get_mut(x, y) = albedo.map(|c| (c as f64 + n).clamp(0.0, 255.0) as u8);

            let z = *depth.get(x, y);
            let mut d = fb / z + dnoise.sample(&mut rng);
            if let Some(wp) = &spec.warp {
                let k = std::f64::consts::TAU / wp.period_px;
                d += wp.amplitude_px * (k * x as f64 + phase[0]).sin() * (k * y as f64 + phase[1]).cos();
            }
            if z.is_finite() && d > 0.0 {
                *disp.get_mut(x, y) = d as f32;
            }
        }
    }

    let true_boxes = spec
        .obstacles
        .iter()
        .map(|o| {
            spec.truth_box(o, frame)
                .map(|bbox| TruthBox { id: o.id, bbox })
                .ok_or_else(|| Error::Scene(format!("{}: obstacle {} outside the frustum", spec.name, o.id)))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok((
        FrameBundle {
            frame_id: frame as u64,
            rgb,
            disparity: disp,
            timestamp: Some(spec.time_of(frame)),
        },
        GroundTruthFrame {
            frame_id: frame as u64,
            true_boxes,
            true_plane: rig.ground_plane(),
        },
    ))
}

/// Renders every frame of `spec`. Deterministic in `seed`.
pub fn render_scene(spec: &SceneSpec, seed: u64) -> Result<Vec<(FrameBundle, GroundTruthFrame)>> {
    spec.validate()?;
    (0..spec.frames)
        .into_par_iter()
        .map(|f| render_frame(spec, seed, f))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::scene::{Floor, Obstacle, Rig, Wall};

    fn small_spec() -> SceneSpec {
        let mut rig = Rig::zed2();
        // quarter resolution keeps the tests fast
        rig.width = 320;
        rig.height = 180;
        rig.camera.fx = 175.0;
        rig.camera.fy = 175.0;
        rig.camera.cx = 160.0;
        rig.camera.cy = 90.0;
        SceneSpec {
            name: "small".into(),
            rig,
            floor: Floor { albedo: [120, 115, 110], texture_sigma: 3.0 },
            wall: Some(Wall { distance_m: 10.0, albedo: [90, 100, 140] }),
            obstacles: vec![Obstacle::cube(0, 0.3, 0.2, 3.0, [150, 90, 40])],
            disparity_noise_sigma: 0.0,
            warp: None,
            frames: 3,
            fps: 30.0,
            roi_floor_m: vec![[-1.0, 2.0], [1.0, 2.0], [1.0, 5.0], [-1.0, 5.0]],
        }
    }

    #[test]
    fn noiseless_floor_disparity_exact() {
        let spec = small_spec();
        let (bundle, _) = render_frame(&spec, 1, 0).unwrap();
        let dep = render_depth(&spec, 0);
        let fb = spec.rig.camera.fx * spec.rig.camera.baseline;
        let mut floor_px = 0;
        for y in 0..spec.rig.height {
            for x in 0..spec.rig.width {
                if *dep.surface.get(x, y) == Surface::Floor {
                    floor_px += 1;
                    let expect = (fb / dep.depth.get(x, y)) as f32;
                    assert_eq!(*bundle.disparity.get(x, y), expect);
                }
            }
        }
        assert!(floor_px > 10_000);
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = SceneSpec { disparity_noise_sigma: 0.5, ..small_spec() };
        let a = render_scene(&spec, 9).unwrap();
        let b = render_scene(&spec, 9).unwrap();
        let c = render_scene(&spec, 10).unwrap();
        assert_eq!(a.len(), 3);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.0.rgb, y.0.rgb);
            assert_eq!(x.0.disparity, y.0.disparity);
            assert_eq!(x.1, y.1);
        }
        assert_ne!(a[0].0.rgb, c[0].0.rgb);
        assert_ne!(a[0].0.rgb, a[1].0.rgb);
    }

    #[test]
    fn rendered_silhouette_inside_truth_box() {
        let spec = small_spec();
        let dep = render_depth(&spec, 0);
        let tb = spec.truth_box(&spec.obstacles[0], 0).unwrap();
        let mut ext = [i32::MAX, i32::MAX, i32::MIN, i32::MIN];
        for y in 0..spec.rig.height {
            for x in 0..spec.rig.width {
                if *dep.surface.get(x, y) == Surface::Obstacle(0) {
                    let (x, y) = (x as i32, y as i32);
                    ext = [ext[0].min(x), ext[1].min(y), ext[2].max(x), ext[3].max(y)];
                }
            }
        }
        assert!(ext[0] >= tb.x_min && ext[1] >= tb.y_min && ext[2] <= tb.x_max && ext[3] <= tb.y_max);
        // silhouette reaches within a pixel of every box edge
        assert!(ext[0] - tb.x_min <= 1 && tb.x_max - ext[2] <= 1);
        assert!(ext[1] - tb.y_min <= 1 && tb.y_max - ext[3] <= 1);
    }

    #[test]
    fn moving_obstacle_shifts() {
        let mut spec = small_spec();
        spec.obstacles[0].velocity_mps = Some([0.5, 0.0]);
        let (_, t0) = render_frame(&spec, 0, 0).unwrap();
        let (_, t2) = render_frame(&spec, 0, 2).unwrap();
        assert!(t2.true_boxes[0].bbox.x_min > t0.true_boxes[0].bbox.x_min);
    }
}
