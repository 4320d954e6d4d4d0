//! The frozen benchmark scenes.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::scene::{DisparityWarp, Floor, Obstacle, Rig, SceneSpec, Wall};

/// Bumped whenever any suite changes.
pub const SUITE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Suite {
    pub name: String,
    pub description: String,
    pub scenes: Vec<SceneSpec>,
}

const FLOOR: [u8; 3] = [120, 115, 110];
const WALL: Wall = Wall {
    distance_m: 10.0,
    albedo: [95, 105, 135],
};

fn roi_floor() -> Vec<[f64; 2]> {
    vec![[-1.4, 1.4], [1.4, 1.4], [1.8, 6.0], [-1.8, 6.0]]
}

fn base(name: &str, frames: usize) -> SceneSpec {
    SceneSpec {
        name: name.to_string(),
        rig: Rig::zed2(),
        floor: Floor {
            albedo: FLOOR,
            texture_sigma: 4.0,
        },
        wall: Some(WALL),
        obstacles: Vec::new(),
        disparity_noise_sigma: 0.3,
        warp: None,
        frames,
        fps: 30.0,
        roi_floor_m: roi_floor(),
    }
}

fn cubes(edge: f64, placed: &[(f64, f64, [u8; 3])]) -> Vec<Obstacle> {
    placed
        .iter()
        .enumerate()
        .map(|(i, &(x, y, c))| Obstacle::cube(i as u32, edge, x, y, c))
        .collect()
}

const BROWN: [u8; 3] = [150, 90, 40];
const RED: [u8; 3] = [170, 45, 45];
const BLUE: [u8; 3] = [45, 70, 165];
const GREEN: [u8; 3] = [60, 140, 70];
const DARK: [u8; 3] = [40, 40, 48];
const YELLOW: [u8; 3] = [200, 180, 60];

fn s1() -> Suite {
    let layouts: [&[(f64, f64, [u8; 3])]; 5] = [
        &[(-0.6, 1.6, BROWN), (0.5, 2.8, BLUE)],
        &[(0.0, 2.2, RED), (-0.8, 3.6, GREEN)],
        &[(0.7, 1.8, DARK), (-0.3, 3.0, YELLOW), (0.6, 4.0, RED)],
        &[(-0.5, 2.5, GREEN), (0.4, 3.4, BROWN)],
        &[(0.0, 4.0, BLUE), (-0.9, 2.0, YELLOW)],
    ];
    let scenes = layouts
        .iter()
        .enumerate()
        .map(|(i, l)| SceneSpec {
            obstacles: cubes(0.2, l),
            ..base(&format!("s1-{}", i), 20)
        })
        .collect();
    Suite {
        name: "s1-static-20cm".into(),
        description: "20 cm high-contrast cubes between 1.5 and 4 m, 100 frames".into(),
        scenes,
    }
}

// Low contrast: every channel within 8 levels of the floor, hue shifted.
const PALE_BLUE: [u8; 3] = [113, 116, 118];
const PALE_GREEN: [u8; 3] = [118, 122, 112];
const PALE_TEAL: [u8; 3] = [113, 120, 114];

fn s2() -> Suite {
    let layouts: [&[(f64, f64, [u8; 3])]; 3] = [
        &[(-0.4, 2.5, PALE_BLUE), (0.5, 3.5, PALE_GREEN)],
        &[(0.3, 2.8, PALE_TEAL), (-0.6, 3.8, PALE_BLUE)],
        &[(0.0, 3.2, PALE_GREEN), (0.8, 2.4, PALE_TEAL)],
    ];
    let scenes = layouts
        .iter()
        .enumerate()
        .map(|(i, l)| SceneSpec {
            obstacles: cubes(0.1, l),
            disparity_noise_sigma: 0.7,
            warp: Some(DisparityWarp {
                amplitude_px: 0.5,
                period_px: 80.0,
            }),
            ..base(&format!("s2-{}", i), 20)
        })
        .collect();
    Suite {
        name: "s2-small-low-contrast".into(),
        description: "10 cm low-contrast cubes, noisy warped disparity, 60 frames".into(),
        scenes,
    }
}

fn s3() -> Suite {
    let mut big = Obstacle::cube(2, 0.5, 0.0, 2.8, [127, 122, 117]);
    big.size_m = [0.5, 0.5, 0.5];
    let mut obstacles = cubes(0.1, &[(-0.75, 3.5, RED), (0.75, 3.7, BLUE)]);
    obstacles.push(big);
    Suite {
        name: "s3-multi-box".into(),
        description: "two small high-contrast cubes and one large cube matching the floor".into(),
        scenes: vec![SceneSpec {
            obstacles,
            ..base("s3-0", 30)
        }],
    }
}

fn s4() -> Suite {
    let mut mover = Obstacle::cube(0, 0.2, -0.6, 3.0, BROWN);
    mover.velocity_mps = Some([0.5, 0.0]);
    let person = Obstacle {
        id: 1,
        size_m: [0.4, 0.4, 1.7],
        position_m: [1.0, 5.5],
        albedo: [40, 50, 90],
        velocity_mps: None,
    };
    Suite {
        name: "s4-moving-box".into(),
        description: "20 cm cube crossing at 0.5 m/s next to a standing person-sized cuboid".into(),
        scenes: vec![SceneSpec {
            obstacles: vec![mover, person],
            ..base("s4-0", 30)
        }],
    }
}

fn s5() -> Suite {
    let scenes = [3.0, 4.0, 5.0, 6.0, 8.0]
        .iter()
        .enumerate()
        .map(|(i, &sigma)| {
            let mut s = base(&format!("s5-{}", i), 20);
            s.floor.texture_sigma = sigma;
            s
        })
        .collect();
    Suite {
        name: "s5-empty".into(),
        description: "empty floor with varying texture noise, 100 frames".into(),
        scenes,
    }
}

/// All benchmark suites in a fixed order.
pub fn standard_suites() -> Vec<Suite> {
    vec![s1(), s2(), s3(), s4(), s5()]
}

/// Looks a suite up by full name or by its `sN` prefix.
pub fn suite_by_name(name: &str) -> Option<Suite> {
    let key = name.to_ascii_lowercase();
    standard_suites()
        .into_iter()
        .find(|s| s.name == key || s.name.split('-').next() == Some(key.as_str()))
}

/// Hex SHA-256 of the serialized suite set.
pub fn suites_hash() -> String {
    let json = serde_json::to_vec(&(SUITE_VERSION, standard_suites())).expect("suites serialize");
    Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
}

/// Render seed of a scene, derived from the run seed and the scene name.
pub fn scene_seed(seed: u64, scene: &str) -> u64 {
    let h = Sha256::digest(scene.as_bytes());
    let mut b = [0u8; 8];
    b.copy_from_slice(&h[..8]);
    u64::from_le_bytes(b) ^ seed
}
