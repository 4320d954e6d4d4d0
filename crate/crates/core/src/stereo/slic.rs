//! SLIC superpixels.
//!
//! Centers start on a `region_size` grid (nudged to the lowest-gradient pixel
//! of their 3x3 neighborhood) and are refined by local k-means in CIELAB plus
//! position, using `D = d_lab + (compactness / region_size) * d_xy` inside a
//! `2 * region_size` window. Disconnected fragments are then absorbed into
//! the largest adjacent superpixel so every label is 4-connected.

use std::collections::VecDeque;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, ImageRgb, LabelMap};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlicParams {
    pub region_size: usize,
    pub compactness: f32,
    pub iterations: usize,
}

impl Default for SlicParams {
    fn default() -> Self {
        SlicParams {
            region_size: 24,
            compactness: 10.0,
            iterations: 10,
        }
    }
}

impl SlicParams {
    pub fn validate(&self) -> Result<()> {
        if self.region_size < 2 {
            return Err(Error::param("slic.region_size must be >= 2"));
        }
        if !(self.compactness > 0.0) || !self.compactness.is_finite() {
            return Err(Error::param("slic.compactness must be > 0"));
        }
        if self.iterations < 1 {
            return Err(Error::param("slic.iterations must be >= 1"));
        }
        Ok(())
    }
}

fn srgb_to_linear_lut() -> &'static [f32; 256] {
    static LUT: OnceLock<[f32; 256]> = OnceLock::new();
    LUT.get_or_init(|| {
        let mut t = [0f32; 256];
        for (i, v) in t.iter_mut().enumerate() {
            let c = i as f64 / 255.0;
            let lin = if c <= 0.04045 {
                c / 12.92
            } else {
                ((c + 0.055) / 1.055).powf(2.4)
            };
            *v = lin as f32;
        }
        t
    })
}

/// sRGB (D65) to CIELAB.
pub fn rgb_to_lab([r, g, b]: [u8; 3]) -> [f32; 3] {
    let lut = srgb_to_linear_lut();
    let (r, g, b) = (lut[r as usize], lut[g as usize], lut[b as usize]);
    let x = (0.412_456_4 * r + 0.357_576_1 * g + 0.180_437_5 * b) / 0.950_47;
    let y = 0.212_672_9 * r + 0.715_152_2 * g + 0.072_175 * b;
    let z = (0.019_333_9 * r + 0.119_192 * g + 0.950_304_1 * b) / 1.088_83;
    let f = |t: f32| {
        if t > 0.008_856 {
            t.cbrt()
        } else {
            7.787 * t + 16.0 / 116.0
        }
    };
    let (fx, fy, fz) = (f(x), f(y), f(z));
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

#[derive(Clone, Copy, Debug)]
struct Center {
    lab: [f32; 3],
    x: f32,
    y: f32,
}

fn lab_dist(a: &[f32; 3], b: &[f32; 3]) -> f32 {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    let d2 = a[2] - b[2];
    (d0 * d0 + d1 * d1 + d2 * d2).sqrt()
}

fn gradient(lab: &Grid<[f32; 3]>, x: usize, y: usize) -> f32 {
    let (x, y) = (x as isize, y as isize);
    let sq = |a: &[f32; 3], b: &[f32; 3]| {
        let d = lab_dist(a, b);
        d * d
    };
    sq(lab.get_clamped(x + 1, y), lab.get_clamped(x - 1, y))
        + sq(lab.get_clamped(x, y + 1), lab.get_clamped(x, y - 1))
}

fn initial_centers(lab: &Grid<[f32; 3]>, s: usize) -> Vec<Center> {
    let (w, h) = lab.dims();
    let nx = ((w as f32 / s as f32).round() as usize).max(1);
    let ny = ((h as f32 / s as f32).round() as usize).max(1);
    let (stepx, stepy) = (w as f32 / nx as f32, h as f32 / ny as f32);
    let mut centers = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let mut cx = (i as f32 + 0.5) * stepx;
            let mut cy = (j as f32 + 0.5) * stepy;
            let px = (cx as usize).min(w - 1);
            let py = (cy as usize).min(h - 1);
            let mut best = gradient(lab, px, py);
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    let (qx, qy) = (px as isize + dx, py as isize + dy);
                    if qx < 0 || qy < 0 || qx >= w as isize || qy >= h as isize {
                        continue;
                    }
                    let g = gradient(lab, qx as usize, qy as usize);
                    // Only strictly lower gradients move the seed.
                    if g < best {
                        best = g;
                        cx = qx as f32 + 0.5;
                        cy = qy as f32 + 0.5;
                    }
                }
            }
            let lab_px = *lab.get((cx as usize).min(w - 1), (cy as usize).min(h - 1));
            centers.push(Center { lab: lab_px, x: cx, y: cy });
        }
    }
    centers
}

/// Over-segments `img` into roughly `(W / region_size) * (H / region_size)`
/// connected superpixels.
pub fn slic_segment(img: &ImageRgb, params: &SlicParams) -> Result<LabelMap> {
    params.validate()?;
    let s = params.region_size;
    let (w, h) = img.dims();
    if w <= s || h <= s {
        return Err(Error::param(format!(
            "image {w}x{h} must be larger than slic.region_size {s} in both dimensions"
        )));
    }
    let lab = img.map(|&px| rgb_to_lab(px));
    let mut centers = initial_centers(&lab, s);
    let spatial_weight = params.compactness / s as f32;
    let n = w * h;
    let mut labels = vec![u32::MAX; n];
    let mut dist = vec![f32::INFINITY; n];
    let si = s as isize;

    for _ in 0..params.iterations {
        dist.fill(f32::INFINITY);
        for (k, c) in centers.iter().enumerate() {
            let (ccx, ccy) = (c.x.floor() as isize, c.y.floor() as isize);
            let x0 = (ccx - si).max(0) as usize;
            let x1 = ((ccx + si) as usize).min(w - 1);
            let y0 = (ccy - si).max(0) as usize;
            let y1 = ((ccy + si) as usize).min(h - 1);
            for y in y0..=y1 {
                let row = y * w;
                let dy = y as f32 + 0.5 - c.y;
                for x in x0..=x1 {
                    let dx = x as f32 + 0.5 - c.x;
                    let d = lab_dist(lab.as_slice().get(row + x).unwrap(), &c.lab)
                        + spatial_weight * (dx * dx + dy * dy).sqrt();
                    if d < dist[row + x] {
                        dist[row + x] = d;
                        labels[row + x] = k as u32;
                    }
                }
            }
        }
        let mut acc = vec![[0f64; 6]; centers.len()];
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                let l = labels[i];
                if l == u32::MAX {
                    continue;
                }
                let a = &mut acc[l as usize];
                let p = lab.as_slice()[i];
                a[0] += p[0] as f64;
                a[1] += p[1] as f64;
                a[2] += p[2] as f64;
                a[3] += x as f64 + 0.5;
                a[4] += y as f64 + 0.5;
                a[5] += 1.0;
            }
        }
        for (c, a) in centers.iter_mut().zip(&acc) {
            if a[5] > 0.0 {
                c.lab = [(a[0] / a[5]) as f32, (a[1] / a[5]) as f32, (a[2] / a[5]) as f32];
                c.x = (a[3] / a[5]) as f32;
                c.y = (a[4] / a[5]) as f32;
            }
        }
    }

    // Windows can leave a pixel unreached when centers drift; give it the
    // spatially nearest center.
    for i in 0..n {
        if labels[i] == u32::MAX {
            let (x, y) = ((i % w) as f32 + 0.5, (i / w) as f32 + 0.5);
            let nearest = centers
                .iter()
                .enumerate()
                .min_by(|a, b| {
                    let da = (a.1.x - x).powi(2) + (a.1.y - y).powi(2);
                    let db = (b.1.x - x).powi(2) + (b.1.y - y).powi(2);
                    da.total_cmp(&db)
                })
                .map(|(k, _)| k as u32)
                .expect("at least one center");
            labels[i] = nearest;
        }
    }

    let connected = enforce_connectivity(&labels, w, h, centers.len());
    Ok(LabelMap::from_dense(Grid::new(w, h, connected)?, centers.len()))
}

/// Keeps the largest 4-connected piece of every label and hands each other
/// fragment to the largest adjacent settled superpixel.
fn enforce_connectivity(labels: &[u32], w: usize, h: usize, num_labels: usize) -> Vec<u32> {
    let n = w * h;
    let mut comp = vec![u32::MAX; n];
    let mut comp_label: Vec<u32> = Vec::new();
    let mut comp_size: Vec<usize> = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if comp[start] != u32::MAX {
            continue;
        }
        let id = comp_label.len() as u32;
        let l = labels[start];
        comp[start] = id;
        queue.push_back(start);
        let mut size = 0;
        while let Some(i) = queue.pop_front() {
            size += 1;
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if comp[j] == u32::MAX && labels[j] == l {
                    comp[j] = id;
                    queue.push_back(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        comp_label.push(l);
        comp_size.push(size);
    }

    let nc = comp_label.len();
    let mut keeper = vec![u32::MAX; num_labels];
    for c in 0..nc {
        let l = comp_label[c] as usize;
        if keeper[l] == u32::MAX || comp_size[c] > comp_size[keeper[l] as usize] {
            keeper[l] = c as u32;
        }
    }

    // Adjacency between components.
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); nc];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let a = comp[i];
            for j in [(x + 1 < w).then(|| i + 1), (y + 1 < h).then(|| i + w)].into_iter().flatten() {
                let b = comp[j];
                if a != b {
                    adj[a as usize].push(b);
                    adj[b as usize].push(a);
                }
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }

    let mut settled = vec![false; nc];
    let mut final_label: Vec<u32> = comp_label.clone();
    let mut label_size = vec![0usize; num_labels];
    for c in 0..nc {
        if keeper[comp_label[c] as usize] == c as u32 {
            settled[c] = true;
            label_size[comp_label[c] as usize] += comp_size[c];
        }
    }
    let mut pending: Vec<usize> = (0..nc).filter(|&c| !settled[c]).collect();
    while !pending.is_empty() {
        let mut still = Vec::new();
        for &c in &pending {
            let target = adj[c]
                .iter()
                .filter(|&&b| settled[b as usize])
                .map(|&b| final_label[b as usize])
                .max_by(|&a, &b| label_size[a as usize].cmp(&label_size[b as usize]).then(b.cmp(&a)));
            match target {
                Some(l) => {
                    final_label[c] = l;
                    settled[c] = true;
                    label_size[l as usize] += comp_size[c];
                }
                None => still.push(c),
            }
        }
        if still.len() == pending.len() {
            // Unreachable for a connected grid; keep fragments as their own labels.
            break;
        }
        pending = still;
    }

    comp.iter().map(|&c| final_label[c as usize]).collect()
}
