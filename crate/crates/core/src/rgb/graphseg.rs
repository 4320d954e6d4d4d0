//! Graph-based image segmentation on an 8-connected pixel grid.
//!
//! Components merge in ascending edge-weight order when the connecting edge
//! is no heavier than either side's internal difference plus `k / |C|`.
//! Edge weight is the Euclidean color distance between adjacent pixels after
//! Gaussian smoothing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, LabelMap};
use crate::rgb::filters::gaussian_smooth;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSegParams {
    pub sigma: f32,
    pub k: f32,
    pub min_size: usize,
}

impl Default for GraphSegParams {
    fn default() -> Self {
        GraphSegParams {
            sigma: 0.6,
            k: 1074.0,
            min_size: 185,
        }
    }
}

impl GraphSegParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::param("graphseg.sigma must be >= 0"));
        }
        if !(self.k > 0.0) || !self.k.is_finite() {
            return Err(Error::param("graphseg.k must be > 0"));
        }
        if self.min_size < 1 {
            return Err(Error::param("graphseg.min_size must be >= 1"));
        }
        Ok(())
    }
}

/// Neighbor offsets in ascending target-index order: up-right, right, down, down-right.
const DIRS: [(isize, isize); 4] = [(1, -1), (1, 0), (0, 1), (1, 1)];

/// A weighted grid edge between row-major pixel indices. `src` is the pixel
/// the edge was generated from; `dst` its up-right, right, down or
/// down-right neighbor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub src: u32,
    pub dst: u32,
    pub w: f32,
}

fn color_distance<const C: usize>(p: &[f32; C], q: &[f32; C]) -> f32 {
    let mut acc = 0.0f32;
    for c in 0..C {
        let d = p[c] - q[c];
        acc += d * d;
    }
    acc.sqrt()
}

/// All 8-neighborhood edges of `img`, sorted by `(weight, source, target)`.
pub fn sorted_grid_edges<const C: usize>(img: &Grid<[f32; C]>) -> Result<Vec<Edge>> {
    let (w, h) = img.dims();
    if (w * h).checked_mul(4).is_none_or(|n| n > u32::MAX as usize) {
        return Err(Error::param("image too large for graph segmentation"));
    }
    let mut keys: Vec<u64> = Vec::with_capacity(w * h * 4);
    let px = img.as_slice();
    for y in 0..h {
        for x in 0..w {
            let src = y * w + x;
            for (dir, &(dx, dy)) in DIRS.iter().enumerate() {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let dst = ny as usize * w + nx as usize;
                let wt = color_distance(&px[src], &px[dst]);
                // Non-negative floats order like their bit patterns.
                keys.push(((wt.to_bits() as u64) << 32) | (src * 4 + dir) as u64);
            }
        }
    }
    keys.sort_unstable();
    Ok(keys
        .into_iter()
        .map(|key| {
            let id = (key & 0xffff_ffff) as usize;
            let (src, dir) = (id / 4, id % 4);
            let (dx, dy) = DIRS[dir];
            let (x, y) = ((src % w) as isize, (src / w) as isize);
            let dst = (y + dy) as usize * w + (x + dx) as usize;
            Edge {
                src: src as u32,
                dst: dst as u32,
                w: f32::from_bits((key >> 32) as u32),
            }
        })
        .collect())
}

/// Disjoint-set forest with component sizes and internal differences.
struct Forest {
    parent: Vec<u32>,
    rank: Vec<u8>,
    size: Vec<u32>,
    threshold: Vec<f32>,
}

impl Forest {
    fn new(n: usize, k: f32) -> Self {
        Forest {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
            size: vec![1; n],
            threshold: vec![k; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        while self.parent[x as usize] != root {
            let next = self.parent[x as usize];
            self.parent[x as usize] = root;
            x = next;
        }
        root
    }

    fn join(&mut self, a: u32, b: u32) -> u32 {
        let (a, b) = (a as usize, b as usize);
        let (root, child) = if self.rank[a] >= self.rank[b] { (a, b) } else { (b, a) };
        self.parent[child] = root as u32;
        self.size[root] += self.size[child];
        if self.rank[a] == self.rank[b] {
            self.rank[root] += 1;
        }
        root as u32
    }
}

/// Segments `img` and returns a compact label map.
pub fn graph_segment<const C: usize>(img: &Grid<[f32; C]>, params: &GraphSegParams) -> Result<LabelMap> {
    params.validate()?;
    let (w, h) = img.dims();
    if w < 2 || h < 2 {
        return Err(Error::param("graph segmentation needs at least a 2x2 image"));
    }
    let smoothed = gaussian_smooth(img, params.sigma);
    let edges = sorted_grid_edges(&smoothed)?;
    let n = w * h;
    let mut forest = Forest::new(n, params.k);

    for e in &edges {
        let ra = forest.find(e.src);
        let rb = forest.find(e.dst);
        if ra == rb {
            continue;
        }
        if e.w <= forest.threshold[ra as usize] && e.w <= forest.threshold[rb as usize] {
            let root = forest.join(ra, rb);
            // Kruskal order makes `e.w` the new maximum MST edge of the component.
            forest.threshold[root as usize] = e.w + params.k / forest.size[root as usize] as f32;
        }
    }

    let min_size = params.min_size as u32;
    for e in &edges {
        let ra = forest.find(e.src);
        let rb = forest.find(e.dst);
        if ra != rb && (forest.size[ra as usize] < min_size || forest.size[rb as usize] < min_size) {
            forest.join(ra, rb);
        }
    }

    let roots: Vec<u32> = (0..n as u32).map(|i| forest.find(i)).collect();
    Ok(LabelMap::from_dense(Grid::new(w, h, roots)?, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_image_is_one_segment() {
        let img = Grid::filled(12, 9, [40.0f32, 80.0, 120.0]);
        let lm = graph_segment(&img, &GraphSegParams::default()).unwrap();
        assert_eq!(lm.num_labels(), 1);
    }

    #[test]
    fn black_white_halves_split() {
        let img = Grid::from_fn(10, 6, |x, _| if x < 5 { [0.0f32; 3] } else { [255.0; 3] });
        let p = GraphSegParams { sigma: 0.0, k: 1.0, min_size: 1 };
        let lm = graph_segment(&img, &p).unwrap();
        assert_eq!(lm.num_labels(), 2);
        assert_ne!(lm.get(0, 0), lm.get(9, 0));
        assert_eq!(lm.get(0, 0), lm.get(4, 5));
    }

    #[test]
    fn edges_cover_eight_neighborhood_sorted() {
        let img = Grid::from_fn(3, 3, |x, y| [(x * 10 + y) as f32]);
        let edges = sorted_grid_edges(&img).unwrap();
        // 3x3 grid: 6 horizontal + 6 vertical + 4 + 4 diagonal
        assert_eq!(edges.len(), 20);
        for pair in edges.windows(2) {
            assert!(pair[0].w <= pair[1].w);
        }
    }

    #[test]
    fn rejects_tiny_image_and_bad_params() {
        let img = Grid::filled(1, 5, [0.0f32]);
        assert!(graph_segment(&img, &GraphSegParams::default()).is_err());
        let img = Grid::filled(4, 4, [0.0f32]);
        let bad = GraphSegParams { k: 0.0, ..Default::default() };
        assert!(graph_segment(&img, &bad).is_err());
    }
}
