//! Erosion of label rasters and binary masks.

use crate::error::{Error, Result};
use crate::grid::{Grid, Mask};

/// Label given to pixels removed by [`erode_labels`].
pub const BOUNDARY_LABEL: u32 = u32::MAX;

fn sliding<T: Copy + Ord>(line: &[T], r: usize, pick: fn(T, T) -> T) -> Vec<T> {
    let n = line.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(r);
            let hi = (i + r).min(n - 1);
            // Edge replication never introduces values beyond the clamped window.
            line[lo..=hi].iter().copied().reduce(pick).expect("window is non-empty")
        })
        .collect()
}

fn window_extreme(g: &Grid<u32>, kernel: usize, pick: fn(u32, u32) -> u32) -> Grid<u32> {
    let (w, h) = g.dims();
    let r = kernel / 2;
    let mut rows = Vec::with_capacity(w * h);
    for y in 0..h {
        rows.extend(sliding(g.row(y), r, pick));
    }
    let mut out = vec![0u32; w * h];
    let mut col = vec![0u32; h];
    for x in 0..w {
        for y in 0..h {
            col[y] = rows[y * w + x];
        }
        for (y, v) in sliding(&col, r, pick).into_iter().enumerate() {
            out[y * w + x] = v;
        }
    }
    Grid::new(w, h, out).expect("dimensions preserved")
}

/// Keeps a pixel's label only when its whole `kernel` x `kernel` neighborhood
/// (edges replicated) carries the same label; other pixels become
/// [`BOUNDARY_LABEL`]. Equivalently, the segment-boundary mask is dilated.
pub fn erode_labels(labels: &Grid<u32>, kernel: usize) -> Result<Grid<u32>> {
    if kernel == 0 || kernel % 2 == 0 {
        return Err(Error::param(format!("erosion kernel must be odd, got {kernel}")));
    }
    if kernel == 1 {
        return Ok(labels.clone());
    }
    let lo = window_extreme(labels, kernel, std::cmp::min);
    let hi = window_extreme(labels, kernel, std::cmp::max);
    let data = labels
        .as_slice()
        .iter()
        .zip(lo.as_slice().iter().zip(hi.as_slice()))
        .map(|(&l, (&a, &b))| if a == b { l } else { BOUNDARY_LABEL })
        .collect();
    Grid::new(labels.width(), labels.height(), data)
}

/// Binary erosion: a pixel stays set only if its whole window is set.
pub fn erode_mask(mask: &Mask, kernel: usize) -> Result<Mask> {
    let as_labels = mask.map(|&b| b as u32);
    let eroded = erode_labels(&as_labels, kernel)?;
    Ok(eroded.map(|&l| l == 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(labels: &Grid<u32>, k: usize) -> Grid<u32> {
        let r = (k / 2) as isize;
        Grid::from_fn(labels.width(), labels.height(), |x, y| {
            let l = *labels.get(x, y);
            for dy in -r..=r {
                for dx in -r..=r {
                    if *labels.get_clamped(x as isize + dx, y as isize + dy) != l {
                        return BOUNDARY_LABEL;
                    }
                }
            }
            l
        })
    }

    #[test]
    fn constant_raster_unchanged() {
        let g = Grid::filled(8, 8, 3u32);
        assert_eq!(erode_labels(&g, 7).unwrap(), g);
    }

    #[test]
    fn single_pixel_island_removed() {
        let mut g = Grid::filled(7, 7, 0u32);
        *g.get_mut(3, 3) = 1;
        let out = erode_labels(&g, 3).unwrap();
        assert!(out.as_slice().iter().all(|&l| l != 1));
    }

    #[test]
    fn block_shrinks_by_one_ring() {
        let g = Grid::from_fn(20, 20, |x, y| ((5..15).contains(&x) && (5..15).contains(&y)) as u32);
        let out = erode_labels(&g, 3).unwrap();
        let survivors = out.as_slice().iter().filter(|&&l| l == 1).count();
        assert_eq!(survivors, 64);
        assert_eq!(out, brute(&g, 3));
    }

    #[test]
    fn matches_brute_force_on_pattern() {
        let g = Grid::from_fn(17, 13, |x, y| ((x * 7 + y * 3) / 11 % 4) as u32);
        for k in [1, 3, 5, 7] {
            assert_eq!(erode_labels(&g, k).unwrap(), brute(&g, k), "kernel {k}");
        }
        assert!(erode_labels(&g, 2).is_err());
    }

    #[test]
    fn mask_erosion() {
        let m = Grid::from_fn(9, 9, |x, y| (2..7).contains(&x) && (2..7).contains(&y));
        let out = erode_mask(&m, 3).unwrap();
        assert_eq!(out.as_slice().iter().filter(|&&b| b).count(), 9);
    }
}
