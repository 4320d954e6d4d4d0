//! Neighborhood filters on multi-channel rasters. Borders replicate edges.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;

fn check_odd(kernel: usize, what: &str) -> Result<()> {
    if kernel == 0 || kernel % 2 == 0 {
        return Err(Error::param(format!("{what} kernel must be odd, got {kernel}")));
    }
    Ok(())
}

/// Per-channel median over a `kernel` x `kernel` window.
pub fn median_filter<T, const C: usize>(img: &Grid<[T; C]>, kernel: usize) -> Result<Grid<[T; C]>>
where
    T: Copy + PartialOrd + Send + Sync,
{
    check_odd(kernel, "median")?;
    if kernel == 1 {
        return Ok(img.clone());
    }
    let (w, h) = img.dims();
    let r = (kernel / 2) as isize;
    let n = kernel * kernel;
    let mid = n / 2;
    let mut out = img.clone();
    out.as_mut_slice()
        .par_chunks_mut(w)
        .enumerate()
        .for_each_init(
            || vec![Vec::with_capacity(n); C],
            |windows, (y, row)| {
                let y = y as isize;
                for (x, px) in row.iter_mut().enumerate() {
                    let x = x as isize;
                    for win in windows.iter_mut() {
                        win.clear();
                    }
                    for dy in -r..=r {
                        for dx in -r..=r {
                            let s = img.get_clamped(x + dx, y + dy);
                            for (c, win) in windows.iter_mut().enumerate() {
                                win.push(s[c]);
                            }
                        }
                    }
                    for (c, win) in windows.iter_mut().enumerate() {
                        let (_, m, _) = win.select_nth_unstable_by(mid, |a, b| {
                            a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal)
                        });
                        px[c] = *m;
                    }
                }
            },
        );
    debug_assert_eq!(out.dims(), (w, h));
    Ok(out)
}

/// Same result as [`median_filter`] for 8-bit rasters, using a sliding
/// histogram per row so each step touches only the entering and leaving
/// columns.
pub fn median_filter_u8<const C: usize>(img: &Grid<[u8; C]>, kernel: usize) -> Result<Grid<[u8; C]>> {
    check_odd(kernel, "median")?;
    if kernel == 1 {
        return Ok(img.clone());
    }
    let w = img.width();
    let r = (kernel / 2) as isize;
    let mid = (kernel * kernel / 2) as u32;
    let mut out = img.clone();
    out.as_mut_slice().par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let y = y as isize;
        let mut hist = [[0u32; 256]; C];
        let mut med = [0usize; C];
        let mut lt = [0u32; C];
        let column = |hist: &mut [[u32; 256]; C], med: &[usize; C], lt: &mut [u32; C], x: isize, add: bool| {
            for dy in -r..=r {
                let s = img.get_clamped(x, y + dy);
                for c in 0..C {
                    let v = s[c] as usize;
                    if add {
                        hist[c][v] += 1;
                        lt[c] += u32::from(v < med[c]);
                    } else {
                        hist[c][v] -= 1;
                        lt[c] -= u32::from(v < med[c]);
                    }
                }
            }
        };
        for dx in -r..=r {
            column(&mut hist, &med, &mut lt, dx, true);
        }
        for x in 0..w as isize {
            if x > 0 {
                column(&mut hist, &med, &mut lt, x - r - 1, false);
                column(&mut hist, &med, &mut lt, x + r, true);
            }
            for c in 0..C {
                let hc = &hist[c];
                while lt[c] > mid {
                    med[c] -= 1;
                    lt[c] -= hc[med[c]];
                }
                while lt[c] + hc[med[c]] <= mid {
                    lt[c] += hc[med[c]];
                    med[c] += 1;
                }
                row[x as usize][c] = med[c] as u8;
            }
        }
    });
    Ok(out)
}

/// Normalized 1D Gaussian taps with radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f32) -> Vec<f32> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let radius = (3.0 * sigma).ceil() as i32;
    let mut taps: Vec<f32> = (-radius..=radius)
        .map(|i| (-(i * i) as f32 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f32 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

/// Separable Gaussian smoothing of every channel.
pub fn gaussian_smooth<const C: usize>(img: &Grid<[f32; C]>, sigma: f32) -> Grid<[f32; C]> {
    let taps = gaussian_kernel(sigma);
    if taps.len() == 1 {
        return img.clone();
    }
    let (w, h) = img.dims();
    let r = (taps.len() / 2) as isize;
    let mut tmp = img.clone();
    tmp.as_mut_slice()
        .par_chunks_mut(w)
        .enumerate()
        .for_each(|(y, row)| {
            for (x, px) in row.iter_mut().enumerate() {
                let mut acc = [0.0f32; C];
                for (k, &t) in taps.iter().enumerate() {
                    let s = img.get_clamped(x as isize + k as isize - r, y as isize);
                    for c in 0..C {
                        acc[c] += t * s[c];
                    }
                }
                *px = acc;
            }
        });
    let mut out = tmp.clone();
    out.as_mut_slice()
        .par_chunks_mut(w)
        .enumerate()
        .for_each(|(y, row)| {
            for (x, px) in row.iter_mut().enumerate() {
                let mut acc = [0.0f32; C];
                for (k, &t) in taps.iter().enumerate() {
                    let s = tmp.get_clamped(x as isize, y as isize + k as isize - r);
                    for c in 0..C {
                        acc[c] += t * s[c];
                    }
                }
                *px = acc;
            }
        });
    debug_assert_eq!(out.dims(), (w, h));
    out
}

/// Widens an integer raster to `f32` channels.
pub fn to_f32<T: Copy + Into<f32>, const C: usize>(img: &Grid<[T; C]>) -> Grid<[f32; C]> {
    img.map(|px| px.map(Into::into))
}
