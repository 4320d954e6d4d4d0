//! Dense row-major rasters.

use crate::error::{Error, Result};

/// A dense, row-major 2D raster of `T`.
///
/// Width and height are always at least one and `data.len() == width * height`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T> Grid<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param(format!(
                "raster dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::param(format!(
                "raster of {width}x{height} needs {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Grid {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(width > 0 && height > 0, "raster dimensions must be positive");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Grid {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    /// Always false; rasters have at least one sample.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.width && y < self.height);
        y * self.width + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> &T {
        &self.data[y * self.width + x]
    }

    #[inline]
    pub fn get_mut(&mut self, x: usize, y: usize) -> &mut T {
        &mut self.data[y * self.width + x]
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn row(&self, y: usize) -> &[T] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn same_dims<U>(&self, other: &Grid<U>) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                actual: other.dims(),
            });
        }
        Ok(())
    }
}

impl<T: Clone> Grid<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        assert!(width > 0 && height > 0, "raster dimensions must be positive");
        Grid {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    /// Sample with edge replication for out-of-range coordinates.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> &T {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        &self.data[cy * self.width + cx]
    }
}

/// 8-bit RGB image.
pub type ImageRgb = Grid<[u8; 3]>;

/// Binary mask; `true` marks selected pixels.
pub type Mask = Grid<bool>;

/// Per-pixel disparity in pixels. Zero marks an unmatched pixel.
pub type DisparityMap = Grid<f32>;

/// Sentinel stored in a [`DisparityMap`] for pixels without a valid match.
pub const INVALID_DISPARITY: f32 = 0.0;

#[inline]
pub fn is_valid_disparity(d: f32) -> bool {
    d > 0.0 && d.is_finite()
}

/// Per-pixel segment labels with a compact label range.
///
/// Every stored label is `< num_labels` and every label in `0..num_labels`
/// occurs at least once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMap {
    labels: Grid<u32>,
    num_labels: usize,
}

impl LabelMap {
    /// Wraps an arbitrary labeling, renumbering labels compactly in order of
    /// first appearance (row-major).
    pub fn from_raw(labels: Grid<u32>) -> Self {
        let mut remap = std::collections::HashMap::new();
        let mut next = 0u32;
        let relabeled = labels.map(|&l| {
            *remap.entry(l).or_insert_with(|| {
                let id = next;
                next += 1;
                id
            })
        });
        LabelMap {
            labels: relabeled,
            num_labels: next as usize,
        }
    }

    /// Like [`LabelMap::from_raw`] for labels already known to be dense in
    /// `0..bound`; avoids hashing.
    pub fn from_dense(labels: Grid<u32>, bound: usize) -> Self {
        let mut remap = vec![u32::MAX; bound];
        let mut next = 0u32;
        let relabeled = labels.map(|&l| {
            let slot = &mut remap[l as usize];
            if *slot == u32::MAX {
                *slot = next;
                next += 1;
            }
            *slot
        });
        LabelMap {
            labels: relabeled,
            num_labels: next as usize,
        }
    }

    #[inline]
    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    #[inline]
    pub fn grid(&self) -> &Grid<u32> {
        &self.labels
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.labels.width()
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.labels.height()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        *self.labels.get(x, y)
    }

    pub fn as_slice(&self) -> &[u32] {
        self.labels.as_slice()
    }

    /// Pixel count per label.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.num_labels];
        for &l in self.labels.as_slice() {
            sizes[l as usize] += 1;
        }
        sizes
    }

    /// True when `self` and `other` group pixels identically, ignoring label ids.
    pub fn same_partition(&self, other: &LabelMap) -> bool {
        if self.labels.dims() != other.labels.dims() || self.num_labels != other.num_labels {
            return false;
        }
        let mut fwd = vec![u32::MAX; self.num_labels];
        for (&a, &b) in self.as_slice().iter().zip(other.as_slice()) {
            let slot = &mut fwd[a as usize];
            if *slot == u32::MAX {
                *slot = b;
            } else if *slot != b {
                return false;
            }
        }
        // Equal label counts plus a well-defined forward map make it a bijection.
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_bad_dims() {
        assert!(Grid::new(0, 3, Vec::<u8>::new()).is_err());
        assert!(Grid::new(2, 2, vec![0u8; 3]).is_err());
        assert!(Grid::new(2, 2, vec![0u8; 4]).is_ok());
    }

    #[test]
    fn clamped_access_replicates_edges() {
        let g = Grid::from_fn(3, 2, |x, y| (x + 10 * y) as i32);
        assert_eq!(*g.get_clamped(-5, 0), 0);
        assert_eq!(*g.get_clamped(7, 9), 12);
    }

    #[test]
    fn compact_relabel_is_order_of_appearance() {
        let raw = Grid::new(4, 1, vec![7u32, 7, 3, 9]).unwrap();
        let lm = LabelMap::from_raw(raw);
        assert_eq!(lm.as_slice(), &[0, 0, 1, 2]);
        assert_eq!(lm.num_labels(), 3);
        assert_eq!(lm.sizes(), vec![2, 1, 1]);
    }

    #[test]
    fn partition_comparison_ignores_ids() {
        let a = LabelMap::from_raw(Grid::new(4, 1, vec![0u32, 0, 1, 2]).unwrap());
        let b = LabelMap::from_raw(Grid::new(4, 1, vec![5u32, 5, 9, 1]).unwrap());
        let c = LabelMap::from_raw(Grid::new(4, 1, vec![0u32, 1, 1, 2]).unwrap());
        assert!(a.same_partition(&b));
        assert!(!a.same_partition(&c));
    }
}
