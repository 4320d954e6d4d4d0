//! Sliding-window box averaging for one detector stream.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::bbox::{center_distance, BBox2D};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemporalParams {
    /// Number of frames kept.
    pub window: usize,
    /// Largest center displacement, in pixels, that links boxes across frames.
    pub match_radius: f64,
    /// Frames a chain must appear in before it is reported.
    pub min_presence: usize,
}

impl Default for TemporalParams {
    fn default() -> Self {
        TemporalParams {
            window: 5,
            match_radius: 40.0,
            min_presence: 3,
        }
    }
}

impl TemporalParams {
    pub fn validate(&self) -> Result<()> {
        if self.window < 1 {
            return Err(Error::param("temporal window must hold at least one frame"));
        }
        if !(self.match_radius > 0.0) {
            return Err(Error::param("temporal match_radius must be > 0"));
        }
        if self.min_presence < 1 || self.min_presence > self.window {
            return Err(Error::param("temporal min_presence must be in 1..=window"));
        }
        Ok(())
    }
}

/// A box averaged over the frames of its chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AveragedBox {
    pub bbox: BBox2D,
    pub frames_present: usize,
}

/// Per-stream buffer of the last `window` frames of boxes.
///
/// Owned by exactly one frame-ordered caller.
#[derive(Clone, Debug, PartialEq)]
pub struct TemporalWindow {
    params: TemporalParams,
    frames: VecDeque<Vec<BBox2D>>,
}

impl TemporalWindow {
    pub fn new(params: TemporalParams) -> Result<Self> {
        params.validate()?;
        Ok(TemporalWindow {
            params,
            frames: VecDeque::with_capacity(params.window),
        })
    }

    pub fn params(&self) -> &TemporalParams {
        &self.params
    }

    pub fn buffered(&self) -> usize {
        self.frames.len()
    }

    /// Pushes `new_boxes` and returns the averaged boxes of every chain seen
    /// in at least `min_presence` buffered frames.
    pub fn push(&mut self, new_boxes: &[BBox2D]) -> Vec<AveragedBox> {
        self.frames.push_back(new_boxes.to_vec());
        while self.frames.len() > self.params.window {
            self.frames.pop_front();
        }
        let chains = self.chains();
        chains
            .iter()
            .filter(|c| c.len() >= self.params.min_presence)
            .map(|chain| {
                let n = chain.len() as f64;
                let mean = |f: fn(&BBox2D) -> i32| (chain.iter().map(|b| f(b) as f64).sum::<f64>() / n).round() as i32;
                let last = chain.last().expect("chains are non-empty");
                AveragedBox {
                    bbox: BBox2D::new(
                        mean(|b| b.x_min),
                        mean(|b| b.y_min),
                        mean(|b| b.x_max),
                        mean(|b| b.y_max),
                        last.channel,
                    ),
                    frames_present: chain.len(),
                }
            })
            .collect()
    }

    /// Links boxes oldest to newest. Each frame's boxes are matched to the
    /// chains' latest boxes by ascending center distance within the match
    /// radius; leftovers open new chains.
    fn chains(&self) -> Vec<Vec<BBox2D>> {
        let mut chains: Vec<Vec<BBox2D>> = Vec::new();
        for frame in &self.frames {
            let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
            for (ci, chain) in chains.iter().enumerate() {
                let tail = chain.last().expect("chains are non-empty");
                for (bi, b) in frame.iter().enumerate() {
                    let d = center_distance(tail, b);
                    if d <= self.params.match_radius {
                        pairs.push((d, ci, bi));
                    }
                }
            }
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
            let mut chain_used = vec![false; chains.len()];
            let mut box_used = vec![false; frame.len()];
            for (_, ci, bi) in pairs {
                if chain_used[ci] || box_used[bi] {
                    continue;
                }
                chain_used[ci] = true;
                box_used[bi] = true;
                chains[ci].push(frame[bi]);
            }
            for (bi, b) in frame.iter().enumerate() {
                if !box_used[bi] {
                    chains.push(vec![*b]);
                }
            }
        }
        chains
    }
}

/// One-shot form: pushes `new_boxes` into `win` and returns the averaged boxes.
pub fn temporal_average(win: &mut TemporalWindow, new_boxes: &[BBox2D]) -> Vec<AveragedBox> {
    win.push(new_boxes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bbox::Channel;
    use proptest::prelude::*;

    fn b(x0: i32, y0: i32, x1: i32, y1: i32) -> BBox2D {
        BBox2D::new(x0, y0, x1, y1, Channel::Stereo)
    }

    #[test]
    fn steady_box_reported_after_presence() {
        let mut win = TemporalWindow::new(TemporalParams::default()).unwrap();
        let bx = b(10, 10, 40, 40);
        assert!(win.push(&[bx]).is_empty());
        assert!(win.push(&[bx]).is_empty());
        for n in 3..=7 {
            let out = win.push(&[bx]);
            assert_eq!(out, vec![AveragedBox { bbox: bx, frames_present: n.min(5) }]);
        }
        assert_eq!(win.buffered(), 5);
    }

    #[test]
    fn transient_box_suppressed() {
        let mut win = TemporalWindow::new(TemporalParams::default()).unwrap();
        win.push(&[b(0, 0, 9, 9)]);
        for _ in 0..4 {
            assert!(win.push(&[]).is_empty());
        }
    }

    #[test]
    fn moving_box_mean() {
        let mut win = TemporalWindow::new(TemporalParams::default()).unwrap();
        let mut out = Vec::new();
        for x in [10, 12, 14, 16, 18] {
            out = win.push(&[b(x, 0, 60, 30)]);
        }
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].bbox.x_min, 14);
        assert_eq!(out[0].frames_present, 5);
    }

    #[test]
    fn far_jump_starts_new_chain() {
        let mut win = TemporalWindow::new(TemporalParams::default()).unwrap();
        win.push(&[b(0, 0, 10, 10)]);
        win.push(&[b(0, 0, 10, 10)]);
        let out = win.push(&[b(500, 0, 510, 10)]);
        assert!(out.is_empty());
    }

    #[test]
    fn invalid_params() {
        assert!(TemporalWindow::new(TemporalParams { min_presence: 6, ..Default::default() }).is_err());
        assert!(TemporalWindow::new(TemporalParams { window: 0, min_presence: 0, ..Default::default() }).is_err());
    }

    proptest! {
        #[test]
        fn unit_window_is_identity(
            raw in proptest::collection::vec((0i32..500, 0i32..500, 1i32..40, 1i32..40), 0..12)
        ) {
            let boxes: Vec<BBox2D> = raw.iter().map(|&(x, y, w, h)| b(x, y, x + w, y + h)).collect();
            let mut win = TemporalWindow::new(TemporalParams { window: 1, match_radius: 10.0, min_presence: 1 }).unwrap();
            let mut out: Vec<BBox2D> = win.push(&boxes).into_iter().map(|a| a.bbox).collect();
            let mut expected = boxes.clone();
            let key = |b: &BBox2D| (b.x_min, b.y_min, b.x_max, b.y_max);
            out.sort_by_key(key);
            expected.sort_by_key(key);
            prop_assert_eq!(out, expected);
        }
    }
}
