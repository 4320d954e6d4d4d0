//! Scoring detections against rendered ground truth.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bbox::{bbox_iou, BBox2D};
use crate::error::{Error, Result};

use super::render::GroundTruthFrame;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameMetrics {
    pub frame_id: u64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// `(obstacle id, IoU)` for each true positive.
    pub matches: Vec<(u32, f64)>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstacleStats {
    pub frames: usize,
    pub detected: usize,
}

impl ObstacleStats {
    pub fn rate(&self) -> f64 {
        if self.frames == 0 {
            1.0
        } else {
            self.detected as f64 / self.frames as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub frames: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// TP / (TP + FN); 1 when there is nothing to find.
    pub detection_rate: f64,
    pub fp_per_frame: f64,
    /// Mean IoU over true positives; 0 when there are none.
    pub mean_iou: f64,
    pub per_obstacle: BTreeMap<u32, ObstacleStats>,
    pub per_frame: Vec<FrameMetrics>,
}

fn box_key(b: &BBox2D) -> (i32, i32, i32, i32) {
    (b.x_min, b.y_min, b.x_max, b.y_max)
}

/// Greedy one-to-one matching by descending IoU. Ties break on the truth id
/// and then on detection coordinates, so input order never matters.
pub fn match_frame(dets: &[BBox2D], truth: &GroundTruthFrame, iou_threshold: f64) -> FrameMetrics {
    let mut pairs: Vec<(f64, u32, (i32, i32, i32, i32), usize, usize)> = Vec::new();
    for (ti, t) in truth.true_boxes.iter().enumerate() {
        for (di, d) in dets.iter().enumerate() {
            let iou = bbox_iou(d, &t.bbox);
            if iou >= iou_threshold && iou > 0.0 {
                pairs.push((iou, t.id, box_key(d), ti, di));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut t_used = vec![false; truth.true_boxes.len()];
    let mut d_used = vec![false; dets.len()];
    let mut matches = Vec::new();
    for (iou, id, _, ti, di) in pairs {
        if t_used[ti] || d_used[di] {
            continue;
        }
        t_used[ti] = true;
        d_used[di] = true;
        matches.push((id, iou));
    }
    matches.sort_by_key(|m| m.0);
    FrameMetrics {
        frame_id: truth.frame_id,
        tp: matches.len(),
        fp: dets.len() - matches.len(),
        fn_: truth.true_boxes.len() - matches.len(),
        matches,
    }
}

/// Scores per-frame detections against truth. Both lists must cover the same
/// frame ids.
pub fn evaluate(results: &[(u64, Vec<BBox2D>)], truth: &[GroundTruthFrame], iou_threshold: f64) -> Result<Metrics> {
    if !(iou_threshold > 0.0 && iou_threshold <= 1.0) {
        return Err(Error::InvalidParameter("iou threshold must be in (0, 1]".into()));
    }
    let by_id: BTreeMap<u64, &Vec<BBox2D>> = results.iter().map(|(id, b)| (*id, b)).collect();
    if by_id.len() != results.len() {
        return Err(Error::FrameMismatch("duplicate frame ids in results".into()));
    }
    if by_id.len() != truth.len() {
        return Err(Error::FrameMismatch(format!(
            "{} result frames vs {} truth frames",
            by_id.len(),
            truth.len()
        )));
    }
    let mut per_frame = Vec::with_capacity(truth.len());
    let mut per_obstacle: BTreeMap<u32, ObstacleStats> = BTreeMap::new();
    for t in truth {
        let dets = by_id
            .get(&t.frame_id)
            .ok_or_else(|| Error::FrameMismatch(format!("no result for frame {}", t.frame_id)))?;
        let fm = match_frame(dets, t, iou_threshold);
        for tb in &t.true_boxes {
            let s = per_obstacle.entry(tb.id).or_default();
            s.frames += 1;
            if fm.matches.iter().any(|m| m.0 == tb.id) {
                s.detected += 1;
            }
        }
        per_frame.push(fm);
    }
    let tp: usize = per_frame.iter().map(|f| f.tp).sum();
    let fp: usize = per_frame.iter().map(|f| f.fp).sum();
    let fn_: usize = per_frame.iter().map(|f| f.fn_).sum();
    let iou_sum: f64 = per_frame.iter().flat_map(|f| f.matches.iter().map(|m| m.1)).sum();
    let frames = per_frame.len();
    Ok(Metrics {
        frames,
        tp,
        fp,
        fn_,
        detection_rate: if tp + fn_ == 0 { 1.0 } else { tp as f64 / (tp + fn_) as f64 },
        fp_per_frame: if frames == 0 { 0.0 } else { fp as f64 / frames as f64 },
        mean_iou: if tp == 0 { 0.0 } else { iou_sum / tp as f64 },
        per_obstacle,
        per_frame,
    })
}

/// Pretty JSON of `m`.
pub fn metrics_json(m: &Metrics) -> String {
    serde_json::to_string_pretty(m).expect("metrics serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bbox::Channel;
    use crate::geometry::PlaneModel;
    use crate::synth::render::TruthBox;
    use proptest::prelude::*;

    fn truth(id: u64, boxes: &[BBox2D]) -> GroundTruthFrame {
        GroundTruthFrame {
            frame_id: id,
            true_boxes: boxes.iter().enumerate().map(|(i, &bbox)| TruthBox { id: i as u32, bbox }).collect(),
            true_plane: PlaneModel { normal: [0.0, -1.0, 0.0], offset: 1.0, inlier_count: 0 },
        }
    }

    fn b(x0: i32, y0: i32, x1: i32, y1: i32) -> BBox2D {
        BBox2D::new(x0, y0, x1, y1, Channel::Fused)
    }

    #[test]
    fn perfect_match() {
        let t = [truth(0, &[b(0, 0, 9, 9)])];
        let m = evaluate(&[(0, vec![b(0, 0, 9, 9)])], &t, 0.5).unwrap();
        assert_eq!((m.tp, m.fp, m.fn_), (1, 0, 0));
        assert_eq!(m.mean_iou, 1.0);
    }

    #[test]
    fn miss_and_weak_overlap() {
        let t = [truth(0, &[b(0, 0, 9, 9)])];
        let m = evaluate(&[(0, vec![])], &t, 0.5).unwrap();
        assert_eq!((m.tp, m.fp, m.fn_), (0, 0, 1));
        // 30 of 100 pixels overlap: IoU = 30 / 170
        let m = evaluate(&[(0, vec![b(7, 0, 16, 9)])], &t, 0.5).unwrap();
        assert_eq!((m.tp, m.fp, m.fn_), (0, 1, 1));
        assert_eq!(m.detection_rate, 0.0);
        assert_eq!(m.fp_per_frame, 1.0);
    }

    #[test]
    fn mismatched_frames() {
        let t = [truth(0, &[]), truth(1, &[])];
        assert!(matches!(evaluate(&[(0, vec![])], &t, 0.5), Err(Error::FrameMismatch(_))));
        assert!(evaluate(&[(0, vec![]), (2, vec![])], &t, 0.5).is_err());
        assert!(evaluate(&[(1, vec![]), (0, vec![])], &t, 0.5).is_ok());
    }

    proptest! {
        #[test]
        fn order_invariant(
            tb in proptest::collection::vec((0i32..100, 0i32..100, 5i32..30, 5i32..30), 0..5),
            db in proptest::collection::vec((0i32..100, 0i32..100, 5i32..30, 5i32..30), 0..8),
            rot in 0usize..8,
        ) {
            let mk = |v: &[(i32, i32, i32, i32)]| v.iter().map(|&(x, y, w, h)| b(x, y, x + w, y + h)).collect::<Vec<_>>();
            let t = [truth(3, &mk(&tb))];
            let dets = mk(&db);
            let mut shuffled = dets.clone();
            shuffled.reverse();
            if !shuffled.is_empty() {
                let r = rot % shuffled.len();
                shuffled.rotate_left(r);
            }
            let a = evaluate(&[(3, dets)], &t, 0.3).unwrap();
            let c = evaluate(&[(3, shuffled)], &t, 0.3).unwrap();
            prop_assert_eq!(a, c);
        }
    }
}
